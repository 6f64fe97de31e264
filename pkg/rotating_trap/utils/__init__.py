"""Utility components."""

__all__ = ["config", "logger", "errors"]

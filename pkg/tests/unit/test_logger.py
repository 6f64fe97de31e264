"""Unit tests for the structured logging helpers."""

import logging

from rotating_trap.utils.logger import (
    SERVICE_NAME,
    AuditLogger,
    PerformanceLogger,
    TrapLogger,
    configure_logging,
    get_audit_logger,
    get_logger,
    get_performance_logger,
)


class TestTrapLogger:
    """Test cases for TrapLogger."""

    def test_default_context(self):
        logger = get_logger("solver")
        assert logger.context["service"] == SERVICE_NAME
        assert "version" in logger.context

    def test_with_context_is_a_copy(self):
        base = get_logger("solver", {"component": "series"})
        child = base.with_context(mode=3)
        assert child.context["component"] == "series"
        assert child.context["mode"] == 3
        assert "mode" not in base.context

    def test_context_is_forwarded(self, mocker):
        logger = TrapLogger("solver", {"component": "series"})
        backend = mocker.patch.object(logger, "logger")
        logger.warning("Slow tail", modes=2000)
        backend.warning.assert_called_once()
        kwargs = backend.warning.call_args.kwargs
        assert kwargs["component"] == "series"
        assert kwargs["modes"] == 2000


class TestSpecialisedLoggers:
    """Test cases for the performance and audit loggers."""

    def test_execution_time(self, mocker):
        perf = get_performance_logger("table")
        assert isinstance(perf, PerformanceLogger)
        info = mocker.patch.object(perf.logger, "info")
        perf.log_execution_time("flux_table", 0.25, points=8)
        kwargs = info.call_args.kwargs
        assert kwargs["duration_ms"] == 250.0
        assert kwargs["points"] == 8

    def test_solver_summary(self, mocker):
        perf = get_performance_logger("bie")
        debug = mocker.patch.object(perf.logger, "debug")
        perf.log_solver_summary("nystrom", 128, 1e-12, condition=40.0)
        assert debug.call_args.kwargs["size"] == 128
        assert debug.call_args.kwargs["condition"] == 40.0

    def test_run_parameters_are_strings(self, mocker):
        audit = get_audit_logger("cli")
        assert isinstance(audit, AuditLogger)
        info = mocker.patch.object(audit.logger, "info")
        audit.log_run_parameters("mass", {"r0": 0.5, "threads": None})
        kwargs = info.call_args.kwargs
        assert kwargs["parameters"] == {"r0": "0.5", "threads": "None"}
        assert kwargs["command"] == "mass"


class TestConfigureLogging:
    """Test cases for configure_logging."""

    def test_level_and_file(self, tmp_path):
        log_file = tmp_path / "logs" / "run.log"
        configure_logging(level="DEBUG", format_type="json", log_file=str(log_file))
        assert logging.getLogger(SERVICE_NAME).level == logging.DEBUG
        assert log_file.parent.exists()
        configure_logging(level="INFO", format_type="console")

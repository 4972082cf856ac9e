import os

import pytest

from toricount.logger import Logger, LogLevel, _NoOpLogger, default_log_path, get_logger, reset_logging, setup_logging


@pytest.fixture
def log_file(tmp_path):
    return str(tmp_path / "toricount.log")


def _lines(path):
    with open(path, "r", encoding="utf-8") as f:
        return f.read().splitlines()


class TestLogger:
    def test_level_filtering(self, log_file):
        """Test that messages below the logger level are not written."""
        logger = Logger(log_file, LogLevel.WARNING)

        logger.debug("euler factor 3 of 8")
        logger.info("mu series ready")
        logger.warning("budget nearly exhausted")
        logger.error("class does not specialize")

        content = "\n".join(_lines(log_file))
        assert "euler factor" not in content
        assert "mu series ready" not in content
        assert "budget nearly exhausted" in content
        assert "class does not specialize" in content

    def test_line_format(self, log_file):
        """Test the timestamp, level, module and message layout of a line."""
        logger = Logger(log_file, LogLevel.DEBUG)
        logger.info("mu series truncated at 8", module="toricount.moebius")

        (line,) = _lines(log_file)
        # [YYYY-MM-DD HH:MM:SS] [LEVEL] [module] message
        assert line.startswith("[")
        assert line.endswith("] [INFO] [toricount.moebius] mu series truncated at 8")

    def test_module_is_optional(self, log_file):
        """Test that a line without a module omits the module field."""
        Logger(log_file).info("plain")
        (line,) = _lines(log_file)
        assert line.endswith("] [INFO] plain")


class TestContext:
    def test_tags_are_written(self, log_file):
        """Test that context tags appear on lines written inside the block only."""
        logger = Logger(log_file)
        with logger.context(variety="BlP2", q=3):
            logger.info("count ready", module="toricount.census")
        logger.info("after")

        tagged, plain = _lines(log_file)
        assert tagged.endswith("[toricount.census] {variety=BlP2 q=3} count ready")
        assert "{" not in plain

    def test_nested_tags_shadow(self, log_file):
        """Test that an inner context overrides a tag and the outer one returns after it."""
        logger = Logger(log_file)
        with logger.context(suite="oracle", q=2):
            with logger.context(check="P2:counts", q=3):
                assert logger.tags() == "suite=oracle q=3 check=P2:counts"
            assert logger.tags() == "suite=oracle q=2"
        assert logger.tags() == ""

    def test_tags_are_dropped_on_exception(self, log_file):
        """Test that tags are cleared when the block raises."""
        logger = Logger(log_file)
        with pytest.raises(RuntimeError):
            with logger.context(variety="dP6"):
                raise RuntimeError("boom")
        assert logger.tags() == ""

    def test_suite_lines_are_tagged(self, log_file):
        """Test that each suite check logs one line tagged with its suite and check."""
        from toricount.suites import SuiteParams, run_suite

        setup_logging(log_file, LogLevel.INFO)
        results = run_suite("toric-identities", SuiteParams())

        lines = [line for line in _lines(log_file) if "[toricount.suites]" in line]
        assert len(lines) == len(results)
        first = results[0]
        assert f"{{suite=toric-identities check={first.name}}} {first.status}" in lines[0]


class TestTimed:
    def test_writes_debug_line(self, log_file):
        """Test that timed writes a tagged debug line with the elapsed time."""
        logger = Logger(log_file, LogLevel.DEBUG)
        with logger.context(variety="P2"):
            with logger.timed("brute force", module="toricount.census"):
                pass

        (line,) = _lines(log_file)
        assert "[DEBUG] [toricount.census] {variety=P2} brute force took" in line

    def test_respects_level(self, log_file):
        """Test that timed writes nothing above debug level."""
        logger = Logger(log_file, LogLevel.INFO)
        with logger.timed("quiet"):
            pass
        assert not os.path.exists(log_file)

    def test_logs_even_on_exception(self, log_file):
        """Test that timed still logs when the block raises."""
        logger = Logger(log_file, LogLevel.DEBUG)
        with pytest.raises(RuntimeError):
            with logger.timed("failing"):
                raise RuntimeError("boom")
        assert "failing took" in _lines(log_file)[0]


class TestNoOpLogger:
    def test_methods_do_nothing(self):
        """Test that the no-op logger accepts every call and writes nothing."""
        logger = _NoOpLogger()

        logger.debug("test")
        logger.info("test")
        logger.warning("test")
        logger.error("test")
        with logger.context(variety="P1"), logger.timed("test", module="toricount.cox3"):
            pass
        assert logger.tags() == ""


class TestSetupLogging:
    def test_creates_directory(self, tmp_path):
        """Test that setup creates missing log directories."""
        log_dir = tmp_path / "logs" / "nested"
        setup_logging(str(log_dir / "test.log"), LogLevel.INFO)
        assert log_dir.is_dir()

    def test_returns_global_logger(self, log_file):
        """Test that setup installs the logger returned by get_logger."""
        logger = setup_logging(log_file, LogLevel.DEBUG)

        assert isinstance(logger, Logger)
        assert logger.level == LogLevel.DEBUG
        assert get_logger() is logger

    def test_reset_restores_no_op(self, log_file):
        """Test that reset puts the no-op logger back."""
        setup_logging(log_file, LogLevel.INFO)
        reset_logging()

        logger = get_logger()
        assert isinstance(logger, _NoOpLogger)
        logger.error("this should not be written")
        assert not os.path.exists(log_file)

    def test_default_log_path(self, tmp_path):
        """Test the timestamped default log path under .toricount/logs."""
        path = default_log_path(str(tmp_path))
        assert os.path.dirname(path) == os.path.join(str(tmp_path), ".toricount", "logs")
        name = os.path.basename(path)
        assert name.startswith("toricount_") and name.endswith(".log")
        assert len(name) == len("toricount_20260101_120000.log")


class TestLogLevel:
    @pytest.mark.parametrize(
        "text, level",
        [("DEBUG", LogLevel.DEBUG), ("debug", LogLevel.DEBUG), ("Info", LogLevel.INFO), (" warning ", LogLevel.WARNING)],
    )
    def test_from_string(self, text, level):
        """Test that level names parse regardless of case and whitespace."""
        assert LogLevel.from_string(text) is level

    def test_from_string_invalid(self):
        """Test that an unknown level name raises ValueError."""
        with pytest.raises(ValueError, match="Invalid log level"):
            LogLevel.from_string("TRACE")

import os
import time
from contextlib import contextmanager
from datetime import datetime
from enum import Enum
from typing import Dict, Iterator, List, Optional


class LogLevel(Enum):
    """Log level enumeration."""

    DEBUG = 10
    INFO = 20
    WARNING = 30
    ERROR = 40

    @classmethod
    def from_string(cls, level_str: str) -> "LogLevel":
        """Convert string to LogLevel (case-insensitive)."""
        try:
            return cls[level_str.strip().upper()]
        except KeyError:
            raise ValueError(f"Invalid log level: {level_str}")


class _BaseLogger:
    """Level methods, timing and context tags; subclasses decide where lines go."""

    def __init__(self) -> None:
        self._context: List[Dict[str, object]] = []

    def _emit(self, level: LogLevel, message: str, module: str) -> None:
        raise NotImplementedError

    def debug(self, message: str, module: str = "") -> None:
        self._emit(LogLevel.DEBUG, message, module)

    def info(self, message: str, module: str = "") -> None:
        self._emit(LogLevel.INFO, message, module)

    def warning(self, message: str, module: str = "") -> None:
        self._emit(LogLevel.WARNING, message, module)

    def error(self, message: str, module: str = "") -> None:
        self._emit(LogLevel.ERROR, message, module)

    @contextmanager
    def context(self, **fields: object) -> Iterator[None]:
        """Tag every line written inside the block with ``key=value`` pairs.

        Nested blocks add to the outer tags; an inner key shadows an outer one.
        """
        self._context.append(fields)
        try:
            yield
        finally:
            self._context.pop()

    def tags(self) -> str:
        merged: Dict[str, object] = {}
        for fields in self._context:
            merged.update(fields)
        return " ".join(f"{key}={value}" for key, value in merged.items())

    @contextmanager
    def timed(self, label: str, module: str = "") -> Iterator[None]:
        """Log the wall time spent inside the block at DEBUG level."""
        start = time.perf_counter()
        try:
            yield
        finally:
            self.debug(f"{label} took {time.perf_counter() - start:.3f}s", module)


class _NoOpLogger(_BaseLogger):
    """Returned by get_logger() until setup_logging() runs; library code logs unconditionally."""

    def _emit(self, level: LogLevel, message: str, module: str) -> None:
        pass


class Logger(_BaseLogger):
    """Append-only file logger shared by the library and the CLI.

    Line format::

        [2026-10-18 10:15:00] [INFO] [toricount.suites] {suite=oracle check=P2:counts:q=2} pass
    """

    def __init__(self, log_file: str, level: LogLevel = LogLevel.INFO):
        super().__init__()
        self.log_file = log_file
        self.level = level

    def _emit(self, level: LogLevel, message: str, module: str) -> None:
        if level.value < self.level.value:
            return

        timestamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
        parts = [f"[{timestamp}]", f"[{level.name}]"]
        if module:
            parts.append(f"[{module}]")
        tags = self.tags()
        if tags:
            parts.append(f"{{{tags}}}")
        parts.append(message)

        with open(self.log_file, "a", encoding="utf-8") as f:
            f.write(" ".join(parts) + "\n")


_logger: Optional[Logger] = None
_no_op_logger = _NoOpLogger()


def default_log_path(base_dir: Optional[str] = None) -> str:
    """./.toricount/logs/toricount_YYYYMMDD_HHMMSS.log"""
    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    return os.path.join(base_dir or os.getcwd(), ".toricount", "logs", f"toricount_{timestamp}.log")


def setup_logging(log_file: str, level: LogLevel = LogLevel.INFO) -> Logger:
    """Install the global file logger, creating its directory.

    Args:
        log_file: Path to log file
        level: Minimum log level

    Returns:
        Configured logger instance
    """
    global _logger

    log_dir = os.path.dirname(log_file)
    if log_dir:
        os.makedirs(log_dir, exist_ok=True)

    _logger = Logger(log_file, level)
    return _logger


def reset_logging() -> None:
    """Drop the global logger; later get_logger() calls return the no-op logger."""
    global _logger
    _logger = None


def get_logger() -> _BaseLogger:
    """The global logger, or a no-op logger when logging is not initialized."""
    if _logger is None:
        return _no_op_logger
    return _logger

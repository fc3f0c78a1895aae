import logging
from datetime import datetime
from enum import Enum
from logging.config import dictConfig
from typing import Union

from rich.console import Console
from rich.logging import RichHandler

from gmcluster.system.paths_and_filenames.path_getters import get_log_file_path


class LogLevel(Enum):
    TRACE = 5
    DEBUG = logging.DEBUG  # 10
    INFO = logging.INFO  # 20
    SUCCESS = 25
    WARNING = logging.WARNING  # 30
    ERROR = logging.ERROR  # 40
    CRITICAL = logging.CRITICAL  # 50


logging.addLevelName(LogLevel.TRACE.value, "TRACE")
logging.addLevelName(LogLevel.SUCCESS.value, "SUCCESS")


def log_level_from_name(name: Union[str, LogLevel]) -> LogLevel:
    if isinstance(name, LogLevel):
        return name
    try:
        return LogLevel[name.upper()]
    except KeyError:
        raise ValueError(f"Unknown log level `{name}`, expected one of {[level.name for level in LogLevel]}")


class DeltaTimeFilter(logging.Filter):
    """Stamps each record with the wall time since the previous one, handy for spotting slow solver stages."""

    def __init__(self):
        super().__init__()
        self.previous_timestamp = datetime.now().timestamp()

    def filter(self, record):
        now = record.created
        record.delta_t = f"Δt:{now - self.previous_timestamp:.6f}s"
        self.previous_timestamp = now
        return True


class MicrosecondFormatter(logging.Formatter):
    def formatTime(self, record, datefmt=None):
        return datetime.fromtimestamp(record.created).strftime("%Y-%m-%dT%H:%M:%S.%f")


class LoggerBuilder:
    DEFAULT_LOGGING = {"version": 1, "disable_existing_loggers": False}

    file_format_string = (
        "[%(asctime)s] [%(delta_t)s] [%(levelname)8s] [%(name)s] "
        "[%(module)s:%(funcName)s():%(lineno)s] [PID:%(process)d] %(message)s"
    )
    console_format_string = "[%(delta_t)s] %(message)s"

    def __init__(self, level: LogLevel):
        dictConfig(self.DEFAULT_LOGGING)
        logging.root.setLevel(level.value)

    def build_file_handler(self) -> logging.Handler:
        file_handler = logging.FileHandler(get_log_file_path(), encoding="utf-8")
        file_handler.setLevel(LogLevel.TRACE.value)
        file_handler.setFormatter(MicrosecondFormatter(fmt=self.file_format_string))
        file_handler.addFilter(DeltaTimeFilter())
        return file_handler

    def build_console_handler(self) -> logging.Handler:
        # stderr, so stdout carries nothing but subcommand results
        console_handler = RichHandler(
            console=Console(stderr=True),
            show_path=False,
            markup=False,
            log_time_format="[%H:%M:%S]",
        )
        console_handler.setLevel(LogLevel.TRACE.value)
        console_handler.setFormatter(logging.Formatter(self.console_format_string))
        console_handler.addFilter(DeltaTimeFilter())
        return console_handler

    def configure(self):
        root_logger = logging.getLogger("")
        if any(getattr(handler, "_gmcluster_handler", False) for handler in root_logger.handlers):
            root_logger.debug("Logging already configured")
            return

        for handler in [self.build_file_handler(), self.build_console_handler()]:
            handler._gmcluster_handler = True
            root_logger.addHandler(handler)


def _add_custom_level_methods():
    def trace(self, message, *args, **kws):
        if self.isEnabledFor(LogLevel.TRACE.value):
            self._log(LogLevel.TRACE.value, message, args, **kws, stacklevel=2)

    def success(self, message, *args, **kws):
        if self.isEnabledFor(LogLevel.SUCCESS.value):
            self._log(LogLevel.SUCCESS.value, message, args, **kws, stacklevel=2)

    logging.Logger.trace = trace
    logging.Logger.success = success


def configure_logging(level: LogLevel = LogLevel.INFO):
    _add_custom_level_methods()
    LoggerBuilder(level).configure()


def set_logging_level(level: Union[str, LogLevel]):
    """Applies a `verbosity` setting once the run config is resolved."""
    logging.root.setLevel(log_level_from_name(level).value)

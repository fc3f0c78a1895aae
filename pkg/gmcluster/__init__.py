"""A numerical laboratory for boundary spike clusters of the two-dimensional Gierer-Meinhardt system."""

__author__ = """gmcluster developers"""
__version__ = "v0.3.0"
__description__ = "A numerical laboratory for boundary spike clusters of the two-dimensional Gierer-Meinhardt system"

__package_name__ = "gmcluster"

from gmcluster.system.logging.configure_logging import configure_logging, LogLevel

configure_logging(LogLevel.INFO)
import logging

logger = logging.getLogger(__name__)
logger.debug(f"Initializing {__package_name__} package, version: {__version__}, from file: {__file__}")

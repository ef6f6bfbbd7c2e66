# hqam_bicm/app/error_handler.py
import logging
from typing import Optional, Callable

from hqam_bicm.app.config import Config


class HqamBicmError(Exception):
    """Base class for toolkit errors."""


class ConfigError(HqamBicmError, ValueError):
    """Invalid user input: dimensions, divisibility, malformed text formats."""


class RegionError(ConfigError):
    """Constellation parameters outside the Gray-labeling region."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("alphas outside the valid region: " + "; ".join(self.violations))


class SpectrumSearchError(HqamBicmError):
    """Trellis search exceeded its step cap."""


class TargetUnreachableError(HqamBicmError):
    """Bisection target is not bracketed by the SNR search range."""


class NumericalValidityWarning(UserWarning):
    """Bound evaluated where it is not expected to be tight."""


class ErrorHandler:
    """Handles error logging and user notifications."""

    _notifier: Optional[Callable[[str, str], None]] = None

    @staticmethod
    def setup_logging(log_file: Optional[str] = Config.LOG_FILE, level: int = logging.INFO) -> None:
        """Setup logging configuration."""
        handlers = [logging.StreamHandler()]
        if log_file:
            handlers.append(logging.FileHandler(log_file, encoding=Config.DEFAULT_ENCODING))
        logging.basicConfig(
            level=level,
            format='%(asctime)s - %(levelname)s - %(message)s',
            handlers=handlers,
            force=True,
        )

    @staticmethod
    def set_notifier(notifier: Optional[Callable[[str, str], None]]) -> None:
        """Register the callable used to show errors to the user (title, message)."""
        ErrorHandler._notifier = notifier

    @staticmethod
    def handle_error(error_msg: str, exception: Optional[Exception] = None,
                     show_message: bool = True) -> None:
        """Handle errors with logging and user notification."""
        log_msg = f"{error_msg}: {exception}" if exception else error_msg
        logging.error(log_msg)

        if show_message and ErrorHandler._notifier is not None:
            ErrorHandler._notifier("Error", log_msg)

    @staticmethod
    def exit_code_for(exception: BaseException) -> int:
        """Map an exception to the command-line exit code."""
        if isinstance(exception, ConfigError):
            return Config.EXIT_CONFIG_ERROR
        if isinstance(exception, NumericalValidityWarning):
            return Config.EXIT_VALIDITY
        return Config.EXIT_FAILURE

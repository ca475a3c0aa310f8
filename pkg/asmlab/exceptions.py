"""Custom exceptions for asmlab."""

from typing import Any


class AsmLabError(Exception):
    """Base exception for all asmlab errors."""

    def __init__(self, message: str, **context: Any) -> None:
        super().__init__(message)
        self.message = message
        self.context = context

    def to_dict(self) -> dict[str, Any]:
        """Convert exception to dictionary."""
        return {
            "error_type": self.__class__.__name__,
            "message": self.message,
            "context": self.context,
        }


class ConfigurationError(AsmLabError):
    """Invalid network spec, config value or build-time shape mismatch."""

    pass


class UsageError(AsmLabError):
    """A call-time precondition was violated."""

    pass


class NumericError(AsmLabError):
    """A tensor picked up NaN or Inf."""

    def __init__(self, op: str, message: str | None = None, **context: Any) -> None:
        super().__init__(message or f"Non-finite values produced by {op}", op=op, **context)
        self.op = op


class TrainingAbortedError(NumericError):
    """Training stopped on a numeric fault; the last good state is on disk."""

    def __init__(
        self,
        op: str,
        last_good_iteration: int,
        checkpoint: str | None,
    ) -> None:
        super().__init__(
            op,
            f"Training aborted by non-finite values in {op} "
            f"(last good iteration {last_good_iteration})",
            last_good_iteration=last_good_iteration,
            checkpoint=checkpoint,
        )
        self.last_good_iteration = last_good_iteration
        self.checkpoint = checkpoint


class FormatError(AsmLabError):
    """A file did not parse as the expected format."""

    def __init__(self, fmt: str, details: str, path: str | None = None) -> None:
        super().__init__(f"Malformed {fmt}: {details}", format=fmt, details=details, path=path)


class DataError(AsmLabError):
    """Input data violates a metric or dataset precondition."""

    pass


class FileError(AsmLabError):
    """Reading or writing an artifact failed."""

    def __init__(self, path: str, operation: str, details: str) -> None:
        super().__init__(
            f"File {operation} failed for {path}: {details}",
            path=path,
            operation=operation,
            details=details,
        )


class ManifestMismatchError(AsmLabError):
    """Compared reports were evaluated on different manifests."""

    def __init__(self, expected: str, found: str) -> None:
        super().__init__(
            f"Manifest checksum mismatch: {expected[:12]} != {found[:12]}",
            expected=expected,
            found=found,
        )


def get_exit_code(error: Exception) -> int:
    """Map exception to CLI exit code."""
    code_map: dict[type[Exception], int] = {
        NumericError: 3,
        ConfigurationError: 2,
        UsageError: 2,
        FormatError: 2,
        DataError: 2,
        FileError: 2,
        ManifestMismatchError: 2,
    }

    for exc_type, code in code_map.items():
        if isinstance(error, exc_type):
            return code

    return 1

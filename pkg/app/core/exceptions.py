import logging
import sys

from pydantic import ValidationError

logger = logging.getLogger("udcd.error")

EXIT_UNEXPECTED = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class LabError(Exception):
    """Base error for the lab. `detail` is the one-line diagnostic."""

    exit_code = EXIT_NUMERICAL

    def __init__(self, detail: str = "Lab error"):
        super().__init__(detail)
        self.detail = detail


class DimensionMismatchError(LabError):
    def __init__(self, detail: str = "Dimension mismatch"):
        super().__init__(detail)


class NotHermitianError(LabError):
    def __init__(self, detail: str = "Matrix is not Hermitian"):
        super().__init__(detail)


class EigensolverError(LabError):
    def __init__(self, detail: str = "Eigensolver did not converge"):
        super().__init__(detail)


class GaugePotentialUndefinedError(LabError):
    """A degenerate pair of levels is coupled by dH, so the AGP is undefined."""

    def __init__(self, m: int, n: int, omega: float):
        super().__init__(
            f"Gauge potential undefined: levels ({m}, {n}) are degenerate "
            f"(omega_mn={omega:.3e}) but coupled by dH"
        )
        self.m = m
        self.n = n
        self.omega = omega


class EmptySpectralSupportError(LabError):
    def __init__(self, detail: str = "Spectral function has no line above threshold"):
        super().__init__(detail)


class DegenerateLevelError(LabError):
    def __init__(self, detail: str = "Target level is degenerate"):
        super().__init__(detail)


class DegeneratePointError(LabError):
    def __init__(self, detail: str = "Both fields vanish: the two-level gap is zero"):
        super().__init__(detail)


class ScheduleError(LabError):
    exit_code = EXIT_VALIDATION

    def __init__(self, detail: str = "Invalid angle schedule"):
        super().__init__(detail)


class ConfigError(LabError):
    exit_code = EXIT_VALIDATION

    def __init__(self, detail: str, key: str | None = None, line: int | None = None):
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + detail)
        self.key = key
        self.line = line


# -- Global CLI error handler --------------------------------------------------

def handle_cli_error(exc: BaseException, command: str | None = None) -> int:
    """Print a one-line diagnostic to stderr and return the process exit code."""
    if isinstance(exc, LabError):
        print(f"error: {exc.detail}", file=sys.stderr)
        logger.error(exc.detail, extra={"command": command})
        return exc.exit_code

    if isinstance(exc, ValidationError):
        errors = []
        for err in exc.errors():
            field = " → ".join(str(loc) for loc in err["loc"])
            errors.append(f"{field}: {err['msg']}" if field else err["msg"])
        detail = "; ".join(errors)
        print(f"error: validation failed: {detail}", file=sys.stderr)
        logger.error("Validation error", extra={"command": command})
        return EXIT_VALIDATION

    logger.exception("Unhandled error", extra={"command": command})
    print(f"error: internal error: {exc}", file=sys.stderr)
    return EXIT_UNEXPECTED

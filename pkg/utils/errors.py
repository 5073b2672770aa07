"""
Error hierarchy - every failure the library or the CLI can raise, with its exit code
"""

from typing import Any, Dict, Optional


class OneBitIsacError(Exception):
    """Base class; `exit_code` is what main.py returns for an uncaught instance"""

    exit_code = 1
    error_type = "unknown"

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}

    def to_dict(self) -> Dict[str, Any]:
        result = {
            "success": False,
            "error": str(self),
            "error_type": self.error_type,
            "exit_code": self.exit_code,
        }
        if self.diagnostics:
            result["diagnostics"] = self.diagnostics
        return result


class DomainError(OneBitIsacError, ValueError):
    error_type = "domain_error"


class ContractViolationError(OneBitIsacError):
    error_type = "contract_violation"


class ConstellationFormatError(OneBitIsacError):
    error_type = "constellation_format"

    def __init__(self, message: str, field: str):
        super().__init__(f"{message} (field: {field})", {"field": field})
        self.field = field


class ConfigError(OneBitIsacError):
    error_type = "config_error"


class OutputError(OneBitIsacError):
    error_type = "output_error"


class AcceptanceError(OneBitIsacError):
    exit_code = 2
    error_type = "acceptance_failure"


class SolverError(OneBitIsacError):
    exit_code = 3
    error_type = "solver_failure"


def classify_error(error: BaseException) -> str:
    """Classify error type for the result records and the summary printout"""
    if isinstance(error, OneBitIsacError):
        return error.error_type
    if isinstance(error, (OSError, PermissionError)):
        return "output_error"
    if isinstance(error, KeyboardInterrupt):
        return "interrupted"
    return "unknown"


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, OneBitIsacError):
        return error.exit_code
    return 1

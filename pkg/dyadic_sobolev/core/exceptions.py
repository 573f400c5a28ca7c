from typing import Any, Dict, Optional

EXIT_ASSERTION = 1
EXIT_USAGE = 2


class DyadicError(Exception):
    """Base exception for toolkit errors"""

    exit_code: int = EXIT_USAGE

    def __init__(
        self,
        error_code: str,
        message: str,
        details: Optional[Dict[str, Any]] = None,
    ):
        self.error_code = error_code
        self.message = message
        self.details = details or {}
        super().__init__(message)

    def __str__(self) -> str:  # Ensure str(e) returns the human message
        return self.message


class ScaleClampError(DyadicError):
    """A scale leaves the grid clamp or an index leaves int64"""

    def __init__(self, message: str = "Scale outside clamp", details: Optional[Dict] = None):
        super().__init__(error_code="CLAMP_001", message=message, details=details)


class ContainmentError(DyadicError):
    """Strict containment required between two dyadic intervals"""

    def __init__(self, message: str = "Strict containment required", details: Optional[Dict] = None):
        super().__init__(error_code="GRID_001", message=message, details=details)


class ParameterRangeError(DyadicError):
    """A parameter violates a stated constraint; the message names it"""

    def __init__(self, constraint: str, details: Optional[Dict] = None):
        self.constraint = constraint
        super().__init__(
            error_code="RANGE_001",
            message=f"requires {constraint}",
            details={"constraint": constraint, **(details or {})},
        )


class StepBudgetError(DyadicError):
    """A dense step function would exceed the configured piece budget"""

    def __init__(self, pieces: int, budget: int):
        super().__init__(
            error_code="BUDGET_001",
            message=f"Step function needs {pieces} pieces, budget is {budget}",
            details={"pieces": pieces, "budget": budget},
        )


class PayloadError(DyadicError):
    """Malformed JSON input"""

    def __init__(self, message: str = "Malformed payload", details: Optional[Dict] = None):
        super().__init__(error_code="PARSE_001", message=message, details=details)


class UnknownSuiteError(DyadicError):
    """Unknown verification suite name"""

    def __init__(self, name: str, known: list[str]):
        super().__init__(
            error_code="USAGE_001",
            message=f"Unknown suite: {name}",
            details={"suite": name, "known": known},
        )


class VerificationFailure(DyadicError):
    """An invariant or inequality failed"""

    exit_code = EXIT_ASSERTION

    def __init__(self, message: str = "Verification failed", details: Optional[Dict] = None):
        super().__init__(error_code="ASSERT_001", message=message, details=details)

"""Exception hierarchy shared by every module.

Domain errors carry a short machine code and a JSON-friendly context dict so
that the CLI can report them without inspecting the message text.
"""

from __future__ import annotations

from typing import Any


class ForgeError(Exception):
    code = "domain-error"

    def __init__(self, message: str, context: dict[str, Any] | None = None):
        super().__init__(message)
        self.message = message
        self.context = context or {}

    def to_json(self) -> dict[str, Any]:
        return {"code": self.code, "message": self.message, "context": self.context}


class MetricStructureError(ForgeError):
    """Distance matrix is not square or not symmetric."""

    code = "structure"


class ExtensionError(ForgeError):
    """A distance prescription violates the one-point extension condition."""

    code = "extension"


class InfeasibleError(ForgeError):
    code = "infeasible"


class PreconditionError(ForgeError):
    code = "precondition"


class SearchBudgetExceeded(ForgeError):
    code = "budget"

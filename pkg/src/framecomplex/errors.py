"""Exception types and three-valued verdicts shared across the toolkit."""

from __future__ import annotations

from dataclasses import dataclass, field


class FrameComplexError(Exception):
    pass


class InvalidInput(FrameComplexError):
    """Caller violated a documented precondition."""


class BudgetExceeded(FrameComplexError):
    """An enumeration/reduction budget ran out before a certain answer existed."""


class InternalConsistencyError(FrameComplexError):
    """A runtime self-check failed; indicates a bug, never a property of the input."""


PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"
HYPOTHESIS_VIOLATION = "hypothesis-violation"


@dataclass
class Verdict:
    """Outcome of a theorem/property check.

    `fail` means the checked statement was falsified (which for paper theorems
    would indicate an implementation bug), `inconclusive` means a budget ran
    out, and `hypothesis-violation` means the theorem's premises did not hold
    so no conclusion was asserted.
    """

    name: str
    status: str
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def as_dict(self) -> dict:
        return {"name": self.name, "status": self.status, "details": self.details}

from typing import List, Optional, Union

from pydantic import BaseModel, Field

Measurement = Union[float, List[float], None]


class VerificationCheck(BaseModel):
    name: str
    group: str
    passed: bool
    measured: Measurement = Field(..., description="Value the threshold is applied to")
    threshold: Measurement = Field(..., description="Bound, or [low, high] for a range")
    comparison: str = Field(..., description="How `measured` is compared with `threshold`")
    detail: Optional[str] = None


class VerificationReport(BaseModel):
    checks: List[VerificationCheck] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failed_checks(self) -> List[str]:
        return [check.name for check in self.checks if not check.passed]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks_run": len(self.checks),
            "failed_checks": self.failed_checks(),
            "checks": [check.dict() for check in self.checks],
        }


def below(name: str, group: str, measured: float, threshold: float, detail: Optional[str] = None) -> VerificationCheck:
    measured = float(measured)
    return VerificationCheck(
        name=name,
        group=group,
        passed=bool(measured < threshold),
        measured=measured,
        threshold=threshold,
        comparison="<",
        detail=detail,
    )


def above(name: str, group: str, measured: float, threshold: float, detail: Optional[str] = None) -> VerificationCheck:
    measured = float(measured)
    return VerificationCheck(
        name=name,
        group=group,
        passed=bool(measured > threshold),
        measured=measured,
        threshold=threshold,
        comparison=">",
        detail=detail,
    )


def within(
    name: str, group: str, measured: float, low: float, high: float, detail: Optional[str] = None
) -> VerificationCheck:
    measured = float(measured)
    return VerificationCheck(
        name=name,
        group=group,
        passed=bool(low <= measured <= high),
        measured=measured,
        threshold=[low, high],
        comparison="in",
        detail=detail,
    )

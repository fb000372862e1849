"""Check results shared by all verification suites."""
from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass
class CheckResult:
    """One verified identity or theorem conclusion.

    ``applicable`` is False when the hypothesis of the statement does not
    hold for the scenario; the result is then reported as ``vacuous``
    (never ``fail``), but the residual is still recorded.
    """

    name: str
    tag: str
    residual: float
    tolerance: float
    applicable: bool = True
    passed: bool | None = None
    hypothesis: str = ""
    hypothesis_residual: float | None = None
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        self.residual = float(self.residual)
        if self.passed is None:
            self.passed = bool(math.isfinite(self.residual) and self.residual <= self.tolerance)

    @property
    def status(self) -> str:
        if not self.applicable:
            return "vacuous"
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "tag": self.tag,
            "status": self.status,
            "residual": finite_or_none(self.residual),
            "tolerance": self.tolerance,
        }
        if self.hypothesis:
            out["hypothesis"] = self.hypothesis
        if self.hypothesis_residual is not None:
            out["hypothesis_residual"] = finite_or_none(self.hypothesis_residual)
        if self.detail:
            out["detail"] = jsonable(self.detail)
        return out


# alias used by the identity suites
IdentityResult = CheckResult


def finite_or_none(x):
    x = float(x)
    return x if math.isfinite(x) else None


def jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return obj
    try:
        return finite_or_none(obj)
    except (TypeError, ValueError):
        return str(obj)


def worst(values) -> float:
    values = [float(v) for v in values]
    return max(values) if values else 0.0

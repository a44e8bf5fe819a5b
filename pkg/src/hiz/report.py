from __future__ import annotations

from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any


@dataclass
class VerificationReport:
    """Outcome of one residual or oracle check."""

    name: str
    passed: bool
    exact_zero: bool | None = None
    residual: float | None = None
    tolerance: float | None = None
    seed: int | None = None
    inputs: dict[str, Any] = field(default_factory=dict)
    details: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return _jsonable(asdict(self))

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        bits = [f"{status}  {self.name}"]
        if self.exact_zero is not None:
            bits.append(f"exact_zero={self.exact_zero}")
        if self.residual is not None:
            bits.append(f"residual={self.residual:.3e}")
        if self.tolerance is not None:
            bits.append(f"tol={self.tolerance:g}")
        if self.seed is not None:
            bits.append(f"seed={self.seed}")
        return "  ".join(bits)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "item") and callable(obj.item):
        return obj.item()
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    return str(obj)

"""Residual records shared by all verifiers and the report writer."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Check:
    """One verified identity.

    ``bound="upper"`` passes when ``residual <= tol``; ``bound="lower"`` passes
    when ``residual > tol`` (used for eigenvalue floors); ``bound="interval"``
    is a two-sided range spelled out in ``detail``.  ``passed`` is None
    for informative entries that carry no pass bar.
    """

    name: str
    residual: float
    tol: float
    passed: bool | None
    bound: str = "upper"
    anchor: str = ""
    detail: str = ""
    samples: tuple = field(default=(), repr=False)

    @classmethod
    def upper(cls, name, residuals, tol, anchor="", detail="", informative=False):
        r = np.atleast_1d(np.asarray(residuals, dtype=float))
        worst = float(np.max(r)) if r.size else 0.0
        passed = None if informative else bool(worst <= tol)
        return cls(name, worst, float(tol), passed, "upper", anchor, detail, tuple(r.tolist()))

    @classmethod
    def lower(cls, name, values, threshold, anchor="", detail=""):
        r = np.atleast_1d(np.asarray(values, dtype=float))
        worst = float(np.min(r)) if r.size else float("inf")
        return cls(name, worst, float(threshold), bool(worst > threshold), "lower",
                   anchor, detail, tuple(r.tolist()))

    @classmethod
    def within(cls, name, value, low, high, anchor="", detail=""):
        """Pass when ``low <= value <= high``; ``tol`` records ``high``."""
        value = float(value)
        extra = f"accepted range [{low:g}, {high:g}]"
        return cls(name, value, float(high), bool(low <= value <= high), "interval", anchor,
                   f"{extra}; {detail}" if detail else extra, (value,))

    @classmethod
    def failure(cls, name, tol, anchor="", detail=""):
        return cls(name, float("inf"), float(tol), False, "upper", anchor, detail)

    def renamed(self, name: str) -> Check:
        return Check(name, self.residual, self.tol, self.passed, self.bound,
                     self.anchor, self.detail, self.samples)


def all_passed(checks) -> bool:
    return all(c.passed for c in checks if c.passed is not None)

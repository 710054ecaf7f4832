"""Central finite-difference gradient checker."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass
class GradCheckReport:
    passed: bool
    max_rel_error: float
    worst_index: int
    checked: int

    def __str__(self) -> str:
        verdict = "pass" if self.passed else "FAIL"
        return f"{verdict} max_rel_err={self.max_rel_error:.3e} over {self.checked} coords"


def finite_diff_check(
    fn: Callable[[np.ndarray], float],
    point,
    analytic,
    eps: float = 1e-3,
    tol: float = 1e-4,
    floor: float = 1e-6,
    order: int = 4,
) -> GradCheckReport:
    """Compare ``analytic`` with central differences of ``fn`` at ``point``.

    ``order=4`` uses the five-point central stencil, whose O(eps**4)
    truncation error stays well below ``tol`` for small gradient entries at
    ``eps=1e-3``; ``order=2`` is the plain two-point formula.  Relative error
    per coordinate is ``|a - n| / max(|a|, |n|, floor)``.
    """
    if order not in (2, 4):
        raise ValueError(f"stencil order must be 2 or 4, got {order}")
    x = np.array(point, dtype=np.float64)
    a = np.asarray(analytic, dtype=np.float64).reshape(x.shape)
    flat = x.reshape(-1)
    numeric = np.empty(flat.size)

    def at(i, delta):
        orig = flat[i]
        flat[i] = orig + delta
        val = float(fn(x))
        flat[i] = orig
        return val

    for i in range(flat.size):
        d1 = at(i, eps) - at(i, -eps)
        if order == 2:
            numeric[i] = d1 / (2.0 * eps)
        else:
            d2 = at(i, 2 * eps) - at(i, -2 * eps)
            numeric[i] = (8.0 * d1 - d2) / (12.0 * eps)
    af = a.reshape(-1)
    denom = np.maximum(np.maximum(np.abs(af), np.abs(numeric)), floor)
    rel = np.abs(af - numeric) / denom
    worst = int(np.argmax(rel)) if rel.size else 0
    max_rel = float(rel[worst]) if rel.size else 0.0
    return GradCheckReport(max_rel < tol, max_rel, worst, flat.size)

"""Adaptive Simpson quadrature for scalar and vector-valued integrands."""

from __future__ import annotations

from typing import Callable

import numpy as np

MAX_INTERVALS = 2**20


class QuadratureError(RuntimeError):
    pass


def adaptive_simpson(
    f: Callable[[float], float | np.ndarray],
    a: float,
    b: float,
    tol: float = 1e-9,
    max_intervals: int = MAX_INTERVALS,
):
    """Integrate ``f`` over ``[a, b]`` to absolute tolerance ``tol``.

    Works on an explicit stack instead of recursion. Vector-valued integrands
    are refined until every component meets the tolerance.

    Raises:
        QuadratureError: if more than ``max_intervals`` subintervals are needed.
    """
    if a == b:
        return 0.0 * np.asarray(f(a))
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    stack = [(a, b, fa, fm, fb, whole, tol)]
    total = 0.0
    used = 1
    while stack:
        lo, hi, flo, fmid, fhi, est, eps = stack.pop()
        mid = 0.5 * (lo + hi)
        fl = f(0.5 * (lo + mid))
        fr = f(0.5 * (mid + hi))
        left = (mid - lo) / 6.0 * (flo + 4.0 * fl + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * fr + fhi)
        err = left + right - est
        # below a few ulps of the panel value further splitting only chases round-off
        floor = 64.0 * np.finfo(float).eps * np.abs(left + right)
        if np.all(np.abs(err) <= np.maximum(15.0 * eps, floor)) or mid in (lo, hi):
            total = total + left + right + err / 15.0
            continue
        used += 1
        if used > max_intervals:
            raise QuadratureError(f"adaptive Simpson exceeded {max_intervals} subintervals")
        stack.append((mid, hi, fmid, fr, fhi, right, 0.5 * eps))
        stack.append((lo, mid, flo, fl, fmid, left, 0.5 * eps))
    return total

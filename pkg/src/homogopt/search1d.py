"""Derivative-free one-dimensional minimization and root bracketing."""

import math

INVPHI = (math.sqrt(5) - 1) / 2


def golden_section(fn, a, b, tol=1e-10, maxiter=200):
    """Minimize a unimodal ``fn`` on [a, b]. Returns (x, fn(x)).

    The endpoints are compared against the interior result, so a monotone
    function returns the better endpoint.
    """
    lo, hi = a, b
    x1 = hi - INVPHI * (hi - lo)
    x2 = lo + INVPHI * (hi - lo)
    f1, f2 = fn(x1), fn(x2)
    for _ in range(maxiter):
        if hi - lo <= tol:
            break
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - INVPHI * (hi - lo)
            f1 = fn(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + INVPHI * (hi - lo)
            f2 = fn(x2)
    best = min((f1, x1), (f2, x2), (fn(a), a), (fn(b), b))
    return best[1], best[0]


def bisect_sign(fn, a, b, xtol, fa=None, maxiter=200):
    """Shrink a sign-change bracket [a, b] of ``fn`` to width <= xtol.

    Returns the final bracket (lo, hi); the caller picks the point it wants.
    """
    if fa is None:
        fa = fn(a)
    lo, hi = a, b
    for _ in range(maxiter):
        if hi - lo <= xtol:
            break
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if fm == 0:
            return mid, mid
        if (fm > 0) == (fa > 0):
            lo, fa = mid, fm
        else:
            hi = mid
    return lo, hi

"""Standard normal distribution functions and a bracketed monotone root finder.

``norm_cdf`` evaluates Phi through the complementary error function, which
keeps full relative accuracy deep in the lower tail. ``norm_ppf`` seeds with
Acklam's rational approximation (relative error ~1.15e-9) and polishes with
two Halley steps on Phi; the upper half is always mapped onto the lower tail
so that ``norm_ppf(p) == -norm_ppf(1 - p)`` holds bit-for-bit when
``p > 0.5``.

Both functions accept scalars or numpy arrays.
"""

import math

import numpy as np
from scipy import special

from .errors import BracketError, ConvergenceError, DomainError

SQRT2 = math.sqrt(2.0)
INV_SQRT2PI = 1.0 / math.sqrt(2.0 * math.pi)

# Default bracket and tolerance for every factor solver.
FACTOR_BRACKET = (-12.0, 12.0)
FACTOR_TOL = 1e-10

# Acklam's coefficients, central region |p - 0.5| <= 0.47575.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
# Tail region.
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _is_scalar(x):
    return np.ndim(x) == 0


def norm_pdf(x):
    """Standard normal density."""
    x = np.asarray(x, dtype=float)
    out = INV_SQRT2PI * np.exp(-0.5 * x * x)
    return float(out) if out.ndim == 0 else out


def norm_cdf(x):
    """Standard normal distribution function Phi(x).

    Raises:
        DomainError: if any input is NaN or infinite.
    """
    if _is_scalar(x):
        x = float(x)
        if not math.isfinite(x):
            raise DomainError(f"norm_cdf needs a finite argument, got {x!r}")
        return 0.5 * math.erfc(-x / SQRT2)
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("norm_cdf needs finite arguments")
    return 0.5 * special.erfc(-x / SQRT2)


def norm_sf(x):
    """Upper tail 1 - Phi(x), computed without cancellation."""
    if _is_scalar(x):
        return norm_cdf(-float(x))
    return norm_cdf(-np.asarray(x, dtype=float))


def _acklam_lower(q):
    """Seed for Phi^{-1}(q) with 0 < q <= 0.5 (array)."""
    out = np.empty_like(q)
    tail = q < _P_LOW
    if np.any(tail):
        t = np.sqrt(-2.0 * np.log(q[tail]))
        c, d = _C, _D
        out[tail] = ((((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5])
                     / ((((d[0] * t + d[1]) * t + d[2]) * t + d[3]) * t + 1.0))
    mid = ~tail
    if np.any(mid):
        u = q[mid] - 0.5
        r = u * u
        a, b = _A, _B
        out[mid] = ((((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * u
                    / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0))
    return out


def _ppf_lower(q):
    x = _acklam_lower(q)
    for _ in range(2):
        # Halley step on Phi(x) - q; the relative residual stays accurate in the tail.
        e = (0.5 * special.erfc(-x / SQRT2) - q) / (INV_SQRT2PI * np.exp(-0.5 * x * x))
        x = x - e / (1.0 + 0.5 * x * e)
    return x


def norm_ppf(p):
    """Standard normal quantile Phi^{-1}(p) for 0 < p < 1.

    Raises:
        DomainError: for p outside the open unit interval (including 0 and 1).
    """
    scalar = _is_scalar(p)
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if not np.all((p > 0.0) & (p < 1.0)):
        raise DomainError("norm_ppf needs 0 < p < 1")
    upper = p > 0.5
    q = np.where(upper, 1.0 - p, p)
    x = _ppf_lower(q)
    x = np.where(upper, -x, x)
    x[p == 0.5] = 0.0
    return float(x[0]) if scalar else x


def find_root_monotone(f, lo, hi, tol=FACTOR_TOL, max_iter=200):
    """Root of a continuous, strictly monotone ``f`` on ``[lo, hi]``.

    Bisection safeguarded secant: each iteration tries the secant point of the
    current bracket and falls back to the midpoint when that point leaves the
    bracket or when the previous step failed to halve the bracket. After an
    accepted secant step the finder probes ``tol/2`` across the estimate,
    which usually collapses the bracket in one evaluation.

    Returns the bracket endpoint with the smaller residual once the bracket
    width is at most ``tol`` (or an exact zero). The result never leaves the
    initial bracket.

    Raises:
        BracketError: if ``f(lo)`` and ``f(hi)`` share a sign.
        ConvergenceError: if ``max_iter`` iterations do not suffice.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    lo, hi = float(lo), float(hi)
    if not lo < hi:
        raise BracketError(f"empty bracket [{lo}, {hi}]")
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BracketError(f"no sign change on [{lo}, {hi}]: f(lo)={flo:.6g}, f(hi)={fhi:.6g}")

    def narrow(x, fx):
        nonlocal lo, hi, flo, fhi
        if (fx > 0) == (flo > 0):
            lo, flo = x, fx
        else:
            hi, fhi = x, fx

    last_width = hi - lo
    bisect_next = False
    for _ in range(max_iter):
        width = hi - lo
        if width <= tol:
            return lo if abs(flo) <= abs(fhi) else hi
        x = None
        if not bisect_next:
            x = lo - flo * (hi - lo) / (fhi - flo)
            if not lo < x < hi:
                x = None
        secant = x is not None
        if not secant:
            x = lo + 0.5 * width
        fx = f(x)
        if fx == 0.0:
            return x
        narrow(x, fx)
        if secant and hi - lo > tol:
            # Probe just across the estimate toward the far side of the bracket.
            step = 0.5 * tol
            probe = x + step if x == lo else x - step
            if lo < probe < hi:
                fp = f(probe)
                if fp == 0.0:
                    return probe
                narrow(probe, fp)
        width_now = hi - lo
        bisect_next = width_now > 0.5 * last_width
        last_width = width_now
    raise ConvergenceError(f"no convergence after {max_iter} iterations; bracket [{lo}, {hi}]")

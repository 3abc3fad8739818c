"""Special functions and overflow-safe combinatorics used by the outage formulas.

The closed-form SNR distribution involves the modified Bessel function of
the second kind of order one, and the order-statistic formulas multiply
factorials of up to ``N * N_r`` terms. Both are handled here so the rest of
the analytics code can stay in log space.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as _special


def bessel_k1(x):
    """Modified Bessel function of the second kind, order one, K_1(x).

    Accepts a positive scalar or array. Evaluated by SciPy's piecewise
    Chebyshev fits (series branch below x=2, asymptotic branch above),
    which are accurate to machine precision. For arguments large enough
    that exp(-x) underflows (x beyond roughly 705) the result is 0.0.

    Raises ``ValueError`` for non-finite or non-positive input.
    """
    arr = np.asarray(x, dtype=float)
    if arr.size == 0 or not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise ValueError("bessel_k1 requires finite x > 0")
    out = _special.k1(arr)
    if np.ndim(x) == 0:
        return float(out)
    return out


def log_factorial(n: int) -> float:
    """ln(n!) via the log-gamma function."""
    if n < 0:
        raise ValueError("log_factorial requires n >= 0")
    return math.lgamma(n + 1)


def log_binomial(n: int, k: int) -> float:
    """ln C(n, k) as a sum of log-gamma terms, safe for n up to 10**6.

    Exponentiating the result reproduces the integer binomial coefficient
    exactly (after rounding) while C(n, k) stays within float64 integer
    range; beyond that the relative error is a few ulps.
    """
    n = int(n)
    k = int(k)
    if k < 0 or n < 0 or k > n:
        raise ValueError(f"log_binomial requires 0 <= k <= n, got n={n}, k={k}")
    if n > 10**6:
        raise ValueError("log_binomial supports n <= 10**6")
    if k == 0 or k == n:
        return 0.0
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)

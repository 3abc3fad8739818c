"""Closed-form outage analysis for the relay-selection schemes.

Contents:

* exact and large-power approximate CDFs of the per-pair AF receive SNR;
* PDF/CDF of the k-th largest entry of the N x N_r SNR matrix;
* the two-user rank tables Prob(min selected SNR = k-th largest entry)
  for the optimal and suboptimal schemes, plus an exhaustive placement
  enumerator that validates them exactly;
* min-SNR outage upper bounds (mixture over rank tables for two users,
  product form for the naive scheme), their large-power asymptotes,
  diversity orders, and array-gain ratios.

The two-user bounds are computed from the rank-mixture form. The
"rewritten" single-polynomial forms are also implemented verbatim for
cross-checking; the suboptimal one is known to carry a typo in its first
bracket, and ``polynomial_form_deviation`` quantifies the discrepancy
rather than hiding it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations

import numpy as np

from . import selection
from .special_math import bessel_k1, log_binomial, log_factorial

_TWO_USER_SCHEMES = ("ors", "srs")


def _check_powers(user_power: float, relay_power: float) -> None:
    if not (user_power > 0 and relay_power > 0):
        raise ValueError("powers must be positive")


# ---------------------------------------------------------------------------
# per-pair SNR distribution
# ---------------------------------------------------------------------------


def cdf_snr_exact(x, user_power: float, relay_power: float):
    """Exact CDF of the end-to-end AF SNR of one user-relay pair:

        F(x) = 1 - 2 sqrt(x(x+1)/(PQ)) exp(-(1/P + 1/Q) x) K_1(2 sqrt(x(x+1)/(PQ)))

    Accepts a scalar or array x >= 0. F(0) = 0 by the small-argument limit
    z K_1(z) -> 1.
    """
    _check_powers(user_power, relay_power)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if not np.all(np.isfinite(xa)) or np.any(xa < 0):
        raise ValueError("x must be finite and >= 0")
    z = 2.0 * np.sqrt(xa * (xa + 1.0) / (user_power * relay_power))
    decay = np.exp(-(1.0 / user_power + 1.0 / relay_power) * xa)
    out = np.zeros_like(xa)
    pos = z > 0
    if np.any(pos):
        out[pos] = 1.0 - z[pos] * decay[pos] * bessel_k1(z[pos])
    if np.ndim(x) == 0:
        return float(out[0])
    return out.reshape(np.shape(x))


def cdf_snr_approx(x, user_power: float, relay_power: float):
    """Large-power approximation F(x) ~ 1 - exp(-(1/P + 1/Q) x)."""
    _check_powers(user_power, relay_power)
    xa = np.asarray(x, dtype=float)
    out = -np.expm1(-(1.0 / user_power + 1.0 / relay_power) * xa)
    if np.ndim(x) == 0:
        return float(out)
    return out


def pdf_snr(x: float, user_power: float, relay_power: float) -> float:
    """Density of the per-pair SNR by central differencing of the exact CDF.

    The paper-style closed form of the density is not needed anywhere at
    higher accuracy than the quadratures that consume it; relative step
    1e-6 keeps the finite-difference error well below those tolerances.
    """
    x = float(x)
    h = max(1e-6, 1e-6 * x)
    lo = max(x - h, 0.0)
    hi = x + h
    return (cdf_snr_exact(hi, user_power, relay_power) - cdf_snr_exact(lo, user_power, relay_power)) / (hi - lo)


# ---------------------------------------------------------------------------
# order statistics of the matrix entries
# ---------------------------------------------------------------------------


def _check_rank(k: int, num_users: int, num_relays: int) -> int:
    n = num_users * num_relays
    if not 1 <= k <= n:
        raise ValueError(f"rank must be in [1, {n}], got {k}")
    return n


def order_stat_pdf(
    k: int, x: float, num_users: int, num_relays: int, user_power: float, relay_power: float
) -> float:
    """PDF of the k-th largest of the N*N_r i.i.d. SNR entries."""
    n = _check_rank(k, num_users, num_relays)
    big_f = float(cdf_snr_exact(x, user_power, relay_power))
    expo = log_factorial(n) - log_factorial(n - k) - log_factorial(k - 1)
    if n - k > 0:
        if big_f == 0.0:
            return 0.0
        expo += (n - k) * math.log(big_f)
    if k - 1 > 0:
        if big_f == 1.0:
            return 0.0
        expo += (k - 1) * math.log1p(-big_f)
    return math.exp(expo) * pdf_snr(x, user_power, relay_power)


def order_stat_cdf(
    k: int, x: float, num_users: int, num_relays: int, user_power: float, relay_power: float
) -> float:
    """CDF of the k-th largest entry, via the binomial-expansion sum

        sum_{i=0}^{k-1} (n)! C(k-1,i) (-1)^i F^{n-k+i+1} / ((n-k+i+1)(n-k)!(k-1)!)

    with n = N*N_r. Terms are built in log space and accumulated signed in
    descending-magnitude order (compensated by fsum) to control the
    alternating-sum cancellation.
    """
    n = _check_rank(k, num_users, num_relays)
    big_f = float(cdf_snr_exact(x, user_power, relay_power))
    if big_f == 0.0:
        return 0.0
    log_f = math.log(big_f)
    log_pre = log_factorial(n) - log_factorial(n - k) - log_factorial(k - 1)
    terms = []
    for i in range(k):
        e = n - k + i + 1
        lt = log_pre + log_binomial(k - 1, i) + e * log_f - math.log(e)
        terms.append((lt, 1.0 if i % 2 == 0 else -1.0))
    terms.sort(key=lambda t: t[0], reverse=True)
    top = terms[0][0]
    total = math.fsum(sign * math.exp(lt - top) for lt, sign in terms)
    return math.exp(top) * total


# ---------------------------------------------------------------------------
# two-user rank tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RankProbabilityTable:
    """Prob(min selected SNR = k-th largest matrix entry) for two users."""

    scheme: str
    num_users: int
    num_relays: int
    probs: dict[int, float]


def _rank_fractions(scheme: str, num_relays: int) -> dict[int, Fraction]:
    nr = int(num_relays)
    if nr < 2:
        raise ValueError("two-user rank tables need at least 2 relays")
    if scheme not in _TWO_USER_SCHEMES:
        raise ValueError(f"no rank table for scheme {scheme!r}")
    comb = math.comb
    probs: dict[int, Fraction] = {2: Fraction(nr - 1, 2 * nr - 1)}
    if scheme == "ors":
        probs[3] = Fraction(nr + 2, 2 * (2 * nr - 1))
        for k in range(4, nr + 2):
            probs[k] = Fraction(2 * nr * comb(nr, k - 1), (2 * nr - (k - 1)) * comb(2 * nr, k - 1))
    else:
        probs[3] = Fraction(nr + 1, 2 * (2 * nr - 1))
        for k in range(4, nr + 3):
            p = Fraction(0)
            if k <= nr + 1:
                # the k-1 largest entries share a row, the k-th sits in the other
                p += Fraction(2 * nr * comb(nr, k - 1), (2 * nr - (k - 1)) * comb(2 * nr, k - 1))
            # ranks 2..k-1 share a row, ranks 1 and k sit in the other,
            # ranks 1 and 2 share a column
            p += Fraction(
                2 * (nr - 1) * comb(nr, k - 2),
                (2 * nr - (k - 2)) * (2 * nr - (k - 1)) * comb(2 * nr, k - 2),
            )
            probs[k] = p
    return probs


def rank_probs_two_user(scheme: str, num_relays: int) -> RankProbabilityTable:
    """Rank table of the minimum selected SNR for a two-user network.

    Support is k in {2, ..., N_r + 1} for the optimal scheme and
    {2, ..., N_r + 2} for the suboptimal one; the probabilities sum to 1
    exactly (they are built from rationals).
    """
    fr = _rank_fractions(scheme, num_relays)
    return RankProbabilityTable(
        scheme=scheme,
        num_users=2,
        num_relays=int(num_relays),
        probs={k: float(v) for k, v in fr.items()},
    )


def enumerate_rank_probs_two_user(scheme: str, num_relays: int) -> dict[int, Fraction]:
    """Exact rank table by brute force over all (2 N_r)! relative orderings.

    Both schemes decide by comparisons only, so running them on every
    placement of the ranks 1..2N_r into the 2 x N_r matrix enumerates the
    rank of the minimum selected SNR exactly. This is the independent
    oracle for ``rank_probs_two_user``.
    """
    nr = int(num_relays)
    if nr < 2:
        raise ValueError("need at least 2 relays")
    select = {"ors": selection.select_ors, "srs": selection.select_srs}[scheme]
    cells = 2 * nr
    counts: dict[int, int] = {}
    for values in permutations(range(1, cells + 1)):
        m = np.asarray(values, dtype=float).reshape(2, nr)
        outcome = select(m)
        rank = cells + 1 - int(outcome.min_snr)
        counts[rank] = counts.get(rank, 0) + 1
    total = math.factorial(cells)
    return {k: Fraction(v, total) for k, v in sorted(counts.items())}


# ---------------------------------------------------------------------------
# outage bounds
# ---------------------------------------------------------------------------


def outage_upper_ors_two_user(
    threshold: float, user_power: float, relay_power: float, num_relays: int
) -> float:
    """Two-user min-SNR outage of the optimal scheme (rank-mixture form)."""
    table = rank_probs_two_user("ors", num_relays)
    return math.fsum(
        p * order_stat_cdf(k, threshold, 2, num_relays, user_power, relay_power)
        for k, p in table.probs.items()
    )


def outage_upper_srs_two_user(
    threshold: float, user_power: float, relay_power: float, num_relays: int
) -> float:
    """Two-user min-SNR outage of the suboptimal scheme (rank-mixture form)."""
    table = rank_probs_two_user("srs", num_relays)
    return math.fsum(
        p * order_stat_cdf(k, threshold, 2, num_relays, user_power, relay_power)
        for k, p in table.probs.items()
    )


def outage_upper_naive(
    threshold: float, user_power: float, relay_power: float, num_users: int, num_relays: int
) -> float:
    """Min-SNR outage of the naive scheme: 1 - prod_k (1 - F^(N_r - k + 1))."""
    n, nr = int(num_users), int(num_relays)
    if n < 1 or nr < n:
        raise ValueError(f"need 1 <= N <= N_r, got N={n}, N_r={nr}")
    big_f = float(cdf_snr_exact(threshold, user_power, relay_power))
    if big_f >= 1.0:
        return 1.0
    # log1p/expm1 keep the deep tail (F^k below machine epsilon) exact
    log_survival = math.fsum(math.log1p(-(big_f ** (nr - k + 1))) for k in range(1, n + 1))
    return -math.expm1(log_survival)


def outage_single_user(
    threshold: float, user_power: float, relay_power: float, num_relays: int
) -> float:
    """Best-relay outage of a single-user network: F^N_r."""
    big_f = float(cdf_snr_exact(threshold, user_power, relay_power))
    return big_f ** int(num_relays)


def outage_naive_user(
    threshold: float,
    user_power: float,
    relay_power: float,
    user: int,
    num_users: int,
    num_relays: int,
) -> float:
    """Exact outage of user k (1-indexed) under the naive scheme: F^(N_r-k+1).

    User k picks the best of N_r - k + 1 leftover relays, and its row is
    independent of the earlier users' choices.
    """
    n, nr = int(num_users), int(num_relays)
    if not 1 <= user <= n:
        raise ValueError(f"user must be in [1, {n}], got {user}")
    if nr < n:
        raise ValueError("need N_r >= N")
    big_f = float(cdf_snr_exact(threshold, user_power, relay_power))
    return big_f ** (nr - user + 1)


# ---------------------------------------------------------------------------
# rewritten polynomial forms (cross-check only)
# ---------------------------------------------------------------------------


def outage_upper_ors_two_user_poly(
    threshold: float, user_power: float, relay_power: float, num_relays: int
) -> float:
    """The single-polynomial rewriting of the two-user optimal bound, verbatim.

    Algebraically identical to the mixture form; kept as a cross-check.
    """
    nr = int(num_relays)
    if nr < 2:
        raise ValueError("need at least 2 relays")
    f = float(cdf_snr_exact(threshold, user_power, relay_power))
    fact = math.factorial
    comb = math.comb
    b1 = (nr - 1) * fact(2 * nr) / ((2 * nr - 1) * fact(2 * nr - 2)) * math.fsum(
        comb(1, i) * (-1.0) ** i * f ** (nr + i - 1) / (2 * nr + i - 1) for i in range(2)
    )
    b2 = (nr + 2) * fact(2 * nr) / (4 * (2 * nr - 1) * fact(2 * nr - 3)) * math.fsum(
        comb(2, i) * (-1.0) ** i * f ** (nr + i - 2) / (2 * nr + i - 2) for i in range(3)
    )
    b3 = math.fsum(
        2 * nr * fact(2 * nr) * comb(nr, j - 1) * comb(j - 1, i) * (-1.0) ** i
        * f ** (nr - j + i + 1)
        / ((2 * nr - j + 1) * (2 * nr - j + i + 1) * fact(2 * nr - j) * fact(j - 1) * comb(2 * nr, j - 1))
        for j in range(4, nr + 2)
        for i in range(j)
    )
    return f**nr * (b1 + b2 + b3)


def outage_upper_srs_two_user_poly(
    threshold: float, user_power: float, relay_power: float, num_relays: int
) -> float:
    """The printed single-polynomial rewriting of the two-user suboptimal bound.

    Implemented exactly as printed (with the summation index slip repaired
    by reading the summand's k as the outer index i). Its first bracket
    repeats the second bracket's coefficient, so this form deviates from
    the authoritative mixture form; see ``polynomial_form_deviation``.
    """
    nr = int(num_relays)
    if nr < 2:
        raise ValueError("need at least 2 relays")
    f = float(cdf_snr_exact(threshold, user_power, relay_power))
    fact = math.factorial
    comb = math.comb
    lead = (nr + 1) * fact(2 * nr) / (4 * (2 * nr - 1) * fact(2 * nr - 3))
    b1 = lead * math.fsum(
        comb(1, i) * (-1.0) ** i * f ** (nr + i) / (2 * nr + i - 1) for i in range(2)
    )
    b2 = lead * math.fsum(
        comb(2, i) * (-1.0) ** i * f ** (nr + i - 1) / (2 * nr + i - 2) for i in range(3)
    )
    b3 = math.fsum(
        2 * nr * fact(2 * nr) * comb(nr, i - 1) * comb(i - 1, j) * (-1.0) ** j
        * f ** (nr - i + j + 2)
        / ((2 * nr - i + 1) * (2 * nr - i + j + 1) * fact(2 * nr - i) * fact(i - 1) * comb(2 * nr, i - 1))
        for i in range(4, nr + 2)
        for j in range(i)
    )
    b4 = math.fsum(
        2 * (nr - 1) * fact(2 * nr) * comb(nr, i - 2) * comb(i - 1, j) * (-1.0) ** j
        * f ** (nr - i + j + 2)
        / (
            (2 * nr - i + 1)
            * (2 * nr - i + 2)
            * (2 * nr - i + j + 1)
            * fact(2 * nr - i)
            * fact(i - 1)
            * comb(2 * nr, i - 2)
        )
        for i in range(4, nr + 3)
        for j in range(i)
    )
    return f ** (nr - 1) * (b1 + b2 + b3 + b4)


def polynomial_form_deviation(
    threshold: float, user_power: float, relay_power: float, num_relays: int
) -> dict[str, float]:
    """Relative deviation of each rewritten polynomial form from its mixture form.

    The optimal-scheme forms agree to rounding error; the printed
    suboptimal form does not, and the deviation is reported here instead
    of being silently reconciled.
    """
    out = {}
    ors_mix = outage_upper_ors_two_user(threshold, user_power, relay_power, num_relays)
    ors_poly = outage_upper_ors_two_user_poly(threshold, user_power, relay_power, num_relays)
    srs_mix = outage_upper_srs_two_user(threshold, user_power, relay_power, num_relays)
    srs_poly = outage_upper_srs_two_user_poly(threshold, user_power, relay_power, num_relays)
    out["ors"] = abs(ors_poly - ors_mix) / ors_mix if ors_mix > 0 else abs(ors_poly)
    out["srs"] = abs(srs_poly - srs_mix) / srs_mix if srs_mix > 0 else abs(srs_poly)
    return out


# ---------------------------------------------------------------------------
# asymptotics, diversity, array gain
# ---------------------------------------------------------------------------


def outage_asymptotic(
    scheme: str, num_users: int, num_relays: int, threshold: float, user_power: float
) -> float:
    """Leading-order large-power outage term, assuming equal user and relay power.

    Supported: optimal scheme for any N (with the doubled constant in the
    two-user two-relay corner), suboptimal for N=2 only (the general-N
    leading constant has no closed form; only the exponent N_r - N + 1 is
    known), and the naive scheme for any N.
    """
    n, nr = int(num_users), int(num_relays)
    if n < 1 or nr < n:
        raise ValueError(f"need 1 <= N <= N_r, got N={n}, N_r={nr}")
    p = float(user_power)
    th = float(threshold)
    if scheme == "ors":
        if n == 2 and nr == 2:
            return 2.0 ** (nr + 2) * th**nr * p**-nr
        return n * (2.0 * th) ** nr * p**-nr
    if scheme == "srs":
        if n != 2:
            raise ValueError("suboptimal-scheme asymptote is only available for two users")
        return 2.0**nr * th ** (nr - 1) * p ** -(nr - 1) / (nr + 1)
    if scheme == "naive":
        d = nr - n + 1
        return (2.0 * th) ** d * p**-d
    raise ValueError(f"no asymptote for scheme {scheme!r}")


def prob_min_lowest_block(num_users: int, num_relays: int) -> float:
    """Probability that the N_r smallest matrix entries share one row:

        (N_r - 1)! / prod_{l=1}^{N_r-1} (N N_r - l)

    This is the event that makes the minimum selected SNR the
    (N-1)N_r + 1 largest entry under optimal selection; for two users it
    is strictly smaller than the full rank-table probability of that rank
    (other placements also land there), which the enumeration tests record.
    """
    n, nr = int(num_users), int(num_relays)
    if n < 1 or nr < n:
        raise ValueError(f"need 1 <= N <= N_r, got N={n}, N_r={nr}")
    denom = 1
    for l in range(1, nr):
        denom *= n * nr - l
    return float(Fraction(math.factorial(nr - 1), denom))


def diversity_order(scheme: str, num_users: int, num_relays: int, user: int | None = None) -> int:
    """Diversity order of a scheme; per-user variant for the naive scheme."""
    n, nr = int(num_users), int(num_relays)
    if n < 1 or nr < n:
        raise ValueError(f"need 1 <= N <= N_r, got N={n}, N_r={nr}")
    if user is not None:
        if scheme != "naive":
            raise ValueError("per-user diversity is only defined for the naive scheme")
        if not 1 <= user <= n:
            raise ValueError(f"user must be in [1, {n}]")
        return nr - user + 1
    orders = {"ors": nr, "srs": nr - n + 1, "naive": nr - n + 1, "random": 1}
    if scheme not in orders:
        raise ValueError(f"unknown scheme {scheme!r}")
    return orders[scheme]


def array_gain_ratios(num_relays: int) -> tuple[float, float]:
    """Array-gain comparisons for two-user networks.

    Returns (c, d) where c is the limiting ratio of the optimal-scheme
    bound to the single-user best-relay outage (4 when N_r = 2, else 2)
    and d is the naive-vs-suboptimal array-gain advantage
    10 log10((N_r + 1)/2) in dB.
    """
    nr = int(num_relays)
    if nr < 2:
        raise ValueError("need at least 2 relays")
    c = 4.0 if nr == 2 else 2.0
    d = 10.0 * math.log10((nr + 1) / 2.0)
    return c, d


# ---------------------------------------------------------------------------
# curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnalyticalCurve:
    """A bound or asymptote evaluated on an ascending linear power grid."""

    power_grid: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.power_grid) != len(self.values):
            raise ValueError("grid/value length mismatch")
        if any(b <= a for a, b in zip(self.power_grid, self.power_grid[1:])):
            raise ValueError("power grid must be strictly ascending")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("curve values must be finite")


def bound_curve(
    scheme: str,
    num_users: int,
    num_relays: int,
    threshold: float,
    power_grid,
    q_over_p: float = 1.0,
) -> AnalyticalCurve:
    """Exact min-SNR outage bound along a linear power grid.

    Closed forms exist for the naive scheme at any N and for the optimal
    and suboptimal schemes at N=2.
    """
    n, nr = int(num_users), int(num_relays)
    grid = tuple(float(p) for p in np.asarray(power_grid, dtype=float))
    if scheme == "naive":
        vals = [outage_upper_naive(threshold, p, p * q_over_p, n, nr) for p in grid]
    elif scheme in _TWO_USER_SCHEMES:
        if n != 2:
            raise ValueError(f"{scheme} closed-form bound exists for two users only")
        fn = outage_upper_ors_two_user if scheme == "ors" else outage_upper_srs_two_user
        vals = [fn(threshold, p, p * q_over_p, nr) for p in grid]
    else:
        raise ValueError(f"no closed-form bound for scheme {scheme!r}")
    return AnalyticalCurve(power_grid=grid, values=tuple(vals))


def asymptote_curve(
    scheme: str, num_users: int, num_relays: int, threshold: float, power_grid
) -> AnalyticalCurve:
    """Leading-order asymptote along a linear power grid (equal powers)."""
    grid = tuple(float(p) for p in np.asarray(power_grid, dtype=float))
    vals = [outage_asymptotic(scheme, num_users, num_relays, threshold, p) for p in grid]
    return AnalyticalCurve(power_grid=grid, values=tuple(vals))

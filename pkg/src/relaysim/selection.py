"""Relay-selection schemes for multi-user AF relay networks.

Four schemes operate on the N x N_r receive SNR matrix:

* ``select_ors``   - optimal selection: the assignment whose ascending
  sorted SNR vector is lexicographically maximal, realized by iterated
  max-min bottleneck bipartite matching.
* ``select_srs``   - suboptimal greedy: the unassigned user with the
  smallest best-remaining SNR claims its best relay first.
* ``select_naive`` - users claim best remaining relays in index order.
* ``select_random``- uniformly random conflict-free assignment.

``brute_force_lex_optimal`` enumerates every injective assignment and is
the oracle the ORS implementation is checked against.

Ties between equal SNR values are broken toward the lowest relay index,
then the lowest user index; ties have probability zero under continuous
fading but handcrafted matrices need a deterministic rule.

Batch variants (``batch_select_snrs``) run a scheme over a stack of SNR
matrices with numpy, for the Monte Carlo engine; they implement the same
tie-break rules as the scalar functions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

SCHEMES = ("ors", "srs", "naive", "random")


@dataclass(frozen=True)
class Assignment:
    """Injective user -> relay map; entry i is the relay index for user i."""

    relay_of: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.relay_of)) != len(self.relay_of):
            raise ValueError(f"assignment is not injective: {self.relay_of}")
        if any(j < 0 for j in self.relay_of):
            raise ValueError(f"negative relay index in {self.relay_of}")


@dataclass(frozen=True)
class SelectionOutcome:
    assignment: Assignment
    user_snrs: tuple[float, ...]
    min_snr: float
    sorted_snrs: tuple[float, ...]
    op_count: int


def _as_matrix(gamma) -> np.ndarray:
    m = np.asarray(gamma, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"SNR matrix must be 2-D, got shape {m.shape}")
    n, nr = m.shape
    if nr < n:
        raise ValueError(f"need at least as many relays as users, got {n}x{nr}")
    return m


def _outcome(gamma: np.ndarray, relay_of, op_count: int) -> SelectionOutcome:
    relay_of = tuple(int(j) for j in relay_of)
    snrs = tuple(float(gamma[i, j]) for i, j in enumerate(relay_of))
    return SelectionOutcome(
        assignment=Assignment(relay_of),
        user_snrs=snrs,
        min_snr=min(snrs),
        sorted_snrs=tuple(sorted(snrs)),
        op_count=int(op_count),
    )


# ---------------------------------------------------------------------------
# optimal selection: iterated max-min bottleneck matching
# ---------------------------------------------------------------------------


def _matching_at_threshold(sub: np.ndarray, threshold: float):
    """Greedy augmenting-path matching using only edges >= threshold.

    Returns (size, match_of_row) where match_of_row[i] is the matched
    column of row i or -1. Rows and columns are tried in ascending order,
    which makes the result deterministic.
    """
    rows, cols = sub.shape
    match_of_col = [-1] * cols  # column -> row
    adj = sub >= threshold

    def try_augment(r: int, seen: list[bool]) -> bool:
        for c in range(cols):
            if adj[r, c] and not seen[c]:
                seen[c] = True
                if match_of_col[c] < 0 or try_augment(match_of_col[c], seen):
                    match_of_col[c] = r
                    return True
        return False

    size = 0
    for r in range(rows):
        if try_augment(r, [False] * cols):
            size += 1
    match_of_row = [-1] * rows
    for c, r in enumerate(match_of_col):
        if r >= 0:
            match_of_row[r] = c
    return size, match_of_row


def _bottleneck_round(sub: np.ndarray):
    """Max-min matching of ``sub``: the largest t admitting a perfect
    matching on edges >= t, found by binary search over the distinct
    entries. Returns (t, match_of_row, comparisons)."""
    rows, cols = sub.shape
    ops = 0
    values = np.unique(sub)  # ascending
    lo, hi = 0, len(values) - 1
    # row maxima cap the bottleneck: no matching exists above min(row maxima)
    best_match = None
    while lo < hi:
        mid = (lo + hi + 1) // 2
        ops += rows * cols  # edge-threshold comparisons for this probe
        size, match = _matching_at_threshold(sub, values[mid])
        if size == rows:
            lo = mid
            best_match = match
        else:
            hi = mid - 1
    ops += rows * cols
    size, match = _matching_at_threshold(sub, values[lo])
    if size == rows:
        best_match = match
    if best_match is None:
        raise RuntimeError("no perfect matching found; matrix shape invalid?")
    return float(values[lo]), best_match, ops


def select_ors(gamma) -> SelectionOutcome:
    """Optimal relay selection.

    Repeatedly solve the max-min bottleneck matching on the remaining
    users/relays, fix the pair attaining the bottleneck value (lowest user
    index if several do), remove that user and relay, and recurse. The
    resulting assignment has the lexicographically maximal ascending
    sorted SNR vector, which is verified against
    ``brute_force_lex_optimal`` in the test suite.

    ``op_count`` tallies the scalar SNR comparisons spent on feasibility
    probes; it is reported for interest only.
    """
    m = _as_matrix(gamma)
    n, _ = m.shape
    active_rows = list(range(n))
    active_cols = list(range(m.shape[1]))
    relay_of = [-1] * n
    ops = 0
    while active_rows:
        sub = m[np.ix_(active_rows, active_cols)]
        t, match, round_ops = _bottleneck_round(sub)
        ops += round_ops
        # fix the matched pair attaining the bottleneck value
        bottleneck = None
        for r, c in enumerate(match):
            if sub[r, c] == t:
                bottleneck = (r, c)
                break  # rows scanned ascending -> lowest user index
        r, c = bottleneck
        user, relay = active_rows[r], active_cols[c]
        relay_of[user] = relay
        active_rows.remove(user)
        active_cols.remove(relay)
    return _outcome(m, relay_of, ops)


# ---------------------------------------------------------------------------
# suboptimal greedy selection
# ---------------------------------------------------------------------------


def select_srs(gamma) -> SelectionOutcome:
    """Suboptimal relay selection.

    Each round, every unassigned user's best SNR over the remaining relays
    is found; the user whose best is smallest claims its best relay, and
    the claimed row and column are removed. ``op_count`` is the exact
    number of comparisons: a row scan over c columns costs c-1 and the min
    scan over r row-maxima costs r-1.
    """
    m = _as_matrix(gamma)
    n, _ = m.shape
    active_rows = list(range(n))
    active_cols = list(range(m.shape[1]))
    relay_of = [-1] * n
    ops = 0
    while active_rows:
        best_col = {}
        best_val = {}
        for i in active_rows:
            ops += len(active_cols) - 1
            bj = active_cols[0]
            bv = m[i, bj]
            for j in active_cols[1:]:
                if m[i, j] > bv:
                    bv, bj = m[i, j], j
            best_col[i], best_val[i] = bj, bv
        ops += len(active_rows) - 1
        i_star = active_rows[0]
        for i in active_rows[1:]:
            if best_val[i] < best_val[i_star]:
                i_star = i
        j_star = best_col[i_star]
        relay_of[i_star] = j_star
        active_rows.remove(i_star)
        active_cols.remove(j_star)
    return _outcome(m, relay_of, ops)


def select_naive(gamma) -> SelectionOutcome:
    """Users claim their best remaining relay in user-index order."""
    m = _as_matrix(gamma)
    n, _ = m.shape
    active_cols = list(range(m.shape[1]))
    relay_of = [-1] * n
    ops = 0
    for i in range(n):
        ops += len(active_cols) - 1
        bj = active_cols[0]
        for j in active_cols[1:]:
            if m[i, j] > m[i, bj]:
                bj = j
        relay_of[i] = bj
        active_cols.remove(bj)
    return _outcome(m, relay_of, ops)


def select_random(gamma, stream: np.random.Generator) -> SelectionOutcome:
    """Uniformly random injective assignment, independent of the SNR values."""
    m = _as_matrix(gamma)
    n, nr = m.shape
    relay_of = stream.permutation(nr)[:n]
    return _outcome(m, relay_of, 0)


# ---------------------------------------------------------------------------
# exhaustive oracle and complexity formulas
# ---------------------------------------------------------------------------

_BRUTE_FORCE_LIMIT = 10**7


def brute_force_lex_optimal(gamma) -> SelectionOutcome:
    """Enumerate all injective assignments; return the one whose ascending
    sorted SNR vector is lexicographically maximal.

    Assignments are generated in lexicographic relay-tuple order and ties
    keep the earliest candidate, i.e. the lowest relay indices win.
    """
    m = _as_matrix(gamma)
    n, nr = m.shape
    total = math.perm(nr, n)
    if total > _BRUTE_FORCE_LIMIT:
        raise ValueError(f"{total} assignments exceed the enumeration bound {_BRUTE_FORCE_LIMIT}")
    best_vec = None
    best = None
    for relays in itertools.permutations(range(nr), n):
        vec = tuple(sorted(m[i, j] for i, j in enumerate(relays)))
        if best_vec is None or vec > best_vec:
            best_vec, best = vec, relays
    return _outcome(m, best, 0)


def srs_complexity(num_users: int, num_relays: int) -> int:
    """Comparison count of the suboptimal scheme: N(3NN_r + 3N_r - N^2 - 5)/6."""
    n, nr = int(num_users), int(num_relays)
    if n < 1 or nr < n:
        raise ValueError(f"need 1 <= N <= N_r, got N={n}, N_r={nr}")
    return n * (3 * n * nr + 3 * nr - n * n - 5) // 6


def naive_complexity(num_users: int, num_relays: int) -> int:
    """Comparison count of the naive scheme: (2NN_r - N^2 - N)/2."""
    n, nr = int(num_users), int(num_relays)
    if n < 1 or nr < n:
        raise ValueError(f"need 1 <= N <= N_r, got N={n}, N_r={nr}")
    return (2 * n * nr - n * n - n) // 2


# ---------------------------------------------------------------------------
# batch kernels
# ---------------------------------------------------------------------------


def batch_select_snrs(
    scheme: str, gamma_block: np.ndarray, stream: np.random.Generator | None = None
) -> np.ndarray:
    """Selected per-user SNRs for a stack of SNR matrices.

    ``gamma_block`` has shape (count, N, N_r); the result has shape
    (count, N). The random scheme consumes draws from ``stream``. Matches
    the scalar functions entry for entry (tested on random stacks).
    """
    g = np.asarray(gamma_block, dtype=float)
    if g.ndim != 3 or g.shape[2] < g.shape[1]:
        raise ValueError(f"expected (count, N, N_r) with N_r >= N, got {g.shape}")
    if scheme == "naive":
        return _batch_naive(g)
    if scheme == "srs":
        return _batch_srs(g)
    if scheme == "ors":
        return _batch_ors(g)
    if scheme == "random":
        if stream is None:
            raise ValueError("random scheme needs a stream")
        return _batch_random(g, stream)
    raise ValueError(f"unknown scheme {scheme!r}")


def _batch_naive(g: np.ndarray) -> np.ndarray:
    count, n, nr = g.shape
    taken = np.zeros((count, nr), dtype=bool)
    snrs = np.empty((count, n))
    rows = np.arange(count)
    for i in range(n):
        masked = np.where(taken, -np.inf, g[:, i, :])
        j = masked.argmax(axis=1)
        snrs[:, i] = masked[rows, j]
        taken[rows, j] = True
    return snrs


def _batch_srs(g: np.ndarray) -> np.ndarray:
    count, n, nr = g.shape
    row_open = np.ones((count, n), dtype=bool)
    col_open = np.ones((count, nr), dtype=bool)
    snrs = np.empty((count, n))
    rows = np.arange(count)
    for _ in range(n):
        masked = np.where(col_open[:, None, :], g, -np.inf)
        row_best = masked.max(axis=2)
        row_arg = masked.argmax(axis=2)
        candidates = np.where(row_open, row_best, np.inf)
        i = candidates.argmin(axis=1)
        j = row_arg[rows, i]
        snrs[rows, i] = row_best[rows, i]
        row_open[rows, i] = False
        col_open[rows, j] = False
    return snrs


def _batch_ors(g: np.ndarray) -> np.ndarray:
    count, n, nr = g.shape
    if n == 1:
        return g.max(axis=2)
    if n == 2:
        return _batch_ors_two_user(g)
    # general N: per-matrix bottleneck matching (used at desk scale only)
    snrs = np.empty((count, n))
    for b in range(count):
        snrs[b] = select_ors(g[b]).user_snrs
    return snrs


def _batch_ors_two_user(g: np.ndarray) -> np.ndarray:
    """Closed-form two-user optimum.

    If the two row maxima sit in different columns they are jointly
    optimal. Otherwise exactly one user keeps the contested column and the
    other takes its second best; the better of the two splits (compare the
    sorted pair, min first) is the lexicographic optimum, since any
    assignment avoiding the contested column is dominated by one of them.
    """
    count = g.shape[0]
    order = np.argsort(-g, axis=2, kind="stable")  # stable -> lowest column on ties
    best = order[:, :, 0]
    second = order[:, :, 1]
    rows = np.arange(count)
    m0 = g[rows, 0, best[:, 0]]
    m1 = g[rows, 1, best[:, 1]]
    s0 = g[rows, 0, second[:, 0]]
    s1 = g[rows, 1, second[:, 1]]
    conflict = best[:, 0] == best[:, 1]
    # split A: user 0 keeps the contested column; split B: user 1 keeps it
    a_min = np.minimum(m0, s1)
    a_max = np.maximum(m0, s1)
    b_min = np.minimum(s0, m1)
    b_max = np.maximum(s0, m1)
    use_a = (a_min > b_min) | ((a_min == b_min) & (a_max >= b_max))
    u0 = np.where(conflict, np.where(use_a, m0, s0), m0)
    u1 = np.where(conflict, np.where(use_a, s1, m1), m1)
    return np.stack([u0, u1], axis=1)


def _batch_random(g: np.ndarray, stream: np.random.Generator) -> np.ndarray:
    count, n, nr = g.shape
    keys = stream.random((count, nr))
    perm = np.argsort(keys, axis=1)[:, :n]
    rows = np.arange(count)[:, None]
    return g[rows, np.arange(n)[None, :], perm]

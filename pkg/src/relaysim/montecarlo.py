"""Deterministic, parallelizable Monte Carlo engine for outage estimation.

Trials are processed in fixed-size blocks. The stream for a block is
derived from (seed, grid index, block index), and every block always draws
a full complement of channel variates before truncation, so the
realization of trial t is a pure function of (seed, grid index, t) no
matter how many trials are requested or how blocks are spread over
workers. Failure counts are merged by integer addition, which makes the
results bit-identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import NetworkConfig, db_to_linear, draw_channel_block, snr_matrix_block
from .rng import derive_stream
from .selection import SCHEMES, batch_select_snrs

BLOCK_TRIALS = 1 << 14

# estimates whose failure count is below this are too noisy to report as-is
RELIABLE_FAILURES = 10


@dataclass(frozen=True)
class OutageEstimate:
    trials: int
    failures: int
    p_hat: float
    std_err: float

    @classmethod
    def from_counts(cls, failures: int, trials: int) -> "OutageEstimate":
        if trials < 1 or not 0 <= failures <= trials:
            raise ValueError(f"bad counts: {failures}/{trials}")
        p = failures / trials
        return cls(
            trials=trials,
            failures=failures,
            p_hat=p,
            std_err=math.sqrt(p * (1.0 - p) / trials),
        )

    @property
    def reliable(self) -> bool:
        return self.failures >= RELIABLE_FAILURES


@dataclass(frozen=True)
class ExperimentResult:
    """One scheme's outage sweep: per-user and min-SNR curves over the grid."""

    config: NetworkConfig
    scheme: str
    power_grid_db: tuple[float, ...]
    per_user_outage: tuple[tuple[OutageEstimate, ...], ...]  # [user][grid point]
    min_snr_outage: tuple[OutageEstimate, ...]
    seed: int
    rank_histogram: dict[int, float] | None = None


def _check_scheme(scheme: str) -> None:
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def _check_grid(power_grid_db) -> tuple[float, ...]:
    grid = tuple(float(p) for p in power_grid_db)
    if not grid:
        raise ValueError("power grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("power grid must be strictly ascending")
    return grid


def _block_layout(trials: int) -> list[tuple[int, int]]:
    """(block index, trial count) pairs covering ``trials``."""
    blocks = []
    done = 0
    b = 0
    while done < trials:
        take = min(BLOCK_TRIALS, trials - done)
        blocks.append((b, take))
        done += take
        b += 1
    return blocks


def _simulate_block(
    config: NetworkConfig,
    scheme: str,
    p_lin: float,
    q_lin: float,
    seed: int,
    grid_idx: int,
    block_idx: int,
    count: int,
) -> np.ndarray:
    """Selected per-user SNRs for one block, truncated to ``count`` trials.

    A full block of channel variates is always drawn before truncation so
    trial realizations do not depend on the requested total.
    """
    rng = derive_stream(seed, grid_idx, block_idx)
    f, g = draw_channel_block(config, rng, BLOCK_TRIALS)
    gamma = snr_matrix_block(f, g, p_lin, q_lin)
    snrs = batch_select_snrs(scheme, gamma, rng)
    return snrs[:count]


def _sweep_task(args) -> tuple[int, np.ndarray, int]:
    config, scheme, p_lin, q_lin, seed, grid_idx, block_idx, count = args
    snrs = _simulate_block(config, scheme, p_lin, q_lin, seed, grid_idx, block_idx, count)
    th = config.snr_threshold
    user_fail = (snrs <= th).sum(axis=0).astype(np.int64)
    min_fail = int((snrs.min(axis=1) <= th).sum())
    return grid_idx, user_fail, min_fail


def run_outage_sweep(
    config: NetworkConfig,
    scheme: str,
    power_grid_db,
    trials: int,
    seed: int,
    workers: int = 1,
) -> ExperimentResult:
    """Simulate per-user and min-SNR outage over a dB power grid.

    At grid point p (dB) the user power is its linear value and the relay
    power keeps the config's relay:user power ratio, so equal-power
    configs sweep with Q = P. The config's threshold is used as-is
    (linear scale).
    """
    _check_scheme(scheme)
    grid = _check_grid(power_grid_db)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    q_ratio = config.relay_power / config.user_power
    tasks = []
    for gi, p_db in enumerate(grid):
        p = db_to_linear(p_db)
        for block_idx, count in _block_layout(trials):
            tasks.append((config, scheme, p, p * q_ratio, seed, gi, block_idx, count))

    n = config.num_users
    user_fails = np.zeros((len(grid), n), dtype=np.int64)
    min_fails = np.zeros(len(grid), dtype=np.int64)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = pool.map(_sweep_task, tasks, chunksize=4)
            for gi, uf, mf in results:
                user_fails[gi] += uf
                min_fails[gi] += mf
    else:
        for task in tasks:
            gi, uf, mf = _sweep_task(task)
            user_fails[gi] += uf
            min_fails[gi] += mf

    per_user = tuple(
        tuple(OutageEstimate.from_counts(int(user_fails[gi, u]), trials) for gi in range(len(grid)))
        for u in range(n)
    )
    min_curve = tuple(
        OutageEstimate.from_counts(int(min_fails[gi]), trials) for gi in range(len(grid))
    )
    return ExperimentResult(
        config=config,
        scheme=scheme,
        power_grid_db=grid,
        per_user_outage=per_user,
        min_snr_outage=min_curve,
        seed=seed,
    )


def _rank_task(args) -> np.ndarray:
    config, scheme, seed, block_idx, count = args
    rng = derive_stream(seed, 0, block_idx)
    f, g = draw_channel_block(config, rng, BLOCK_TRIALS)
    gamma = snr_matrix_block(f, g, config.user_power, config.relay_power)
    snrs = batch_select_snrs(scheme, gamma, rng)[:count]
    gamma = gamma[:count]
    gmin = snrs.min(axis=1)
    flat = gamma.reshape(count, -1)
    ranks = 1 + (flat > gmin[:, None]).sum(axis=1)
    cells = config.num_users * config.num_relays
    return np.bincount(ranks, minlength=cells + 1)


def rank_frequency(
    config: NetworkConfig, scheme: str, trials: int, seed: int, workers: int = 1
) -> dict[int, float]:
    """Empirical distribution of the rank of the minimum selected SNR
    among the sorted N*N_r matrix entries (1 = largest)."""
    _check_scheme(scheme)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    tasks = [(config, scheme, seed, b, c) for b, c in _block_layout(trials)]
    cells = config.num_users * config.num_relays
    counts = np.zeros(cells + 1, dtype=np.int64)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for c in pool.map(_rank_task, tasks, chunksize=4):
                counts += c
    else:
        for task in tasks:
            counts += _rank_task(task)
    return {k: int(counts[k]) / trials for k in range(1, cells + 1) if counts[k] > 0}


def estimate_diversity_slope(power_grid_db, outage_values, window_db=None) -> float:
    """Negated least-squares slope of log10(outage) vs log10(power).

    ``window_db`` is an inclusive (low, high) dB window; by default the
    top third of the grid points (at least 3) are used, since the
    diversity order is a large-power limit.
    """
    p_db = np.asarray(power_grid_db, dtype=float)
    out = np.asarray(outage_values, dtype=float)
    if p_db.shape != out.shape or p_db.ndim != 1:
        raise ValueError("grid and outage arrays must be 1-D and equal length")
    if window_db is None:
        take = max(3, math.ceil(len(p_db) / 3))
        mask = np.zeros(len(p_db), dtype=bool)
        mask[-take:] = True
    else:
        lo, hi = window_db
        mask = (p_db >= lo) & (p_db <= hi)
    if mask.sum() < 3:
        raise ValueError("need at least 3 grid points in the slope window")
    if np.any(out[mask] <= 0):
        raise ValueError("zero outage values in the slope window; run more trials")
    slope = np.polyfit(p_db[mask] / 10.0, np.log10(out[mask]), 1)[0]
    return float(-slope)

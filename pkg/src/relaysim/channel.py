"""Rayleigh fading channel draws and the amplify-and-forward receive SNR matrix.

All powers are linear-scale inside the package; dB conversion happens once
at the CLI boundary. Channel coefficients are i.i.d. circularly symmetric
complex Gaussian with unit variance (two real Gaussians of variance 1/2),
and the end-to-end SNR of a user-relay-destination hop is

    PQ |f g|^2 / (P |f|^2 + Q |g|^2 + 1)

which is strictly below either single-hop SNR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_SQRT_HALF = math.sqrt(0.5)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0:
        raise ValueError("dB conversion requires a positive linear value")
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class NetworkConfig:
    """Network dimensions and powers: the experiment's independent variables."""

    num_users: int
    num_relays: int
    user_power: float
    relay_power: float
    snr_threshold: float

    def __post_init__(self):
        if self.num_users < 1:
            raise ValueError("need at least one user")
        if self.num_relays < self.num_users:
            raise ValueError(
                f"need num_relays >= num_users, got {self.num_relays} < {self.num_users}"
            )
        for name in ("user_power", "relay_power", "snr_threshold"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v}")


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of the fading coefficients.

    ``f[i, j]`` is user i -> relay j and ``g[j, i]`` is relay j ->
    destination i, so ``f`` is N x N_r and ``g`` is N_r x N.
    """

    f: np.ndarray
    g: np.ndarray


def draw_channels(config: NetworkConfig, stream: np.random.Generator) -> ChannelRealization:
    """Draw one i.i.d. CN(0,1) channel realization from ``stream``.

    The draw order (f real, f imag, g real, g imag) is fixed, so a given
    stream state yields a bit-identical realization.
    """
    n, nr = config.num_users, config.num_relays
    f = _complex_normal(stream, (n, nr))
    g = _complex_normal(stream, (nr, n))
    return ChannelRealization(f=f, g=g)


def draw_channel_block(
    config: NetworkConfig, stream: np.random.Generator, count: int
) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``count`` stacked realizations: f is (count, N, N_r), g is (count, N_r, N)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    n, nr = config.num_users, config.num_relays
    f = _complex_normal(stream, (count, n, nr))
    g = _complex_normal(stream, (count, nr, n))
    return f, g


def _complex_normal(stream: np.random.Generator, shape) -> np.ndarray:
    re = stream.standard_normal(shape)
    im = stream.standard_normal(shape)
    return (re + 1j * im) * _SQRT_HALF


def end_to_end_snr(f_ij: complex, g_ji: complex, user_power: float, relay_power: float) -> float:
    """End-to-end AF receive SNR for one user-relay pair."""
    if user_power <= 0 or relay_power <= 0:
        raise ValueError("powers must be positive")
    a = user_power * abs(f_ij) ** 2
    b = relay_power * abs(g_ji) ** 2
    return a * b / (a + b + 1.0)


def build_snr_matrix(realization: ChannelRealization, config: NetworkConfig) -> np.ndarray:
    """Receive SNR matrix: entry (i, j) is the SNR of user i helped by relay j."""
    n, nr = config.num_users, config.num_relays
    if realization.f.shape != (n, nr) or realization.g.shape != (nr, n):
        raise ValueError(
            f"channel shapes {realization.f.shape}/{realization.g.shape} do not match "
            f"config ({n} users, {nr} relays)"
        )
    a = config.user_power * np.abs(realization.f) ** 2
    b = config.relay_power * np.abs(realization.g.T) ** 2
    return a * b / (a + b + 1.0)


def snr_matrix_block(
    f: np.ndarray, g: np.ndarray, user_power: float, relay_power: float
) -> np.ndarray:
    """Vectorized SNR matrices for stacked realizations, shape (count, N, N_r)."""
    a = user_power * np.abs(f) ** 2
    b = relay_power * np.abs(np.swapaxes(g, -1, -2)) ** 2
    return a * b / (a + b + 1.0)

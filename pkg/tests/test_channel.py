import math

import numpy as np
import pytest

from relaysim.analytics import cdf_snr_exact
from relaysim.channel import (
    ChannelRealization,
    NetworkConfig,
    build_snr_matrix,
    db_to_linear,
    draw_channel_block,
    draw_channels,
    end_to_end_snr,
    linear_to_db,
    snr_matrix_block,
)
from relaysim.rng import derive_stream


def make_config(n=2, nr=4, p=10.0, q=10.0, th=3.1623):
    return NetworkConfig(num_users=n, num_relays=nr, user_power=p, relay_power=q, snr_threshold=th)


class TestNetworkConfig:
    def test_valid(self):
        cfg = make_config()
        assert cfg.num_relays >= cfg.num_users

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(n=0),
            dict(n=3, nr=2),
            dict(p=0.0),
            dict(q=-1.0),
            dict(th=math.inf),
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            make_config(**kwargs)


class TestDrawChannels:
    def test_shapes(self):
        cfg = make_config(2, 4)
        real = draw_channels(cfg, derive_stream(1, 0))
        assert real.f.shape == (2, 4)
        assert real.g.shape == (4, 2)

    def test_deterministic(self):
        cfg = make_config()
        a = draw_channels(cfg, derive_stream(7, 3))
        b = draw_channels(cfg, derive_stream(7, 3))
        assert np.array_equal(a.f, b.f) and np.array_equal(a.g, b.g)
        c = draw_channels(cfg, derive_stream(7, 4))
        assert not np.array_equal(a.f, c.f)

    def test_unit_variance(self):
        cfg = make_config(2, 4)
        f, g = draw_channel_block(cfg, derive_stream(11, 0), 100_000 // 8)
        mags = np.abs(np.concatenate([f.ravel(), g.ravel()])) ** 2
        assert 0.98 <= mags.mean() <= 1.02

    def test_block_matches_layout(self):
        cfg = make_config(2, 3)
        f, g = draw_channel_block(cfg, derive_stream(5, 1), 10)
        assert f.shape == (10, 2, 3) and g.shape == (10, 3, 2)


class TestEndToEndSnr:
    def test_zero_channel(self):
        assert end_to_end_snr(0.0, 1 + 1j, 5.0, 7.0) == 0.0

    def test_unit_example(self):
        # P = Q = 1 and unit-magnitude channels give 1/3
        assert end_to_end_snr(1.0, 1.0, 1.0, 1.0) == pytest.approx(1.0 / 3.0, rel=1e-15)

    def test_hop_symmetry(self):
        f, g, p, q = 0.3 + 0.4j, 1.1 - 0.2j, 4.0, 9.0
        assert end_to_end_snr(f, g, p, q) == pytest.approx(end_to_end_snr(g, f, q, p), rel=1e-15)

    def test_below_either_hop(self):
        rng = derive_stream(2, 0)
        for _ in range(200):
            f, g = rng.normal() + 1j * rng.normal(), rng.normal() + 1j * rng.normal()
            p, q = rng.uniform(0.1, 50), rng.uniform(0.1, 50)
            snr = end_to_end_snr(f, g, p, q)
            if abs(f) > 0 and abs(g) > 0:
                assert snr < min(p * abs(f) ** 2, q * abs(g) ** 2)

    def test_bad_powers(self):
        with pytest.raises(ValueError):
            end_to_end_snr(1.0, 1.0, 0.0, 1.0)


class TestSnrMatrix:
    def test_all_zero(self):
        cfg = make_config(2, 3)
        real = ChannelRealization(f=np.zeros((2, 3), complex), g=np.zeros((3, 2), complex))
        assert np.all(build_snr_matrix(real, cfg) == 0.0)

    def test_single_user_row(self):
        cfg = make_config(1, 4)
        real = draw_channels(cfg, derive_stream(3, 0))
        m = build_snr_matrix(real, cfg)
        assert m.shape == (1, 4)
        for j in range(4):
            expect = end_to_end_snr(real.f[0, j], real.g[j, 0], cfg.user_power, cfg.relay_power)
            assert m[0, j] == pytest.approx(expect, rel=1e-15)

    def test_dimension_mismatch(self):
        cfg = make_config(2, 3)
        real = ChannelRealization(f=np.zeros((2, 4), complex), g=np.zeros((4, 2), complex))
        with pytest.raises(ValueError):
            build_snr_matrix(real, cfg)

    def test_entrywise_hop_bound(self):
        cfg = make_config(3, 5)
        real = draw_channels(cfg, derive_stream(9, 0))
        m = build_snr_matrix(real, cfg)
        hop_a = cfg.user_power * np.abs(real.f) ** 2
        hop_b = cfg.relay_power * np.abs(real.g.T) ** 2
        assert np.all(m <= hop_a) and np.all(m <= hop_b)

    def test_block_matches_scalar(self):
        cfg = make_config(2, 4)
        f, g = draw_channel_block(cfg, derive_stream(4, 2), 50)
        block = snr_matrix_block(f, g, cfg.user_power, cfg.relay_power)
        for b in (0, 17, 49):
            real = ChannelRealization(f=f[b], g=g[b])
            assert np.allclose(block[b], build_snr_matrix(real, cfg), rtol=0, atol=0)

    def test_empirical_cdf_matches_exact(self):
        # Kolmogorov-Smirnov distance of a million entries against the
        # closed-form CDF at P = Q = 10
        cfg = make_config(2, 2, 10.0, 10.0)
        need = 1_000_000
        chunks = []
        got = 0
        b = 0
        while got < need:
            f, g = draw_channel_block(cfg, derive_stream(123, b), 1 << 14)
            chunk = snr_matrix_block(f, g, 10.0, 10.0).ravel()
            chunks.append(chunk)
            got += len(chunk)
            b += 1
        s = np.sort(np.concatenate(chunks)[:need])
        cdf = cdf_snr_exact(s, 10.0, 10.0)
        n = len(s)
        ks = max(
            np.max(np.abs(np.arange(1, n + 1) / n - cdf)),
            np.max(np.abs(np.arange(0, n) / n - cdf)),
        )
        assert ks < 0.005


class TestDbConversion:
    def test_roundtrip(self):
        assert db_to_linear(20.0) == pytest.approx(100.0, rel=1e-12)
        assert linear_to_db(db_to_linear(7.7)) == pytest.approx(7.7, rel=1e-12)

    def test_invalid(self):
        with pytest.raises(ValueError):
            linear_to_db(0.0)

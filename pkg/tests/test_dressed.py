import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twomode.dressed import (
    build_effective_two_level,
    diagonalize_two_level,
    log_log_slopes,
    plateau_rate,
    saturation_curve,
    two_photon_rate_dressed,
)
from twomode.errors import InvalidInputError, PoleError
from twomode.params import TOROID_MODE_VOLUME
from twomode.perturbative import two_photon_rate_full

from conftest import unit_scenario


def quadratic_roots(a, b, v):
    """Independent eigenvalues of [[a, v], [v, b]] from the characteristic polynomial."""
    tr, det = a + b, a * b - v * v
    disc = math.sqrt(tr * tr - 4 * det)
    return (tr + disc) / 2, (tr - disc) / 2


class TestTwoLevel:
    def test_decoupled(self):
        s = unit_scenario(n_atoms=0.0)
        b = build_effective_two_level(s)
        assert {b.lambda_plus, b.lambda_minus} == {1.0, 0.5 + 10.0}
        assert b.mixing_angle == 0.0

    def test_degenerate(self):
        s = unit_scenario(delta1=0.5, n_atoms=1.0)
        b = build_effective_two_level(s)
        assert b.lambda_plus == pytest.approx(1.0 + math.sqrt(2), rel=1e-14)
        assert b.lambda_minus == pytest.approx(1.0 - math.sqrt(2), rel=1e-14)
        assert b.mixing_angle == pytest.approx(math.pi / 4, rel=1e-15)

    def test_unit_example(self):
        b = build_effective_two_level(unit_scenario(n_atoms=4.0))
        assert b.m1_prime == 2.0
        hi, lo = quadratic_roots(1.0, 10.5, 2 * math.sqrt(2))
        assert hi == pytest.approx((11.5 + math.sqrt(122.25)) / 2, rel=1e-14)
        assert b.lambda_plus == pytest.approx(hi, rel=1e-12)
        assert b.lambda_minus == pytest.approx(lo, rel=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(-1e2, 1e2))
    def test_residual(self, h11, h22, m):
        b = diagonalize_two_level(h11, h22, m)
        a = b.matrix()
        vecs = b.eigenvectors()
        norm = np.linalg.norm(a, 2) or 1.0
        for lam, v in zip((b.lambda_plus, b.lambda_minus), vecs.T):
            assert np.linalg.norm(a @ v - lam * v) <= 1e-12 * norm + 1e-300
        assert b.lambda_plus >= b.lambda_minus
        assert vecs.T @ vecs == pytest.approx(np.eye(2), abs=1e-14)

    def test_pair_like_connects_to_bare_state(self):
        b = diagonalize_two_level(0.0, 10.0, 1e-3)
        lam, vec = b.pair_like()
        assert lam == pytest.approx(0.0, abs=1e-6)
        assert abs(vec[0]) > 0.999


class TestDressedRate:
    def test_low_density_matches_full(self, rb):
        s = rb.replace(n_atoms=760.0)  # 1e13 cm^-3
        assert two_photon_rate_dressed(s) == pytest.approx(two_photon_rate_full(s).rate, rel=0.05)

    def test_zero_coupling(self, rb):
        assert two_photon_rate_dressed(rb.replace(m1=0.0)) == 0.0
        assert two_photon_rate_dressed(rb.replace(n_atoms=0.0)) == 0.0

    def test_plateau(self, rb):
        a = two_photon_rate_dressed(rb.replace(n_atoms=7.6e7))
        b = two_photon_rate_dressed(rb.replace(n_atoms=7.6e8))
        assert abs(a - b) / b < 0.05
        assert b == pytest.approx(plateau_rate(rb), rel=1e-9)

    def test_models(self, rb):
        for model in ("mixing", "resolvent"):
            assert two_photon_rate_dressed(rb, model=model) > 0
        with pytest.raises(InvalidInputError):
            two_photon_rate_dressed(rb, model="bogus")

    def test_delta1_zero(self, rb):
        with pytest.raises(PoleError):
            two_photon_rate_dressed(rb.replace(delta1=0.0))


class TestSaturationCurve:
    def test_single_row(self, rb):
        res = saturation_curve(rb, [1e15], TOROID_MODE_VOLUME)
        assert res.rows[0][1] == pytest.approx(7.6e4, rel=1e-12)

    def test_shape(self, rb):
        rhos = [10.0**e for e in np.arange(12, 19.01, 0.5)]
        res = saturation_curve(rb, rhos, TOROID_MODE_VOLUME)
        r2 = res.column("r2_dressed")
        assert all(b >= a for a, b in zip(r2, r2[1:]))
        plateau = res.metadata["plateau_s-1"]
        assert 4.7e9 / 2 <= plateau <= 4.7e9 * 2
        assert res.metadata["free_constants"].startswith("none")

    @pytest.mark.parametrize("rhos", [[], [0.0], [2.0, 1.0]])
    def test_rejects(self, rb, rhos):
        with pytest.raises(InvalidInputError):
            saturation_curve(rb, rhos, TOROID_MODE_VOLUME)

    def test_slopes_power_law(self):
        x = np.logspace(0, 3, 7)
        assert log_log_slopes(x, 5 * x**1.5) == pytest.approx([1.5] * 7, rel=1e-12)

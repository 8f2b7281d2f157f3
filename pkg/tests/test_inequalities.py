import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from besovflow.corpus import FAMILIES, CorpusSpec, corpus_digest, make_member
from besovflow.inequalities import (
    INEQUALITIES,
    bernstein_check,
    bony_identity_check,
    gn_quarter_check,
    interpolation_check,
    interpolation_exponent,
    log_sobolev_check,
    log_sobolev_split,
    machihara_ozawa_check,
    run_corpus,
    trilinear_check,
)
from besovflow.littlewood_paley import build_bank
from besovflow.spectral import Grid, SpectralField, forward_transform, leray_project, sobolev_norm
from conftest import band_limited
from oracles import annulus

VOL = (2 * math.pi) ** 3


def _sin(grid, m=(1, 0, 0), amp=1.0, comp=None):
    c = np.zeros((1 if comp is None else 3,) + (grid.N,) * 3, dtype=complex)
    pos = tuple(k % grid.N for k in m)
    neg = tuple(-k % grid.N for k in m)
    i = 0 if comp is None else comp
    c[(i,) + pos], c[(i,) + neg] = -0.5j * amp, 0.5j * amp
    return SpectralField(grid, c)


class TestBernstein:
    @pytest.mark.parametrize("kk,j", [(2, 0), (2, 1), (4, 1), (4, 2), (1, -1), (1, 0)])
    def test_axis_mode_ratio(self, bank32, kk, j):
        e = bernstein_check(_sin(bank32.grid, (kk, 0, 0)), j, 1, 2, 2, bank32)
        assert e["i"].ratio == pytest.approx(kk / 2**j, rel=1e-13)
        assert 0.75 <= e["i"].ratio <= 8 / 3

    def test_empty_block_skipped(self, bank32):
        e = bernstein_check(_sin(bank32.grid, (4, 0, 0)), 0, 1, 2, np.inf, bank32)
        assert e == {"i": None, "ii": None}

    def test_order_of_exponents(self, bank32):
        with pytest.raises(ValueError):
            bernstein_check(_sin(bank32.grid), 0, 1, np.inf, 2, bank32)


class TestLogSobolev:
    def test_rejects_low_regularity(self, bank16):
        with pytest.raises(ValueError):
            log_sobolev_check(_sin(bank16.grid), 1.5, bank16)

    def test_flat_branch(self, bank16):
        f = _sin(bank16.grid, amp=0.05)
        assert sobolev_norm(f, 2) <= math.e
        r = log_sobolev_check(f, 2.0, bank16)["b"]
        from besovflow.littlewood_paley import grad_besov_minus1

        assert r.rhs_core == pytest.approx(1 + grad_besov_minus1(f, bank16), rel=1e-15)
        assert r.lhs == pytest.approx(0.05, rel=1e-14)

    def test_split_rule(self):
        assert log_sobolev_split(0.5, 0.5) == 1
        n = log_sobolev_split(1000.0, 0.5)
        assert 2 ** (-0.5 * n) * 1000 <= 1 < 2 ** (-0.5 * (n - 1)) * 1000

    @settings(max_examples=15, deadline=None)
    @given(st.floats(1e-3, 1e3), st.integers(1, 12))
    def test_split_form_scale_invariant(self, lam, n):
        g = Grid(16)
        bank = build_bank(g)
        f = band_limited(g, 4, np.random.default_rng(5))
        a = log_sobolev_check(f, 2.5, bank, n_split=n)["a"].ratio
        b = log_sobolev_check(f * lam, 2.5, bank, n_split=n)["a"].ratio
        assert b == pytest.approx(a, rel=1e-12)


class TestMachiharaOzawa:
    def test_single_mode_oracle(self, bank16):
        # u = A sin(x1) e2: grad u = A cos(x1), grid mean of cos^4 is 3/8 exactly
        A = 1.7
        u = _sin(bank16.grid, amp=A, comp=1)
        lhs = A**2 * math.sqrt(VOL * 3 / 8)
        rhs = A * max(annulus(1.0), annulus(2.0)) * A * math.sqrt(VOL / 2)
        r = machihara_ozawa_check(u, bank16)
        assert r.lhs == pytest.approx(lhs, rel=1e-13)
        assert r.rhs_core == pytest.approx(rhs, rel=1e-13)

    def test_zero_skipped(self, bank16):
        assert machihara_ozawa_check(SpectralField(bank16.grid, np.zeros((3, 16, 16, 16))), bank16) is None


class TestGagliardoNirenberg:
    def test_single_mode_oracle(self, grid16):
        f = _sin(grid16)
        l2 = math.sqrt(VOL / 2)
        expected = (VOL * 3 / 8) ** 0.25 / l2
        assert gn_quarter_check(f).ratio == pytest.approx(expected, rel=1e-13)

    def test_zero_skipped(self, grid16):
        assert gn_quarter_check(SpectralField(grid16, np.zeros((16,) * 3))) is None


class TestInterpolation:
    def test_degenerate_identity(self, grid16, rng):
        f = band_limited(grid16, 4, rng)
        assert interpolation_check(f, 2, 2, 2, 1.0, 3.0, 3.0).ratio == pytest.approx(1.0, rel=1e-15)

    @pytest.mark.parametrize("m", [(1, 0, 0), (2, 1, 0), (3, 2, 1), (5, 0, 4)])
    def test_parseval_equality(self, grid32, m):
        r = interpolation_check(_sin(grid32, m, amp=2.3), 2, 1, 3, 0.5, 2, 2).ratio
        assert abs(r - 1.0) <= 4 * np.finfo(float).eps

    def test_exponents(self):
        assert interpolation_exponent(2, 1, 3, 0.5, 2, 2) == 0.5
        assert interpolation_exponent(2, 1, 3, 0.875, 2, 2) == 0.25

    def test_rejects_inconsistent(self, grid16):
        f = _sin(grid16)
        with pytest.raises(ValueError, match=r"p=0\.5"):
            interpolation_check(f, 3, 0, 3, 0.0, 1, 2)
        with pytest.raises(ValueError):
            interpolation_check(f, 1, 2, 3, 0.5, 2, 2)
        with pytest.raises(ValueError):
            interpolation_check(f, 2, 1, 3, 1.5, 2, 2)


class TestTrilinear:
    def test_divergence_free_with_equal_scalars(self, bank32, rng):
        u = leray_project(band_limited(bank32.grid, 5, rng, 3))
        g = band_limited(bank32.grid, 5, rng)
        for est in ("dyadic", "square_function"):
            e = trilinear_check(u, g, g, bank32, est)
            assert e.label == "div_free"
            assert e.ratio <= 1e-10

    def test_constant_f_skipped(self, bank16, rng):
        c = forward_transform(np.ones((3, 16, 16, 16)), bank16.grid)
        g = band_limited(bank16.grid, 3, rng)
        assert trilinear_check(c, g, g, bank16) is None

    def test_argument_checks(self, bank16, rng):
        g = band_limited(bank16.grid, 3, rng)
        with pytest.raises(ValueError):
            trilinear_check(g, g, g, bank16)
        with pytest.raises(ValueError):
            trilinear_check(band_limited(bank16.grid, 3, rng, 3), g, g, bank16, "carleson")


class TestBony:
    def test_constant_factor(self, bank32, rng):
        f = band_limited(bank32.grid, 5, rng)
        c = forward_transform(np.full((32,) * 3, 3.0), bank32.grid)
        assert bony_identity_check(f, c, bank32).residual <= 1e-10
        assert bony_identity_check(c, f, bank32).residual <= 1e-10

    def test_band_flag(self, bank32, rng):
        assert bony_identity_check(band_limited(bank32.grid, 5, rng), band_limited(bank32.grid, 5, rng), bank32).within_band
        assert not bony_identity_check(band_limited(bank32.grid, 6, rng), band_limited(bank32.grid, 2, rng), bank32).within_band


class TestCorpus:
    def test_spec_validation(self):
        with pytest.raises(ValueError):
            CorpusSpec(families=("fractal",))
        with pytest.raises(ValueError):
            CorpusSpec(grids=(8,), k_max=5)

    def test_members_are_grid_independent(self):
        a = make_member("gaussian_bump", 1, Grid(16), 0, 5)
        b = make_member("gaussian_bump", 1, Grid(32), 0, 5)
        for name in ("f", "g", "h", "u", "v"):
            fa, fb = getattr(a, name), getattr(b, name)
            idx = np.arange(-5, 6)
            ca = fa.coeffs[np.ix_(range(fa.components), idx % 16, idx % 16, idx % 16)]
            cb = fb.coeffs[np.ix_(range(fb.components), idx % 32, idx % 32, idx % 32)]
            assert np.array_equal(ca, cb)

    def test_member_properties(self, grid16):
        from besovflow.spectral import divergence_defect, hermitian_defect

        for fam in FAMILIES:
            m = make_member(fam, 0, grid16, 0, 5)
            assert divergence_defect(m.u) <= 1e-12
            for fld in (m.f, m.g, m.h, m.u, m.v):
                assert hermitian_defect(fld) <= 1e-14
                assert np.all(fld.mean == 0)

    def test_digest(self):
        assert corpus_digest(CorpusSpec()) == corpus_digest(CorpusSpec(grids=(64,)))
        assert corpus_digest(CorpusSpec()) != corpus_digest(CorpusSpec(rng_seed=1))

    def test_empty(self):
        rep = run_corpus(CorpusSpec(count=0))
        assert rep.reports == {} and rep.bony == [] and rep.failures == []

    def test_small_sweep(self):
        rep = run_corpus(CorpusSpec(grids=(16,), count=1))
        assert not rep.failures
        assert {name for name, _ in rep.reports} == set(INEQUALITIES)
        for r in rep.reports.values():
            assert r.max_ratio is not None and math.isfinite(r.max_ratio)
            assert all(e.ratio >= 0 for e in r.entries)
            assert set(r.family_max()) <= set(FAMILIES)

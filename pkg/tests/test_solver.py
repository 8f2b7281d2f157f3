import math
import warnings

import numpy as np
import pytest

from besovflow.solver import (
    IC_KINDS,
    BlowUpError,
    CFLWarning,
    SimState,
    SolverConfig,
    buoyancy_term,
    initial_condition,
    nonlinear_term,
    simulate,
    step,
)
from besovflow.spectral import (
    divergence_defect,
    forward_transform,
    grad_l2_norm,
    hermitian_defect,
    inner_product,
    leray_project,
    to_physical,
    zeros,
)
from conftest import band_limited


def _ic(kind, grid, amp=1.0, seed=0, theta=0.0):
    return initial_condition(kind, amp, seed, grid, theta)


class TestInitialConditions:
    def test_shear(self, grid16):
        s = _ic("shear", grid16, amp=2.0)
        x = grid16.coords()[0]
        assert np.allclose(to_physical(s.u)[1], 2 * np.sin(x), atol=1e-14)
        assert divergence_defect(s.u) == 0.0
        assert not np.any(s.theta.coeffs)

    def test_buoyant_mode(self, grid16):
        s = _ic("buoyant_mode", grid16, amp=0.3)
        assert not np.any(s.u.coeffs)
        assert np.allclose(to_physical(s.theta)[0], 0.3 * np.sin(grid16.coords()[0]), atol=1e-15)

    def test_random_band(self, grid16):
        a = _ic("random_band", grid16, amp=1.5, seed=11, theta=0.5)
        b = _ic("random_band", grid16, amp=1.5, seed=11, theta=0.5)
        assert np.array_equal(a.u.coeffs, b.u.coeffs) and np.array_equal(a.theta.coeffs, b.theta.coeffs)
        c = _ic("random_band", grid16, amp=1.5, seed=12, theta=0.5)
        assert not np.array_equal(a.u.coeffs, c.u.coeffs)
        active = np.any(np.abs(a.u.coeffs) > 0, axis=0)
        kmag = grid16.kmag
        assert kmag[active].min() >= 1 and kmag[active].max() <= 4
        assert divergence_defect(a.u) <= 1e-12
        assert hermitian_defect(a.u) <= 1e-15
        assert math.sqrt(np.sum(np.abs(a.u.coeffs) ** 2)) == pytest.approx(1.5, rel=1e-12)
        assert a.theta.coeffs[0, 0, 0, 0] == 0

    def test_all_kinds_valid(self, grid16):
        for kind in IC_KINDS:
            s = _ic(kind, grid16, theta=0.2)
            assert divergence_defect(s.u) <= 1e-12
            assert s.theta.mean[0] == 0.0

    def test_unknown_kind(self, grid16):
        with pytest.raises(ValueError, match="unknown initial condition"):
            _ic("vortex_ring", grid16)


class TestTerms:
    def test_shear_self_advection_vanishes(self, grid16):
        u = _ic("shear", grid16, amp=3.0).u
        assert np.max(np.abs(nonlinear_term(u, u).coeffs)) <= 1e-13 * 9

    def test_constant_is_not_advected(self, grid16, rng):
        u = leray_project(band_limited(grid16, 5, rng, 3))
        c = forward_transform(np.full((16,) * 3, 7.0), grid16)
        assert np.max(np.abs(nonlinear_term(u, c).coeffs)) <= 1e-14

    def test_transport_is_skew(self, grid32, rng):
        u = leray_project(band_limited(grid32, 5, rng, 3))
        f = band_limited(grid32, 5, rng)
        lhs = abs(inner_product(nonlinear_term(u, f), f))
        assert lhs <= 1e-10 * grad_l2_norm(u, 0) * grad_l2_norm(f, 0) ** 2

    def test_buoyancy_projection(self, grid16):
        x, _, z = grid16.coords()
        assert np.max(np.abs(buoyancy_term(forward_transform(np.sin(z), grid16)).coeffs)) <= 1e-16
        b = buoyancy_term(forward_transform(np.sin(x), grid16))
        assert np.allclose(to_physical(b), np.stack([0 * x, 0 * x, np.sin(x)]), atol=1e-15)
        assert not np.any(buoyancy_term(zeros(grid16)).coeffs)


class TestStep:
    def test_zero_state(self, grid16):
        s = SimState(zeros(grid16, 3), zeros(grid16))
        out = step(s, 0.01)
        assert not np.any(out.u.coeffs) and not np.any(out.theta.coeffs)
        assert out.t == 0.01

    def test_shear_decays_exactly(self, grid16):
        s0 = _ic("shear", grid16)
        s = s0
        for _ in range(50):
            s = step(s, 0.02)
        ref = math.exp(-s.t) * s0.u.coeffs
        assert np.max(np.abs(s.u.coeffs - ref)) <= 1e-12 * np.max(np.abs(ref))

    def test_invariants_along_random_run(self, grid16):
        s = _ic("random_band", grid16, amp=2.0, seed=3, theta=1.0)
        l2 = grad_l2_norm(s.theta, 0)
        for _ in range(20):
            s = step(s, 5e-3)
            assert divergence_defect(s.u) <= 1e-10
            assert hermitian_defect(s.u) <= 1e-12
            assert not np.any(s.u.coeffs[:, ~grid16.dealias_mask])
            new = grad_l2_norm(s.theta, 0)
            assert new <= l2 + 1e-10 * 5e-3
            l2 = new

    def test_cfl_warning(self, grid16):
        s = _ic("shear", grid16, amp=50.0)
        with pytest.warns(CFLWarning):
            step(s, 0.05)

    def test_buoyant_mode_second_order(self, grid16):
        x = grid16.coords()[0]
        errs = []
        for dt in (0.02, 0.01):
            s = _ic("buoyant_mode", grid16)
            for _ in range(int(round(0.5 / dt))):
                s = step(s, dt)
            exact = 0.5 * math.exp(-0.5) * np.sin(x)
            errs.append(np.max(np.abs(to_physical(s.u)[2] - exact)))
            assert errs[-1] <= 5 * dt**2
        assert 3.2 <= errs[0] / errs[1] <= 4.8


class TestConfig:
    def test_problems(self):
        assert SolverConfig().problems() == []
        bad = SolverConfig(N=9, dt=0.0, t_end=-1, ic_kind="x", nu=0, sample_every=0)
        keys = [p.split(":")[0] for p in bad.problems()]
        assert keys == ["N", "dt", "t_end", "ic_kind", "nu", "sample_every"]

    def test_guard_is_informational(self):
        assert SolverConfig(N=32).stability_guard() > 0


class TestSimulate:
    def test_zero_duration(self):
        traj = simulate(SolverConfig(N=16, t_end=0.0, ic_kind="shear"))
        assert len(traj.samples) == 1
        s = traj.samples[0]
        assert s.t == 0.0 and s.criterion_cum == 0.0
        assert s.l2_u == pytest.approx((2 * math.pi) ** 1.5 / math.sqrt(2), rel=1e-14)

    def test_shear_energy(self):
        traj = simulate(SolverConfig(N=16, dt=1e-3, t_end=0.3, ic_kind="shear", sample_every=25))
        l0 = traj.samples[0].l2_u
        for s in traj.samples:
            assert abs(s.l2_u - math.exp(-s.t) * l0) <= 1e-10 * l0

    def test_blow_up(self):
        cfg = SolverConfig(N=16, dt=0.5, t_end=50.0, ic_kind="random_band", ic_amplitude=1e4,
                           nu=1e-3, kappa=1e-3, sample_every=1)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            with pytest.raises(BlowUpError) as info:
                simulate(cfg)
        traj = info.value.trajectory
        assert traj.samples and all(math.isfinite(s.criterion_cum) for s in traj.samples)
        assert traj.final_state.is_finite()
        assert info.value.t > traj.samples[-1].t - 1e-12

    @pytest.mark.slow
    def test_taylor_green_energy_without_buoyancy(self):
        traj = simulate(SolverConfig(N=32, dt=1e-3, t_end=1.0, ic_kind="taylor_green", sample_every=50))
        e = [s.l2_u**2 + s.l2_theta**2 for s in traj.samples]
        assert all(b <= a for a, b in zip(e, e[1:]))

"""Pseudo-spectral time stepping for the periodic 3D Boussinesq system.

    du/dt + (u.grad)u - nu Lap u + grad pi = theta e3,   div u = 0
    dtheta/dt + (u.grad)theta - kappa Lap theta = 0

Pressure is eliminated by Leray projection.  Diffusion is integrated exactly
through exponential multipliers; the transport and buoyancy terms are advanced
with the second-order exponential predictor-corrector (ETD2RK).
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .spectral import (
    Grid,
    SpectralField,
    _expand,
    _irfft_half,
    _leray,
    _rfft_half,
    forward_transform,
    leray_project,
    zeros,
)

log = logging.getLogger(__name__)

IC_KINDS = ("taylor_green", "shear", "buoyant_mode", "random_band")
RANDOM_BAND = (1.0, 4.0)


class CFLWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class SimState:
    u: SpectralField
    theta: SpectralField
    t: float = 0.0
    nu: float = 1.0
    kappa: float = 1.0

    def __post_init__(self):
        if self.u.components != 3 or self.theta.components != 1:
            raise ValueError("SimState needs a 3-component u and a scalar theta")
        if self.u.grid != self.theta.grid:
            raise ValueError("u and theta live on different grids")

    @property
    def grid(self) -> Grid:
        return self.u.grid

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.u.coeffs).all() and np.isfinite(self.theta.coeffs).all())


@dataclass(frozen=True)
class SolverConfig:
    N: int = 32
    dt: float = 1e-3
    t_end: float = 1.0
    ic_kind: str = "taylor_green"
    ic_amplitude: float = 1.0
    theta_amplitude: float = 0.0
    rng_seed: int = 0
    nu: float = 1.0
    kappa: float = 1.0
    sample_every: int = 10
    snapshot_every: int = 0

    def problems(self) -> list[str]:
        """Every invalid field, as 'key: reason' strings."""
        out = []
        if self.N < 8 or self.N % 2:
            out.append(f"N: must be an even integer >= 8, got {self.N}")
        if not (np.isfinite(self.dt) and self.dt > 0):
            out.append(f"dt: must be > 0, got {self.dt}")
        if not (np.isfinite(self.t_end) and self.t_end >= 0):
            out.append(f"t_end: must be >= 0, got {self.t_end}")
        if self.ic_kind not in IC_KINDS:
            out.append(f"ic_kind: unknown {self.ic_kind!r}; choose from {', '.join(IC_KINDS)}")
        for key in ("nu", "kappa"):
            v = getattr(self, key)
            if not (np.isfinite(v) and v > 0):
                out.append(f"{key}: must be > 0, got {v}")
        for key in ("ic_amplitude", "theta_amplitude"):
            if not np.isfinite(getattr(self, key)):
                out.append(f"{key}: must be finite")
        if self.sample_every < 1:
            out.append(f"sample_every: must be >= 1, got {self.sample_every}")
        if self.snapshot_every < 0:
            out.append(f"snapshot_every: must be >= 0, got {self.snapshot_every}")
        return out

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    def stability_guard(self) -> float:
        """Diffusive explicit-step bound 0.5/(nu k_max^2); informational only."""
        kmax = Grid(self.N).dealias_cutoff
        return 0.5 / (max(self.nu, self.kappa) * 3 * kmax**2)


# --- initial conditions -------------------------------------------------------

def _band_noise(grid: Grid, rng: np.random.Generator, components: int) -> np.ndarray:
    """Seeded Gaussian coefficients on 1 <= |k| <= 4, Hermitian-symmetrised."""
    n = grid.N
    shape = (components, n, n, n)
    c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    lo, hi = RANDOM_BAND
    band = (grid.kmag >= lo) & (grid.kmag <= hi) & grid.dealias_mask
    c = np.where(band, c, 0.0)
    neg = grid.negate_index
    c = 0.5 * (c + np.conj(c[:, neg][:, :, neg][:, :, :, neg]))
    return c


def _rms(c: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.abs(c) ** 2)))


def initial_condition(
    kind: str,
    amplitude: float,
    seed: int,
    grid: Grid,
    theta_amplitude: float = 0.0,
    nu: float = 1.0,
    kappa: float = 1.0,
) -> SimState:
    x, y, z = grid.coords()
    a = float(amplitude)
    if kind == "taylor_green":
        u = forward_transform(
            np.stack(
                [
                    a * np.sin(x) * np.cos(y) * np.cos(z),
                    -a * np.cos(x) * np.sin(y) * np.cos(z),
                    np.zeros_like(x),
                ]
            ),
            grid,
        )
        theta = forward_transform(theta_amplitude * np.sin(x) * np.sin(y) * np.sin(z), grid)
    elif kind == "shear":
        u = forward_transform(np.stack([0 * x, a * np.sin(x), 0 * x]), grid)
        theta = zeros(grid)
    elif kind == "buoyant_mode":
        u = zeros(grid, 3)
        theta = forward_transform(a * np.sin(x), grid)
    elif kind == "random_band":
        rng = np.random.default_rng(seed)
        uc = _leray(_band_noise(grid, rng, 3), grid)
        tc = _band_noise(grid, rng, 1)
        # amplitude sets the root-mean-square of each field
        uc = uc * (a / _rms(uc)) if _rms(uc) > 0 else uc
        tc = tc * (theta_amplitude / _rms(tc)) if _rms(tc) > 0 else tc
        u = SpectralField(grid, uc)
        theta = SpectralField(grid, tc)
    else:
        raise ValueError(f"unknown initial condition {kind!r}; choose from {IC_KINDS}")
    mask = grid.dealias_mask
    u = leray_project(SpectralField(grid, np.where(mask, u.coeffs, 0.0)))
    tc = np.where(mask, theta.coeffs, 0.0)
    tc[:, 0, 0, 0] = 0.0
    return SimState(u, SpectralField(grid, tc), 0.0, nu, kappa)


# --- right-hand side ----------------------------------------------------------
# The stepping loop works on rfft half spectra (k3 >= 0); fields are expanded
# to full Hermitian storage once per step.

def _advect_half(u_phys: np.ndarray, f_half: np.ndarray, grid: Grid) -> np.ndarray:
    """(u.grad) f from half-spectrum coefficients of f; dealiased half spectrum."""
    k = grid.k_half
    n = grid.N
    ncomp = f_half.shape[0]
    grads = np.empty((3 * ncomp,) + f_half.shape[1:], dtype=complex)
    for c in range(ncomp):
        for i in range(3):
            np.multiply(1j * k[i], f_half[c], out=grads[3 * c + i])
    g = _irfft_half(grads, n).reshape(ncomp, 3, n, n, n)
    prod = np.einsum("ixyz,cixyz->cxyz", u_phys, g)
    return _rfft_half(prod, n) * grid.dealias_mask_half


def _half(c: np.ndarray, n: int) -> np.ndarray:
    return np.ascontiguousarray(c[..., : n // 2 + 1])


def nonlinear_term(u: SpectralField, f: SpectralField) -> SpectralField:
    """Dealiased pseudo-spectral (u.grad) f for scalar or vector f."""
    if u.components != 3:
        raise ValueError("advecting velocity must have 3 components")
    grid, n = u.grid, u.grid.N
    u_phys = _irfft_half(_half(u.coeffs, n), n)
    return SpectralField(grid, _expand(_advect_half(u_phys, _half(f.coeffs, n), grid), n))


def buoyancy_term(theta: SpectralField) -> SpectralField:
    """P(theta e3)."""
    z = np.zeros_like(theta.coeffs[0])
    return leray_project(SpectralField(theta.grid, np.stack([z, z, theta.coeffs[0]])))


def _rhs(uh: np.ndarray, th: np.ndarray, grid: Grid) -> tuple[np.ndarray, np.ndarray, float]:
    n = grid.N
    up = _irfft_half(uh, n)
    forcing = -_advect_half(up, uh, grid)
    adv_t = _advect_half(up, th, grid)
    forcing[2] += th[0]
    umax = float(np.sqrt(np.max(np.einsum("ixyz,ixyz->xyz", up, up))))
    return _leray(forcing, grid, half=True), -adv_t, umax


# --- exponential integrator ---------------------------------------------------

def _phi12(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """phi1(z) = (e^z - 1)/z and phi2(z) = (e^z - 1 - z)/z^2, stable near 0."""
    z = np.asarray(z, dtype=float)
    p1 = np.empty_like(z)
    p2 = np.empty_like(z)
    small = np.abs(z) < 0.1
    zs = z[small]
    # Taylor series: phi_m(z) = sum_n z^n / (n + m)!
    t1 = np.zeros_like(zs)
    t2 = np.zeros_like(zs)
    term1 = np.ones_like(zs)
    term2 = np.full_like(zs, 0.5)
    for n in range(1, 16):
        t1 += term1
        t2 += term2
        term1 = term1 * zs / (n + 1)
        term2 = term2 * zs / (n + 2)
    p1[small] = t1
    p2[small] = t2
    zl = z[~small]
    p1[~small] = np.expm1(zl) / zl
    p2[~small] = (np.expm1(zl) - zl) / (zl * zl)
    return p1, p2


@lru_cache(maxsize=16)
def _etd_coefficients(n: int, dt: float, diff: float):
    z = -diff * Grid(n).k2_half * dt
    e = np.exp(z)
    p1, p2 = _phi12(z)
    out = (e, dt * p1, dt * p2)
    for a in out:
        a.flags.writeable = False
    return out


def step(state: SimState, dt: float) -> SimState:
    new, _ = _step(state, dt)
    return new


def _step(state: SimState, dt: float) -> tuple[SimState, float]:
    grid = state.grid
    n = grid.N
    eu, c1u, c2u = _etd_coefficients(n, float(dt), float(state.nu))
    et, c1t, c2t = _etd_coefficients(n, float(dt), float(state.kappa))
    u0, t0 = _half(state.u.coeffs, n), _half(state.theta.coeffs, n)

    nu0, nt0, umax = _rhs(u0, t0, grid)
    cfl = umax * dt * n / (2 * np.pi)
    if cfl > 0.5:
        warnings.warn(f"CFL number {cfl:.3f} exceeds 0.5 at t={state.t:.6g}", CFLWarning)

    # predictor: exponential Euler; corrector: second-order ETD update
    ua = eu * u0 + c1u * nu0
    ta = et * t0 + c1t * nt0
    nua, nta, _ = _rhs(ua, ta, grid)
    u1 = ua + c2u * (nua - nu0)
    t1 = ta + c2t * (nta - nt0)

    mask = grid.dealias_mask_half
    u1 = _leray(u1, grid, half=True) * mask
    t1 = t1 * mask
    new = SimState(
        SpectralField(grid, _expand(u1, n)),
        SpectralField(grid, _expand(t1, n)),
        state.t + dt,
        state.nu,
        state.kappa,
    )
    return new, cfl


# --- driver -------------------------------------------------------------------

class BlowUpError(RuntimeError):
    """Non-finite values appeared; carries the trajectory up to the last finite state."""

    def __init__(self, t: float, trajectory: "Trajectory"):
        self.t = t
        self.trajectory = trajectory
        last = trajectory.samples[-1] if trajectory.samples else None
        super().__init__(f"non-finite field values at t={t:.6g}; last sample {last}")


@dataclass
class Trajectory:
    samples: list = field(default_factory=list)
    snapshots: list[tuple[int, SimState]] = field(default_factory=list)
    energy_residuals: list[tuple[float, float]] = field(default_factory=list)
    buoyancy_work: list[float] = field(default_factory=list)
    final_state: Optional[SimState] = None
    max_cfl: float = 0.0


def simulate(
    config: SolverConfig,
    bank=None,
    on_snapshot: Optional[Callable[[int, SimState], None]] = None,
    keep_snapshots: bool = True,
) -> Trajectory:
    """Run the configured trajectory, sampling norms every ``sample_every`` steps.

    The final step is always sampled.  Energy-balance residuals are taken over
    the step ending at each sample time.
    """
    # Deferred import: the monitor depends on this module's SimState.
    from .littlewood_paley import build_bank
    from .monitor import buoyancy_work, energy_residual, sample_norms

    grid = Grid(config.N)
    bank = bank or build_bank(grid)
    state = initial_condition(
        config.ic_kind,
        config.ic_amplitude,
        config.rng_seed,
        grid,
        config.theta_amplitude,
        config.nu,
        config.kappa,
    )
    traj = Trajectory()
    traj.samples.append(sample_norms(state, bank))
    traj.buoyancy_work.append(buoyancy_work(state))
    _maybe_snapshot(0, state, config, traj, on_snapshot, keep_snapshots)

    n_steps = config.n_steps
    for n in range(1, n_steps + 1):
        prev = state
        state, cfl = _step(prev, config.dt)
        traj.max_cfl = max(traj.max_cfl, cfl)
        if not state.is_finite():
            traj.final_state = prev
            log.error("blow-up at t=%.6g", state.t)
            raise BlowUpError(state.t, traj)
        if n % config.sample_every == 0 or n == n_steps:
            sample = sample_norms(state, bank, traj.samples[-1])
            if not all(math.isfinite(v) for v in sample.as_dict().values()):
                # coefficients are finite but the norms overflow: same verdict
                traj.final_state = prev
                log.error("norm overflow at t=%.6g", state.t)
                raise BlowUpError(state.t, traj)
            traj.samples.append(sample)
            traj.buoyancy_work.append(buoyancy_work(state))
            traj.energy_residuals.append((state.t, energy_residual(prev, state)))
        _maybe_snapshot(n, state, config, traj, on_snapshot, keep_snapshots)
    traj.final_state = state
    return traj


def _maybe_snapshot(n, state, config, traj, callback, keep):
    if config.snapshot_every <= 0 or n % config.snapshot_every:
        return
    if keep:
        traj.snapshots.append((n, state))
    if callback is not None:
        callback(n, state)

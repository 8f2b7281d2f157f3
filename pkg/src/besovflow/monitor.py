"""Along-trajectory diagnostics for the Besov regularity criterion.

Tracks the squared B^{-1}_{inf,inf} norm of grad u and its running time
integral, the bootstrap quantity F(t) (running max of the H^2 energy), the
discrete energy balance, and the implied constants of the H^1 Gronwall step.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from typing import Optional, Sequence

import numpy as np

from .littlewood_paley import LPBank, besov0_inf, bmo_oscillation_norm, grad_besov_minus1
from .solver import SimState
from .spectral import grad_l2_norm, inner_product


@dataclass(frozen=True)
class NormSample:
    t: float
    l2_u: float
    l2_theta: float
    h1_u: float
    h1_theta: float
    h2_u: float
    h2_theta: float
    besov_grad_u: float
    besov0_u: float
    bmo_u: float
    criterion_cum: float
    criterion0_cum: float

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_dict(self) -> dict:
        return asdict(self)

    @property
    def h2_energy(self) -> float:
        """||u||_{H^2}^2 + ||theta||_{H^2}^2 with weight (1 + |k|^2)^2."""
        return (
            self.l2_u**2 + 2 * self.h1_u**2 + self.h2_u**2
            + self.l2_theta**2 + 2 * self.h1_theta**2 + self.h2_theta**2
        )


def sample_norms(
    state: SimState, bank: LPBank, prev: Optional[NormSample] = None
) -> NormSample:
    u, th = state.u, state.theta
    b = grad_besov_minus1(u, bank)
    b0 = besov0_inf(u, bank)
    if prev is None:
        cum = cum0 = 0.0
    else:
        dt = state.t - prev.t
        cum = prev.criterion_cum + 0.5 * dt * (prev.besov_grad_u**2 + b * b)
        cum0 = prev.criterion0_cum + 0.5 * dt * (prev.besov0_u**2 + b0 * b0)
    return NormSample(
        t=float(state.t),
        l2_u=grad_l2_norm(u, 0),
        l2_theta=grad_l2_norm(th, 0),
        h1_u=grad_l2_norm(u, 1),
        h1_theta=grad_l2_norm(th, 1),
        h2_u=grad_l2_norm(u, 2),
        h2_theta=grad_l2_norm(th, 2),
        besov_grad_u=b,
        besov0_u=b0,
        bmo_u=bmo_oscillation_norm(u),
        criterion_cum=cum,
        criterion0_cum=cum0,
    )


def _times(samples: Sequence[NormSample]) -> np.ndarray:
    return np.array([s.t for s in samples])


def criterion_tail(samples: Sequence[NormSample], T0: float) -> float:
    """Trapezoid integral of besov_grad_u^2 over [T0, T_last]."""
    samples = _as_samples(samples)
    t = _times(samples)
    if not samples or T0 < t[0] or T0 > t[-1]:
        raise ValueError(f"T0={T0} outside sampled range")
    total = samples[-1].criterion_cum
    i = int(np.searchsorted(t, T0, side="right")) - 1
    if t[i] == T0:
        return max(total - samples[i].criterion_cum, 0.0)
    vals = np.array([s.besov_grad_u**2 for s in samples])
    v0 = np.interp(T0, t, vals)
    head = samples[i].criterion_cum + 0.5 * (T0 - t[i]) * (vals[i] + v0)
    return max(total - head, 0.0)


def f_monitor(samples: Sequence[NormSample], T0: float, t: float) -> float:
    """max over sampled tau in [T0, t] of ||u||_{H^2}^2 + ||theta||_{H^2}^2."""
    window = [s.h2_energy for s in _as_samples(samples) if T0 <= s.t <= t]
    if not window:
        raise ValueError(f"no samples in window [{T0}, {t}]")
    return max(window)


def buoyancy_work(state: SimState) -> float:
    """<theta, u_3>, the rate at which buoyancy feeds kinetic energy."""
    return inner_product(state.theta, state.u.component(2))


def energy_terms(state: SimState) -> tuple[float, float]:
    """(kinetic + thermal energy, dissipation - buoyancy work) at one state."""
    e = 0.5 * (grad_l2_norm(state.u, 0) ** 2 + grad_l2_norm(state.theta, 0) ** 2)
    diss = state.nu * grad_l2_norm(state.u, 1) ** 2 + state.kappa * grad_l2_norm(state.theta, 1) ** 2
    return e, diss - buoyancy_work(state)


def energy_residual(s_prev: SimState, s_next: SimState) -> float:
    """|dE/dt + nu|grad u|^2 + kappa|grad theta|^2 - <theta, u_3>| across one step.

    The difference quotient sits at the step midpoint; the rate terms are
    averaged over both endpoints.
    """
    dt = s_next.t - s_prev.t
    e0, r0 = energy_terms(s_prev)
    e1, r1 = energy_terms(s_next)
    if dt == 0:
        return 0.0 if e0 == e1 == 0 else abs(r0)
    return abs((e1 - e0) / dt + 0.5 * (r0 + r1))


def gronwall_report(
    samples: Sequence[NormSample], T0: Optional[float] = None
) -> list[Optional[float]]:
    """Smallest C(t) >= 0 with dY/dt <= C (1 + bmo_u^2) Y, Y = h1_u^2 + h1_theta^2.

    The derivative is a finite difference over the sample times (second order
    in the interior).  Entries where Y vanishes are None.
    """
    samples = [s for s in _as_samples(samples) if T0 is None or s.t >= T0]
    if len(samples) < 2:
        return [None] * len(samples)
    t = _times(samples)
    y = np.array([s.h1_u**2 + s.h1_theta**2 for s in samples])
    dy = np.gradient(y, t)
    out: list[Optional[float]] = []
    for s, yi, di in zip(samples, y, dy):
        denom = (1.0 + s.bmo_u**2) * yi
        if denom == 0 or not math.isfinite(di):
            out.append(None)
        else:
            out.append(max(di, 0.0) / denom)
    return out


@dataclass
class MonitorReport:
    samples: list[NormSample]
    T0: float
    f_series: list[float] = field(default_factory=list)
    energy_residual: list[tuple[float, float]] = field(default_factory=list)
    gronwall_implied_C: list[Optional[float]] = field(default_factory=list)
    unforced_energy_gap: list[float] = field(default_factory=list)
    buoyancy_work_cum: list[float] = field(default_factory=list)

    def tail(self, T0: float) -> float:
        return criterion_tail(self.samples, T0)

    def to_dict(self) -> dict:
        return {
            "T0": self.T0,
            "t": [s.t for s in self.samples],
            "criterion_total": self.samples[-1].criterion_cum if self.samples else 0.0,
            "criterion0_total": self.samples[-1].criterion0_cum if self.samples else 0.0,
            "tail": [self.tail(s.t) for s in self.samples if s.t >= self.T0],
            "f_series": self.f_series,
            "energy_residual": [list(r) for r in self.energy_residual],
            "gronwall_implied_C": self.gronwall_implied_C,
            "unforced_energy_gap": self.unforced_energy_gap,
            "buoyancy_work_cum": self.buoyancy_work_cum,
        }


def build_report(
    samples: Sequence[NormSample],
    energy_residuals: Sequence[tuple[float, float]] = (),
    T0: Optional[float] = None,
    nu: float = 1.0,
    kappa: float = 1.0,
    work_rate: Optional[Sequence[float]] = None,
) -> MonitorReport:
    """Assemble F(t), tails, Gronwall constants and the energy bookkeeping.

    ``unforced_energy_gap`` is ``E(t) + int (nu|grad u|^2 + kappa|grad theta|^2) - E(0)``,
    the energy bound with the buoyancy work left out; that work can push it
    above zero. ``buoyancy_work_cum`` is the
    trapezoid integral of <theta, u_3> when per-sample values are supplied.
    """
    samples = list(samples)
    if not samples:
        return MonitorReport([], 0.0 if T0 is None else T0)
    T0 = samples[0].t if T0 is None else T0
    fs, running = [], -math.inf
    for s in samples:
        if s.t >= T0:
            running = max(running, s.h2_energy)
            fs.append(running)

    gap, diss_cum = [], 0.0
    e0 = 0.5 * (samples[0].l2_u**2 + samples[0].l2_theta**2)
    for i, s in enumerate(samples):
        if i:
            p = samples[i - 1]
            d0 = nu * p.h1_u**2 + kappa * p.h1_theta**2
            d1 = nu * s.h1_u**2 + kappa * s.h1_theta**2
            diss_cum += 0.5 * (s.t - p.t) * (d0 + d1)
        gap.append(0.5 * (s.l2_u**2 + s.l2_theta**2) + diss_cum - e0)

    work_cum: list[float] = []
    if work_rate is not None:
        acc = 0.0
        for i, s in enumerate(samples):
            if i:
                acc += 0.5 * (s.t - samples[i - 1].t) * (work_rate[i] + work_rate[i - 1])
            work_cum.append(acc)

    return MonitorReport(
        samples=samples,
        T0=T0,
        f_series=fs,
        energy_residual=list(energy_residuals),
        gronwall_implied_C=gronwall_report(samples, T0),
        unforced_energy_gap=gap,
        buoyancy_work_cum=work_cum,
    )


def _as_samples(obj) -> list[NormSample]:
    if isinstance(obj, MonitorReport):
        return obj.samples
    return list(obj)

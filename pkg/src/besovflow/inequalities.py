"""Empirical ratios for the harmonic-analysis inequalities behind the criterion.

Each check returns the left-hand side, the constant-free right-hand side and
their ratio.  Sup ratios over a seeded corpus stand in for the unknown
constants.  Entries whose right-hand side vanishes are skipped, never folded
into a maximum.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

from .corpus import CorpusSpec, corpus_digest, members
from .littlewood_paley import (
    LPBank,
    besov0_inf,
    bmo_oscillation_norm,
    bony_remainder,
    build_bank,
    dyadic_block,
    grad_besov_minus1,
    paraproduct,
    product,
    triebel_proxy_norm,
)
from .spectral import (
    Grid,
    SpectralField,
    derivative,
    divergence_defect,
    gradient,
    grad_l2_norm,
    inner_product,
    laplacian,
    lebesgue_norm,
    lebesgue_norm_physical,
    sobolev_norm,
    to_physical,
    without_mean,
)


@dataclass(frozen=True)
class RatioEntry:
    lhs: float
    rhs_core: float
    family: str = ""
    member: int = -1
    label: str = ""

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs_core


@dataclass
class RatioReport:
    inequality: str
    grid: int
    entries: list[RatioEntry] = field(default_factory=list)
    skipped: int = 0
    failures: list[str] = field(default_factory=list)

    def add(self, entry: Optional[RatioEntry]) -> None:
        if entry is None:
            self.skipped += 1
        else:
            self.entries.append(entry)

    @property
    def max_ratio(self) -> Optional[float]:
        return max((e.ratio for e in self.entries), default=None)

    def family_max(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for e in self.entries:
            out[e.family] = max(out.get(e.family, -math.inf), e.ratio)
        return dict(sorted(out.items()))


def _entry(lhs: float, rhs: float, label: str = "") -> Optional[RatioEntry]:
    if rhs == 0.0:
        return None
    return RatioEntry(float(lhs), float(rhs), label=label)


def _multi_indices(order: int):
    """Multisets of axes of size ``order`` with their multinomial multiplicity."""
    for combo in itertools.combinations_with_replacement(range(3), order):
        alpha = [combo.count(i) for i in range(3)]
        mult = math.factorial(order)
        for a in alpha:
            mult //= math.factorial(a)
        yield alpha, mult


def derivative_tensor_norm(f: SpectralField, order: int, p: float) -> float:
    """||grad^order f||_{L^p} with the Euclidean norm over every index tuple."""
    if order == 0:
        return lebesgue_norm(f, p)
    if p == 2:
        return grad_l2_norm(f, order)
    acc = np.zeros((f.grid.N,) * 3)
    for alpha, mult in _multi_indices(order):
        d = to_physical(derivative(f, alpha))
        acc += mult * np.sum(d * d, axis=0)
    return lebesgue_norm_physical(np.sqrt(acc)[None], p)


def _sup_derivative(f: SpectralField, order: int, p: float) -> float:
    return max(lebesgue_norm(derivative(f, a), p) for a, _ in _multi_indices(order))


def _inv(p: float) -> float:
    return 0.0 if np.isinf(p) else 1.0 / p


def bernstein_check(
    f: SpectralField, j: int, k_order: int, p: float, q: float, bank: LPBank
) -> dict[str, Optional[RatioEntry]]:
    """Ratios for the two Bernstein bounds on Delta_j f.

    ``"i"``: sup_alpha ||d^alpha D_j f||_q / (2^{jk + 3j(1/p - 1/q)} ||D_j f||_p).
    ``"ii"``: ||D_j f||_p / (2^{-jk} sup_alpha ||d^alpha D_j f||_p).
    Both entries are None when the block vanishes.
    """
    if p > q:
        raise ValueError(f"Bernstein bounds need p <= q, got p={p}, q={q}")
    block = dyadic_block(f, j, bank)
    if not np.any(block.coeffs):
        return {"i": None, "ii": None}
    label = f"j={j}"
    lp = lebesgue_norm(block, p)
    sup_q = _sup_derivative(block, k_order, q)
    sup_p = sup_q if p == q else _sup_derivative(block, k_order, p)
    scale = 2.0 ** (j * k_order + 3 * j * (_inv(p) - _inv(q)))
    return {
        "i": _entry(sup_q, scale * lp, label),
        "ii": _entry(lp, 2.0 ** (-j * k_order) * sup_p, label),
    }


def ln_plus(x: float) -> float:
    return math.log(x) if x > math.e else 1.0


def log_sobolev_split(f_hs: float, alpha: float) -> int:
    """Smallest integer N >= 1 with 2^{-alpha N} ||f||_{H^s} <= 1."""
    if f_hs <= 1.0:
        return 1
    n = max(1, math.ceil(math.log2(f_hs) / alpha))
    while 2.0 ** (-alpha * n) * f_hs > 1.0:
        n += 1
    return n


def log_sobolev_check(
    f: SpectralField, s: float, bank: LPBank, n_split: Optional[int] = None
) -> dict[str, Optional[RatioEntry]]:
    """L^inf control by the Besov criterion norm with a logarithmic H^s correction.

    ``"a"`` is the split form ||f||_inf / (2^{-alpha N}||f||_{H^s} + N ||grad f||_{B^-1}),
    at ``n_split`` if given, else at the smallest N with 2^{-alpha N}||f||_{H^s} <= 1.
    ``"b"`` is the closed form ||f||_inf / (1 + ||grad f||_{B^-1} sqrt(ln+ ||f||_{H^s})).
    """
    if s <= 1.5:
        raise ValueError(f"log-Sobolev bound needs s > 3/2, got s={s}")
    f = without_mean(f)
    alpha = min(s - 1.5, 1.5)
    hs = sobolev_norm(f, s)
    b = grad_besov_minus1(f, bank)
    linf = lebesgue_norm(f, np.inf)
    n = log_sobolev_split(hs, alpha) if n_split is None else n_split
    if n < 1:
        raise ValueError(f"split index must be >= 1, got {n}")
    return {
        "a": _entry(linf, 2.0 ** (-alpha * n) * hs + n * b, f"N={n}"),
        "b": _entry(linf, 1.0 + b * math.sqrt(ln_plus(hs))),
    }


def machihara_ozawa_check(u: SpectralField, bank: LPBank) -> Optional[RatioEntry]:
    """||grad u||_{L^4}^2 / (||u||_{B^0_{inf,inf}} ||Lap u||_{L^2})."""
    u = without_mean(u)
    lhs = derivative_tensor_norm(u, 1, 4.0) ** 2
    return _entry(lhs, besov0_inf(u, bank) * grad_l2_norm(u, 2))


def gn_quarter_check(f: SpectralField) -> Optional[RatioEntry]:
    """||Lap f||_{L^4} / (||grad f||_2^{1/8} ||grad^3 f||_2^{7/8})."""
    f = without_mean(f)
    lhs = lebesgue_norm(laplacian(f), 4.0)
    return _entry(lhs, grad_l2_norm(f, 1) ** 0.125 * grad_l2_norm(f, 3) ** 0.875)


def interpolation_exponent(j: int, m: int, k: int, theta: float, q: float, r: float) -> float:
    """p from the scaling balance of ||grad^j f||_p <= ||grad^m f||_q^{1-theta} ||grad^k f||_r^theta.

    Returns 1/p.  Exact rational arithmetic is used for finite rational
    inputs, so textbook cases land on p exactly.
    """
    def frac(x):
        return Fraction(0) if np.isinf(x) else Fraction(1) / Fraction(x).limit_denominator(10**6)

    th = Fraction(theta).limit_denominator(10**6)
    inv_p = Fraction(j, 3) + th * (frac(r) - Fraction(k, 3)) + (1 - th) * (frac(q) - Fraction(m, 3))
    return float(inv_p)


def interpolation_check(
    f: SpectralField, j: int, m: int, k: int, theta: float, q: float, r: float
) -> Optional[RatioEntry]:
    if not (m <= j <= k):
        raise ValueError(f"need m <= j <= k, got m={m}, j={j}, k={k}")
    if not (0.0 <= theta <= 1.0):
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    inv_p = interpolation_exponent(j, m, k, theta, q, r)
    if not (0.0 <= inv_p <= 1.0):
        p_txt = "inf" if inv_p == 0 else f"{1.0 / inv_p:.6g}"
        raise ValueError(
            f"exponents (j={j}, m={m}, k={k}, theta={theta}, q={q}, r={r}) give "
            f"1/p={inv_p:.6g} (p={p_txt}), outside [1, inf]"
        )
    p = np.inf if inv_p == 0 else 1.0 / inv_p
    f = without_mean(f)
    lhs = derivative_tensor_norm(f, j, p)
    rhs = derivative_tensor_norm(f, m, q) ** (1.0 - theta) * derivative_tensor_norm(f, k, r) ** theta
    return _entry(lhs, rhs, f"p={p:g}")


TRILINEAR_ESTIMATORS = ("dyadic", "square_function")


def trilinear_check(
    f: SpectralField,
    g: SpectralField,
    h: SpectralField,
    bank: LPBank,
    estimator: str = "dyadic",
) -> Optional[RatioEntry]:
    """|<f, grad(gh)>| / (bmo(f) (||grad g|| ||h|| + ||g|| ||grad h||)).

    ``estimator`` picks the BMO surrogate: dyadic-cube oscillation or the sup
    of the Littlewood-Paley square function.  The label records whether f
    is divergence-free.
    """
    if f.components != 3:
        raise ValueError("trilinear_check needs a 3-component f")
    if estimator not in TRILINEAR_ESTIMATORS:
        raise ValueError(f"estimator must be one of {TRILINEAR_ESTIMATORS}")
    f, g, h = without_mean(f), without_mean(g), without_mean(h)
    num = abs(inner_product(f, gradient(product(g, h))))
    osc = bmo_oscillation_norm(f) if estimator == "dyadic" else triebel_proxy_norm(f, bank, np.inf)
    rhs = osc * (grad_l2_norm(g, 1) * grad_l2_norm(h, 0) + grad_l2_norm(g, 0) * grad_l2_norm(h, 1))
    label = "div_free" if divergence_defect(f) <= 1e-12 else "compressible"
    return _entry(num, rhs, label)


@dataclass(frozen=True)
class BonyResidual:
    residual: float
    relative: float
    band_limit: float
    within_band: bool


def bony_identity_check(f: SpectralField, g: SpectralField, bank: LPBank) -> BonyResidual:
    """Residual of fg = T_f g + T_g f + R(f, g) modulo constants.

    Both factors are reduced to their mean-free representatives, the
    classes the homogeneous blocks act on; the dealiased product is the
    reference.
    """
    f, g = without_mean(f), without_mean(g)
    exact = without_mean(product(f, g))
    split = paraproduct(f, g, bank) + paraproduct(g, f, bank) + bony_remainder(f, g, bank)
    diff = exact - without_mean(split)
    res = lebesgue_norm(diff, 2)
    ref = lebesgue_norm(exact, 2)
    top = 0.0
    for fld in (f, g):
        active = np.any(np.abs(fld.coeffs) > 0, axis=0)
        if active.any():
            top = max(top, float(np.max(np.abs(np.stack(np.broadcast_arrays(*fld.grid.k)))[:, active])))
    return BonyResidual(res, res / ref if ref > 0 else res, top, top <= f.grid.N / 6)


# ---- corpus sweep -----------------------------------------------------------

BERNSTEIN_I = ((2.0, 2.0), (np.inf, np.inf), (2.0, np.inf))
BERNSTEIN_II = (2.0, np.inf)
INTERPOLATION_CASES = {
    "interpolation_a1": (2, 1, 3, 0.5, 2.0, 2.0),
    "interpolation_gn": (2, 1, 3, 0.875, 2.0, 2.0),
}
LOG_SOBOLEV_S = 2.0


def _pname(p: float) -> str:
    return "inf" if np.isinf(p) else f"{p:g}"


INEQUALITIES = tuple(
    [f"bernstein_i_p{_pname(p)}_q{_pname(q)}" for p, q in BERNSTEIN_I]
    + [f"bernstein_ii_p{_pname(p)}" for p in BERNSTEIN_II]
    + ["log_sobolev_a", "log_sobolev_b", "machihara_ozawa", "gn_quarter"]
    + list(INTERPOLATION_CASES)
    + ["trilinear_bmo", "trilinear_sqfn"]
    + ["besov_grad_over_besov0", "besov0_over_besov_grad"]
    + ["bmo_over_linf", "besov0_over_bmo", "besov0_over_sqfn"]
)


def member_entries(m, bank: LPBank) -> Iterable[tuple[str, Optional[RatioEntry]]]:
    """(inequality, entry) pairs for one corpus member on one grid; None marks a skip."""
    f, u = m.f, m.u
    for j in bank.j_range:
        for p, q in BERNSTEIN_I:
            yield f"bernstein_i_p{_pname(p)}_q{_pname(q)}", bernstein_check(f, j, 1, p, q, bank)["i"]
        for p in BERNSTEIN_II:
            yield f"bernstein_ii_p{_pname(p)}", bernstein_check(f, j, 1, p, p, bank)["ii"]
    ls = log_sobolev_check(f, LOG_SOBOLEV_S, bank)
    yield "log_sobolev_a", ls["a"]
    yield "log_sobolev_b", ls["b"]
    yield "machihara_ozawa", machihara_ozawa_check(u, bank)
    yield "gn_quarter", gn_quarter_check(f)
    for name, args in INTERPOLATION_CASES.items():
        yield name, interpolation_check(f, *args)
    # a solenoidal f makes the trilinear form vanish identically, so use v
    yield "trilinear_bmo", trilinear_check(m.v, m.g, m.h, bank, "dyadic")
    yield "trilinear_sqfn", trilinear_check(m.v, m.g, m.h, bank, "square_function")
    b0 = besov0_inf(f, bank)
    bg = grad_besov_minus1(f, bank)
    bmo = bmo_oscillation_norm(f)
    yield "besov_grad_over_besov0", _entry(bg, b0)
    yield "besov0_over_besov_grad", _entry(b0, bg)
    yield "bmo_over_linf", _entry(bmo, lebesgue_norm(f, np.inf))
    yield "besov0_over_bmo", _entry(b0, bmo)
    yield "besov0_over_sqfn", _entry(b0, triebel_proxy_norm(f, bank, np.inf))


@dataclass
class CorpusReport:
    spec: CorpusSpec
    digest: str
    reports: dict[tuple[str, int], RatioReport] = field(default_factory=dict)
    bony: list[tuple[str, int, int, BonyResidual]] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)

    def max_ratios(self) -> dict[tuple[str, int], Optional[float]]:
        return {key: r.max_ratio for key, r in sorted(self.reports.items())}

    def report(self, inequality: str, grid: int) -> RatioReport:
        return self.reports[(inequality, grid)]


def run_corpus(spec: CorpusSpec) -> CorpusReport:
    """Every check over every member on every grid; errors are collected per entry."""
    out = CorpusReport(spec, corpus_digest(spec))
    if spec.count == 0 or not spec.families or not spec.grids:
        return out
    for n in spec.grids:
        bank = build_bank(Grid(n))
        for name in INEQUALITIES:
            out.reports[(name, n)] = RatioReport(name, n)
        for m in members(spec, n):
            tag = f"{m.family}[{m.index}]@N={n}"
            try:
                for name, entry in member_entries(m, bank):
                    if entry is not None:
                        entry = RatioEntry(entry.lhs, entry.rhs_core, m.family, m.index, entry.label)
                        if not (math.isfinite(entry.ratio) and entry.ratio >= 0):
                            out.failures.append(f"{name} {tag}: non-finite ratio {entry.ratio}")
                            continue
                    out.reports[(name, n)].add(entry)
                out.bony.append((m.family, m.index, n, bony_identity_check(m.f, m.g, bank)))
            except Exception as exc:  # keep sweeping, report at the end
                out.failures.append(f"{tag}: {type(exc).__name__}: {exc}")
    for r in out.reports.values():
        r.failures = [msg for msg in out.failures if msg.startswith(r.inequality + " ")]
    return out

"""Dyadic frequency decomposition, Besov / BMO norms and paraproducts.

The multiplier bank realises a dyadic partition of unity on the lattice of
retained wavevectors: phi(w) = chi(|w|/2) - chi(|w|), with chi a smooth
cutoff equal to 1 below 3/4 and 0 above 4/3.  Every homogeneous quantity
here works modulo constants: the k = 0 mode never enters a block.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .spectral import (
    BOX_VOLUME,
    Grid,
    SpectralField,
    from_physical_product,
    gradient,
    lebesgue_norm_physical,
    pointwise_magnitude,
    to_physical,
    zeros,
)

CHI_INNER = 3.0 / 4.0
CHI_OUTER = 4.0 / 3.0
CHI_PROFILE = "exp-bridge: chi = exp(1 - 1/(1 - t^2)), t = (r - 3/4)/(4/3 - 3/4)"


def chi(r: np.ndarray) -> np.ndarray:
    """Radial cutoff: 1 on [0, 3/4], 0 on [4/3, inf), exp bridge between."""
    r = np.asarray(r, dtype=float)
    out = np.where(r <= CHI_INNER, 1.0, 0.0)
    mid = (r > CHI_INNER) & (r < CHI_OUTER)
    t = (r[mid] - CHI_INNER) / (CHI_OUTER - CHI_INNER)
    out[mid] = np.exp(1.0 - 1.0 / (1.0 - t * t))
    return out


def phi(w: np.ndarray) -> np.ndarray:
    """Annulus multiplier supported in 3/4 <= |w| <= 8/3."""
    w = np.asarray(w, dtype=float)
    return chi(w / 2.0) - chi(w)


def shell_range(grid: Grid) -> tuple[int, int]:
    kmax = math.sqrt(3.0) * grid.N / 2.0
    return -1, math.ceil(math.log2(kmax / CHI_INNER))


@dataclass(frozen=True, eq=False)
class LPBank:
    grid: Grid
    j_min: int
    j_max: int
    phi: np.ndarray  # (j_max - j_min + 1, N, N, N)
    chi_profile: str = CHI_PROFILE

    @property
    def j_range(self) -> range:
        return range(self.j_min, self.j_max + 1)

    def multiplier(self, j: int) -> np.ndarray | None:
        if j < self.j_min or j > self.j_max:
            return None
        return self.phi[j - self.j_min]

    def low_pass_multiplier(self, l: int) -> np.ndarray:
        hi = min(l - 1, self.j_max)
        if hi < self.j_min:
            return np.zeros_like(self.phi[0])
        return np.sum(self.phi[: hi - self.j_min + 1], axis=0)


def build_bank(grid: Grid) -> LPBank:
    j_min, j_max = shell_range(grid)
    kmag = grid.kmag
    bank = np.stack([phi(kmag * 2.0**-j) for j in range(j_min, j_max + 1)])
    bank.flags.writeable = False
    return LPBank(grid, j_min, j_max, bank)


@dataclass(frozen=True)
class BesovSpec:
    s: float
    p: float
    q: float

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise ValueError(f"Besov exponents need p, q >= 1, got p={self.p}, q={self.q}")


@dataclass
class DyadicDecomposition:
    blocks: list[tuple[int, SpectralField]]
    source_checksum: str = ""

    def reconstruct(self) -> SpectralField:
        grid = self.blocks[0][1].grid
        total = np.zeros_like(self.blocks[0][1].coeffs)
        for _, b in self.blocks:
            total = total + b.coeffs
        return SpectralField(grid, total)


def _check_bank(f: SpectralField, bank: LPBank) -> None:
    if f.grid != bank.grid:
        raise ValueError(f"field grid N={f.grid.N} does not match bank N={bank.grid.N}")


def dyadic_block(f: SpectralField, j: int, bank: LPBank) -> SpectralField:
    _check_bank(f, bank)
    m = bank.multiplier(j)
    if m is None:
        return zeros(f.grid, f.components)
    # phi vanishes at k = 0, so the mean is dropped automatically.
    return SpectralField(f.grid, f.coeffs * m)


def low_pass(f: SpectralField, l: int, bank: LPBank) -> SpectralField:
    _check_bank(f, bank)
    return SpectralField(f.grid, f.coeffs * bank.low_pass_multiplier(l))


def decompose(f: SpectralField, bank: LPBank) -> DyadicDecomposition:
    digest = hashlib.sha256(np.ascontiguousarray(f.coeffs).tobytes()).hexdigest()
    return DyadicDecomposition(
        [(j, dyadic_block(f, j, bank)) for j in bank.j_range], digest
    )


def shell_energies(f: SpectralField, bank: LPBank) -> list[tuple[int, float]]:
    """(j, ||Delta_j f||_{L^2}^2) per shell, by Parseval."""
    _check_bank(f, bank)
    power = np.sum(np.abs(f.coeffs) ** 2, axis=0)
    return [
        (j, float(BOX_VOLUME * np.sum(bank.multiplier(j) ** 2 * power)))
        for j in bank.j_range
    ]


def shell_norms(f: SpectralField, p: float, bank: LPBank) -> np.ndarray:
    """||Delta_j f||_{L^p} for every j in the bank range, in order."""
    _check_bank(f, bank)
    out = np.empty(len(bank.j_range))
    for idx, j in enumerate(bank.j_range):
        block = to_physical(SpectralField(f.grid, f.coeffs * bank.multiplier(j)))
        out[idx] = lebesgue_norm_physical(block, p)
    return out


def besov_norm(f: SpectralField, spec: BesovSpec, bank: LPBank) -> float:
    norms = shell_norms(f, spec.p, bank)
    weights = 2.0 ** (spec.s * np.arange(bank.j_min, bank.j_max + 1))
    terms = weights * norms
    if np.isinf(spec.q):
        return float(np.max(terms))
    return float(np.sum(terms**spec.q) ** (1.0 / spec.q))


def grad_besov_minus1(u: SpectralField, bank: LPBank) -> float:
    """||grad u||_{B^{-1}_{inf,inf}} with pointwise Euclidean magnitude."""
    return besov_norm(gradient(u), BesovSpec(-1.0, np.inf, np.inf), bank)


def besov0_inf(u: SpectralField, bank: LPBank) -> float:
    return besov_norm(u, BesovSpec(0.0, np.inf, np.inf), bank)


def square_function(f: SpectralField, bank: LPBank) -> np.ndarray:
    """Pointwise (sum_j |Delta_j f|^2)^(1/2) on the grid."""
    _check_bank(f, bank)
    acc = np.zeros((f.grid.N,) * 3)
    for j in bank.j_range:
        block = to_physical(SpectralField(f.grid, f.coeffs * bank.multiplier(j)))
        acc += np.sum(block * block, axis=0)
    return np.sqrt(acc)


def triebel_proxy_norm(f: SpectralField, bank: LPBank, p: float) -> float:
    """L^p norm of the square function (the F^0_{p,2} quantity, p in {1, inf})."""
    if p not in (1, np.inf):
        raise ValueError(f"square-function proxy supports p = 1 or inf only, got {p}")
    return lebesgue_norm_physical(square_function(f, bank)[None], p)


def _dyadic_levels(n: int) -> list[int]:
    """Cube side lengths in grid points: n, n/2, ... while the halving is exact."""
    sides = [n]
    while sides[-1] % 2 == 0:
        sides.append(sides[-1] // 2)
    return sides


def bmo_oscillation_physical(values: np.ndarray) -> float:
    c, n = values.shape[0], values.shape[1]
    best = 0.0
    for side in _dyadic_levels(n):
        m = n // side
        blocks = values.reshape(c, m, side, m, side, m, side)
        means = blocks.mean(axis=(2, 4, 6), keepdims=True)
        dev = pointwise_magnitude((blocks - means).reshape(c, -1)).reshape(
            m, side, m, side, m, side
        )
        best = max(best, float(dev.mean(axis=(1, 3, 5)).max()))
    return best


def bmo_oscillation_norm(f: SpectralField) -> float:
    """Sup over aligned dyadic subcubes of the mean deviation from the cube mean."""
    return bmo_oscillation_physical(to_physical(f))


def _scalar(f: SpectralField, name: str) -> None:
    if f.components != 1:
        raise ValueError(f"{name} must be a scalar field, got {f.components} components")


def paraproduct(f: SpectralField, g: SpectralField, bank: LPBank) -> SpectralField:
    """T_f g = sum_j S_{j-1} f * Delta_j g, each product dealiased."""
    _scalar(f, "f")
    _scalar(g, "g")
    _check_bank(f, bank)
    _check_bank(g, bank)
    acc = np.zeros((f.grid.N,) * 3)
    for j in bank.j_range:
        low = bank.low_pass_multiplier(j - 1)
        if not np.any(low):
            continue
        acc += (
            to_physical(SpectralField(f.grid, f.coeffs * low))[0]
            * to_physical(SpectralField(g.grid, g.coeffs * bank.multiplier(j)))[0]
        )
    # Dealiasing is linear, so one transform of the summed products suffices.
    return from_physical_product(acc, f.grid)


def bony_remainder(f: SpectralField, g: SpectralField, bank: LPBank) -> SpectralField:
    """R(f, g) = sum_{|j-k| <= 1} Delta_j f * Delta_k g, dealiased."""
    _scalar(f, "f")
    _scalar(g, "g")
    _check_bank(f, bank)
    _check_bank(g, bank)
    fb = {j: to_physical(dyadic_block(f, j, bank))[0] for j in bank.j_range}
    gb = {j: to_physical(dyadic_block(g, j, bank))[0] for j in bank.j_range}
    acc = np.zeros((f.grid.N,) * 3)
    for j in bank.j_range:
        near = gb[j].copy()
        if j - 1 in gb:
            near += gb[j - 1]
        if j + 1 in gb:
            near += gb[j + 1]
        acc += fb[j] * near
    return from_physical_product(acc, f.grid)


def product(f: SpectralField, g: SpectralField) -> SpectralField:
    """Dealiased pointwise product of two scalar fields."""
    _scalar(f, "f")
    _scalar(g, "g")
    return from_physical_product(to_physical(f)[0] * to_physical(g)[0], f.grid)

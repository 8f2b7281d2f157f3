"""Seeded test-field corpus for the inequality lab.

Every member is a trigonometric polynomial with |k_i| <= k_max defined in
coefficient space independently of the grid, so the same member sampled on
N = 32 and N = 64 is the same function.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .spectral import Grid, SpectralField, _leray

FAMILIES = ("single_mode", "dyadic_shell", "gaussian_bump", "random_band", "taylor_green_slice")


@dataclass(frozen=True)
class CorpusSpec:
    grids: tuple[int, ...] = (32,)
    families: tuple[str, ...] = FAMILIES
    count: int = 4
    rng_seed: int = 0
    k_max: int = 5

    def __post_init__(self):
        unknown = set(self.families) - set(FAMILIES)
        if unknown:
            raise ValueError(f"unknown corpus families {sorted(unknown)}; choose from {FAMILIES}")
        if self.count < 0:
            raise ValueError("count must be >= 0")
        for n in self.grids:
            if n // 3 < self.k_max:
                raise ValueError(f"grid N={n} cannot resolve k_max={self.k_max} after dealiasing")


@dataclass(frozen=True, eq=False)
class CorpusMember:
    family: str
    index: int
    f: SpectralField
    g: SpectralField
    h: SpectralField
    u: SpectralField  # divergence-free
    v: SpectralField  # generic vector field, not projected


class _Lattice:
    """Integer wavevectors with |k_i| <= K, embedded into an N-grid spectrum."""

    def __init__(self, K: int):
        self.K = K
        r = np.arange(-K, K + 1)
        self.k = np.stack(np.meshgrid(r, r, r, indexing="ij"))  # (3, M, M, M)
        self.kmag = np.sqrt(np.sum(self.k**2, axis=0))

    def symmetrise(self, c: np.ndarray) -> np.ndarray:
        """Make coefficients on the small cube Hermitian: c(-k) = conj c(k)."""
        return 0.5 * (c + np.conj(c[..., ::-1, ::-1, ::-1]))

    def embed(self, c: np.ndarray, grid: Grid) -> SpectralField:
        n = grid.N
        idx = np.arange(-self.K, self.K + 1) % n
        full = np.zeros((c.shape[0], n, n, n), dtype=complex)
        full[np.ix_(range(c.shape[0]), idx, idx, idx)] = c
        full[:, 0, 0, 0] = 0.0
        return SpectralField(grid, full)


def _amplitude(rng: np.random.Generator) -> float:
    return float(np.exp(rng.uniform(np.log(0.5), np.log(2.0))))


def _unit_perp(k: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    while True:
        e = np.cross(k, rng.standard_normal(3))
        if np.linalg.norm(e) > 1e-6:
            return e / np.linalg.norm(e)


def _single_mode(lat, rng, vector, solenoidal=True):
    K = lat.K
    while True:
        k0 = rng.integers(-K, K + 1, size=3)
        if np.any(k0):
            break
    a = _amplitude(rng)
    phase = rng.uniform(0, 2 * np.pi)
    ncomp = 3 if vector else 1
    c = np.zeros((ncomp,) + lat.kmag.shape, dtype=complex)
    pos = tuple(k0 + K)
    neg = tuple(-k0 + K)
    if not vector:
        amp = np.array([1.0])
    elif solenoidal:
        amp = _unit_perp(k0.astype(float), rng)
    else:
        amp = rng.standard_normal(3)
        amp /= np.linalg.norm(amp)
    c[(slice(None),) + pos] = 0.5 * a * np.exp(1j * phase) * amp
    c[(slice(None),) + neg] = 0.5 * a * np.exp(-1j * phase) * amp
    return c


def _gaussian_coeffs(lat, rng, mask, ncomp):
    shape = (ncomp,) + lat.kmag.shape
    c = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * mask
    c = lat.symmetrise(c)
    norm = np.sqrt(np.sum(np.abs(c) ** 2))
    return c * (_amplitude(rng) / norm) if norm > 0 else c


def _dyadic_shell(lat, rng, vector, index):
    shells = [j for j in range(4) if 2**j <= lat.K]
    j = shells[index % len(shells)]
    mask = (lat.kmag >= 2**j) & (lat.kmag < 2 ** (j + 1))
    return _gaussian_coeffs(lat, rng, mask, 3 if vector else 1)


def _random_band(lat, rng, vector):
    mask = (lat.kmag >= 1) & (lat.kmag <= lat.K)
    return _gaussian_coeffs(lat, rng, mask, 3 if vector else 1)


def _bump(lat, rng):
    """Fourier series of a periodised Gaussian, exact in closed form."""
    sigma = rng.uniform(0.6, 1.0)
    centre = rng.uniform(0, 2 * np.pi, size=3)
    phase = np.tensordot(centre, lat.k, axes=1)
    c = (sigma**2 / (2 * np.pi)) ** 1.5 * np.exp(-0.5 * sigma**2 * lat.kmag**2 - 1j * phase)
    return _amplitude(rng) * c


def _gaussian_bump(lat, rng, vector):
    if not vector:
        return _bump(lat, rng)[None]
    return np.stack([_bump(lat, rng) for _ in range(3)])


def _tg_factor(lat, m, shift, kind, axis):
    """Coefficients of sin/cos(m x_axis + shift) as a 1D array over -K..K."""
    K = lat.K
    c = np.zeros(2 * K + 1, dtype=complex)
    e = np.exp(1j * shift)
    if kind == "sin":
        c[K + m], c[K - m] = e / 2j, -np.conj(e) / 2j
    else:
        c[K + m], c[K - m] = e / 2, np.conj(e) / 2
    shape = [1, 1, 1]
    shape[axis] = 2 * K + 1
    return c.reshape(shape)


def _tg_product(lat, ms, shifts, kinds):
    out = np.ones((1, 1, 1), dtype=complex)
    for axis in range(3):
        out = out * _tg_factor(lat, ms[axis], shifts[axis], kinds[axis], axis)
    return out


def _taylor_green_slice(lat, rng, vector, solenoidal=True):
    ms = rng.integers(1, 3, size=3)
    shifts = rng.uniform(0, 2 * np.pi, size=3)
    a = _amplitude(rng)
    if not vector:
        return a * _tg_product(lat, ms, shifts, ("sin", "cos", "cos"))[None]
    # A m1 + B m2 + C m3 = 0 keeps the generalised vortex divergence-free
    A, B, C = rng.standard_normal(3)
    if solenoidal:
        C = -(A * ms[0] + B * ms[1]) / ms[2]
    comps = [
        A * _tg_product(lat, ms, shifts, ("sin", "cos", "cos")),
        B * _tg_product(lat, ms, shifts, ("cos", "sin", "cos")),
        C * _tg_product(lat, ms, shifts, ("cos", "cos", "sin")),
    ]
    return a * np.stack(comps) / np.sqrt(A * A + B * B + C * C)


def _draw(family, lat, rng, vector, index, solenoidal=True):
    if family == "single_mode":
        return _single_mode(lat, rng, vector, solenoidal)
    if family == "dyadic_shell":
        return _dyadic_shell(lat, rng, vector, index)
    if family == "gaussian_bump":
        return _gaussian_bump(lat, rng, vector)
    if family == "random_band":
        return _random_band(lat, rng, vector)
    if family == "taylor_green_slice":
        return _taylor_green_slice(lat, rng, vector, solenoidal)
    raise ValueError(f"unknown family {family!r}")


def make_member(family: str, index: int, grid: Grid, seed: int, k_max: int) -> CorpusMember:
    lat = _Lattice(k_max)
    rng = np.random.default_rng([seed, FAMILIES.index(family), index])
    f, g, h = (lat.embed(_draw(family, lat, rng, False, index), grid) for _ in range(3))
    u = lat.embed(_draw(family, lat, rng, True, index), grid)
    u = SpectralField(grid, _leray(u.coeffs, grid))
    v = lat.embed(_draw(family, lat, rng, True, index, solenoidal=False), grid)
    return CorpusMember(family, index, f, g, h, u, v)


def members(spec: CorpusSpec, N: int):
    grid = Grid(N)
    for family in spec.families:
        for i in range(spec.count):
            yield make_member(family, i, grid, spec.rng_seed, spec.k_max)


def corpus_digest(spec: CorpusSpec) -> str:
    """sha256 over the grid-independent coefficient cubes of every member."""
    h = hashlib.sha256(repr((spec.families, spec.count, spec.rng_seed, spec.k_max)).encode())
    n = 3 * spec.k_max + 3
    n += n % 2
    grid = Grid(max(n, 8))
    for m in members(spec, grid.N):
        for fld in (m.f, m.g, m.h, m.u, m.v):
            h.update(np.ascontiguousarray(fld.coeffs).tobytes())
    return h.hexdigest()

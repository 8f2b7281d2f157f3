"""Fourier infrastructure on the periodic box [0, 2*pi)^3.

Fields are stored as full complex coefficient arrays of shape
``(components, N, N, N)`` in numpy FFT index order, normalised so that

    u_hat(k) = N**-3 * sum_x u(x) exp(-i k.x).

The Nyquist planes (``k_i = N/2``) are zeroed whenever a field is built, which
keeps Hermitian pairing intact under odd-order derivatives.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.fft as sfft

BOX_LENGTH = 2.0 * np.pi
BOX_VOLUME = BOX_LENGTH**3

# Relative tolerance on Hermitian pairing before a field is treated as corrupted.
SYMMETRY_TOL = 1e-12


class GridMismatchError(ValueError):
    pass


class SymmetryError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    """Uniform N^3 grid on the 2*pi-periodic box."""

    N: int

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 8 or self.N % 2:
            raise ValueError(f"grid size must be an even integer >= 8, got {self.N!r}")

    @property
    def L(self) -> float:
        return BOX_LENGTH

    @property
    def dealias_cutoff(self) -> int:
        return self.N // 3

    @cached_property
    def k1d(self) -> np.ndarray:
        """Integer wavenumbers in FFT index order; index N/2 carries +N/2."""
        n = self.N
        return ((np.arange(n) + n // 2 - 1) % n) - n // 2 + 1

    @cached_property
    def k(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Broadcastable wavevector components (N,1,1), (1,N,1), (1,1,N)."""
        k = self.k1d.astype(float)
        return k[:, None, None], k[None, :, None], k[None, None, :]

    @cached_property
    def k2(self) -> np.ndarray:
        k1, k2, k3 = self.k
        out = k1**2 + k2**2 + k3**2
        out.flags.writeable = False
        return out

    @cached_property
    def kmag(self) -> np.ndarray:
        out = np.sqrt(self.k2)
        out.flags.writeable = False
        return out

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        keep = np.abs(self.k1d) <= self.dealias_cutoff
        out = keep[:, None, None] & keep[None, :, None] & keep[None, None, :]
        out.flags.writeable = False
        return out

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        """True on every retained mode, False on the three Nyquist planes."""
        keep = np.abs(self.k1d) < self.N // 2
        out = keep[:, None, None] & keep[None, :, None] & keep[None, None, :]
        out.flags.writeable = False
        return out

    @cached_property
    def k_half(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Wavevector components restricted to the rfft half space k3 >= 0."""
        k1, k2, k3 = self.k
        return k1, k2, k3[..., : self.N // 2 + 1]

    @cached_property
    def k2_half(self) -> np.ndarray:
        out = np.ascontiguousarray(self.k2[..., : self.N // 2 + 1])
        out.flags.writeable = False
        return out

    @cached_property
    def dealias_mask_half(self) -> np.ndarray:
        out = np.ascontiguousarray(self.dealias_mask[..., : self.N // 2 + 1])
        out.flags.writeable = False
        return out

    @cached_property
    def negate_index(self) -> np.ndarray:
        """Index map i -> index of -k along one axis."""
        return (-np.arange(self.N)) % self.N

    def coords(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x = np.arange(self.N) * (BOX_LENGTH / self.N)
        return np.meshgrid(x, x, x, indexing="ij")


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients of a real scalar (1 component) or vector field."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.ndim == 3:
            c = c[None]
        n = self.grid.N
        if c.ndim != 4 or c.shape[1:] != (n, n, n):
            raise GridMismatchError(
                f"coefficient shape {c.shape} does not match grid N={n}"
            )
        c = np.where(self.grid.nyquist_mask, c, 0.0)
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def components(self) -> int:
        return self.coeffs.shape[0]

    @property
    def mean(self) -> np.ndarray:
        return self.coeffs[:, 0, 0, 0].real.copy()

    def component(self, i: int) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs[i])

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _check_compatible(self, other)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _check_compatible(self, other)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return SpectralField(self.grid, -self.coeffs)


def _check_compatible(f: SpectralField, g: SpectralField) -> None:
    if f.grid != g.grid:
        raise GridMismatchError(f"grid N={f.grid.N} vs N={g.grid.N}")
    if f.components != g.components:
        raise GridMismatchError(
            f"component count {f.components} vs {g.components}"
        )


def zeros(grid: Grid, components: int = 1) -> SpectralField:
    n = grid.N
    return SpectralField(grid, np.zeros((components, n, n, n), dtype=complex))


def stack(fields: Sequence[SpectralField]) -> SpectralField:
    grid = fields[0].grid
    return SpectralField(grid, np.concatenate([f.coeffs for f in fields], axis=0))


def without_mean(f: SpectralField) -> SpectralField:
    c = f.coeffs.copy()
    c[:, 0, 0, 0] = 0.0
    return SpectralField(f.grid, c)


# --- transforms -------------------------------------------------------------

def _rfft_half(samples: np.ndarray, n: int) -> np.ndarray:
    """Real samples (C,N,N,N) -> normalised half spectrum (C,N,N,N/2+1)."""
    return sfft.rfftn(samples, axes=(1, 2, 3)) / n**3


def _irfft_half(half: np.ndarray, n: int) -> np.ndarray:
    return sfft.irfftn(half * n**3, s=(n, n, n), axes=(1, 2, 3))


def _expand(half: np.ndarray, n: int) -> np.ndarray:
    """Half spectrum -> full Hermitian spectrum."""
    m = n // 2
    full = np.empty(half.shape[:-1] + (n,), dtype=np.complex128)
    full[..., : m + 1] = half
    neg = (-np.arange(n)) % n
    tail = half[..., m - 1 : 0 : -1]
    full[..., m + 1 :] = np.conj(tail[:, neg][:, :, neg])
    return full


def _forward(samples: np.ndarray, n: int) -> np.ndarray:
    """Real samples (C,N,N,N) -> full normalised complex spectrum."""
    return _expand(_rfft_half(samples, n), n)


def _inverse(coeffs: np.ndarray, n: int) -> np.ndarray:
    """Full Hermitian spectrum -> real samples, discarding the imaginary residue."""
    return _irfft_half(coeffs[..., : n // 2 + 1], n)


def forward_transform(samples: np.ndarray, grid: Grid) -> SpectralField:
    x = np.asarray(samples, dtype=float)
    if x.ndim == 3:
        x = x[None]
    n = grid.N
    if x.ndim != 4 or x.shape[1:] != (n, n, n):
        raise GridMismatchError(
            f"samples of shape {np.shape(samples)} do not live on an N={n} grid"
        )
    return SpectralField(grid, _forward(x, n))


def hermitian_defect(f: SpectralField) -> float:
    """max |c(k) - conj(c(-k))|, relative to max |c|."""
    c = f.coeffs
    neg = f.grid.negate_index
    mirrored = np.conj(c[:, neg][:, :, neg][:, :, :, neg])
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(c - mirrored)) / scale)


def inverse_transform(f: SpectralField, check: bool = True) -> np.ndarray:
    """Physical samples of shape (C, N, N, N)."""
    if check:
        defect = hermitian_defect(f)
        if defect > SYMMETRY_TOL:
            raise SymmetryError(
                f"Hermitian symmetry violated (relative defect {defect:.3e})"
            )
    return _inverse(f.coeffs, f.grid.N)


def to_physical(f: SpectralField) -> np.ndarray:
    return _inverse(f.coeffs, f.grid.N)


def dealias(f: SpectralField) -> SpectralField:
    return SpectralField(f.grid, np.where(f.grid.dealias_mask, f.coeffs, 0.0))


def from_physical_product(values: np.ndarray, grid: Grid) -> SpectralField:
    """Forward-transform a physical-space product and apply the 2/3 rule."""
    c = _forward(np.asarray(values, dtype=float).reshape((-1,) + (grid.N,) * 3), grid.N)
    return SpectralField(grid, np.where(grid.dealias_mask, c, 0.0))


# --- differential operators -------------------------------------------------

def derivative(f: SpectralField, alpha: Sequence[int]) -> SpectralField:
    """Apply d^alpha = prod_i (d/dx_i)^alpha_i to every component."""
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != 3 or min(alpha) < 0:
        raise ValueError(f"multi-index must have three nonnegative entries: {alpha}")
    if sum(alpha) > 3:
        raise ValueError(f"derivatives of total order > 3 are not supported: {alpha}")
    mult = np.ones((1, 1, 1), dtype=complex)
    for ki, a in zip(f.grid.k, alpha):
        if a:
            mult = mult * (1j * ki) ** a
    return SpectralField(f.grid, f.coeffs * mult)


def gradient(f: SpectralField) -> SpectralField:
    """Component c*3 + i holds d f_c / d x_i."""
    k = f.grid.k
    out = np.empty((3 * f.components,) + f.coeffs.shape[1:], dtype=complex)
    for c in range(f.components):
        for i in range(3):
            out[3 * c + i] = 1j * k[i] * f.coeffs[c]
    return SpectralField(f.grid, out)


def laplacian(f: SpectralField) -> SpectralField:
    return SpectralField(f.grid, -f.grid.k2 * f.coeffs)


def divergence(v: SpectralField) -> SpectralField:
    if v.components != 3:
        raise ValueError("divergence needs a 3-component field")
    k = v.grid.k
    return SpectralField(v.grid, sum(1j * k[i] * v.coeffs[i] for i in range(3)))


def leray_project(v: SpectralField) -> SpectralField:
    """Project onto divergence-free fields mode by mode; k = 0 is left alone."""
    if v.components != 3:
        raise ValueError(f"Leray projection needs 3 components, got {v.components}")
    return SpectralField(v.grid, _leray(v.coeffs, v.grid))


def _leray(c: np.ndarray, grid: Grid, half: bool = False) -> np.ndarray:
    k = grid.k_half if half else grid.k
    k2 = grid.k2_half if half else grid.k2
    k2 = np.where(k2 == 0, 1.0, k2)
    kdotv = (k[0] * c[0] + k[1] * c[1] + k[2] * c[2]) / k2
    return np.stack([c[i] - k[i] * kdotv for i in range(3)])


def divergence_defect(v: SpectralField) -> float:
    """max_k |k . v_hat(k)| relative to max_k |v_hat(k)|."""
    k = v.grid.k
    kv = np.abs(k[0] * v.coeffs[0] + k[1] * v.coeffs[1] + k[2] * v.coeffs[2])
    scale = np.max(np.abs(v.coeffs))
    return 0.0 if scale == 0 else float(np.max(kv) / scale)


# --- norms ------------------------------------------------------------------

def pointwise_magnitude(values: np.ndarray) -> np.ndarray:
    """Euclidean magnitude over the leading component axis."""
    if values.shape[0] == 1:
        return np.abs(values[0])
    return np.sqrt(np.sum(values * values, axis=0))


def lebesgue_norm_physical(values: np.ndarray, p: float) -> float:
    if p < 1:
        raise ValueError(f"L^p needs p >= 1, got {p}")
    mag = pointwise_magnitude(values)
    if np.isinf(p):
        return float(np.max(mag))
    n3 = mag.size
    if p == 2:
        total = np.sum(mag * mag)
    elif p == 1:
        total = np.sum(mag)
    else:
        total = np.sum(mag**p)
    return float((BOX_VOLUME / n3 * total) ** (1.0 / p))


def lebesgue_norm(f: SpectralField, p: float) -> float:
    """Grid-quadrature L^p norm; p = inf is the grid maximum."""
    if p < 1:
        raise ValueError(f"L^p needs p >= 1, got {p}")
    return lebesgue_norm_physical(to_physical(f), p)


@dataclass(frozen=True)
class SobolevSpec:
    s: float

    def __post_init__(self):
        if not np.isfinite(self.s):
            raise ValueError("Sobolev order must be finite")


def sobolev_norm(f: SpectralField, spec: SobolevSpec | float) -> float:
    s = spec.s if isinstance(spec, SobolevSpec) else float(spec)
    weight = (1.0 + f.grid.k2) ** s
    energy = np.sum(weight * np.sum(np.abs(f.coeffs) ** 2, axis=0))
    return float(np.sqrt(BOX_VOLUME * energy))


def grad_l2_norm(f: SpectralField, order: int = 1) -> float:
    """||nabla^order f||_{L^2} over the full derivative tensor, via Parseval."""
    weight = f.grid.k2**order
    energy = np.sum(weight * np.sum(np.abs(f.coeffs) ** 2, axis=0))
    return float(np.sqrt(BOX_VOLUME * energy))


def inner_product(f: SpectralField, g: SpectralField) -> float:
    _check_compatible(f, g)
    return float(BOX_VOLUME * np.sum(f.coeffs * np.conj(g.coeffs)).real)

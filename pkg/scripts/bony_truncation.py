"""Bony residual and product truncation as the band limit crosses N/6.

Two columns per band limit K (max-norm box |k_i| <= K):
  identity   relative residual of fg = T_f g + T_g f + R(f, g) on the grid
  truncation relative L2 gap between the 2/3-rule product and the exact
             product computed on a doubled grid

The blocks sum to f - mean(f) on the grid and the 2/3 rule is linear, so the
identity closes to round-off at every K.  The truncation column is where
the band limit bites: it is round-off up to N/6 and grows past it.

    python scripts/bony_truncation.py [--N 32] [--seed 0]
"""
import argparse

import numpy as np

from besovflow.inequalities import bony_identity_check
from besovflow.littlewood_paley import build_bank, product
from besovflow.spectral import Grid, SpectralField, lebesgue_norm, without_mean


def band_limited(grid, K, rng):
    k = np.broadcast_arrays(*grid.k)
    mask = (np.max(np.abs(np.stack(k)), axis=0) <= K) & grid.dealias_mask
    c = (rng.standard_normal(mask.shape) + 1j * rng.standard_normal(mask.shape)) * mask
    c = 0.5 * (c + np.conj(c[grid.negate_index][:, grid.negate_index][:, :, grid.negate_index]))
    return SpectralField(grid, c)


def upsample(f, fine):
    """Same trigonometric polynomial on a finer grid (zero padding)."""
    n = f.grid.N
    src = np.arange(-n // 2 + 1, n // 2) % n       # storage indices, Nyquist dropped
    wav = np.arange(-n // 2 + 1, n // 2)           # their wavenumbers
    dst = wav % fine.N
    c = np.zeros((1,) + (fine.N,) * 3, dtype=complex)
    c[np.ix_([0], dst, dst, dst)] = f.coeffs[np.ix_([0], src, src, src)]
    return SpectralField(fine, c)


def truncation_gap(f, g):
    fine = Grid(2 * f.grid.N)
    exact = without_mean(product(upsample(f, fine), upsample(g, fine)))
    coarse = upsample(without_mean(product(f, g)), fine)
    return lebesgue_norm(exact - coarse, 2) / lebesgue_norm(exact, 2)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, default=32)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    grid = Grid(args.N)
    bank = build_bank(grid)
    rng = np.random.default_rng(args.seed)
    print(f"N={args.N}, N/6={args.N / 6:.2f}")
    print(f"{'K':>3} {'within':>7} {'identity':>10} {'truncation':>11}")
    for K in range(1, grid.dealias_cutoff + 1):
        f, g = band_limited(grid, K, rng), band_limited(grid, K, rng)
        r = bony_identity_check(f, g, bank)
        print(f"{K:3d} {str(r.within_band):>7} {r.relative:10.2e} {truncation_gap(f, g):11.2e}")


if __name__ == "__main__":
    main()

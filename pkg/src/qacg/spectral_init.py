"""Spectrally filtered inverse used as the CG warm start.

This is the classical stand-in for the HHL output: invert the operator on a
low-energy window of its spectrum, drop everything above.  The decoded vector
is taken as-is (unnormalized), since CG needs magnitudes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import DEDUP_RTOL, Grid1D, Spectrum


class SpectralFilterError(ValueError):
    pass


@dataclass(frozen=True)
class SpectralFilter:
    """Keep modes with ``lambda <= lambda_cutoff`` or the ``n_modes`` lowest.

    Exactly one of the two must be given.
    """

    lambda_cutoff: float | None = None
    n_modes: int | None = None
    exclude_zero_mode: bool = True

    def __post_init__(self):
        if (self.lambda_cutoff is None) == (self.n_modes is None):
            raise SpectralFilterError("give exactly one of lambda_cutoff or n_modes")
        if self.n_modes is not None and self.n_modes < 0:
            raise SpectralFilterError("n_modes must be non-negative")

    def mask(self, eigenvalues: np.ndarray) -> np.ndarray:
        """Boolean mask of retained modes for ascending ``eigenvalues``."""
        ev = np.asarray(eigenvalues, dtype=float)
        scale = max(np.max(np.abs(ev)), 1e-300) if ev.size else 1.0
        zero = np.abs(ev) <= DEDUP_RTOL * scale
        if self.lambda_cutoff is not None:
            # degenerate buckets are kept whole
            keep = ev <= self.lambda_cutoff * (1.0 + DEDUP_RTOL)
        else:
            keep = np.zeros(ev.shape, dtype=bool)
            candidates = np.flatnonzero(~zero) if self.exclude_zero_mode else np.arange(ev.size)
            keep[candidates[: self.n_modes]] = True
        if self.exclude_zero_mode:
            keep &= ~zero
        return keep


@dataclass(frozen=True)
class KappaSplit:
    kappa_q: float
    kappa_c: float
    cutoff_index: int
    lambda_cutoff: float = float("nan")


def filtered_inverse_apply(eigenvalues, eigenvectors, b, filt: SpectralFilter) -> np.ndarray:
    """``sum_i f(lambda_i) (v_i . b) v_i`` with ``f = 1/lambda`` on retained modes."""
    ev = np.asarray(eigenvalues, dtype=float)
    V = np.asarray(eigenvectors, dtype=float)
    b = np.asarray(b, dtype=float)
    keep = filt.mask(ev)
    if np.any(ev[keep] <= 0.0):
        raise SpectralFilterError("retained eigenvalue <= 0; set exclude_zero_mode")
    if not np.any(keep):
        return np.zeros_like(b)
    Vk = V[:, keep]
    return Vk @ ((Vk.T @ b) / ev[keep])


def _fourier_eigenvalues(grid: Grid1D, dims: int) -> np.ndarray:
    n = grid.n_grid
    lam = 4.0 / grid.h**2 * np.sin(np.pi * np.arange(n) / n) ** 2
    if dims == 1:
        return lam
    return lam[:, None, None] + lam[None, :, None] + lam[None, None, :]


def spectral_initial_guess_poisson(grid: Grid1D, dims: int, b, lambda_cutoff: float) -> np.ndarray:
    """Filtered inverse of the periodic Laplacian via FFT, no eigendecomposition.

    Frequencies with ``0 < lambda <= lambda_cutoff`` are scaled by ``1/lambda``,
    the rest (including the zero mode) are dropped.
    """
    n = grid.n_grid
    b = np.asarray(b, dtype=float)
    shape = (n,) * dims
    if b.size != n**dims:
        raise SpectralFilterError(f"expected {n**dims} entries, got {b.size}")
    lam = _fourier_eigenvalues(grid, dims)
    scale = lam.max()
    keep = (lam > DEDUP_RTOL * scale) & (lam <= lambda_cutoff * (1.0 + DEDUP_RTOL))
    coef = np.fft.fftn(b.reshape(shape))
    inv = np.zeros(shape)
    inv[keep] = 1.0 / lam[keep]
    return np.real(np.fft.ifftn(coef * inv)).reshape(-1)


def kappa_split(spec: Spectrum | np.ndarray, cutoff_index: int) -> KappaSplit:
    """Split the zero-mean condition number at a distinct nonzero eigenvalue.

    ``kappa_q = lambda[c] / lambda[0]``, ``kappa_c = lambda[-1] / lambda[c]``.
    """
    nz = spec.nonzero() if isinstance(spec, Spectrum) else np.asarray(spec, dtype=float)
    if nz.size == 0:
        raise SpectralFilterError("spectrum has no nonzero eigenvalues")
    if not 0 <= cutoff_index < nz.size:
        raise SpectralFilterError(f"cutoff_index {cutoff_index} outside [0, {nz.size})")
    lc = float(nz[cutoff_index])
    return KappaSplit(lc / nz[0], nz[-1] / lc, cutoff_index, lc)

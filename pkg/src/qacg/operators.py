"""Discrete operators: periodic Laplacians in 1D/3D and the p-n diode Jacobian.

The periodic Laplacian is circulant, so everything about it (application,
spectrum, condition number) is available without assembling a matrix.  The
diode Jacobian has no closed-form spectrum and is kept as a symmetric
tridiagonal pair of arrays.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
import scipy.linalg
from scipy.constants import Boltzmann, elementary_charge

# Eigenvalues closer than this (relative) are one multiplicity bucket.
DEDUP_RTOL = 1e-9


class OperatorError(ValueError):
    """Invalid operator input (shape mismatch, index out of range, overflow)."""


class EigensolverError(RuntimeError):
    """The tridiagonal eigensolver did not converge or failed verification."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on (0, 1) with ``n_grid`` points, spacing 1/n_grid."""

    n_grid: int

    def __post_init__(self):
        if int(self.n_grid) != self.n_grid or self.n_grid < 2:
            raise OperatorError(f"n_grid must be an integer >= 2, got {self.n_grid!r}")

    @property
    def h(self) -> float:
        return 1.0 / self.n_grid


@dataclass(frozen=True)
class PoissonOperator:
    """Matrix-free periodic Laplacian on ``grid`` in ``dims`` (1 or 3) dimensions."""

    grid: Grid1D
    dims: int = 1
    boundary: str = "periodic"

    def __post_init__(self):
        if self.dims not in (1, 3):
            raise OperatorError(f"dims must be 1 or 3, got {self.dims}")
        if self.boundary != "periodic":
            raise OperatorError("only periodic boundaries are supported")

    @property
    def size(self) -> int:
        return self.grid.n_grid**self.dims

    @property
    def nnz_per_row(self) -> int:
        return 2 * self.dims + 1

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return laplacian_apply(self, v)


@dataclass(frozen=True)
class Spectrum:
    """Distinct eigenvalues (ascending) with their multiplicities."""

    eigenvalues: np.ndarray
    multiplicities: np.ndarray

    @property
    def dimension(self) -> int:
        return int(self.multiplicities.sum())

    def nonzero(self) -> np.ndarray:
        """Distinct eigenvalues with the zero mode removed."""
        ev = self.eigenvalues
        scale = ev.max() if ev.size else 1.0
        return ev[ev > DEDUP_RTOL * scale]


def laplacian_apply(op: PoissonOperator, v) -> np.ndarray:
    """Return ``L @ v`` using the (-1, 2, -1)/h^2 stencil with wraparound.

    For ``dims=3`` the vector is a flattened C-ordered ``(n, n, n)`` array and
    the stencil is applied along each axis (the Kronecker sum).
    """
    v = np.asarray(v, dtype=float)
    n = op.grid.n_grid
    if v.ndim != 1 or v.shape[0] != op.size:
        raise OperatorError(f"expected vector of length {op.size}, got shape {v.shape}")
    inv_h2 = 1.0 / op.grid.h**2
    u = v.reshape((n,) * op.dims)
    out = np.zeros_like(u)
    for axis in range(op.dims):
        out += 2.0 * u - np.roll(u, 1, axis=axis) - np.roll(u, -1, axis=axis)
    return (inv_h2 * out).reshape(-1)


def laplacian_eigenvalue_1d(k: int, grid: Grid1D) -> float:
    """Eigenvalue ``(4/h^2) sin^2(pi k / n)`` of the 1D periodic Laplacian."""
    if not 0 <= k < grid.n_grid:
        raise OperatorError(f"mode index {k} outside [0, {grid.n_grid})")
    return 4.0 / grid.h**2 * math.sin(math.pi * k / grid.n_grid) ** 2


def eigenvalues_1d(grid: Grid1D) -> np.ndarray:
    """All ``n`` eigenvalues in mode order ``k = 0..n-1``."""
    k = np.arange(grid.n_grid)
    return 4.0 / grid.h**2 * np.sin(np.pi * k / grid.n_grid) ** 2


def distinct_eigenvalues_1d(grid: Grid1D) -> tuple[np.ndarray, np.ndarray]:
    """Distinct 1D eigenvalues ``k = 0..floor(n/2)`` and their multiplicities.

    Modes ``k`` and ``n - k`` coincide, so every value except ``k = 0`` (and
    ``k = n/2`` for even ``n``) appears twice.
    """
    n = grid.n_grid
    k = np.arange(n // 2 + 1)
    vals = 4.0 / grid.h**2 * np.sin(np.pi * k / n) ** 2
    mult = np.full(k.shape, 2, dtype=np.int64)
    mult[0] = 1
    if n % 2 == 0:
        mult[-1] = 1
    return vals, mult


def _merge_buckets(values: np.ndarray, weights: np.ndarray) -> Spectrum:
    order = np.argsort(values, kind="stable")
    values, weights = values[order], weights[order]
    scale = max(abs(values[-1]), 1.0)
    out_v, out_m = [values[0]], [weights[0]]
    for v, w in zip(values[1:], weights[1:]):
        if v - out_v[-1] <= DEDUP_RTOL * scale:
            out_m[-1] += w
        else:
            out_v.append(v)
            out_m.append(w)
    ev = np.asarray(out_v, dtype=float)
    ev[0] = 0.0 if abs(ev[0]) <= DEDUP_RTOL * scale else ev[0]
    return Spectrum(ev, np.asarray(out_m, dtype=np.int64))


def spectrum_1d(grid: Grid1D) -> Spectrum:
    vals, mult = distinct_eigenvalues_1d(grid)
    return _merge_buckets(vals, mult)


def spectrum_3d(grid: Grid1D) -> Spectrum:
    """Distinct eigenvalues of the 3D Kronecker sum with multiplicities.

    Built from the distinct 1D values, so the work is ``(n/2+1)^3`` rather
    than ``n^3``; still meant for moderate ``n`` (a few hundred at most).
    """
    vals, mult = distinct_eigenvalues_1d(grid)
    s = vals[:, None, None] + vals[None, :, None] + vals[None, None, :]
    w = mult[:, None, None] * mult[None, :, None] * mult[None, None, :]
    return _merge_buckets(s.ravel(), w.ravel())


def spectrum(grid: Grid1D, dims: int) -> Spectrum:
    if dims == 1:
        return spectrum_1d(grid)
    if dims == 3:
        return spectrum_3d(grid)
    raise OperatorError(f"dims must be 1 or 3, got {dims}")


def iter_distinct_nonzero_3d(grid: Grid1D) -> Iterator[float]:
    """Yield the distinct nonzero 3D eigenvalues in ascending order, lazily.

    Best-first search over sorted index triples ``a <= b <= c`` of the
    distinct 1D values; only the part of the spectrum actually consumed is
    ever generated, which keeps ``n = 2**15`` tractable.
    """
    mu, _ = distinct_eigenvalues_1d(grid)
    top = len(mu) - 1
    scale = 3.0 * mu[-1]
    heap = [(3.0 * mu[0], 0, 0, 0)]
    seen = {(0, 0, 0)}
    last = None
    while heap:
        val, a, b, c = heapq.heappop(heap)
        for nxt in ((a + 1, b, c), (a, b + 1, c), (a, b, c + 1)):
            x, y, z = nxt
            if z > top or not (x <= y <= z) or nxt in seen:
                continue
            seen.add(nxt)
            heapq.heappush(heap, (mu[x] + mu[y] + mu[z], x, y, z))
        if val <= DEDUP_RTOL * scale:
            continue
        if last is not None and val - last <= DEDUP_RTOL * scale:
            continue
        last = val
        yield float(val)


def lambda_extremes_zero_mean(grid: Grid1D, dims: int) -> tuple[float, float]:
    """Smallest nonzero and largest eigenvalue of the periodic Laplacian."""
    vals, _ = distinct_eigenvalues_1d(grid)
    return float(vals[1]), float(dims * vals[-1])


def condition_number_zero_mean(grid: Grid1D, dims: int = 1) -> float:
    """lambda_max / lambda_1 on the zero-mean subspace.

    Equals ``1/sin^2(pi/n)`` in 1D (``3/sin^2(pi/n)`` in 3D) for even ``n``;
    for odd ``n`` the top mode sits at ``k = (n-1)/2`` and the ratio is
    correspondingly smaller.
    """
    if grid.n_grid < 3:
        raise OperatorError("condition number needs n_grid >= 3")
    if dims == 3 and grid.n_grid <= 64:
        nz = spectrum_3d(grid).nonzero()
        return float(nz[-1] / nz[0])
    # the extremes of the 3D Kronecker sum are sums of 1D extremes
    lo, hi = lambda_extremes_zero_mean(grid, dims)
    return hi / lo


# --------------------------------------------------------------------------
# p-n diode


@dataclass(frozen=True)
class PnDiodeProblem:
    """Abrupt silicon p-n junction at thermal equilibrium (CGS-style units).

    Acceptors fill the left half, donors the right half; contacts carry the
    built-in potentials as Dirichlet values.
    """

    n_grid: int = 1024
    length_cm: float = 1e-4
    temperature_K: float = 300.0
    N_A: float = 1e16
    N_D: float = 1e16
    epsilon_si: float = 1.05e-12
    bandgap_eV: float = 1.12
    n_i: float = 1e10

    def __post_init__(self):
        for name in ("length_cm", "temperature_K", "N_A", "N_D", "epsilon_si", "bandgap_eV", "n_i"):
            if not getattr(self, name) > 0:
                raise OperatorError(f"{name} must be positive")
        if self.n_grid < 2:
            raise OperatorError("n_grid must be >= 2")

    @property
    def thermal_voltage(self) -> float:
        return Boltzmann * self.temperature_K / elementary_charge

    @property
    def h(self) -> float:
        return self.length_cm / (self.n_grid + 1)

    @property
    def z(self) -> np.ndarray:
        """Interior node positions in cm."""
        return self.h * np.arange(1, self.n_grid + 1)

    @property
    def doping(self) -> np.ndarray:
        """Net doping N_D - N_A at each interior node."""
        return np.where(self.z < 0.5 * self.length_cm, -self.N_A, self.N_D)

    @property
    def contact_potentials(self) -> tuple[float, float]:
        ut = self.thermal_voltage
        return -ut * math.log(self.N_A / self.n_i), ut * math.log(self.N_D / self.n_i)

    def neutral_potential(self) -> np.ndarray:
        """Charge-neutral profile: each side sits at its built-in potential."""
        left, right = self.contact_potentials
        return np.where(self.z < 0.5 * self.length_cm, left, right)

    def ramp_potential(self) -> np.ndarray:
        """Linear interpolation between the two contact potentials."""
        left, right = self.contact_potentials
        return left + (right - left) * self.z / self.length_cm

    def linearization_point(self, kind: str = "neutral") -> np.ndarray:
        if kind == "neutral":
            return self.neutral_potential()
        if kind == "ramp":
            return self.ramp_potential()
        if kind == "zero":
            return np.zeros(self.n_grid)
        raise OperatorError(f"unknown linearization point {kind!r}")


@dataclass(frozen=True)
class TridiagonalSPD:
    """Symmetric tridiagonal matrix stored as its diagonal and off-diagonal."""

    diag: np.ndarray
    offdiag: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if self.offdiag.shape[0] != max(self.diag.shape[0] - 1, 0):
            raise OperatorError("offdiag must have length len(diag) - 1")

    @property
    def n(self) -> int:
        return self.diag.shape[0]

    @property
    def nnz(self) -> int:
        return self.n + 2 * self.offdiag.shape[0]

    def __call__(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != self.diag.shape:
            raise OperatorError(f"expected vector of length {self.n}, got shape {v.shape}")
        out = self.diag * v
        out[:-1] += self.offdiag * v[1:]
        out[1:] += self.offdiag * v[:-1]
        return out

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


def _charge_terms(prob: PnDiodeProblem, V: np.ndarray):
    ut = prob.thermal_voltage
    with np.errstate(over="raise", invalid="raise"):
        try:
            ep = np.exp(V / ut)
            em = np.exp(-V / ut)
        except FloatingPointError as exc:
            raise OperatorError("|V|/U_T too large: exponential overflow") from exc
    if not (np.all(np.isfinite(ep)) and np.all(np.isfinite(em))):
        raise OperatorError("|V|/U_T too large: exponential overflow")
    return ep, em


def pn_diode_residual(prob: PnDiodeProblem, V) -> np.ndarray:
    """Nonlinear residual ``F(V) = -V'' - rho(V)/eps`` with Dirichlet contacts."""
    V = np.asarray(V, dtype=float)
    if V.shape != (prob.n_grid,):
        raise OperatorError(f"expected potential of length {prob.n_grid}, got {V.shape}")
    left, right = prob.contact_potentials
    ep, em = _charge_terms(prob, V)
    rho = elementary_charge * (prob.doping - prob.n_i * ep + prob.n_i * em)
    padded = np.concatenate(([left], V, [right]))
    lap = (2.0 * padded[1:-1] - padded[:-2] - padded[2:]) / prob.h**2
    return lap - rho / prob.epsilon_si


def pn_diode_assemble(prob: PnDiodeProblem, V_lin) -> tuple[TridiagonalSPD, np.ndarray]:
    """Newton Jacobian and right-hand side ``-F(V_lin)`` at ``V_lin``.

    ``J = L_dirichlet + diag((e/eps)(n_i/U_T)(exp(V/U_T) + exp(-V/U_T)))``.
    """
    V = np.asarray(V_lin, dtype=float)
    if V.shape != (prob.n_grid,):
        raise OperatorError(f"expected potential of length {prob.n_grid}, got {V.shape}")
    ut = prob.thermal_voltage
    ep, em = _charge_terms(prob, V)
    inv_h2 = 1.0 / prob.h**2
    diag = 2.0 * inv_h2 + elementary_charge / prob.epsilon_si * (prob.n_i / ut) * (ep + em)
    offdiag = np.full(prob.n_grid - 1, -inv_h2)
    return TridiagonalSPD(diag, offdiag), -pn_diode_residual(prob, V)


def tridiag_eigendecompose(A: TridiagonalSPD, verify: bool = True):
    """Eigenvalues (ascending) and orthonormal eigenvectors of ``A``.

    Delegates to LAPACK via :func:`scipy.linalg.eigh_tridiagonal` and checks
    the residual ``||A v - lambda v|| <= 1e-8 ||A||`` and orthonormality.
    """
    if A.n > 4096:
        raise OperatorError("dense eigendecomposition limited to n <= 4096")
    if A.n == 1:
        return A.diag.copy(), np.ones((1, 1))
    try:
        w, V = scipy.linalg.eigh_tridiagonal(A.diag, A.offdiag)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigensolverError(f"tridiagonal eigensolver failed: {exc}") from exc
    if verify:
        norm_a = np.max(np.abs(A.diag)) + 2.0 * (np.max(np.abs(A.offdiag)) if A.offdiag.size else 0.0)
        AV = A.diag[:, None] * V
        AV[:-1] += A.offdiag[:, None] * V[1:]
        AV[1:] += A.offdiag[:, None] * V[:-1]
        res = np.linalg.norm(AV - V * w, axis=0)
        bad = np.flatnonzero(res > 1e-8 * norm_a)
        if bad.size:
            raise EigensolverError(f"eigenpair {bad[0]} residual {res[bad[0]]:.3e} too large", int(bad[0]))
        if np.max(np.abs(V.T @ V - np.eye(A.n))) > 1e-8:
            raise EigensolverError("eigenvectors not orthonormal to 1e-8")
    return w, V

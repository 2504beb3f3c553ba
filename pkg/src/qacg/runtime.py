"""Wall-clock models: STAR device for the quantum stage, calibrated HPC for CG."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

from .gatecount import (
    AmplifiedCounts,
    GateCounts,
    InversionParams,
    RegisterSizes,
    log_function,
    aa_total_counts,
    amplification_iterations,
    diffusion_counts,
    fsl_counts,
    inversion_counts,
    inversion_toffoli_count,
    logical_qubit_count,
    n_lambda_bits,
    qpe_counts,
    qubits_per_dim,
)
from .linsolve import cg_iteration_factor
from .operators import Grid1D, lambda_extremes_zero_mean


@dataclass(frozen=True)
class StarParams:
    d_code: int = 7
    tau_s: float = 1e-6
    r_rus: int = 2

    def __post_init__(self):
        if self.d_code < 1 or self.r_rus < 1 or not self.tau_s > 0:
            raise ValueError("STAR parameters must be positive")


@dataclass(frozen=True)
class HpcParams:
    throughput_flops: float = 3.76e15
    utilization: float = 1e-2

    def __post_init__(self):
        if not self.throughput_flops > 0:
            raise ValueError("throughput must be positive")
        if not 0.0 < self.utilization <= 1.0:
            raise ValueError("utilization must lie in (0, 1]")

    @property
    def effective_flops(self) -> float:
        return self.throughput_flops * self.utilization


@dataclass(frozen=True)
class CostModel:
    """Everything the runtime model needs besides the problem size and split.

    ``spectral_bounds`` picks the eigenvalue interval fed to the inversion
    parameters: ``"window"`` uses ``(lambda_1, lambda_cutoff)``, so that
    ``lambda_max / lambda_min`` equals the ``kappa_q`` driving the degree;
    ``"full"`` uses ``(lambda_1, lambda_max)`` of the whole operator.  ``normalize_spectrum`` rescales that interval so its top is 1;
    ``uncompute`` adds the optional final inverse QPE.
    """

    star: StarParams = field(default_factory=StarParams)
    hpc: HpcParams = field(default_factory=HpcParams)
    eps: float = 1e-6
    m_fsl: int = 10
    p_par: int = 1
    log_base: object = 2
    normalize_spectrum: bool = False
    uncompute: bool = False
    spectral_bounds: str = "window"

    # the gate formulas describe the 3D circuit; the cost model is 3D only
    dims = 3

    def __post_init__(self):
        if not 0.0 < self.eps < 1.0:
            raise ValueError("eps must lie in (0, 1)")
        if self.p_par < 1 or self.m_fsl < 1:
            raise ValueError("p_par and m_fsl must be >= 1")
        if self.spectral_bounds not in ("full", "window"):
            raise ValueError("spectral_bounds must be 'full' or 'window'")

    def with_tau(self, tau_s: float) -> "CostModel":
        return dataclasses.replace(self, star=dataclasses.replace(self.star, tau_s=tau_s))


def circuit_time(counts: GateCounts, star: StarParams) -> float:
    """``3 d tau G_H + 2 d tau (G_S + G_CNOT) + 2 r d tau G_RZ`` on clamped counts."""
    c = counts.clamped()
    dt = star.d_code * star.tau_s
    return 3 * dt * c.h + 2 * dt * (c.s + c.cnot) + 2 * star.r_rus * dt * c.rz


def hpcg_flops_per_iter(n_unknowns: int, nnz: int) -> float:
    """One SpMV, three dot products and three axpys: ``2 nnz + 12 N``."""
    if nnz < n_unknowns:
        raise ValueError("nnz must be >= number of unknowns")
    return 2.0 * nnz + 12.0 * n_unknowns


def hpcg_runtime(hpc: HpcParams, n_unknowns: int, nnz: int, kappa_c: float, eps: float) -> float:
    """Seconds for CG with the continuous iteration factor ``sqrt(kappa)/2 ln(2/eps)``."""
    if kappa_c < 1.0:
        raise ValueError("kappa_c must be >= 1")
    return hpcg_flops_per_iter(n_unknowns, nnz) / hpc.effective_flops * cg_iteration_factor(kappa_c, eps)


def poisson_problem_size(n_grid: int, dims: int = 3) -> tuple[int, int]:
    """Unknowns and nnz for the periodic Poisson matrix (7 nonzeros per row in 3D)."""
    n_unknowns = n_grid**dims
    return n_unknowns, (2 * dims + 1) * n_unknowns


def effective_m_fsl(q: int, m_fsl: int) -> int:
    """Truncation order capped at ``q - 1`` so small registers stay valid."""
    return max(1, min(m_fsl, q - 1))


@dataclass(frozen=True)
class QuantumEstimate:
    seconds: float
    counts: AmplifiedCounts
    qubits: int


def hhl_estimate(
    q: int,
    kappa_q: float,
    model: CostModel,
    lambda_min: float,
    lambda_max: float,
) -> QuantumEstimate:
    """Counts, qubits and time of HHL + amplitude amplification at ``kappa_q``.

    ``lambda_min``/``lambda_max`` are the spectral bounds fed to the inversion
    parameters.
    """
    if q < 2:
        raise ValueError("need at least 2 qubits per dimension")
    if model.normalize_spectrum:
        lambda_min, lambda_max = lambda_min / lambda_max, 1.0
    regs = RegisterSizes(q, n_lambda_bits(kappa_q, model.eps, model.log_base), effective_m_fsl(q, model.m_fsl))
    amp = aa_total_counts(
        regs, kappa_q, model.eps, model.p_par, lambda_min, lambda_max,
        log_base=model.log_base, uncompute=model.uncompute,
    )
    qubits = logical_qubit_count(regs, amp.inv.deg_poly, amp.inv.m_pieces)
    return QuantumEstimate(circuit_time(amp.total, model.star), amp, qubits)


def hhl_runtime(q: int, kappa_q: float, model: CostModel, lambda_min: float, lambda_max: float) -> float:
    return hhl_estimate(q, kappa_q, model, lambda_min, lambda_max).seconds


@dataclass(frozen=True)
class QacgRuntime:
    total: float
    quantum: float
    classical: float
    kappa_q: float
    kappa_c: float
    estimate: QuantumEstimate | None = None


def qacg_runtime(n_grid: int, kappa_q: float, kappa_c: float, model: CostModel) -> QacgRuntime:
    """Sequential HHL warm start at ``kappa_q`` followed by CG at ``kappa_c``."""
    grid = Grid1D(n_grid)
    lam1, lam_max = lambda_extremes_zero_mean(grid, model.dims)
    if model.spectral_bounds == "window":
        lam_max = kappa_q * lam1
    est = hhl_estimate(qubits_per_dim(n_grid), kappa_q, model, lam1, lam_max)
    n_unknowns, nnz = poisson_problem_size(n_grid, model.dims)
    classical = hpcg_runtime(model.hpc, n_unknowns, nnz, kappa_c, model.eps)
    return QacgRuntime(est.seconds + classical, est.seconds, classical, kappa_q, kappa_c, est)


def full_condition_number(n_grid: int, dims: int = 3) -> float:
    lam1, lam_max = lambda_extremes_zero_mean(Grid1D(n_grid), dims)
    return lam_max / lam1


def classical_only_runtime(n_grid: int, model: CostModel) -> float:
    n_unknowns, nnz = poisson_problem_size(n_grid, model.dims)
    return hpcg_runtime(model.hpc, n_unknowns, nnz, full_condition_number(n_grid, model.dims), model.eps)


def full_hhl_estimate(n_grid: int, model: CostModel) -> QuantumEstimate:
    grid = Grid1D(n_grid)
    lam1, lam_max = lambda_extremes_zero_mean(grid, model.dims)
    return hhl_estimate(qubits_per_dim(n_grid), lam_max / lam1, model, lam1, lam_max)


def quantum_time_lower_bound(q: int, kappa_q: float, model: CostModel) -> float:
    """Amplified circuit time with the inversion degree taken at ``rho = 1``.

    Dropping the ``ln(rho)`` term can only lower the polynomial degree, and
    every remaining ingredient (``k_aa``, ``n_lambda``, the degree bound and
    the piece count) is non-decreasing in ``kappa_q``.  The Toffoli count is
    increasing in each of them once ``n_lambda`` is a few dozen bits, which
    always holds at useful ``eps``.  The result is therefore a safe,
    monotone bound for pruning the cutoff search.
    """
    nl = n_lambda_bits(kappa_q, model.eps, model.log_base)
    log = log_function(model.log_base)
    eps = model.eps
    deg = max(math.floor(log(1.0 + 16.23 * (math.pi / 2) * kappa_q * (2.0 * kappa_q - eps) / eps)), 0)
    two_n = 2.0**nl
    m_pieces = max(math.ceil(math.log((two_n - 1.0) / two_n ** (2.0 / 3.0), 5)), 1)
    ip = InversionParams(two_n ** (2.0 / 3.0), math.nan, math.nan, 1.0, deg, m_pieces, model.p_par)
    toff = max(inversion_toffoli_count(nl, ip), 0.0)
    m = effective_m_fsl(q, model.m_fsl)
    single = fsl_counts(q, m) + qpe_counts(q, nl) + inversion_counts(toff)
    per_iter = single.scaled(2) + diffusion_counts(q, nl) + GateCounts(s=2)
    total = per_iter.scaled(amplification_iterations(kappa_q, eps))
    return circuit_time(total, model.star)


def as_row(n_grid: int, model: CostModel, rt: QacgRuntime) -> dict:
    return {
        "n_grid": n_grid,
        "tau_s": model.star.tau_s,
        "kappa_q": rt.kappa_q,
        "kappa_c": rt.kappa_c,
        "t_quantum": rt.quantum,
        "t_classical": rt.classical,
        "t_total": rt.total,
    }

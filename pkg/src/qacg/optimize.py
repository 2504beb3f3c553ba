"""Choice of the spectral cutoff that minimizes total QACG runtime.

The cutoff only makes sense on the eigenvalue grid, so instead of a
continuous derivative-free optimizer we walk the distinct nonzero
eigenvalues in ascending order and keep the exact argmin.  The walk stops
early once a lower bound on the quantum time alone (non-decreasing in the
cutoff) reaches the best total seen; no later cutoff can then win.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable

from .gatecount import qubits_per_dim
from .operators import Grid1D, Spectrum, iter_distinct_nonzero_3d, lambda_extremes_zero_mean
from .runtime import (
    CostModel,
    QacgRuntime,
    classical_only_runtime,
    full_hhl_estimate,
    qacg_runtime,
    quantum_time_lower_bound,
)


@dataclass(frozen=True)
class SplitResult:
    """Optimal split.  ``window_mode_index_j`` counts retained distinct nonzero eigenvalues."""

    n_grid: int
    tau_s: float
    cutoff_index: int
    window_mode_index_j: int
    kappa_q: float
    kappa_c: float
    t_quantum: float
    t_classical: float
    t_total: float
    lambda_cutoff: float
    candidates_evaluated: int

    def row(self) -> dict:
        d = asdict(self)
        d["j"] = d.pop("window_mode_index_j")
        return d


def candidate_cutoffs(n_grid: int, spectrum: Spectrum | Iterable[float] | None = None) -> Iterable[float]:
    if spectrum is None:
        return iter_distinct_nonzero_3d(Grid1D(n_grid))
    if isinstance(spectrum, Spectrum):
        return iter(spectrum.nonzero())
    return iter(spectrum)


def optimize_cutoff(
    n_grid: int,
    model: CostModel,
    spectrum: Spectrum | Iterable[float] | None = None,
    prune: bool = True,
    keep_trace: bool = False,
):
    """Exact argmin of total runtime over distinct nonzero cutoffs.

    ``spectrum`` defaults to the lazily enumerated 3D periodic spectrum of
    ``n_grid``; a :class:`Spectrum` or any ascending iterable may be passed
    instead.  Ties go to the smaller cutoff index.  With ``keep_trace`` the
    list of evaluated :class:`QacgRuntime` values is returned as well.
    """
    lam1, lam_max = lambda_extremes_zero_mean(Grid1D(n_grid), model.dims)
    q = qubits_per_dim(n_grid)
    best: tuple[int, float, QacgRuntime] | None = None
    trace: list[QacgRuntime] = []
    count = 0
    for idx, lam in enumerate(candidate_cutoffs(n_grid, spectrum)):
        if idx == 0:
            lam1 = lam
        kappa_q = max(lam / lam1, 1.0)
        kappa_c = max(lam_max / lam, 1.0)
        if prune and best is not None and quantum_time_lower_bound(q, kappa_q, model) >= best[2].total:
            break
        rt = qacg_runtime(n_grid, kappa_q, kappa_c, model)
        count += 1
        if keep_trace:
            trace.append(rt)
        if best is None or rt.total < best[2].total:
            best = (idx, lam, rt)
    if best is None:
        raise ValueError("spectrum has no nonzero eigenvalues")
    idx, lam, rt = best
    result = SplitResult(
        n_grid=n_grid,
        tau_s=model.star.tau_s,
        cutoff_index=idx,
        window_mode_index_j=idx + 1,
        kappa_q=rt.kappa_q,
        kappa_c=rt.kappa_c,
        t_quantum=rt.quantum,
        t_classical=rt.classical,
        t_total=rt.total,
        lambda_cutoff=lam,
        candidates_evaluated=count,
    )
    return (result, trace) if keep_trace else result


@dataclass(frozen=True)
class CrossoverRow:
    n_grid: int
    tau_s: float
    t_qacg_opt: float
    t_hpcg: float
    t_hhl_full: float
    j: int
    kappa: float
    kappa_q: float
    kappa_c: float
    qacg_faster: bool


def crossover_scan(n_grids: Iterable[int], model: CostModel) -> tuple[list[CrossoverRow], int | None]:
    """Optimized QACG vs classical CG vs full HHL for each size.

    Returns the rows and the smallest size at which QACG beats CG (or None).
    """
    rows = []
    crossover = None
    for n in n_grids:
        if n & (n - 1):
            raise ValueError(f"n_grid must be a power of two, got {n}")
        split = optimize_cutoff(n, model)
        t_hpcg = classical_only_runtime(n, model)
        full = full_hhl_estimate(n, model)
        faster = split.t_total < t_hpcg
        if faster and crossover is None:
            crossover = n
        rows.append(
            CrossoverRow(n, model.star.tau_s, split.t_total, t_hpcg, full.seconds, split.window_mode_index_j,
                         split.kappa_q * split.kappa_c, split.kappa_q, split.kappa_c, faster)
        )
    return rows, crossover

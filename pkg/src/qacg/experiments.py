"""Experiment drivers: the diode warm-start study and the cost-model sweeps.

Each driver returns plain rows (dicts of scalars) so the CLI can serialize
them without knowing the library types.
"""

from __future__ import annotations

from concurrent.futures import Executor
from dataclasses import dataclass, field

import numpy as np

from .gatecount import inversion_params, n_lambda_bits
from .linsolve import CgConfig, SolveReport, cg_solve
from .operators import (
    Grid1D,
    PnDiodeProblem,
    lambda_extremes_zero_mean,
    pn_diode_assemble,
    spectrum,
    tridiag_eigendecompose,
)
from .optimize import SplitResult, optimize_cutoff
from .runtime import (
    CostModel,
    classical_only_runtime,
    full_condition_number,
    full_hhl_estimate,
    qacg_runtime,
)
from .spectral_init import SpectralFilter, filtered_inverse_apply

DEFAULT_N_MODES = (10, 20, 30, 40, 50)


@dataclass
class DiodeRun:
    """One CG solve of the diode system; ``n_modes = 0`` is the cold start."""

    n_modes: int
    report: SolveReport
    x_init: np.ndarray
    x_final: np.ndarray

    @property
    def iterations(self) -> int:
        return self.report.iterations

    @property
    def error_profile(self) -> np.ndarray:
        return np.abs(self.x_init - self.x_final)


@dataclass
class DiodeExperiment:
    problem: PnDiodeProblem
    linearization: str
    eigenvalues: np.ndarray
    runs: list[DiodeRun] = field(default_factory=list)

    @property
    def kappa(self) -> float:
        return float(self.eigenvalues[-1] / self.eigenvalues[0])

    @property
    def cold(self) -> DiodeRun:
        return self.runs[0]

    @property
    def warm(self) -> list[DiodeRun]:
        return self.runs[1:]

    def iteration_counts(self) -> dict[int, int]:
        return {r.n_modes: r.iterations for r in self.runs}


def pn_diode_experiment(
    problem: PnDiodeProblem | None = None,
    n_modes=DEFAULT_N_MODES,
    linearization: str = "neutral",
    cfg: CgConfig | None = None,
) -> DiodeExperiment:
    """Cold CG, then CG warm-started by the ``N`` lowest-mode filtered inverse.

    The Jacobian is assembled once at ``linearization`` and eigendecomposed
    densely; every warm start reuses that decomposition.
    """
    problem = problem or PnDiodeProblem()
    cfg = cfg or CgConfig(rel_tolerance=1e-6)
    A, b = pn_diode_assemble(problem, problem.linearization_point(linearization))
    w, V = tridiag_eigendecompose(A)
    if w[0] <= 0.0:
        raise ArithmeticError(f"diode Jacobian is not positive definite (lambda_min = {w[0]:.3e})")
    exp = DiodeExperiment(problem, linearization, w)

    cold = cg_solve(A, b, cfg=cfg)
    exp.runs.append(DiodeRun(0, cold, np.zeros_like(b), cold.solution))
    for m in n_modes:
        if not 0 < m <= problem.n_grid:
            raise ValueError(f"n_modes must lie in [1, {problem.n_grid}], got {m}")
        x0 = filtered_inverse_apply(w, V, b, SpectralFilter(n_modes=int(m)))
        rep = cg_solve(A, b, x0=x0, cfg=cfg)
        exp.runs.append(DiodeRun(int(m), rep, x0, rep.solution))
    return exp


def diode_summary_rows(exp: DiodeExperiment) -> list[dict]:
    rows = []
    for run in exp.runs:
        rep = run.report
        rows.append({
            "n_modes": run.n_modes,
            "iterations": rep.iterations,
            "converged": rep.converged,
            "initial_rel_residual": rep.initial_residual,
            "final_rel_residual": rep.residual_history[-1],
            "final_abs_residual": rep.absolute_residual_history[-1],
            "true_rel_residual": rep.true_residual,
            "max_abs_error_init": float(run.error_profile.max()),
        })
    return rows


def diode_long_rows(exp: DiodeExperiment) -> list[dict]:
    """Every series of the experiment as ``(run, n_modes, series, index, value)``."""
    rows = []
    for run in exp.runs:
        label = "cold" if run.n_modes == 0 else "warm"
        rep = run.report
        series = {
            "iterations": [rep.iterations],
            "rel_residual": rep.residual_history,
            "abs_residual": rep.absolute_residual_history,
            "v_init": run.x_init,
            "v_final": run.x_final,
            "abs_error": run.error_profile,
        }
        for name, values in series.items():
            for i, v in enumerate(values):
                rows.append({"run": label, "n_modes": run.n_modes, "series": name, "index": i, "value": float(v)})
    return rows


# --- cost-model sweeps --------------------------------------------------------


def _map(fn, items, executor: Executor | None):
    if executor is None:
        return [fn(x) for x in items]
    return list(executor.map(fn, items))


def spectrum_rows(n_grid: int, dims: int) -> list[dict]:
    spec = spectrum(Grid1D(n_grid), dims)
    return [
        {"index": i, "eigenvalue": float(lam), "multiplicity": int(mult)}
        for i, (lam, mult) in enumerate(zip(spec.eigenvalues, spec.multiplicities))
    ]


def _runtime_point(args) -> dict:
    n, model = args
    split = optimize_cutoff(n, model)
    return {
        "n_grid": n,
        "tau_s": model.star.tau_s,
        "t_hpcg": classical_only_runtime(n, model),
        "t_hhl_full": full_hhl_estimate(n, model).seconds,
        "t_qacg_opt": split.t_total,
        "t_quantum": split.t_quantum,
        "t_classical": split.t_classical,
        "j": split.window_mode_index_j,
        "kappa_q": split.kappa_q,
        "kappa_c": split.kappa_c,
    }


def runtime_sweep_rows(n_grids, models, executor: Executor | None = None) -> list[dict]:
    """Optimized QACG, pure CG and full HHL runtimes per (size, device model)."""
    rows = _map(_runtime_point, [(n, m) for m in models for n in n_grids], executor)
    for m in models:
        first = next((r["n_grid"] for r in rows if r["tau_s"] == m.star.tau_s and r["t_qacg_opt"] < r["t_hpcg"]), None)
        for r in rows:
            if r["tau_s"] == m.star.tau_s:
                r["qacg_faster"] = r["t_qacg_opt"] < r["t_hpcg"]
                r["is_crossover"] = r["n_grid"] == first
    return rows


def _resource_point(args) -> dict:
    n, model = args
    full = full_hhl_estimate(n, model)
    split: SplitResult = optimize_cutoff(n, model)
    qacg = qacg_runtime(n, split.kappa_q, split.kappa_c, model).estimate
    row = {"n_grid": n, "tau_s": model.star.tau_s, "j": split.window_mode_index_j, "kappa_q": split.kappa_q}
    for tag, est in (("full", full), ("qacg", qacg)):
        c = est.counts.total.clamped()
        row.update({
            f"{tag}_h": c.h,
            f"{tag}_s": c.s,
            f"{tag}_cnot": c.cnot,
            f"{tag}_rz": c.rz,
            f"{tag}_qubits": est.qubits,
        })
    return row


def resource_sweep_rows(n_grids, models, executor: Executor | None = None) -> list[dict]:
    """Gate counts and logical qubits, full HHL against optimized QACG."""
    return _map(_resource_point, [(n, m) for m in models for n in n_grids], executor)


def inv_params_rows(n_grids, model: CostModel) -> list[dict]:
    """Eigenvalue-inversion parameters of full HHL at each size."""
    rows = []
    for n in n_grids:
        lam1, lam_max = lambda_extremes_zero_mean(Grid1D(n), model.dims)
        kappa = lam_max / lam1
        if model.normalize_spectrum:
            lam1, lam_max = lam1 / lam_max, 1.0
        nl = n_lambda_bits(kappa, model.eps, model.log_base)
        ip = inversion_params(nl, kappa, model.eps, lam1, lam_max, model.p_par, model.log_base)
        rows.append({
            "n_grid": n,
            "kappa": kappa,
            "n_lambda": nl,
            "a": ip.a_break,
            "t": ip.t_evol,
            "c": ip.c_scale,
            "rho": ip.rho_ell,
            "deg": ip.deg_poly,
            "M": ip.m_pieces,
        })
    return rows


def _kappa_point(args) -> dict:
    n, model = args
    split = optimize_cutoff(n, model)
    return {
        "n_grid": n,
        "tau_s": model.star.tau_s,
        "kappa": full_condition_number(n, model.dims),
        "kappa_q": split.kappa_q,
        "kappa_c": split.kappa_c,
        "j": split.window_mode_index_j,
    }


def kappa_scaling_rows(n_grids, models, executor: Executor | None = None) -> list[dict]:
    """Full condition number and its optimized split per (size, device model)."""
    return _map(_kappa_point, [(n, m) for m in models for n in n_grids], executor)

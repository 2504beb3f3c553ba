"""Warm-startable conjugate gradients with residual instrumentation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

LinearOperator = Callable[[np.ndarray], np.ndarray]


class CgBreakdown(ArithmeticError):
    """Raised when p^T A p <= 0 or the recurrence produces non-finite values."""

    def __init__(self, iteration: int, detail: str):
        super().__init__(f"CG breakdown at iteration {iteration}: {detail}")
        self.iteration = iteration


@dataclass(frozen=True)
class CgConfig:
    rel_tolerance: float = 1e-6
    max_iterations: int | None = None  # None -> 10 x the bound if kappa is known, else 10 * len(b)

    def __post_init__(self):
        if not 0.0 < self.rel_tolerance < 1.0:
            raise ValueError("rel_tolerance must lie in (0, 1)")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class SolveReport:
    """Outcome of one CG solve.

    ``residual_history[k]`` is the recursive ``||r_k|| / ||b||``, so the list has
    ``iterations + 1`` entries.  ``true_residual`` is recomputed from ``b - A x``
    once at the end.
    """

    solution: np.ndarray
    iterations: int
    residual_history: list[float]
    converged: bool
    true_residual: float = math.nan
    initial_residual: float = math.nan
    b_norm: float = math.nan
    extra: dict = field(default_factory=dict)

    @property
    def absolute_residual_history(self) -> list[float]:
        return [r * self.b_norm for r in self.residual_history]

    def to_json(self) -> dict:
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "residual_history": [float(r) for r in self.residual_history],
        }


def _project_zero_mean(v: np.ndarray) -> np.ndarray:
    return v - v.mean()


def cg_solve(
    apply: LinearOperator,
    b,
    x0=None,
    cfg: CgConfig | None = None,
    zero_mean: bool = False,
    kappa: float | None = None,
) -> SolveReport:
    """Solve ``A x = b`` for SPD ``A`` given only ``apply(v) = A v``.

    Stops once ``||r_k|| / ||b|| <= cfg.rel_tolerance``.  With ``zero_mean`` the
    right-hand side and the start vector are projected onto the zero-sum
    subspace at entry (the singular periodic Laplacian), and the final
    solution is projected again to remove round-off drift.  A known
    condition number ``kappa`` tightens the default iteration cap.
    """
    cfg = cfg or CgConfig()
    b = np.array(b, dtype=float)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    if x.shape != b.shape:
        raise ValueError(f"x0 shape {x.shape} does not match b shape {b.shape}")
    if zero_mean:
        b = _project_zero_mean(b)
        x = _project_zero_mean(x)
    if cfg.max_iterations is not None:
        max_it = cfg.max_iterations
    elif kappa is not None:
        max_it = 10 * cg_iteration_bound(kappa, cfg.rel_tolerance)
    else:
        max_it = 10 * max(b.size, 1)

    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return SolveReport(np.zeros_like(b), 0, [0.0], True, 0.0, 0.0, 0.0)

    r = b - apply(x)
    p = r.copy()
    rr = float(r @ r)
    history = [math.sqrt(rr) / b_norm]
    k = 0
    while history[-1] > cfg.rel_tolerance and k < max_it:
        Ap = apply(p)
        pAp = float(p @ Ap)
        if not (pAp > 0.0 and math.isfinite(pAp)):
            raise CgBreakdown(k, f"p^T A p = {pAp!r}")
        alpha = rr / pAp
        x += alpha * p
        r -= alpha * Ap
        rr_new = float(r @ r)
        if not math.isfinite(rr_new):
            raise CgBreakdown(k, "non-finite residual")
        p = r + (rr_new / rr) * p
        rr = rr_new
        k += 1
        history.append(math.sqrt(rr) / b_norm)

    if zero_mean:
        x = _project_zero_mean(x)
    true_res = float(np.linalg.norm(b - apply(x))) / b_norm
    return SolveReport(
        solution=x,
        iterations=k,
        residual_history=history,
        converged=history[-1] <= cfg.rel_tolerance,
        true_residual=true_res,
        initial_residual=history[0],
        b_norm=b_norm,
    )


def cg_iteration_bound(kappa: float, eps: float) -> int:
    """Iterations sufficient for an ``eps`` relative A-norm error reduction."""
    if kappa < 1.0:
        raise ValueError("kappa must be >= 1")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    return math.ceil(cg_iteration_factor(kappa, eps))


def cg_iteration_factor(kappa: float, eps: float) -> float:
    """Unrounded ``0.5 * sqrt(kappa) * ln(2 / eps)``."""
    return 0.5 * math.sqrt(kappa) * math.log(2.0 / eps)


def dense_solve_oracle(A, b) -> np.ndarray:
    """Cholesky solve of a dense SPD system; rejects non-SPD input."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] != b.shape[0]:
        raise ValueError("A must be square and match b")
    if A.shape[0] > 4096:
        raise ValueError("dense oracle limited to n <= 4096")
    if not np.allclose(A, A.T, rtol=0, atol=1e-12 * max(np.abs(A).max(), 1.0)):
        raise ValueError("matrix is not symmetric")
    try:
        factor = scipy.linalg.cho_factor(A)
    except np.linalg.LinAlgError as exc:
        raise ValueError("matrix is not positive definite") from exc
    return scipy.linalg.cho_solve(factor, b)

"""Logical gate counts over the STAR gate set {H, S, CNOT, R_Z}.

Every block of the HHL-with-amplitude-amplification circuit for the 3D
periodic Laplacian has a closed-form count.  Counts are kept in real
arithmetic exactly as the formulas give them (some are half-integers or
even negative at tiny parameters); clamping to zero happens only where a
count is turned into time or qubits.

Register conventions: ``q`` is the number of qubits per spatial dimension
(so the system register has ``3q`` qubits) and ``n_lambda`` is the size of
the eigenvalue register.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

LOG_BASES = {2: math.log2, "e": math.log, 10: math.log10}


class GateCountDomainError(ValueError):
    """A closed-form count was asked for outside its stated domain."""


@dataclass(frozen=True)
class GateCounts:
    h: float = 0.0
    s: float = 0.0
    cnot: float = 0.0
    rz: float = 0.0
    ancilla: int = 0

    def __add__(self, other: "GateCounts") -> "GateCounts":
        return GateCounts(
            self.h + other.h,
            self.s + other.s,
            self.cnot + other.cnot,
            self.rz + other.rz,
            max(self.ancilla, other.ancilla),
        )

    def scaled(self, k: float) -> "GateCounts":
        return GateCounts(k * self.h, k * self.s, k * self.cnot, k * self.rz, self.ancilla)

    def clamped(self) -> "GateCounts":
        return GateCounts(max(self.h, 0.0), max(self.s, 0.0), max(self.cnot, 0.0), max(self.rz, 0.0), max(self.ancilla, 0))

    @property
    def total(self) -> float:
        return self.h + self.s + self.cnot + self.rz

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.h, self.s, self.cnot, self.rz)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class InversionParams:
    """Parameters of the piecewise-polynomial reciprocal.

    ``a_break`` is the lower end of the domain ``[a, 2^n_lambda - 1]``,
    ``rho_ell`` the Bernstein-ellipse parameter, ``deg_poly`` the polynomial
    degree and ``m_pieces`` the number of subintervals.
    """

    a_break: float
    t_evol: float
    c_scale: float
    rho_ell: float
    deg_poly: int
    m_pieces: int
    p_par: int = 1

    def __post_init__(self):
        if not self.a_break > 0:
            raise GateCountDomainError("a_break must be positive")
        if self.m_pieces < 1:
            raise GateCountDomainError("m_pieces must be >= 1")
        if self.deg_poly < 0:
            raise GateCountDomainError("deg_poly must be >= 0")


@dataclass(frozen=True)
class RegisterSizes:
    q_dim: int
    n_lambda: int
    m_fsl: int = 10

    def __post_init__(self):
        if self.q_dim < 1 or self.n_lambda < 1 or self.m_fsl < 1:
            raise GateCountDomainError("register sizes must be >= 1")


def qubits_per_dim(n_grid: int) -> int:
    """``ceil(log2 n_grid)``, at least one qubit."""
    return max(1, math.ceil(math.log2(n_grid)))


def _ceil_log2(m: int) -> int:
    return 0 if m <= 1 else math.ceil(math.log2(m))


# --- primitives -----------------------------------------------------------

_PRIMITIVES = {
    "T": GateCounts(rz=1),
    "Toffoli": GateCounts(h=2, cnot=7, rz=7),
    "CH": GateCounts(h=2, s=2, cnot=1, rz=2),
}


def primitive_counts(primitive: str) -> GateCounts:
    try:
        return _PRIMITIVES[primitive]
    except KeyError:
        raise GateCountDomainError(f"unknown primitive {primitive!r}; expected T, Toffoli or CH") from None


def mcx_counts(k_controls: int) -> GateCounts:
    """k-controlled X from 8(k-5) Toffolis and k-2 ancillas.

    The formula is non-positive for k <= 5, so those are rejected.
    """
    if k_controls < 6:
        raise GateCountDomainError(f"MCX count formula needs k >= 6, got {k_controls}")
    k5 = k_controls - 5
    return GateCounts(h=16 * k5, cnot=56 * k5, rz=56 * k5, ancilla=k_controls - 2)


def qft_counts(q: int) -> GateCounts:
    if q < 1:
        raise GateCountDomainError("QFT needs q >= 1")
    return GateCounts(h=q, cnot=q * (q + 1), rz=q * (q + 1))


def diag_unitary_counts(q: int) -> GateCounts:
    """Diagonal phase e^{-i xi^2} on q qubits."""
    if q < 2:
        raise GateCountDomainError("diagonal unitary formula needs q >= 2")
    return GateCounts(cnot=(q + 1) * (q - 2) / 2, rz=q * (q - 1) / 2)


def cuk_counts(q: int, k_power: int = 1) -> GateCounts:
    """Controlled U^k for the 3D Laplacian, k sequential applications of U."""
    if q < 1 or k_power < 1:
        raise GateCountDomainError("cuk needs q >= 1 and k >= 1")
    k = k_power
    return GateCounts(
        h=k * (15 * q * q + 21 * q - 6),
        s=12 * k * q,
        cnot=k * (135 * q * q / 2 + 93 * q / 2 - 21),
        rz=k * (135 * q * q / 2 + 105 * q / 2 - 21),
    )


def qpe_counts(q: int, n_lambda: int) -> GateCounts:
    """QPE: Hadamard layer, n_lambda controlled powers (each priced as C-U), inverse QFT."""
    if n_lambda < 1:
        raise GateCountDomainError("n_lambda must be >= 1")
    cu = cuk_counts(q, 1)
    nl = n_lambda
    return GateCounts(
        h=nl * cu.h + 2 * nl,
        s=nl * cu.s,
        cnot=nl * cu.cnot + nl * (nl + 1),
        rz=nl * cu.rz + nl * (nl + 1),
    )


def fsl_counts(q: int, m_fsl: int) -> GateCounts:
    """3D Fourier-series loader: 3 inverse QFTs, 3 cascaded entanglers, 3 CNOT ladders."""
    if not 1 <= m_fsl <= q - 1:
        raise GateCountDomainError(f"FSL needs 1 <= m <= q-1, got q={q}, m={m_fsl}")
    m = m_fsl
    p = 2 ** (m + 2)
    return GateCounts(
        h=3 * q + 3 * (p - 4),
        s=3 * (p - 4),
        cnot=3 * q * (q + 1) + 3 * (p - 4 * m - 4) + 3 * (q - m - 1),
        rz=3 * q * (q + 1) + 3 * (p - 5),
    )


# --- parameter formulas ----------------------------------------------------


def log_function(base):
    try:
        return LOG_BASES[base]
    except KeyError:
        raise GateCountDomainError(f"log base must be one of {list(LOG_BASES)}, got {base!r}") from None


def n_lambda_bits(kappa: float, eps: float, log_base=2) -> int:
    """Eigenvalue-register size ``3 (floor(log(2(2 kappa^2 - eps)/eps + 1)) + 1)``."""
    if kappa < 1.0:
        raise GateCountDomainError("kappa must be >= 1")
    if not 0.0 < eps < 1.0:
        raise GateCountDomainError("eps must lie in (0, 1)")
    log = log_function(log_base)
    return 3 * (math.floor(log(2.0 * (2.0 * kappa * kappa - eps) / eps + 1.0)) + 1)


def inversion_params(
    n_lambda: int,
    kappa: float,
    eps: float,
    lambda_min: float,
    lambda_max: float,
    p_par: int = 1,
    log_base=2,
) -> InversionParams:
    if not lambda_max > lambda_min > 0:
        raise GateCountDomainError("need lambda_max > lambda_min > 0")
    log = log_function(log_base)
    two_n = 2.0**n_lambda
    a = two_n ** (2.0 / 3.0)
    t = 2.0 * math.pi * (two_n - 1.0) / (two_n * lambda_max)
    c = two_n * t * lambda_min / (2.0 * math.pi)
    ratio = 2.0 * c / a
    rho = ratio + math.sqrt(abs(1.0 - ratio * ratio))
    arg = 1.0 + 16.23 * math.sqrt(math.log(rho) ** 2 + (math.pi / 2) ** 2) * kappa * (2.0 * kappa - eps) / eps
    deg = math.floor(log(arg))
    m_pieces = math.ceil(math.log((two_n - 1.0) / a, 5))
    for name, val in (("t", t), ("c", c), ("rho", rho), ("deg", deg)):
        if not math.isfinite(val):
            raise GateCountDomainError(f"non-finite inversion parameter {name}")
    return InversionParams(a, t, c, rho, max(deg, 0), max(m_pieces, 1), p_par)


def inversion_toffoli_count(n_lambda: int, ip: InversionParams) -> float:
    """Toffolis for labeling plus parallel Horner evaluation of the reciprocal."""
    nl, d, p, M = n_lambda, ip.deg_poly, ip.p_par, ip.m_pieces
    return (
        1.5 * nl * nl * d
        + 3 * nl * p * d
        + 3.5 * nl * d
        - 1.5 * p * p * d
        + 3 * p * d
        - d
        + 2 * M * d * (4 * d * _ceil_log2(M) - 8)
        + 4 * M * nl
    )


def inversion_counts(toffoli_total: float) -> GateCounts:
    return GateCounts(h=2 * toffoli_total, cnot=7 * toffoli_total, rz=7 * toffoli_total)


def hhl_single_shot_counts(
    regs: RegisterSizes,
    kappa: float,
    eps: float,
    p_par: int = 1,
    lambda_min: float = 1.0,
    lambda_max: float | None = None,
    inv: InversionParams | None = None,
    log_base=2,
) -> GateCounts:
    """FSL + QPE + eigenvalue inversion (no QPE uncomputation).

    ``inv`` overrides the derived inversion parameters; by default they come
    from :func:`inversion_params` with ``lambda_max = kappa * lambda_min``.
    """
    if inv is None:
        lmax = kappa * lambda_min if lambda_max is None else lambda_max
        if lmax <= lambda_min:
            lmax = lambda_min * (1.0 + 1e-12)
        inv = inversion_params(regs.n_lambda, kappa, eps, lambda_min, lmax, p_par, log_base)
    toff = max(inversion_toffoli_count(regs.n_lambda, inv), 0.0)
    return fsl_counts(regs.q_dim, regs.m_fsl) + qpe_counts(regs.q_dim, regs.n_lambda) + inversion_counts(toff)


def diffusion_counts(q: int, n_lambda: int) -> GateCounts:
    """Reflection U_0 about |0>: MCX on the system and eigenvalue registers plus X gates."""
    if 3 * q + n_lambda < 6:
        raise GateCountDomainError("diffusion formula needs 3q + n_lambda >= 6")
    nl = n_lambda
    return GateCounts(
        h=60 * q + 20 * nl - 90,
        s=12 * q + 4 * nl + 4,
        cnot=168 * q + 56 * nl - 336,
        rz=168 * q + 56 * nl - 336,
        ancilla=3 * q + nl - 2,
    )


@dataclass(frozen=True)
class AmplifiedCounts:
    total: GateCounts
    per_iteration: GateCounts
    single_shot: GateCounts
    k_aa: float
    regs: RegisterSizes
    inv: InversionParams


def amplification_iterations(kappa: float, eps: float) -> float:
    return kappa / (1.0 - eps)


def aa_total_counts(
    regs: RegisterSizes,
    kappa: float,
    eps: float,
    p_par: int = 1,
    lambda_min: float = 1.0,
    lambda_max: float | None = None,
    log_base=2,
    uncompute: bool = False,
    inv: InversionParams | None = None,
) -> AmplifiedCounts:
    """HHL with amplitude amplification: ``k_aa`` rounds of ``U_s U_omega``.

    One round costs two HHL blocks, the diffusion operator and two S gates
    for the phase oracle.  ``k_aa = kappa / (1 - eps)`` stays real-valued.
    ``uncompute`` appends one inverse QPE after the last round.
    """
    if not eps < 1.0:
        raise GateCountDomainError("eps must be < 1")
    if inv is None:
        lmax = kappa * lambda_min if lambda_max is None else lambda_max
        if lmax <= lambda_min:
            lmax = lambda_min * (1.0 + 1e-12)
        inv = inversion_params(regs.n_lambda, kappa, eps, lambda_min, lmax, p_par, log_base)
    single = hhl_single_shot_counts(regs, kappa, eps, p_par, inv=inv, log_base=log_base)
    per_iter = single.scaled(2) + diffusion_counts(regs.q_dim, regs.n_lambda) + GateCounts(s=2)
    k_aa = amplification_iterations(kappa, eps)
    total = per_iter.scaled(k_aa)
    if uncompute:
        total = total + qpe_counts(regs.q_dim, regs.n_lambda)
    return AmplifiedCounts(total, per_iter, single, k_aa, regs, inv)


def logical_qubit_count(regs: RegisterSizes, deg_poly: int, m_pieces: int) -> int:
    """Peak qubits: system, eigenvalue register, flag, inversion workspace, MCX ancillas."""
    q, nl = regs.q_dim, regs.n_lambda
    workspace = deg_poly * nl + _ceil_log2(m_pieces) + 1
    mcx_ancilla = 3 * q + nl - 2
    return max(3 * q + nl + 1 + workspace + mcx_ancilla, 0)


def register_sizes(n_grid: int, kappa: float, eps: float, m_fsl: int = 10, log_base=2) -> RegisterSizes:
    return RegisterSizes(qubits_per_dim(n_grid), n_lambda_bits(kappa, eps, log_base), m_fsl)

import itertools
import math
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from qacg.gatecount import (
    GateCountDomainError,
    GateCounts,
    InversionParams,
    RegisterSizes,
    aa_total_counts,
    cuk_counts,
    diag_unitary_counts,
    diffusion_counts,
    fsl_counts,
    hhl_single_shot_counts,
    inversion_counts,
    inversion_params,
    inversion_toffoli_count,
    logical_qubit_count,
    mcx_counts,
    n_lambda_bits,
    primitive_counts,
    qft_counts,
    qpe_counts,
    qubits_per_dim,
)


def counts(h=0, s=0, cnot=0, rz=0):
    return (h, s, cnot, rz)


# --- primitives and blocks: published examples ------------------------------------


def test_primitives():
    assert primitive_counts("T").as_tuple() == counts(rz=1)
    assert primitive_counts("Toffoli").as_tuple() == counts(h=2, cnot=7, rz=7)
    assert primitive_counts("CH").as_tuple() == counts(h=2, s=2, cnot=1, rz=2)
    with pytest.raises(GateCountDomainError):
        primitive_counts("CCZ")


def test_mcx_examples():
    c = mcx_counts(6)
    assert c.as_tuple() == counts(h=16, cnot=56, rz=56) and c.ancilla == 4
    assert mcx_counts(10).as_tuple() == counts(h=80, cnot=280, rz=280)
    assert mcx_counts(10).as_tuple() == primitive_counts("Toffoli").scaled(40).as_tuple()
    with pytest.raises(GateCountDomainError):
        mcx_counts(5)


@given(k=st.integers(6, 500))
def test_mcx_linear_increment(k):
    d = [b - a for a, b in zip(mcx_counts(k).as_tuple(), mcx_counts(k + 1).as_tuple())]
    assert d == [16, 0, 56, 56]


def test_qft_examples():
    assert qft_counts(1).as_tuple() == counts(h=1, cnot=2, rz=2)
    assert qft_counts(3).as_tuple() == counts(h=3, cnot=12, rz=12)
    assert qft_counts(8).as_tuple() == counts(h=8, cnot=72, rz=72)


def test_diag_examples():
    assert diag_unitary_counts(2).as_tuple() == counts(cnot=0, rz=1)
    assert diag_unitary_counts(4).as_tuple() == counts(cnot=5, rz=6)
    assert diag_unitary_counts(3).as_tuple() == counts(cnot=2, rz=3)


def test_cuk_examples():
    assert cuk_counts(2, 1).as_tuple() == counts(h=96, s=24, cnot=342, rz=354)
    # 135/2 + 93/2 - 21 = 93 and 135/2 + 105/2 - 21 = 99
    assert cuk_counts(1, 1).as_tuple() == counts(h=30, s=12, cnot=93, rz=99)
    # q(135q + 93)/2 is always an integer, so no half-integer counts arise
    assert all(float(cuk_counts(q, 1).cnot).is_integer() for q in range(1, 40))
    for q in range(1, 12):
        assert cuk_counts(q, 2).as_tuple() == cuk_counts(q, 1).scaled(2).as_tuple()


def test_qpe_examples():
    assert qpe_counts(2, 1).as_tuple() == counts(h=98, s=24, cnot=344, rz=356)
    for q, nl in itertools.product(range(1, 6), range(1, 8)):
        assert qpe_counts(q, nl).h - nl * cuk_counts(q, 1).h == 2 * nl


def test_qpe_finite_difference():
    for q, nl in itertools.product(range(1, 6), range(2, 10)):
        d = [b - a for a, b in zip(qpe_counts(q, nl - 1).as_tuple(), qpe_counts(q, nl).as_tuple())]
        cu = cuk_counts(q, 1)
        qd = [b - a for a, b in zip(qft_counts(nl - 1).as_tuple(), qft_counts(nl).as_tuple())]
        assert d == [cu.h + 1 + qd[0], cu.s, cu.cnot + qd[2], cu.rz + qd[3]]


def test_fsl_examples():
    assert fsl_counts(4, 1).as_tuple() == counts(h=24, s=12, cnot=66, rz=69)
    c = fsl_counts(12, 10)
    assert c.cnot == 3 * 12 * 13 + 3 * (2**12 - 44) + 3 * (12 - 10 - 1)
    # ladder term alone: q=5, m=3 -> 3(q-m-1) = 3
    assert fsl_counts(5, 3).cnot - (3 * 5 * 6 + 3 * (2**5 - 16)) == 3
    with pytest.raises(GateCountDomainError):
        fsl_counts(4, 4)


def test_diffusion_examples():
    assert diffusion_counts(2, 1).as_tuple() == counts(h=50, s=32, cnot=56, rz=56)
    for q, nl in itertools.product(range(1, 8), range(3, 12)):
        c, c1 = diffusion_counts(q, nl), diffusion_counts(q, nl + 1)
        assert c.cnot == c.rz
        assert [b - a for a, b in zip(c.as_tuple(), c1.as_tuple())] == [20, 4, 56, 56]
    with pytest.raises(GateCountDomainError):
        diffusion_counts(1, 2)


# --- parameter formulas ------------------------------------------------------------


def test_n_lambda_examples():
    assert n_lambda_bits(1.0, 1e-6) == 66
    assert math.floor(math.log2(2 * (2 - 1e-6) / 1e-6 + 1)) == 21
    assert n_lambda_bits(2.0, 1e-6) == 72


@given(k1=st.floats(1.0, 1e9), k2=st.floats(1.0, 1e9), e1=st.floats(1e-10, 0.5), e2=st.floats(1e-10, 0.5))
def test_n_lambda_monotone(k1, k2, e1, e2):
    lo, hi = sorted((k1, k2))
    assert n_lambda_bits(lo, 1e-6) <= n_lambda_bits(hi, 1e-6)
    small, big = sorted((e1, e2))
    assert n_lambda_bits(10.0, big) <= n_lambda_bits(10.0, small)


def test_n_lambda_log_bases():
    assert n_lambda_bits(1.0, 1e-6, "e") < n_lambda_bits(1.0, 1e-6, 2)
    with pytest.raises(GateCountDomainError):
        n_lambda_bits(1.0, 1e-6, 3)


def test_inversion_params_examples():
    ip = inversion_params(6, 4.0, 1e-6, 1.0, 4.0)
    assert ip.a_break == pytest.approx(16.0, rel=1e-15)
    assert ip.t_evol == pytest.approx(2 * math.pi * 63 / (64 * 4), rel=1e-15)
    assert ip.t_evol == pytest.approx(1.5463, abs=1e-4)
    assert ip.c_scale == pytest.approx(15.75, rel=1e-14)
    assert ip.m_pieces == 1
    with pytest.raises(GateCountDomainError):
        inversion_params(6, 4.0, 1e-6, 4.0, 1.0)


@given(k1=st.floats(1.0, 1e8), k2=st.floats(1.0, 1e8))
def test_deg_monotone_in_kappa(k1, k2):
    lo, hi = sorted((k1, k2))
    d_lo = inversion_params(90, lo, 1e-6, 1.0, 50.0).deg_poly
    d_hi = inversion_params(90, hi, 1e-6, 1.0, 50.0).deg_poly
    assert d_lo <= d_hi


def test_toffoli_examples():
    base = dict(a_break=1.0, t_evol=1.0, c_scale=1.0, rho_ell=1.0)
    assert inversion_toffoli_count(2, InversionParams(**base, deg_poly=1, m_pieces=1)) == 11.5
    assert inversion_toffoli_count(7, InversionParams(**base, deg_poly=0, m_pieces=3)) == 4 * 3 * 7
    big = inversion_toffoli_count(66, InversionParams(**base, deg_poly=40, m_pieces=9))
    assert big == pytest.approx(float(oracles.toffoli_inversion(66, 40, 1, 9)), rel=1e-9)


def test_inversion_counts_examples():
    assert inversion_counts(0).as_tuple() == counts()
    assert inversion_counts(1).as_tuple() == primitive_counts("Toffoli").as_tuple()
    assert inversion_counts(11.5).as_tuple() == counts(h=23, cnot=80.5, rz=80.5)


def test_single_shot_composition():
    regs = RegisterSizes(2, 1, 1)
    ip = InversionParams(1.0, 1.0, 1.0, 1.0, deg_poly=0, m_pieces=1)
    got = hhl_single_shot_counts(regs, 2.0, 1e-6, inv=ip)
    want = fsl_counts(2, 1) + qpe_counts(2, 1) + GateCounts(h=8, cnot=28, rz=28)
    assert got.as_tuple() == want.as_tuple()


def test_aa_examples():
    regs = RegisterSizes(4, n_lambda_bits(1.0, 1e-6), 3)
    one = aa_total_counts(regs, 1.0, 1e-6, lambda_min=1.0, lambda_max=2.0)
    assert one.k_aa == pytest.approx(1.000001, rel=1e-9)
    assert one.per_iteration.s == 2 * one.single_shot.s + diffusion_counts(4, regs.n_lambda).s + 2
    two = aa_total_counts(regs, 2.0, 1e-6, inv=one.inv)
    assert two.k_aa == 2 * one.k_aa
    up = aa_total_counts(regs, 1.0, 1e-6, lambda_min=1.0, lambda_max=2.0, uncompute=True)
    assert up.total.h - one.total.h == pytest.approx(qpe_counts(4, regs.n_lambda).h)


def test_logical_qubits_examples():
    regs = RegisterSizes(2, 6)
    assert logical_qubit_count(regs, 3, 2) == 43
    assert logical_qubit_count(regs, 0, 1) == 6 * 2 + 2 * 6
    assert logical_qubit_count(regs, 4, 2) > logical_qubit_count(regs, 3, 2)


def test_qubits_per_dim():
    assert [qubits_per_dim(n) for n in (2, 3, 4, 1024, 1025)] == [1, 2, 2, 10, 11]


# --- exact re-derivation over a 200-point lattice --------------------------------

LATTICE = list(itertools.product(range(2, 12), range(1, 21)))  # (q, n_lambda)


def test_lattice_has_200_points():
    assert len(LATTICE) == 200


@pytest.mark.parametrize("q,nl", LATTICE)
def test_exact_rederivation(q, nl):
    assert oracles.as_fractions(qpe_counts(q, nl)) == oracles.qpe(q, nl)
    assert oracles.as_fractions(qft_counts(q)) == oracles.qft(q)
    assert oracles.as_fractions(diag_unitary_counts(q)) == oracles.diag_unitary(q)
    assert oracles.as_fractions(cuk_counts(q, nl)) == oracles.cu_power(q, nl)
    assert oracles.as_fractions(mcx_counts(q + nl + 5)) == oracles.mcx(q + nl + 5)
    if 3 * q + nl >= 6:
        assert oracles.as_fractions(diffusion_counts(q, nl)) == oracles.diffusion(q, nl)
    m = 1 + (q + nl) % (q - 1)
    assert oracles.as_fractions(fsl_counts(q, m)) == oracles.fsl(q, m)
    d, M, p = nl % 7, 1 + nl % 5, 1 + q % 3
    ip = InversionParams(1.0, 1.0, 1.0, 1.0, d, M, p)
    T = inversion_toffoli_count(nl, ip)
    assert F(T) == oracles.toffoli_inversion(nl, d, p, M)
    assert oracles.as_fractions(inversion_counts(T)) == oracles.inversion(F(T))
    assert logical_qubit_count(RegisterSizes(q, nl), d, M) == oracles.qubits(q, nl, d, M)


# --- aggregate properties -----------------------------------------------------------


@given(q=st.integers(2, 14), k1=st.floats(1.0, 1e6), k2=st.floats(1.0, 1e6))
def test_aa_counts_monotone_in_kappa(q, k1, k2):
    lo, hi = sorted((k1, k2))
    m = max(1, min(10, q - 1))

    def total(k):
        regs = RegisterSizes(q, n_lambda_bits(k, 1e-6), m)
        return aa_total_counts(regs, k, 1e-6, lambda_min=1.0, lambda_max=max(k, 1.0 + 1e-9)).total.clamped()

    a, b = total(lo), total(hi)
    assert all(x <= y * (1 + 1e-12) for x, y in zip(a.as_tuple(), b.as_tuple()))


def test_window_counts_strictly_below_full():
    q, kappa = 10, 3.0e5
    m = 9
    full = aa_total_counts(RegisterSizes(q, n_lambda_bits(kappa, 1e-6), m), kappa, 1e-6, lambda_min=1.0, lambda_max=kappa)
    for kq in (1.0, 10.0, 1e3):
        part = aa_total_counts(RegisterSizes(q, n_lambda_bits(kq, 1e-6), m), kq, 1e-6,
                               lambda_min=1.0, lambda_max=max(kq, 1.0 + 1e-9))
        assert all(x < y for x, y in zip(part.total.as_tuple(), full.total.as_tuple()))


def test_gatecounts_arithmetic():
    a = GateCounts(1, 2, 3, 4, ancilla=5)
    b = GateCounts(-1, 0, 1, 0, ancilla=2)
    c = a + b
    assert c.as_tuple() == (0, 2, 4, 4) and c.ancilla == 5
    assert GateCounts(-3, 1, 0, 0).clamped().as_tuple() == (0, 1, 0, 0)
    assert a.total == 10
    assert a.to_dict()["ancilla"] == 5

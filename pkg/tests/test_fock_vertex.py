from fractions import Fraction

import pytest

from qvoa.fock import (FockError, FockSlice, OscillatorAlgebra, SparseMatrix, Weight,
                       colored_partition_counts, mode_matrix, safe_degree, zero_mode_eigenvalue)
from qvoa.rules import Rule
from qvoa.scalar import q_pow
from qvoa.series import PowerSeries
from qvoa.sl2 import ModelConfig, make_algebra
from qvoa.vertex import (VertexOp, contract, contraction_bilinearity_check, mode_matrices,
                         normal_product, oracle_contraction_check)

N = 12


@pytest.fixture(scope="module")
def h3():
    return make_algebra(1)


def test_basis_sizes(h3):
    w = Weight.zero(3)
    assert FockSlice(h3, w, 0).dim == 1
    assert FockSlice(h3, w, 1).dim == 1 + 3
    assert FockSlice(h3, w, 2).dim == 1 + 3 + 9
    assert colored_partition_counts(3, 2)[:3] == [1, 3, 9]


def test_gram_symmetric_and_signs(h3):
    for m in range(1, 5):
        assert h3.gram(0, 1, m) == h3.gram(1, 0, m)
    assert h3.gram(1, 1, 1) == -h3.gram(0, 0, 1)


def test_annihilator_kills_vacuum(h3):
    sl = FockSlice(h3, Weight.zero(3), 3)
    assert not mode_matrix(sl, "alpha", 1).column(0)


def test_commutator_is_gram_times_identity(h3):
    D = 4
    sl = FockSlice(h3, Weight.zero(3), D)
    for m in (1, 2):
        for a in ("alpha", "beta"):
            ann, cre = mode_matrix(sl, a, m), mode_matrix(sl, a, -m)
            comm = ann @ cre - cre @ ann
            keep = sl.indices_up_to(D - m)
            g = h3.gram(h3.index[a], h3.index[a], m)
            assert comm.restrict(keep, keep) == SparseMatrix.identity(sl.dim).scale(g).restrict(keep, keep)


def test_zero_mode_eigenvalue():
    cfg = ModelConfig(k=1, sector=(Fraction(1, 2), 1, Fraction(-1, 2)))
    sl = FockSlice(make_algebra(1), cfg.weight(), 2)
    assert zero_mode_eigenvalue(sl, "alpha") == 2
    assert zero_mode_eigenvalue(sl, "abar") == 1
    assert zero_mode_eigenvalue(sl, "beta") == 1


def test_safe_degree(h3):
    sl = FockSlice(h3, Weight.zero(3), 4)
    assert safe_degree(sl, 1) == 3
    assert safe_degree(sl, 2, 1) == 1
    assert safe_degree(sl) == 4


def test_conflicting_gram_rejected():
    with pytest.raises(FockError):
        OscillatorAlgebra(["a"], {("a", "b"): Rule("1")})


def test_fermion_contraction(cat1):
    r = contract(cat1.op("Sp"), cat1.op("Sp"), N)
    assert r.z_power == 1
    assert r.series == PowerSeries.from_polynomial([1, -1], N)
    assert r.factor_text() == "z^1*(1 - w/z)"


def test_trivial_and_zz(cat1):
    from qvoa.rules import Rule as R
    assert contract(cat1.op("Zm"), cat1.op("Zp"), N).is_trivial()
    r = contract(cat1.op("Zp"), cat1.op("Zm"), N)
    from qvoa.series import series_log
    logs = series_log(r.series)
    alt = R("(-qpow(4*m) - 1 + 2*qpow(2*m))*(qpow(k*m) - qpow(-k*m))/((1 - qpow(4*m))*m)", {"k": 1})
    assert all(logs[m] == alt(m) for m in range(1, N + 1))


def test_identity_contracts_trivially(cat1):
    one = VertexOp.identity(cat1.algebra)
    assert contract(one, cat1.op("Sp"), N).is_trivial()
    assert normal_product(cat1.op("Sp"), one).same_as(cat1.op("Sp"), N)


def test_phi_term_is_product(cat1):
    k = 1
    p = normal_product(normal_product(cat1.op("Ybarp"), cat1.op("Zp"), 0, Fraction(-(k + 2), 2)),
                       cat1.op("Wp"), 0, Fraction(-k, 2))
    assert p.same_as(cat1.op("Phi1p"), N)
    assert cat1.sums["PhiPlus"].terms[0].coeff == 1 / (q_pow(1) - q_pow(-1))


def test_lattice_shift_composes(cat1):
    p = normal_product(cat1.op("Yp"), cat1.op("Yp"))
    assert p.shift.amounts == (4, -4, 0)


def test_rescale_scales_coefficients(cat1):
    op = cat1.op("Sp")
    j = Fraction(3, 2)
    r = op.rescaled(j)
    for m in range(1, 5):
        for i, rule in op.minus.items():
            assert r.minus[i](m) == rule(m) * q_pow(j * m)
        for i, rule in op.plus.items():
            assert r.plus[i](m) == rule(m) * q_pow(-j * m)


def test_identity_modes(h3):
    sl = FockSlice(h3, Weight.zero(3), 2)
    mats = mode_matrices(VertexOp.identity(h3), sl, range(-1, 2))
    assert mats[0] == SparseMatrix.identity(sl.dim)
    assert mats[1].is_zero() and mats[-1].is_zero()


def test_vacuum_element_is_prefactor(h3):
    op = VertexOp(h3, prefactor=q_pow(2), minus={"alpha": Rule("1/m")}, plus={"beta": Rule("qpow(m)")})
    sl = FockSlice(h3, Weight.zero(3), 2)
    assert mode_matrices(op, sl, [0])[0].entry(0, 0) == q_pow(2)


def test_fermion_by_matrix_oracle(cat1, cfg1):
    sl = FockSlice(cat1.algebra, cfg1.weight(), 4)
    ok, compared = oracle_contraction_check(cat1.op("Sp"), cat1.op("Sp"), sl, 8)
    assert ok and compared > 0


def test_bilinearity_on_lambda_factors(cat1):
    k = 1
    B = cat1.op("Zp").rescaled(Fraction(3 * (k + 2), 2))
    C = cat1.op("Wp").inverse().rescaled(Fraction(k + 2) + Fraction(k, 2))
    assert contraction_bilinearity_check(cat1.op("Sp"), B, C, N)
    one = VertexOp.identity(cat1.algebra)
    assert contraction_bilinearity_check(cat1.op("Sp"), one, one, N)

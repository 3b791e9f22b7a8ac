from fractions import Fraction

import pytest

from qvoa.ope import (DeltaTerm, OpeError, commutator_distribution, contour_residue, find_poles,
                      find_zeros, is_total_difference, ope_product, q_difference, residue_consistency,
                      screening_charge_check)
from qvoa.fock import FockSlice
from qvoa.scalar import ONE, q_pow
from qvoa.vertex import VertexOp, VertexSum

N = 12


def test_phi_phi_has_four_terms(cat1):
    terms = ope_product(cat1.as_sum("PhiMinus"), cat1.as_sum("PhiPlus"), N)
    assert len(terms) == 4


def test_identity_product(cat1):
    one = VertexSum.single(VertexOp.identity(cat1.algebra))
    (t,) = ope_product(one, cat1.as_sum("Sp"), N)
    assert t.correlation.is_trivial()
    assert t.inner.same_as(cat1.op("Sp"), N)


def test_exchange_correlation(cat1):
    # X1+(z) X1+(w) carries (1 - q^-2 x)... compatible with (q^2 z - w)/(z - q^2 w)
    terms = ope_product(cat1.as_sum("Xp"), cat1.as_sum("Xp"), N)
    for t in terms:
        assert t.form is not None and t.form.is_rational()


def test_fermion_zero(cat1):
    (t,) = ope_product(cat1.as_sum("Sp"), cat1.as_sum("Sp"), N)
    assert find_zeros(t) == [(ONE, 1)]
    assert find_poles(t) == []


def test_residue_of_simple_pole_by_two_routes(cat1):
    (t,) = ope_product(cat1.as_sum("Sp"), cat1.as_sum("X1p"), N)
    assert t.order_at(Fraction(-1)) == -1
    assert residue_consistency(t, Fraction(-1))["pass"]
    res = contour_residue([t], q_pow(-1), variable="inner")
    assert len(res.sum.terms) == 1


def test_pole_free_residue_is_empty(cat1):
    terms = ope_product(cat1.as_sum("Sp"), cat1.as_sum("Sp"), N)
    assert contour_residue(terms, q_pow(1)).sum.terms == []


def test_xx_commutator_supports(cat1):
    k = 1
    parity, terms = commutator_distribution(cat1.as_sum("Xp"), cat1.as_sum("Xm"), N)
    assert parity == 1
    supports = {t.support for t in terms}
    assert supports == {q_pow(k), q_pow(-k)}


def test_trivial_pair_empty(cat1):
    _, terms = commutator_distribution(cat1.as_sum("Vp"), cat1.as_sum("Phi1p"), N)
    assert terms == []


def test_one_sided_pair_is_not_local(cat1):
    # Z-(z)Z+(w) is trivial but Z+(w)Z-(z) is an infinite product
    with pytest.raises(OpeError):
        commutator_distribution(cat1.as_sum("Zm"), cat1.as_sum("Zp"), N)


def test_observed_commuting_lambda_pairs(cat1):
    # the pairs with identically trivial contractions are (lambda2, S+) and (lambda3, S-)
    for lam, s in (("lambda2", "Sp"), ("lambda3", "Sm")):
        _, terms = commutator_distribution(cat1.as_sum(lam), cat1.as_sum(s), N)
        assert terms == []
    _, terms = commutator_distribution(cat1.as_sum("lambda2"), cat1.as_sum("Sm"), N)
    assert terms


def test_total_difference_cases(cat1):
    assert is_total_difference([], N)[0]
    one = VertexOp.identity(cat1.algebra)
    assert not is_total_difference([DeltaTerm(q_pow(1), one, ONE)], N)[0]
    _, terms = commutator_distribution(cat1.as_sum("L"), cat1.as_sum("Sp"), N)
    ok, witness = is_total_difference(terms, N, "dw")
    assert ok and witness[0]["p"] == "q^2"


def test_xs_witness_on_b1(cat1):
    from qvoa.verify import body_on_b1
    _, terms = commutator_distribution(cat1.as_sum("Xp"), cat1.as_sum("Sp"), N)
    ok, witness = is_total_difference(terms, N, "dw")
    assert ok
    assert all(body_on_b1(cat1, t.body, N) for t in terms)


def _collapse(S: VertexSum):
    """Sum the coefficients of equal operators (coefficients times prefactors)."""
    out = []
    for c, op in S.realized():
        for entry in out:
            if entry[1].times(ONE / entry[1].prefactor).same_as(op.times(ONE / op.prefactor), N):
                entry[0] = entry[0] + c * op.prefactor
                break
        else:
            out.append([c * op.prefactor, op])
    return [e for e in out if not e[0].is_zero()]


def test_q_difference_constant_and_linear(cat1):
    one = VertexOp.identity(cat1.algebra)
    assert _collapse(q_difference(VertexSum.single(one), q_pow(2))) == []
    lin = _collapse(q_difference(VertexSum.single(one.with_z_power(1)), q_pow(2)))
    assert len(lin) == 1 and lin[0][0] == ONE and lin[0][1].z_const == 0


def test_q_difference_rejects_trivial_step(cat1):
    with pytest.raises(OpeError):
        q_difference(cat1.as_sum("Sp"), ONE)


def test_charge_identity_commutes(cat1, cfg1):
    one = VertexSum.single(VertexOp.identity(cat1.algebra))
    sl = FockSlice(cat1.algebra, cfg1.weight(), 3)
    assert screening_charge_check(one, cat1.as_sum("Sp"), sl, 1)["pass"]


def test_charge_single_lambda_fails(cat1, cfg1):
    sl = FockSlice(cat1.algebra, cfg1.weight(), 3)
    assert not screening_charge_check(cat1.as_sum("lambda1"), cat1.as_sum("Sp"), sl, 1)["pass"]

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qvoa import walgebra as W
from qvoa.scalar import ONE, q_pow
from qvoa.series import PowerSeries
from qvoa.sl2 import ModelConfig
from qvoa.verify import screening_handoff
from qvoa.vertex import ContractionResult, VertexOp

N = 12
Q = q_pow(1)


@pytest.fixture(scope="module")
def data():
    return screening_handoff(ModelConfig(k=1, N=N))


def ratio(A, zero, poles, order=N):
    """A (1 - zero x) / prod (1 - c x) as a series."""
    s = PowerSeries.from_polynomial([ONE, -zero], order) * A
    for c in poles:
        s = s * PowerSeries([c ** m for m in range(order + 1)])
    return s


def identities(res):
    return {w["identity"] for w in res.witnesses}


def test_roles(data):
    assert data.labels["S1"] == "Sminus" and data.labels["S2"] == "Splus"
    assert data.labels["L1"] == "lambda2" and data.labels["L2"] == "lambda1"


def test_fermion_passes(data):
    assert W.check_fermion(data)


def test_fermion_rejects_boson_and_identity(data, cat1):
    boson = ContractionResult(PowerSeries.from_polynomial([1, -2, 1], N), Fraction(2))
    one = VertexOp.identity(cat1.algebra)
    from qvoa.vertex import contract
    for bad in (boson, contract(one, one, N)):
        perturbed = W.ScreeningData(N, (bad, data.self_s[1]), data.f21, data.f12, data.lam_s, data.s_lam)
        assert not W.check_fermion(perturbed)


def test_two_pole_extraction(data):
    ex, out = W.extract_two_pole(data)
    assert out == []
    assert ex["p1_prime"] == ONE
    assert ex["A_prime"] * ex["p1_prime"] / ex["p2_prime"] == ONE


def test_two_pole_two_poles_fail(data):
    bad = data.with_lam_s((1, 1), ratio(q_pow(-6), ONE, [q_pow(-6), Q]))
    res = W.check_prop21(bad)
    assert not res
    assert "Lambda1 S1: one zero and one pole" in identities(res)


def test_two_pole_residue_mismatch_reports_both_sides(data):
    ops = dict(data.ops)
    ops["L2"] = ops["L2"].times(Q ** 5)
    res = W.check_prop21(W.ScreeningData(**{**data.__dict__, "ops": ops}))
    (w,) = [w for w in res.witnesses if w["identity"].startswith("residue")]
    base = [w for w in W.check_prop21(data).witnesses if w["identity"].startswith("residue")][0]
    assert w["lhs"] and w["rhs"] and w["rhs"] != base["rhs"]


def test_exchange_q_prime_perturbation(data):
    assert "q' = q" not in identities(W.check_prop22_theorem23(data))
    ex, _ = W.extract_exchange(data)
    bad = data.with_lam_s((3, 2), ratio(ex["B_prime"], ex["q1_prime"], [ex["q2_prime"] * Q]))
    assert "q' = q" in identities(W.check_prop22_theorem23(bad))


def test_exchange_q2_condition_is_sensitive(data):
    ex = {**W.extract_two_pole(data)[0], **W.extract_exchange(data)[0]}
    assert "q2 = q1 p" in identities(W.check_prop22_theorem23(data))
    fixed = data.with_lam_s((2, 2), ratio(ex["B"], ex["q1"], [ex["q1"] * ex["p"]]))
    assert "q2 = q1 p" not in identities(W.check_prop22_theorem23(fixed))


def test_structure_function_self_consistent(data):
    ex = {**W.extract_two_pole(data)[0], **W.extract_exchange(data)[0]}
    f21, f12 = W.structure_series(ex["p"], ex["q2_prime"], N, ex["q"], f12_inverted=True)
    built = W.ScreeningData(**{**data.__dict__, "f21": ContractionResult(f21, data.b),
                               "f12": ContractionResult(f12, data.b)})
    assert W.check_prop24(built)


def test_structure_function_perturbed_fails(data):
    bad = W.ScreeningData(**{**data.__dict__, "f21": ContractionResult(
        data.f21.series * PowerSeries.from_polynomial([1, -Q ** 5], N), data.b)})
    assert not W.check_prop24(bad)


def test_structure_function_literal_f12_reported(data):
    res = W.check_prop24(data)
    assert res and res.extracted["f12_literal_match"] is False


@settings(max_examples=10, deadline=None)
@given(st.fractions(min_value=-4, max_value=4, max_denominator=3))
def test_checks_invariant_under_b(data, b):
    moved = data.with_b(b)
    for fn in (W.check_fermion, W.check_prop21, W.check_prop22_theorem23, W.check_prop24):
        a, c = fn(data), fn(moved)
        assert a.passed == c.passed and a.witnesses == c.witnesses


def test_classical_probe_trivial_cases():
    exact = W.classical_limit_probe(PowerSeries.from_polynomial([1, -1], 8), 1)
    assert exact["max_deviation"] < 1e-12 and exact["pass"]
    off = W.classical_limit_probe(PowerSeries.one(8), 1)
    assert off["coefficients"][1]["deviation"] == 1 and not off["pass"]


def test_classical_probe_on_extracted_f21(data):
    ex = {**W.extract_two_pole(data)[0], **W.extract_exchange(data)[0]}
    f21, _ = W.structure_series(ex["p"], ex["q2_prime"], 8, ex["q"])
    res = W.classical_limit_probe(f21, data.b)
    assert res["pass"] and res["max_deviation"] < 1e-3


def test_binomials():
    assert W.binomial_coefficients(2, 4) == [1, -2, 1, 0]

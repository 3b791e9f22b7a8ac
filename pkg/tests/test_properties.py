from fractions import Fraction

from hypothesis import assume, given, settings, strategies as st

from qvoa.dsl import parse_or_raise, pretty
from qvoa.fock import FockSlice
from qvoa.scalar import ONE, QScalar, q_pow
from qvoa.series import PowerSeries, recognize_product, series_exp, series_log
from qvoa.vertex import oracle_contraction_check

from randomops import random_pair

exps = st.fractions(min_value=-3, max_value=3, max_denominator=2)
small = st.integers(min_value=-3, max_value=3)


@st.composite
def laurent(draw, max_terms=3):
    terms = draw(st.dictionaries(exps, small.filter(bool), min_size=1, max_size=max_terms))
    return QScalar.from_laurent({e: Fraction(c) for e, c in terms.items()})


@st.composite
def scalars(draw):
    num, den = draw(laurent()), draw(laurent())
    assume(not den.is_zero())
    return num / den


@st.composite
def series(draw, order=5, unit=False):
    coeffs = [draw(laurent(2)) for _ in range(order + 1)]
    if unit:
        coeffs[0] = ONE
    return PowerSeries(coeffs)


@settings(max_examples=40, deadline=None)
@given(scalars(), scalars(), scalars())
def test_field_laws(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    if not a.is_zero():
        assert a * a.inverse() == ONE


@settings(max_examples=30, deadline=None)
@given(scalars())
def test_json_round_trip(a):
    assert QScalar.from_json(a.to_json()) == a


@settings(max_examples=20, deadline=None)
@given(series(unit=True))
def test_exp_log_inverse(s):
    assert series_exp(series_log(s)) == s


@settings(max_examples=20, deadline=None)
@given(series(), series(), exps, exps)
def test_rescale_laws(s, t, a, b):
    qa, qb = q_pow(a), q_pow(b)
    assert s.rescale(qa).rescale(qb) == s.rescale(qa * qb)
    assert (s * t).rescale(qa) == s.rescale(qa) * t.rescale(qa)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 4), st.sampled_from([1, -1])), min_size=1, max_size=3))
def test_product_recognition_round_trip(factors):
    s = PowerSeries.one(10)
    for a, sign in factors:
        lin = PowerSeries.from_polynomial([ONE, -q_pow(a)], 10)
        s = s * (lin if sign > 0 else lin.inverse())
    form = recognize_product(s)
    assert form is not None and form.series(10) == s


@settings(max_examples=6, deadline=None)
@given(st.integers(min_value=100, max_value=10_000))
def test_contraction_matches_mode_oracle(seed):
    alg, A, B, w = random_pair(seed)
    ok, compared = oracle_contraction_check(A, B, FockSlice(alg, w, 2), 6)
    assert ok and compared > 0


names = st.sampled_from(["A", "B", "Cx", "V1"])
atoms = st.sampled_from(["1", "k", "m", "q", "1/2", "qint(m)", "qpow(k*m/2)", "(q - 1/q)"])


@st.composite
def rule_text(draw):
    parts = draw(st.lists(atoms, min_size=1, max_size=3))
    return draw(st.sampled_from(["", "-"])) + draw(st.sampled_from([" * ", " / ", " + "])).join(parts)


@st.composite
def program_text(draw):
    lines = ["algebra H { oscillator a, b; gram a a = qint(m)/m; }"]
    for i in range(draw(st.integers(1, 3))):
        fam = draw(st.sampled_from(["a", "b"]))
        lines.append(f"vertexop O{i} {{ shift = [1, {draw(small)}]; "
                     f"minus {fam} = {draw(rule_text())}; plus {fam} = {draw(rule_text())}; }}")
    lines.append(f"vertexop P = : O0 O0^-1[{draw(small)}/2] : ;")
    lines.append(f"sum S {{ term O0 = {draw(rule_text()).replace('m', 'k')}; }}")
    lines.append(f"check {draw(names).lower()};")
    return "\n".join(lines)


@settings(max_examples=30, deadline=None)
@given(program_text())
def test_dsl_pretty_round_trip(text):
    prog = parse_or_raise(text)
    again = parse_or_raise(pretty(prog))
    assert again.canonical() == prog.canonical()
    assert pretty(again) == pretty(prog)

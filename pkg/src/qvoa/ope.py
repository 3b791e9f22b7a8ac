"""Operator products of vertex sums, poles, contour residues and delta-supported commutators."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .fock import FockSlice
from .scalar import ONE, ZERO, QScalar, q_pow, qs
from .series import PowerSeries, ProductForm, QConstant, RationalClosedForm
from .vertex import (ContractionResult, VertexOp, VertexSum, SumTerm, contract,
                     normal_product)


class OpeError(ValueError):
    pass


def q_exponent(x) -> Fraction:
    """The exponent e of a pure q-power q^e."""
    mono = qs(x).as_monomial()
    if mono is None or mono[0] != 1:
        raise OpeError(f"{qs(x).to_text()} is not a pure power of q")
    return Fraction(mono[1])


@dataclass
class OpeTerm:
    """coeff * outer(u) inner(v) = coeff * u^a * f(v/u) * :outer(u) inner(v):."""

    coeff: QScalar
    outer: VertexOp
    inner: VertexOp
    correlation: ContractionResult

    @property
    def form(self) -> Optional[ProductForm]:
        cf = self.correlation.closed_form
        if isinstance(cf, RationalClosedForm):
            return None
        return cf

    def order_at(self, x_exp: Fraction) -> int:
        """Net multiplicity of the correlation at x = q^x_exp (negative: pole)."""
        if self.form is None:
            raise OpeError("unrecognized correlation")
        return self.form.order_at(x_exp)

    def body_at(self, outer_j: Fraction, inner_j: Fraction) -> VertexOp:
        return normal_product(self.outer, self.inner, outer_j, inner_j)


def ope_product(A: VertexSum, B: VertexSum, order: int) -> list[OpeTerm]:
    """One term per pair of terms of A(u) B(v), correlations recognized where possible."""
    out = []
    for ca, oa in A.realized():
        for cb, ob in B.realized():
            res = contract(oa, ob, order)
            res.recognize()
            out.append(OpeTerm(ca * cb, oa, ob, res))
    return out


def window_for(k: int) -> Fraction:
    return Fraction(4 * k + 8)


def find_poles(term: OpeTerm, window: Fraction = Fraction(1000)) -> list[tuple]:
    """Poles of the correlation as (x-location q^e, order), x = inner/outer argument."""
    form = term.form
    if form is None:
        raise OpeError("unrecognized correlation")
    return sorted((q_pow(e), n) for e, n in ((e, n) for e, n in form.poles(window).items()))


def find_zeros(term: OpeTerm, window: Fraction = Fraction(1000)) -> list[tuple]:
    form = term.form
    if form is None:
        raise OpeError("unrecognized correlation")
    return sorted((q_pow(e), n) for e, n in form.zeros(window).items())


@dataclass
class ResidueResult:
    """sum_i weight_i * body_i(z), each weight = normalization * scalar_i."""

    sum: VertexSum
    normalization: QConstant
    weights: list = field(default_factory=list)  # full QConstant weight of each term
    sources: list = field(default_factory=list)  # index of the OPE term producing each body


def contour_residue(terms: Sequence[OpeTerm], point, measure: str = "dw",
                    variable: str = "outer") -> ResidueResult:
    """Integrate the OPE over one argument around argument ratio ``point``.

    With ``variable='outer'`` the outer argument u circles u = point * z (inner argument z);
    with ``variable='inner'`` the inner argument v circles v = point * z (outer argument z).
    Only simple poles are accepted.  Infinite-product constants common to every residue are
    factored out into ``normalization``.
    """
    if measure not in ("dw", "dw/w"):
        raise OpeError("measure must be 'dw' or 'dw/w'")
    j = q_exponent(point)
    x_exp = -j if variable == "outer" else j
    bodies, weights, sources = [], [], []
    for idx, t in enumerate(terms):
        order = t.order_at(x_exp)
        if order >= 0:
            continue
        if order < -1:
            raise OpeError(f"pole of order {-order} at the contour point")
        r = t.form.regular_value(x_exp)
        a = t.correlation.z_power
        if variable == "outer":
            body = t.body_at(j, Fraction(0))
            power = a + (1 if measure == "dw" else 0)
            scalar = q_pow(j * power)
        else:
            body = t.body_at(Fraction(0), j)
            power = a + (1 if measure == "dw" else 0)
            scalar = -q_pow(j) if measure == "dw" else -ONE
        body = body.with_z_power(power)
        weights.append(r * (scalar * t.coeff))
        bodies.append(body)
        sources.append(idx)
    if not weights:
        return ResidueResult(VertexSum([], "residue"), QConstant.make(ONE, {}), [], [])
    norm = QConstant.make(ONE, dict(weights[0].products))
    terms_out = []
    for w, b in zip(weights, bodies):
        if w.products != norm.products:
            raise OpeError("residues carry different infinite-product constants")
        terms_out.append(SumTerm(w.scalar, Fraction(0), b))
    return ResidueResult(VertexSum(terms_out, "residue"), norm, weights, sources)


def _valuation(x: QScalar) -> Optional[Fraction]:
    if x.is_zero():
        return None
    return Fraction(x.val, x.L)  # canonical form: num and den have nonzero constant terms


def residue_by_series(term: OpeTerm, x_exp: Fraction, order: Optional[int] = None,
                      clear: Optional[dict] = None) -> tuple:
    """Residue weight of a simple pole at x = q^x_exp read off the raw series.

    For f = r / (1 - x/x0) + (farther singularities), the partial sums of
    sum_n (c_n - c_(n-1)/x0) x0^n telescope to c_N x0^N, which converges q-adically to r.
    Poles nearer to the origin (``clear``: exponent -> order, by default every pole q^e with
    e > x_exp) are first multiplied away and divided back out at x0.  Returns (q-expansion
    of the limit, precision): coefficients below ``precision`` are settled, because the last
    two partial sums agree there.  When the last three partial sums coincide the remainder
    is a polynomial of lower degree and the limit is exact: the precision is then None and
    the first entry is the exact scalar.
    """
    s = term.correlation.series
    N = s.order if order is None else min(order, s.order)
    if clear is None:
        clear = {e: n for e, n in (term.form.poles() if term.form else {}).items() if e > x_exp}
    x0 = q_pow(x_exp)
    fix = ONE
    for e, n in clear.items():
        lin = PowerSeries.from_polynomial([ONE, -q_pow(-e)], s.order)
        for _ in range(n):
            s = s * lin
        fix = fix * (ONE - q_pow(x_exp - e)) ** n
    last = s[N] * x0 ** N
    prev = s[N - 1] * x0 ** (N - 1)
    v = _valuation(last - prev)
    if v is None:
        v = _valuation(last - s[N - 2] * x0 ** (N - 2)) if N >= 2 else None
    if v is None:
        return last / fix, None
    return (last / fix).q_expansion(v + _valuation(fix.inverse())), v + _valuation(fix.inverse())


def residue_consistency(term: OpeTerm, x_exp: Fraction, min_precision: int = 1) -> dict:
    """Compare the product-form regular value with the series resummation."""
    exp_series, prec = residue_by_series(term, x_exp)
    closed = term.form.regular_value(x_exp)
    if prec is None:
        return {"pass": closed.is_rational() and closed.scalar == exp_series, "precision": "exact"}
    ok = prec >= min_precision and closed.q_expansion(prec) == exp_series
    return {"pass": ok, "precision": str(prec)}


# --- commutators -------------------------------------------------------------------


@dataclass
class DeltaTerm:
    """weight * delta(x / support) * body(z), with x = w/z for A(z), B(w)."""

    support: QScalar
    body: VertexOp
    weight: QScalar
    source: tuple = ()


def _common_rational(fwd: ContractionResult, rev: ContractionResult):
    """Check B(w)A(z) continues A(z)B(w): returns (parity, ProductForm of f) or raises."""
    f = fwd.recognize()
    g = rev.recognize()
    if not isinstance(f, ProductForm) or not isinstance(g, ProductForm):
        raise OpeError("non-local pair")
    if not f.is_rational() or not g.is_rational():
        raise OpeError("non-local pair")
    a = fwd.z_power
    if a != rev.w_power or a.denominator != 1:
        raise OpeError("non-local pair")
    # g(1/x) * x^a as a function of x: (1 - q^b / x)^n = (-q^b / x)^n (1 - q^-b x)^n
    scalar = g.scalar
    finite = {}
    xp = int(a)
    for b, n in g.finite.items():
        scalar = scalar * (-q_pow(b)) ** n
        xp -= n
        finite[-b] = finite.get(-b, 0) + n
    if xp != 0:
        raise OpeError("non-local pair")
    g_in_x = ProductForm(scalar, finite, {})
    base = ProductForm(f.scalar, f.finite, {})
    if base == g_in_x:
        return 1, base
    if base == ProductForm(-g_in_x.scalar, g_in_x.finite, {}):
        return -1, base
    raise OpeError("non-local pair")


def commutator_distribution(A: VertexSum, B: VertexSum, order: int,
                            parity: Optional[int] = None) -> tuple:
    """A(z)B(w) - parity * B(w)A(z) as delta terms; parity is detected when not given.

    Returns (parity, [DeltaTerm]).
    """
    out = []
    found = set()
    for ia, (ca, oa) in enumerate(A.realized()):
        for ib, (cb, ob) in enumerate(B.realized()):
            fwd = contract(oa, ob, order)
            r = contract(ob, oa, order)
            rev = ContractionResult(r.series, Fraction(0), r.z_power)
            eps, f = _common_rational(fwd, rev)
            found.add(eps)
            a = fwd.z_power
            for e, n in f.poles().items():
                if n > 1:
                    raise OpeError("higher-order pole in a commutator")
                w = f.regular_value(e).scalar * (ca * cb)
                body = normal_product(oa, ob, 0, e).with_z_power(a)
                out.append(DeltaTerm(q_pow(e), body, w, (ia, ib)))
    if parity is None:
        if len(found) > 1:
            raise OpeError("term pairs disagree on parity")
        parity = found.pop() if found else 1
    elif found and found != {parity}:
        raise OpeError("term pairs disagree on parity")
    return parity, out


def _group(terms: Sequence[DeltaTerm], order: int) -> list:
    """Group delta terms whose bodies coincide after placing w at the support."""
    groups: list = []
    for t in terms:
        for g in groups:
            if g[0].body.same_as(t.body, order):
                g.append(t)
                break
        else:
            groups.append([t])
    return groups


MEASURES = ("dw", "dw/w")


def is_total_difference(terms: Sequence[DeltaTerm], order: int, measure: str = "dw") -> tuple:
    """Decide whether the delta terms integrate to zero against ``measure``.

    A term weight * delta(w / (r z)) * body(z) integrates to weight * r * z * body(z) against
    dw and to weight * body(z) against dw/w.  The commutator is a total difference when,
    for every distinct body, those contributions cancel.  The witness lists per body the
    supports, weights and, for a cancelling pair, the q-difference step p = r1 / r2.
    """
    if measure not in MEASURES:
        raise OpeError("measure must be 'dw' or 'dw/w'")
    witness = []
    ok = True
    for g in _group(terms, order):
        total = ZERO
        for t in g:
            total = total + (t.weight * t.support if measure == "dw" else t.weight)
        entry = {
            "body": g[0].body.name,
            "supports": [t.support.to_text() for t in g],
            "weights": [t.weight.to_text() for t in g],
            "sum": total.to_text(),
        }
        if len(g) == 2:
            entry["p"] = (g[0].support / g[1].support).to_text()
        witness.append(entry)
        if not total.is_zero():
            ok = False
    return ok, witness


def q_difference(S: VertexSum, p) -> VertexSum:
    """(f(p^1/2 z) - f(p^-1/2 z)) / ((p^1/2 - p^-1/2) z) on a vertex sum."""
    e = q_exponent(p)
    if e == 0:
        raise OpeError("q-difference needs p != 1")
    h = e / 2
    c = (q_pow(h) - q_pow(-h)).inverse()
    out = []
    for t in S.terms:
        for sign, shift in ((1, h), (-1, -h)):
            op = t.op.rescaled(t.rescale + shift).with_z_power(-1)
            out.append(SumTerm(t.coeff * c * sign, Fraction(0), op))
    return VertexSum(out, f"Dq[{S.name}]")


def screening_charge_check(A: VertexSum, S: VertexSum, slice_: FockSlice, mode_range: int,
                           parity: Optional[int] = None, measure: str = "dw",
                           cache: Optional[dict] = None) -> dict:
    """Matrix check of [A_n, Q] = 0 (graded by ``parity``) for |n| <= mode_range.

    Q is the w^-1 coefficient of S(w) for ``measure='dw'`` and the w^0 coefficient for
    'dw/w'.  Equivalently the w^e coefficient of A(z)S(w) - parity * S(w)A(z) vanishes for
    every z-exponent in range; both orderings are built from explicit Fock action tables and
    compared only where truncation cannot interfere.
    """
    from .oracle import KeyFilter, Term, bilocal, compare

    if measure not in MEASURES:
        raise OpeError("measure must be 'dw' or 'dw/w'")
    if parity is None:
        parity, _ = commutator_distribution(A, S, 4)
    e = Fraction(-1 if measure == "dw" else 0)
    window = Fraction(mode_range)
    keep = KeyFilter(z=(-window, window), w=(e, e))
    cache = {} if cache is None else cache
    ab = bilocal(A, S, slice_, True, keep, cache)
    ba = bilocal(A, S, slice_, False, keep, cache)
    res = compare([Term({(0, 0): ONE}, ab), Term({(0, 0): qs(-parity)}, ba)], [], slice_,
                  max(window, abs(e)))
    if res["compared"] == 0:
        raise OpeError("empty safe subspace")
    res["measure"] = measure
    res["parity"] = parity
    return res

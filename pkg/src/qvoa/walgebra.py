"""Axioms for two fermionic screening currents and a three-term current l(z).

The checks take contraction data (``ScreeningData``) and test the correlation
shapes, the residue cancellations, the conditions for existence of l(z) and the
q-Pochhammer forms of the cross correlations.  Every failing check carries
machine-readable witnesses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import permutations
from typing import Iterable, Optional, Sequence

from flint import fmpq

from .scalar import ONE, ZERO, QScalar, qs
from .series import (PowerSeries, ProductForm, RationalClosedForm, pochhammer_expand,
                     pochhammer_expand_inverse, recognize_rational)
from .vertex import ContractionResult, VertexOp, contract, normal_product


class AxiomError(ValueError):
    pass


@dataclass
class CheckResult:
    name: str
    passed: bool
    witnesses: list = field(default_factory=list)
    extracted: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed

    def to_json(self) -> dict:
        return {"name": self.name, "pass": self.passed, "witnesses": self.witnesses,
                "extracted": {k: _text(v) for k, v in self.extracted.items()}}


def _text(v):
    if isinstance(v, QScalar):
        return v.to_text()
    if isinstance(v, Fraction):
        return str(v)
    return v


def _witness(identity: str, index=None, lhs=None, rhs=None, **extra) -> dict:
    w = {"identity": identity, "index": index, "lhs": _text(lhs), "rhs": _text(rhs)}
    w.update({k: _text(v) for k, v in extra.items()})
    return w


def _series_witness(identity: str, lhs: PowerSeries, rhs: PowerSeries) -> Optional[dict]:
    n = min(lhs.order, rhs.order)
    for i in range(n + 1):
        if lhs[i] != rhs[i]:
            return _witness(identity, i, lhs[i], rhs[i])
    return None


# --- rational functions of one variable --------------------------------------------


@dataclass(frozen=True)
class RatFn:
    """x**xp * num(x)/den(x), polynomials as coefficient tuples (low degree first)."""

    num: tuple
    den: tuple
    xp: int = 0

    @classmethod
    def from_closed(cls, cf: RationalClosedForm) -> "RatFn":
        return cls(tuple(cf.numerator), tuple(cf.denominator), cf.x_power)

    @classmethod
    def constant(cls, c) -> "RatFn":
        return cls((qs(c),), (ONE,), 0)

    def times(self, c) -> "RatFn":
        return RatFn(tuple(a * qs(c) for a in self.num), self.den, self.xp)

    def scaled(self, c) -> "RatFn":
        """x -> c*x."""
        c = qs(c)
        return RatFn(tuple(a * c ** i for i, a in enumerate(self.num)),
                     tuple(a * c ** i for i, a in enumerate(self.den)), self.xp).times(c ** self.xp)

    def inverted(self, c=ONE) -> "RatFn":
        """x -> c/x."""
        c = qs(c)
        num = tuple(reversed([a * c ** i for i, a in enumerate(self.num)]))
        den = tuple(reversed([a * c ** i for i, a in enumerate(self.den)]))
        xp = -self.xp - (len(self.num) - 1) + (len(self.den) - 1)
        return RatFn(num, den, xp).times(c ** self.xp)._normalized()

    def _normalized(self) -> "RatFn":
        num, den, xp = list(self.num), list(self.den), self.xp
        while len(num) > 1 and num[0].is_zero():
            num.pop(0)
            xp += 1
        while len(den) > 1 and den[0].is_zero():
            den.pop(0)
            xp -= 1
        d0 = den[0]
        return RatFn(tuple(a / d0 for a in num), tuple(a / d0 for a in den), xp)

    def __mul__(self, other: "RatFn") -> "RatFn":
        return RatFn(tuple(_pmul(self.num, other.num)), tuple(_pmul(self.den, other.den)),
                     self.xp + other.xp)

    def equals(self, other: "RatFn") -> bool:
        lhs = _pmul(self.num, other.den)
        rhs = _pmul(other.num, self.den)
        shift = self.xp - other.xp
        if shift > 0:
            lhs = [ZERO] * shift + lhs
        elif shift < 0:
            rhs = [ZERO] * (-shift) + rhs
        n = max(len(lhs), len(rhs))
        lhs += [ZERO] * (n - len(lhs))
        rhs += [ZERO] * (n - len(rhs))
        return all(a == b for a, b in zip(lhs, rhs))

    def series(self, order: int) -> PowerSeries:
        return RationalClosedForm(self.num, self.den, self.xp).series(order)

    def single_factor(self) -> Optional[tuple]:
        """(A, c1, c2) when the function is A(1 - c1 x)/(1 - c2 x) with one zero and one pole."""
        if self.xp != 0 or len(self.num) != 2 or len(self.den) != 2:
            return None
        n0, n1 = self.num
        d1 = self.den[1] / self.den[0]
        n0, n1 = n0 / self.den[0], n1 / self.den[0]
        if n0.is_zero() or n1.is_zero() or d1.is_zero():
            return None
        c1, c2 = -n1 / n0, -d1
        if c1 == c2:
            return None
        return n0, c1, c2

    def to_text(self) -> str:
        def poly(p):
            return " + ".join(f"({c.to_text()})*x^{i}" for i, c in enumerate(p) if c) or "0"
        mono = f"x^{self.xp} * " if self.xp else ""
        return f"{mono}[{poly(self.num)}] / [{poly(self.den)}]"


def _pmul(a: Sequence, b: Sequence) -> list:
    out = [ZERO] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] = out[i + j] + x * y
    return out


def correlation_function(r: ContractionResult, max_deg: int = 2) -> Optional[RatFn]:
    """The contraction as a rational function of the series variable, or None.

    Monomial prefactors in z or w are not part of the displayed correlation shapes,
    so a nonzero z or w power makes the result unrecognized.
    """
    if r.z_power or r.w_power:
        return None
    cf = recognize_rational(r.series, max_deg, max_deg)
    return None if cf is None else RatFn.from_closed(cf)


# --- data ------------------------------------------------------------------------


@dataclass
class ScreeningData:
    """Contractions of S1, S2 and Lambda_1..3.

    ``lam_s[(i, j)]`` is Lambda_i(z)S_j(w); ``s_lam[(i, j)]`` is S_i(z)Lambda_j(w);
    ``f21`` is S2(z)S1(w) and ``f12`` is S1(z)S2(w).  b is the z-exponent of the cross
    contractions; ``ops`` holds the operators when the residue identities are wanted.
    """

    order: int
    self_s: tuple
    f21: ContractionResult
    f12: ContractionResult
    lam_s: dict
    s_lam: dict
    b: Fraction = Fraction(0)
    ops: Optional[dict] = None
    labels: dict = field(default_factory=dict)

    @classmethod
    def from_ops(cls, S1: VertexOp, S2: VertexOp, lams: Sequence[VertexOp], order: int,
                 labels: Optional[dict] = None) -> "ScreeningData":
        S = {1: S1, 2: S2}
        L = {i + 1: op for i, op in enumerate(lams)}
        lam_s = {(i, j): contract(L[i], S[j], order) for i in L for j in S}
        s_lam = {(j, i): contract(S[j], L[i], order) for i in L for j in S}
        f21 = contract(S2, S1, order)
        f12 = contract(S1, S2, order)
        if f21.z_power != f12.z_power:
            raise AxiomError("cross contractions carry different z-exponents")
        ops = {"S1": S1, "S2": S2, **{f"L{i}": op for i, op in L.items()}}
        return cls(order, (contract(S1, S1, order), contract(S2, S2, order)), f21, f12,
                   lam_s, s_lam, Fraction(f21.z_power), ops, dict(labels or {}))

    def with_b(self, b) -> "ScreeningData":
        """The same data with the z^b monomial of the cross contractions replaced."""
        b = Fraction(b)
        return replace(self, b=b, f21=replace(self.f21, z_power=b, closed_form=None),
                       f12=replace(self.f12, z_power=b, closed_form=None))

    def with_lam_s(self, key, series: PowerSeries, both_orders: bool = True) -> "ScreeningData":
        """Replace one Lambda-S correlation (and, optionally, its reverse order consistently)."""
        lam_s = dict(self.lam_s)
        lam_s[key] = ContractionResult(series)
        s_lam = dict(self.s_lam)
        if both_orders:
            fn = correlation_function(lam_s[key], 4)
            if fn is None:
                s_lam.pop((key[1], key[0]), None)
            else:
                rev = fn.inverted()
                if rev.xp >= 0:
                    s_lam[(key[1], key[0])] = ContractionResult(rev.series(self.order))
        return replace(self, lam_s=lam_s, s_lam=s_lam, ops=None if self.ops is None else dict(self.ops))


def _two_sided(data: ScreeningData, i: int, j: int, name: str, out: list) -> Optional[tuple]:
    """Shape of Lambda_i(z)S_j(w), checked against S_j(w)Lambda_i(z); appends witnesses."""
    fn = correlation_function(data.lam_s[(i, j)])
    if fn is None:
        out.append(_witness(f"{name}: one zero and one pole", None, "unrecognized", "A(1-c1 x)/(1-c2 x)"))
        return None
    shape = fn.single_factor()
    if shape is None:
        out.append(_witness(f"{name}: one zero and one pole", None, fn.to_text(), "A(1-c1 x)/(1-c2 x)"))
        return None
    rev = data.s_lam.get((j, i))
    rfn = None if rev is None else correlation_function(rev)
    if rfn is None or not rfn.inverted().equals(fn):
        out.append(_witness(f"{name}: equal correlation in both orders", None, fn.to_text(),
                            "unrecognized" if rfn is None else rfn.inverted().to_text()))
        return None
    return shape


def _exponent(c: QScalar) -> Optional[Fraction]:
    m = c.as_monomial()
    if m is None or m[0] != 1:
        return None
    return m[1]


def _residue_side(data: ScreeningData, lam: str, s: str, coeff: QScalar, pole: QScalar, order: int):
    """coeff * :Lambda(z) S(z/pole):, or None when pole is not a power of q."""
    e = _exponent(pole)
    if e is None:
        return None
    return normal_product(data.ops[lam], data.ops[s], 0, -e).times(coeff)


def _residue_identity(data, name, lhs_args, rhs_args, out: list) -> bool:
    if data.ops is None:
        out.append(_witness(name, None, "no operators", "operators required"))
        return False
    lhs = _residue_side(data, *lhs_args, data.order)
    rhs = _residue_side(data, *rhs_args, data.order)
    if lhs is None or rhs is None:
        out.append(_witness(name, None, "pole is not a power of q", None))
        return False
    if lhs.same_as(rhs, data.order):
        return True
    out.append(_witness(name, None, lhs.prefactor, rhs.prefactor,
                        fields=", ".join(lhs.differences(rhs, data.order))))
    return False


# --- checks ----------------------------------------------------------------------


def check_fermion(data: ScreeningData) -> CheckResult:
    """S_i(z)S_i(w) = (z - w) :S_i(z)S_i(w): for both currents."""
    out = []
    for i, r in enumerate(data.self_s, start=1):
        target = PowerSeries.from_polynomial([ONE, -ONE], r.series.order)
        if r.z_power != 1 or r.w_power != 0:
            out.append(_witness(f"S{i}S{i} monomial", None, f"z^{r.z_power} w^{r.w_power}", "z^1"))
            continue
        w = _series_witness(f"S{i}S{i} = (z - w)", r.series, target)
        if w:
            out.append(w)
    return CheckResult("fermion", not out, out)


def extract_two_pole(data: ScreeningData) -> tuple[dict, list]:
    out: list = []
    s1 = _two_sided(data, 1, 1, "Lambda1 S1", out)
    s2 = _two_sided(data, 2, 1, "Lambda2 S1", out)
    ex: dict = {}
    if s1:
        ex.update(A=s1[0], p1=s1[1], p2=s1[2])
    if s2:
        ex.update(A_prime=s2[0], p1_prime=s2[1], p2_prime=s2[2])
    if s1 and s2:
        ex.update(p=s2[2], q=s2[2] / s1[2])
    return ex, out


def check_prop21(data: ScreeningData) -> CheckResult:
    """One zero and one pole for Lambda_{1,2}S1, A'p'1/p'2 = 1, the residue cancellation
    between Lambda1 and Lambda2, and p'1 = 1 once p = p'2 and q = p'2/p2."""
    ex, out = extract_two_pole(data)
    if "q" not in ex:
        return CheckResult("prop21", False, out, ex)
    A, p1, p2 = ex["A"], ex["p1"], ex["p2"]
    Ap, p1p, p2p = ex["A_prime"], ex["p1_prime"], ex["p2_prime"]
    if Ap * p1p / p2p != ONE:
        out.append(_witness("A' p'1 / p'2 = 1", None, Ap * p1p / p2p, ONE))
    _residue_identity(
        data, "residue cancellation Lambda1/Lambda2",
        ("L1", "S1", A * (ONE - p1 / p2) * p2, p2),
        ("L2", "S1", -Ap * (ONE - p1p / p2p) * p2p, p2p), out)
    if p1p != ONE:
        out.append(_witness("p'1 = 1", None, p1p, ONE))
    p, qw = ex["p"], ex["q"]
    if data.ops is not None:
        g2 = data.ops["L2"].prefactor / data.ops["L1"].prefactor
        ex["g2"] = g2
        ex["g2_displayed"] = p / qw * (p / qw - ONE)
    return CheckResult("prop21", not out, out, ex)


def extract_exchange(data: ScreeningData) -> tuple[dict, list]:
    out: list = []
    s2 = _two_sided(data, 2, 2, "Lambda2 S2", out)
    s3 = _two_sided(data, 3, 2, "Lambda3 S2", out)
    ex: dict = {}
    if s2:
        ex.update(B=s2[0], q1=s2[1], q2=s2[2])
    if s3:
        ex.update(B_prime=s3[0], q1_prime=s3[1], q2_prime=s3[2])
    if s2 and s3:
        ex["p_prime"] = s3[2] / s2[2]
    return ex, out


def _trivial(r: Optional[ContractionResult]) -> bool:
    return r is not None and r.is_trivial()


def check_prop22_theorem23(data: ScreeningData) -> CheckResult:
    """Correlations of Lambda_{2,3} with S2 and the conditions for l(z) to exist."""
    ex1, out = extract_two_pole(data)
    ex2, out2 = extract_exchange(data)
    out += out2
    ex = {**ex1, **ex2}
    for (i, j) in ((3, 1), (1, 2)):
        if not (_trivial(data.lam_s.get((i, j))) and _trivial(data.s_lam.get((j, i)))):
            out.append(_witness(f"Lambda{i} S{j} correlation = 1", None, "nontrivial", ONE))
    if "q" not in ex or "p_prime" not in ex:
        return CheckResult("prop22_theorem23", False, out, ex)
    A, p, qw = ex["A"], ex["p"], ex["q"]
    q1, q2, q1p, q2p = ex["q1"], ex["q2"], ex["q1_prime"], ex["q2_prime"]
    if A != p / qw:
        out.append(_witness("A = p q^-1", None, A, p / qw))
    if q1p != q1:
        out.append(_witness("Lambda3 S2 zero at q1", None, q1p, q1))
    if ex["B_prime"] * q1 / q2p != ONE:
        out.append(_witness("B' q'1 / q'2 = 1", None, ex["B_prime"] * q1 / q2p, ONE))
    if ex["p_prime"] != qw:
        out.append(_witness("q' = q", None, ex["p_prime"], qw))
    if q2 != q1 * p:
        out.append(_witness("q2 = q1 p", None, q2, q1 * p))
    N = data.order
    ls21 = data.lam_s[(2, 1)].series
    f21 = data.f21.series
    rhs = f21.rescale(q2p) / f21.rescale(q2) * A
    w = _series_witness("Lambda S_21 = A f21(z/q'2, w)/f21(z/q2, w)", ls21, rhs)
    if w:
        out.append(w)
    # f12(w, z/c) is a series in y = z/w = 1/x; compare the two sides as series in y
    f12 = data.f12.series
    ratio_y = f12.rescale(ONE / q2p) / f12.rescale(ONE / q2)
    fn21 = correlation_function(data.lam_s[(2, 1)])
    inv = None if fn21 is None else fn21.inverted()
    if inv is None or inv.xp < 0:
        out.append(_witness("Lambda S_21 = f12(w, z/q'2)/f12(w, z/q2)", None,
                            "no expansion in z/w", ratio_y[0]))
    else:
        w = _series_witness("Lambda S_21 = f12(w, z/q'2)/f12(w, z/q2)", inv.series(N), ratio_y)
        if w:
            out.append(w)
    # A^-1 Lambda S_21(w q'2, z) = S Lambda_22(z/p, w), both as functions of u = z/w
    fn22 = correlation_function(data.s_lam[(2, 2)])
    if fn21 is None or fn22 is None:
        out.append(_witness("A^-1 Lambda S_21(w q'2, z) = S Lambda_22(z/p, w)", None,
                            "unrecognized", None))
    else:
        lhs = fn21.scaled(ONE / q2p).times(ONE / A)
        rhs_fn = fn22.inverted(p)
        if not lhs.equals(rhs_fn):
            out.append(_witness("A^-1 Lambda S_21(w q'2, z) = S Lambda_22(z/p, w)", None,
                                lhs.to_text(), rhs_fn.to_text()))
    return CheckResult("prop22_theorem23", not out, out, ex)


def structure_series(p, q2p, order: int, base=None, f12_inverted: bool = False) -> tuple:
    """(f21, f12) expanded from the q-Pochhammer ratios with parameters p, q'2 and base q."""
    qw = qs(base)
    p, q2p = qs(p), qs(q2p)
    f21 = (pochhammer_expand(p * qw / q2p, order, qw)
           * pochhammer_expand_inverse(qw / q2p, order, qw))
    num = pochhammer_expand(q2p / p, order, qw)
    den = pochhammer_expand_inverse(q2p, order, qw)
    f12 = num * den
    if f12_inverted:
        f12 = f12.inverse()
    return f21, f12


def check_prop24(data: ScreeningData, base=None, f12_inverted: bool = True) -> CheckResult:
    """Compare the cross contractions with the q-Pochhammer ratio formulas.

    ``base`` defaults to the extracted parameter q.  With ``f12_inverted`` the f12 ratio
    is taken with numerator and denominator exchanged, the form compatible with the
    common classical limit of f12 and f21; the literal form is reported either way.
    """
    ex1, out = extract_two_pole(data)
    ex2, out2 = extract_exchange(data)
    out += out2
    ex = {**ex1, **ex2}
    if "q" not in ex or "q2_prime" not in ex:
        return CheckResult("prop24", False, out, ex)
    base = ex["q"] if base is None else qs(base)
    ex["base"] = base
    N = data.order
    f21, f12 = structure_series(ex["p"], ex["q2_prime"], N, base, f12_inverted)
    w = _series_witness("f21 = (x|q'2^-1 p q, q)/(x|q'2^-1 q, q)", data.f21.series, f21)
    if w:
        out.append(w)
    label = "f12 = (y|q'2, q)/(y|q'2 p^-1, q)" if f12_inverted else "f12 = (y|q'2 p^-1, q)/(y|q'2, q)"
    w = _series_witness(label, data.f12.series, f12)
    if w:
        out.append(w)
    literal = structure_series(ex["p"], ex["q2_prime"], N, base, False)[1]
    ex["f12_literal_match"] = data.f12.series == literal
    return CheckResult("prop24", not out, out, ex)


# --- classical limit -------------------------------------------------------------

EPSILONS = (Fraction(1, 100), Fraction(1, 1000), Fraction(1, 10000))


def _value(c: QScalar, qv: Fraction) -> float:
    """Value at a rational q; exact when only integral powers of q occur."""
    if c.L == 1:
        x = fmpq(qv.numerator, qv.denominator)
        n, d = c.num(x), c.den(x)
        v = Fraction(int(n.p), int(n.q)) / Fraction(int(d.p), int(d.q)) * qv ** c.val
        return float(v)
    return c.evaluate(float(qv))


def _coefficients(f, M: int) -> list:
    if isinstance(f, PowerSeries):
        return [f[i] for i in range(M)]
    if isinstance(f, (ProductForm, RationalClosedForm)):
        s = f.series(M - 1)
        return [s[i] for i in range(M)]
    if callable(f):
        return [qs(f(i)) for i in range(M)]
    raise AxiomError("unsupported coefficient source")


def binomial_coefficients(b, M: int) -> list:
    """Coefficients of (1 - x)^b."""
    b = Fraction(b)
    out, c = [], Fraction(1)
    for n in range(M):
        out.append(c)
        c = c * (n - b) / (n + 1)
    return out


def classical_limit_probe(f, b, M: int = 6, eps: Iterable = EPSILONS, tol: float = 1e-3) -> dict:
    """Evaluate coefficients at q = 1 - eps, extrapolate eps -> 0 and compare with (1-x)^b.

    The extrapolation is the Lagrange polynomial through the sample points, evaluated
    at eps = 0.  Deviation is relative to the exact binomial, absolute where it is 0.
    """
    eps = [Fraction(e) for e in eps]
    coeffs = _coefficients(f, M)
    exact = binomial_coefficients(b, M)
    rows, worst, divergent = [], 0.0, False
    for n, (c, e) in enumerate(zip(coeffs, exact)):
        try:
            vals = [_value(c, 1 - h) for h in eps]
        except (ZeroDivisionError, OverflowError):
            vals = [math.inf]
        if not all(math.isfinite(v) for v in vals):
            divergent = True
            rows.append({"n": n, "extrapolated": None, "exact": float(e), "deviation": None})
            continue
        limit = 0.0
        for i, hi in enumerate(eps):
            w = 1.0
            for j, hj in enumerate(eps):
                if j != i:
                    w *= float(hj / (hj - hi))
            limit += w * vals[i]
        dev = abs(limit - float(e)) / (abs(float(e)) if e else 1.0)
        worst = max(worst, dev)
        rows.append({"n": n, "extrapolated": limit, "exact": float(e), "deviation": dev})
    return {"b": str(Fraction(b)), "M": M, "epsilons": [float(h) for h in eps],
            "coefficients": rows, "max_deviation": None if divergent else worst,
            "divergent": divergent, "tolerance": tol,
            "pass": (not divergent) and worst < tol}


# --- role assignment for a concrete realization ---------------------------------------


def _valuation(c: QScalar) -> Fraction:
    return Fraction(c.val, c.L)


def assign_roles(screenings: dict, lams: dict, order: int) -> ScreeningData:
    """Pick S1, S2 and Lambda_1..3 from named operators.

    ``lams`` maps names to (weight, op).  Admissible assignments have trivial
    correlations for (S1, Lambda3) and (S2, Lambda1) in both orders.  The Lambda_i share
    one argument rescaling z -> q^e z chosen so that Lambda1 S1 vanishes at w = z (the
    screenings keep their normalization), and Lambda_i carries weight_i / weight_1.  Among
    admissible assignments the one whose extracted q has positive q-adic valuation
    (|q| < 1) is preferred, then the first in name order.
    """
    candidates = []
    for s1, s2 in permutations(sorted(screenings), 2):
        S1, S2 = screenings[s1], screenings[s2]
        for l1, l2, l3 in permutations(sorted(lams), 3):
            if not (contract(lams[l3][1], S1, order).is_trivial()
                    and contract(S1, lams[l3][1], order).is_trivial()
                    and contract(lams[l1][1], S2, order).is_trivial()
                    and contract(S2, lams[l1][1], order).is_trivial()):
                continue
            fn = correlation_function(contract(lams[l1][1], S1, order))
            shape = None if fn is None else fn.single_factor()
            e = None if shape is None else _exponent(shape[1])
            if e is None:
                continue
            w1 = lams[l1][0]
            ops = [lams[n][1].rescaled(e).times(lams[n][0] / w1) for n in (l1, l2, l3)]
            labels = {"S1": s1, "S2": s2, "L1": l1, "L2": l2, "L3": l3, "lambda_rescale": str(e)}
            data = ScreeningData.from_ops(S1, S2, ops, order, labels)
            ex, _ = extract_two_pole(data)
            good = "q" in ex and _valuation(ex["q"]) > 0
            candidates.append((not good, len(candidates), data))
    if not candidates:
        raise AxiomError("no assignment satisfies the trivial-correlation assumption")
    return min(candidates, key=lambda t: t[:2])[2]


def run_all(data: ScreeningData) -> list:
    return [check_fermion(data), check_prop21(data), check_prop22_theorem23(data), check_prop24(data)]

"""Exact elements of the field of rational functions in q.

Exponents of q may be rational: a value is stored as ``t**val * num(t) / den(t)``
with ``t = q**(1/L)``.  The representation is canonical (coprime, monic
denominator, no stray powers of ``t``, minimal ``L``), so equality and hashing
are structural.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterable, Optional, Union

import flint

_ZERO_POLY = flint.fmpq_poly([])
_ONE_POLY = flint.fmpq_poly([1])

Rational = Union[int, Fraction]


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


def _inflate(p: "flint.fmpq_poly", r: int) -> "flint.fmpq_poly":
    if r == 1 or p.degree() <= 0:
        return p
    cs = p.coeffs()
    out = [0] * ((len(cs) - 1) * r + 1)
    out[::r] = cs
    return flint.fmpq_poly(out)


def _low_order(p: "flint.fmpq_poly") -> int:
    if p[0] != 0:
        return 0
    for i, c in enumerate(p.coeffs()):
        if c != 0:
            return i
    return 0


def _to_fraction(c) -> Fraction:
    return Fraction(int(c.p), int(c.q))


class QScalar:
    """An exact rational function of q; immutable."""

    __slots__ = ("num", "den", "val", "L", "_hash")

    def __init__(self, value: Rational = 0):
        if isinstance(value, QScalar):
            self.num, self.den, self.val, self.L = value.num, value.den, value.val, value.L
        else:
            f = Fraction(value)
            self.num = flint.fmpq_poly([flint.fmpq(f.numerator, f.denominator)]) if f else _ZERO_POLY
            self.den = _ONE_POLY
            self.val = 0
            self.L = 1
        self._hash = None

    # -- construction -----------------------------------------------------

    @classmethod
    def _raw(cls, num, den, val: int, L: int) -> "QScalar":
        obj = object.__new__(cls)
        obj.num, obj.den, obj.val, obj.L = num, den, val, L
        obj._hash = None
        return obj

    @classmethod
    def _make(cls, num, den, val: int, L: int) -> "QScalar":
        if num.is_zero():
            return ZERO
        if den.is_zero():
            raise ZeroDivisionError("QScalar with zero denominator")
        if den.degree() > 0:
            g = num.gcd(den)
            if not g.is_one():
                num = num // g
                den = den // g
        lc = den.leading_coefficient()
        if lc != 1:
            num = num / lc
            den = den / lc
        i = _low_order(num)
        if i:
            num = num.right_shift(i)
            val += i
        j = _low_order(den)
        if j:
            den = den.right_shift(j)
            val -= j
        if L > 1:
            return cls._reduced(num, den, val, L)
        return cls._raw(num, den, val, L)

    @classmethod
    def _reduced(cls, num, den, val: int, L: int) -> "QScalar":
        # shrink L when only powers of t^g occur
        g = gcd(L, val)
        if g > 1:
            for poly in (num, den):
                for e, c in enumerate(poly.coeffs()):
                    if c != 0:
                        g = gcd(g, e)
                        if g == 1:
                            break
                if g == 1:
                    break
        if g > 1:
            num = flint.fmpq_poly(num.coeffs()[::g])
            den = flint.fmpq_poly(den.coeffs()[::g])
            val //= g
            L //= g
        return cls._raw(num, den, val, L)

    @classmethod
    def coerce(cls, x) -> "QScalar":
        if isinstance(x, QScalar):
            return x
        if isinstance(x, (int, Fraction)):
            return cls(x)
        raise TypeError(f"cannot convert {type(x).__name__} to QScalar")

    @classmethod
    def from_laurent(cls, terms: dict) -> "QScalar":
        """Build from ``{exponent: coefficient}`` with rational exponents."""
        terms = {Fraction(e): Fraction(c) for e, c in terms.items() if c}
        if not terms:
            return ZERO
        L = 1
        for e in terms:
            L = _lcm(L, e.denominator)
        ints = {int(e * L): c for e, c in terms.items()}
        lo = min(ints)
        cs = [0] * (max(ints) - lo + 1)
        for e, c in ints.items():
            cs[e - lo] = flint.fmpq(c.numerator, c.denominator)
        return cls._make(flint.fmpq_poly(cs), _ONE_POLY, lo, L)

    # -- views ------------------------------------------------------------

    def _lift(self, L: int):
        r = L // self.L
        return _inflate(self.num, r), _inflate(self.den, r), self.val * r

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self) -> bool:
        return not self.num.is_zero()

    def is_laurent(self) -> bool:
        return self.den.degree() == 0

    def laurent_terms(self) -> dict:
        """``{Fraction exponent: Fraction coefficient}``; only for Laurent polynomials."""
        if not self.is_laurent():
            raise ValueError("not a Laurent polynomial")
        out = {}
        for i, c in enumerate(self.num.coeffs()):
            if c != 0:
                out[Fraction(self.val + i, self.L)] = _to_fraction(c)
        return out

    def numerator_terms(self) -> dict:
        return {Fraction(self.val + i, self.L): _to_fraction(c)
                for i, c in enumerate(self.num.coeffs()) if c != 0}

    def denominator_terms(self) -> dict:
        return {Fraction(i, self.L): _to_fraction(c)
                for i, c in enumerate(self.den.coeffs()) if c != 0}

    def constant_value(self) -> Optional[Fraction]:
        if self.is_zero():
            return Fraction(0)
        if self.val == 0 and self.num.degree() == 0 and self.den.degree() == 0:
            return _to_fraction(self.num.coeffs()[0])
        return None

    def as_monomial(self) -> Optional[tuple]:
        """Return ``(coefficient, exponent)`` if this is ``c * q**e``."""
        if self.is_zero() or self.num.degree() != 0 or self.den.degree() != 0:
            return None
        return _to_fraction(self.num.coeffs()[0]), Fraction(self.val, self.L)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other) -> "QScalar":
        if not isinstance(other, QScalar):
            if isinstance(other, (int, Fraction)):
                other = QScalar(other)
            else:
                return NotImplemented
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        L = self.L if self.L == other.L else _lcm(self.L, other.L)
        n1, d1, v1 = self._lift(L)
        n2, d2, v2 = other._lift(L)
        v = min(v1, v2)
        if v1 > v:
            n1 = n1.left_shift(v1 - v)
        if v2 > v:
            n2 = n2.left_shift(v2 - v)
        if d1 == d2:
            return QScalar._make(n1 + n2, d1, v, L)
        return QScalar._make(n1 * d2 + n2 * d1, d1 * d2, v, L)

    __radd__ = __add__

    def __neg__(self) -> "QScalar":
        if self.is_zero():
            return self
        return QScalar._raw(-self.num, self.den, self.val, self.L)

    def __sub__(self, other) -> "QScalar":
        if not isinstance(other, QScalar):
            if isinstance(other, (int, Fraction)):
                other = QScalar(other)
            else:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "QScalar":
        return QScalar.coerce(other) - self

    def __mul__(self, other) -> "QScalar":
        if not isinstance(other, QScalar):
            if isinstance(other, (int, Fraction)):
                f = Fraction(other)
                if f == 0:
                    return ZERO
                return QScalar._raw(self.num * flint.fmpq(f.numerator, f.denominator),
                                    self.den, self.val, self.L)
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return ZERO
        L = self.L if self.L == other.L else _lcm(self.L, other.L)
        n1, d1, v1 = self._lift(L)
        n2, d2, v2 = other._lift(L)
        if d1.degree() == 0 and d2.degree() == 0:
            # canonical Laurent factors have nonzero constant terms, so only L can shrink
            if L == 1:
                return QScalar._raw(n1 * n2, _ONE_POLY, v1 + v2, L)
            return QScalar._reduced(n1 * n2, _ONE_POLY, v1 + v2, L)
        return QScalar._make(n1 * n2, d1 * d2, v1 + v2, L)

    __rmul__ = __mul__

    def inverse(self) -> "QScalar":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero QScalar")
        return QScalar._make(self.den, self.num, -self.val, self.L)

    def __truediv__(self, other) -> "QScalar":
        if not isinstance(other, QScalar):
            if isinstance(other, (int, Fraction)):
                other = QScalar(other)
            else:
                return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other) -> "QScalar":
        return QScalar.coerce(other) * self.inverse()

    def __pow__(self, n: int) -> "QScalar":
        if not isinstance(n, int):
            raise TypeError("QScalar powers must be integers; use q_pow for monomials")
        if n == 0:
            return ONE
        if n < 0:
            return self.inverse() ** (-n)
        if self.is_zero():
            return ZERO
        if self.L == 1:
            return QScalar._raw(self.num ** n, self.den ** n, self.val * n, 1)
        return QScalar._make(self.num ** n, self.den ** n, self.val * n, self.L)

    def __eq__(self, other) -> bool:
        if not isinstance(other, QScalar):
            if isinstance(other, (int, Fraction)):
                other = QScalar(other)
            else:
                return NotImplemented
        return (self.L == other.L and self.val == other.val
                and self.num == other.num and self.den == other.den)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.L, self.val,
                               tuple((int(c.p), int(c.q)) for c in self.num.coeffs()),
                               tuple((int(c.p), int(c.q)) for c in self.den.coeffs())))
        return self._hash

    # -- analysis -----------------------------------------------------------

    def substitute_power(self, r: Fraction) -> "QScalar":
        """Replace q by q**r (r a positive rational)."""
        r = Fraction(r)
        if r <= 0:
            raise ValueError("substitution exponent must be positive")
        num = {e * r: c for e, c in self.numerator_terms().items()}
        den = {e * r: c for e, c in self.denominator_terms().items()}
        return QScalar.from_laurent(num) / QScalar.from_laurent(den)

    def evaluate(self, qv: float) -> float:
        """Floating-point value at a positive real q."""
        n = sum(float(c) * qv ** float(e) for e, c in self.numerator_terms().items())
        d = sum(float(c) * qv ** float(e) for e, c in self.denominator_terms().items())
        return n / d

    def q_expansion(self, prec: Rational) -> dict:
        """Laurent expansion around q = 0 up to (excluding) exponent ``prec``."""
        prec = Fraction(prec)
        dcs = [_to_fraction(c) for c in self.den.coeffs()]
        ncs = [_to_fraction(c) for c in self.num.coeffs()]
        # den has nonzero constant term, so 1/den is a power series in t
        nmax = int((prec * self.L) - self.val) + 1
        if nmax <= 0:
            return {}
        inv = [Fraction(0)] * nmax
        inv[0] = 1 / dcs[0]
        for i in range(1, nmax):
            s = sum(dcs[j] * inv[i - j] for j in range(1, min(i, len(dcs) - 1) + 1))
            inv[i] = -s / dcs[0]
        out = {}
        for i in range(nmax):
            s = sum(ncs[j] * inv[i - j] for j in range(0, min(i, len(ncs) - 1) + 1))
            e = Fraction(self.val + i, self.L)
            if s and e < prec:
                out[e] = s
        return out

    # -- text -----------------------------------------------------------------

    def to_text(self) -> str:
        num = _laurent_text(self.numerator_terms())
        if self.den.degree() == 0:
            return num
        den = _laurent_text(self.denominator_terms())
        return f"({num})/({den})"

    __str__ = to_text

    def __repr__(self) -> str:
        return f"QScalar({self.to_text()!r})"

    @classmethod
    def from_text(cls, text: str) -> "QScalar":
        from .expr import evaluate, parse

        return evaluate(parse(text), {"q": Q})

    def to_json(self) -> str:
        return self.to_text()

    @classmethod
    def from_json(cls, data: str) -> "QScalar":
        return cls.from_text(data)


def _exp_text(e: Fraction) -> str:
    if e.denominator == 1:
        return str(e.numerator)
    return f"({e.numerator}/{e.denominator})"


def _laurent_text(terms: dict) -> str:
    if not terms:
        return "0"
    parts = []
    for e in sorted(terms):
        c = terms[e]
        neg = c < 0
        a = -c if neg else c
        if e == 0:
            body = str(a) if a.denominator == 1 else f"{a.numerator}/{a.denominator}"
            if a.denominator != 1 and len(terms) > 1:
                body = f"({body})"
        else:
            mono = "q" if e == 1 else f"q^{_exp_text(e)}"
            if a == 1:
                body = mono
            elif a.denominator == 1:
                body = f"{a}*{mono}"
            else:
                body = f"({a.numerator}/{a.denominator})*{mono}"
        parts.append((neg, body))
    s = ("-" if parts[0][0] else "") + parts[0][1]
    for neg, body in parts[1:]:
        s += (" - " if neg else " + ") + body
    return s


ZERO = QScalar(0)
ONE = QScalar(1)


@lru_cache(maxsize=None)
def q_pow(e: Rational) -> QScalar:
    """The monomial q**e for rational e."""
    e = Fraction(e)
    L = e.denominator
    return QScalar._raw(_ONE_POLY, _ONE_POLY, e.numerator, L)


Q = q_pow(1)


@lru_cache(maxsize=None)
def q_int(n: int) -> QScalar:
    """Symmetric q-integer [n] = (q^n - q^-n)/(q - q^-1)."""
    if n == 0:
        return ZERO
    if n < 0:
        return -q_int(-n)
    return QScalar.from_laurent({Fraction(n - 1 - 2 * i): 1 for i in range(n)})


def qs(x) -> QScalar:
    """Coerce ints, Fractions, text and QScalars."""
    if isinstance(x, str):
        return QScalar.from_text(x)
    return QScalar.coerce(x)


def q_sum(values: Iterable[QScalar]) -> QScalar:
    total = ZERO
    for v in values:
        total = total + v
    return total

"""Truncated power series over QScalar, q-Pochhammer expansions and closed-form recognition."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .scalar import ONE, ZERO, QScalar, q_pow, qs

DEFAULT_ORDER = 12


class SeriesError(ValueError):
    pass


class PowerSeries:
    """Coefficients ``c_0..c_N`` of a series in one formal variable."""

    __slots__ = ("coeffs", "var")

    def __init__(self, coeffs: Iterable, var: str = "x"):
        self.coeffs = tuple(qs(c) for c in coeffs)
        if not self.coeffs:
            raise SeriesError("a series needs at least the constant coefficient")
        self.var = var

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def one(cls, order: int, var: str = "x") -> "PowerSeries":
        return cls([ONE] + [ZERO] * order, var)

    @classmethod
    def zero(cls, order: int, var: str = "x") -> "PowerSeries":
        return cls([ZERO] * (order + 1), var)

    @classmethod
    def from_polynomial(cls, poly: Sequence, order: int, var: str = "x") -> "PowerSeries":
        cs = [qs(c) for c in poly[: order + 1]]
        return cls(cs + [ZERO] * (order + 1 - len(cs)), var)

    def __getitem__(self, i: int) -> QScalar:
        return self.coeffs[i]

    def truncate(self, order: int) -> "PowerSeries":
        if order > self.order:
            raise SeriesError(f"cannot extend a series of order {self.order} to {order}")
        return PowerSeries(self.coeffs[: order + 1], self.var)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PowerSeries):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other: "PowerSeries") -> "PowerSeries":
        n = min(self.order, other.order)
        return PowerSeries([self[i] + other[i] for i in range(n + 1)], self.var)

    def __neg__(self) -> "PowerSeries":
        return PowerSeries([-c for c in self.coeffs], self.var)

    def __sub__(self, other: "PowerSeries") -> "PowerSeries":
        return self + (-other)

    def __mul__(self, other) -> "PowerSeries":
        if not isinstance(other, PowerSeries):
            c = qs(other)
            return PowerSeries([c * a for a in self.coeffs], self.var)
        n = min(self.order, other.order)
        out = []
        for i in range(n + 1):
            s = ZERO
            for j in range(i + 1):
                a, b = self.coeffs[j], other.coeffs[i - j]
                if a and b:
                    s = s + a * b
            out.append(s)
        return PowerSeries(out, self.var)

    __rmul__ = __mul__

    def inverse(self) -> "PowerSeries":
        c0 = self.coeffs[0]
        if c0.is_zero():
            raise SeriesError("series with zero constant term has no inverse")
        inv0 = c0.inverse()
        out = [inv0]
        for n in range(1, self.order + 1):
            s = ZERO
            for j in range(1, n + 1):
                if self.coeffs[j]:
                    s = s + self.coeffs[j] * out[n - j]
            out.append(-s * inv0)
        return PowerSeries(out, self.var)

    def __truediv__(self, other) -> "PowerSeries":
        if isinstance(other, PowerSeries):
            return self * other.inverse()
        return self * qs(other).inverse()

    def rescale(self, c) -> "PowerSeries":
        """Substitute x -> c*x."""
        c = qs(c)
        out, p = [], ONE
        for a in self.coeffs:
            out.append(a * p)
            p = p * c
        return PowerSeries(out, self.var)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def to_json(self) -> list:
        return [c.to_text() for c in self.coeffs]

    @classmethod
    def from_json(cls, data: list, var: str = "x") -> "PowerSeries":
        return cls([QScalar.from_text(s) for s in data], var)

    def to_text(self) -> str:
        parts = []
        for i, c in enumerate(self.coeffs):
            if c:
                mono = "" if i == 0 else (self.var if i == 1 else f"{self.var}^{i}")
                parts.append(f"({c.to_text()})" + (f"*{mono}" if mono else ""))
        return (" + ".join(parts) or "0") + f" + O({self.var}^{self.order + 1})"

    def __repr__(self) -> str:
        return f"PowerSeries({self.to_text()})"


def series_exp(s: PowerSeries) -> PowerSeries:
    """exp(s) for a series with vanishing constant term."""
    if s[0]:
        raise SeriesError("non-unipotent exponent")
    out = [ONE]
    for n in range(1, s.order + 1):
        acc = ZERO
        for j in range(1, n + 1):
            if s[j] and out[n - j]:
                acc = acc + s[j] * out[n - j] * j
        out.append(acc / n)
    return PowerSeries(out, s.var)


def series_log(s: PowerSeries) -> PowerSeries:
    """log(s) for a series with constant term 1."""
    if s[0] != ONE:
        raise SeriesError("logarithm needs constant term 1")
    out = [ZERO]
    for n in range(1, s.order + 1):
        acc = s[n] * n
        for j in range(1, n):
            if out[j] and s[n - j]:
                acc = acc - out[j] * s[n - j] * j
        out.append(acc / n)
    return PowerSeries(out, s.var)


def exponent_series(rule, order: int, var: str = "x") -> PowerSeries:
    """The series sum_{m=1}^{N} rule(m) x^m."""
    return PowerSeries([ZERO] + [rule(m) for m in range(1, order + 1)], var)


# --- q-Pochhammer -----------------------------------------------------------


def _qfactorial(base: QScalar, m: int) -> QScalar:
    p = ONE
    b = ONE
    for _ in range(m):
        b = b * base
        p = p * (ONE - b)
    return p


def pochhammer_expand(a, order: int, base=None, var: str = "x") -> PowerSeries:
    """Series of (x | a, base)_inf = prod_{n>=0} (1 - a x base^n), exact in q.

    Uses Euler's identity: the x^m coefficient is (-a)^m base^(m(m-1)/2) / (base; base)_m.
    """
    a = qs(a)
    base = q_pow(1) if base is None else qs(base)
    out = [ONE]
    for m in range(1, order + 1):
        out.append((-a) ** m * base ** (m * (m - 1) // 2) / _qfactorial(base, m))
    return PowerSeries(out, var)


def pochhammer_expand_inverse(a, order: int, base=None, var: str = "x") -> PowerSeries:
    """Series of 1/(x | a, base)_inf; the x^m coefficient is a^m / (base; base)_m."""
    a = qs(a)
    base = q_pow(1) if base is None else qs(base)
    return PowerSeries([ONE] + [a ** m / _qfactorial(base, m) for m in range(1, order + 1)], var)


# --- linear algebra over QScalar ----------------------------------------------


def solve_linear(rows: list[list[QScalar]], rhs: list[QScalar]) -> Optional[list[QScalar]]:
    """One solution of an (over/under-determined) linear system, or None if inconsistent."""
    n = len(rows[0]) if rows else 0
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, len(aug)) if aug[i][c]), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = aug[r][c].inverse()
        aug[r] = [v * inv for v in aug[r]]
        for i in range(len(aug)):
            if i != r and aug[i][c]:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
    for i in range(r, len(aug)):
        if aug[i][n]:
            return None
    sol = [ZERO] * n
    for i, c in enumerate(pivots):
        sol[c] = aug[i][n]
    return sol


# --- closed forms ---------------------------------------------------------------


def _poly_mul(a: Sequence[QScalar], b: Sequence[QScalar]) -> list[QScalar]:
    out = [ZERO] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] = out[i + j] + x * y
    return out


def _poly_eval(coeffs: Sequence[QScalar], x: QScalar) -> QScalar:
    acc = ZERO
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _trim(coeffs: list[QScalar]) -> list[QScalar]:
    while len(coeffs) > 1 and coeffs[-1].is_zero():
        coeffs.pop()
    return coeffs


@dataclass(frozen=True)
class RationalClosedForm:
    """numerator(x)/denominator(x) with denominator(0) = 1, times x**x_power."""

    numerator: tuple
    denominator: tuple
    x_power: int = 0
    kind: str = "rational"

    def series(self, order: int, var: str = "x") -> PowerSeries:
        if self.x_power < 0:
            raise SeriesError("negative monomial prefactor has no power series")
        num = PowerSeries.from_polynomial([ZERO] * self.x_power + list(self.numerator), order, var)
        den = PowerSeries.from_polynomial(list(self.denominator), order, var)
        return num / den

    def to_product(self, exponents: Iterable[Fraction]) -> Optional["ProductForm"]:
        """Factor over roots x = q**(-a) for the candidate exponents a; None if incomplete."""
        factors: dict = {}
        scalar = ONE
        for name, poly, sign in (("num", list(self.numerator), 1), ("den", list(self.denominator), -1)):
            poly = _trim(list(poly))
            c0 = poly[0]
            if c0.is_zero():
                return None
            scalar = scalar * (c0 if sign > 0 else c0.inverse())
            poly = [c / c0 for c in poly]
            for a in exponents:
                root = q_pow(-a)
                while len(poly) > 1 and _poly_eval(poly, root).is_zero():
                    poly = _divide_linear(poly, q_pow(a))
                    factors[a] = factors.get(a, 0) + sign
            if len(poly) > 1:
                return None
        return ProductForm(scalar, {a: n for a, n in factors.items() if n}, {}, self.x_power)


def _divide_linear(poly: list[QScalar], a: QScalar) -> list[QScalar]:
    """Divide p(x) (with p(0)=1 and p(1/a)=0) by (1 - a x)."""
    out = [poly[0]]
    for i in range(1, len(poly) - 1):
        out.append(poly[i] + a * out[-1])
    return out


def recognize_rational(s: PowerSeries, max_num_deg: int, max_den_deg: int) -> Optional[RationalClosedForm]:
    """Smallest-denominator rational function within the bounds matching every coefficient of s."""
    N = s.order
    if N < max_num_deg + max_den_deg + 2:
        raise SeriesError("series order too low for the requested degree bounds")
    p = max_num_deg
    for r in range(max_den_deg + 1):
        rows, rhs = [], []
        for i in range(p + 1, N + 1):
            rows.append([s[i - j] if i - j >= 0 else ZERO for j in range(1, r + 1)])
            rhs.append(-s[i])
        if r == 0:
            if any(b for b in rhs):
                continue
            sol = []
        else:
            sol = solve_linear(rows, rhs)
            if sol is None:
                continue
        den = [ONE] + sol
        num = [q_sum_conv(s, den, i) for i in range(p + 1)]
        form = RationalClosedForm(tuple(_trim(num)), tuple(_trim(den)))
        if form.series(N, s.var) == s:
            return form
    return None


def q_sum_conv(s: PowerSeries, den: Sequence[QScalar], i: int) -> QScalar:
    acc = ZERO
    for j in range(min(i, len(den) - 1) + 1):
        if den[j] and s[i - j]:
            acc = acc + den[j] * s[i - j]
    return acc


def _frac_mod(a: Fraction, b: Fraction) -> Fraction:
    return a - b * math.floor(a / b)


def _laurent_mul(a: dict, b: dict, prec) -> dict:
    out: dict = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            e = e1 + e2
            if e < prec:
                out[e] = out.get(e, 0) + c1 * c2
    return {e: c for e, c in out.items() if c}


def _laurent_inverse(a: dict, prec) -> dict:
    """Inverse of a q-series with constant term 1 and positive exponents otherwise."""
    if a.get(Fraction(0)) != 1 or min(a) < 0:
        raise SeriesError("series is not 1 + O(q)")
    rest = {e: -c for e, c in a.items() if e != 0}
    out = {Fraction(0): Fraction(1)}
    power = {Fraction(0): Fraction(1)}
    while True:
        power = _laurent_mul(power, rest, prec)
        if not power:
            return out
        for e, c in power.items():
            out[e] = out.get(e, 0) + c


@dataclass(frozen=True)
class QConstant:
    """A scalar times q-Pochhammer constants prod (q^c; q^B)_inf ** n with c > 0."""

    scalar: QScalar
    products: tuple = ()  # sorted ((c, B), n)

    @classmethod
    def make(cls, scalar, products: dict) -> "QConstant":
        return cls(qs(scalar), tuple(sorted((k, n) for k, n in products.items() if n)))

    def is_rational(self) -> bool:
        return not self.products

    def __mul__(self, other) -> "QConstant":
        if not isinstance(other, QConstant):
            return QConstant(self.scalar * qs(other), self.products)
        prods = dict(self.products)
        for k, n in other.products:
            prods[k] = prods.get(k, 0) + n
        return QConstant.make(self.scalar * other.scalar, prods)

    __rmul__ = __mul__

    def inverse(self) -> "QConstant":
        return QConstant.make(self.scalar.inverse(), {k: -n for k, n in self.products})

    def q_expansion(self, prec) -> dict:
        """Laurent expansion in q below exponent ``prec``."""
        prec = Fraction(prec)
        if self.scalar.is_zero():
            return {}
        v0 = Fraction(self.scalar.val, self.scalar.L)
        P = prec - v0  # each product is 1 + O(q), so it is needed below P only
        prod = {Fraction(0): Fraction(1)}
        for (c, B), n in self.products:
            f = {Fraction(0): Fraction(1)}
            j = 0
            while c + j * B < P:
                f = _laurent_mul(f, {Fraction(0): Fraction(1), c + j * B: Fraction(-1)}, P)
                j += 1
            if n < 0:
                f = _laurent_inverse(f, P)
            for _ in range(abs(n)):
                prod = _laurent_mul(prod, f, P)
        return _laurent_mul(self.scalar.q_expansion(prec), prod, prec)

    def to_text(self) -> str:
        s = f"({self.scalar.to_text()})"
        for (c, B), n in self.products:
            s += f"*(q^{c}; q^{B})_inf^{n}"
        return s


@dataclass(frozen=True)
class ProductForm:
    """scalar * x**x_power * prod (1 - q^a x)^n * prod (x | q^a, q^B)_inf^n.

    ``finite`` maps a -> n, ``infinite`` maps (a, B) -> n.  Zeros/poles sit at x = q^(-a).
    """

    scalar: QScalar
    finite: dict = field(default_factory=dict)
    infinite: dict = field(default_factory=dict)
    x_power: int = 0
    kind: str = "pochhammer_ratio"

    def __post_init__(self):
        object.__setattr__(self, "finite", {Fraction(a): n for a, n in self.finite.items() if n})
        object.__setattr__(self, "infinite", {(Fraction(a), Fraction(b)): n
                                              for (a, b), n in self.infinite.items() if n})

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProductForm):
            return NotImplemented
        return (self.scalar == other.scalar and self.finite == other.finite
                and self.infinite == other.infinite and self.x_power == other.x_power)

    def __hash__(self):
        return hash((self.scalar, tuple(sorted(self.finite.items())),
                     tuple(sorted(self.infinite.items())), self.x_power))

    def is_rational(self) -> bool:
        return not self.infinite

    def __mul__(self, other: "ProductForm") -> "ProductForm":
        fin = dict(self.finite)
        for a, n in other.finite.items():
            fin[a] = fin.get(a, 0) + n
        inf = dict(self.infinite)
        for k, n in other.infinite.items():
            inf[k] = inf.get(k, 0) + n
        return ProductForm(self.scalar * other.scalar, fin, inf, self.x_power + other.x_power)

    def series(self, order: int, var: str = "x") -> PowerSeries:
        out = PowerSeries.one(order, var) * self.scalar
        for a, n in self.finite.items():
            lin = PowerSeries.from_polynomial([ONE, -q_pow(a)], order, var)
            f = lin if n > 0 else lin.inverse()
            for _ in range(abs(n)):
                out = out * f
        for (a, B), n in self.infinite.items():
            f = (pochhammer_expand(q_pow(a), order, q_pow(B), var) if n > 0
                 else pochhammer_expand_inverse(q_pow(a), order, q_pow(B), var))
            for _ in range(abs(n)):
                out = out * f
        if self.x_power:
            if self.x_power < 0:
                raise SeriesError("negative monomial prefactor has no power series")
            out = PowerSeries([ZERO] * self.x_power + list(out.coeffs[: order + 1 - self.x_power]), var)
        return out

    def multiplicities(self, window: Fraction) -> dict:
        """Net multiplicity at each point x = q^e with |e| <= window (positive: zero)."""
        out: dict = {}
        for a, n in self.finite.items():
            out[-a] = out.get(-a, 0) + n
        for (a, B), n in self.infinite.items():
            j = 0
            while abs(a + j * B) <= window or (a + j * B) < 0:
                e = -(a + j * B)
                if abs(e) <= window:
                    out[e] = out.get(e, 0) + n
                j += 1
                if j > 10_000:
                    break
        return {e: n for e, n in out.items() if n}

    def poles(self, window: Fraction = Fraction(1000)) -> dict:
        return {e: -n for e, n in self.multiplicities(window).items() if n < 0}

    def zeros(self, window: Fraction = Fraction(1000)) -> dict:
        return {e: n for e, n in self.multiplicities(window).items() if n > 0}

    def order_at(self, e: Fraction) -> int:
        """Net multiplicity at x = q^e."""
        e = Fraction(e)
        total = self.finite.get(-e, 0)
        for (a, B), n in self.infinite.items():
            t = (-e - a) / B
            if t >= 0 and t.denominator == 1:
                total += n
        return total

    def regular_value(self, e: Fraction) -> QConstant:
        """Value at x = q^e of f(x) / (1 - q^-e x)^order, the singular factor removed."""
        e = Fraction(e)
        scalar = self.scalar * q_pow(e * self.x_power)
        prods: dict = {}
        for a, n in self.finite.items():
            if a + e != 0:
                scalar = scalar * (ONE - q_pow(a + e)) ** n
        for (a, B), n in self.infinite.items():
            c = a + e
            while c <= 0:
                if c != 0:
                    scalar = scalar * (ONE - q_pow(c)) ** n
                c += B
            key = (c, B)
            prods[key] = prods.get(key, 0) + n
        return QConstant.make(scalar, prods)

    def to_text(self) -> str:
        s = f"({self.scalar.to_text()})"
        if self.x_power:
            s += f"*x^{self.x_power}"
        for a, n in sorted(self.finite.items()):
            s += f"*(1 - q^{a}*x)" + (f"^{n}" if n != 1 else "")
        for (a, B), n in sorted(self.infinite.items()):
            s += f"*(x | q^{a}, q^{B})_inf" + (f"^{n}" if n != 1 else "")
        return s

    def __repr__(self):
        return f"ProductForm({self.to_text()})"


def _integer(c: Fraction) -> bool:
    return c.denominator == 1


def recognize_product(s: PowerSeries, max_base: int = 64) -> Optional[ProductForm]:
    """Recognize s = c * prod (1 - q^a x)^n * prod (x | q^a, q^B)^n, verified on every coefficient."""
    c0 = s[0]
    if c0.is_zero():
        return None
    lg = series_log(s / c0)
    N = s.order
    e = [None] + [lg[m] * m for m in range(1, N + 1)]
    if all(v.is_zero() for v in e[1:]):
        return ProductForm(c0)
    e1 = e[1]
    if e1.is_zero():
        return None
    L = e1.L
    den_terms = e1.denominator_terms()
    candidates: list[int] = []
    if len(den_terms) == 1:
        candidates = [0]
    else:
        import flint

        d = e1.den
        t = flint.fmpq_poly([0, 1])
        base0 = next((B for B in range(1, max_base * L + 1) if (t ** B - 1) % d == 0), None)
        if base0 is None:
            return None
        candidates = [base0 * j for j in range(1, max_base * L // base0 + 1)]
    for Bt in candidates:
        B = Fraction(Bt, L)
        M = e1 * (ONE - q_pow(B)) if Bt else e1
        if not M.is_laurent():
            continue
        terms = M.laurent_terms()
        if not all(_integer(c) for c in terms.values()):
            continue
        ok = True
        for m in range(2, N + 1):
            guess = QScalar.from_laurent({a * m: c for a, c in terms.items()})
            if Bt:
                guess = guess / (ONE - q_pow(B * m))
            if guess != e[m]:
                ok = False
                break
        if not ok:
            continue
        form = _canonical_product(c0, terms, B)
        return form
    return None


def _canonical_product(c0: QScalar, terms: dict, B: Fraction) -> ProductForm:
    finite: dict = {}
    infinite: dict = {}
    if B == 0:
        for a, c in terms.items():
            finite[a] = finite.get(a, 0) - int(c)
        return ProductForm(c0, finite, {})
    classes: dict = {}
    for a, c in terms.items():
        classes.setdefault(_frac_mod(a, B), {})[a] = -int(c)
    for members in classes.values():
        top = max(members)
        total = 0
        for a, n in members.items():
            total += n
            j = 0
            while a + j * B < top:
                x = a + j * B
                finite[x] = finite.get(x, 0) + n
                j += 1
        if total:
            infinite[(top, B)] = infinite.get((top, B), 0) + total
    return ProductForm(c0, finite, infinite)

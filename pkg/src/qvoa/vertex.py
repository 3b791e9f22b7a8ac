"""Normal-ordered exponential vertex operators, their contractions and mode matrices.

A :class:`VertexOp` at argument z acting on the Fock sector with zero-mode eigenvalues p is

    prefactor * exp(sum_m minus_i(m) a_i[-m] z^m) * e^{shift}
              * z^(E.p + e0) * q^(F.p) * exp(sum_m plus_i(m) a_i[m] z^-m)

where p is read on the input sector (zero modes stand to the right of the lattice shift).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Iterable, Optional, Sequence

from .fock import (FockSlice, LatticeShift, OscillatorAlgebra, SparseMatrix, Vector, Weight,
                   monomial_degree, vec_add)
from .rules import Rule
from .scalar import ONE, ZERO, QScalar, q_pow, qs
from .series import (PowerSeries, ProductForm, recognize_product,
                     recognize_rational, series_exp)


class VertexError(ValueError):
    pass


def _fr_tuple(values, n: int) -> tuple:
    vals = tuple(Fraction(v) for v in (values or ()))
    if not vals:
        return tuple(Fraction(0) for _ in range(n))
    if len(vals) != n:
        raise VertexError("zero-mode data does not match the number of families")
    return vals


def _dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


class VertexOp:
    def __init__(self, algebra: OscillatorAlgebra, *, name: str = "", prefactor=ONE,
                 shift: Optional[Iterable] = None, z_const=0, z_coeffs: Optional[Iterable] = None,
                 q_coeffs: Optional[Iterable] = None, minus: Optional[dict] = None,
                 plus: Optional[dict] = None):
        n = algebra.size
        self.algebra = algebra
        self.name = name
        self.prefactor = qs(prefactor)
        self.shift = LatticeShift(_fr_tuple(shift, n))
        self.z_const = Fraction(z_const)
        self.z_coeffs = _fr_tuple(z_coeffs, n)
        self.q_coeffs = _fr_tuple(q_coeffs, n)
        self.minus = self._rules(minus)
        self.plus = self._rules(plus)

    def _rules(self, rules: Optional[dict]) -> dict:
        out = {}
        for fam, r in (rules or {}).items():
            i = fam if isinstance(fam, int) else self.algebra.index[fam]
            if not isinstance(r, Rule):
                r = Rule(str(r))
            if not r.is_trivially_zero():
                out[i] = r
        return out

    @classmethod
    def identity(cls, algebra: OscillatorAlgebra, name: str = "1") -> "VertexOp":
        return cls(algebra, name=name)

    def _copy(self, **changes) -> "VertexOp":
        new = VertexOp.__new__(VertexOp)
        new.__dict__.update(self.__dict__)
        new.__dict__["_rescaled"] = {}
        new.__dict__.update(changes)
        return new

    def renamed(self, name: str) -> "VertexOp":
        return self._copy(name=name)

    # --- sector data -------------------------------------------------------

    def z_exponent(self, weight: Weight) -> Fraction:
        return self.z_const + _dot(self.z_coeffs, weight.values)

    def zero_mode_scalar(self, weight: Weight) -> QScalar:
        return q_pow(_dot(self.q_coeffs, weight.values))

    # --- substitution and products -------------------------------------------

    def rescaled(self, j) -> "VertexOp":
        """The operator at argument q^j z, again in canonical form."""
        j = Fraction(j)
        if j == 0:
            return self
        cache = self.__dict__.setdefault("_rescaled", {})
        if j in cache:
            return cache[j]
        out = cache[j] = self._copy(
            _rescaled={},
            prefactor=self.prefactor * q_pow(j * self.z_const),
            q_coeffs=tuple(f + j * e for f, e in zip(self.q_coeffs, self.z_coeffs)),
            minus={i: r.scaled(j) for i, r in self.minus.items()},
            plus={i: r.scaled(-j) for i, r in self.plus.items()},
        )
        return out

    def inverse(self) -> "VertexOp":
        """Inverse of a one-sided exponential (no lattice shift, no z-power)."""
        if not self.shift.is_zero() or self.z_const or any(self.z_coeffs):
            raise VertexError("only shift-free operators without z-power can be inverted")
        if self.minus and self.plus:
            raise VertexError("inverse of a two-sided exponential is not normal-ordered")
        return self._copy(
            name=f"{self.name}^-1",
            prefactor=self.prefactor.inverse(),
            q_coeffs=tuple(-f for f in self.q_coeffs),
            minus={i: -r for i, r in self.minus.items()},
            plus={i: -r for i, r in self.plus.items()},
        )

    def times(self, c) -> "VertexOp":
        return self._copy(prefactor=self.prefactor * qs(c))

    def with_z_power(self, a) -> "VertexOp":
        return self._copy(z_const=self.z_const + Fraction(a))

    def with_q_zero(self, coeffs: Sequence) -> "VertexOp":
        return self._copy(q_coeffs=tuple(f + Fraction(c) for f, c in zip(self.q_coeffs, coeffs)))

    def is_identity(self) -> bool:
        return (self.prefactor == ONE and self.shift.is_zero() and self.z_const == 0
                and not any(self.z_coeffs) and not any(self.q_coeffs)
                and not self.minus and not self.plus)

    def same_as(self, other: "VertexOp", order: int) -> bool:
        """Field-by-field equality; coefficient rules compared on m = 1..order."""
        if (self.prefactor != other.prefactor or self.shift != other.shift
                or self.z_const != other.z_const or self.z_coeffs != other.z_coeffs
                or self.q_coeffs != other.q_coeffs):
            return False
        for mine, theirs in ((self.minus, other.minus), (self.plus, other.plus)):
            for i in set(mine) | set(theirs):
                a = mine.get(i, Rule.zero())
                b = theirs.get(i, Rule.zero())
                if a.values(order) != b.values(order):
                    return False
        return True

    def differences(self, other: "VertexOp", order: int) -> list[str]:
        out = []
        for attr in ("prefactor", "shift", "z_const", "z_coeffs", "q_coeffs"):
            if getattr(self, attr) != getattr(other, attr):
                out.append(attr)
        for label, mine, theirs in (("minus", self.minus, other.minus), ("plus", self.plus, other.plus)):
            for i in sorted(set(mine) | set(theirs)):
                a = mine.get(i, Rule.zero())
                b = theirs.get(i, Rule.zero())
                if a.values(order) != b.values(order):
                    out.append(f"{label}[{self.algebra.families[i]}]")
        return out

    def to_json(self) -> dict:
        fams = self.algebra.families
        return {
            "name": self.name,
            "prefactor": self.prefactor.to_text(),
            "shift": [str(x) for x in self.shift.amounts],
            "z_exponent": {"const": str(self.z_const), "coeffs": [str(x) for x in self.z_coeffs]},
            "q_zero": [str(x) for x in self.q_coeffs],
            "minus": {fams[i]: r.source for i, r in sorted(self.minus.items())},
            "plus": {fams[i]: r.source for i, r in sorted(self.plus.items())},
        }

    @classmethod
    def from_json(cls, algebra: OscillatorAlgebra, data: dict, env=None) -> "VertexOp":
        return cls(algebra, name=data.get("name", ""),
                   prefactor=QScalar.from_text(data["prefactor"]),
                   shift=[Fraction(x) for x in data["shift"]],
                   z_const=Fraction(data["z_exponent"]["const"]),
                   z_coeffs=[Fraction(x) for x in data["z_exponent"]["coeffs"]],
                   q_coeffs=[Fraction(x) for x in data["q_zero"]],
                   minus={f: Rule(s, env) for f, s in data["minus"].items()},
                   plus={f: Rule(s, env) for f, s in data["plus"].items()})

    def __repr__(self) -> str:
        return f"VertexOp({self.name or '?'})"


def _add_rules(a: dict, b: dict) -> dict:
    out = dict(a)
    for i, r in b.items():
        out[i] = out[i] + r if i in out else r
    return out


def normal_product(A: VertexOp, B: VertexOp, jA=0, jB=0, name: str = "") -> VertexOp:
    """The single operator :A(q^jA z) B(q^jB z):."""
    if A.algebra is not B.algebra:
        raise VertexError("operators over different algebras")
    A, B = A.rescaled(jA), B.rescaled(jB)
    return VertexOp(
        A.algebra, name=name or f":{A.name}{B.name}:",
        prefactor=A.prefactor * B.prefactor,
        shift=(A.shift + B.shift).amounts,
        z_const=A.z_const + B.z_const,
        z_coeffs=[a + b for a, b in zip(A.z_coeffs, B.z_coeffs)],
        q_coeffs=[a + b for a, b in zip(A.q_coeffs, B.q_coeffs)],
        minus=_add_rules(A.minus, B.minus),
        plus=_add_rules(A.plus, B.plus),
    )


def normal_product_many(factors: Sequence[tuple], name: str = "") -> VertexOp:
    """:prod_i F_i(q^j_i z): for a list of (operator, j) pairs."""
    op, j = factors[0]
    out = op.rescaled(j)
    for op, j in factors[1:]:
        out = normal_product(out, op, 0, j)
    return out.renamed(name) if name else out


# --- contractions ------------------------------------------------------------------


@dataclass
class ContractionResult:
    """A(z)B(w) = z^z_power * w^w_power * series(x) * :A(z)B(w):, x = w/z.

    The zero-mode scalar q^(F_A.d_B) is folded into the constant coefficient of ``series``.
    """

    series: PowerSeries
    z_power: Fraction = Fraction(0)
    w_power: Fraction = Fraction(0)
    closed_form: object = None  # ProductForm or RationalClosedForm

    def is_trivial(self) -> bool:
        return (self.z_power == 0 and self.w_power == 0
                and self.series == PowerSeries.one(self.series.order, self.series.var))

    def recognize(self, max_num_deg: Optional[int] = None, max_den_deg: Optional[int] = None):
        """Attach a product closed form, or a rational one when degree bounds are given."""
        if self.closed_form is None:
            self.closed_form = recognize_product(self.series)
        if self.closed_form is None and max_num_deg is not None:
            rf = recognize_rational(self.series, max_num_deg, max_den_deg)
            self.closed_form = rf
        return self.closed_form

    def to_json(self) -> dict:
        cf = self.closed_form
        return {
            "z_power": str(self.z_power),
            "w_power": str(self.w_power),
            "series": self.series.to_json(),
            "closed_form": cf.to_text() if isinstance(cf, ProductForm) else None,
        }

    def factor_text(self, z: str = "z", w: str = "w") -> str:
        cf = self.recognize()
        mono = ""
        if self.z_power:
            mono += f"{z}^{self.z_power}*"
        if self.w_power:
            mono += f"{w}^{self.w_power}*"
        if isinstance(cf, ProductForm) and cf.is_rational():
            return mono + _rational_factor_text(cf, z, w)
        return mono + (cf.to_text() if cf is not None else self.series.to_text())


def _rational_factor_text(cf: ProductForm, z: str, w: str) -> str:
    """Render a rational product form as a function of (z, w), absorbing one z per factor
    when the monomial allows it; the fermion factor reads ``(z - w)``."""
    parts = []
    if cf.scalar != ONE:
        parts.append(f"({cf.scalar.to_text()})")
    for a, n in sorted(cf.finite.items()):
        coeff = "" if a == 0 else f"q^{a}*"
        parts.append(f"(1 - {coeff}{w}/{z})" + (f"^{n}" if n != 1 else ""))
    return "*".join(parts) or "1"


def contract(A: VertexOp, B: VertexOp, order: int, x: str = "x") -> ContractionResult:
    """Contraction of A(z)B(w) in the region |z| >> |w|."""
    if A.algebra is not B.algebra:
        raise VertexError("mismatched algebras")
    alg = A.algebra
    coeffs = [ZERO]
    for m in range(1, order + 1):
        s = ZERO
        for i, pa in A.plus.items():
            a = pa(m)
            if a.is_zero():
                continue
            for j, mb in B.minus.items():
                g = alg.gram(i, j, m)
                if g:
                    s = s + a * mb(m) * g
        coeffs.append(s)
    series = series_exp(PowerSeries(coeffs, x))
    dB = B.shift.amounts
    series = series * q_pow(_dot(A.q_coeffs, dB))
    return ContractionResult(series, z_power=_dot(A.z_coeffs, dB))


def contract_reverse(A: VertexOp, B: VertexOp, order: int) -> ContractionResult:
    """B(w)A(z) in the region |w| >> |z|: a series in z/w with a monomial in w."""
    r = contract(B, A, order, x="y")
    return ContractionResult(r.series, z_power=Fraction(0), w_power=r.z_power)


def contraction_bilinearity_check(A: VertexOp, B: VertexOp, C: VertexOp, order: int) -> bool:
    """contract(A, :BC:) == contract(A, B) * contract(A, C)."""
    lhs = contract(A, normal_product(B, C), order)
    b, c = contract(A, B, order), contract(A, C, order)
    return lhs.series == b.series * c.series and lhs.z_power == b.z_power + c.z_power


# --- sums ----------------------------------------------------------------------------


@dataclass
class SumTerm:
    coeff: QScalar
    rescale: Fraction
    op: VertexOp

    def realized(self) -> VertexOp:
        return self.op.rescaled(self.rescale)


@dataclass
class VertexSum:
    """Formal linear combination sum_i coeff_i * op_i(q^rescale_i z)."""

    terms: list = field(default_factory=list)
    name: str = ""

    @classmethod
    def single(cls, op: VertexOp, coeff=ONE, rescale=0, name: str = "") -> "VertexSum":
        return cls([SumTerm(qs(coeff), Fraction(rescale), op)], name or op.name)

    def __len__(self) -> int:
        return len(self.terms)

    def scaled(self, c) -> "VertexSum":
        c = qs(c)
        return VertexSum([SumTerm(t.coeff * c, t.rescale, t.op) for t in self.terms], self.name)

    def __add__(self, other: "VertexSum") -> "VertexSum":
        return VertexSum(self.terms + other.terms, self.name)

    def realized(self) -> list[tuple]:
        return [(t.coeff, t.realized()) for t in self.terms]

    def to_json(self) -> dict:
        return {"name": self.name,
                "terms": [{"coeff": t.coeff.to_text(), "rescale": str(t.rescale), "op": t.op.to_json()}
                          for t in self.terms]}

    def to_text(self) -> str:
        rows = []
        for t in self.terms:
            arg = "z" if t.rescale == 0 else f"q^({t.rescale})*z"
            rows.append(f"({t.coeff.to_text()}) * {t.op.name or 'op'}({arg})")
        return "\n".join(rows) if rows else "0"


def sum_same_as(a: VertexSum, b: VertexSum, order: int) -> bool:
    """Term-by-term equality of realized operators, up to term order."""
    if len(a) != len(b):
        return False
    left = [(c, op) for c, op in a.realized()]
    right = [(c, op) for c, op in b.realized()]
    used = set()
    for c, op in left:
        hit = next((k for k, (d, other) in enumerate(right)
                    if k not in used and d == c and op.same_as(other, order)), None)
        if hit is None:
            return False
        used.add(hit)
    return True


# --- action on Fock slices -----------------------------------------------------------

# A state is a dict (monomial, exps) -> QScalar, where exps are the integer powers of the
# formal variables.


def _state_add(out: dict, key, c: QScalar) -> None:
    v = out.get(key)
    v = c if v is None else v + c
    if v.is_zero():
        out.pop(key, None)
    else:
        out[key] = v


def _shift_exps(exps: tuple, var: int, k: int) -> tuple:
    e = list(exps)
    e[var] += k
    return tuple(e)


def _mono_mul(mono: tuple, var: tuple, power: int) -> tuple:
    if power == 0:
        return mono
    d = dict(mono)
    d[var] = d.get(var, 0) + power
    return tuple(sorted(d.items()))


def apply_normal(factors: Sequence[tuple], slice_: FockSlice, vec: Vector, nvars: int):
    """Act with :prod F_i(q^j_i z_{v_i}): on ``vec`` in sector ``slice_.weight``.

    ``factors`` is a list of (VertexOp, variable index, j).  Returns the output weight,
    the rational offsets of each variable's exponent and {exps: output vector}; the action is
    exact in every output component of degree <= D.
    """
    alg = slice_.algebra
    p = slice_.weight
    D = slice_.D
    zero_e = tuple(0 for _ in range(nvars))
    facs = [(op.rescaled(j), v) for op, v, j in factors]
    # substitution data for the annihilation part: a_f[-m] -> a_f[-m] + sum_v u[v][f][m] z_v^-m
    u: dict = {}
    for op, v in facs:
        for i, rule in op.plus.items():
            for m in range(1, D + 1):
                c = rule(m)
                if c.is_zero():
                    continue
                for f in range(alg.size):
                    g = alg.gram(i, f, m)
                    if g:
                        key = (f, m)
                        u.setdefault(key, {})
                        u[key][v] = u[key].get(v, ZERO) + c * g
    state: dict = {}
    for idx, coef in vec.items():
        mono = slice_.basis[idx]
        terms = {((), zero_e): coef}
        for (f, m), e in mono:
            subs = u.get((f, m), {})
            new: dict = {}
            for (mn, ex), c in terms.items():
                for t in range(e + 1):
                    base = comb(e, t)
                    # (sum_v u_v z_v^-m)^t expanded over variables
                    for combo, cc in _power_expand(subs, t, nvars):
                        ex2 = tuple(ex[w] - m * combo[w] for w in range(nvars)) if combo else ex
                        _state_add(new, (_mono_mul(mn, (f, m), e - t), ex2), c * (cc * base))
            terms = new
        for key, c in terms.items():
            _state_add(state, key, c)
    # zero modes
    scalar = ONE
    offsets = [Fraction(0)] * nvars
    out_w = p
    for op, v in facs:
        scalar = scalar * op.prefactor * op.zero_mode_scalar(p)
        offsets[v] += op.z_exponent(p)
        out_w = out_w + op.shift
    # creation part
    minus: dict = {}
    for op, v in facs:
        for i, rule in op.minus.items():
            for m in range(1, D + 1):
                c = rule(m)
                if c:
                    minus.setdefault((i, m), {})
                    minus[(i, m)][v] = minus[(i, m)].get(v, ZERO) + c
    for gen in sorted(minus):
        i, m = gen
        new: dict = {}
        for (mn, ex), c in state.items():
            room = (D - monomial_degree(mn)) // m
            for t in range(room + 1):
                for combo, cc in _power_expand(minus[gen], t, nvars):
                    ex2 = tuple(ex[w] + m * combo[w] for w in range(nvars)) if combo else ex
                    _state_add(new, (_mono_mul(mn, gen, t), ex2), c * (cc * Fraction(1, factorial(t))))
        state = new
    out: dict = {}
    for (mn, ex), c in state.items():
        idx = slice_.index.get(mn)
        if idx is None:
            continue
        c = c * scalar
        out.setdefault(ex, {})
        out[ex] = vec_add(out[ex], {idx: c})
    return out_w, tuple(offsets), {e: v for e, v in out.items() if v}


def action_table(factors: Sequence[tuple], slice_: FockSlice, nvars: int) -> list:
    """:func:`apply_normal` on every basis vector of the slice."""
    return [apply_normal(factors, slice_, {j: ONE}, nvars) for j in range(slice_.dim)]


def _power_expand(coeffs: dict, t: int, nv: int):
    """Terms of (sum_v c_v z_v)^t as (exponent tuple or None, coefficient)."""
    if t == 0:
        yield None, ONE
        return
    vars_ = sorted(coeffs)
    if not vars_:
        return

    def rec(pos: int, left: int, acc: list, coef: QScalar, mult: int):
        if pos == len(vars_) - 1:
            acc2 = acc + [left]
            c = coef * coeffs[vars_[pos]] ** left
            exps = [0] * nv
            for v, e in zip(vars_, acc2):
                exps[v] = e
            yield tuple(exps), c * mult
            return
        for e in range(left + 1):
            yield from rec(pos + 1, left - e, acc + [e], coef * coeffs[vars_[pos]] ** e,
                           mult * comb(left, e))

    for exps, c in rec(0, t, [], ONE, 1):
        yield exps, c


def mode_matrices(V: VertexOp, slice_: FockSlice, n_range: Iterable[int]) -> dict:
    """{n: V_n} with V(z) = sum_n V_n z^(-n - eps(p)) on the sector of ``slice_``.

    V_n maps the input slice into the slice of the shifted weight (same basis indexing),
    lowering degree by n.
    """
    wanted = set(n_range)
    mats = {n: {} for n in wanted}
    for j in range(slice_.dim):
        _, _, out = apply_normal([(V, 0, 0)], slice_, {j: ONE}, 1)
        for (e,), vec in out.items():
            n = -e
            if n in wanted:
                mats[n][j] = vec
    return {n: SparseMatrix(slice_.dim, slice_.dim, cols) for n, cols in mats.items()}


def oracle_contraction_check(A: VertexOp, B: VertexOp, slice_: FockSlice, order: int) -> tuple:
    """Compare A(z)B(w) computed by composing actions with contraction x :A(z)B(w):.

    Only output coefficients unaffected by truncation are compared: the intermediate degree
    must stay <= D and the series must reach every needed power.  Returns (ok, compared).
    """
    D = slice_.D
    res = contract(A, B, order)
    c = res.series
    compared = 0
    tab_B = action_table([(B, 1, 0)], slice_, 2)
    tab_N = action_table([(A, 0, 0), (B, 1, 0)], slice_, 2)
    mid = slice_.with_weight(tab_B[0][0])
    tab_A = action_table([(A, 0, 0)], mid, 2)
    for j in range(slice_.dim):
        wB, offB, outB = tab_B[j]
        lhs: dict = {}
        offA = tab_A[0][1]
        for ex_w, vec in outB.items():
            for idx, cv in vec.items():
                for ex_z, v2 in tab_A[idx][2].items():
                    key = (ex_z[0], ex_w[1])
                    lhs[key] = vec_add(lhs.get(key, {}), v2, cv)
        _, offN, outN = tab_N[j]
        if offA[0] != offN[0] + res.z_power or offB[1] != offN[1]:
            return False, compared
        ez_values = {k[0] for k in lhs} | {k[0] for k in outN}
        ew_values = {k[1] for k in lhs} | {k[1] for k in outN}
        for ez in ez_values:
            n = -ez
            if D + n > order:
                continue
            for ew in ew_values:
                rhs: dict = {}
                for t in range(order + 1):
                    if c[t]:
                        v = outN.get((ez + t, ew - t))
                        if v:
                            rhs = vec_add(rhs, v, c[t])
                left = lhs.get((ez, ew), {})
                for idx in set(left) | set(rhs):
                    if slice_.degrees[idx] + n > D:
                        continue
                    compared += 1
                    if left.get(idx, ZERO) != rhs.get(idx, ZERO):
                        return False, compared
    return True, compared

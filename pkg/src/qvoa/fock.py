"""Deformed Heisenberg algebras, truncated Fock modules and exact sparse mode matrices."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .scalar import ONE, ZERO, QScalar, qs


class FockError(ValueError):
    pass


class OscillatorAlgebra:
    """Families of oscillators a_i[m] with [a_i[m], a_j[-m]] = gram(i, j, m) for m > 0.

    ``gram`` maps unordered family pairs to a :class:`Rule` (or a callable of m); pairs
    that are absent commute.
    """

    def __init__(self, families: Sequence[str], gram: Mapping[tuple, object], name: str = "H"):
        self.name = name
        self.families = tuple(families)
        if len(set(self.families)) != len(self.families):
            raise FockError("duplicate oscillator family")
        self.index = {f: i for i, f in enumerate(self.families)}
        self._gram: dict = {}
        for (a, b), rule in gram.items():
            if a not in self.index or b not in self.index:
                raise FockError(f"gram entry for undeclared family ({a}, {b})")
            key = tuple(sorted((self.index[a], self.index[b])))
            if key in self._gram and self._gram[key] is not rule:
                raise FockError(f"conflicting gram entries for ({a}, {b})")
            self._gram[key] = rule
        self._cache: dict = {}

    @property
    def size(self) -> int:
        return len(self.families)

    def gram(self, i: int, j: int, m: int) -> QScalar:
        key = (min(i, j), max(i, j), m)
        v = self._cache.get(key)
        if v is None:
            rule = self._gram.get(key[:2])
            v = ZERO if rule is None else qs(rule(m))
            self._cache[key] = v
        return v

    def gram_rule(self, a: str, b: str):
        return self._gram.get(tuple(sorted((self.index[a], self.index[b]))))

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "families": list(self.families),
            "gram": [[self.families[i], self.families[j], getattr(r, "source", None)]
                     for (i, j), r in sorted(self._gram.items())],
        }

    def same_as(self, other: "OscillatorAlgebra", order: int) -> bool:
        if self.families != other.families:
            return False
        n = self.size
        return all(self.gram(i, j, m) == other.gram(i, j, m)
                   for i in range(n) for j in range(i, n) for m in range(1, order + 1))


@dataclass(frozen=True)
class Weight:
    """Zero-mode eigenvalues, one exact rational per family."""

    values: tuple

    @classmethod
    def zero(cls, n: int) -> "Weight":
        return cls(tuple(Fraction(0) for _ in range(n)))

    @classmethod
    def of(cls, values: Iterable) -> "Weight":
        return cls(tuple(Fraction(v) for v in values))

    def __add__(self, shift: "LatticeShift") -> "Weight":
        return Weight(tuple(a + b for a, b in zip(self.values, shift.amounts)))


@dataclass(frozen=True)
class LatticeShift:
    """Per-family shift of zero-mode eigenvalues produced by a lattice exponential."""

    amounts: tuple

    @classmethod
    def zero(cls, n: int) -> "LatticeShift":
        return cls(tuple(Fraction(0) for _ in range(n)))

    @classmethod
    def of(cls, values: Iterable) -> "LatticeShift":
        return cls(tuple(Fraction(v) for v in values))

    def __add__(self, other: "LatticeShift") -> "LatticeShift":
        return LatticeShift(tuple(a + b for a, b in zip(self.amounts, other.amounts)))

    def is_zero(self) -> bool:
        return not any(self.amounts)


# A monomial prod a_i[-m]^e is a sorted tuple of ((i, m), e).
Monomial = tuple


def monomial_degree(mono: Monomial) -> int:
    return sum(m * e for (_, m), e in mono)


def _partitions(d: int, max_part: int):
    if d == 0:
        yield ()
        return
    for p in range(min(d, max_part), 0, -1):
        for rest in _partitions(d - p, p):
            yield (p,) + rest


def _colored_monomials(n_fam: int, d: int) -> list:
    """All monomials of degree d in the variables a_i[-m], i < n_fam."""
    out = set()

    def rec(slots: list, degree_left: int, start: int, acc: dict):
        if degree_left == 0:
            out.add(tuple(sorted(acc.items())))
            return
        for idx in range(start, len(slots)):
            i, m = slots[idx]
            if m > degree_left:
                continue
            acc[(i, m)] = acc.get((i, m), 0) + 1
            rec(slots, degree_left - m, idx, acc)
            acc[(i, m)] -= 1
            if not acc[(i, m)]:
                del acc[(i, m)]

    slots = [(i, m) for i in range(n_fam) for m in range(1, d + 1)]
    rec(slots, d, 0, {})
    return sorted(out)


def colored_partition_counts(n_fam: int, D: int) -> list[int]:
    """Coefficients of prod_m (1 - t^m)^(-n_fam) up to t^D."""
    c = [1] + [0] * D
    for m in range(1, D + 1):
        for _ in range(n_fam):
            for d in range(m, D + 1):
                c[d] += c[d - m]
    return c


# --- sparse linear algebra ------------------------------------------------------

Vector = dict  # basis index -> QScalar


def vec_add(a: Vector, b: Vector, scale: QScalar = ONE) -> Vector:
    out = dict(a)
    for i, v in b.items():
        w = out.get(i, ZERO) + scale * v
        if w.is_zero():
            out.pop(i, None)
        else:
            out[i] = w
    return out


def vec_scale(a: Vector, c: QScalar) -> Vector:
    if c.is_zero():
        return {}
    return {i: v * c for i, v in a.items()}


class SparseMatrix:
    """Column-major sparse matrix over QScalar: ``cols[j]`` is the image of basis vector j."""

    __slots__ = ("nrows", "ncols", "cols")

    def __init__(self, nrows: int, ncols: int, cols: Optional[dict] = None):
        self.nrows = nrows
        self.ncols = ncols
        self.cols = {j: c for j, c in (cols or {}).items() if c}

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        return cls(n, n, {j: {j: ONE} for j in range(n)})

    def column(self, j: int) -> Vector:
        return self.cols.get(j, {})

    def apply(self, v: Vector) -> Vector:
        out: Vector = {}
        for j, c in v.items():
            col = self.cols.get(j)
            if col:
                out = vec_add(out, col, c)
        return out

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.ncols != other.nrows:
            raise FockError("shape mismatch in matrix product")
        return SparseMatrix(self.nrows, other.ncols,
                            {j: self.apply(c) for j, c in other.cols.items()})

    def __add__(self, other: "SparseMatrix") -> "SparseMatrix":
        cols = dict(self.cols)
        for j, c in other.cols.items():
            cols[j] = vec_add(cols.get(j, {}), c)
        return SparseMatrix(self.nrows, self.ncols, cols)

    def __neg__(self) -> "SparseMatrix":
        return self.scale(-ONE)

    def __sub__(self, other: "SparseMatrix") -> "SparseMatrix":
        return self + other.scale(-ONE)

    def scale(self, c) -> "SparseMatrix":
        c = qs(c)
        return SparseMatrix(self.nrows, self.ncols, {j: vec_scale(v, c) for j, v in self.cols.items()})

    def entry(self, i: int, j: int) -> QScalar:
        return self.cols.get(j, {}).get(i, ZERO)

    def is_zero(self) -> bool:
        return not self.cols

    def restrict(self, rows: Iterable[int], cols: Iterable[int]) -> "SparseMatrix":
        rows = set(rows)
        out = {}
        for j in cols:
            c = {i: v for i, v in self.cols.get(j, {}).items() if i in rows}
            if c:
                out[j] = c
        return SparseMatrix(self.nrows, self.ncols, out)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return self.cols == other.cols

    def rows_json(self) -> list:
        return [[self.entry(i, j).to_text() for j in range(self.ncols)] for i in range(self.nrows)]


class FockSlice:
    """Fock module over ``weight`` truncated at total mode degree ``D``."""

    def __init__(self, algebra: OscillatorAlgebra, weight: Weight, D: int):
        if D < 0:
            raise FockError("degree cap must be non-negative")
        if len(weight.values) != algebra.size:
            raise FockError("weight does not match the number of families")
        self.algebra = algebra
        self.weight = weight
        self.D = D
        self.basis: list = []
        for d in range(D + 1):
            self.basis.extend(_colored_monomials(algebra.size, d))
        self.index = {mono: i for i, mono in enumerate(self.basis)}
        self.degrees = [monomial_degree(b) for b in self.basis]
        self._matrices: dict = {}

    @property
    def dim(self) -> int:
        return len(self.basis)

    def with_weight(self, weight: Weight) -> "FockSlice":
        other = FockSlice.__new__(FockSlice)
        other.algebra, other.weight, other.D = self.algebra, weight, self.D
        other.basis, other.index, other.degrees = self.basis, self.index, self.degrees
        other._matrices = self._matrices
        return other

    def indices_up_to(self, d: int) -> list[int]:
        return [i for i, g in enumerate(self.degrees) if g <= d]

    def vacuum(self) -> Vector:
        return {0: ONE}

    def mono_label(self, mono: Monomial) -> str:
        if not mono:
            return "|0>"
        fams = self.algebra.families
        return "*".join(f"{fams[i]}[-{m}]" + (f"^{e}" if e > 1 else "") for (i, m), e in mono)


def build_basis(algebra: OscillatorAlgebra, weight: Weight, D: int) -> FockSlice:
    """Graded basis: by degree, then lexicographic in ((family, mode), exponent)."""
    return FockSlice(algebra, weight, D)


def _mul_var(mono: Monomial, var: tuple, power: int = 1) -> Monomial:
    d = dict(mono)
    d[var] = d.get(var, 0) + power
    if d[var] == 0:
        del d[var]
    return tuple(sorted(d.items()))


def mode_matrix(slice_: FockSlice, family, m: int) -> SparseMatrix:
    """Exact matrix of a_family[m] on the slice (m != 0)."""
    if m == 0:
        raise FockError("zero modes act by the weight; use zero_mode_eigenvalue")
    if abs(m) > slice_.D:
        raise FockError("mode exceeds truncation")
    i = family if isinstance(family, int) else slice_.algebra.index[family]
    key = ("mode", i, m)
    if key in slice_._matrices:
        return slice_._matrices[key]
    cols = {}
    alg = slice_.algebra
    for j, mono in enumerate(slice_.basis):
        if m < 0:
            new = _mul_var(mono, (i, -m))
            idx = slice_.index.get(new)
            if idx is not None:
                cols[j] = {idx: ONE}
        else:
            col: Vector = {}
            for (f, mm), e in mono:
                if mm != m:
                    continue
                g = alg.gram(i, f, m)
                if g.is_zero():
                    continue
                idx = slice_.index[_mul_var(mono, (f, m), -1)]
                col = vec_add(col, {idx: g * e})
            if col:
                cols[j] = col
    mat = SparseMatrix(slice_.dim, slice_.dim, cols)
    slice_._matrices[key] = mat
    return mat


def zero_mode_eigenvalue(slice_: FockSlice, family) -> Fraction:
    i = family if isinstance(family, int) else slice_.algebra.index[family]
    return slice_.weight.values[i]


def safe_degree(slice_: FockSlice, *raises: int) -> int:
    """Largest input degree on which identities among operators raising degree by
    ``raises`` (only positive entries count) are free of truncation effects."""
    d = slice_.D - sum(r for r in raises if r > 0)
    return d if d >= 0 else -1


def dump_matrix_tsv(mat: SparseMatrix) -> str:
    return "\n".join("\t".join(row) for row in mat.rows_json()) + "\n"


def dump_matrix_json(mat: SparseMatrix) -> str:
    return json.dumps({"rows": mat.nrows, "cols": mat.ncols, "entries": mat.rows_json()})

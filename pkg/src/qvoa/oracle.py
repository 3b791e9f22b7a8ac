"""Matrix oracle for bilocal operator identities on truncated Fock slices.

A bilocal A(z)B(w) is stored by coefficient: {(ez, ew): {input index: output vector}} with
exact rational exponents.  Truncation can only drop contributions whose intermediate state
exceeds the degree cap; :meth:`Bilocal.exact` decides when an entry is free of that effect.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional, Sequence

import flint

from .fock import FockSlice, vec_add
from .scalar import ONE, ZERO, QScalar
from .vertex import VertexOp, VertexSum, apply_normal


@dataclass
class Bilocal:
    entries: dict
    outer: int  # 0: outer operator sits at z, 1: at w
    pairs: tuple  # (outer offset, inner offset, outer lowers, inner raises) per term pair
    D: int

    def exact(self, key: tuple, d_out: int, d_in: int) -> bool:
        """True unless some term pair could route through an intermediate state above D.

        The intermediate degree equals d_out - n_outer = d_in + n_inner for the integral
        parts n of the exponents, so a single coefficient pins it.
        """
        eo, ei = key[self.outer], key[1 - self.outer]
        for off_o, off_i, lowers, raises in self.pairs:
            n_o, n_i = eo - off_o, ei - off_i
            if n_o.denominator != 1 or n_i.denominator != 1:
                continue
            n_o, n_i = int(n_o), int(n_i)
            if (not lowers and n_o < 0) or (not raises and n_i > 0):
                continue
            mid = d_in + n_i
            if mid != d_out - n_o or mid < 0:
                continue
            if mid > self.D:
                return False
        return True


@dataclass(frozen=True)
class KeyFilter:
    """Bounds on the (ez, ew) coefficients a bilocal needs; None means unbounded."""

    z: Optional[tuple] = None
    w: Optional[tuple] = None
    total: Optional[tuple] = None

    def var_ok(self, var: int, e) -> bool:
        b = self.z if var == 0 else self.w
        return b is None or b[0] <= e <= b[1]

    def __call__(self, ez, ew) -> bool:
        if not (self.var_ok(0, ez) and self.var_ok(1, ew)):
            return False
        return self.total is None or self.total[0] <= ez + ew <= self.total[1]


def _table(op: VertexOp, slice_: FockSlice, var: int):
    return [apply_normal([(op, var, 0)], slice_, {j: ONE}, 2) for j in range(slice_.dim)]


def _poly_table(tab: list, L: int):
    """Put every entry of an action table over one denominator in t = q^(1/L).

    Returns (den, V, rows) with entry = t^V * rows[j][ex][idx] / den, so products of
    tables only need polynomial arithmetic.
    """
    lifted = []
    dens: dict = {}
    V = None
    for _, _, outs in tab:
        row = {}
        for ex, vec in outs.items():
            r = {}
            for idx, x in vec.items():
                n, d, v = x._lift(L)
                r[idx] = (n, d, v)
                dens.setdefault(tuple(d.coeffs()), d)
                V = v if V is None else min(V, v)
            row[ex] = r
        lifted.append(row)
    den = flint.fmpq_poly([1])
    for d in dens.values():
        den = den * d // den.gcd(d)
    rows = []
    for row in lifted:
        out = {}
        for ex, r in row.items():
            out[ex] = {idx: (n * (den // d)).left_shift(v - V) for idx, (n, d, v) in r.items()}
        rows.append(out)
    return den, (V or 0), rows


def _table_L(tab: list) -> int:
    L = 1
    for _, _, outs in tab:
        for vec in outs.values():
            for x in vec.values():
                L = L * x.L // gcd(L, x.L)
    return L


def bilocal(A: VertexSum, B: VertexSum, slice_: FockSlice, a_outer: bool = True,
            keep: Optional[KeyFilter] = None, cache: Optional[dict] = None) -> Bilocal:
    """A(z)B(w) (``a_outer``) or B(w)A(z) on the sector of ``slice_``.

    ``keep`` optionally restricts which coefficients are accumulated; ``cache``
    may be shared between calls to reuse action tables.
    """
    if a_outer:
        outer, inner, ov, iv = A, B, 0, 1
    else:
        outer, inner, ov, iv = B, A, 1, 0
    entries: dict = {}
    pairs = set()
    cache = {} if cache is None else cache

    def table(op, sl, var):
        key = (id(op), sl.weight.values, var)
        if key not in cache:
            cache[key] = (op, _table(op, sl, var))
        return cache[key][1]

    def ptable(op, sl, var, L):
        key = (id(op), sl.weight.values, var, L)
        if key not in cache:
            cache[key] = (op, _poly_table(table(op, sl, var), L))
        return cache[key][1]

    # one global denominator: every pair contributes t^V * poly / den with shared t = q^(1/L)
    plan = []
    for ci, iop in inner.realized():
        tab_i = table(iop, slice_, iv)
        mid = slice_.with_weight(tab_i[0][0])
        for co, oop in outer.realized():
            tab_o = table(oop, mid, ov)
            plan.append((ci * co, iop, tab_i, mid, oop, tab_o))
    L = 1
    for c, _, tab_i, _, _, tab_o in plan:
        for x in (c.L, _table_L(tab_i), _table_L(tab_o)):
            L = L * x // gcd(L, x)
    staged = []
    for c, iop, tab_i, mid, oop, tab_o in plan:
        off_o = tab_o[0][1][ov]
        off_i = tab_i[0][1][iv]
        pairs.add((off_o, off_i, bool(oop.plus), bool(iop.minus)))
        den_i, V_i, rows_i = ptable(iop, slice_, iv, L)
        den_o, V_o, rows_o = ptable(oop, mid, ov, L)
        nc, dc, vc = c._lift(L)
        staged.append((nc, den_i * den_o * dc, V_i + V_o + vc, off_o, off_i, rows_i, rows_o))
    den = flint.fmpq_poly([1])
    for st in staged:
        den = den * st[1] // den.gcd(st[1])
    V = min(st[2] for st in staged) if staged else 0
    acc: dict = {}
    for nc, d, v, off_o, off_i, rows_i, rows_o in staged:
        mult = (nc * (den // d)).left_shift(v - V)
        part: dict = {}
        keys: dict = {}
        for j in range(slice_.dim):
            for ex_i, vec in rows_i[j].items():
                e_i = ex_i[iv]
                if keep is not None and not keep.var_ok(iv, off_i + e_i):
                    continue
                for idx, pi in vec.items():
                    for ex_o, v2 in rows_o[idx].items():
                        e_o = ex_o[ov]
                        key = keys.get((e_o, e_i), 0)
                        if key == 0:
                            eo, ei = off_o + e_o, off_i + e_i
                            key = (eo, ei) if ov == 0 else (ei, eo)
                            if keep is not None and not keep(*key):
                                key = None
                            keys[(e_o, e_i)] = key
                        if key is None:
                            continue
                        col = part.setdefault(key, {}).setdefault(j, {})
                        for out_idx, po in v2.items():
                            prev = col.get(out_idx)
                            col[out_idx] = po * pi if prev is None else prev + po * pi
        for key, cols in part.items():
            acol = acc.setdefault(key, {})
            for j, vec in cols.items():
                avec = acol.setdefault(j, {})
                for out_idx, poly in vec.items():
                    prev = avec.get(out_idx)
                    avec[out_idx] = poly * mult if prev is None else prev + poly * mult
    for key, cols in acc.items():
        ecol = {}
        for j, vec in cols.items():
            out = {}
            for out_idx, poly in vec.items():
                if not poly.is_zero():
                    out[out_idx] = QScalar._make(poly, den, V, L)
            if out:
                ecol[j] = out
        if ecol:
            entries[key] = ecol
    return Bilocal(entries, ov, tuple(sorted(pairs)), slice_.D)


def single(A: VertexSum, slice_: FockSlice, var: int = 0) -> dict:
    """{exponent: {input: output}} for a one-point vertex sum."""
    out: dict = {}
    for c, op in A.realized():
        tab = _table(op, slice_, var)
        off = tab[0][1][var]
        for j in range(slice_.dim):
            for ex, vec in tab[j][2].items():
                key = Fraction(ex[var]) + off
                col = out.setdefault(key, {})
                col[j] = vec_add(col.get(j, {}), vec, c)
    return out


@dataclass
class Term:
    """multiplier(z, w) * bilocal, multiplier = {(dz, dw): scalar} (a finite Laurent sum)."""

    multiplier: dict
    bl: Bilocal


@dataclass
class DeltaSide:
    """weight * delta(w / (x0 z)) * O(z)."""

    weight: QScalar
    x0: QScalar
    table: dict  # from single()


def _lookup(t, key: tuple):
    """[(scalar, entry columns)] contributing to ``key``, or None if truncation interferes
    for some output degree (returned separately as the set of bad keys)."""
    if isinstance(t, DeltaSide):
        ew = key[1]
        if ew.denominator != 1:
            return []
        col = t.table.get(key[0] + ew)
        return [] if col is None else [(t.weight * t.x0 ** (-int(ew)), col, None)]
    out = []
    for (dz, dw), c in t.multiplier.items():
        k2 = (key[0] - dz, key[1] - dw)
        out.append((c, t.bl.entries.get(k2, {}), (t.bl, k2)))
    return out


def compare(lhs: Sequence, rhs: Sequence, slice_: FockSlice, window) -> dict:
    """Compare sum(lhs) and sum(rhs) coefficient-wise for |ez|, |ew| <= window.

    Each side is a list of :class:`Term` or :class:`DeltaSide`.  Entries touched by
    truncation are skipped.  Returns counts and the first mismatch.
    """
    keys = set()
    for t in list(lhs) + list(rhs):
        if isinstance(t, Term):
            for (ez, ew) in t.bl.entries:
                for (dz, dw) in t.multiplier:
                    keys.add((ez + dz, ew + dw))
        else:
            for ez in t.table:
                for ew in range(-int(window) - 1, int(window) + 2):
                    keys.add((ez - ew, Fraction(ew)))
    keys = {k for k in keys if abs(k[0]) <= window and abs(k[1]) <= window}
    compared = skipped = 0
    mismatch = None
    for key in sorted(keys):
        sides = [[x for t in side for x in _lookup(t, key)] for side in (lhs, rhs)]
        pairs = set()
        for side in sides:
            for _, col, _ in side:
                for j, vec in col.items():
                    pairs.update((j, idx) for idx in vec)
        for j, idx in sorted(pairs):
            d_out, d_in = slice_.degrees[idx], slice_.degrees[j]
            if any(src is not None and not src[0].exact(src[1], d_out, d_in)
                   for side in sides for _, _, src in side):
                skipped += 1
                continue
            vals = []
            for side in sides:
                s = ZERO
                for c, col, _ in side:
                    v = col.get(j, {}).get(idx)
                    if v is not None:
                        s = s + c * v
                vals.append(s)
            compared += 1
            if vals[0] != vals[1] and mismatch is None:
                mismatch = {"key": [str(key[0]), str(key[1])], "input": j, "output": idx,
                            "lhs": vals[0].to_text(), "rhs": vals[1].to_text()}
    return {"pass": mismatch is None and compared > 0, "compared": compared,
            "skipped": skipped, "mismatch": mismatch}


def series_multiplier(coeffs: Sequence[QScalar], in_w_over_z: bool = True) -> dict:
    """sum_j c_j (w/z)^j (or (z/w)^j) as a multiplier dict."""
    out = {}
    for j, c in enumerate(coeffs):
        if c:
            out[(-j, j) if in_w_over_z else (j, -j)] = c
    return out

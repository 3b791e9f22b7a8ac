"""The level-k free-field catalog: Heisenberg algebra, currents, parafermions, screenings."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction

from .fock import OscillatorAlgebra, Weight
from .rules import Rule
from .scalar import ONE, q_pow
from .vertex import SumTerm, VertexOp, VertexSum, normal_product_many

FAMILIES = ("alpha", "abar", "beta")


def default_order() -> int:
    return int(os.environ.get("QVOA_DEFAULT_ORDER", "12"))


@dataclass(frozen=True)
class ModelConfig:
    k: int = 1
    N: int = field(default_factory=default_order)
    D: int = 4
    sector: tuple = (0, 0, 0)  # (l, m1, m2)
    mode_range: int = 2
    measure: str = "dw"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("level must be a positive integer")
        if self.N < 2:
            raise ValueError("series order must be at least 2")
        if self.D < 2:
            raise ValueError("Fock degree cap must be at least 2")
        if self.measure not in ("dw", "dw/w"):
            raise ValueError("measure must be 'dw' or 'dw/w'")

    def weight(self) -> Weight:
        """Zero-mode eigenvalues (alpha_0, abar_0, beta_0) = (2 m1, -2 m2, 2 l)."""
        l, m1, m2 = (Fraction(x) for x in self.sector)
        return Weight.of([2 * m1, -2 * m2, 2 * l])


def make_algebra(k: int) -> OscillatorAlgebra:
    env = {"k": k}
    return OscillatorAlgebra(FAMILIES, {
        ("alpha", "alpha"): Rule("qint(2*m)*qint(k*m)/m", env),
        ("abar", "abar"): Rule("-qint(2*m)*qint(k*m)/m", env),
        ("beta", "beta"): Rule("qint(2*m)*qint((k+2)*m)/m", env),
    }, name=f"H3(k={k})")


@dataclass
class Catalog:
    k: int
    algebra: OscillatorAlgebra
    ops: dict = field(default_factory=dict)
    sums: dict = field(default_factory=dict)

    def op(self, name: str) -> VertexOp:
        return self.ops[name]

    def as_sum(self, name: str) -> VertexSum:
        if name in self.sums:
            return self.sums[name]
        if name in self.ops:
            return VertexSum.single(self.ops[name])
        raise KeyError(name)

    def names(self) -> list[str]:
        return sorted(self.ops) + sorted(self.sums)


def _h(x) -> Fraction:
    return Fraction(x)


def make_catalog(cfg: ModelConfig | int) -> Catalog:
    k = cfg.k if isinstance(cfg, ModelConfig) else int(cfg)
    alg = make_algebra(k)
    env = {"k": k}

    def R(src: str) -> Rule:
        return Rule(src, env)

    def op(name, **kw) -> VertexOp:
        return VertexOp(alg, name=name, **kw)

    ops: dict = {}
    kk = Fraction(1, k)
    # lattice vertex operators on alpha, abar or both
    for name, fams in (("Y", ("alpha", "abar")), ("Ybar", ("abar",)), ("V", ("alpha",))):
        shift_p = [2 if "alpha" in fams else 0, -2 if "abar" in fams else 0, 0]
        zc = [kk if "alpha" in fams else 0, kk if "abar" in fams else 0, 0]
        ops[name + "p"] = op(
            name + "p", shift=shift_p, z_coeffs=zc,
            minus={f: R("qpow(-k*m/2)/qint(k*m)") for f in fams},
            plus={f: R("-qpow(-k*m/2)/qint(k*m)") for f in fams})
        ops[name + "m"] = op(
            name + "m", shift=[-s for s in shift_p], z_coeffs=[-c for c in zc],
            minus={f: R("-qpow(k*m/2)/qint(k*m)") for f in fams},
            plus={f: R("qpow(k*m/2)/qint(k*m)") for f in fams})
    # one-sided exponentials with zero-mode factors
    for name, fam in (("Z", "abar"), ("W", "beta")):
        qc = [0, 0, 0]
        qc[FAMILIES.index(fam)] = Fraction(-1, 2)
        ops[name + "p"] = op(name + "p", q_coeffs=qc,
                             plus={fam: R("-(q - 1/q)*qint(m)/qint(2*m)")})
        ops[name + "m"] = op(name + "m", q_coeffs=[-c for c in qc],
                             minus={fam: R("(q - 1/q)*qint(m)/qint(2*m)")})
    # screening currents and the B_1^+ body
    scr = {
        "Sp": ("qpow(k*m/2)/qint(2*m)", "qpow((k+2)*m/2)/qint(2*m)", -k, 1),
        "Sm": ("qpow(-k*m/2)/qint(2*m)", "-qpow(-(k+2)*m/2)/qint(2*m)", k, -1),
        "B1p": ("qpow((k+2)*m/2)/qint(2*m)", "qpow((k+4)*m/2)/qint(2*m)", -k, 1),
    }
    for name, (b_src, a_src, d_abar, sgn) in scr.items():
        ops[name] = op(name, shift=[0, d_abar, k + 2], z_coeffs=[0, Fraction(sgn, 2), Fraction(1, 2)],
                       minus={"beta": R(b_src), "abar": R(a_src)},
                       plus={"beta": -R(b_src), "abar": -R(a_src)})
    # Drinfeld Cartan currents built on alpha
    # the overall sign is fixed by the [X^+, X^-] relation (conjugation relations leave it free)
    ops["psi"] = op("psi", prefactor=-1, q_coeffs=[1, 0, 0], plus={"alpha": R("q - 1/q")})
    ops["phi"] = op("phi", prefactor=-1, q_coeffs=[-1, 0, 0], minus={"alpha": R("-(q - 1/q)")})

    Zp, Zm, Wp, Wm = ops["Zp"], ops["Zm"], ops["Wp"], ops["Wm"]
    h1, h2 = _h(Fraction(k + 2, 2)), _h(Fraction(k, 2))
    inv = 1 / (q_pow(1) - q_pow(-1))

    def plus_terms(lead):
        t1 = normal_product_many([(lead, 0), (Zp, -h1), (Wp, -h2)])
        t2 = normal_product_many([(lead, 0), (Wm, h2), (Zm, h1)])
        return t1, t2

    def minus_terms(lead):
        t1 = normal_product_many([(lead, 0), (Zp, h1), (Wp.inverse(), h2)])
        t2 = normal_product_many([(lead, 0), (Wm.inverse(), -h2), (Zm, -h1)])
        return t1, t2

    x1p, x2p = plus_terms(ops["Yp"])
    x1m, x2m = minus_terms(ops["Ym"])
    f1p, f2p = plus_terms(ops["Ybarp"])
    f1m, f2m = minus_terms(ops["Ybarm"])
    for name, o in (("X1p", x1p), ("X2p", x2p), ("X1m", x1m), ("X2m", x2m),
                    ("Phi1p", f1p), ("Phi2p", f2p), ("Phi1m", f1m), ("Phi2m", f2m)):
        ops[name] = o.renamed(name)

    def two(name, a, b):
        return VertexSum([SumTerm(inv, Fraction(0), ops[a]), SumTerm(-inv, Fraction(0), ops[b])], name)

    sums = {
        "Xp": two("Xp", "X1p", "X2p"),
        "Xm": two("Xm", "X1m", "X2m"),
        "PhiPlus": two("PhiPlus", "Phi1p", "Phi2p"),
        "PhiMinus": two("PhiMinus", "Phi1m", "Phi2m"),
    }
    # the three terms of L(z): bodies of the poles of Phi^-(q^{k+2} z) Phi^+(z)
    a = Fraction(k + 2)
    lam_bodies = {
        "lambda1": [(ops["Ybarm"], a), (Zp, a + h1), (Wp.inverse(), a + h2),
                    (ops["Ybarp"], 0), (Zp, -h1), (Wp, -h2)],
        "lambda2": [(ops["Ybarm"], a), (Wm.inverse(), a - h2), (Zm, a - h1),
                    (ops["Ybarp"], 0), (Zp, -h1), (Wp, -h2)],
        "lambda3": [(ops["Ybarm"], a), (Zp, a + h1), (Wp.inverse(), a + h2),
                    (ops["Ybarp"], 0), (Wm, h2), (Zm, h1)],
    }
    for name, factors in lam_bodies.items():
        ops[name] = normal_product_many(factors, name=name)
    # as displayed: equal weights
    signs = {"lambda1": ONE, "lambda2": -ONE, "lambda3": -ONE}
    sums["L_displayed"] = VertexSum([SumTerm(inv * inv * signs[n], Fraction(0), ops[n])
                                     for n in lam_bodies], "L_displayed")
    # the combination that commutes with both screening charges (and that the residue yields)
    c = (q_pow(2 * k + 2) - 1) / (q_pow(2 * k + 4) - 1)
    weights = {"lambda1": ONE, "lambda2": -c, "lambda3": -c * q_pow(2)}
    sums["L"] = VertexSum([SumTerm(inv * inv * weights[n], Fraction(0), ops[n])
                           for n in lam_bodies], "L")
    return Catalog(k, alg, ops, sums)

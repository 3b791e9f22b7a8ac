"""Seeded random oscillator algebras and vertex operators for oracle tests."""

import random
from fractions import Fraction

from qvoa.fock import OscillatorAlgebra, Weight
from qvoa.rules import Rule
from qvoa.scalar import q_pow
from qvoa.vertex import VertexOp

GRAM_TEMPLATES = [
    "{c}*qint({a}*m)*qint({b}*m)/m",
    "{c}*qint({a}*m)/m",
    "{c}*(qpow({a}*m) + qpow(-{b}*m))/m",
]
COEFF_TEMPLATES = [
    "{c}*qpow({a}*m)/qint({b}*m)",
    "{c}*qpow(-{a}*m/2)/m",
    "{c}*(q - 1/q)*qint(m)/qint({b}*m)",
    "0",
    "0",
]


def _fill(rng: random.Random, template: str, sign: bool = True) -> str:
    c = rng.choice([1, 2, -1, Fraction(1, 2)] if sign else [1, 2, Fraction(1, 2)])
    return template.format(c=f"({c})", a=rng.randint(1, 3), b=rng.randint(1, 2))


def random_algebra(rng: random.Random, families=("a", "b")) -> OscillatorAlgebra:
    gram = {(f, f): Rule(_fill(rng, rng.choice(GRAM_TEMPLATES))) for f in families}
    if len(families) > 1 and rng.random() < 0.5:
        gram[(families[0], families[1])] = Rule(_fill(rng, GRAM_TEMPLATES[1]))
    return OscillatorAlgebra(families, gram, name="random")


def random_op(rng: random.Random, alg: OscillatorAlgebra, name: str = "V") -> VertexOp:
    n = alg.size
    fams = alg.families
    return VertexOp(
        alg, name=name,
        prefactor=q_pow(Fraction(rng.randint(-2, 2), rng.choice([1, 2]))),
        shift=[rng.randint(-2, 2) for _ in range(n)],
        z_const=Fraction(rng.randint(-2, 2), rng.choice([1, 2])),
        z_coeffs=[Fraction(rng.randint(-2, 2), rng.choice([1, 2])) for _ in range(n)],
        q_coeffs=[Fraction(rng.randint(-2, 2), 2) for _ in range(n)],
        minus={f: Rule(_fill(rng, rng.choice(COEFF_TEMPLATES))) for f in fams},
        plus={f: Rule(_fill(rng, rng.choice(COEFF_TEMPLATES))) for f in fams},
    )


def random_weight(rng: random.Random, n: int) -> Weight:
    return Weight.of([Fraction(rng.randint(-2, 2), rng.choice([1, 2])) for _ in range(n)])


def random_pair(seed: int):
    rng = random.Random(seed)
    alg = random_algebra(rng)
    return alg, random_op(rng, alg, "A"), random_op(rng, alg, "B"), random_weight(rng, alg.size)

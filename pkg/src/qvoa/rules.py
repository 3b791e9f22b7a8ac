"""Closed-form coefficient rules: expressions in the mode index m, kept as source text."""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Optional

from . import expr
from .scalar import ZERO, QScalar


def _exp_src(e: Fraction) -> str:
    e = Fraction(e)
    return str(e.numerator) if e.denominator == 1 else f"{e.numerator}/{e.denominator}"


class Rule:
    """A function m -> QScalar given by an expression over ``m``, ``q`` and fixed parameters.

    The source text is the canonical, serializable description; values are cached per m.
    """

    __slots__ = ("source", "env", "_node", "_cache")

    def __init__(self, source: str, env: Optional[Mapping[str, object]] = None):
        self.source = source.strip()
        self.env = dict(env or {})
        self._node = expr.parse(self.source)
        self._cache: dict = {}

    @classmethod
    def zero(cls, env=None) -> "Rule":
        return cls("0", env)

    def is_trivially_zero(self) -> bool:
        return self.source == "0"

    def __call__(self, m: int) -> QScalar:
        v = self._cache.get(m)
        if v is None:
            if self.is_trivially_zero():
                v = ZERO
            else:
                v = expr.evaluate(self._node, {**self.env, "m": m})
            self._cache[m] = v
        return v

    def values(self, order: int) -> tuple:
        return tuple(self(m) for m in range(1, order + 1))

    def scaled(self, exponent: Fraction) -> "Rule":
        """The rule m -> q^(exponent*m) * self(m), i.e. the effect of z -> q^exponent z."""
        exponent = Fraction(exponent)
        if exponent == 0 or self.is_trivially_zero():
            return self
        return Rule(f"qpow({_exp_src(exponent)}*m)*({self.source})", self.env)

    def times(self, c: QScalar) -> "Rule":
        c = QScalar.coerce(c)
        if c.is_zero():
            return Rule.zero(self.env)
        if c == QScalar(1):
            return self
        return Rule(f"({c.to_text()})*({self.source})", self.env)

    def __add__(self, other: "Rule") -> "Rule":
        if self.is_trivially_zero():
            return other
        if other.is_trivially_zero():
            return self
        return Rule(f"({self.source}) + ({other.source})", {**other.env, **self.env})

    def __neg__(self) -> "Rule":
        if self.is_trivially_zero():
            return self
        return Rule(f"-({self.source})", self.env)

    def equal_upto(self, other: "Rule", order: int) -> bool:
        return self.values(order) == other.values(order)

    def __repr__(self) -> str:
        return f"Rule({self.source!r})"

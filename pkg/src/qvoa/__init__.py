"""Exact engine for q-deformed vertex operators, their OPEs and screening checks."""

from .scalar import QScalar, q_int, q_pow
from .series import PowerSeries, pochhammer_expand, recognize_rational, series_exp, series_log

__all__ = ["QScalar", "q_int", "q_pow", "PowerSeries", "pochhammer_expand",
           "recognize_rational", "series_exp", "series_log"]

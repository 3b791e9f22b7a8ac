"""Verification reports: a versioned JSON schema and a plain-text table."""

from __future__ import annotations

import json
import time
from contextlib import contextmanager
from fractions import Fraction
from typing import Iterable, Optional

from .scalar import QScalar

SCHEMA = "qvoa-report/1"


def jsonable(v):
    """Recursively convert exact values to JSON-friendly text."""
    if isinstance(v, QScalar):
        return v.to_text()
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    if hasattr(v, "to_json"):
        return jsonable(v.to_json())
    return v


def check(name: str, passed: bool, tag: str = "", seconds: Optional[float] = None, **witness) -> dict:
    out = {"name": name, "tag": tag, "pass": bool(passed), "witness": jsonable(witness)}
    if seconds is not None:
        out["seconds"] = round(seconds, 3)
    return out


@contextmanager
def timed(store: dict):
    t0 = time.time()
    yield
    store["seconds"] = time.time() - t0


def make_report(suite: str, params: dict, checks: Iterable[dict]) -> dict:
    checks = list(checks)
    return {"schema": SCHEMA, "suite": suite, "params": jsonable(params),
            "pass": all(c["pass"] for c in checks), "checks": checks}


def merge(reports: Iterable[dict], suite: str = "all") -> dict:
    reports = list(reports)
    params = reports[0]["params"] if reports else {}
    checks = [c if "/" in c["name"] else dict(c, name=f"{r['suite']}/{c['name']}")
              for r in reports for c in r["checks"]]
    return make_report(suite, params, checks)


def render_table(report: dict) -> str:
    rows = [(c["name"], "pass" if c["pass"] else "FAIL", c.get("seconds", "")) for c in report["checks"]]
    width = max([len(r[0]) for r in rows] + [5])
    lines = [f"suite {report['suite']}  " + "  ".join(f"{k}={v}" for k, v in report["params"].items())]
    lines.append(f"{'check'.ljust(width)}  verdict  seconds")
    for name, verdict, sec in rows:
        lines.append(f"{name.ljust(width)}  {verdict.ljust(7)}  {sec}")
    n_fail = sum(1 for r in rows if r[1] != "pass")
    lines.append(f"{len(rows) - n_fail}/{len(rows)} passed")
    return "\n".join(lines)


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=False)

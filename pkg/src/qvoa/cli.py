"""Command-line front end: ``qvoa verify|contract|residue|expand|modes``.

Exit codes: 0 when every verdict passes, 1 on a verification failure, 2 on usage or
parse errors.
"""

from __future__ import annotations

import sys
from fractions import Fraction
from typing import Optional

import click

from . import expr
from .dsl import DslError, load_model
from .expr import ExprError
from .fock import FockSlice
from .ope import OpeError, contour_residue, ope_product
from .report import dumps, render_table
from .scalar import QScalar
from .series import PowerSeries, recognize_product
from .sl2 import ModelConfig, default_order, make_catalog
from .verify import SUITES, run_suite
from .vertex import VertexError, contract, mode_matrices

SUITE_NAMES = list(SUITES) + ["all"]


class Failed(Exception):
    """A verification verdict failed (exit code 1)."""


def _parse_sector(text: Optional[str]) -> tuple:
    if not text:
        return (0, 0, 0)
    parts = text.split(",")
    if len(parts) != 3:
        raise click.BadParameter("expected l,m1,m2", param_hint="--sector")
    try:
        return tuple(Fraction(p.strip()) for p in parts)
    except ValueError:
        raise click.BadParameter(f"not a rational triple: {text!r}", param_hint="--sector")


def _catalog(level: int, order: int, model: Optional[str]):
    if model:
        try:
            return load_model(model, level, order).catalog()
        except DslError as exc:
            for d in exc.diagnostics:
                click.echo(d.render(model), err=True)
            raise click.exceptions.Exit(2)
        except OSError as exc:
            raise click.BadParameter(str(exc), param_hint="--model")
    return make_catalog(level)


def resolve(cat, name: str, allow_sum: bool = False):
    """Look up an operator (or sum); ``Splus``/``Sminus`` style spellings are accepted."""
    candidates = [name]
    for long, short in (("plus", "p"), ("minus", "m"), ("Plus", "p"), ("Minus", "m")):
        if name.endswith(long):
            candidates.append(name[: -len(long)] + short)
    for c in candidates:
        if c in cat.ops:
            return cat.as_sum(c) if allow_sum else cat.ops[c]
        if allow_sum and c in cat.sums:
            return cat.sums[c]
    raise click.BadParameter(f"unknown operator {name!r}; known: {', '.join(cat.names())}")


def _q_power(text: str, level: int) -> QScalar:
    try:
        v = expr.evaluate(expr.parse(text), {"k": level})
    except ExprError as exc:
        raise click.BadParameter(f"invalid q-power {text!r}: {exc.message}", param_hint="--at")
    mono = v.as_monomial()
    if mono is None or mono[0] != 1:
        raise click.BadParameter(f"invalid q-power {text!r}: not of the form q^e", param_hint="--at")
    return v


def _series_eval(node, order: int, level: int) -> PowerSeries:
    """Evaluate an expression in x, q and k as a power series in x."""
    def const(n) -> QScalar:
        return expr.evaluate(n, {"k": level})

    def ev(n) -> PowerSeries:
        if isinstance(n, expr.Var) and n.name == "x":
            return PowerSeries.from_polynomial([QScalar(0), QScalar(1)], order)
        if "x" not in expr.free_names(n):
            return PowerSeries.one(order) * const(n)
        if isinstance(n, expr.Neg):
            return -ev(n.arg)
        if isinstance(n, expr.BinOp):
            a, b = ev(n.left), ev(n.right)
            return {"+": a.__add__, "-": a.__sub__, "*": a.__mul__, "/": a.__truediv__}[n.op](b)
        if isinstance(n, expr.Pow):
            e = const(n.exp).constant_value()
            if e is None or e.denominator != 1:
                raise ExprError("only integer powers of series", n.line, n.col)
            base = ev(n.base)
            if e < 0:
                base, e = base.inverse(), -e
            out = PowerSeries.one(order)
            for _ in range(int(e)):
                out = out * base
            return out
        raise ExprError(f"{n.func} needs a constant argument", n.line, n.col)

    return ev(node)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def cli():
    """Exact symbolic checks of a q-deformed free-field vertex algebra."""


@cli.command()
@click.option("--suite", type=click.Choice(SUITE_NAMES), default="all", show_default=True)
@click.option("--level", "-k", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--order", "-N", type=click.IntRange(min=2), default=None, help="series order")
@click.option("--degree", "-D", type=click.IntRange(min=2), default=4, show_default=True)
@click.option("--sector", default=None, help="l,m1,m2")
@click.option("--range", "mode_range", type=click.IntRange(min=0), default=2, show_default=True)
@click.option("--model", type=click.Path(dir_okay=False), default=None, help=".vop model file")
@click.option("--json", "json_out", type=click.Path(dir_okay=False), default=None)
def verify(suite, level, order, degree, sector, mode_range, model, json_out):
    """Run a verification suite and print a verdict table."""
    order = order or default_order()
    try:
        cfg = ModelConfig(k=level, N=order, D=degree, sector=_parse_sector(sector), mode_range=mode_range)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    cat = _catalog(level, order, model)
    report = run_suite(suite, cfg, cat)
    click.echo(render_table(report))
    if json_out:
        with open(json_out, "w", encoding="utf-8") as fh:
            fh.write(dumps(report))
    if not report["pass"]:
        raise Failed()


@cli.command("contract")
@click.argument("a")
@click.argument("b")
@click.option("--order", "-N", type=click.IntRange(min=1), default=12, show_default=True)
@click.option("--level", "-k", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--model", type=click.Path(dir_okay=False), default=None)
def contract_cmd(a, b, order, level, model):
    """Contraction A(z)B(w) = factor * :A(z)B(w):."""
    cat = _catalog(level, order, model)
    r = contract(resolve(cat, a), resolve(cat, b), order)
    click.echo(r.factor_text())
    click.echo(f"series: {r.series.to_text()}")


@cli.command()
@click.argument("a")
@click.argument("b")
@click.option("--at", "point", required=True, help="contour point as a q-power, e.g. 'q^(k+2)'")
@click.option("--order", "-N", type=click.IntRange(min=2), default=12, show_default=True)
@click.option("--level", "-k", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--measure", type=click.Choice(["dw", "dw/w"]), default="dw", show_default=True)
@click.option("--model", type=click.Path(dir_okay=False), default=None)
def residue(a, b, point, order, level, measure, model):
    """Residue of A(w)B(z) around w = point * z."""
    cat = _catalog(level, order, model)
    at = _q_power(point, level)
    try:
        terms = ope_product(resolve(cat, a, True), resolve(cat, b, True), order)
        res = contour_residue(terms, at, measure=measure)
    except OpeError as exc:
        raise Failed(str(exc))
    click.echo(f"normalization: {res.normalization.to_text()}")
    click.echo(f"{len(res.sum.terms)} terms")
    click.echo(res.sum.to_text())


@cli.command()
@click.argument("closed_form")
@click.option("--order", "-N", type=click.IntRange(min=1), default=8, show_default=True)
@click.option("--level", "-k", type=click.IntRange(min=1), default=1, show_default=True)
def expand(closed_form, order, level):
    """Power series in x of a rational closed form, e.g. '(1 - q*x)/(1 - q^3*x)'."""
    try:
        s = _series_eval(expr.parse(closed_form), order, level)
    except (ExprError, ZeroDivisionError, ValueError) as exc:
        raise click.BadParameter(f"cannot expand {closed_form!r}: {exc}")
    click.echo(s.to_text())
    form = recognize_product(s)
    if form is not None:
        click.echo(f"product form: {form.to_text()}")


@cli.command()
@click.argument("op")
@click.option("--range", "n_range", type=click.IntRange(min=0), default=1, show_default=True)
@click.option("--level", "-k", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--degree", "-D", type=click.IntRange(min=0), default=2, show_default=True)
@click.option("--sector", default=None, help="l,m1,m2")
@click.option("--show", is_flag=True, help="print nonzero entries")
def modes(op, n_range, level, degree, sector, show):
    """Mode matrices of an operator on a truncated Fock module."""
    cfg = ModelConfig(k=level, D=max(degree, 2), sector=_parse_sector(sector))
    cat = make_catalog(cfg)
    V = resolve(cat, op)
    sl = FockSlice(cat.algebra, cfg.weight(), degree)
    try:
        mats = mode_matrices(V, sl, range(-n_range, n_range + 1))
    except VertexError as exc:
        raise Failed(str(exc))
    click.echo(f"Fock slice dimension {sl.dim}")
    for n, M in sorted(mats.items()):
        entries = sorted((i, j, c) for j, col in M.cols.items() for i, c in col.items() if c)
        click.echo(f"mode {n}: {len(entries)} nonzero entries")
        if show:
            for i, j, c in entries:
                click.echo(f"  [{i}, {j}] = {c.to_text()}")


def run_cli(argv=None) -> int:
    """Run the command line and return its exit code."""
    try:
        rc = cli.main(args=argv, prog_name="qvoa", standalone_mode=False)
    except Failed as exc:
        if str(exc):
            click.echo(f"error: {exc}", err=True)
        return 1
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return 2
    except click.exceptions.Abort:
        return 2
    # click hands back Exit codes as the return value in non-standalone mode
    return rc if isinstance(rc, int) else 0


def main():
    sys.exit(run_cli())

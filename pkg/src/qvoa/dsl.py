"""The ``.vop`` model language: parser with error recovery, pretty-printer, compiler.

A program declares one oscillator algebra, vertex operators (either field by field or
as normal-ordered products of earlier ones), linear combinations and suite requests::

    algebra H { oscillator a, b; gram a a = qint(2*m)*qint(k*m)/m; }
    vertexop Y { shift = [2, 0]; zcoeffs = [1/k, 0]; minus a = 1/qint(k*m); }
    vertexop YY = : Y Y[1] Y^-1[-(k+2)/2] : ;
    sum T { term Y = 1/(q - 1/q); term YY[k] = -1; }
    check correlations { level = 1; order = 12; }

See ``docs/vop.ebnf`` for the grammar.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import expr
from .expr import ExprError, Node, Token, strip_positions, to_source
from .fock import FockError, OscillatorAlgebra
from .rules import Rule
from .scalar import QScalar
from .vertex import SumTerm, VertexError, VertexOp, VertexSum, normal_product_many

KEYWORDS = ("algebra", "vertexop", "sum", "check")
OP_FIELDS = ("prefactor", "shift", "zconst", "zcoeffs", "qzero", "minus", "plus")


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    line: int
    col: int
    message: str
    hint: Optional[str] = None

    def render(self, path: str = "<input>") -> str:
        out = f"{path}:{self.line}:{self.col}: {self.severity}: {self.message}"
        return out + (f" (hint: {self.hint})" if self.hint else "")


class DslError(Exception):
    def __init__(self, diagnostics: list):
        super().__init__("; ".join(d.render() for d in diagnostics))
        self.diagnostics = diagnostics


# --- AST ---------------------------------------------------------------------------


@dataclass
class AlgebraDecl:
    name: str
    families: list
    grams: list  # (a, b, Node, line, col)
    line: int = 0
    col: int = 0


@dataclass
class Factor:
    name: str
    inverse: bool = False
    rescale: Optional[Node] = None
    line: int = 0
    col: int = 0


@dataclass
class OpDecl:
    name: str
    fields: list = field(default_factory=list)  # (field, family or None, value, line, col)
    factors: Optional[list] = None  # product form
    line: int = 0
    col: int = 0


@dataclass
class SumDecl:
    name: str
    terms: list  # (op name, rescale Node or None, coeff Node, line, col)
    line: int = 0
    col: int = 0


@dataclass
class CheckDecl:
    name: str
    params: list  # (name, Node)
    line: int = 0
    col: int = 0


@dataclass
class Program:
    statements: list = field(default_factory=list)

    def canonical(self):
        """Position-free nested tuples, for structural equality of programs."""
        def node(n):
            return None if n is None else strip_positions(n)

        def value(v):
            return tuple(node(x) for x in v) if isinstance(v, list) else node(v)

        out = []
        for s in self.statements:
            if isinstance(s, AlgebraDecl):
                out.append(("algebra", s.name, tuple(s.families),
                            tuple((a, b, node(e)) for a, b, e, *_ in s.grams)))
            elif isinstance(s, OpDecl):
                if s.factors is not None:
                    out.append(("product", s.name, tuple((f.name, f.inverse, node(f.rescale))
                                                         for f in s.factors)))
                else:
                    out.append(("vertexop", s.name, tuple((f, fam, value(v)) for f, fam, v, *_ in s.fields)))
            elif isinstance(s, SumDecl):
                out.append(("sum", s.name, tuple((n, node(r), node(c)) for n, r, c, *_ in s.terms)))
            else:
                out.append(("check", s.name, tuple((n, node(v)) for n, v in s.params)))
        return tuple(out)


# --- tokenizing with recovery --------------------------------------------------------


def tokenize(text: str, diags: list) -> list:
    """Tokens of ``text``; unknown characters become diagnostics and are skipped."""
    out: list = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        mt = expr._TOKEN_RE.match(text, pos)
        if mt is None:
            diags.append(Diagnostic("error", line, col, f"unexpected character {text[pos]!r}"))
            pos += 1
            col += 1
            continue
        kind, s = mt.lastgroup, mt.group()
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind in ("num", "name", "op"):
                out.append(Token({"num": "NUM", "name": "NAME", "op": "OP"}[kind], s, line, col))
            col += len(s)
        pos = mt.end()
    out.append(Token("EOF", "", line, col))
    return out


# --- parser -----------------------------------------------------------------------------


class _Unclosed(Exception):
    pass


class _Parser(expr.Parser):
    def __init__(self, tokens: list, diags: list):
        super().__init__(tokens)
        self.diags = diags

    def is_op(self, text: str) -> bool:
        return self.tok.kind == "OP" and self.tok.text == text

    def name(self, what: str = "a name") -> Token:
        t = self.tok
        if t.kind != "NAME":
            raise ExprError(f"expected {what}, found {t.text or 'end of input'!r}", t.line, t.col)
        return self.advance()

    def keyword(self, word: str) -> Token:
        t = self.tok
        if t.kind != "NAME" or t.text != word:
            raise ExprError(f"expected {word!r}, found {t.text or 'end of input'!r}", t.line, t.col)
        return self.advance()

    def error(self, exc: ExprError, hint: Optional[str] = None):
        self.diags.append(Diagnostic("error", exc.line, exc.col, exc.message, hint))

    def skip_statement(self):
        """Skip to the end of the current item: past ';' or up to '}' at the same depth."""
        depth = 0
        while self.tok.kind != "EOF":
            t = self.tok
            if t.kind == "OP" and t.text == "{":
                depth += 1
            elif t.kind == "OP" and t.text == "}":
                if depth == 0:
                    return
                depth -= 1
                if depth == 0:
                    self.advance()
                    return
            elif t.kind == "OP" and t.text == ";" and depth == 0:
                self.advance()
                return
            self.advance()

    def skip_to_keyword(self):
        depth = 0
        while self.tok.kind != "EOF":
            t = self.tok
            if depth == 0 and t.kind == "NAME" and t.text in KEYWORDS:
                return
            if t.kind == "OP" and t.text == "{":
                depth += 1
            elif t.kind == "OP" and t.text == "}":
                depth = max(depth - 1, 0)
            self.advance()

    def block(self, item):
        """Parse '{' item* '}' with per-item recovery."""
        open_tok = self.expect("{")
        while not self.is_op("}"):
            if self.tok.kind == "EOF":
                self.diags.append(Diagnostic("error", open_tok.line, open_tok.col, "unclosed '{'",
                                             "add a matching '}'"))
                raise _Unclosed()
            if self.tok.kind == "NAME" and self.tok.text in KEYWORDS:
                self.diags.append(Diagnostic("error", open_tok.line, open_tok.col, "unclosed '{'",
                                             "add a matching '}'"))
                return
            start = self.pos
            try:
                item()
            except ExprError as exc:
                self.error(exc)
                if self.pos == start:
                    self.advance()
                self.skip_statement()
        self.expect("}")

    # statements

    def program(self) -> Program:
        prog = Program()
        while self.tok.kind != "EOF":
            t, start = self.tok, self.pos
            try:
                if t.kind == "NAME" and t.text in KEYWORDS:
                    prog.statements.append(getattr(self, "st_" + t.text)())
                else:
                    raise ExprError(f"expected a declaration, found {t.text!r}", t.line, t.col)
            except _Unclosed:
                break
            except ExprError as exc:
                self.error(exc, f"statements start with one of {', '.join(KEYWORDS)}")
                if self.pos == start:
                    self.advance()
                self.skip_to_keyword()
        return prog

    def vector(self) -> list:
        self.expect("[")
        items = [self.parse_expr()]
        while self.accept(","):
            items.append(self.parse_expr())
        self.expect("]")
        return items

    def st_algebra(self) -> AlgebraDecl:
        kw = self.advance()
        decl = AlgebraDecl(self.name("an algebra name").text, [], [], kw.line, kw.col)

        def item():
            t = self.name("'oscillator' or 'gram'")
            if t.text == "oscillator":
                decl.families.append(self.name("a family name").text)
                while self.accept(","):
                    decl.families.append(self.name("a family name").text)
            elif t.text == "gram":
                a, b = self.name("a family name").text, self.name("a family name").text
                self.expect("=")
                decl.grams.append((a, b, self.parse_expr(), t.line, t.col))
            else:
                raise ExprError(f"unknown algebra item {t.text!r}", t.line, t.col)
            self.expect(";")

        self.block(item)
        return decl

    def factor(self) -> Factor:
        t = self.name("an operator name")
        f = Factor(t.text, line=t.line, col=t.col)
        if self.accept("^"):
            self.expect("-")
            one = self.tok
            if one.kind != "NUM" or one.text != "1":
                raise ExprError("only the inverse '^-1' is allowed on a factor", one.line, one.col)
            self.advance()
            f.inverse = True
        if self.accept("["):
            f.rescale = self.parse_expr()
            self.expect("]")
        return f

    def st_vertexop(self) -> OpDecl:
        kw = self.advance()
        decl = OpDecl(self.name("an operator name").text, line=kw.line, col=kw.col)
        if self.accept("="):
            self.expect(":")
            decl.factors = []
            while not self.is_op(":"):
                decl.factors.append(self.factor())
            self.expect(":")
            if not decl.factors:
                raise ExprError("empty normal-ordered product", kw.line, kw.col)
            self.expect(";")
            return decl

        def item():
            t = self.name("an operator field")
            if t.text not in OP_FIELDS:
                raise ExprError(f"unknown operator field {t.text!r}", t.line, t.col)
            fam = self.name("a family name").text if t.text in ("minus", "plus") else None
            self.expect("=")
            value = self.vector() if t.text in ("shift", "zcoeffs", "qzero") else self.parse_expr()
            self.expect(";")
            decl.fields.append((t.text, fam, value, t.line, t.col))

        self.block(item)
        return decl

    def st_sum(self) -> SumDecl:
        kw = self.advance()
        decl = SumDecl(self.name("a sum name").text, [], kw.line, kw.col)

        def item():
            self.keyword("term")
            t = self.name("an operator name")
            rescale = None
            if self.accept("["):
                rescale = self.parse_expr()
                self.expect("]")
            self.expect("=")
            decl.terms.append((t.text, rescale, self.parse_expr(), t.line, t.col))
            self.expect(";")

        self.block(item)
        return decl

    def st_check(self) -> CheckDecl:
        kw = self.advance()
        decl = CheckDecl(self.name("a suite name").text, [], kw.line, kw.col)
        if self.is_op("{"):
            def item():
                t = self.name("a parameter name")
                self.expect("=")
                decl.params.append((t.text, self.parse_expr()))
                self.expect(";")

            self.block(item)
        else:
            self.expect(";")
        return decl


def parse(text: str):
    """A :class:`Program`, or the list of diagnostics when the text has errors."""
    diags: list = []
    tokens = tokenize(text, diags)
    p = _Parser(tokens, diags)
    prog = p.program()
    return diags if diags else prog


def parse_or_raise(text: str) -> Program:
    out = parse(text)
    if isinstance(out, list):
        raise DslError(out)
    return out


# --- pretty-printer -------------------------------------------------------------------


def pretty(prog: Program) -> str:
    lines = []
    for s in prog.statements:
        if isinstance(s, AlgebraDecl):
            lines.append(f"algebra {s.name} {{")
            if s.families:
                lines.append(f"  oscillator {', '.join(s.families)};")
            for a, b, e, *_ in s.grams:
                lines.append(f"  gram {a} {b} = {to_source(e)};")
            lines.append("}")
        elif isinstance(s, OpDecl) and s.factors is not None:
            parts = []
            for f in s.factors:
                txt = f.name + ("^-1" if f.inverse else "")
                if f.rescale is not None:
                    txt += f"[{to_source(f.rescale)}]"
                parts.append(txt)
            lines.append(f"vertexop {s.name} = : {' '.join(parts)} : ;")
        elif isinstance(s, OpDecl):
            lines.append(f"vertexop {s.name} {{")
            for fname, fam, v, *_ in s.fields:
                lhs = fname if fam is None else f"{fname} {fam}"
                rhs = f"[{', '.join(to_source(x) for x in v)}]" if isinstance(v, list) else to_source(v)
                lines.append(f"  {lhs} = {rhs};")
            lines.append("}")
        elif isinstance(s, SumDecl):
            lines.append(f"sum {s.name} {{")
            for n, r, c, *_ in s.terms:
                arg = "" if r is None else f"[{to_source(r)}]"
                lines.append(f"  term {n}{arg} = {to_source(c)};")
            lines.append("}")
        else:
            if s.params:
                body = " ".join(f"{n} = {to_source(v)};" for n, v in s.params)
                lines.append(f"check {s.name} {{ {body} }}")
            else:
                lines.append(f"check {s.name};")
    return "\n".join(lines) + "\n"


# --- compiler --------------------------------------------------------------------------------


@dataclass
class CompiledModel:
    """Result of compiling a program at fixed level and order."""

    k: int
    algebra: Optional[OscillatorAlgebra]
    ops: dict = field(default_factory=dict)
    sums: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)  # (suite, {param: value})

    def catalog(self):
        from .sl2 import Catalog
        return Catalog(self.k, self.algebra, dict(self.ops), dict(self.sums))


def _diag(line, col, msg, hint=None) -> DslError:
    return DslError([Diagnostic("error", line, col, msg, hint)])


def _scalar(node: Node, env: dict, line: int, col: int) -> QScalar:
    try:
        return expr.evaluate(node, env)
    except ExprError as exc:
        raise _diag(exc.line, exc.col, exc.message)


def _rational(node: Node, env: dict, line: int, col: int) -> Fraction:
    v = _scalar(node, env, line, col).constant_value()
    if v is None:
        raise _diag(line, col, "expected a rational constant (it may involve k, not q)")
    return v


def _eager_rule(node: Node, env: dict, order: int, what: str, line: int, col: int) -> Rule:
    """A Rule, evaluated for m = 1..order so that undefined values surface now."""
    rule = Rule(to_source(node), env)
    for m in range(1, order + 1):
        try:
            rule(m)
        except ExprError as exc:
            raise _diag(line, col, f"{what}: {exc.message} at m={m}")
        except (ZeroDivisionError, ValueError) as exc:
            raise _diag(line, col, f"{what}: {exc} at m={m}")
    return rule


def compile_program(prog: Program, k: int = 1, order: int = 12) -> CompiledModel:
    env = {"k": k}
    model = CompiledModel(k, None)
    fams: list = []
    for s in prog.statements:
        if isinstance(s, AlgebraDecl):
            if model.algebra is not None:
                raise _diag(s.line, s.col, "only one algebra per program")
            grams = {}
            for a, b, node, line, col in s.grams:
                for f in (a, b):
                    if f not in s.families:
                        raise _diag(line, col, f"undeclared oscillator {f!r}")
                key = tuple(sorted((a, b)))
                rule = _eager_rule(node, env, order, f"gram {a} {b}", line, col)
                if key in grams:
                    if grams[key].values(order) != rule.values(order):
                        raise _diag(line, col, f"gram entries for {a}, {b} are not symmetric")
                    continue
                grams[key] = rule
            try:
                model.algebra = OscillatorAlgebra(s.families, grams, name=f"{s.name}(k={k})")
            except FockError as exc:
                raise _diag(s.line, s.col, str(exc))
            fams = list(s.families)
        elif isinstance(s, OpDecl):
            if model.algebra is None:
                raise _diag(s.line, s.col, "operators need an algebra declared before them")
            if s.name in model.ops:
                raise _diag(s.line, s.col, f"operator {s.name!r} declared twice")
            model.ops[s.name] = (_compile_product(s, model, env) if s.factors is not None
                                 else _compile_op(s, model.algebra, fams, env, order))
        elif isinstance(s, SumDecl):
            terms = []
            for n, r, c, line, col in s.terms:
                if n not in model.ops:
                    raise _diag(line, col, f"undeclared operator {n!r}", "declare it before the sum")
                j = Fraction(0) if r is None else _rational(r, env, line, col)
                terms.append(SumTerm(_scalar(c, env, line, col), j, model.ops[n]))
            model.sums[s.name] = VertexSum(terms, s.name)
        else:
            model.checks.append((s.name, {n: _scalar(v, env, s.line, s.col) for n, v in s.params}))
    return model


def _compile_op(s: OpDecl, alg: OscillatorAlgebra, fams: list, env: dict, order: int) -> VertexOp:
    kw: dict = {"minus": {}, "plus": {}}
    n = len(fams)
    for fname, fam, value, line, col in s.fields:
        if fname in ("minus", "plus"):
            if fam not in fams:
                raise _diag(line, col, f"undeclared oscillator {fam!r}")
            kw[fname][fam] = _eager_rule(value, env, order, f"{s.name} {fname} {fam}", line, col)
        elif fname == "prefactor":
            kw["prefactor"] = _scalar(value, env, line, col)
        elif fname == "zconst":
            kw["z_const"] = _rational(value, env, line, col)
        else:
            vec = [_rational(v, env, line, col) for v in value]
            if len(vec) != n:
                raise _diag(line, col, f"{fname} needs {n} entries, found {len(vec)}")
            kw[{"shift": "shift", "zcoeffs": "z_coeffs", "qzero": "q_coeffs"}[fname]] = vec
    return VertexOp(alg, name=s.name, **kw)


def _compile_product(s: OpDecl, model: CompiledModel, env: dict) -> VertexOp:
    factors = []
    for f in s.factors:
        if f.name not in model.ops:
            raise _diag(f.line, f.col, f"undeclared operator {f.name!r}", "declare it before use")
        op = model.ops[f.name]
        if f.inverse:
            try:
                op = op.inverse()
            except VertexError as exc:
                raise _diag(f.line, f.col, str(exc))
        j = Fraction(0) if f.rescale is None else _rational(f.rescale, env, f.line, f.col)
        factors.append((op, j))
    return normal_product_many(factors, name=s.name)


def compile_text(text: str, k: int = 1, order: int = 12) -> CompiledModel:
    return compile_program(parse_or_raise(text), k, order)


def load_model(path: str, k: int = 1, order: int = 12) -> CompiledModel:
    with open(path, encoding="utf-8") as fh:
        return compile_text(fh.read(), k, order)


def shipped_model_path() -> str:
    from importlib import resources
    return str(resources.files("qvoa") / "models" / "sl2_level_k.vop")


def catalog_differences(a, b, order: int) -> list:
    """Structural differences between two catalogs; empty when identical."""
    out = []
    if (a.algebra is None) != (b.algebra is None) or (a.algebra and not a.algebra.same_as(b.algebra, order)):
        out.append("algebra")
    for name in sorted(set(a.ops) | set(b.ops)):
        if name not in a.ops or name not in b.ops:
            out.append(f"op {name}: missing")
            continue
        d = a.ops[name].differences(b.ops[name], order)
        if d:
            out.append(f"op {name}: {', '.join(d)}")
    for name in sorted(set(a.sums) | set(b.sums)):
        if name not in a.sums or name not in b.sums:
            out.append(f"sum {name}: missing")
            continue
        ta, tb = a.sums[name].terms, b.sums[name].terms
        if len(ta) != len(tb):
            out.append(f"sum {name}: term count")
            continue
        for i, (x, y) in enumerate(zip(ta, tb)):
            if x.coeff != y.coeff or x.rescale != y.rescale or not x.op.same_as(y.op, order):
                out.append(f"sum {name}: term {i + 1}")
    return out

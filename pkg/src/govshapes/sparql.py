"""Restricted SPARQL SELECT fragment for constraint queries.

The fragment covers exactly what data-dependent constraints need:

  - ``SELECT $this ?x ...`` projection (``$this`` is pre-bound to the
    focus node and must be projected)
  - basic graph patterns with ``;`` predicate lists and ``,`` object
    lists, the ``a`` keyword, variables in any position
  - ``BIND(expr AS ?v)`` with arithmetic, comparisons, ``ABS``, ``IF``
  - ``FILTER(expr)`` with strict boolean semantics

Everything else (OPTIONAL, UNION, subqueries, aggregates, property
paths, ...) is rejected at parse time by name, so a query either runs
under these semantics or fails loudly.

Evaluation uses nested-loop joins over ``Graph.match``. A type error
inside an expression does not abort the query: the offending solution
is eliminated and a diagnostic entry records why, mirroring the
error-elimination behavior validators rely on.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import SparqlSyntaxError, TypeMismatchError, UnboundVariableError
from .rdf import RDF, XSD, Graph, Iri, Literal, Term, is_numeric_literal

Binding = dict[str, Term]

_UNSUPPORTED = {
    "OPTIONAL", "UNION", "MINUS", "GRAPH", "SERVICE", "VALUES", "EXISTS",
    "NOT", "DISTINCT", "REDUCED", "GROUP", "HAVING", "ORDER", "LIMIT",
    "OFFSET", "PREFIX", "BASE", "ASK", "CONSTRUCT", "DESCRIBE", "INSERT",
    "DELETE", "REGEX", "STR", "LANG", "DATATYPE", "BOUND", "COALESCE",
    "CONCAT", "COUNT", "SUM", "AVG", "MIN", "MAX", "SAMPLE",
}
_KEYWORDS = {"SELECT", "WHERE", "BIND", "FILTER", "AS", "ABS", "IF", "A"}


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Expression:
    pass


@dataclass(frozen=True)
class NumConst(Expression):
    value: float


@dataclass(frozen=True)
class BoolConst(Expression):
    value: bool


@dataclass(frozen=True)
class TermConst(Expression):
    term: Term


@dataclass(frozen=True)
class VarRef(Expression):
    name: str


@dataclass(frozen=True)
class Arith(Expression):
    op: str  # + - * /
    left: Expression
    right: Expression


@dataclass(frozen=True)
class Neg(Expression):
    arg: Expression


@dataclass(frozen=True)
class Compare(Expression):
    op: str  # = != < > <= >=
    left: Expression
    right: Expression


@dataclass(frozen=True)
class AbsCall(Expression):
    arg: Expression


@dataclass(frozen=True)
class IfCall(Expression):
    cond: Expression
    then: Expression
    els: Expression


@dataclass(frozen=True)
class ClauseItem:
    pass


@dataclass(frozen=True)
class TriplePattern(ClauseItem):
    subject: Term | Var
    predicate: Term | Var
    object: Term | Var


@dataclass(frozen=True)
class BindClause(ClauseItem):
    expression: Expression
    var: str


@dataclass(frozen=True)
class FilterClause(ClauseItem):
    expression: Expression


@dataclass(frozen=True)
class SparqlQuery:
    select_vars: tuple[str, ...]
    clauses: tuple[ClauseItem, ...]
    text: str


@dataclass(frozen=True)
class EvalDiagnostic:
    """Why a solution was eliminated by a type error."""
    clause_index: int
    reason: str


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<iriref><[^<>\s]*>)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<var>[?$][A-Za-z_][A-Za-z0-9_]*)
  | (?P<double>[+-]?(?:\d+\.?\d*|\.\d+)[eE][+-]?\d+)
  | (?P<decimal>[+-]?\d+\.\d+)
  | (?P<integer>[+-]?\d+)
  | (?P<pname>[A-Za-z][A-Za-z0-9_\-]*:[A-Za-z0-9_][A-Za-z0-9_.\-]*)
  | (?P<name>[A-Za-z][A-Za-z0-9_]*)
  | (?P<op><=|>=|!=|[{}().;,=<>+\-*/])
""", re.VERBOSE)


@dataclass(frozen=True)
class _Tok:
    kind: str
    value: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise SparqlSyntaxError(f"unexpected character {text[pos]!r} at offset {pos}")
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            out.append(_Tok(kind, m.group(), pos))
        pos = m.end()
    out.append(_Tok("eof", "", pos))
    return out


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str, prefixes: dict[str, str]):
        self.text = text
        self.prefixes = prefixes
        self.tokens = _tokenize(text)
        self.idx = 0

    def _peek(self) -> _Tok:
        return self.tokens[self.idx]

    def _next(self) -> _Tok:
        tok = self.tokens[self.idx]
        self.idx += 1
        return tok

    def _expect_op(self, op: str) -> None:
        tok = self._next()
        if tok.kind != "op" or tok.value != op:
            raise SparqlSyntaxError(f"expected {op!r}, found {tok.value!r}")

    def _keyword(self, tok: _Tok) -> str | None:
        if tok.kind == "name":
            upper = tok.value.upper()
            if upper in _UNSUPPORTED:
                raise SparqlSyntaxError(f"{upper} is not supported in constraint queries")
            if upper in _KEYWORDS:
                return upper
        return None

    def _expect_keyword(self, kw: str) -> None:
        tok = self._next()
        if self._keyword(tok) != kw:
            raise SparqlSyntaxError(f"expected {kw}, found {tok.value!r}")

    # -- entry ---------------------------------------------------------------

    def parse(self) -> SparqlQuery:
        self._expect_keyword("SELECT")
        select_vars = []
        while self._peek().kind == "var":
            select_vars.append(self._next().value[1:])
        if not select_vars:
            raise SparqlSyntaxError("SELECT needs at least one variable")
        self._expect_keyword("WHERE")
        self._expect_op("{")
        clauses = self._group()
        self._expect_op("}")
        if self._peek().kind != "eof":
            raise SparqlSyntaxError(f"trailing content after '}}': {self._peek().value!r}")
        query = SparqlQuery(tuple(select_vars), tuple(clauses), self.text)
        _check_variable_scope(query)
        return query

    def _group(self) -> list[ClauseItem]:
        clauses: list[ClauseItem] = []
        while True:
            tok = self._peek()
            if tok.kind == "op" and tok.value == "}":
                return clauses
            if tok.kind == "eof":
                raise SparqlSyntaxError("unterminated group, expected '}'")
            kw = self._keyword(tok) if tok.kind == "name" else None
            if kw == "BIND":
                self._next()
                clauses.append(self._bind())
            elif kw == "FILTER":
                self._next()
                clauses.append(self._filter())
            else:
                clauses.extend(self._triple_block())
            # statement separator is optional before '}' and after BIND/FILTER
            if self._peek().kind == "op" and self._peek().value == ".":
                self._next()

    # -- triple patterns -------------------------------------------------

    def _triple_block(self) -> list[TriplePattern]:
        subject = self._pattern_term(position="subject")
        patterns: list[TriplePattern] = []
        while True:
            predicate = self._pattern_verb()
            while True:
                obj = self._pattern_term(position="object")
                patterns.append(TriplePattern(subject, predicate, obj))
                if self._peek().kind == "op" and self._peek().value == ",":
                    self._next()
                    continue
                break
            if self._peek().kind == "op" and self._peek().value == ";":
                self._next()
                # tolerate a dangling ';'
                nxt = self._peek()
                if nxt.kind == "op" and nxt.value in (".", "}"):
                    break
                continue
            break
        return patterns

    def _pattern_verb(self) -> Term | Var:
        tok = self._peek()
        if tok.kind == "name" and self._keyword(tok) == "A":
            self._next()
            return RDF.type
        return self._pattern_term(position="predicate")

    def _pattern_term(self, position: str) -> Term | Var:
        tok = self._next()
        if tok.kind == "var":
            return Var(tok.value[1:])
        if tok.kind == "iriref":
            return Iri(tok.value[1:-1])
        if tok.kind == "pname":
            return self._resolve_pname(tok.value)
        if position == "object":
            if tok.kind == "integer":
                return Literal(tok.value, XSD.integer)
            if tok.kind == "decimal":
                return Literal(tok.value, XSD.decimal)
            if tok.kind == "double":
                return Literal(tok.value, XSD.double)
            if tok.kind == "string":
                return Literal(_unescape(tok.value[1:-1]))
            if tok.kind == "name" and tok.value in ("true", "false"):
                return Literal(tok.value, XSD.boolean)
        if tok.kind == "name":
            self._keyword(tok)  # raises for unsupported keywords
        raise SparqlSyntaxError(f"expected {position} term, found {tok.value!r}")

    def _resolve_pname(self, pname: str) -> Iri:
        prefix, local = pname.split(":", 1)
        ns = self.prefixes.get(prefix)
        if ns is None:
            raise SparqlSyntaxError(f"undefined prefix '{prefix}:' in query")
        return Iri(ns + local)

    # -- BIND / FILTER ----------------------------------------------------

    def _bind(self) -> BindClause:
        self._expect_op("(")
        expr = self._expression()
        self._expect_keyword("AS")
        tok = self._next()
        if tok.kind != "var":
            raise SparqlSyntaxError(f"expected variable after AS, found {tok.value!r}")
        self._expect_op(")")
        return BindClause(expr, tok.value[1:])

    def _filter(self) -> FilterClause:
        self._expect_op("(")
        expr = self._expression()
        self._expect_op(")")
        return FilterClause(expr)

    # -- expressions ---------------------------------------------------------
    # precedence: comparison < additive < multiplicative < unary < primary

    def _expression(self) -> Expression:
        left = self._additive()
        tok = self._peek()
        if tok.kind == "op" and tok.value in ("=", "!=", "<", ">", "<=", ">="):
            self._next()
            right = self._additive()
            return Compare(tok.value, left, right)
        return left

    def _additive(self) -> Expression:
        left = self._multiplicative()
        while True:
            tok = self._peek()
            if tok.kind == "op" and tok.value in ("+", "-"):
                self._next()
                left = Arith(tok.value, left, self._multiplicative())
            else:
                return left

    def _multiplicative(self) -> Expression:
        left = self._unary()
        while True:
            tok = self._peek()
            if tok.kind == "op" and tok.value in ("*", "/"):
                self._next()
                left = Arith(tok.value, left, self._unary())
            else:
                return left

    def _unary(self) -> Expression:
        tok = self._peek()
        if tok.kind == "op" and tok.value == "-":
            self._next()
            return Neg(self._unary())
        if tok.kind == "op" and tok.value == "+":
            self._next()
            return self._unary()
        return self._primary()

    def _primary(self) -> Expression:
        tok = self._next()
        if tok.kind == "op" and tok.value == "(":
            expr = self._expression()
            self._expect_op(")")
            return expr
        if tok.kind == "var":
            return VarRef(tok.value[1:])
        if tok.kind in ("integer", "decimal", "double"):
            return NumConst(float(tok.value))
        if tok.kind == "string":
            return TermConst(Literal(_unescape(tok.value[1:-1])))
        if tok.kind == "iriref":
            return TermConst(Iri(tok.value[1:-1]))
        if tok.kind == "pname":
            return TermConst(self._resolve_pname(tok.value))
        if tok.kind == "name":
            kw = self._keyword(tok)
            if kw == "ABS":
                self._expect_op("(")
                arg = self._expression()
                self._expect_op(")")
                return AbsCall(arg)
            if kw == "IF":
                self._expect_op("(")
                cond = self._expression()
                self._expect_op(",")
                then = self._expression()
                self._expect_op(",")
                els = self._expression()
                self._expect_op(")")
                return IfCall(cond, then, els)
            if tok.value == "true":
                return BoolConst(True)
            if tok.value == "false":
                return BoolConst(False)
        raise SparqlSyntaxError(f"expected expression, found {tok.value!r}")


def _unescape(body: str) -> str:
    out = []
    i = 0
    while i < len(body):
        c = body[i]
        if c == "\\" and i + 1 < len(body):
            nxt = body[i + 1]
            out.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(nxt, nxt))
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def _expr_vars(expr: Expression) -> set[str]:
    if isinstance(expr, VarRef):
        return {expr.name}
    if isinstance(expr, (Arith, Compare)):
        return _expr_vars(expr.left) | _expr_vars(expr.right)
    if isinstance(expr, (Neg, AbsCall)):
        return _expr_vars(expr.arg)
    if isinstance(expr, IfCall):
        return _expr_vars(expr.cond) | _expr_vars(expr.then) | _expr_vars(expr.els)
    return set()


def _check_variable_scope(query: SparqlQuery) -> None:
    """Static scope check: every use must follow a bind, ``this`` is free."""
    if "this" not in query.select_vars:
        raise SparqlSyntaxError("constraint queries must project $this")
    bound = {"this"}
    for i, clause in enumerate(query.clauses):
        if isinstance(clause, TriplePattern):
            for part in (clause.subject, clause.predicate, clause.object):
                if isinstance(part, Var):
                    bound.add(part.name)
        elif isinstance(clause, BindClause):
            missing = _expr_vars(clause.expression) - bound
            if missing:
                raise UnboundVariableError(
                    f"BIND at clause {i} uses unbound variable ?{sorted(missing)[0]}")
            if clause.var in bound:
                raise SparqlSyntaxError(
                    f"BIND target ?{clause.var} is already bound")
            bound.add(clause.var)
        elif isinstance(clause, FilterClause):
            missing = _expr_vars(clause.expression) - bound
            if missing:
                raise UnboundVariableError(
                    f"FILTER at clause {i} uses unbound variable ?{sorted(missing)[0]}")
    unbound_selects = set(query.select_vars) - bound
    if unbound_selects:
        raise UnboundVariableError(
            f"SELECT projects unbound variable ?{sorted(unbound_selects)[0]}")


def parse_sparql(text: str, prefixes: dict[str, str] | None = None) -> SparqlQuery:
    """Parse a constraint query.

    ``prefixes`` supplies the prefix bindings in scope (queries carry no
    PREFIX headers of their own); defaults to the standard bundle.
    """
    if prefixes is None:
        from .rdf import STANDARD_PREFIXES
        prefixes = STANDARD_PREFIXES
    return _Parser(text, prefixes).parse()


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _numeric_value(lit: Literal) -> float:
    try:
        return float(lit.lexical)
    except ValueError:
        raise TypeMismatchError(
            f"literal {lit.lexical!r} is not a valid number") from None


def eval_expression(expr: Expression, binding: Binding) -> float | bool | Term:
    """Evaluate under a binding.

    Numeric literals surface as floats, boolean literals as bools, and
    everything else stays a graph term. Raises TypeMismatchError when an
    operator meets operands outside its domain (including division by
    zero), UnboundVariableError for a variable missing from the binding.
    """
    if isinstance(expr, NumConst):
        return expr.value
    if isinstance(expr, BoolConst):
        return expr.value
    if isinstance(expr, TermConst):
        return expr.term
    if isinstance(expr, VarRef):
        if expr.name not in binding:
            raise UnboundVariableError(f"variable ?{expr.name} is unbound")
        term = binding[expr.name]
        if is_numeric_literal(term):
            return _numeric_value(term)
        if isinstance(term, Literal) and term.datatype == XSD.boolean:
            return term.lexical == "true"
        return term
    if isinstance(expr, Neg):
        return -_as_number(eval_expression(expr.arg, binding))
    if isinstance(expr, AbsCall):
        return abs(_as_number(eval_expression(expr.arg, binding)))
    if isinstance(expr, Arith):
        left = _as_number(eval_expression(expr.left, binding))
        right = _as_number(eval_expression(expr.right, binding))
        if expr.op == "+":
            return left + right
        if expr.op == "-":
            return left - right
        if expr.op == "*":
            return left * right
        if right == 0.0:
            raise TypeMismatchError("division by zero")
        return left / right
    if isinstance(expr, IfCall):
        cond = eval_expression(expr.cond, binding)
        if not isinstance(cond, bool):
            raise TypeMismatchError("IF condition must be boolean")
        return eval_expression(expr.then if cond else expr.els, binding)
    if isinstance(expr, Compare):
        return _compare(expr.op,
                        eval_expression(expr.left, binding),
                        eval_expression(expr.right, binding))
    raise TypeMismatchError(f"cannot evaluate {type(expr).__name__}")


def _as_number(value: float | bool | Term) -> float:
    # bool is an int subtype; arithmetic on booleans is still a type error
    if isinstance(value, float) and not isinstance(value, bool):
        return value
    raise TypeMismatchError(f"expected a number, got {_describe(value)}")


def _describe(value) -> str:
    if isinstance(value, bool):
        return "a boolean"
    if isinstance(value, float):
        return "a number"
    if isinstance(value, Iri):
        return f"IRI <{value.value}>"
    if isinstance(value, Literal):
        return f"literal {value.lexical!r}"
    return type(value).__name__


def _compare(op: str, left, right) -> bool:
    if isinstance(left, float) and isinstance(right, float) \
            and not isinstance(left, bool) and not isinstance(right, bool):
        return {
            "=": left == right, "!=": left != right,
            "<": left < right, ">": left > right,
            "<=": left <= right, ">=": left >= right,
        }[op]
    if isinstance(left, bool) and isinstance(right, bool):
        if op == "=":
            return left == right
        if op == "!=":
            return left != right
        raise TypeMismatchError("booleans are not ordered")
    if isinstance(left, (Iri, Literal)) and isinstance(right, (Iri, Literal)):
        if op == "=":
            return left == right
        if op == "!=":
            return left != right
        raise TypeMismatchError(
            f"cannot order {_describe(left)} against {_describe(right)}")
    raise TypeMismatchError(
        f"cannot compare {_describe(left)} with {_describe(right)}")


def _bind_term(value: float | bool | Term) -> Term:
    if isinstance(value, bool):
        return Literal("true" if value else "false", XSD.boolean)
    if isinstance(value, float):
        return Literal(repr(value), XSD.double)
    return value


def _resolve(part: Term | Var, sol: Binding) -> Term | None:
    if isinstance(part, Var):
        return sol.get(part.name)
    return part


def evaluate(query: SparqlQuery, graph: Graph, this: Term,
             diagnostics: list[EvalDiagnostic] | None = None) -> list[Binding]:
    """Run a constraint query with ``$this`` pre-bound to ``this``.

    Returns the projected solution sequence in deterministic order. A
    solution hitting a type error in a BIND or FILTER is eliminated, and
    when ``diagnostics`` is given the elimination is recorded there.
    """
    solutions: list[Binding] = [{"this": this}]
    for index, clause in enumerate(query.clauses):
        if isinstance(clause, TriplePattern):
            solutions = _join_pattern(clause, solutions, graph)
        elif isinstance(clause, BindClause):
            kept: list[Binding] = []
            for sol in solutions:
                try:
                    value = eval_expression(clause.expression, sol)
                except TypeMismatchError as exc:
                    if diagnostics is not None:
                        diagnostics.append(EvalDiagnostic(index, str(exc)))
                    continue
                ext = dict(sol)
                ext[clause.var] = _bind_term(value)
                kept.append(ext)
            solutions = kept
        elif isinstance(clause, FilterClause):
            kept = []
            for sol in solutions:
                try:
                    value = eval_expression(clause.expression, sol)
                except TypeMismatchError as exc:
                    if diagnostics is not None:
                        diagnostics.append(EvalDiagnostic(index, str(exc)))
                    continue
                if not isinstance(value, bool):
                    if diagnostics is not None:
                        diagnostics.append(EvalDiagnostic(
                            index, f"FILTER value is {_describe(value)}, not boolean"))
                    continue
                if value:
                    kept.append(sol)
            solutions = kept
        if not solutions:
            break
    return [{name: sol[name] for name in query.select_vars} for sol in solutions]


def _join_pattern(pattern: TriplePattern, solutions: list[Binding],
                  graph: Graph) -> list[Binding]:
    out: list[Binding] = []
    for sol in solutions:
        s = _resolve(pattern.subject, sol)
        p = _resolve(pattern.predicate, sol)
        o = _resolve(pattern.object, sol)
        for triple in graph.match(s, p, o):
            ext = dict(sol)
            consistent = True
            for got, want in ((triple.subject, pattern.subject),
                              (triple.predicate, pattern.predicate),
                              (triple.object, pattern.object)):
                if isinstance(want, Var):
                    if want.name in ext and ext[want.name] != got:
                        consistent = False
                        break
                    ext[want.name] = got
            if consistent:
                out.append(ext)
    return out

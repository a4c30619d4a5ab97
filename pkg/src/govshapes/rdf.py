"""RDF data model with a Turtle reader and a canonical Turtle writer.

The model is deliberately small: IRIs, literals (typed, optionally
language-tagged), blank nodes, triples, and graphs with set semantics.
The Turtle dialect covers what evidence graphs and compiled shape
documents need:

  - ``@prefix`` directives, IRIs, prefixed names, the ``a`` keyword
  - string literals (short and triple-quoted long form), ``^^`` typed
    literals, language tags, numeric shorthand (integer / decimal /
    double), booleans
  - blank node property lists ``[ ... ]``, labelled blank nodes ``_:x``
  - predicate lists ``;`` and object lists ``,``

Collections ``( )``, base IRIs, and relative IRIs are rejected.

Serialization is canonical: prefixes sorted by label, subjects sorted
by IRI with blank-node subjects last, predicates and objects sorted
within their statement, blank nodes emitted inline wherever they have a
single parent. Two graphs with equal triple sets and compatible prefix
maps serialize to byte-identical text, regardless of insertion order.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from .errors import TurtleSyntaxError

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Iri:
    value: str


@dataclass(frozen=True)
class BlankNode:
    label: str


@dataclass(frozen=True)
class Literal:
    lexical: str
    datatype: Iri = None  # type: ignore[assignment]  # resolved in __post_init__
    language: str | None = None

    def __post_init__(self):
        if self.datatype is None:
            dt = RDF.langString if self.language is not None else XSD.string
            object.__setattr__(self, "datatype", dt)


Term = Iri | BlankNode | Literal


@dataclass(frozen=True)
class Triple:
    subject: Term
    predicate: Term
    object: Term

    def __post_init__(self):
        if not isinstance(self.predicate, Iri):
            raise ValueError(f"triple predicate must be an IRI, got {self.predicate!r}")
        if isinstance(self.subject, Literal):
            raise ValueError("triple subject must not be a literal")


def term_sort_key(t: Term) -> tuple:
    """Total order over terms: IRIs, then literals, then blank nodes."""
    if isinstance(t, Iri):
        return (0, t.value)
    if isinstance(t, Literal):
        return (1, t.lexical, t.datatype.value, t.language or "")
    return (2, t.label)


def triple_sort_key(t: Triple) -> tuple:
    return (term_sort_key(t.subject), term_sort_key(t.predicate), term_sort_key(t.object))


class Namespace:
    """Attribute-style IRI factory: ``SH.NodeShape -> Iri(...#NodeShape)``."""

    def __init__(self, base: str):
        self._base = base

    @property
    def base(self) -> str:
        return self._base

    def __getattr__(self, name: str) -> Iri:
        if name.startswith("_"):
            raise AttributeError(name)
        return Iri(self._base + name)

    def term(self, name: str) -> Iri:
        return Iri(self._base + name)


RDF = Namespace("http://www.w3.org/1999/02/22-rdf-syntax-ns#")
RDFS = Namespace("http://www.w3.org/2000/01/rdf-schema#")
XSD = Namespace("http://www.w3.org/2001/XMLSchema#")
SH = Namespace("http://www.w3.org/ns/shacl#")
PROV = Namespace("http://www.w3.org/ns/prov#")
EX = Namespace("http://example.org/okb#")

#: Prefix bindings bundled with every shipped artifact.
STANDARD_PREFIXES: dict[str, str] = {
    "ex": EX.base,
    "prov": PROV.base,
    "rdf": RDF.base,
    "rdfs": RDFS.base,
    "sh": SH.base,
    "xsd": XSD.base,
}

_NUMERIC_DATATYPES = {XSD.integer, XSD.decimal, XSD.double}


def is_numeric_literal(t: Term) -> bool:
    return isinstance(t, Literal) and t.datatype in _NUMERIC_DATATYPES


# ---------------------------------------------------------------------------
# Graph
# ---------------------------------------------------------------------------

class Graph:
    """A finite set of triples plus a prefix map.

    Set semantics: adding a duplicate triple is a no-op. Instances are
    built once (parser, compiler, report emitter) and treated as
    immutable afterwards; all read paths are safe to share across
    threads.
    """

    def __init__(self, triples=(), prefixes: dict[str, str] | None = None):
        self._triples: set[Triple] = set(triples)
        self._prefixes: dict[str, str] = dict(prefixes or {})
        self._sorted: list[Triple] | None = None

    @property
    def prefixes(self) -> dict[str, str]:
        return dict(self._prefixes)

    def bind(self, label: str, namespace: str) -> None:
        self._prefixes[label] = namespace

    def add(self, triple: Triple) -> None:
        if triple not in self._triples:
            self._triples.add(triple)
            self._sorted = None

    def __len__(self) -> int:
        return len(self._triples)

    def __contains__(self, triple: Triple) -> bool:
        return triple in self._triples

    def __iter__(self):
        return iter(self.sorted_triples())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._triples == other._triples

    def __hash__(self):
        raise TypeError("Graph is not hashable")

    def sorted_triples(self) -> list[Triple]:
        if self._sorted is None:
            self._sorted = sorted(self._triples, key=triple_sort_key)
        return self._sorted

    def match(self, s: Term | None = None, p: Term | None = None,
              o: Term | None = None) -> list[Triple]:
        """All triples agreeing with every given position.

        Absent positions are wildcards. The result has set semantics but
        is returned in canonical order so downstream joins stay
        deterministic.
        """
        out = []
        for t in self.sorted_triples():
            if s is not None and t.subject != s:
                continue
            if p is not None and t.predicate != p:
                continue
            if o is not None and t.object != o:
                continue
            out.append(t)
        return out

    def subjects_of_type(self, cls: Iri) -> list[Term]:
        return [t.subject for t in self.match(None, RDF.type, cls)]


def union(a: Graph, b: Graph) -> Graph:
    """Triple-set union. Prefix conflicts resolve in favor of ``a``."""
    prefixes = dict(b._prefixes)
    for label, ns in a._prefixes.items():
        if label in prefixes and prefixes[label] != ns:
            logger.warning("prefix conflict on %r: keeping <%s>, dropping <%s>",
                           label, ns, prefixes[label])
        prefixes[label] = ns
    g = Graph(prefixes=prefixes)
    g._triples = set(a._triples) | set(b._triples)
    return g


# ---------------------------------------------------------------------------
# Turtle lexer
# ---------------------------------------------------------------------------

_SCHEME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")
_PN_LOCAL_RE = re.compile(r"^[A-Za-z0-9_][A-Za-z0-9_.\-]*$")
_INTEGER_RE = re.compile(r"^[+-]?[0-9]+$")
_DECIMAL_RE = re.compile(r"^[+-]?[0-9]+\.[0-9]+$")
_DOUBLE_RE = re.compile(r"^[+-]?(?:[0-9]+\.?[0-9]*|\.[0-9]+)[eE][+-]?[0-9]+$")


@dataclass
class _Token:
    kind: str
    value: object
    line: int
    col: int


class _TurtleLexer:
    _PUNCT = {".": "dot", ";": "semi", ",": "comma", "[": "lbracket", "]": "rbracket"}

    def __init__(self, source: str):
        self.src = source
        self.pos = 0
        self.line = 1
        self.col = 1

    def error(self, msg: str, line: int | None = None, col: int | None = None):
        raise TurtleSyntaxError(msg, line if line is not None else self.line,
                                col if col is not None else self.col)

    def _peek(self, offset: int = 0) -> str:
        i = self.pos + offset
        return self.src[i] if i < len(self.src) else ""

    def _advance(self) -> str:
        c = self.src[self.pos]
        self.pos += 1
        if c == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return c

    def tokens(self) -> list[_Token]:
        out = []
        while True:
            self._skip_ws_and_comments()
            if self.pos >= len(self.src):
                out.append(_Token("eof", None, self.line, self.col))
                return out
            out.append(self._next_token())

    def _skip_ws_and_comments(self):
        while self.pos < len(self.src):
            c = self._peek()
            if c in " \t\r\n":
                self._advance()
            elif c == "#":
                while self.pos < len(self.src) and self._peek() != "\n":
                    self._advance()
            else:
                return

    def _next_token(self) -> _Token:
        line, col = self.line, self.col
        c = self._peek()
        if c == "<":
            return self._iriref(line, col)
        if c == '"':
            return self._string(line, col)
        if c in self._PUNCT:
            self._advance()
            return _Token(self._PUNCT[c], c, line, col)
        if c == "(" or c == ")":
            self.error("collections '( )' are not supported", line, col)
        if c == "@":
            return self._at_word(line, col)
        if c == "^":
            self._advance()
            if self._peek() != "^":
                self.error("expected '^^'", line, col)
            self._advance()
            return _Token("dcaret", "^^", line, col)
        if c == "_" and self._peek(1) == ":":
            return self._blank_label(line, col)
        if c.isdigit() or (c in "+-" and (self._peek(1).isdigit() or self._peek(1) == ".")):
            return self._number(line, col)
        if c.isalpha():
            return self._name(line, col)
        self.error(f"unexpected character {c!r}", line, col)

    def _iriref(self, line, col) -> _Token:
        self._advance()
        buf = []
        while True:
            if self.pos >= len(self.src):
                self.error("unterminated IRI", line, col)
            c = self._advance()
            if c == ">":
                break
            if c in " \n\t\r<":
                self.error("illegal character in IRI", line, col)
            buf.append(c)
        return _Token("iriref", "".join(buf), line, col)

    def _string(self, line, col) -> _Token:
        if self.src.startswith('"""', self.pos):
            for _ in range(3):
                self._advance()
            return self._string_body(line, col, long=True)
        self._advance()
        return self._string_body(line, col, long=False)

    def _string_body(self, line, col, long: bool) -> _Token:
        buf = []
        while True:
            if self.pos >= len(self.src):
                self.error("unterminated string", line, col)
            c = self._peek()
            if long and self.src.startswith('"""', self.pos):
                for _ in range(3):
                    self._advance()
                return _Token("string", "".join(buf), line, col)
            if not long and c == '"':
                self._advance()
                return _Token("string", "".join(buf), line, col)
            if not long and c == "\n":
                self.error("unterminated string", line, col)
            if c == "\\":
                self._advance()
                buf.append(self._escape(line, col))
            else:
                buf.append(self._advance())

    def _escape(self, line, col) -> str:
        if self.pos >= len(self.src):
            self.error("unterminated string", line, col)
        c = self._advance()
        simple = {"t": "\t", "n": "\n", '"': '"', "\\": "\\"}
        if c in simple:
            return simple[c]
        if c == "u":
            hexs = ""
            for _ in range(4):
                if self.pos >= len(self.src) or self._peek() not in "0123456789abcdefABCDEF":
                    self.error("bad \\u escape", line, col)
                hexs += self._advance()
            return chr(int(hexs, 16))
        self.error(f"unsupported escape '\\{c}'", line, col)

    def _at_word(self, line, col) -> _Token:
        self._advance()
        word = ""
        while self._peek().isalpha():
            word += self._advance()
        if word == "prefix":
            return _Token("at_prefix", word, line, col)
        if word == "base":
            self.error("@base is not supported", line, col)
        if not word:
            self.error("expected directive or language tag after '@'", line, col)
        # language tag: @en, @en-GB
        tag = word
        while self._peek() == "-" and self._peek(1).isalnum():
            tag += self._advance()
            while self._peek().isalnum():
                tag += self._advance()
        return _Token("lang", tag, line, col)

    def _blank_label(self, line, col) -> _Token:
        self._advance()
        self._advance()
        label = ""
        while self._peek().isalnum() or self._peek() == "_":
            label += self._advance()
        if not label:
            self.error("blank node label expected after '_:'", line, col)
        return _Token("blank", label, line, col)

    def _number(self, line, col) -> _Token:
        buf = ""
        if self._peek() in "+-":
            buf += self._advance()
        while self._peek().isdigit():
            buf += self._advance()
        # dot is part of the number only when digits follow; otherwise it
        # terminates the statement
        if self._peek() == "." and self._peek(1).isdigit():
            buf += self._advance()
            while self._peek().isdigit():
                buf += self._advance()
        if self._peek() in "eE":
            buf += self._advance()
            if self._peek() in "+-":
                buf += self._advance()
            if not self._peek().isdigit():
                self.error(f"malformed numeric literal {buf!r}", line, col)
            while self._peek().isdigit():
                buf += self._advance()
            kind = "double"
        elif "." in buf:
            kind = "decimal"
        else:
            kind = "integer"
        if self._peek().isalpha():
            self.error(f"malformed numeric literal {buf + self._peek()!r}", line, col)
        return _Token(kind, buf, line, col)

    def _name(self, line, col) -> _Token:
        buf = ""
        while self._peek().isalnum() or self._peek() in "_.-":
            buf += self._advance()
        # a trailing dot belongs to the statement, not the name
        while buf.endswith("."):
            buf = buf[:-1]
            self.pos -= 1
            self.col -= 1
        if self._peek() == ":":
            self._advance()
            local = ""
            while self._peek().isalnum() or self._peek() in "_.-":
                local += self._advance()
            while local.endswith("."):
                local = local[:-1]
                self.pos -= 1
                self.col -= 1
            return _Token("pname", (buf, local), line, col)
        if buf == "a":
            return _Token("a", buf, line, col)
        if buf in ("true", "false"):
            return _Token("boolean", buf, line, col)
        self.error(f"unexpected token {buf!r}", line, col)


# ---------------------------------------------------------------------------
# Turtle parser
# ---------------------------------------------------------------------------

class _TurtleParser:
    def __init__(self, source: str):
        self.tokens = _TurtleLexer(source).tokens()
        self.idx = 0
        self.graph = Graph()
        self._bnode_counter = 0
        self._doc_labels: dict[str, BlankNode] = {}

    def _peek(self) -> _Token:
        return self.tokens[self.idx]

    def _next(self) -> _Token:
        tok = self.tokens[self.idx]
        self.idx += 1
        return tok

    def _expect(self, kind: str) -> _Token:
        tok = self._next()
        if tok.kind != kind:
            raise TurtleSyntaxError(f"expected {kind}, found {tok.kind}", tok.line, tok.col)
        return tok

    def _fresh_bnode(self) -> BlankNode:
        b = BlankNode(f"b{self._bnode_counter:03d}")
        self._bnode_counter += 1
        return b

    def parse(self) -> Graph:
        while self._peek().kind != "eof":
            if self._peek().kind == "at_prefix":
                self._prefix_directive()
            else:
                self._triples_block()
        return self.graph

    def _prefix_directive(self):
        self._next()
        tok = self._next()
        if tok.kind != "pname" or tok.value[1] != "":
            raise TurtleSyntaxError("expected 'label:' after @prefix", tok.line, tok.col)
        label = tok.value[0]
        iri_tok = self._expect("iriref")
        if not _SCHEME_RE.match(iri_tok.value):
            raise TurtleSyntaxError(f"relative IRI <{iri_tok.value}> not allowed",
                                    iri_tok.line, iri_tok.col)
        self._expect("dot")
        self.graph.bind(label, iri_tok.value)

    def _triples_block(self):
        subject = self._subject()
        self._predicate_object_list(subject)
        self._expect("dot")

    def _subject(self) -> Term:
        tok = self._peek()
        if tok.kind in ("iriref", "pname"):
            return self._iri_term()
        if tok.kind == "blank":
            self._next()
            return self._doc_label(tok.value)
        if tok.kind == "lbracket":
            return self._bnode_property_list()
        raise TurtleSyntaxError(f"expected subject, found {tok.kind}", tok.line, tok.col)

    def _doc_label(self, label: str) -> BlankNode:
        if label not in self._doc_labels:
            self._doc_labels[label] = self._fresh_bnode()
        return self._doc_labels[label]

    def _iri_term(self) -> Iri:
        tok = self._next()
        if tok.kind == "iriref":
            if not _SCHEME_RE.match(tok.value):
                raise TurtleSyntaxError(f"relative IRI <{tok.value}> not allowed",
                                        tok.line, tok.col)
            return Iri(tok.value)
        prefix, local = tok.value
        ns = self.graph.prefixes.get(prefix)
        if ns is None:
            raise TurtleSyntaxError(f"undefined prefix '{prefix}:'", tok.line, tok.col)
        return Iri(ns + local)

    def _predicate_object_list(self, subject: Term):
        while True:
            predicate = self._verb()
            self._object_list(subject, predicate)
            if self._peek().kind == "semi":
                self._next()
                # tolerate a trailing ';' before '.' or ']'
                if self._peek().kind in ("dot", "rbracket"):
                    return
                continue
            return

    def _verb(self) -> Iri:
        tok = self._peek()
        if tok.kind == "a":
            self._next()
            return RDF.type
        if tok.kind in ("iriref", "pname"):
            return self._iri_term()
        raise TurtleSyntaxError(f"expected predicate, found {tok.kind}", tok.line, tok.col)

    def _object_list(self, subject: Term, predicate: Iri):
        while True:
            obj = self._object()
            self.graph.add(Triple(subject, predicate, obj))
            if self._peek().kind == "comma":
                self._next()
                continue
            return

    def _object(self) -> Term:
        tok = self._peek()
        if tok.kind in ("iriref", "pname"):
            return self._iri_term()
        if tok.kind == "blank":
            self._next()
            return self._doc_label(tok.value)
        if tok.kind == "lbracket":
            return self._bnode_property_list()
        if tok.kind == "string":
            return self._string_literal()
        if tok.kind == "integer":
            self._next()
            return Literal(tok.value, XSD.integer)
        if tok.kind == "decimal":
            self._next()
            return Literal(tok.value, XSD.decimal)
        if tok.kind == "double":
            self._next()
            return Literal(tok.value, XSD.double)
        if tok.kind == "boolean":
            self._next()
            return Literal(tok.value, XSD.boolean)
        raise TurtleSyntaxError(f"expected object, found {tok.kind}", tok.line, tok.col)

    def _string_literal(self) -> Literal:
        tok = self._next()
        nxt = self._peek()
        if nxt.kind == "dcaret":
            self._next()
            dt = self._iri_term()
            return Literal(tok.value, dt)
        if nxt.kind == "lang":
            self._next()
            return Literal(tok.value, language=nxt.value.lower())
        return Literal(tok.value)

    def _bnode_property_list(self) -> BlankNode:
        self._expect("lbracket")
        node = self._fresh_bnode()
        if self._peek().kind != "rbracket":
            self._predicate_object_list(node)
        self._expect("rbracket")
        return node


def parse_turtle(source: str) -> Graph:
    """Parse a Turtle document into a Graph.

    Blank node labels are fresh per parse; they never carry identity
    across documents.
    """
    return _TurtleParser(source).parse()


# ---------------------------------------------------------------------------
# Canonical serializer
# ---------------------------------------------------------------------------

class _Serializer:
    def __init__(self, graph: Graph):
        self.graph = graph
        self.used_prefixes: set[str] = set()
        # longest-namespace-first so nested namespaces resolve correctly
        self.ns_by_length = sorted(graph.prefixes.items(),
                                   key=lambda kv: (-len(kv[1]), kv[0]))
        self.by_subject: dict[Term, list[Triple]] = {}
        self.refcount: dict[BlankNode, int] = {}
        for t in graph.sorted_triples():
            self.by_subject.setdefault(t.subject, []).append(t)
            if isinstance(t.object, BlankNode):
                self.refcount[t.object] = self.refcount.get(t.object, 0) + 1

    # -- blank node canonical content keys ---------------------------------

    def content_key(self, b: BlankNode, stack: tuple = ()) -> str:
        # computed fresh from the node's own perspective every time: a
        # shared cache would pin the ~cycle~ marker wherever the first
        # caller happened to stand, making labels depend on input order
        if b in stack:
            return "~cycle~"
        parts = []
        for t in self.by_subject.get(b, []):
            parts.append(t.predicate.value + "=" + self._object_key(t.object, stack + (b,)))
        return "(" + ";".join(sorted(parts)) + ")"

    def _object_key(self, o: Term, stack: tuple) -> str:
        if isinstance(o, BlankNode):
            return self.content_key(o, stack)
        return repr(term_sort_key(o))

    def _is_cyclic(self, b: BlankNode, stack: tuple = ()) -> bool:
        if b in stack:
            return True
        return any(isinstance(t.object, BlankNode)
                   and self._is_cyclic(t.object, stack + (b,))
                   for t in self.by_subject.get(b, []))

    # -- rendering ----------------------------------------------------------

    def render(self) -> str:
        # blank nodes needing a stable label: multiply referenced or cyclic
        labelled = sorted(
            (b for b in set(self.by_subject) | set(self.refcount)
             if isinstance(b, BlankNode)
             and (self.refcount.get(b, 0) >= 2 or self._is_cyclic(b))),
            key=lambda b: (self.content_key(b), b.label))
        self.labels = {b: f"c{i}" for i, b in enumerate(labelled)}

        iri_subjects = sorted((s for s in self.by_subject if isinstance(s, Iri)),
                              key=term_sort_key)
        root_bnodes = sorted(
            (s for s in self.by_subject
             if isinstance(s, BlankNode) and self.refcount.get(s, 0) == 0
             and s not in self.labels),
            key=self.content_key)
        labelled_subjects = sorted((b for b in self.labels if b in self.by_subject),
                                   key=lambda b: self.labels[b])

        blocks = []
        for s in iri_subjects:
            blocks.append(self._subject_block(self._render_iri(s), s))
        for s in root_bnodes:
            blocks.append(self._subject_block("[]", s))
        for s in labelled_subjects:
            blocks.append(self._subject_block("_:" + self.labels[s], s))

        header = []
        for label, ns in sorted(self.graph.prefixes.items()):
            if label in self.used_prefixes:
                header.append(f"@prefix {label}: <{ns}> .")
        out = ""
        if header:
            out += "\n".join(header) + "\n"
        if blocks:
            if header:
                out += "\n"
            out += "\n\n".join(blocks) + "\n"
        return out

    def _grouped(self, s: Term) -> list[tuple[Iri, list[Term]]]:
        by_pred: dict[Iri, list[Term]] = {}
        for t in self.by_subject.get(s, []):
            by_pred.setdefault(t.predicate, []).append(t.object)
        def pred_key(p: Iri):
            return (0,) if p == RDF.type else (1, p.value)
        out = []
        for p in sorted(by_pred, key=pred_key):
            objs = sorted(by_pred[p], key=self._object_sort_key)
            out.append((p, objs))
        return out

    def _object_sort_key(self, o: Term) -> tuple:
        if isinstance(o, BlankNode):
            return (2, self.content_key(o))
        return term_sort_key(o)

    def _subject_block(self, head: str, s: Term) -> str:
        lines = []
        for i, (p, objs) in enumerate(self._grouped(s)):
            rendered = ", ".join(self._render_object(o) for o in objs)
            pv = "a" if p == RDF.type else self._render_iri(p)
            if i == 0:
                lines.append(f"{head} {pv} {rendered}")
            else:
                lines.append(f"    {pv} {rendered}")
        return " ;\n".join(lines) + " ."

    def _render_object(self, o: Term) -> str:
        if isinstance(o, Iri):
            return self._render_iri(o)
        if isinstance(o, Literal):
            return self._render_literal(o)
        if o in self.labels:
            return "_:" + self.labels[o]
        return self._render_inline_bnode(o)

    def _render_inline_bnode(self, b: BlankNode) -> str:
        grouped = self._grouped(b)
        if not grouped:
            return "[]"
        parts = []
        for p, objs in grouped:
            pv = "a" if p == RDF.type else self._render_iri(p)
            parts.append(f"{pv} " + ", ".join(self._render_object(o) for o in objs))
        return "[ " + " ; ".join(parts) + " ]"

    def _render_iri(self, iri: Iri) -> str:
        for label, ns in self.ns_by_length:
            if not iri.value.startswith(ns):
                continue
            local = iri.value[len(ns):]
            if local and _PN_LOCAL_RE.match(local) and not local.endswith("."):
                self.used_prefixes.add(label)
                return f"{label}:{local}"
        return f"<{iri.value}>"

    def _render_literal(self, lit: Literal) -> str:
        if lit.language is not None:
            return self._quote(lit.lexical) + "@" + lit.language
        dt = lit.datatype
        if dt == XSD.integer and _INTEGER_RE.match(lit.lexical):
            return lit.lexical
        if dt == XSD.decimal and _DECIMAL_RE.match(lit.lexical):
            return lit.lexical
        if dt == XSD.double and _DOUBLE_RE.match(lit.lexical):
            return lit.lexical
        if dt == XSD.boolean and lit.lexical in ("true", "false"):
            return lit.lexical
        if dt == XSD.string:
            return self._quote(lit.lexical)
        return self._quote(lit.lexical) + "^^" + self._render_iri(dt)

    def _quote(self, s: str) -> str:
        if "\n" in s:
            body = s.replace("\\", "\\\\").replace('"', '\\"')
            return f'"""{body}"""'
        body = (s.replace("\\", "\\\\").replace('"', '\\"')
                 .replace("\n", "\\n").replace("\t", "\\t")
                 .replace("\r", "\\u000D"))
        return f'"{body}"'


def serialize_turtle(g: Graph) -> str:
    """Canonical Turtle text for ``g``.

    Equal triple sets with compatible prefix maps produce byte-identical
    output. Blank nodes with a single parent are emitted inline, so their
    labels never reach the output; multiply-referenced blank nodes get
    stable content-derived ``_:cN`` labels.
    """
    return _Serializer(g).render()

"""Obligation records and their deterministic compilation into shapes.

A block source file is a YAML sequence of flat obligation records. Each
record names a target class and describes one constraint, either
structural (a required relation, optionally refined by a datatype or a
required value class) or a query (an embedded SELECT constraint). The
compiler maps every record to exactly one node shape and assembles the
block five-tuple: obligation ids, a concept schema, the shapes, the
evidence requirements they induce, and the provenance predicates they
touch.

Compilation is a pure function: the same records produce byte-identical
canonical output, whatever their input order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import yaml

from .errors import DuplicateIdError, SchemaError, UnknownPrefixError
from .rdf import (EX, PROV, RDF, RDFS, STANDARD_PREFIXES, Graph, Iri, Triple,
                  union)
from .shacl import (Constraint, Datatype, MinCount, NodeShape,
                    QualifiedMinCountClass, Severity, SparqlConstraint,
                    _constraint_sort_key, emit_shapes_graph)
from .sparql import SparqlQuery, TriplePattern, Var, parse_sparql

_ID_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_THRESHOLD_PLACEHOLDER = "{{threshold}}"

_FIELDS = {
    "obligation_id", "target_class", "constraint_type", "relation",
    "datatype", "value_class", "min_count", "sparql_text", "threshold_ref",
    "severity", "message",
}
_STRUCTURAL_ONLY = {"relation", "datatype", "value_class", "min_count"}
_SPARQL_ONLY = {"sparql_text", "threshold_ref"}


def merge_severity(a: Severity, b: Severity) -> Severity:
    """The stricter of two severities (Violation > Warning > Info)."""
    return a if a.rank >= b.rank else b


@dataclass(frozen=True)
class IrRecord:
    """One obligation: a target class plus a single constraint description.

    ``sparql_text`` is stored post-substitution, so it always parses on
    its own.
    """

    obligation_id: str
    target_class: Iri
    constraint_type: str  # structural | sparql
    message: str
    severity: Severity = Severity.VIOLATION
    relation: Iri | None = None
    datatype: Iri | None = None
    value_class: Iri | None = None
    min_count: int = 1
    sparql_text: str | None = None
    threshold_ref: Iri | None = None


def _resolve_name(value: str, where: str) -> Iri:
    """Resolve a prefixed name or absolute IRI reference."""
    if value.startswith("<") and value.endswith(">"):
        return Iri(value[1:-1])
    if ":" in value:
        prefix, local = value.split(":", 1)
        if re.match(r"^[A-Za-z][A-Za-z0-9+.\-]*$", prefix) and "//" in local[:2]:
            return Iri(value)  # already an absolute IRI like http://...
        ns = STANDARD_PREFIXES.get(prefix)
        if ns is None:
            raise UnknownPrefixError(f"{where}: unknown prefix {prefix!r} in {value!r}")
        return Iri(ns + local)
    raise SchemaError(f"{where}: {value!r} is not a prefixed name or IRI")


def _need_str(item: dict, key: str, where: str) -> str:
    value = item.get(key)
    if not isinstance(value, str) or not value.strip():
        raise SchemaError(f"{where}: field {key!r} must be a non-empty string")
    return value


def parse_ir(text: str) -> list[IrRecord]:
    """Parse a block source into records, in file order.

    The accepted YAML is deliberately flat: a top-level sequence of
    mappings whose values are scalars (multi-line query text via a
    literal block scalar). Anything else is a schema error, as is a
    duplicated obligation id.
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SchemaError(f"not parseable as YAML: {exc}") from exc
    if doc is None:
        return []
    if not isinstance(doc, list):
        raise SchemaError("block source must be a sequence of records")
    records: list[IrRecord] = []
    seen: dict[str, int] = {}
    for index, item in enumerate(doc):
        where = f"record {index}"
        if not isinstance(item, dict):
            raise SchemaError(f"{where}: expected a mapping")
        for key, value in item.items():
            if key not in _FIELDS:
                raise SchemaError(f"{where}: unknown field {key!r}")
            if not isinstance(value, (str, int, float)) or isinstance(value, bool):
                raise SchemaError(f"{where}: field {key!r} must be a scalar")
        record = _build_record(item, where)
        if record.obligation_id in seen:
            raise DuplicateIdError(
                f"duplicate obligation_id {record.obligation_id!r} "
                f"(records {seen[record.obligation_id]} and {index})")
        seen[record.obligation_id] = index
        records.append(record)
    return records


def _build_record(item: dict, where: str) -> IrRecord:
    obligation_id = _need_str(item, "obligation_id", where)
    if not _ID_RE.match(obligation_id):
        raise SchemaError(f"{where}: obligation_id {obligation_id!r} "
                          "must be a plain identifier")
    where = f"record {obligation_id!r}"
    target_class = _resolve_name(_need_str(item, "target_class", where),
                                 f"{where} target_class")
    constraint_type = _need_str(item, "constraint_type", where)
    if constraint_type not in ("structural", "sparql"):
        raise SchemaError(f"{where}: constraint_type must be "
                          f"'structural' or 'sparql', got {constraint_type!r}")
    message = _need_str(item, "message", where)
    severity = Severity.VIOLATION
    if "severity" in item:
        name = _need_str(item, "severity", where)
        if name not in ("Violation", "Warning", "Info"):
            raise SchemaError(f"{where}: severity must be Violation, "
                              f"Warning or Info, got {name!r}")
        severity = Severity.from_name(name)

    wrong_family = (_SPARQL_ONLY if constraint_type == "structural"
                    else _STRUCTURAL_ONLY)
    for key in wrong_family & set(item):
        raise SchemaError(f"{where}: field {key!r} does not apply to "
                          f"{constraint_type} records")

    if constraint_type == "structural":
        relation = _resolve_name(_need_str(item, "relation", where),
                                 f"{where} relation")
        datatype = value_class = None
        if "datatype" in item:
            datatype = _resolve_name(_need_str(item, "datatype", where),
                                     f"{where} datatype")
        if "value_class" in item:
            value_class = _resolve_name(_need_str(item, "value_class", where),
                                        f"{where} value_class")
        min_count = 1
        if "min_count" in item:
            if not isinstance(item["min_count"], int) or item["min_count"] < 0:
                raise SchemaError(f"{where}: min_count must be a "
                                  "non-negative integer")
            min_count = item["min_count"]
        return IrRecord(obligation_id, target_class, "structural", message,
                        severity, relation=relation, datatype=datatype,
                        value_class=value_class, min_count=min_count)

    sparql_text = _need_str(item, "sparql_text", where)
    threshold_ref = None
    if "threshold_ref" in item:
        threshold_ref = _resolve_name(_need_str(item, "threshold_ref", where),
                                      f"{where} threshold_ref")
    if _THRESHOLD_PLACEHOLDER in sparql_text:
        if threshold_ref is None:
            raise SchemaError(f"{where}: query uses {_THRESHOLD_PLACEHOLDER} "
                              "but no threshold_ref is given")
        sparql_text = sparql_text.replace(_THRESHOLD_PLACEHOLDER,
                                          _compact(threshold_ref))
    parse_sparql(sparql_text)  # syntax and scope errors propagate
    return IrRecord(obligation_id, target_class, "sparql", message, severity,
                    sparql_text=sparql_text, threshold_ref=threshold_ref)


def _compact(iri: Iri) -> str:
    for label, ns in STANDARD_PREFIXES.items():
        if iri.value.startswith(ns):
            return f"{label}:{iri.value[len(ns):]}"
    return f"<{iri.value}>"


# ---------------------------------------------------------------------------
# Knowledge blocks
# ---------------------------------------------------------------------------

@dataclass
class KnowledgeBlock:
    """⟨obligations, concepts, shapes, evidence requirements, provenance⟩."""

    name: str
    obligations: frozenset[str]
    concepts: Graph
    shapes: tuple[NodeShape, ...]
    evidence_requirements: frozenset[tuple[Iri, Iri]]
    provenance_links: frozenset[Iri]

    def shapes_graph(self) -> Graph:
        return emit_shapes_graph(list(self.shapes))

    def document_graph(self) -> Graph:
        """Shapes plus concept declarations, the on-disk block content."""
        return union(self.shapes_graph(), self.concepts)


def empty_block(name: str = "empty") -> KnowledgeBlock:
    return KnowledgeBlock(name, frozenset(), Graph(prefixes=dict(STANDARD_PREFIXES)),
                          (), frozenset(), frozenset())


def _record_shape(record: IrRecord) -> NodeShape:
    iri = EX.term(record.obligation_id + "Shape")
    constraints: list[Constraint] = []
    if record.constraint_type == "structural":
        constraints.append(MinCount(record.relation, record.min_count))
        if record.datatype is not None:
            constraints.append(Datatype(record.relation, record.datatype))
        if record.value_class is not None:
            constraints.append(QualifiedMinCountClass(
                record.relation, record.value_class, record.min_count))
    else:
        query = parse_sparql(record.sparql_text)
        constraints.append(SparqlConstraint(record.sparql_text, query))
    constraints.sort(key=_constraint_sort_key)
    return NodeShape(iri, record.target_class, tuple(constraints),
                     record.severity, record.message)


def _query_predicates(query: SparqlQuery) -> list[tuple[bool, Iri]]:
    """Pattern predicates; the flag marks patterns anchored on $this."""
    out = []
    for clause in query.clauses:
        if isinstance(clause, TriplePattern) and isinstance(clause.predicate, Iri):
            anchored = clause.subject == Var("this")
            out.append((anchored, clause.predicate))
    return out


def compile_block(records: list[IrRecord], block_name: str) -> KnowledgeBlock:
    """Compile records into a block; one shape per record.

    The concept schema declares every class and predicate the shapes
    mention; evidence requirements pair the target class with each
    required relation (for query constraints, with each predicate the
    query reads off the focus node).
    """
    shapes = [_record_shape(r) for r in
              sorted(records, key=lambda r: r.obligation_id)]

    classes: set[Iri] = set()
    predicates: set[Iri] = set()
    evidence: set[tuple[Iri, Iri]] = set()
    for record in records:
        classes.add(record.target_class)
        if record.constraint_type == "structural":
            predicates.add(record.relation)
            evidence.add((record.target_class, record.relation))
            if record.value_class is not None:
                classes.add(record.value_class)
        else:
            for anchored, pred in _query_predicates(parse_sparql(record.sparql_text)):
                predicates.add(pred)
                if anchored:
                    evidence.add((record.target_class, pred))
    prov_links = {p for p in predicates if p.value.startswith(PROV.base)}

    concepts = Graph(prefixes=dict(STANDARD_PREFIXES))
    for cls in classes:
        concepts.add(Triple(cls, RDF.type, RDFS.term("Class")))
    for pred in predicates:
        concepts.add(Triple(pred, RDF.type, RDF.Property))

    return KnowledgeBlock(
        name=block_name,
        obligations=frozenset(r.obligation_id for r in records),
        concepts=concepts,
        shapes=tuple(shapes),
        evidence_requirements=frozenset(evidence),
        provenance_links=frozenset(prov_links),
    )


# Contract alias: the operation is conventionally called "compile".
compile = compile_block

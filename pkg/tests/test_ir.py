"""Obligation record parsing and block compilation."""

from textwrap import dedent

import pytest

from govshapes.corpus import block_source
from govshapes.errors import (DuplicateIdError, SchemaError, SparqlSyntaxError,
                              UnknownPrefixError)
from govshapes.ir import (IrRecord, KnowledgeBlock, compile_block, empty_block,
                          merge_severity, parse_ir)
from govshapes.ir import compile as compile_alias
from govshapes.rdf import EX, PROV, RDF, RDFS, XSD, Iri, serialize_turtle
from govshapes.shacl import (Datatype, MinCount, QualifiedMinCountClass,
                             Severity, SparqlConstraint, load_shapes)


def records(text):
    return parse_ir(dedent(text))


MINIMAL = """
    - obligation_id: R1
      target_class: ex:Decision
      constraint_type: structural
      relation: ex:hasUsageLog
      message: Needs a log.
"""


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def test_parse_shipped_fairness_block():
    recs = parse_ir(block_source("fairness"))
    assert [r.obligation_id for r in recs] == ["B2", "B3", "B4", "B5"]
    b2, b5 = recs[0], recs[3]
    assert b2.target_class == EX.Decision
    assert b2.datatype == XSD.decimal
    assert b5.constraint_type == "sparql"
    assert b5.threshold_ref == EX.fairnessThreshold
    assert "{{" not in b5.sparql_text
    assert "ex:fairnessThreshold" in b5.sparql_text


def test_parse_shipped_accountability_block():
    recs = parse_ir(block_source("accountability"))
    assert [r.obligation_id for r in recs] == ["A1", "A2", "A3", "A4", "A5"]
    a5 = recs[4]
    assert a5.relation == PROV.used
    assert a5.value_class == EX.ModelArtifact


def test_parse_defaults():
    (rec,) = records(MINIMAL)
    assert rec.min_count == 1
    assert rec.severity is Severity.VIOLATION
    assert rec.datatype is None and rec.value_class is None


def test_parse_severity_name():
    (rec,) = records("""
        - obligation_id: R1
          target_class: ex:T
          constraint_type: structural
          relation: ex:p
          severity: Warning
          message: M.
    """)
    assert rec.severity is Severity.WARNING


def test_parse_accepts_absolute_iris():
    (rec,) = records("""
        - obligation_id: R1
          target_class: <http://other.test/K>
          constraint_type: structural
          relation: http://other.test/p
          message: M.
    """)
    assert rec.target_class == Iri("http://other.test/K")
    assert rec.relation == Iri("http://other.test/p")


def test_parse_empty_and_comment_only_sources():
    assert parse_ir("") == []
    assert parse_ir("# nothing yet\n") == []


def test_threshold_placeholder_substitution_keeps_query_parseable():
    (rec,) = records("""
        - obligation_id: R1
          target_class: ex:T
          constraint_type: sparql
          threshold_ref: prov:bound
          message: M.
          sparql_text: |-
            SELECT $this WHERE { $this {{threshold}} ?t . FILTER(?t > 0) }
    """)
    assert "prov:bound" in rec.sparql_text


def test_threshold_ref_outside_standard_prefixes_inlines_the_iri():
    (rec,) = records("""
        - obligation_id: R1
          target_class: ex:T
          constraint_type: sparql
          threshold_ref: <http://other.test/t>
          message: M.
          sparql_text: |-
            SELECT $this WHERE { $this {{threshold}} ?t . FILTER(?t > 0) }
    """)
    assert "<http://other.test/t>" in rec.sparql_text


@pytest.mark.parametrize("source, fragment", [
    ("obligation_id: A1", "sequence of records"),
    ("- 3", "record 0: expected a mapping"),
    ("- obligation_id: R1\n  bogus: x", "unknown field 'bogus'"),
    ("- obligation_id: R1\n  message:\n    - a", "field 'message' must be a scalar"),
    ("- obligation_id: R1\n  min_count: true", "field 'min_count' must be a scalar"),
    ("- target_class: ex:T", "field 'obligation_id' must be a non-empty string"),
    ("- obligation_id: 12", "field 'obligation_id' must be a non-empty string"),
    ("- obligation_id: not an id", "must be a plain identifier"),
    (MINIMAL.replace("structural", "regex"), "must be 'structural' or 'sparql'"),
    (MINIMAL + "      severity: Fatal\n", "must be Violation, Warning or Info"),
    (MINIMAL + "      sparql_text: x\n", "does not apply to structural records"),
    (MINIMAL + "      min_count: -1\n", "must be a non-negative integer"),
    (MINIMAL + "      min_count: 1.5\n", "must be a non-negative integer"),
    (MINIMAL.replace("ex:Decision", "Decision"), "not a prefixed name or IRI"),
    ("""
     - obligation_id: R1
       target_class: ex:T
       constraint_type: sparql
       relation: ex:p
       message: M.
       sparql_text: SELECT $this WHERE { $this ex:p ?v }
     """, "does not apply to sparql records"),
    ("""
     - obligation_id: R1
       target_class: ex:T
       constraint_type: sparql
       message: M.
       sparql_text: SELECT $this WHERE { $this {{threshold}} ?t . FILTER(?t > 0) }
     """, "no threshold_ref is given"),
])
def test_parse_rejects_bad_records(source, fragment):
    with pytest.raises(SchemaError, match=fragment):
        records(source)


def test_parse_rejects_unknown_prefix():
    with pytest.raises(UnknownPrefixError, match="unknown prefix 'foo'"):
        records(MINIMAL.replace("ex:Decision", "foo:Decision"))


def test_parse_rejects_unparseable_yaml():
    with pytest.raises(SchemaError, match="not parseable as YAML"):
        parse_ir("- foo: [unclosed")


def test_parse_rejects_duplicate_ids():
    with pytest.raises(DuplicateIdError,
                       match=r"duplicate obligation_id 'R1' \(records 0 and 1\)"):
        records(MINIMAL + MINIMAL.lstrip("\n"))


def test_bad_embedded_query_propagates():
    with pytest.raises(SparqlSyntaxError, match="unterminated group"):
        records("""
            - obligation_id: R1
              target_class: ex:T
              constraint_type: sparql
              message: M.
              sparql_text: SELECT $this WHERE { $this ex:p ?v
        """)
    with pytest.raises(SparqlSyntaxError, match="must project"):
        records("""
            - obligation_id: R1
              target_class: ex:T
              constraint_type: sparql
              message: M.
              sparql_text: SELECT ?v WHERE { $this ex:p ?v }
        """)


# ---------------------------------------------------------------------------
# Severity merging
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("a, b, expected", [
    (Severity.VIOLATION, Severity.WARNING, Severity.VIOLATION),
    (Severity.WARNING, Severity.VIOLATION, Severity.VIOLATION),
    (Severity.WARNING, Severity.INFO, Severity.WARNING),
    (Severity.INFO, Severity.INFO, Severity.INFO),
])
def test_merge_severity_takes_the_stricter(a, b, expected):
    assert merge_severity(a, b) is expected


# ---------------------------------------------------------------------------
# Compilation
# ---------------------------------------------------------------------------

def test_compile_one_shape_per_record_sorted_by_id():
    recs = parse_ir(block_source("fairness"))
    block = compile_block(recs, "fairness")
    assert isinstance(block, KnowledgeBlock)
    assert block.name == "fairness"
    assert [s.iri for s in block.shapes] == [
        EX.B2Shape, EX.B3Shape, EX.B4Shape, EX.B5Shape]
    assert block.obligations == frozenset({"B2", "B3", "B4", "B5"})


def test_compile_structural_constraint_layout():
    block = compile_block(parse_ir(block_source("fairness")), "fairness")
    b2 = block.shapes[0]
    assert b2.target_class == EX.Decision
    assert b2.constraints == (
        Datatype(EX.fairnessThreshold, XSD.decimal),
        MinCount(EX.fairnessThreshold, 1),
    )
    assert b2.message == "Decision must declare a decimal fairness threshold."


def test_compile_value_class_adds_qualified_constraint():
    block = compile_block(parse_ir(block_source("accountability")), "acct")
    a5 = [s for s in block.shapes if s.iri == EX.A5Shape][0]
    assert a5.constraints == (
        MinCount(PROV.used, 1),
        QualifiedMinCountClass(PROV.used, EX.ModelArtifact, 1),
    )


def test_compile_query_record_embeds_parsed_constraint():
    block = compile_block(parse_ir(block_source("fairness")), "fairness")
    b5 = block.shapes[3]
    (constraint,) = b5.constraints
    assert isinstance(constraint, SparqlConstraint)
    assert constraint.query.select_vars == ("this",)
    assert constraint.message is None  # record message lives on the shape
    assert b5.message == "Fairness disparity exceeds threshold."


def test_compile_concepts_declare_every_mentioned_term():
    block = compile_block(parse_ir(block_source("fairness")), "fairness")
    classes = {t.subject for t in block.concepts.match(None, RDF.type,
                                                       RDFS.term("Class"))}
    predicates = {t.subject for t in block.concepts.match(None, RDF.type,
                                                          RDF.Property)}
    assert classes == {EX.Decision}
    assert predicates == {EX.fairnessThreshold, EX.allocatedGPUHoursGroupA,
                          EX.allocatedGPUHoursGroupB}
    acct = compile_block(parse_ir(block_source("accountability")), "acct")
    acct_classes = {t.subject for t in acct.concepts.match(None, RDF.type,
                                                           RDFS.term("Class"))}
    assert EX.ModelArtifact in acct_classes  # value classes are declared too


def test_compile_evidence_requirements_cover_query_reads():
    block = compile_block(parse_ir(block_source("fairness")), "fairness")
    assert block.evidence_requirements == frozenset({
        (EX.Decision, EX.fairnessThreshold),
        (EX.Decision, EX.allocatedGPUHoursGroupA),
        (EX.Decision, EX.allocatedGPUHoursGroupB),
    })


def test_compile_collects_provenance_predicates_only():
    acct = compile_block(parse_ir(block_source("accountability")), "acct")
    assert acct.provenance_links == frozenset({PROV.used,
                                               PROV.term("wasGeneratedBy")})
    fair = compile_block(parse_ir(block_source("fairness")), "fairness")
    assert fair.provenance_links == frozenset()


def test_compile_is_input_order_independent():
    recs = parse_ir(block_source("accountability"))
    forward = compile_block(recs, "acct")
    backward = compile_block(list(reversed(recs)), "acct")
    assert forward == backward
    assert serialize_turtle(forward.document_graph()) == \
        serialize_turtle(backward.document_graph())


def test_compile_twice_is_byte_identical():
    for name in ("accountability", "fairness", "logging"):
        recs = parse_ir(block_source(name))
        first = serialize_turtle(compile_block(recs, name).document_graph())
        second = serialize_turtle(compile_block(recs, name).document_graph())
        assert first == second


def test_compile_of_nothing_is_the_empty_block():
    block = compile_block([], "void")
    assert block.shapes == ()
    assert block.obligations == frozenset()
    assert len(block.concepts) == 0
    assert serialize_turtle(block.document_graph()) == ""
    stock = empty_block()
    assert stock.name == "empty"
    assert serialize_turtle(stock.document_graph()) == ""


def test_compile_alias_is_the_same_function():
    assert compile_alias is compile_block


def test_shapes_graph_round_trips_through_loader():
    for name in ("accountability", "fairness"):
        block = compile_block(parse_ir(block_source(name)), name)
        assert load_shapes(block.shapes_graph()) == list(block.shapes)


def test_min_count_zero_compiles_to_vacuous_min():
    (rec,) = records(MINIMAL + "      min_count: 0\n")
    block = compile_block([rec], "b")
    assert block.shapes[0].constraints == (MinCount(EX.hasUsageLog, 0),)


def test_record_construction_is_direct_dataclass():
    rec = IrRecord("X1", EX.T, "structural", "msg", relation=EX.p)
    block = compile_block([rec], "b")
    assert block.shapes[0].iri == EX.term("X1Shape")

"""Query text to interpretations: tokenizing, binding, scoring."""

import pytest

from dbsearch.errors import (
    NoInterpretationError,
    QuerySyntaxError,
    UnmappableKeywordError,
)
from dbsearch.lexicon import Lexicon
from dbsearch.parser import ValueLeaf, bind_keyword, interpret, tokenize


def _kinds(tokens):
    return [t.kind for t in tokens]


def _names_of(catalog, interp):
    out = []
    for t in interp.terms:
        tname = catalog.table(t.relation).name
        cname = (
            catalog.column(t.relation, t.attribute).name if t.attribute is not None else None
        )
        out.append((tname, cname, t.value, t.negated))
    return out


def test_tokenize_splits_keywords_and_operators():
    toks = tokenize("john and paris")
    assert _kinds(toks) == ["keyword", "op_and", "keyword"]
    assert [t.text for t in toks] == ["john", "and", "paris"]


def test_tokenize_inserts_implicit_and():
    assert _kinds(tokenize("john paris")) == ["keyword", "op_and", "keyword"]
    assert _kinds(tokenize("john not 15")) == ["keyword", "op_and", "op_not", "keyword"]


def test_tokenize_keeps_quoted_spans_whole():
    toks = tokenize("'computer science' and dept")
    assert toks[0].text == "computer science"
    assert toks[0].quoted is True
    assert _kinds(toks) == ["keyword", "op_and", "keyword"]
    # operators lose their meaning inside quotes
    toks = tokenize('"rock and roll"')
    assert [t.text for t in toks] == ["rock and roll"]


def test_tokenize_rejects_bad_quoting():
    with pytest.raises(QuerySyntaxError) as info:
        tokenize("john and 'unterminated")
    assert info.value.position == 9
    with pytest.raises(QuerySyntaxError):
        tokenize("john ''")


def test_malformed_operator_sequences_are_rejected(club_service):
    lex = club_service.lexicon
    cat = club_service.catalog
    for bad in ("", "and john", "john and", "not", "john and and mary"):
        with pytest.raises(QuerySyntaxError):
            interpret(tokenize(bad), lex, cat)


def test_binding_order_relation_attribute_value(club_service):
    lex = club_service.lexicon
    cat = club_service.catalog
    kinds = [b.kind for b in bind_keyword(tokenize("member")[0], lex, cat)]
    assert kinds[0] == "relation"
    kinds = [b.kind for b in bind_keyword(tokenize("name")[0], lex, cat)]
    assert set(kinds) == {"attribute"}
    bindings = bind_keyword(tokenize("john")[0], lex, cat)
    assert [b.kind for b in bindings] == ["value", "value"]
    names = [(cat.table(b.table_id).name) for b in bindings]
    assert names == ["Member", "Activity"]


def test_unmappable_keyword_raises_under_reject(club_service):
    with pytest.raises(UnmappableKeywordError) as info:
        bind_keyword(tokenize("zubzub")[0], club_service.lexicon, club_service.catalog)
    assert info.value.detail["keyword"] == "zubzub"


def test_vocabulary_reaches_bindings(university_service):
    lex = university_service.lexicon
    cat = university_service.catalog
    bindings = bind_keyword(tokenize("students")[0], lex, cat)
    assert bindings[0].kind == "relation"
    assert cat.table(bindings[0].table_id).name == "Student"
    bindings = bind_keyword(tokenize("female")[0], lex, cat)
    values = [b for b in bindings if b.kind == "value"]
    assert values and all(b.value == "f" for b in values)


def test_interpretations_are_scored_and_stable(club_service):
    lex = club_service.lexicon
    cat = club_service.catalog
    pairs = interpret(tokenize("john"), lex, cat)
    assert len(pairs) == 2
    first, second = pairs[0][0], pairs[1][0]
    assert _names_of(cat, first) == [("Member", "Name", "john", False)]
    assert _names_of(cat, second) == [("Activity", "Name", "john", False)]
    scores = [p[0].score for p in pairs]
    assert scores == sorted(scores)


def test_duplicate_keywords_collapse(club_service):
    lex = club_service.lexicon
    cat = club_service.catalog
    pairs = interpret(tokenize("john and john"), lex, cat)
    term_sets = [frozenset(p[0].terms) for p in pairs]
    assert len(term_sets) == len(set(term_sets)) == 3
    # single-relation readings outrank the two-relation combination
    assert [p[0].score // 1000 for p in pairs] == [1, 1, 2]


def test_metadata_keywords_merge_into_value_relations(club_service):
    lex = club_service.lexicon
    cat = club_service.catalog
    best = interpret(tokenize("member john"), lex, cat)[0][0]
    assert _names_of(cat, best) == [
        ("Member", None, None, False),
        ("Member", "Name", "john", False),
    ]
    # an attribute keyword merges with a value in the same relation,
    # outranking any two-relation combination
    best = interpret(tokenize("name john"), lex, cat)[0][0]
    rels = {t.relation for t in best.terms}
    assert len(rels) == 1
    assert [(t.attribute is not None, t.value) for t in best.terms] == [
        (True, None),
        (True, "john"),
    ]


def test_negation_applies_to_values_only(club_service):
    lex = club_service.lexicon
    cat = club_service.catalog
    pairs = interpret(tokenize("not john"), lex, cat)
    assert all(t.negated for p in pairs for t in p[0].terms)
    with pytest.raises(NoInterpretationError):
        interpret(tokenize("not member"), lex, cat)


def test_interpretation_cap_limits_output(club_service):
    lex = club_service.lexicon
    cat = club_service.catalog
    pairs = interpret(tokenize("john"), lex, cat, cap=1)
    assert len(pairs) == 1
    assert _names_of(cat, pairs[0][0]) == [("Member", "Name", "john", False)]


def test_tree_groups_values_under_attributes(club_service):
    lex = club_service.lexicon
    cat = club_service.catalog
    pairs = interpret(tokenize("running and biking"), lex, cat)
    interp, tree = next(
        (i, t)
        for i, t in pairs
        if len({term.relation for term in i.terms}) == 1 and len(i.terms) == 2
    )
    assert len(tree.relations) == 1
    rel = tree.relations[0]
    assert cat.table(rel.table_id).name == "Activity"
    assert len(rel.attributes) == 1
    assert rel.attributes[0].values == (ValueLeaf("running"), ValueLeaf("biking"))


def test_scan_policy_discovers_unindexed_values(club_deploy):
    from dbsearch.config import Config
    from dbsearch.pipeline import SearchService

    config = Config(uri=club_deploy.uri, ssdb=club_deploy.ssdb_path)
    service = SearchService.open(config)
    try:
        with pytest.raises(UnmappableKeywordError):
            interpret(tokenize("15"), service.lexicon, service.catalog, policy="reject")
        lex = Lexicon(vmap=list(service.lexicon.vmap), voc=list(service.lexicon.voc))
        pairs = interpret(
            tokenize("15"), lex, service.catalog, policy="scan", gateway=service.gateway
        )
        names = _names_of(service.catalog, pairs[0][0])
        assert names == [("Member", "Age", "15", False)]
        assert any(e.value == "15" for e in lex.vmap)
    finally:
        service.close()

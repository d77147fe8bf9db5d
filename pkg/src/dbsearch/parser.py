"""Keyword-query parsing: tokens, keyword binding, interpretations.

A query is a conjunction of keywords (quoted phrases stay single
keywords, NOT negates the following value keyword).  Each keyword is
bound to schema elements or indexed values; the cartesian product of
those bindings yields candidate interpretations, each carried as a
set of path terms plus its 4-level query tree.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .catalog import SchemaCatalog
from .errors import NoInterpretationError, QuerySyntaxError, UnmappableKeywordError
from .lexicon import Lexicon, normalize

#: Upper bound on enumerated binding combinations, a safety valve for
#: adversarial inputs; interpretation output is capped separately.
MAX_COMBINATIONS = 100_000


@dataclass(frozen=True)
class Token:
    text: str
    quoted: bool = False
    kind: str = "keyword"  # keyword | op_and | op_not
    pos: int = -1


@dataclass(frozen=True)
class PathTerm:
    """One keyword's reading: (R, A, v), (R, A) or (R)."""

    relation: int
    attribute: int | None = None
    value: str | None = None
    negated: bool = False


@dataclass(frozen=True)
class Interpretation:
    """One conjunctive reading of the whole query; lower score wins."""

    terms: tuple[PathTerm, ...]
    score: int


@dataclass(frozen=True)
class ValueLeaf:
    value: str
    negated: bool = False


@dataclass(frozen=True)
class AttributeNode:
    column_id: int
    values: tuple[ValueLeaf, ...] = ()


@dataclass(frozen=True)
class RelationNode:
    table_id: int
    attributes: tuple[AttributeNode, ...] = ()


@dataclass(frozen=True)
class QueryTree:
    """Root → relations → attributes → values; lower levels optional."""

    relations: tuple[RelationNode, ...]


@dataclass(frozen=True)
class Binding:
    """One way a single keyword maps onto the schema."""

    kind: str  # relation | attribute | value
    table_id: int
    column_id: int | None = None
    value: str | None = None


def tokenize(query: str) -> list[Token]:
    """Split a query string into keyword and operator tokens.

    Quoted spans become single keywords (operators lose their meaning
    inside quotes); bare ``and``/``not`` become operators; an implicit
    AND is inserted between adjacent conjuncts.
    """
    raw: list[Token] = []
    i = 0
    n = len(query)
    while i < n:
        ch = query[i]
        if ch.isspace():
            i += 1
            continue
        if ch in ('"', "'"):
            end = query.find(ch, i + 1)
            if end < 0:
                raise QuerySyntaxError("unbalanced quote", position=i)
            text = query[i + 1 : end]
            if not text.strip():
                raise QuerySyntaxError("empty quoted keyword", position=i)
            raw.append(Token(text=text, quoted=True, kind="keyword", pos=i))
            i = end + 1
            continue
        j = i
        while j < n and not query[j].isspace() and query[j] not in ('"', "'"):
            j += 1
        word = query[i:j]
        folded = word.casefold()
        if folded == "and":
            raw.append(Token(text=word, kind="op_and", pos=i))
        elif folded == "not":
            raw.append(Token(text=word, kind="op_not", pos=i))
        else:
            raw.append(Token(text=word, kind="keyword", pos=i))
        i = j

    tokens: list[Token] = []
    for tok in raw:
        if tokens and tokens[-1].kind == "keyword" and tok.kind in ("keyword", "op_not"):
            tokens.append(Token(text="and", kind="op_and", pos=tok.pos))
        tokens.append(tok)
    return tokens


def _conjuncts(tokens: list[Token]) -> list[tuple[bool, Token]]:
    """Validate token order and pair each keyword with its negation flag."""
    if not tokens:
        raise QuerySyntaxError("empty query", position=0)
    out: list[tuple[bool, Token]] = []
    i = 0
    n = len(tokens)
    while True:
        negated = False
        if i < n and tokens[i].kind == "op_not":
            negated = True
            i += 1
        if i >= n or tokens[i].kind != "keyword":
            pos = tokens[min(i, n - 1)].pos
            raise QuerySyntaxError("expected a keyword", position=max(pos, 0))
        out.append((negated, tokens[i]))
        i += 1
        if i == n:
            return out
        if tokens[i].kind != "op_and":
            raise QuerySyntaxError("expected 'and' between keywords", position=tokens[i].pos)
        i += 1


def bind_keyword(
    token: Token,
    lexicon: Lexicon,
    catalog: SchemaCatalog,
    policy: str = "reject",
    gateway=None,
) -> list[Binding]:
    """All schema readings of one keyword.

    Order is deterministic: relation bindings, attribute bindings, then
    value bindings in index insertion order (vocabulary translations
    after the literal form), then fallback-scan discoveries.
    """
    word = token.text
    bindings: list[Binding] = []
    seen: set[tuple] = set()

    def add(b: Binding) -> None:
        key = (b.kind, b.table_id, b.column_id, b.value)
        if key not in seen:
            seen.add(key)
            bindings.append(b)

    table = catalog.find_table(word)
    if table is not None:
        add(Binding("relation", table.table_id))
    for entry in lexicon.translate(word, ("table-name",)):
        t = catalog.find_table(entry.internal)
        if t is not None:
            add(Binding("relation", t.table_id))

    folded = word.casefold()
    for t in catalog.tables:
        for col in catalog.columns_of(t.table_id):
            if col.name.casefold() == folded:
                add(Binding("attribute", t.table_id, col.column_id))
    for entry in lexicon.translate(word, ("column-name",)):
        # internals may pin one table ("Activity.Sport") or name the
        # column anywhere it occurs ("Sport")
        tname, dot, cname = entry.internal.partition(".")
        if dot:
            t = catalog.find_table(tname)
            if t is None or not cname:
                continue
            scan = [(t, cname.casefold())]
        else:
            scan = [(t, entry.internal.casefold()) for t in catalog.tables]
        for t, target in scan:
            for col in catalog.columns_of(t.table_id):
                if col.name.casefold() == target:
                    add(Binding("attribute", t.table_id, col.column_id))

    candidates = [normalize(word)]
    for entry in lexicon.translate(word, ("value-code",)):
        v = normalize(entry.internal)
        if v not in candidates:
            candidates.append(v)
    had_value = False
    for v in candidates:
        for tid, cid in lexicon.lookup_value(v):
            had_value = True
            add(Binding("value", tid, cid, v))

    if not had_value and policy == "scan" and gateway is not None:
        for v in candidates:
            for tid, cid in lexicon.fallback_scan(gateway, catalog, v):
                add(Binding("value", tid, cid, v))

    if not bindings:
        raise UnmappableKeywordError(word, policy)
    return bindings


def _score(terms: tuple[PathTerm, ...]) -> int:
    relations = {t.relation for t in terms}
    value_relations = {t.relation for t in terms if t.value is not None}
    unmerged = sum(1 for t in terms if t.value is None and t.relation not in value_relations)
    return len(relations) * 1000 + unmerged


def build_tree(terms: tuple[PathTerm, ...]) -> QueryTree:
    """Assemble the 4-level query tree for one interpretation."""
    relation_order: list[int] = []
    by_relation: dict[int, list[PathTerm]] = {}
    for term in terms:
        if term.relation not in by_relation:
            relation_order.append(term.relation)
            by_relation[term.relation] = []
        by_relation[term.relation].append(term)

    relations: list[RelationNode] = []
    for tid in relation_order:
        attr_order: list[int] = []
        leaves: dict[int, list[ValueLeaf]] = {}
        for term in by_relation[tid]:
            if term.attribute is None:
                continue
            if term.attribute not in leaves:
                attr_order.append(term.attribute)
                leaves[term.attribute] = []
            if term.value is not None:
                leaves[term.attribute].append(ValueLeaf(term.value, term.negated))
        attributes = tuple(AttributeNode(cid, tuple(leaves[cid])) for cid in attr_order)
        relations.append(RelationNode(tid, attributes))
    return QueryTree(tuple(relations))


def interpret(
    tokens: list[Token],
    lexicon: Lexicon,
    catalog: SchemaCatalog,
    cap: int = 8,
    policy: str = "reject",
    gateway=None,
) -> list[tuple[Interpretation, QueryTree]]:
    """Enumerate, score and order the query's interpretations.

    The product of per-keyword bindings is materialized, scored so that
    readings touching fewer relations (and leaving fewer metadata
    keywords unmerged) come first, deduplicated as term sets, and cut
    to ``cap`` entries.
    """
    conjuncts = _conjuncts(tokens)
    per_keyword = [
        bind_keyword(tok, lexicon, catalog, policy=policy, gateway=gateway)
        for _, tok in conjuncts
    ]

    results: list[tuple[Interpretation, QueryTree]] = []
    seen_term_sets: set[frozenset] = set()
    for combo in itertools.islice(itertools.product(*per_keyword), MAX_COMBINATIONS):
        terms: list[PathTerm] = []
        valid = True
        for (negated, _tok), binding in zip(conjuncts, combo):
            if binding.kind == "value":
                term = PathTerm(binding.table_id, binding.column_id, binding.value, negated)
            elif binding.kind == "attribute":
                if negated:
                    valid = False
                    break
                term = PathTerm(binding.table_id, binding.column_id)
            else:
                if negated:
                    valid = False
                    break
                term = PathTerm(binding.table_id)
            if term not in terms:
                terms.append(term)
        if not valid:
            continue
        key = frozenset(terms)
        if key in seen_term_sets:
            continue
        seen_term_sets.add(key)
        frozen = tuple(terms)
        results.append((Interpretation(frozen, _score(frozen)), build_tree(frozen)))

    if not results:
        raise NoInterpretationError(
            "no valid interpretation: negation applies only to value keywords"
        )
    results.sort(key=lambda pair: pair[0].score)
    return results[:cap]

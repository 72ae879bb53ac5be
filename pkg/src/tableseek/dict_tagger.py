"""Dictionary-lookup taggers for list and superlative intent queries.

Three variants of increasing strictness: plain dictionary lookup,
lookup plus entity-name removal, and lookup plus entity-name removal
plus a root-word check. All are pure functions over immutable lexicons.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

from .core import (
    EntityNameLexicon,
    Intent,
    Query,
    SuperlativeLexicon,
    TaggedQuery,
    TypeDictionary,
    is_plural_of,
    looks_plural,
)
from .errors import ContractError

# Closed preposition set used by the rule-based root check.
PREPOSITIONS = frozenset(
    {
        "in", "of", "for", "with", "at", "on", "to", "near",
        "by", "from", "under", "over", "about",
    }
)


class RejectionReason(str, Enum):
    NONE = "none"
    NO_DICT_HIT = "no_dict_hit"
    ENTITY_NAME = "entity_name"
    NOT_ROOT = "not_root"


@dataclass(frozen=True)
class RootCheckRule:
    """Rule-based stand-in for a dependency-parse root check.

    When ``parser_hook`` is set it overrides the rule: the hook receives
    the query tokens and must return the index of the root token. If the
    hook raises, the rule is applied instead and a RuntimeWarning is
    emitted as the fallback flag.
    """

    prepositions: frozenset[str] = PREPOSITIONS
    parser_hook: Callable[[Sequence[str]], int] | None = None

    def __post_init__(self):
        if not self.prepositions:
            raise ContractError("RootCheckRule needs a non-empty preposition set")


DEFAULT_ROOT_RULE = RootCheckRule()


def _match_at(toks, start, name, plural):
    """Match a dictionary name at position ``start``.

    In plural mode the last name token must appear in plural form and the
    rest exactly; in singular mode every token must match exactly.
    """
    stop = start + len(name)
    if stop > len(toks):
        return False
    for offset, name_tok in enumerate(name):
        tok = toks[start + offset]
        last = offset == len(name) - 1
        if plural and last:
            if not is_plural_of(tok, name_tok):
                return False
        elif tok != name_tok:
            return False
    return True


def _occurrences(toks, td: TypeDictionary, plural: bool):
    """All (start, stop, type_id, name) dictionary matches in the query."""
    found = []
    for type_id, names in td.items():
        for name in names:
            for start in range(len(toks) - len(name) + 1):
                if _match_at(toks, start, name, plural):
                    found.append((start, start + len(name), type_id, name))
    return found


def _best_span(occurrences):
    # Longest match wins; leftmost among equal lengths.
    return min(
        occurrences,
        key=lambda occ: (-(occ[1] - occ[0]), occ[0], occ[3]),
    )


def tdl_tag(
    q: Query, td: TypeDictionary, sl: SuperlativeLexicon
) -> TaggedQuery | None:
    """Plain type-dictionary lookup.

    A plural dictionary name anywhere yields a list-intent tagging; a
    singular name combined with a superlative first token yields a
    superlative tagging; anything else is null. Confidence is always 1.0.
    """
    if not q.toks:
        return None
    plural_hits = _occurrences(q.toks, td, plural=True)
    if plural_hits:
        start, stop, type_id, _ = _best_span(plural_hits)
        return TaggedQuery(q, Intent.LIST, (start, stop), type_id, 1.0)
    if q.toks[0] in sl:
        singular_hits = _occurrences(q.toks, td, plural=False)
        if singular_hits:
            start, stop, type_id, _ = _best_span(singular_hits)
            return TaggedQuery(q, Intent.SUPERLATIVE, (start, stop), type_id, 1.0)
    return None


def entity_name_check(tq: TaggedQuery, el: EntityNameLexicon) -> bool:
    """True iff no query substring containing the whole PST is an entity name.

    Entity names confined to the premodifier or postmodifier do not fail
    the check.
    """
    toks = tq.query.toks
    start, stop = tq.pst_span
    for i in range(start + 1):
        for j in range(stop, len(toks) + 1):
            if el.contains(toks[i:j]):
                return False
    return True


def root_check(tq: TaggedQuery, rule: RootCheckRule = DEFAULT_ROOT_RULE) -> bool:
    """True iff the PST plausibly is the root word of the query.

    With a parser hook: the root token must lie inside the PST span.
    Without one, a rule approximation: fail when a preposition immediately
    precedes the PST (the PST sits inside a prepositional phrase), or when
    the postmodifier contains a plural head-noun candidate before any
    preposition-introduced phrase begins.
    """
    toks = tq.query.toks
    start, stop = tq.pst_span
    if rule.parser_hook is not None:
        try:
            root = rule.parser_hook(list(toks))
            return start <= root < stop
        except Exception as exc:  # noqa: BLE001 - hook is external code
            warnings.warn(
                f"root-check parser hook failed ({exc!r}); "
                "falling back to the rule-based check",
                RuntimeWarning,
                stacklevel=2,
            )
    if start > 0 and toks[start - 1] in rule.prepositions:
        return False
    for tok in toks[stop:]:
        if tok in rule.prepositions:
            break
        if looks_plural(tok):
            return False
    return True


def tdl_er_tag(
    q: Query,
    td: TypeDictionary,
    sl: SuperlativeLexicon,
    el: EntityNameLexicon,
) -> TaggedQuery | None:
    """Dictionary lookup followed by entity-name removal."""
    tq = tdl_tag(q, td, sl)
    if tq is None or not entity_name_check(tq, el):
        return None
    return tq


def tdl_er_dp_tag(
    q: Query,
    td: TypeDictionary,
    sl: SuperlativeLexicon,
    el: EntityNameLexicon,
    rule: RootCheckRule = DEFAULT_ROOT_RULE,
) -> tuple[TaggedQuery | None, RejectionReason]:
    """Full baseline tagger; also reports why a query was rejected.

    The rejection reason feeds training-data generation: entity-name and
    root-check rejects become negative training examples.
    """
    tq = tdl_tag(q, td, sl)
    if tq is None:
        return None, RejectionReason.NO_DICT_HIT
    if not entity_name_check(tq, el):
        return None, RejectionReason.ENTITY_NAME
    if not root_check(tq, rule):
        return None, RejectionReason.NOT_ROOT
    return tq, RejectionReason.NONE

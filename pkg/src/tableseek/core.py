"""Shared domain types, tokenization, vocabularies and token containment.

Everything here is immutable after construction and free of side effects,
so all operations are safe for unrestricted concurrent use.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources
from typing import Iterable, Sequence

from .errors import AmbiguityError, ContractError, DataError, ParseError

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

# Plural -> singular overrides. Includes true irregulars, common "-ie"
# words the -ies rule would mangle, and s-final singulars that must not
# be stripped.
_IRREGULAR_SINGULARS = {
    "people": "person",
    "children": "child",
    "men": "man",
    "women": "woman",
    "feet": "foot",
    "movies": "movie",
    "cookies": "cookie",
    "calories": "calorie",
    "pies": "pie",
    "ties": "tie",
    "lies": "lie",
    "zombies": "zombie",
    # s-final singular forms (identity entries)
    "has": "has",
    "was": "was",
    "its": "its",
    "his": "his",
    "gas": "gas",
    "news": "news",
    "series": "series",
    "species": "species",
    "texas": "texas",
    "kansas": "kansas",
    "arkansas": "arkansas",
    "vegas": "vegas",
    "christmas": "christmas",
}

_ES_DROP_SUFFIXES = ("sses", "xes", "zes", "ches", "shes")


def tokenize(raw_text: str) -> list[str]:
    """Split text into lowercase word tokens, dropping punctuation.

    Splits on whitespace and punctuation boundaries; deterministic.
    Empty or whitespace-only input yields an empty list, which callers
    treat as non-taggable.
    """
    return _TOKEN_RE.findall(raw_text.lower())


def singularize(token: str) -> str:
    """Map an English plural token to its singular form.

    Rule cascade: irregulars table, -ies -> -y, -sses/-xes/-zes/-ches/
    -shes -> drop "es", -oes -> -o, then -s -> drop "s". Unknown patterns
    are returned unchanged, so the function is idempotent on its output.
    """
    if token in _IRREGULAR_SINGULARS:
        return _IRREGULAR_SINGULARS[token]
    if token.endswith("ies") and len(token) > 3:
        return token[:-3] + "y"
    if token.endswith(_ES_DROP_SUFFIXES):
        return token[:-2]
    if token.endswith("oes") and len(token) > 3:
        return token[:-2]
    if token.endswith("s") and len(token) >= 3:
        if token.endswith(("ss", "us", "is")):
            return token
        return token[:-1]
    return token


def is_plural_of(token: str, singular: str) -> bool:
    """True iff ``token`` is a plural form of ``singular`` (and not equal)."""
    return token != singular and singularize(token) == singular


def looks_plural(token: str) -> bool:
    """True iff the token changes under singularization."""
    return singularize(token) != token


def tokens_equivalent(a: str, b: str) -> bool:
    """Token equality up to singular/plural form."""
    return a == b or singularize(a) == singularize(b)


def cont(s: Sequence[str], t: Sequence[str]) -> bool:
    """Order-preserving token containment.

    True iff the tokens of ``t`` appear in ``s`` in order, possibly with
    gaps, comparing tokens up to singular/plural form. ``t`` must be
    non-empty; an empty ``s`` never contains anything.
    """
    if not t:
        raise ContractError("cont: containee token list must be non-empty")
    i = 0
    for tok in s:
        if tokens_equivalent(tok, t[i]):
            i += 1
            if i == len(t):
                return True
    return False


class Intent(str, Enum):
    LIST = "list"
    SUPERLATIVE = "superlative"


@dataclass(frozen=True)
class Query:
    """A raw query string plus its deterministic tokenization."""

    raw_text: str
    toks: tuple[str, ...]

    def __post_init__(self):
        if tuple(tokenize(self.raw_text)) != self.toks:
            raise ContractError(
                "Query.toks must be the tokenization of raw_text"
            )

    @classmethod
    def from_text(cls, raw_text: str) -> "Query":
        return cls(raw_text, tuple(tokenize(raw_text)))


@dataclass(frozen=True)
class TaggedQuery:
    """A query with its detected sought-entity-type span.

    ``pst_span`` is a half-open ``[start, stop)`` token index range.
    The premodifier is everything before the span, the postmodifier
    everything after it, so premod + pst tokens + postmod always
    reconstructs the query tokens.
    """

    query: Query
    intent: Intent
    pst_span: tuple[int, int]
    set_type: str
    confidence: float

    def __post_init__(self):
        start, stop = self.pst_span
        n = len(self.query.toks)
        if not (0 <= start < stop <= n):
            raise ContractError(
                f"pst_span {self.pst_span} out of bounds for {n} tokens"
            )
        if not (0.0 <= self.confidence <= 1.0):
            raise ContractError(
                f"confidence {self.confidence} outside [0, 1]"
            )
        if not self.set_type:
            raise ContractError("set_type must be non-empty")

    @property
    def pst_tokens(self) -> tuple[str, ...]:
        start, stop = self.pst_span
        return self.query.toks[start:stop]

    @property
    def pst(self) -> str:
        return " ".join(self.pst_tokens)

    @property
    def premod(self) -> tuple[str, ...]:
        return self.query.toks[: self.pst_span[0]]

    @property
    def postmod(self) -> tuple[str, ...]:
        return self.query.toks[self.pst_span[1]:]

    def to_dict(self) -> dict:
        return {
            "query": self.query.raw_text,
            "intent": self.intent.value,
            "pst": self.pst,
            "pst_span": list(self.pst_span),
            "set_type": self.set_type,
            "confidence": self.confidence,
            "premod": " ".join(self.premod),
            "postmod": " ".join(self.postmod),
        }


class TypeDictionary:
    """Closed vocabulary of entity types and their name strings.

    Every name string maps to exactly one type identifier; ambiguous
    strings are rejected at load time. Name strings are stored as
    normalized token tuples.
    """

    def __init__(self, entries: dict[str, Iterable[str]]):
        self._entries: dict[str, frozenset[tuple[str, ...]]] = {}
        self._name_to_type: dict[tuple[str, ...], str] = {}
        for type_id, names in entries.items():
            if not type_id:
                raise DataError("empty type identifier")
            name_tuples = set()
            for name in names:
                toks = tuple(tokenize(name))
                if not toks:
                    raise DataError(
                        f"type {type_id!r} has an empty name string"
                    )
                owner = self._name_to_type.get(toks)
                if owner is not None and owner != type_id:
                    raise AmbiguityError(
                        f"name {' '.join(toks)!r} maps to both "
                        f"{owner!r} and {type_id!r}"
                    )
                self._name_to_type[toks] = type_id
                name_tuples.add(toks)
            if not name_tuples:
                raise DataError(f"type {type_id!r} has no name strings")
            self._entries[type_id] = frozenset(name_tuples)

    def __contains__(self, type_id: str) -> bool:
        return type_id in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def type_ids(self) -> tuple[str, ...]:
        return tuple(self._entries)

    def names_of(self, type_id: str) -> frozenset[tuple[str, ...]]:
        return self._entries[type_id]

    def type_of(self, name_tokens: Sequence[str]) -> str | None:
        return self._name_to_type.get(tuple(name_tokens))

    def items(self):
        return self._entries.items()


class SuperlativeLexicon:
    """Closed set of superlative keywords ('largest', 'smallest', ...)."""

    REQUIRED = frozenset({"largest", "smallest", "highest"})

    def __init__(self, keywords: Iterable[str]):
        self._keywords = frozenset(keywords)
        if not self._keywords:
            raise DataError("superlative lexicon is empty")
        missing = self.REQUIRED - self._keywords
        if missing:
            raise DataError(
                "superlative lexicon missing required keywords: "
                + ", ".join(sorted(missing))
            )

    def __contains__(self, token: str) -> bool:
        return token in self._keywords

    def __len__(self) -> int:
        return len(self._keywords)

    @property
    def keywords(self) -> frozenset[str]:
        return self._keywords


class EntityNameLexicon:
    """Entity names with exact lookup on normalized token sequences."""

    def __init__(self, names: Iterable[str]):
        self._names = frozenset(
            tuple(tokenize(name)) for name in names if tokenize(name)
        )

    def contains(self, tokens: Sequence[str]) -> bool:
        return tuple(tokens) in self._names

    def __len__(self) -> int:
        return len(self._names)


def _data_lines(path) -> Iterable[tuple[int, str]]:
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            yield lineno, line


def load_type_dictionary(path) -> TypeDictionary:
    """Parse a ``type_id<TAB>name1|name2|...`` file into a TypeDictionary."""
    entries: dict[str, list[str]] = {}
    seen: dict[tuple[str, ...], tuple[str, int]] = {}
    for lineno, line in _data_lines(path):
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(
                "expected 'type_id<TAB>name1|name2|...'", path=path, line=lineno
            )
        type_id, name_field = parts[0].strip(), parts[1]
        if not type_id:
            raise ParseError("empty type identifier", path=path, line=lineno)
        names = [n.strip() for n in name_field.split("|")]
        if any(not n for n in names):
            raise ParseError("empty name string", path=path, line=lineno)
        for name in names:
            toks = tuple(tokenize(name))
            if not toks:
                raise ParseError(
                    f"name {name!r} has no tokens", path=path, line=lineno
                )
            prev = seen.get(toks)
            if prev is not None and prev[0] != type_id:
                raise AmbiguityError(
                    f"name {name!r} maps to both {prev[0]!r} (line {prev[1]}) "
                    f"and {type_id!r} (line {lineno})"
                )
            seen[toks] = (type_id, lineno)
        entries.setdefault(type_id, []).extend(names)
    return TypeDictionary(entries)


def load_superlative_lexicon(path) -> SuperlativeLexicon:
    keywords = []
    for lineno, line in _data_lines(path):
        toks = tokenize(line)
        if len(toks) != 1:
            raise ParseError(
                f"superlative keyword must be a single token, got {line!r}",
                path=path,
                line=lineno,
            )
        keywords.append(toks[0])
    return SuperlativeLexicon(keywords)


def load_entity_name_lexicon(path) -> EntityNameLexicon:
    return EntityNameLexicon(line for _, line in _data_lines(path))


def _bundled(name: str):
    return resources.files("tableseek").joinpath("data").joinpath(name)


@lru_cache(maxsize=None)
def default_type_dictionary() -> TypeDictionary:
    """The bundled 68-type dictionary."""
    return load_type_dictionary(_bundled("type_dictionary.txt"))


@lru_cache(maxsize=None)
def default_superlative_lexicon() -> SuperlativeLexicon:
    return load_superlative_lexicon(_bundled("superlatives.txt"))


@lru_cache(maxsize=None)
def default_entity_name_lexicon() -> EntityNameLexicon:
    return load_entity_name_lexicon(_bundled("entity_names.txt"))

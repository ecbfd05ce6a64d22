"""Synonym lookup and definition blending over a pluggable lexical resource.

Two resource implementations: a WordNet adapter (optional nltk dependency)
and an in-memory/static file resource so the test suite never needs a
WordNet installation. The static file format is one entry per line:

    word<TAB>synonym1|synonym2<TAB>gloss1|gloss2
"""

from __future__ import annotations

import abc
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .embedding import Embedding, l2_normalize
from .errors import ConfigError
from .ranking import cosine
from .validation import check_embedding, check_in_closed_range, check_nonempty, check_same_dim

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LexicalEntry:
    """Ordered synonyms and glosses for one word."""

    word: str
    synonyms: tuple[str, ...]
    definitions: tuple[str, ...]

    def __post_init__(self):
        lowered = self.word.lower()
        if any(s.lower() == lowered for s in self.synonyms):
            raise ValueError(f"synonyms of {self.word!r} must exclude the word itself")

    @property
    def empty(self) -> bool:
        return not self.synonyms and not self.definitions


def _sanitize_synonyms(word: str, raw: Sequence[str]) -> tuple[str, ...]:
    """Drop self-matches and duplicates, preserving first-seen order."""
    seen: set[str] = {word.lower()}
    kept = []
    for s in raw:
        key = s.lower()
        if key not in seen:
            seen.add(key)
            kept.append(s)
    return tuple(kept)


class LexicalResource(abc.ABC):
    """Read-only provider of LexicalEntry objects; safe for concurrent use."""

    @abc.abstractmethod
    def entry(self, word: str) -> LexicalEntry:
        """Entry for ``word``; unknown words yield an empty entry."""


class StaticLexicon(LexicalResource):
    """In-memory resource, optionally parsed from the tab-separated format."""

    def __init__(self, entries: dict[str, tuple[Sequence[str], Sequence[str]]]):
        self._entries: dict[str, LexicalEntry] = {}
        for word, (synonyms, definitions) in entries.items():
            self._entries[word.lower()] = LexicalEntry(
                word=word,
                synonyms=_sanitize_synonyms(word, synonyms),
                definitions=tuple(definitions),
            )

    @classmethod
    def from_file(cls, path: str | Path) -> "StaticLexicon":
        entries: dict[str, tuple[list[str], list[str]]] = {}
        for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ConfigError(f"{path} line {line_no}: expected 3 tab-separated fields")
            word, synonyms, glosses = fields
            entries[word.strip()] = (
                [s for s in (p.strip() for p in synonyms.split("|")) if s],
                [g for g in (p.strip() for p in glosses.split("|")) if g],
            )
        return cls(entries)

    def entry(self, word: str) -> LexicalEntry:
        found = self._entries.get(word.lower())
        if found is None:
            return LexicalEntry(word=word, synonyms=(), definitions=())
        return found


class WordNetLexicon(LexicalResource):
    """WordNet adapter: lemma surfaces and glosses in synset order.

    Multi-word queries substitute underscores for spaces; lemma names map
    back the other way. No part-of-speech filtering is applied.
    """

    def __init__(self):
        try:
            from nltk.corpus import wordnet

            wordnet.ensure_loaded()
        except Exception as exc:  # pragma: no cover - optional dependency
            raise ConfigError(
                "the wordnet lexicon needs nltk with the wordnet corpus installed"
            ) from exc
        self._wordnet = wordnet

    def entry(self, word: str) -> LexicalEntry:
        query = word.strip().replace(" ", "_")
        synsets = self._wordnet.synsets(query)
        synonyms = [
            lemma.name().replace("_", " ")
            for synset in synsets
            for lemma in synset.lemmas()
        ]
        definitions = []
        for synset in synsets:
            gloss = synset.definition()
            if gloss not in definitions:
                definitions.append(gloss)
        return LexicalEntry(
            word=word,
            synonyms=_sanitize_synonyms(word, synonyms),
            definitions=tuple(definitions),
        )


def _entry_with_fallback(resource: LexicalResource, word: str) -> LexicalEntry:
    # multi-word targets fall back to the head noun (last token) on miss
    entry = resource.entry(word)
    if entry.empty and " " in word.strip():
        head = word.strip().split()[-1]
        entry = resource.entry(head)
    return entry


def lookup_synonym(resource: LexicalResource, word: str) -> str | None:
    """First lemma, in resource order, whose surface form differs from
    ``word``. Absence is a legitimate result, not an error."""
    if not word or not word.strip():
        raise ValueError("word must be nonempty")
    synonyms = _entry_with_fallback(resource, word).synonyms
    return synonyms[0] if synonyms else None


def top_synonyms(resource: LexicalResource, word: str, count: int) -> list[str]:
    """The first ``count`` distinct differing lemmas in resource order."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    return list(_entry_with_fallback(resource, word).synonyms[:count])


def candidate_definitions(
    resource: LexicalResource,
    word: str,
    include_synonyms: bool = False,
    synonym_count: int = 2,
) -> list[str]:
    """Glosses of the word's senses, optionally extended with glosses of its
    top synonyms; deduplicated preserving first occurrence.

    An empty result means "no definitions": the caller keeps the contextual
    embedding alone.
    """
    if not word or not word.strip():
        raise ValueError("word must be nonempty")
    entry = _entry_with_fallback(resource, word)
    definitions = list(entry.definitions)
    if include_synonyms:
        for synonym in top_synonyms(resource, word, synonym_count):
            definitions.extend(resource.entry(synonym).definitions)
    deduped: list[str] = []
    seen: set[str] = set()
    for definition in definitions:
        if definition not in seen:
            seen.add(definition)
            deduped.append(definition)
    return deduped


def select_definition(
    h_t: Embedding, definitions: Sequence[str], backend
) -> tuple[int, Embedding]:
    """Pick the definition whose embedding is most cosine-similar to ``h_t``.

    Ties break toward the lowest index. Returns (index, definition embedding).
    """
    check_nonempty(definitions, "definitions")
    check_embedding(h_t, "contextual embedding", unit=True)
    embeddings = backend.encode_text_batch(list(definitions))
    similarities = np.array([cosine(h_t, e) for e in embeddings])
    best = int(np.argmax(similarities))  # argmax returns the first maximum
    return best, embeddings[best]


def blend_definition(h_dstar: Embedding, h_t: Embedding, alpha: float) -> Embedding:
    """Weighted average alpha·h_dstar + (1−alpha)·h_t, L2-normalized.

    The boundaries return the inputs unchanged: alpha=0 is the contextual
    embedding, alpha=1 the definition embedding.
    """
    check_embedding(h_dstar, "definition embedding", unit=True)
    check_embedding(h_t, "contextual embedding", unit=True)
    check_same_dim(h_dstar, h_t)
    check_in_closed_range(alpha, 0.0, 1.0, "alpha")
    if alpha == 0.0:
        return h_t
    if alpha == 1.0:
        return h_dstar
    blended = alpha * h_dstar.values + (1.0 - alpha) * h_t.values
    return Embedding(l2_normalize(blended), normalized=True)

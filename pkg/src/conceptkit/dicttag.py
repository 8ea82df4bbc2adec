"""Knowledge-based concept recognition over ontology terms.

Terms and synonyms are indexed under a normalised token form; running
text is scanned greedily for the longest, leftmost index match, and all
candidate CURIEs of a match are attached to every covered token as
dictionary features.
"""

from __future__ import annotations

import logging
import re
import unicodedata
from dataclasses import dataclass, field

from .model import ConllRow, TextSpan
from .ontology import OntologyGraph

logger = logging.getLogger(__name__)

_NON_ALNUM_RE = re.compile(r"[\W_]+")

# Closed-class surface forms suppressed as single-token matches. The
# list is a configuration knob, not linguistics: highly ambiguous short
# words drown the downstream harmonisation in false candidates.
DEFAULT_STOPWORDS = frozenset("""
    a an the and or but nor not no of in on at to for with by from as
    into onto upon over under about between per via is are was were be
    been being has have had do does did it its this that these those
    which who whom whose we i you he she they them his her their our
    than then so if all any both each very s t
""".split())


def _spell_greek(ch: str) -> str | None:
    try:
        name = unicodedata.name(ch)
    except ValueError:
        return None
    if not name.startswith("GREEK ") or " LETTER " not in name:
        return None
    word = name.split(" LETTER ", 1)[1]
    word = word.removeprefix("FINAL ").split(" WITH ")[0]
    return word.lower() if word.isalpha() else None


def normalize_term(term: str) -> list[str]:
    """Normalise a surface string to its matching token form.

    Compatibility-normalise, lower-case, spell out Greek letters,
    replace punctuation with spaces, tokenise, and strip a trailing
    plural "s" from tokens of length >= 4.
    """
    s = unicodedata.normalize("NFKC", term).lower()
    if any(ord(c) > 0x036F for c in s):
        s = "".join(_spell_greek(c) or c for c in s)
    tokens = _NON_ALNUM_RE.sub(" ", s).split()
    return [t[:-1] if len(t) >= 4 and t.endswith("s") else t for t in tokens]


@dataclass(frozen=True)
class TermIndex:
    """Normalised term sequences mapped to their candidate CURIEs."""

    entries: dict[tuple[str, ...], tuple[str, ...]]
    max_len: int = field(init=False, default=0)

    def __post_init__(self):
        if self.entries:
            object.__setattr__(self, "max_len", max(map(len, self.entries)))

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, key: tuple[str, ...]) -> bool:
        return key in self.entries


def build_index(graph: OntologyGraph,
                extra_synonyms: list[tuple[str, str]] = ()) -> TermIndex:
    """Index names and synonyms of all non-obsolete concepts.

    `extra_synonyms` supplies additional (term, CURIE) pairs. Terms that
    normalise to nothing are skipped with a warning.
    """
    collected: dict[tuple[str, ...], set[str]] = {}

    def add(term: str, curie: str):
        key = tuple(normalize_term(term))
        if not key:
            logger.warning("skipping term %r (%s): normalises to nothing",
                           term, curie)
            return
        collected.setdefault(key, set()).add(curie)

    for curie in sorted(graph):
        concept = graph[curie]
        if concept.obsolete:
            continue
        if concept.name:
            add(concept.name, curie)
        for synonym in concept.synonyms:
            add(synonym, curie)
    for term, curie in extra_synonyms:
        add(term, curie)
    return TermIndex({key: tuple(sorted(ids)) for key, ids in collected.items()})


def tag(tokens: list[tuple[str, TextSpan]], index: TermIndex,
        stopwords: frozenset[str] = DEFAULT_STOPWORDS) -> list[tuple[str, ...]]:
    """Dictionary features per token (greedy longest-leftmost matching).

    Matches never overlap. A match must start and end on tokens that
    contribute at least one normalised token; single-token matches whose
    surface form is a stopword are suppressed.
    """
    norm = [tuple(normalize_term(tok)) for tok, _ in tokens]
    features: list[tuple[str, ...]] = [() for _ in tokens]
    if not index.entries:
        return features
    i = 0
    while i < len(tokens):
        if not norm[i]:
            i += 1
            continue
        match_end = None
        match_ids = None
        key = []
        last_contributing = None
        for j in range(i, len(tokens)):
            key.extend(norm[j])
            if len(key) > index.max_len:
                break
            if not norm[j]:
                continue
            last_contributing = j
            ids = index.entries.get(tuple(key))
            if ids is not None:
                if i == j and tokens[i][0].lower() in stopwords:
                    continue
                match_end = last_contributing
                match_ids = ids
        if match_end is None:
            i += 1
            continue
        for k in range(i, match_end + 1):
            features[k] = match_ids
        i = match_end + 1
    return features


def tag_rows(sentences: list[list[ConllRow]], index: TermIndex,
             stopwords: frozenset[str] = DEFAULT_STOPWORDS) -> list[list[ConllRow]]:
    """Fill the dictionary-feature column of existing CoNLL sentences."""
    tagged = []
    for rows in sentences:
        features = tag([(r.token, r.span) for r in rows], index, stopwords)
        tagged.append([
            ConllRow(r.token, r.span, r.span_tag, r.id_tag, feats)
            for r, feats in zip(rows, features)
        ])
    return tagged


def read_synonyms(text: str) -> list[tuple[str, str]]:
    """Parse an extra-synonyms file: one 'term<TAB>CURIE' pair per line."""
    pairs = []
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        term, sep, curie = line.partition("\t")
        if not sep or not term.strip() or not curie.strip():
            raise ValueError(f"bad synonym line {line!r}")
        pairs.append((term.strip(), curie.strip()))
    return pairs

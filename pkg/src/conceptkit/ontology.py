"""Ontology access: OBO parsing, is-a traversal, semantic similarity.

Only is_a edges contribute to the hierarchy. Similarity between two
concepts follows the shared-ancestor measure of Wang et al.: each
concept assigns its ancestors an S-value that decays multiplicatively
per edge (taking the best path), and similarity is the S-value mass of
the shared ancestors over the total mass of both concepts.
"""

from __future__ import annotations

import logging
import re
from collections import deque
from dataclasses import dataclass

from .errors import ParseError

logger = logging.getLogger(__name__)

#: Default per-edge decay for is_a links in the similarity computation.
DEFAULT_DECAY = 0.8

_SYNONYM_RE = re.compile(r'"((?:[^"\\]|\\.)*)"')


@dataclass(frozen=True)
class Concept:
    name: str
    synonyms: tuple[str, ...] = ()
    parents: tuple[str, ...] = ()
    obsolete: bool = False


class OntologyGraph:
    """Immutable concept map with an acyclic is_a hierarchy."""

    def __init__(self, concepts: dict[str, Concept]):
        for curie, concept in concepts.items():
            for parent in concept.parents:
                if parent not in concepts:
                    raise ValueError(f"{curie}: unknown parent {parent}")
        self._concepts = dict(concepts)
        self._check_acyclic()
        self._ancestor_cache: dict[str, frozenset[str]] = {}
        self._depth_cache: dict[str, dict[str, int]] = {}

    def _check_acyclic(self):
        indegree = {c: 0 for c in self._concepts}
        for concept in self._concepts.values():
            for parent in concept.parents:
                indegree[parent] += 1
        queue = deque(c for c, d in indegree.items() if d == 0)
        seen = 0
        while queue:
            cur = queue.popleft()
            seen += 1
            for parent in self._concepts[cur].parents:
                indegree[parent] -= 1
                if indegree[parent] == 0:
                    queue.append(parent)
        if seen != len(self._concepts):
            cyclic = sorted(c for c, d in indegree.items() if d > 0)
            raise ParseError(f"is_a cycle involving {', '.join(cyclic[:5])}")

    def __contains__(self, curie: str) -> bool:
        return curie in self._concepts

    def __getitem__(self, curie: str) -> Concept:
        return self._concepts[curie]

    def __iter__(self):
        return iter(self._concepts)

    def __len__(self) -> int:
        return len(self._concepts)

    def _upward_depths(self, curie: str) -> dict[str, int]:
        """Shortest is_a distance from `curie` to each of its ancestors."""
        cached = self._depth_cache.get(curie)
        if cached is not None:
            return cached
        depths = {curie: 0}
        queue = deque([curie])
        while queue:
            cur = queue.popleft()
            for parent in self._concepts[cur].parents:
                if parent not in depths:
                    depths[parent] = depths[cur] + 1
                    queue.append(parent)
        self._depth_cache[curie] = depths
        return depths

    def ancestors(self, curie: str) -> frozenset[str]:
        """Reflexive-transitive closure over is_a edges.

        Raises KeyError for unknown CURIEs.
        """
        cached = self._ancestor_cache.get(curie)
        if cached is None:
            if curie not in self._concepts:
                raise KeyError(curie)
            cached = frozenset(self._upward_depths(curie))
            self._ancestor_cache[curie] = cached
        return cached


def parse_obo(text: str, source: str = "") -> OntologyGraph:
    """Parse OBO flat-format [Term] stanzas into an ontology graph.

    Recognised keys: id, name, synonym, is_a, is_obsolete; everything
    else is ignored. Obsolete terms are loaded but flagged. Dangling
    is_a targets are dropped with a warning; cycles are an error.
    """
    concepts: dict[str, Concept] = {}
    stanza: dict | None = None

    def flush():
        if stanza is None or "id" not in stanza:
            return
        curie = stanza["id"]
        concepts[curie] = Concept(
            name=stanza.get("name", ""),
            synonyms=tuple(stanza.get("synonyms", ())),
            parents=tuple(dict.fromkeys(stanza.get("parents", ()))),
            obsolete=stanza.get("obsolete", False),
        )

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("["):
            flush()
            stanza = {"synonyms": [], "parents": []} if line == "[Term]" else None
            continue
        if stanza is None or not line or line.startswith("!"):
            continue
        key, _, raw_value = line.partition(":")
        value = raw_value.split("!", 1)[0].strip()
        if key == "id":
            stanza["id"] = value
        elif key == "name":
            stanza["name"] = value
        elif key == "synonym":
            # match before comment-stripping: quoted text may contain "!"
            match = _SYNONYM_RE.search(raw_value)
            if not match:
                raise ParseError(f"unparseable synonym {raw_value.strip()!r}",
                                 line=lineno, source=source)
            stanza["synonyms"].append(match.group(1).replace('\\"', '"'))
        elif key == "is_a":
            target = value.split()[0] if value else ""
            if not target:
                raise ParseError("empty is_a target", line=lineno, source=source)
            stanza["parents"].append(target)
        elif key == "is_obsolete":
            stanza["obsolete"] = value.lower() == "true"
    flush()

    for curie, concept in list(concepts.items()):
        valid = tuple(p for p in concept.parents if p in concepts)
        if valid != concept.parents:
            dropped = [p for p in concept.parents if p not in concepts]
            logger.warning("%s: dropping dangling is_a %s -> %s",
                           source or "obo", curie, ", ".join(dropped))
            concepts[curie] = Concept(concept.name, concept.synonyms,
                                      valid, concept.obsolete)
    return OntologyGraph(concepts)


def ancestors(graph: OntologyGraph, curie: str) -> frozenset[str]:
    """Ancestors of `curie` in `graph`, including `curie` itself."""
    return graph.ancestors(curie)


def wang_similarity(graph: OntologyGraph, a: str, b: str,
                    decay: float = DEFAULT_DECAY) -> float:
    """Shared-ancestor similarity in [0, 1] between two concepts.

    The S-value of an ancestor t for concept c is decay**d where d is
    the shortest is_a distance from c up to t (the best-path form of the
    recursive definition S_c(c)=1, S_c(t)=max over paths of
    decay*S_c(child)). Identical concepts score exactly 1.0.
    """
    if not 0.0 < decay < 1.0:
        raise ValueError(f"decay must be in (0, 1), got {decay}")
    if a not in graph:
        raise KeyError(a)
    if b not in graph:
        raise KeyError(b)
    if a == b:
        return 1.0
    s_a = {t: decay ** d for t, d in graph._upward_depths(a).items()}
    s_b = {t: decay ** d for t, d in graph._upward_depths(b).items()}
    shared = sorted(set(s_a) & set(s_b))
    if not shared:
        return 0.0
    numerator = sum(s_a[t] + s_b[t] for t in shared)
    denominator = sum(s_a.values()) + sum(s_b.values())
    return numerator / denominator

"""Reduce complex annotations to one-label-per-token form.

Token-level labels cannot express discontinuous spans, overlapping
mentions, or sub-word boundaries, so annotations are simplified in three
steps: unify each discontinuous mention to a single span, extend
sub-word spans to whole tokens, then delete one of each overlapping
pair (unnesting). Each step is parameterised by a strategy.
"""

from __future__ import annotations

import logging
from enum import Enum

from .formats import tokenize
from .model import Annotation, Document, TextSpan, spans_overlap

logger = logging.getLogger(__name__)


class UnifyStrategy(str, Enum):
    """How to collapse a discontinuous annotation to one span."""

    FIRST_SPAN = "first-span"
    FULL_SPAN = "full-span"
    LAST_SPAN = "last-span"


class UnnestStrategy(str, Enum):
    """Which of two overlapping annotations survives."""

    KEEP_LONGER = "keep-longer"
    KEEP_SHORTER = "keep-shorter"


def unify(ann: Annotation, strategy: UnifyStrategy) -> Annotation:
    """Collapse a discontinuous annotation to a single span.

    Contiguous annotations are returned unchanged.
    """
    if not ann.discontinuous:
        return ann
    strategy = UnifyStrategy(strategy)
    if strategy is UnifyStrategy.FIRST_SPAN:
        span = ann.spans[0]
    elif strategy is UnifyStrategy.LAST_SPAN:
        span = ann.spans[-1]
    else:
        span = TextSpan(ann.spans[0].start, ann.spans[-1].end)
    return Annotation(ann.concept_id, (span,), ann.text)


def extend_subword(doc: Document, tokens: list[tuple[str, TextSpan]]) -> Document:
    """Snap annotation boundaries outward to enclosing token boundaries.

    Annotations overlapping no token at all are dropped with a warning.
    Fragments that grow together are merged.
    """
    result = []
    for ann in doc.annotations:
        fragments: list[TextSpan] = []
        for span in ann.spans:
            covering = [t for _, t in tokens if t.overlaps(span)]
            if not covering:
                continue
            snapped = TextSpan(covering[0].start, covering[-1].end)
            if fragments and snapped.start <= fragments[-1].end:
                fragments[-1] = TextSpan(
                    fragments[-1].start, max(fragments[-1].end, snapped.end))
            else:
                fragments.append(snapped)
        if not fragments:
            logger.warning("%s: dropping annotation %s at %s: overlaps no token",
                           doc.doc_id, ann.concept_id, ann.spans)
            continue
        result.append(Annotation(ann.concept_id, tuple(fragments), ann.text))
    return Document(doc.doc_id, doc.text, tuple(result))


def _beats(a: Annotation, b: Annotation, strategy: UnnestStrategy) -> bool:
    """True if `a` survives the pairwise contest against `b`.

    Length ties go to the smaller start offset, then the smaller
    concept ID, so unnesting is deterministic.
    """
    if a.length != b.length:
        longer = a.length > b.length
        return longer if strategy is UnnestStrategy.KEEP_LONGER else not longer
    return (a.start, a.concept_id) < (b.start, b.concept_id)


def unnest(doc: Document, strategy: UnnestStrategy) -> Document:
    """Delete one of each overlapping annotation pair.

    Annotations are swept left to right ordered by (start, -length,
    concept). Each incoming annotation is matched against current
    survivors; it is dropped as soon as it loses one contest, otherwise
    it evicts the survivors it beats. A deleted annotation takes no
    further part in the sweep.
    """
    strategy = UnnestStrategy(strategy)
    order = sorted(range(len(doc.annotations)),
                   key=lambda i: (doc.annotations[i].start,
                                  -doc.annotations[i].length,
                                  doc.annotations[i].concept_id))
    kept: list[int] = []
    for i in order:
        ann = doc.annotations[i]
        rivals = [j for j in kept if spans_overlap(doc.annotations[j], ann)]
        if all(_beats(ann, doc.annotations[j], strategy) for j in rivals):
            kept = [j for j in kept if j not in rivals] + [i]
    survivors = set(kept)
    remaining = tuple(a for i, a in enumerate(doc.annotations) if i in survivors)
    return Document(doc.doc_id, doc.text, remaining)


def simplify(doc: Document, unify_strategy: UnifyStrategy,
             unnest_strategy: UnnestStrategy,
             tokens: list[tuple[str, TextSpan]] | None = None) -> Document:
    """Unify, extend to token boundaries, then unnest.

    The result has only single-span, token-aligned, pairwise disjoint
    annotations and is therefore representable as one label per token.
    Sub-word extension runs before unnesting because snapping can create
    new overlaps.
    """
    if tokens is None:
        tokens = tokenize(doc.text)
    unified = Document(
        doc.doc_id, doc.text,
        tuple(unify(a, unify_strategy) for a in doc.annotations))
    extended = extend_subword(unified, tokens)
    return unnest(extended, unnest_strategy)

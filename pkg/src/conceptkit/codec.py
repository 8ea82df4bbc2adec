"""Token-label codec: annotations to IOBES rows and tolerantly back.

Decoding accepts any tag sequence, including inconsistent classifier
output: S is always a single-token entity, B opens an entity, an entity
closes at E, before O/S/B, or at the end of the sentence, and an orphan
I or E opens an entity like a B would.
"""

from __future__ import annotations

from collections import Counter

from .evaluate import EvalCounts, score_document
from .formats import tokenize, tokenize_sentences
from .model import NIL, Annotation, ConllRow, Document, SpanTag, TextSpan
from .ontology import DEFAULT_DECAY, OntologyGraph
from .simplify import UnifyStrategy, UnnestStrategy, simplify


def iter_blocks(tags: list[SpanTag]):
    """Yield (first, last) index pairs of entity blocks, tolerantly."""
    open_start = None
    for i, tag in enumerate(tags):
        if tag is SpanTag.O:
            if open_start is not None:
                yield open_start, i - 1
                open_start = None
        elif tag is SpanTag.S:
            if open_start is not None:
                yield open_start, i - 1
            yield i, i
            open_start = None
        elif tag is SpanTag.B:
            if open_start is not None:
                yield open_start, i - 1
            open_start = i
        else:  # I or E; orphans open an entity
            if open_start is None:
                open_start = i
            if tag is SpanTag.E:
                yield open_start, i
                open_start = None
    if open_start is not None:
        yield open_start, len(tags) - 1


def _block_tags(n: int) -> list[SpanTag]:
    if n == 1:
        return [SpanTag.S]
    return [SpanTag.B] + [SpanTag.I] * (n - 2) + [SpanTag.E]


def encode(doc: Document, tokens: list[tuple[str, TextSpan]]) -> list[ConllRow]:
    """Encode a simplified document as one IOBES/ID label per token.

    Raises ValueError if any annotation is discontinuous, not aligned to
    token boundaries, or overlaps another one.
    """
    starts = {span.start: i for i, (_, span) in enumerate(tokens)}
    ends = {span.end: i for i, (_, span) in enumerate(tokens)}
    tags = [SpanTag.O] * len(tokens)
    ids = [NIL] * len(tokens)
    for ann in doc.annotations:
        if ann.discontinuous:
            raise ValueError(f"not simplified: discontinuous annotation {ann}")
        first, last = starts.get(ann.start), ends.get(ann.end)
        if first is None or last is None or first > last:
            raise ValueError(f"not simplified: {ann} not token-aligned")
        for i, tag in zip(range(first, last + 1), _block_tags(last - first + 1)):
            if tags[i] is not SpanTag.O:
                raise ValueError(f"not simplified: overlap at token {i} ({ann})")
            tags[i] = tag
            ids[i] = ann.concept_id
    return [
        ConllRow(token, span, tags[i], ids[i])
        for i, (token, span) in enumerate(tokens)
    ]


def majority_id(candidates: list[str]) -> str | None:
    """Most frequent candidate; ties go to the lexicographically lowest."""
    if not candidates:
        return None
    counts = Counter(candidates)
    return min(counts, key=lambda c: (-counts[c], c))


def decode_iobes(rows: list[ConllRow], id_source: str = "id_tag",
                 concept: str | None = None) -> list[Annotation]:
    """Decode one sentence of rows into annotations.

    id_source selects where each entity's concept comes from:
    "id_tag" takes the majority ID over the block's non-NIL ID tags,
    "dict" the majority dictionary feature, and "given" uses `concept`
    for every block. Blocks with no usable concept are skipped. Ties go
    to the lexicographically lowest ID.
    """
    if id_source not in ("id_tag", "dict", "given"):
        raise ValueError(f"unknown id_source {id_source!r}")
    if id_source == "given" and not concept:
        raise ValueError("id_source='given' requires a concept")
    annotations = []
    tags = [row.span_tag for row in rows]
    for first, last in iter_blocks(tags):
        block = rows[first:last + 1]
        if id_source == "id_tag":
            chosen = majority_id([r.id_tag for r in block if r.id_tag != NIL])
        elif id_source == "dict":
            chosen = majority_id([f for r in block for f in r.dict_features])
        else:
            chosen = concept
        if chosen is None:
            continue
        span = TextSpan(block[0].span.start, block[-1].span.end)
        text = " ".join(r.token for r in block)
        annotations.append(Annotation(chosen, (span,), text))
    return annotations


def derive_spans_from_id_runs(rows: list[ConllRow]) -> list[ConllRow]:
    """Rewrite span tags from maximal runs of identical non-NIL ID tags."""
    result = list(rows)
    i = 0
    while i < len(result):
        if result[i].id_tag == NIL:
            result[i] = ConllRow(result[i].token, result[i].span, SpanTag.O,
                                 NIL, result[i].dict_features)
            i += 1
            continue
        j = i
        while j + 1 < len(result) and result[j + 1].id_tag == result[i].id_tag:
            j += 1
        for k, tag in zip(range(i, j + 1), _block_tags(j - i + 1)):
            result[k] = ConllRow(result[k].token, result[k].span, tag,
                                 result[k].id_tag, result[k].dict_features)
        i = j + 1
    return result


def document_to_conll(doc: Document, unify_strategy: UnifyStrategy,
                      unnest_strategy: UnnestStrategy) -> list[list[ConllRow]]:
    """Simplify and encode a document, one CoNLL block per text line."""
    tokens = tokenize(doc.text)
    simplified = simplify(doc, unify_strategy, unnest_strategy, tokens)
    rows = encode(simplified, tokens)
    by_start = {row.span.start: row for row in rows}
    sentences = []
    for sentence_tokens in tokenize_sentences(doc.text):
        sentences.append([by_start[span.start] for _, span in sentence_tokens])
    return sentences


def conll_to_document(doc_id: str, sentences: list[list[ConllRow]],
                      id_source: str = "id_tag", concept: str | None = None,
                      text: str | None = None) -> Document:
    """Decode sentences back into a document.

    When the original text is not supplied, a surrogate is rebuilt from
    the token offsets with spaces in the gaps.
    """
    if text is None:
        length = max((r.span.end for rows in sentences for r in rows), default=0)
        chars = [" "] * length
        for rows in sentences:
            for row in rows:
                # token text may disagree with the span width; keep offsets
                piece = row.token[:len(row.span)]
                chars[row.span.start:row.span.start + len(piece)] = list(piece)
        text = "".join(chars)
    annotations = []
    for rows in sentences:
        annotations.extend(decode_iobes(rows, id_source, concept))
    return Document(doc_id, text, tuple(annotations))


def roundtrip_upper_bound(corpus, unify_strategy: UnifyStrategy,
                          unnest_strategy: UnnestStrategy,
                          graph: OntologyGraph,
                          decay: float = DEFAULT_DECAY) -> EvalCounts:
    """Score the corpus converted to CoNLL and back against itself.

    The result is the ceiling any system trained on the token-label
    representation can reach for the given simplification strategies.
    """
    total = EvalCounts()
    for doc in corpus:
        sentences = document_to_conll(doc, unify_strategy, unnest_strategy)
        restored = conll_to_document(doc.doc_id, sentences, text=doc.text)
        total += score_document(list(restored.annotations),
                                list(doc.annotations), graph, decay)
    return total

"""Shared test fixtures: synthetic ontologies, corpus generators, oracles."""

from __future__ import annotations

import random

from conceptkit import (NIL, Annotation, ConllRow, Document, SpanTag,
                        TextSpan, parse_obo, tokenize)
from conceptkit.evaluate import EvalCounts, pair_similarity

# Three-node chain: C is_a B is_a A.
CHAIN_OBO = """\
format-version: 1.2

[Term]
id: TEST:A
name: root thing

[Term]
id: TEST:B
name: middle thing
is_a: TEST:A

[Term]
id: TEST:C
name: leaf thing
is_a: TEST:B
"""


def chain_obo(n: int, prefix: str = "CH") -> str:
    """Linear chain of n terms; CH:0000 is the root."""
    stanzas = ["format-version: 1.2\n"]
    for i in range(n):
        lines = [f"[Term]", f"id: {prefix}:{i:04d}", f"name: {prefix} level {i}"]
        if i:
            lines.append(f"is_a: {prefix}:{i - 1:04d}")
        stanzas.append("\n".join(lines) + "\n")
    return "\n".join(stanzas)


def tree_obo(branching: int = 4, depth: int = 2, prefix: str = "TR") -> str:
    """Complete tree ontology with generated names and synonyms."""
    stanzas = ["format-version: 1.2\n"]
    counter = 0

    def add(parent: str | None, level: int):
        nonlocal counter
        curie = f"{prefix}:{counter:04d}"
        counter += 1
        lines = [f"[Term]", f"id: {curie}", f"name: node{counter - 1} term"]
        lines.append(f'synonym: "syn{counter - 1} form" EXACT []')
        if parent:
            lines.append(f"is_a: {parent}")
        stanzas.append("\n".join(lines) + "\n")
        if level < depth:
            for _ in range(branching):
                add(curie, level + 1)

    add(None, 0)
    return "\n".join(stanzas)


def tree_graph(branching: int = 4, depth: int = 2, prefix: str = "TR"):
    return parse_obo(tree_obo(branching, depth, prefix))


WORDS = (
    "cell protein kinase membrane nucleus receptor gene acid enzyme tissue "
    "binding factor complex pathway domain residue strand vesicle antigen "
    "ligand channel motif marker signal matrix organ embryo larva tubulin"
).split()


def random_simple_document(rng: random.Random, doc_id: str, concepts,
                           n_lines: int = 3,
                           annotate_prob: float = 0.35) -> Document:
    """Document whose annotations are contiguous, token-aligned, disjoint,
    and confined to single lines."""
    lines = [
        " ".join(rng.choice(WORDS) for _ in range(rng.randint(3, 9)))
        for _ in range(n_lines)
    ]
    text = "\n".join(lines)
    annotations = []
    offset = 0
    for line in lines:
        tokens = tokenize(line)
        i = 0
        while i < len(tokens):
            if rng.random() < annotate_prob:
                width = min(rng.randint(1, 3), len(tokens) - i)
                start = tokens[i][1].start + offset
                end = tokens[i + width - 1][1].end + offset
                annotations.append(
                    Annotation(rng.choice(concepts), (TextSpan(start, end),)))
                i += width
            else:
                i += 1
        offset += len(line) + 1
    return Document(doc_id, text, tuple(annotations))


def random_messy_document(rng: random.Random, doc_id: str, concepts,
                          n_lines: int = 3) -> Document:
    """Document that may contain discontinuous, overlapping, and
    sub-word annotations."""
    base = random_simple_document(rng, doc_id, concepts, n_lines,
                                  annotate_prob=0.45)
    annotations = list(base.annotations)
    mutated = []
    for ann in annotations:
        span = ann.spans[0]
        roll = rng.random()
        if roll < 0.2 and len(span) > 4:
            # sub-word: shave a character off either end
            span = (TextSpan(span.start + 1, span.end) if rng.random() < 0.5
                    else TextSpan(span.start, span.end - 1))
            mutated.append(Annotation(ann.concept_id, (span,)))
        elif roll < 0.35 and span.end + 4 < len(base.text):
            # discontinuous: add a detached fragment to the right
            far = TextSpan(span.end + 2, min(span.end + 4, len(base.text)))
            if far.start < far.end and "\n" not in base.text[span.start:far.end]:
                mutated.append(Annotation(ann.concept_id, (span, far)))
            else:
                mutated.append(ann)
        else:
            mutated.append(ann)
    if len(annotations) >= 2 and rng.random() < 0.6:
        # overlap: duplicate an annotation with a grown span
        victim = rng.choice(mutated)
        span = TextSpan(victim.spans[0].start,
                        min(victim.spans[-1].end + 3, len(base.text)))
        if span.start < span.end:
            other = rng.choice([c for c in concepts if c != victim.concept_id])
            mutated.append(Annotation(other, (span,)))
    return Document(doc_id, base.text, tuple(mutated))


def brute_jaccard(a, b) -> float:
    """Character-set Jaccard computed the obvious way."""
    chars_a = {c for span in a for c in range(span.start, span.end)}
    chars_b = {c for span in b for c in range(span.start, span.end)}
    union = chars_a | chars_b
    return len(chars_a & chars_b) / len(union) if union else 0.0


def optimal_counts(preds, refs, graph, decay=0.8) -> EvalCounts:
    """Exhaustive best pairing: maximise total similarity, then pair count.

    Exponential; intended for documents with few annotations per side.
    """
    sims = [[pair_similarity(p, r, graph, decay) for p in preds] for r in refs]

    cache: dict[tuple[int, frozenset], tuple[float, int]] = {}

    def best(ri: int, used: frozenset) -> tuple[float, int]:
        if ri == len(refs):
            return 0.0, 0
        key = (ri, used)
        if key in cache:
            return cache[key]
        score = best(ri + 1, used)
        for pi in range(len(preds)):
            if pi in used or sims[ri][pi] <= 0.0:
                continue
            sub_m, sub_pairs = best(ri + 1, used | {pi})
            cand = (sub_m + sims[ri][pi], sub_pairs + 1)
            if cand > score:
                score = cand
        cache[key] = score
        return score

    matches, paired = best(0, frozenset())
    return EvalCounts(
        matches=matches,
        substitutions=paired - matches,
        insertions=len(preds) - paired,
        deletions=len(refs) - paired,
    )


def rows_from_tuples(tuples: list[tuple]) -> list[ConllRow]:
    """Build a sentence from (token, start, end, tag, id, feats) tuples."""
    rows = []
    for token, start, end, tag, id_tag, feats in tuples:
        rows.append(ConllRow(token, TextSpan(start, end), SpanTag(tag),
                             id_tag, tuple(feats)))
    return rows


def entity_rows(layout):
    """layout: list of (token, gold_concept|None) -> flat rows + gold anns."""
    rows = []
    annotations = []
    pos = 0
    i = 0
    while i < len(layout):
        token, concept = layout[i]
        start = pos
        if concept is None:
            rows.append((token, start, start + len(token), concept))
            pos += len(token) + 1
            i += 1
            continue
        j = i
        while j + 1 < len(layout) and layout[j + 1][1] == concept:
            j += 1
        end = start
        for k in range(i, j + 1):
            rows.append((layout[k][0], end, end + len(layout[k][0]), concept))
            end += len(layout[k][0]) + 1
        annotations.append(Annotation(concept, (TextSpan(start, end - 1),)))
        pos = end
        i = j + 1
    return rows, annotations


def id_favouring_corpus(n_docs=12):
    """Neural IDs perfect; span tagger and dictionary add wrong noise."""
    gold = {}
    predictions = {}
    for d in range(n_docs):
        concept = f"TR:{(d % 4) + 1:04d}"
        layout = [("aaa", None), ("kinase", concept), ("bbb", None),
                  ("ccc", None)]
        flat, anns = entity_rows(layout)
        rows = []
        for token, start, end, gold_concept in flat:
            if gold_concept:
                rows.append((token, start, end, "O", gold_concept, []))
            elif token == "bbb":
                # span-tagger noise with a wrong dictionary candidate
                rows.append((token, start, end, "S", NIL, ["TR:0013"]))
            else:
                rows.append((token, start, end, "O", NIL, []))
        gold[f"doc{d:02d}"] = anns
        predictions[f"doc{d:02d}"] = [rows_from_tuples(rows)]
    return gold, predictions


def span_favouring_corpus(n_docs=12):
    """Span tagger and dictionary perfect; neural IDs wrong where set."""
    gold = {}
    predictions = {}
    for d in range(n_docs):
        concept = f"TR:{(d % 4) + 1:04d}"
        layout = [("aaa", None), ("kinase", concept), ("cell", concept),
                  ("bbb", None)]
        flat, anns = entity_rows(layout)
        rows = []
        first_entity_token = True
        for token, start, end, gold_concept in flat:
            if gold_concept:
                tag = "B" if first_entity_token else "E"
                nn = "TR:0017" if first_entity_token else NIL
                rows.append((token, start, end, tag, nn, [gold_concept]))
                first_entity_token = False
            else:
                rows.append((token, start, end, "O", NIL, []))
        gold[f"doc{d:02d}"] = anns
        predictions[f"doc{d:02d}"] = [rows_from_tuples(rows)]
    return gold, predictions

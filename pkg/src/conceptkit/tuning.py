"""Cross-validation harness and a trivial lexicon baseline tagger.

The grid search evaluates each harmonisation strategy on every held-out
fold and ranks strategies by mean F-score (mean slot error rate breaks
ties). The lexicon tagger memorises entity surface forms from training
CoNLL data; it exists so the whole pipeline can run end to end without
any neural prediction files, and by construction it can only ever
predict concepts seen during training.
"""

from __future__ import annotations

import json
import random
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .codec import iter_blocks, majority_id
from .dicttag import normalize_term
from .errors import ConceptKitError
from .evaluate import EvalCounts, fscore, score_document, slot_error_rate
from .harmonise import HarmonisationStrategy, harmonise_document
from .model import NIL, Annotation, ConllRow, SpanTag, TextSpan
from .ontology import DEFAULT_DECAY, OntologyGraph

STRATEGY_ORDER = (
    HarmonisationStrategy.SPANS_ONLY,
    HarmonisationStrategy.IDS_ONLY,
    HarmonisationStrategy.SPANS_FIRST,
    HarmonisationStrategy.IDS_FIRST,
)


@dataclass(frozen=True)
class FoldPlan:
    """Partition of document IDs into k folds of near-equal size."""

    k: int
    assignment: dict[str, int]

    def fold_docs(self, fold: int) -> list[str]:
        return sorted(d for d, f in self.assignment.items() if f == fold)


def make_folds(doc_ids: list[str], k: int, seed: int = 0) -> FoldPlan:
    """Deal documents into k folds round-robin after a seeded shuffle."""
    ids = sorted(doc_ids)
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate document ids")
    if k < 2:
        raise ValueError(f"need at least 2 folds, got {k}")
    if k > len(ids):
        raise ValueError(f"cannot split {len(ids)} documents into {k} folds")
    random.Random(seed).shuffle(ids)
    return FoldPlan(k, {doc_id: i % k for i, doc_id in enumerate(ids)})


@dataclass(frozen=True)
class StrategyResult:
    strategy: HarmonisationStrategy
    mean_f: float
    mean_ser: float
    fold_counts: tuple[EvalCounts, ...]


def _evaluate_cell(args) -> EvalCounts:
    gold, predictions, strategy, doc_ids, graph, decay = args
    counts = EvalCounts()
    for doc_id in doc_ids:
        preds = harmonise_document(predictions[doc_id], strategy)
        counts += score_document(preds, gold[doc_id], graph, decay)
    return counts


def grid_search(gold: dict[str, list[Annotation]],
                predictions: dict[str, list[list[ConllRow]]],
                strategies, plan: FoldPlan, graph: OntologyGraph,
                decay: float = DEFAULT_DECAY,
                jobs: int = 1) -> list[StrategyResult]:
    """Rank strategies by mean held-out F-score (SER breaks ties).

    Ranking is deterministic: exact ties fall back to the canonical
    strategy order. Fold-by-strategy cells are independent and can be
    evaluated in parallel.
    """
    missing = [d for d in gold if d not in predictions]
    if missing:
        raise ConceptKitError(f"no predictions for document {missing[0]}")
    unknown = [d for d in plan.assignment if d not in gold]
    if unknown:
        raise ConceptKitError(f"fold plan names unknown document {unknown[0]}")
    strategies = [HarmonisationStrategy(s) for s in strategies]
    folds = [plan.fold_docs(f) for f in range(plan.k)]
    cells = [(gold, predictions, s, fold, graph, decay)
             for s in strategies for fold in folds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            counts = list(pool.map(_evaluate_cell, cells))
    else:
        counts = [_evaluate_cell(cell) for cell in cells]
    results = []
    for i, strategy in enumerate(strategies):
        fold_counts = tuple(counts[i * len(folds):(i + 1) * len(folds)])
        fs = [fscore(c)[2] for c in fold_counts]
        sers = [slot_error_rate(c) for c in fold_counts]
        results.append(StrategyResult(
            strategy,
            sum(fs) / len(fs),
            sum(sers) / len(sers),
            fold_counts,
        ))
    rank = {s: i for i, s in enumerate(STRATEGY_ORDER)}
    results.sort(key=lambda r: (-r.mean_f, r.mean_ser, rank[r.strategy]))
    return results


def select_strategy(table: list[StrategyResult]) -> HarmonisationStrategy:
    """Top-ranked strategy of a grid-search table."""
    if not table:
        raise ValueError("empty strategy table")
    return table[0].strategy


def tied_with_best(table: list[StrategyResult]) -> list[HarmonisationStrategy]:
    """All strategies sharing the best mean F-score, in table order."""
    best = table[0].mean_f
    return [r.strategy for r in table if r.mean_f == best]


class LexiconTagger:
    """Surface-form lookup tagger trained on gold CoNLL data.

    Maps each normalised entity token sequence to its most frequent
    (span pattern, concept) in the training data. Prediction scans
    greedily for the longest leftmost known surface form.
    """

    def __init__(self, entries: dict[tuple[str, ...], tuple[tuple[str, ...], str]]):
        self.entries = dict(entries)
        self.max_len = max(map(len, self.entries), default=0)

    @classmethod
    def train(cls, training_docs: dict[str, list[list[ConllRow]]]) -> "LexiconTagger":
        votes: dict[tuple[str, ...], Counter] = {}
        for doc_id in sorted(training_docs):
            for rows in training_docs[doc_id]:
                tags = [r.span_tag for r in rows]
                for first, last in iter_blocks(tags):
                    block = rows[first:last + 1]
                    concept = majority_id([r.id_tag for r in block if r.id_tag != NIL])
                    if concept is None:
                        continue
                    key = tuple(t for r in block for t in normalize_term(r.token))
                    if not key:
                        continue
                    pattern = tuple(r.span_tag.value for r in block)
                    votes.setdefault(key, Counter())[(pattern, concept)] += 1
        entries = {}
        for key, counter in votes.items():
            (pattern, concept), _ = min(
                counter.items(), key=lambda kv: (-kv[1], kv[0]))
            entries[key] = (pattern, concept)
        return cls(entries)

    def concepts(self) -> set[str]:
        return {concept for _, concept in self.entries.values()}

    def tag_tokens(self, tokens: list[tuple[str, TextSpan]]) -> list[tuple[SpanTag, str]]:
        """Predicted (span tag, ID tag) per token; O/NIL outside matches."""
        norm = [tuple(normalize_term(tok)) for tok, _ in tokens]
        out: list[tuple[SpanTag, str]] = [(SpanTag.O, NIL)] * len(tokens)
        i = 0
        while i < len(tokens):
            if not norm[i]:
                i += 1
                continue
            best = None
            key: list[str] = []
            for j in range(i, len(tokens)):
                key.extend(norm[j])
                if len(key) > self.max_len:
                    break
                if not norm[j]:
                    continue
                entry = self.entries.get(tuple(key))
                if entry is not None:
                    best = (j, entry)
            if best is None:
                i += 1
                continue
            j, (pattern, concept) = best
            width = j - i + 1
            if len(pattern) != width:
                pattern = ("S",) if width == 1 else (
                    ("B",) + ("I",) * (width - 2) + ("E",))
            for k, tag in zip(range(i, j + 1), pattern):
                out[k] = (SpanTag(tag), concept)
            i = j + 1
        return out

    def tag_rows(self, sentences: list[list[ConllRow]]) -> list[list[ConllRow]]:
        """Overwrite span and ID columns with lexicon predictions."""
        tagged = []
        for rows in sentences:
            labels = self.tag_tokens([(r.token, r.span) for r in rows])
            tagged.append([
                ConllRow(r.token, r.span, tag, id_tag, r.dict_features)
                for r, (tag, id_tag) in zip(rows, labels)
            ])
        return tagged

    def to_json(self) -> str:
        payload = [
            {"key": list(key), "pattern": list(pattern), "concept": concept}
            for key, (pattern, concept) in sorted(self.entries.items())
        ]
        return json.dumps({"entries": payload}, indent=0)

    @classmethod
    def from_json(cls, text: str) -> "LexiconTagger":
        data = json.loads(text)
        entries = {
            tuple(e["key"]): (tuple(e["pattern"]), e["concept"])
            for e in data["entries"]
        }
        return cls(entries)

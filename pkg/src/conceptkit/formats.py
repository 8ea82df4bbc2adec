"""Stand-off and CoNLL file formats, plus the reference tokenizer.

Stand-off (.ann), one record per line, tab-separated:

    T1<TAB>CHEBI:33893 0 5<TAB>agent

The second field holds the concept CURIE followed by one or more
"start end" fragment pairs separated by ";". Fragment texts of
discontinuous mentions are joined with " ... " in the third field.

CoNLL (.conll), one token per line, six tab-separated columns:

    token  start  end  span_tag  id_tag  dict_features

Dictionary features are ";"-joined CURIEs, "-" when empty. A blank line
separates sentences. Offsets refer to the original document text and
increase monotonically through the file.
"""

from __future__ import annotations

import logging
import re

from .errors import ParseError
from .model import Annotation, ConllRow, Document, SpanTag, TextSpan

logger = logging.getLogger(__name__)

# Maximal letter/digit runs are one token; any other non-space character
# stands alone.
_TOKEN_RE = re.compile(r"[^\W_]+|[^\w\s]|_")

_EMPTY_FEATURES = "-"


def tokenize(text: str) -> list[tuple[str, TextSpan]]:
    """Deterministic whitespace/punctuation tokenization with offsets.

    Every non-whitespace character belongs to exactly one token.
    """
    return [
        (m.group(), TextSpan(m.start(), m.end())) for m in _TOKEN_RE.finditer(text)
    ]


def tokenize_sentences(text: str) -> list[list[tuple[str, TextSpan]]]:
    """Tokenize and group tokens into one block per non-empty text line."""
    sentences = []
    offset = 0
    for line in text.split("\n"):
        tokens = [
            (tok, TextSpan(span.start + offset, span.end + offset))
            for tok, span in tokenize(line)
        ]
        if tokens:
            sentences.append(tokens)
        offset += len(line) + 1
    return sentences


def _normalise_ws(s: str) -> str:
    return " ".join(s.split())


def parse_standoff(ann_text: str, doc_text: str, doc_id: str = "") -> Document:
    """Parse stand-off records over the given document text.

    Offsets are authoritative: a mismatch between the recorded text and
    the covered text is logged as a warning and the annotation is kept.
    Out-of-range offsets or malformed records raise ParseError with the
    offending line number. Record order is preserved.
    """
    annotations = []
    seen_ids = set()
    for lineno, line in enumerate(ann_text.splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split("\t", 2)
        if len(fields) < 2:
            raise ParseError("expected tab-separated record", line=lineno, source=doc_id)
        ann_id, type_field = fields[0], fields[1]
        recorded_text = fields[2] if len(fields) > 2 else ""
        if not ann_id.startswith("T"):
            continue
        if ann_id in seen_ids:
            raise ParseError(f"duplicate annotation id {ann_id}", line=lineno, source=doc_id)
        seen_ids.add(ann_id)
        concept, _, fragment_field = type_field.partition(" ")
        if not concept or not fragment_field:
            raise ParseError("expected 'CONCEPT start end[;start end...]'",
                             line=lineno, source=doc_id)
        spans = []
        for fragment in fragment_field.split(";"):
            parts = fragment.split()
            if len(parts) != 2:
                raise ParseError(f"bad fragment {fragment!r}", line=lineno, source=doc_id)
            try:
                start, end = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(f"non-integer offsets in {fragment!r}",
                                 line=lineno, source=doc_id) from None
            if start < 0 or start >= end:
                raise ParseError(f"empty or inverted span {start} {end}",
                                 line=lineno, source=doc_id)
            if end > len(doc_text):
                raise ParseError(
                    f"offset {end} beyond text length {len(doc_text)}",
                    line=lineno, source=doc_id)
            spans.append(TextSpan(start, end))
        try:
            ann = Annotation(concept, tuple(spans), recorded_text)
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno, source=doc_id) from None
        covered = " ... ".join(doc_text[s.start:s.end] for s in ann.spans)
        if recorded_text and _normalise_ws(recorded_text) != _normalise_ws(covered):
            logger.warning(
                "%s:%d: text mismatch for %s: recorded %r, covered %r",
                doc_id, lineno, ann_id, recorded_text, covered)
        annotations.append(ann)
    return Document(doc_id, doc_text, tuple(annotations))


def write_standoff(doc: Document) -> str:
    """Serialise a document's annotations as stand-off records."""
    lines = []
    for i, ann in enumerate(doc.annotations, start=1):
        fragments = ";".join(f"{s.start} {s.end}" for s in ann.spans)
        text = doc.covered_text(ann).replace("\n", " ").replace("\t", " ")
        lines.append(f"T{i}\t{ann.concept_id} {fragments}\t{text}")
    return "".join(line + "\n" for line in lines)


def parse_conll(text: str, source: str = "") -> list[list[ConllRow]]:
    """Parse a CoNLL file into sentences of validated rows."""
    sentences: list[list[ConllRow]] = []
    current: list[ConllRow] = []
    prev_end = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            if current:
                sentences.append(current)
                current = []
            continue
        cols = line.split("\t")
        if len(cols) != 6:
            raise ParseError(f"expected 6 columns, got {len(cols)}",
                             line=lineno, source=source)
        token, start_s, end_s, tag_s, id_tag, feat_s = cols
        try:
            start, end = int(start_s), int(end_s)
        except ValueError:
            raise ParseError(f"non-integer offsets {start_s!r} {end_s!r}",
                             line=lineno, source=source) from None
        if start < 0 or start >= end:
            raise ParseError(f"empty or inverted span {start} {end}",
                             line=lineno, source=source)
        if start < prev_end:
            raise ParseError(f"non-monotonic offset {start} after {prev_end}",
                             line=lineno, source=source)
        prev_end = end
        try:
            tag = SpanTag(tag_s)
        except ValueError:
            raise ParseError(f"unknown span tag {tag_s!r}",
                             line=lineno, source=source) from None
        if not id_tag:
            raise ParseError("empty id tag", line=lineno, source=source)
        if feat_s == _EMPTY_FEATURES:
            features: tuple[str, ...] = ()
        else:
            features = tuple(f for f in feat_s.split(";") if f)
            if not features:
                raise ParseError(f"bad feature field {feat_s!r}",
                                 line=lineno, source=source)
        try:
            current.append(ConllRow(token, TextSpan(start, end), tag, id_tag, features))
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno, source=source) from None
    if current:
        sentences.append(current)
    return sentences


def write_conll(sentences: list[list[ConllRow]]) -> str:
    """Serialise sentences of rows; inverse of parse_conll."""
    blocks = []
    for rows in sentences:
        lines = []
        for row in rows:
            features = ";".join(row.dict_features) if row.dict_features else _EMPTY_FEATURES
            lines.append("\t".join((
                row.token, str(row.span.start), str(row.span.end),
                row.span_tag.value, row.id_tag, features)))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n" if blocks else ""

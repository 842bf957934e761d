"""Corpus loading and conversion.

Two interchange formats are supported:

* column format: UTF-8 text, one "token<TAB>tag" pair per line, blank line
  between sentences;
* DDI-style XML: <sentence text="..."> elements with <entity> children
  carrying `type` and `charOffset` attributes (inclusive character offsets,
  discontinuous fragments separated by semicolons).

Conversion is offset-faithful: every token records exactly where it sits in
the source sentence, and every entity either tags at least one token or
leaves a recorded warning.
"""
from __future__ import annotations

import string
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataError
from .evaluation import ENTITY_CLASSES, TAG_INDEX, iob_to_spans
from .fileio import atomic_write_text

_PUNCT = set(string.punctuation)

# Row order used when rendering corpus statistics tables.
STATS_CLASS_ORDER = ("drug_n", "group", "brand", "drug")


@dataclass(frozen=True)
class Token:
    """Surface form plus inclusive character offsets within the source sentence."""

    text: str
    start: int
    end: int


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[str, ...]
    tags: tuple[str, ...] | None = None
    sid: str | None = None
    doc_id: str | None = None

    def __post_init__(self) -> None:
        if self.tags is not None and len(self.tags) != len(self.tokens):
            raise DataError(
                f"sentence {self.sid or ''}: {len(self.tokens)} tokens "
                f"but {len(self.tags)} tags"
            )


@dataclass
class Corpus:
    sentences: list[Sentence] = field(default_factory=list)
    label: str = ""

    def __len__(self) -> int:
        return len(self.sentences)

    @property
    def has_tags(self) -> bool:
        return bool(self.sentences) and all(s.tags is not None for s in self.sentences)


def load_column_corpus(path: str | Path, label: str = "") -> Corpus:
    """Read a column-format corpus; malformed lines fail with their line number."""
    sentences: list[Sentence] = []
    tokens: list[str] = []
    tags: list[str] = []
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read corpus {path}: {exc}") from exc

    def flush() -> None:
        if tokens:
            sentences.append(Sentence(tokens=tuple(tokens), tags=tuple(tags)))
            tokens.clear()
            tags.clear()

    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            flush()
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise DataError(
                f"{path}:{lineno}: expected token<TAB>tag, got {len(parts)} fields"
            )
        token, tag = parts
        if tag not in TAG_INDEX:
            raise DataError(f"{path}:{lineno}: unknown tag {tag!r}")
        tokens.append(token)
        tags.append(tag)
    flush()
    return Corpus(sentences=sentences, label=label or path.stem)


def write_column_corpus(corpus: Corpus, path: str | Path) -> None:
    """Writer counterpart of load_column_corpus (exact round-trip)."""
    lines: list[str] = []
    for sent in corpus.sentences:
        if sent.tags is None:
            raise DataError("cannot write a column corpus without tags")
        for token, tag in zip(sent.tokens, sent.tags):
            lines.append(f"{token}\t{tag}")
        lines.append("")
    atomic_write_text(path, "\n".join(lines))


def load_raw_corpus(path: str | Path, label: str = "") -> Corpus:
    """One untagged sentence per non-blank line, tokenized with offsets."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read corpus {path}: {exc}") from exc
    sentences = []
    for line in text.splitlines():
        if line.strip():
            toks = tuple(t.text for t in tokenize_with_offsets(line))
            sentences.append(Sentence(tokens=toks))
    return Corpus(sentences=sentences, label=label or path.stem)


def tokenize_with_offsets(text: str) -> list[Token]:
    """Whitespace split, then leading/trailing punctuation peeled one char at
    a time into separate tokens. Offsets are inclusive and slice back to the
    surface form exactly; interior punctuation (hyphens etc.) stays attached.
    """
    tokens: list[Token] = []
    i, n = 0, len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace():
            j += 1
        chunk = text[i:j]
        lead = 0
        while lead < len(chunk) - 1 and chunk[lead] in _PUNCT:
            tokens.append(Token(chunk[lead], i + lead, i + lead))
            lead += 1
        trail = len(chunk)
        while trail - 1 > lead and chunk[trail - 1] in _PUNCT:
            trail -= 1
        tokens.append(Token(chunk[lead:trail], i + lead, i + trail - 1))
        for k in range(trail, len(chunk)):
            tokens.append(Token(chunk[k], i + k, i + k))
        i = j
    return tokens


def _parse_char_offset(raw: str) -> list[tuple[int, int]]:
    """charOffset attribute -> list of inclusive (start, end) fragments."""
    fragments = []
    for part in raw.split(";"):
        lo, _, hi = part.partition("-")
        try:
            fragments.append((int(lo), int(hi)))
        except ValueError as exc:
            raise DataError(f"malformed charOffset {raw!r}") from exc
    return fragments


def convert_ddi_xml(
    path: str | Path, warnings: list[str] | None = None
) -> Corpus:
    """Tokenize one DDI XML file into IOB sentences.

    A token is tagged B-X/I-X when its character range overlaps an entity of
    class X; B- goes on the entity's first covered token. Discontinuous
    entities keep only their first fragment, overlapping entities keep the
    longer span (ties: earlier-declared), and offsets that cut through a
    token tag the covering tokens; all three cases leave a warning.
    """
    if warnings is None:
        warnings = []
    path = Path(path)
    try:
        tree = ET.parse(path)
    except (ET.ParseError, OSError) as exc:
        raise DataError(f"cannot parse DDI XML {path}: {exc}") from exc
    root = tree.getroot()
    doc_nodes = [root] if root.tag == "document" else list(root.iter("document"))
    if not doc_nodes:
        doc_nodes = [root]

    sentences: list[Sentence] = []
    for doc in doc_nodes:
        doc_id = doc.get("id") or path.stem
        for node in doc.iter("sentence"):
            sid = node.get("id") or f"{doc_id}.s{len(sentences)}"
            text = node.get("text") or ""
            tokens = tokenize_with_offsets(text)
            entities = []
            for ent in node.findall("entity"):
                cls = ent.get("type") or ""
                if cls not in ENTITY_CLASSES:
                    raise DataError(
                        f"{sid}: entity class {cls!r} outside "
                        f"{{{', '.join(ENTITY_CLASSES)}}}"
                    )
                fragments = _parse_char_offset(ent.get("charOffset") or "")
                if len(fragments) > 1:
                    warnings.append(
                        f"{sid}: discontinuous entity {ent.get('id')}: "
                        f"only first fragment kept"
                    )
                entities.append((cls, fragments[0], ent.get("id") or ""))

            tags = _tag_tokens(sid, text, tokens, entities, warnings)
            sentences.append(
                Sentence(
                    tokens=tuple(t.text for t in tokens),
                    tags=tuple(tags),
                    sid=sid,
                    doc_id=doc_id,
                )
            )
    return Corpus(sentences=sentences, label=path.stem)


def _tag_tokens(
    sid: str,
    text: str,
    tokens: list[Token],
    entities: list[tuple[str, tuple[int, int], str]],
    warnings: list[str],
) -> list[str]:
    """Resolve overlaps (longer span wins, ties earlier-declared) and emit IOB."""
    order = sorted(
        range(len(entities)),
        key=lambda k: (-(entities[k][1][1] - entities[k][1][0]), k),
    )
    kept: list[int] = []
    for k in order:
        lo, hi = entities[k][1]
        if any(
            lo <= entities[j][1][1] and entities[j][1][0] <= hi for j in kept
        ):
            warnings.append(
                f"{sid}: entity {entities[k][2]} overlaps a longer entity: dropped"
            )
            continue
        kept.append(k)

    tags = ["O"] * len(tokens)
    for k in sorted(kept):
        cls, (lo, hi), ent_id = entities[k]
        covered = [
            i for i, tok in enumerate(tokens) if tok.start <= hi and lo <= tok.end
        ]
        if not covered:
            warnings.append(f"{sid}: entity {ent_id} at {lo}-{hi} covers no token")
            continue
        first, last = tokens[covered[0]], tokens[covered[-1]]
        if first.start != lo or last.end != hi:
            warnings.append(
                f"{sid}: entity {ent_id} at {lo}-{hi} not aligned to token "
                f"boundaries ({first.start}-{last.end}); covering tokens tagged"
            )
        tags[covered[0]] = f"B-{cls}"
        for i in covered[1:]:
            tags[i] = f"I-{cls}"
    return tags


def convert_ddi_directory(
    directory: str | Path, warnings: list[str] | None = None
) -> Corpus:
    """Convert every *.xml file under `directory` (sorted, recursive)."""
    directory = Path(directory)
    if not directory.is_dir():
        raise DataError(f"not a directory: {directory}")
    merged = Corpus(label=directory.name)
    for xml_path in sorted(directory.rglob("*.xml")):
        part = convert_ddi_xml(xml_path, warnings)
        merged.sentences.extend(part.sentences)
    return merged


@dataclass(frozen=True)
class CorpusStats:
    documents: int | None
    sentences: int
    spans_per_class: dict[str, int]


def corpus_stats(corpus: Corpus) -> CorpusStats:
    """Sentence count plus per-class entity span counts (document count when
    the corpus came from XML and carries doc ids)."""
    counts = {cls: 0 for cls in ENTITY_CLASSES}
    doc_ids = set()
    for sent in corpus.sentences:
        if sent.doc_id is not None:
            doc_ids.add(sent.doc_id)
        if sent.tags is not None:
            for span in iob_to_spans(sent.tags):
                counts[span.cls] += 1
    return CorpusStats(
        documents=len(doc_ids) if doc_ids else None,
        sentences=len(corpus.sentences),
        spans_per_class=counts,
    )


def render_stats(stats: CorpusStats, label: str = "") -> str:
    lines = [f"corpus statistics{': ' + label if label else ''}"]
    docs = "-" if stats.documents is None else str(stats.documents)
    lines.append(f"{'documents':<10} {docs:>8}")
    lines.append(f"{'sentences':<10} {stats.sentences:>8}")
    for cls in STATS_CLASS_ORDER:
        lines.append(f"{cls:<10} {stats.spans_per_class[cls]:>8}")
    return "\n".join(lines) + "\n"

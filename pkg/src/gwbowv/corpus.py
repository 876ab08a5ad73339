"""Record ingestion, tokenization and document-frequency statistics."""

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field

from gwbowv import taxonomy as tx
from gwbowv.errors import ToolkitError
from gwbowv.fileio import read_json, write_json

DEFAULT_REJECT_LABELS = ("others", "general", "wrong procurement")

_NON_ALNUM = re.compile(r"[^\w\s]|_", re.UNICODE)


@dataclass(frozen=True)
class RawRecord:
    id: str
    title: str
    description: str
    path: tuple[str, ...]

    def to_dict(self):
        return {"id": self.id, "title": self.title, "description": self.description, "path": list(self.path)}


@dataclass(frozen=True)
class Document:
    id: str
    tokens: tuple[str, ...]
    path_label: int


@dataclass
class Vocabulary:
    index: dict[str, int]
    df: dict[str, int]
    n_docs: int

    def __len__(self):
        return len(self.index)

    def __contains__(self, word):
        return word in self.index


@dataclass
class Rejection:
    id: str
    reason: str

    def to_dict(self):
        return {"id": self.id, "reason": self.reason}


@dataclass
class IngestResult:
    documents: list[Document]
    rejections: list[Rejection]
    taxonomy: tx.TaxonomyTree | None = None
    records: list[RawRecord] = field(default_factory=list)


def compose_text(title, description, title_weight=3):
    """Description followed by the title repeated ``title_weight`` times."""
    if title_weight < 1:
        raise ToolkitError("bad_title_weight", f"title_weight must be >= 1, got {title_weight}")
    parts = [description.strip()] if description and description.strip() else []
    if title and title.strip():
        parts.extend([title.strip()] * title_weight)
    return " ".join(parts)


def tokenize(text, stop_words=(), min_length=1):
    text = _NON_ALNUM.sub(" ", text.lower())
    stop = set(stop_words)
    return [t for t in text.split() if len(t) >= min_length and t not in stop]


def parse_record(obj):
    """Validate one decoded JSON object into a :class:`RawRecord`."""
    if not isinstance(obj, dict):
        raise ToolkitError("malformed", "record must be a JSON object")
    rid = obj.get("id")
    path = obj.get("path")
    if not isinstance(rid, str) or not rid:
        raise ToolkitError("malformed", "missing or empty id")
    if not isinstance(path, list) or not path or not all(isinstance(p, str) and p for p in path):
        raise ToolkitError("malformed", "path must be a non-empty list of strings")
    title = obj.get("title", "")
    description = obj.get("description", "")
    if not isinstance(title, str) or not isinstance(description, str):
        raise ToolkitError("malformed", "title and description must be strings")
    return RawRecord(rid, title, description, tuple(path))


def ingest(
    records,
    taxonomy=None,
    title_weight=3,
    reject_labels=DEFAULT_REJECT_LABELS,
    stop_words=(),
    min_length=1,
):
    """Turn records into documents, routing unusable ones to a rejection report.

    ``records`` may hold :class:`RawRecord` objects, dicts, or raw JSON lines.
    With ``taxonomy=None`` the tree is built from the accepted records' paths;
    otherwise paths are looked up in the given (frozen) tree.
    """
    reject = {label.lower() for label in reject_labels}
    accepted = []
    rejections = []
    seen = set()
    for position, item in enumerate(records):
        fallback_id = f"#{position}"
        try:
            if isinstance(item, str):
                try:
                    item = json.loads(item)
                except json.JSONDecodeError:
                    raise ToolkitError("malformed", "invalid JSON") from None
            record = item if isinstance(item, RawRecord) else parse_record(item)
        except ToolkitError as exc:
            rid = item.get("id") if isinstance(item, dict) and isinstance(item.get("id"), str) else None
            rejections.append(Rejection(rid or fallback_id, exc.code))
            continue
        if record.id in seen:
            rejections.append(Rejection(record.id, "duplicate_id"))
            continue
        seen.add(record.id)
        if record.path[-1].strip().lower() in reject:
            rejections.append(Rejection(record.id, "ambiguous_label"))
            continue
        tokens = tokenize(compose_text(record.title, record.description, title_weight), stop_words, min_length)
        if not tokens:
            rejections.append(Rejection(record.id, "empty_tokens"))
            continue
        if taxonomy is not None and taxonomy.path_id(record.path) is None:
            rejections.append(Rejection(record.id, "unknown_path"))
            continue
        accepted.append((record, tokens))

    if taxonomy is None:
        if not accepted:
            raise ToolkitError("empty_corpus", "no records survived ingestion")
        taxonomy = tx.build(r.path for r, _ in accepted)
    documents = [Document(r.id, tuple(tokens), taxonomy.path_id(r.path)) for r, tokens in accepted]
    return IngestResult(documents, rejections, taxonomy, [r for r, _ in accepted])


def smoothed_idf(n_docs, df):
    return math.log((1 + n_docs) / (1 + df)) + 1.0


def compute_idf(documents):
    """Document frequencies and smoothed idf over token sequences.

    Accepts :class:`Document` objects or plain token lists. Vocabulary indices
    follow sorted word order so serialized output is stable.
    """
    df = Counter()
    n_docs = 0
    for doc in documents:
        tokens = doc.tokens if isinstance(doc, Document) else doc
        df.update(set(tokens))
        n_docs += 1
    if n_docs == 0 or not df:
        raise ToolkitError("empty_corpus", "cannot compute idf without non-empty documents")
    words = sorted(df)
    vocab = Vocabulary({w: i for i, w in enumerate(words)}, {w: df[w] for w in words}, n_docs)
    idf = {w: smoothed_idf(n_docs, df[w]) for w in words}
    return vocab, idf


def save_idf(path, vocab, idf):
    write_json(path, {
        "format_version": 1,
        "n_docs": vocab.n_docs,
        "words": [{"word": w, "df": vocab.df[w], "idf": idf[w]} for w in sorted(vocab.index)],
    })


def load_idf(path):
    data = read_json(path)
    rows = data["words"]
    vocab = Vocabulary({r["word"]: i for i, r in enumerate(rows)}, {r["word"]: r["df"] for r in rows}, data["n_docs"])
    return vocab, {r["word"]: r["idf"] for r in rows}


def read_records(lines):
    """Decode JSON-lines text into dicts, keeping malformed lines as raw strings for :func:`ingest`."""
    out = []
    for line in lines:
        if not line.strip():
            continue
        try:
            out.append(json.loads(line))
        except json.JSONDecodeError:
            out.append(line)
    return out

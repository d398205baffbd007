"""Corpus ingestion: tokenization, sentence splitting, JSON-lines I/O.

Documents are immutable after load and safe to share across workers. The
tokenizer is deliberately simple and deterministic: split on Unicode
whitespace, then peel leading/trailing punctuation characters into their own
single-character tokens. Internal punctuation ("gotinder.com") is kept, so
collocations stay intact for span counting. Sentences end at ``. ! ?``
followed by a capitalized token or end of input.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass
from pathlib import Path

from .errors import DuplicateId, IoError, ParseError

_SENTENCE_FINAL = {".", "!", "?"}


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


@dataclass(frozen=True)
class Token:
    """One surface token with its byte offset into the raw document text."""

    text: str
    byte_offset: int


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]
    index_in_doc: int


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    sentences: tuple[Sentence, ...]
    label_text: str | None = None

    @property
    def tokens(self) -> tuple[Token, ...]:
        return tuple(t for s in self.sentences for t in s.tokens)

    @property
    def token_texts(self) -> list[str]:
        return [t.text for s in self.sentences for t in s.tokens]


@dataclass(frozen=True)
class Corpus:
    documents: tuple[Document, ...]
    name: str = ""

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def get(self, doc_id: str) -> Document | None:
        return _index(self).get(doc_id)


def _index(corpus: Corpus) -> dict[str, Document]:
    return {d.id: d for d in corpus.documents}


def tokenize(text: str, lowercase: bool = False) -> list[Token]:
    """Whitespace split, then peel boundary punctuation into 1-char tokens.

    Offsets are byte offsets into the UTF-8 encoding of ``text`` and strictly
    increase. Re-tokenizing the space-joined token texts yields the same
    token texts (idempotence), since tokens never contain whitespace.
    """
    tokens: list[Token] = []
    byte_pos = 0
    char_pos = 0
    for chunk in text.split():
        start_char = text.index(chunk, char_pos)
        byte_pos += len(text[char_pos:start_char].encode("utf-8"))
        char_pos = start_char

        # Peel leading punctuation.
        left = 0
        while left < len(chunk) and _is_punct(chunk[left]):
            left += 1
        # Peel trailing punctuation off the remainder.
        right = len(chunk)
        while right > left and _is_punct(chunk[right - 1]):
            right -= 1
        pieces: list[str] = list(chunk[:left]) if left else []
        if right > left:
            pieces.append(chunk[left:right])
        pieces.extend(chunk[right:])

        for piece in pieces:
            text_piece = piece.lower() if lowercase else piece
            tokens.append(Token(text=text_piece, byte_offset=byte_pos))
            byte_pos += len(piece.encode("utf-8"))
            char_pos += len(piece)
    return tokens


def split_sentences(tokens: list[Token]) -> list[Sentence]:
    """Group tokens into sentences; boundaries never leave empty sentences."""
    if not tokens:
        return []
    sentences: list[Sentence] = []
    current: list[Token] = []
    for i, tok in enumerate(tokens):
        current.append(tok)
        if tok.text in _SENTENCE_FINAL:
            nxt = tokens[i + 1] if i + 1 < len(tokens) else None
            if nxt is None or (nxt.text and nxt.text[0].isupper()):
                sentences.append(Sentence(tokens=tuple(current), index_in_doc=len(sentences)))
                current = []
    if current:
        sentences.append(Sentence(tokens=tuple(current), index_in_doc=len(sentences)))
    return sentences


def document_from_text(doc_id: str, text: str, label_text: str | None = None) -> Document:
    return Document(
        id=doc_id,
        text=text,
        sentences=tuple(split_sentences(tokenize(text))),
        label_text=label_text,
    )


def load_corpus(path: str | Path, format: str = "jsonl") -> Corpus:
    """One document per JSON line: {"id": str?, "text": str, "label": str?}.

    Missing ids become ``line-<N>`` (1-based). Order is preserved; duplicate
    ids are an error.
    """
    if format != "jsonl":
        raise ParseError(f"unsupported corpus format {format!r}")
    path = Path(path)
    try:
        raw_lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IoError(f"cannot read corpus {path}: {exc}") from exc

    documents: list[Document] = []
    seen: set[str] = set()
    for line_no, line in enumerate(raw_lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", line=line_no) from exc
        if not isinstance(record, dict) or "text" not in record:
            raise ParseError('record must be an object with a "text" field', line=line_no)
        text = record["text"]
        if not isinstance(text, str):
            raise ParseError('"text" must be a string', line=line_no)
        doc_id = record.get("id")
        if doc_id is None:
            doc_id = f"line-{line_no}"
        doc_id = str(doc_id)
        if doc_id in seen:
            raise DuplicateId(f"duplicate document id {doc_id!r} at line {line_no}")
        seen.add(doc_id)
        label = record.get("label")
        documents.append(document_from_text(doc_id, text, None if label is None else str(label)))
    return Corpus(documents=tuple(documents), name=path.name)


def save_corpus(corpus: Corpus, path: str | Path, emit_tokens: bool = False) -> None:
    """Write the corpus back as JSON-lines, optionally with a "tokens" array."""
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for doc in corpus.documents:
                record: dict = {"id": doc.id, "text": doc.text}
                if doc.label_text is not None:
                    record["label"] = doc.label_text
                if emit_tokens:
                    record["tokens"] = doc.token_texts
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write corpus {path}: {exc}") from exc

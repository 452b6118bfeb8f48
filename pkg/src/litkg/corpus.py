"""Corpus loading and deterministic sentence segmentation.

Documents are plain UTF-8 text files.  On load the text is normalized to
Unicode NFC and line breaks inside paragraphs are collapsed to single
spaces; blank lines survive as paragraph separators.  Segmentation is a
fixed rule (terminal punctuation followed by whitespace and an uppercase
letter or quote, with an abbreviation guard) so that byte-exact tests are
possible and reruns are reproducible.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path


class CorpusError(Exception):
    """Raised for unreadable or empty input files."""


#: Words whose trailing period does not end a sentence.
ABBREVIATIONS = {"Mr.", "Mrs.", "Dr.", "St.", "Prof."}

_TERMINALS = ".!?"
_QUOTES = "\"'“”‘’«»"
_SINGLE_INITIAL = re.compile(r"^[A-Z]\.$")


@dataclass(frozen=True)
class Sentence:
    """One sentence of a document, with its byte span into the raw text."""

    doc_id: str
    index: int
    text: str
    char_span: tuple[int, int]

    @property
    def sent_id(self) -> str:
        return f"{self.doc_id}:{self.index}"


@dataclass
class Document:
    doc_id: str
    title: str
    raw_text: str
    source_path: str = ""


@dataclass
class Corpus:
    documents: list[Document] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)


def _normalize_text(text: str) -> str:
    text = unicodedata.normalize("NFC", text)
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    # Collapse intra-paragraph line breaks; keep blank-line paragraph breaks.
    return re.sub(r"(?<!\n)\n(?!\n)", " ", text)


def load_corpus(paths: list[str | Path]) -> Corpus:
    """Load one Document per path, in input order.

    Raises CorpusError naming the offending path when a file is unreadable
    or empty after whitespace stripping.
    """
    documents: list[Document] = []
    seen_ids: set[str] = set()
    for path in paths:
        p = Path(path)
        try:
            raw = p.read_text(encoding="utf-8")
        except OSError as exc:
            raise CorpusError(f"cannot read corpus file {p}: {exc}") from exc
        if not raw.strip():
            raise CorpusError(f"corpus file {p} is empty")
        doc_id = p.stem
        n = 1
        while doc_id in seen_ids:
            n += 1
            doc_id = f"{p.stem}-{n}"
        seen_ids.add(doc_id)
        documents.append(
            Document(doc_id=doc_id, title=p.stem, raw_text=_normalize_text(raw), source_path=str(p))
        )
    return Corpus(documents)


def _is_abbreviation(text: str, dot: int) -> bool:
    """True when the word ending at text[dot] == '.' is in the guard lexicon."""
    start = dot
    while start > 0 and (text[start - 1].isalpha()):
        start -= 1
    word = text[start : dot + 1]
    return word in ABBREVIATIONS or bool(_SINGLE_INITIAL.match(word))


def segment_sentences(document: Document) -> list[Sentence]:
    """Split a document into sentences covering every non-whitespace char.

    A boundary occurs after ``.``, ``!`` or ``?`` followed by whitespace and
    an uppercase letter or quote (unless the period belongs to a known
    abbreviation or single-initial), and at any whitespace gap containing a
    line break.  Quotes and dashes never split on their own.
    """
    text = document.raw_text
    n = len(text)
    spans: list[tuple[int, int]] = []
    pos = 0
    while pos < n:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        start = pos
        end = None
        j = start
        while j < n:
            ch = text[j]
            if ch in _TERMINALS:
                k = j + 1
                while k < n and text[k].isspace():
                    k += 1
                if k == j + 1 and k < n:
                    j += 1  # punctuation not followed by whitespace
                    continue
                if k >= n:
                    end = j + 1
                    break
                if "\n" in text[j + 1 : k]:
                    end = j + 1
                    break
                nxt = text[k]
                if (nxt.isupper() or nxt in _QUOTES) and not (
                    ch == "." and _is_abbreviation(text, j)
                ):
                    end = j + 1
                    break
                j = k
                continue
            if ch.isspace():
                k = j
                while k < n and text[k].isspace():
                    k += 1
                if "\n" in text[j:k]:
                    end = j
                    break
                j = k
                continue
            j += 1
        if end is None:
            end = n
        while end > start and text[end - 1].isspace():
            end -= 1
        spans.append((start, end))
        pos = max(end, pos + 1)
    return [
        Sentence(doc_id=document.doc_id, index=i, text=text[s:e], char_span=(s, e))
        for i, (s, e) in enumerate(spans)
    ]


def sentences_to_tsv(sentences: list[Sentence]) -> str:
    """Serialize sentences as ``doc_id<TAB>index<TAB>text`` lines."""
    lines = [f"{s.doc_id}\t{s.index}\t{s.text}" for s in sentences]
    return "\n".join(lines) + ("\n" if lines else "")

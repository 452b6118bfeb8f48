"""Relational sentence identification and symmetry expansion.

A relational sentence mentions exactly two distinct characters; sentences
whose mentions all share one id (self-relations) or that involve three or
more characters are dropped.  The text between the first occurrence of
each id is the relation evidence, and a bare coordination there ("and",
comma) marks the relation symmetric, producing both directed instances.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from .corpus import Sentence

CHAR_ID = re.compile(r"\bCHAR\d+\b")

#: Tokens that alone make the inter-character span a bare coordination.
COORDINATION = {"and", "or", "nor", ",", "&", "with"}

_INTER_TOKEN = re.compile(r"[A-Za-z]+|[,&]")


@dataclass(frozen=True)
class RelationalInstance:
    """One directed character-pair occurrence in a sentence."""

    instance_id: str
    sent_id: str
    subject: str
    object: str
    inter_text: str
    symmetric: bool
    full_text: str


def _make_id(sent_id: str, subject: str, object_: str) -> str:
    return f"{sent_id}:{subject}>{object_}"


def char_occurrences(text: str) -> list[tuple[str, int, int]]:
    """All CHARn occurrences as (char_id, start, end) in text order."""
    return [(m.group(0), m.start(), m.end()) for m in CHAR_ID.finditer(text)]


def find_relational(sentences: list[Sentence]) -> list[RelationalInstance]:
    """Keep sentences whose set of character ids has size exactly two.

    The first occurrence of each id anchors the pair: the earlier one is
    the subject, the later the object, and inter_text is the exact
    substring between them.
    """
    instances: list[RelationalInstance] = []
    for sentence in sentences:
        occs = char_occurrences(sentence.text)
        distinct = list(dict.fromkeys(cid for cid, _, _ in occs))
        if len(distinct) != 2:
            continue
        first: dict[str, tuple[int, int]] = {}
        for cid, start, end in occs:
            if cid not in first:
                first[cid] = (start, end)
        subject, object_ = distinct
        inter = sentence.text[first[subject][1] : first[object_][0]]
        instances.append(
            RelationalInstance(
                instance_id=_make_id(sentence.sent_id, subject, object_),
                sent_id=sentence.sent_id,
                subject=subject,
                object=object_,
                inter_text=inter,
                symmetric=classify_symmetry_text(inter),
                full_text=sentence.text,
            )
        )
    return instances


def classify_symmetry_text(inter_text: str) -> bool:
    """True when the span is empty or made only of coordination tokens."""
    tokens = [t.lower() for t in _INTER_TOKEN.findall(inter_text)]
    return all(t in COORDINATION for t in tokens)


def classify_symmetry(instance: RelationalInstance) -> str:
    return "symmetric" if classify_symmetry_text(instance.inter_text) else "asymmetric"


def expand(instance: RelationalInstance) -> list[RelationalInstance]:
    """Symmetric instances yield both directions; asymmetric pass through."""
    if not instance.symmetric:
        return [instance]
    flipped = replace(
        instance,
        instance_id=_make_id(instance.sent_id, instance.object, instance.subject),
        subject=instance.object,
        object=instance.subject,
    )
    return [instance, flipped]


def expand_all(instances: list[RelationalInstance]) -> list[RelationalInstance]:
    """Expand a batch, deduplicating on instance_id."""
    seen: dict[str, RelationalInstance] = {}
    for inst in instances:
        for out in expand(inst):
            seen.setdefault(out.instance_id, out)
    return list(seen.values())

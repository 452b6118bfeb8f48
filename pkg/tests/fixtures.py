"""Deterministic fixtures shared by the unit and acceptance tests."""

from __future__ import annotations

import random
from pathlib import Path

from litkg.pipeline import ClusteringSpec, PipelineConfig, ProviderSpec

CHARACTERS = ["Alice", "Brian", "Clara", "Dorian", "Elena", "Felix", "Greta", "Hugo"]

#: Four relation templates; the verb lemma is the ground truth label core.
TEMPLATES = {
    "smile": (
        "{a} smiled at {b} with a broad happy grin {tail}.",
        ["that morning", "once more", "at breakfast"],
    ),
    "talk": (
        "{a} was talking to {b} in a low and urgent whisper {tail}.",
        ["that evening", "for hours", "after supper"],
    ),
    "look": (
        "{a} looked at {b} with narrowed and curious eyes {tail}.",
        ["across the room", "for a moment", "in silence"],
    ),
    "walk": (
        "{a} walked with {b} along the muddy river path {tail}.",
        ["before dusk", "every sunday", "in the rain"],
    ),
}

TEMPLATE_ORDER = ["smile", "talk", "look", "walk"]

#: Distinct per-sentence marker so no two sentences coincide after masking.
ORDINALS = [
    "one", "two", "three", "four", "five", "six", "seven", "eight",
    "nine", "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen",
]


def synthetic_sentences(per_template: int = 15, seed: int = 7) -> tuple[list[str], list[str]]:
    """60 generated sentences over 8 characters; returns (sentences, truth)."""
    rng = random.Random(seed)
    sentences: list[str] = []
    truth: list[str] = []
    for name in TEMPLATE_ORDER:
        pattern, tails = TEMPLATES[name]
        for i in range(per_template):
            a, b = rng.sample(CHARACTERS, 2)
            body = pattern.format(a=a, b=b, tail=tails[i % len(tails)])
            sentences.append(f"{body[:-1]} in chapter {ORDINALS[i % len(ORDINALS)]}.")
            truth.append(name)
    return sentences, truth


def write_synthetic_corpus(tmp_path: Path, seed: int = 7) -> tuple[Path, list[str]]:
    sentences, truth = synthetic_sentences(seed=seed)
    path = tmp_path / "synthetic.txt"
    path.write_text(" ".join(sentences) + "\n", encoding="utf-8")
    return path, truth


def synthetic_config(tmp_path: Path, out_name: str = "run", kmeans_seed: int = 3) -> PipelineConfig:
    corpus_path, _ = write_synthetic_corpus(tmp_path)
    return PipelineConfig(
        inputs=[str(corpus_path)],
        out_dir=str(tmp_path / out_name),
        seed=kmeans_seed,
        gazetteer=list(CHARACTERS),
        embedding=ProviderSpec(kind="builtin-hash", dim=256),
        clustering=ClusteringSpec(algorithm="kmeans", k=4, metric="cosine"),
    )


#: Held-out probes per template, already in canonical CHARn form.
HELD_OUT_PROBES = {
    "smile": [
        "CHAR0 smiled at CHAR3 with a broad happy grin that morning.",
        "CHAR5 smiled at CHAR2 with a broad happy grin once more.",
        "CHAR6 smiled at CHAR1 with a broad happy grin at breakfast.",
    ],
    "talk": [
        "CHAR1 was talking to CHAR4 in a low and urgent whisper that evening.",
        "CHAR7 was talking to CHAR0 in a low and urgent whisper for hours.",
        "CHAR2 was talking to CHAR6 in a low and urgent whisper after supper.",
    ],
    "look": [
        "CHAR3 looked at CHAR7 with narrowed and curious eyes across the room.",
        "CHAR4 looked at CHAR5 with narrowed and curious eyes for a moment.",
        "CHAR0 looked at CHAR2 with narrowed and curious eyes in silence.",
    ],
    "walk": [
        "CHAR2 walked with CHAR1 along the muddy river path before dusk.",
        "CHAR6 walked with CHAR4 along the muddy river path every sunday.",
        "CHAR5 walked with CHAR7 along the muddy river path in the rain.",
    ],
}

#: Lemma each template's extracted label must contain.
TEMPLATE_LEMMAS = {"smile": "smile", "talk": "talk", "look": "look", "walk": "walk"}


SMILE_SENTENCES = [
    "Dumbledore smiled at the look of amazement on Henry's face.",
    "Ron grinned at Henry.",
    "Brooke smiling at Meg as if everything had become possible him now.",
    "Henry stared as Dumbledore sidled back into the picture … gave him a small smile.",
]

SMILE_GAZETTEER = {"Dumbledore", "Henry", "Ron", "Brooke", "Meg"}

#: The summary reported for this cluster by the upstream summarizer.
SMILE_REPORTED_SUMMARY_PREFIX = "smiled at the look of amazement on"


def write_smile_corpus(tmp_path: Path) -> Path:
    path = tmp_path / "smile.txt"
    path.write_text(" ".join(SMILE_SENTENCES) + "\n", encoding="utf-8")
    return path


def write_two_novel_corpus(tmp_path: Path) -> tuple[Path, Path]:
    """Two documents with disjoint casts, each fully relational."""
    first = [
        "Alice smiled at Brian with a broad happy grin that morning.",
        "Clara was talking to Brian in a low and urgent whisper for hours.",
        "Alice walked with Clara along the muddy river path before dusk.",
        "Brian looked at Dorian with narrowed and curious eyes in silence.",
    ]
    second = [
        "Elena smiled at Felix with a broad happy grin once more.",
        "Greta was talking to Hugo in a low and urgent whisper that evening.",
        "Felix walked with Greta along the muddy river path in the rain.",
        "Hugo looked at Elena with narrowed and curious eyes for a moment.",
    ]
    p1 = tmp_path / "novel_one.txt"
    p2 = tmp_path / "novel_two.txt"
    p1.write_text(" ".join(first) + "\n", encoding="utf-8")
    p2.write_text(" ".join(second) + "\n", encoding="utf-8")
    return p1, p2


def two_novel_config(tmp_path: Path) -> PipelineConfig:
    p1, p2 = write_two_novel_corpus(tmp_path)
    return PipelineConfig(
        inputs=[str(p1), str(p2)],
        out_dir=str(tmp_path / "tworun"),
        seed=3,
        gazetteer=list(CHARACTERS),
        embedding=ProviderSpec(kind="builtin-hash", dim=256),
        clustering=ClusteringSpec(algorithm="kmeans", k=4, metric="cosine"),
    )


def random_surface_pool(rng: random.Random) -> list[str]:
    """Name-like surfaces for dealias fuzzing: full names, tokens, initials."""
    firsts = ["Anna", "Arthur", "Ben", "Bella", "Carl", "Cora", "Dan", "Dora"]
    lasts = ["Archer", "Abbott", "Baker", "Barnes", "Carter", "Cole", "Dalton", "Drake"]
    pool: set[str] = set()
    for _ in range(rng.randint(3, 6)):
        f = rng.choice(firsts)
        l = rng.choice(lasts)
        pool.add(f)
        pool.add(l)
        pool.add(f"{f} {l}")
        if rng.random() < 0.5:
            pool.add(f"{f[0]}. {l}")
    return sorted(pool)

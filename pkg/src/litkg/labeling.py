"""Cluster summaries and relation labels.

A cluster is summarized either by an external provider (op "summarize")
or, offline, by its medoid sentence, which keeps the summary a verbatim
member.  The label comes from the verbs found between the two character
ids of the summary sentence: auxiliaries are dropped unless nothing else
remains, a particle that both trails the last verb and abuts the second
mention is appended, and verbs are reduced to lemmas (except -ing forms
that keep their surface when a particle follows, "talking_to").
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

from .clustering import RelationCluster
from .provider import ProviderClient, ProviderError, ProviderHandle
from .relations import CHAR_ID, RelationalInstance, char_occurrences

log = logging.getLogger(__name__)

UNLABELED = "UNLABELED"

#: Common verb lemmas for the heuristic tagger (no full POS model in-core).
VERB_LEXICON = frozenset(
    """
    answer appear arrive ask be beam become begin believe blink blush bow
    breathe bring burst call carry catch change chat chase chuckle climb
    close come cook cough creep cry dance decide do drag draw dream drink
    drive eat enter escape exclaim explain fall feel fetch fight find
    finish fly follow forget forgive freeze frown gasp gather gaze get
    giggle give glance glare go grab greet grin groan grow grumble hang
    happen hate have hear help hesitate hide hit hold hop hope hug hurry
    impress jump keep kick kiss knock know laugh lead lean leap learn
    leave lie like listen live look lose love make marry mean meet mention
    move mumble murmur mutter nod notice obey observe open pace pass pause
    pay play plead point ponder pull push put race reach read realize
    reckon remark remember repeat reply rescue rest return ride ring rise
    roar rub run rush say scream see seem send shake share shiver shout
    show shrug shudder sidle sigh sing sit sleep smile smirk snap snarl
    sneak snort sob speak spin stand stare start stay step stop stretch
    stride stroll study stumble take talk teach tease tell thank think
    throw tiptoe touch tremble trust try turn understand visit wait wake
    walk wander want warn watch wave wear weep whimper whirl whisper win
    wink wish wonder worry write yell
    """.split()
)

#: Inflected or suppletive forms resolved before the suffix rules.
IRREGULAR = {
    "am": "be", "is": "be", "are": "be", "was": "be", "were": "be",
    "been": "be", "being": "be",
    "has": "have", "had": "have", "having": "have",
    "does": "do", "did": "do", "done": "do", "doing": "do",
    "said": "say", "says": "say",
    "went": "go", "gone": "go", "goes": "go",
    "saw": "see", "seen": "see",
    "came": "come", "got": "get", "gotten": "get",
    "gave": "give", "given": "give",
    "took": "take", "taken": "take",
    "told": "tell", "thought": "think", "stood": "stand", "sat": "sit",
    "ran": "run", "fell": "fall", "fallen": "fall", "felt": "feel",
    "knew": "know", "known": "know", "left": "leave", "held": "hold",
    "kept": "keep", "made": "make", "found": "find", "heard": "hear",
    "spoke": "speak", "spoken": "speak", "brought": "bring",
    "began": "begin", "begun": "begin", "wrote": "write", "written": "write",
    "led": "lead", "met": "meet", "lay": "lie", "lain": "lie",
    "froze": "freeze", "frozen": "freeze", "drew": "draw", "drawn": "draw",
    "drank": "drink", "drunk": "drink", "drove": "drive", "driven": "drive",
    "ate": "eat", "eaten": "eat", "fought": "fight", "flew": "fly",
    "flown": "fly", "forgot": "forget", "forgotten": "forget",
    "forgave": "forgive", "forgiven": "forgive", "grew": "grow",
    "grown": "grow", "hung": "hang", "hid": "hide", "hidden": "hide",
    "lost": "lose", "meant": "mean", "paid": "pay", "rode": "ride",
    "ridden": "ride", "rang": "ring", "rung": "ring", "rose": "rise",
    "risen": "rise", "sent": "send", "shook": "shake", "shaken": "shake",
    "sang": "sing", "sung": "sing", "slept": "sleep", "swam": "swim",
    "swum": "swim", "taught": "teach", "threw": "throw", "thrown": "throw",
    "understood": "understand", "woke": "wake", "woken": "wake",
    "wore": "wear", "worn": "wear", "won": "win", "wept": "weep",
    "burst": "burst", "leapt": "leap", "leaped": "leap",
    "stared": "stare",
}

AUXILIARIES = frozenset(
    "be am is are was were been being have has had having do does did doing done".split()
)

#: Particles/prepositions that may ride along behind the final verb.
PARTICLES = frozenset(
    """
    to at with for on in into out up down off about over after against
    around through toward towards upon away back along behind beside past
    under
    """.split()
)

_VOWELS = set("aeiou")
_LABEL_TOKEN = re.compile(r"[A-Za-z']+")


@dataclass
class ClusterSummary:
    cluster_id: int
    summary_text: str
    source: str  # "medoid" or "provider"
    source_instance_id: str | None = None


@dataclass
class RelationLabel:
    cluster_id: int
    label: str
    lemmas: list[str]

    @property
    def unlabeled(self) -> bool:
        return self.label == UNLABELED


def _cvc(stem: str) -> bool:
    if len(stem) < 3:
        return False
    c1, v, c2 = stem[-3], stem[-2], stem[-1]
    return c2 not in _VOWELS and c2 not in "wxy" and v in _VOWELS and c1 not in _VOWELS


def _strip_ed(w: str) -> str:
    stem = w[:-2]
    if stem in VERB_LEXICON:
        return stem
    if w[:-1] in VERB_LEXICON:  # silent e: smiled -> smile
        return w[:-1]
    doubled = len(stem) >= 3 and stem[-1] == stem[-2]
    if doubled and stem[:-1] in VERB_LEXICON:  # grinned -> grin
        return stem[:-1]
    if doubled and stem[-1] not in _VOWELS and stem[-1] not in "ls":
        return stem[:-1]
    if _cvc(stem):
        return stem + "e"
    return stem


def _strip_ing(w: str) -> str:
    stem = w[:-3]
    if stem in VERB_LEXICON:
        return stem
    if stem + "e" in VERB_LEXICON:  # smiling -> smile
        return stem + "e"
    doubled = len(stem) >= 3 and stem[-1] == stem[-2]
    if doubled and stem[:-1] in VERB_LEXICON:  # running -> run
        return stem[:-1]
    if doubled and stem[-1] not in _VOWELS and stem[-1] not in "ls":
        return stem[:-1]
    if _cvc(stem):
        return stem + "e"
    return stem


def _strip_s(w: str) -> str:
    if w.endswith("es"):
        if w[:-1] in VERB_LEXICON:
            return w[:-1]
        if w[:-2] in VERB_LEXICON:
            return w[:-2]
        if w.endswith(("ches", "shes", "sses", "xes", "zes")):
            return w[:-2]
        return w[:-1]
    return w[:-1]


def _lemmatize_once(w: str) -> str:
    if w in IRREGULAR:
        return IRREGULAR[w]
    if w in VERB_LEXICON:
        return w
    if w.endswith("ies") and len(w) > 4:
        return w[:-3] + "y"
    if w.endswith("ed") and len(w) > 3:
        return _strip_ed(w)
    if w.endswith("ing") and len(w) > 4:
        return _strip_ing(w)
    if w.endswith("s") and not w.endswith("ss") and len(w) > 3:
        return _strip_s(w)
    return w


def lemmatize(word: str) -> str:
    """Reduce a lowercase token to a lemma; idempotent by construction."""
    w = word.lower()
    for _ in range(8):
        nxt = _lemmatize_once(w)
        if nxt == w:
            return w
        w = nxt
    return w


def _verb_kind(token: str) -> str | None:
    """Classify a token: "aux", "marked" (inflected), "bare", or None."""
    t = token.lower()
    lemma = lemmatize(t)
    if t in AUXILIARIES:
        return "aux"
    if t in IRREGULAR and lemma in VERB_LEXICON:
        return "marked"
    if t.endswith(("ed", "ing", "s")) and t != lemma and lemma in VERB_LEXICON:
        return "marked"
    if t in VERB_LEXICON:
        return "bare"
    return None


def summarize_cluster(
    cluster: RelationCluster,
    instances: dict[str, RelationalInstance],
    provider: ProviderHandle | None = None,
) -> ClusterSummary:
    """Summarize a cluster's member sentences.

    With a provider, member sentences go out through the wire protocol and
    the returned text is used; any provider failure falls back (logged) to
    the extractive route, the medoid sentence verbatim.
    """
    if not cluster.members:
        raise ValueError(f"cluster {cluster.cluster_id} is empty")
    texts = [instances[m].full_text for m in cluster.members]
    if provider is not None and not provider.is_builtin:
        client = ProviderClient(provider)
        try:
            resp = client.request(
                {"op": "summarize", "id": cluster.cluster_id, "texts": texts}
            )
            summary = resp.get("summary")
            if isinstance(summary, str) and summary.strip():
                return ClusterSummary(
                    cluster_id=cluster.cluster_id,
                    summary_text=summary.strip(),
                    source="provider",
                )
            log.warning("provider returned no summary for cluster %s", cluster.cluster_id)
        except ProviderError as exc:
            log.warning(
                "summarize provider failed for cluster %s (%s); using medoid",
                cluster.cluster_id,
                exc,
            )
        finally:
            client.close()
    return ClusterSummary(
        cluster_id=cluster.cluster_id,
        summary_text=instances[cluster.medoid].full_text,
        source="medoid",
        source_instance_id=cluster.medoid,
    )


def _phrase_between_chars(text: str) -> str | None:
    occs = char_occurrences(text)
    distinct = list(dict.fromkeys(cid for cid, _, _ in occs))
    if len(distinct) < 2:
        return None
    first: dict[str, tuple[int, int]] = {}
    for cid, start, end in occs:
        if cid not in first:
            first[cid] = (start, end)
    a, b = distinct[0], distinct[1]
    return text[first[a][1] : first[b][0]]


def extract_label(summary: ClusterSummary, instance: RelationalInstance) -> RelationLabel:
    """Derive a short relation label from the inter-character phrase.

    Marked (inflected or irregular) verbs win over bare lexicon hits,
    which in turn win over auxiliaries; a particle is appended only when
    it directly follows the final kept verb and ends the phrase, which is
    what keeps "was talking to" -> talking_to while "smiled at the look
    of amazement on" stays smile.
    """
    phrase = _phrase_between_chars(summary.summary_text)
    if phrase is None:
        phrase = instance.inter_text
    phrase = CHAR_ID.sub(" ", phrase)
    tokens = _LABEL_TOKEN.findall(phrase)
    kinds = [_verb_kind(t) for t in tokens]

    marked = [i for i, k in enumerate(kinds) if k == "marked"]
    bare = [i for i, k in enumerate(kinds) if k == "bare"]
    aux = [i for i, k in enumerate(kinds) if k == "aux"]
    kept = marked or bare or aux
    if not kept:
        return RelationLabel(cluster_id=summary.cluster_id, label=UNLABELED, lemmas=[])

    lemmas = [lemmatize(tokens[i]) for i in kept]
    parts = list(lemmas)
    last = kept[-1]
    particle = None
    if last + 1 < len(tokens) and last + 1 == len(tokens) - 1:
        candidate = tokens[last + 1].lower()
        if candidate in PARTICLES:
            particle = candidate
    if particle:
        final = tokens[last].lower()
        if final.endswith("ing"):
            parts[-1] = final  # keep surface: talking_to
        parts.append(particle)
    label = "_".join(re.sub(r"[^a-z]", "", p) for p in parts)
    label = re.sub(r"_+", "_", label).strip("_")
    if not label:
        return RelationLabel(cluster_id=summary.cluster_id, label=UNLABELED, lemmas=[])
    return RelationLabel(cluster_id=summary.cluster_id, label=label, lemmas=lemmas)


def labels_to_tsv(rows: list[tuple[int, str, str]]) -> str:
    """Serialize (cluster_id, label, summary) rows as TSV."""
    lines = [f"{cid}\t{label}\t{summary}" for cid, label, summary in rows]
    return "\n".join(lines) + ("\n" if lines else "")

"""Person mention detection, alias clustering, and corpus canonicalization.

Aliases of one character ("Harry", "Harry Potter", "H. Potter") are merged
by a three-phase procedure: density clustering of surfaces sharing a first
initial under a composite string distance, attachment of leftover surfaces
that are exact tokens of (or close to) an existing cluster, and singleton
fallback.  Every occurrence of a clustered surface is then rewritten to a
stable CHARn identifier, ordered so CHAR0 is the most frequent character.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field

from .corpus import Corpus, Document, Sentence, segment_sentences
from .provider import ProviderClient, ProviderError, ProviderHandle

#: Honorifics never included in a mention surface.
TITLES = {
    "mr",
    "mrs",
    "ms",
    "miss",
    "dr",
    "prof",
    "professor",
    "sir",
    "lady",
    "lord",
    "madam",
    "madame",
    "master",
    "aunt",
    "uncle",
    "st",
}

#: Capitalized function words that are never person names.
STOPWORDS = {
    "i", "the", "a", "an", "and", "but", "or", "nor", "so", "yet", "then",
    "now", "yes", "no", "oh", "well", "if", "it", "its", "he", "she", "they",
    "we", "you", "who", "whom", "what", "when", "where", "why", "how",
    "there", "here", "this", "that", "these", "those", "his", "her", "hers",
    "their", "our", "my", "your", "mine", "in", "on", "at", "with", "for",
    "of", "to", "from", "by", "as", "not", "do", "did", "does", "done",
    "was", "were", "is", "are", "be", "been", "am", "had", "has", "have",
    "will", "would", "could", "should", "may", "might", "must", "shall",
    "let", "all", "some", "any", "one", "two", "after", "before", "while",
    "because", "perhaps", "maybe", "soon", "once", "never", "always",
    "suddenly", "meanwhile", "today", "tomorrow", "yesterday",
}

_NAME_TOKEN = re.compile(r"^[A-Z][A-Za-z'’-]*$")
_INITIAL_TOKEN = re.compile(r"^[A-Z]\.$")
_WORD = re.compile(r"\S+")


@dataclass(frozen=True)
class Mention:
    """A maximal run of person-name tokens in one sentence."""

    sent_id: str
    token_span: tuple[int, int]
    surface: str


@dataclass
class DealiasConfig:
    epsilon: float = 0.3
    min_pts: int = 2
    attach_threshold: float = 0.3

    def validate(self) -> None:
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if self.min_pts < 1:
            raise ValueError(f"min_pts must be >= 1, got {self.min_pts}")


@dataclass
class AliasTable:
    """Partition of mention surfaces into character identities."""

    clusters: dict[str, set[str]] = field(default_factory=dict)
    canonical: dict[str, str] = field(default_factory=dict)
    frequency: dict[str, int] = field(default_factory=dict)

    def character_of(self, surface: str) -> str | None:
        for char_id, surfaces in self.clusters.items():
            if surface in surfaces:
                return char_id
        return None

    def cluster_count(self, char_id: str) -> int:
        return sum(self.frequency.get(s, 0) for s in self.clusters[char_id])

    def to_json_obj(self) -> dict:
        return {
            char_id: {
                "canonical": self.canonical[char_id],
                "aliases": sorted(self.clusters[char_id]),
                "count": self.cluster_count(char_id),
            }
            for char_id in sorted(self.clusters, key=_char_sort_key)
        }


def _char_sort_key(char_id: str) -> tuple[int, str]:
    m = re.fullmatch(r"CHAR(\d+)", char_id)
    return (int(m.group(1)), "") if m else (1 << 30, char_id)


def _clean_token(raw: str, start: int) -> tuple[str, int, int] | None:
    """Strip surrounding punctuation, returning (clean, start, end) char offsets."""
    s, e = 0, len(raw)
    while s < e and not raw[s].isalnum():
        s += 1
    while e > s and not (raw[e - 1].isalnum() or raw[e - 1] == "."):
        e -= 1
    # keep a trailing period only for single-letter initials and known titles
    if e > s and raw[e - 1] == ".":
        word = raw[s:e]
        if not (_INITIAL_TOKEN.match(word) or word[:-1].lower() in TITLES):
            e -= 1
            while e > s and not raw[e - 1].isalnum():
                e -= 1
    if e <= s:
        return None
    clean = raw[s:e]
    # strip possessive so "Henry's" yields the surface "Henry"
    for suffix in ("'s", "’s"):
        if clean.endswith(suffix) and len(clean) > len(suffix):
            clean = clean[: -len(suffix)]
            e -= len(suffix)
            break
    return clean, start + s, start + e


def _tokenize(text: str) -> list[tuple[str, int, int]]:
    tokens = []
    for m in _WORD.finditer(text):
        cleaned = _clean_token(m.group(), m.start())
        if cleaned:
            tokens.append(cleaned)
    return tokens


def _external_tags(tokens: list[str], tagger: ProviderHandle) -> list[bool]:
    client = ProviderClient(tagger)
    try:
        resp = client.request({"op": "tag", "id": 0, "tokens": tokens})
    except ProviderError:
        raise
    finally:
        client.close()
    tags = resp.get("tags")
    if not isinstance(tags, list) or len(tags) != len(tokens):
        raise ProviderError(f"tagger returned {len(tags or [])} tags for {len(tokens)} tokens")
    return [t == "PERSON" for t in tags]


def detect_mentions(
    sentence: Sentence,
    gazetteer: set[str] | None = None,
    tagger: ProviderHandle | None = None,
) -> list[Mention]:
    """Detect person mentions, merging consecutive name tokens into one.

    Without an external tagger the builtin rule applies: capitalized
    non-sentence-initial tokens (minus titles and stopwords) are person
    tokens, gazetteer entries match anywhere, and a capitalized sentence
    opener joins a run when the following token is already a person token.
    """
    tokens = _tokenize(sentence.text)
    if not tokens:
        return []
    words = [t[0] for t in tokens]
    if tagger is not None:
        person = _external_tags(words, tagger)
    else:
        person = []
        for i, word in enumerate(words):
            low = word.lower().rstrip(".")
            if low in TITLES or low in STOPWORDS:
                person.append(False)
                continue
            if gazetteer and word in gazetteer:
                person.append(True)
                continue
            looks_like_name = bool(_NAME_TOKEN.match(word) or _INITIAL_TOKEN.match(word))
            person.append(looks_like_name and i > 0)
        # a capitalized sentence opener joins a directly following person token
        if not person[0] and len(words) > 1 and person[1]:
            w0 = words[0]
            low0 = w0.lower().rstrip(".")
            adjacent = sentence.text[tokens[0][2] : tokens[1][1]].isspace()
            if (
                adjacent
                and (_NAME_TOKEN.match(w0) or _INITIAL_TOKEN.match(w0))
                and low0 not in TITLES
                and low0 not in STOPWORDS
            ):
                person[0] = True

    mentions: list[Mention] = []
    i = 0
    while i < len(tokens):
        if not person[i]:
            i += 1
            continue
        j = i
        # extend run while next token is a person token adjacent across pure whitespace
        while (
            j + 1 < len(tokens)
            and person[j + 1]
            and sentence.text[tokens[j][2] : tokens[j + 1][1]].isspace()
        ):
            j += 1
        surface = sentence.text[tokens[i][1] : tokens[j][2]]
        mentions.append(Mention(sent_id=sentence.sent_id, token_span=(i, j + 1), surface=surface))
        i = j + 1
    return mentions


def normalized_levenshtein(a: str, b: str) -> float:
    """Unit-cost edit distance divided by max(len(a), len(b)); 0 for two empty strings."""
    if not a and not b:
        return 0.0
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a):
        current = [i + 1]
        for j, cb in enumerate(b):
            current.append(min(previous[j + 1] + 1, current[j] + 1, previous[j] + (ca != cb)))
        previous = current
    return previous[-1] / len(a)


def _is_initial_of(short: str, full: str) -> bool:
    return bool(_INITIAL_TOKEN.match(short)) and len(full) > 1 and full[0] == short[0]


def _longest_token(name: str) -> str:
    return sorted(name.split(), key=lambda t: (-len(t), t))[0]


def name_distance(a: str, b: str) -> float:
    """Composite surface distance in [0, 1].

    The full-string normalized edit distance, optionally beaten by the
    distance between the longest tokens of each name.  The token branch is
    guarded: it applies only when one name's token set is contained in the
    other's, or some token of one is a single-letter initial of a token of
    the other ("H." vs "Harry").
    """
    full = normalized_levenshtein(a, b)
    ta, tb = a.split(), b.split()
    if not ta or not tb:
        return full
    guard = set(ta) <= set(tb) or set(tb) <= set(ta)
    if not guard:
        guard = any(
            _is_initial_of(x, y) or _is_initial_of(y, x) for x in set(ta) for y in set(tb)
        )
    if guard:
        return min(full, normalized_levenshtein(_longest_token(a), _longest_token(b)))
    return full


def _dbscan_surfaces(
    surfaces: list[str], epsilon: float, min_pts: int
) -> tuple[list[list[str]], list[str]]:
    """Plain DBSCAN over surfaces with name_distance; returns (clusters, noise)."""
    n = len(surfaces)
    dist = [[name_distance(surfaces[i], surfaces[j]) for j in range(n)] for i in range(n)]
    neigh = [[j for j in range(n) if dist[i][j] <= epsilon] for i in range(n)]
    core = [len(neigh[i]) >= min_pts for i in range(n)]
    label = [-1] * n
    clusters: list[list[str]] = []
    for i in range(n):
        if label[i] != -1 or not core[i]:
            continue
        cid = len(clusters)
        label[i] = cid
        queue = [i]
        while queue:
            p = queue.pop(0)
            if not core[p]:
                continue
            for q in neigh[p]:
                if label[q] == -1:
                    label[q] = cid
                    queue.append(q)
        clusters.append([surfaces[j] for j in range(n) if label[j] == cid])
    noise = [surfaces[i] for i in range(n) if label[i] == -1]
    return clusters, noise


def dealias(
    mentions: list[Mention],
    config: DealiasConfig | None = None,
    overrides: dict[str, str] | None = None,
) -> AliasTable:
    """Cluster mention surfaces into character identities.

    Phase 1 runs DBSCAN separately over surfaces sharing a first initial.
    Phase 2 attaches each leftover surface to the cluster holding an alias
    of which it is an exact token, or any member within attach_threshold.
    Phase 3 makes the rest singletons.  CHARn ids are assigned in
    descending total-frequency order; ties break on the smallest member.
    """
    if not mentions:
        raise ValueError("dealias requires at least one mention")
    config = config or DealiasConfig()
    config.validate()
    frequency = Counter(m.surface for m in mentions)
    surfaces = sorted(frequency)

    by_initial: dict[str, list[str]] = {}
    for s in surfaces:
        by_initial.setdefault(s[0], []).append(s)

    clusters: list[list[str]] = []
    unassigned: list[str] = []
    for initial in sorted(by_initial):
        found, noise = _dbscan_surfaces(by_initial[initial], config.epsilon, config.min_pts)
        clusters.extend(found)
        unassigned.extend(noise)

    def cluster_weight(members: list[str]) -> int:
        return sum(frequency[s] for s in members)

    # phase 2: attach leftovers by exact-token containment, then by distance
    still: list[str] = []
    for s in sorted(unassigned):
        token_hits = [c for c in clusters if any(s in alias.split() for alias in c)]
        if token_hits:
            best = max(token_hits, key=lambda c: (cluster_weight(c), min(c)))
            best.append(s)
            continue
        scored = []
        for c in clusters:
            d = min(name_distance(s, m) for m in c)
            if d <= config.attach_threshold:
                scored.append((d, -cluster_weight(c), min(c), c))
        if scored:
            scored.sort(key=lambda t: t[:3])
            scored[0][3].append(s)
        else:
            still.append(s)

    clusters.extend([s] for s in still)

    # optional manual adjustments, keyed by the frequency-ordered ids below
    if overrides:
        provisional = _assign_ids(clusters, frequency)
        moved: dict[str, str] = {}
        for surface, target in overrides.items():
            if surface in frequency and target in provisional:
                moved[surface] = target
        if moved:
            id_clusters = {cid: set(members) for cid, members in provisional.items()}
            for surface, target in moved.items():
                for members in id_clusters.values():
                    members.discard(surface)
                id_clusters[target].add(surface)
            clusters = [sorted(m) for m in id_clusters.values() if m]

    assigned = _assign_ids(clusters, frequency)
    table = AliasTable(frequency=dict(frequency))
    for char_id, members in assigned.items():
        member_set = set(members)
        table.clusters[char_id] = member_set
        table.canonical[char_id] = _canonical_surface(member_set, frequency)
    return table


def _assign_ids(clusters: list[list[str]], frequency: Counter) -> dict[str, list[str]]:
    ordered = sorted(
        (sorted(set(c)) for c in clusters),
        key=lambda c: (-sum(frequency[s] for s in c), c[0]),
    )
    return {f"CHAR{i}": members for i, members in enumerate(ordered)}


def _canonical_surface(members: set[str], frequency: Counter) -> str:
    anchor = sorted(members, key=lambda s: (-frequency[s], s))[0]
    anchor_tokens = set(anchor.split())
    supersets = [s for s in members if anchor_tokens <= set(s.split())]
    pool = supersets or list(members)
    return sorted(pool, key=lambda s: (-len(s), s))[0]


def parse_override_file(text: str) -> dict[str, str]:
    """Parse override lines of the form ``surface<TAB>CHARn``."""
    overrides: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not re.fullmatch(r"CHAR\d+", parts[1]):
            raise ValueError(f"bad override line {lineno}: {line!r}")
        overrides[parts[0]] = parts[1]
    return overrides


def _surface_pattern(table: AliasTable) -> tuple[re.Pattern | None, dict[str, str]]:
    surface_to_id = {
        surface: char_id for char_id, members in table.clusters.items() for surface in members
    }
    if not surface_to_id:
        return None, surface_to_id
    ordered = sorted(surface_to_id, key=lambda s: (-len(s), s))
    pattern = re.compile(
        r"(?<!\w)(?:" + "|".join(re.escape(s) for s in ordered) + r")(?!\w)"
    )
    return pattern, surface_to_id


def canonicalize(corpus: Corpus, table: AliasTable) -> Corpus:
    """Rewrite every alias occurrence to its CHARn id, longest surface first.

    Returns a new corpus whose documents are rebuilt from the rewritten
    sentences with the original inter-sentence whitespace preserved, so
    sentence counts, ordinals, and span invariants all still hold.
    """
    pattern, surface_to_id = _surface_pattern(table)
    new_docs: list[Document] = []
    for doc in corpus.documents:
        sentences = segment_sentences(doc)
        if pattern is None:
            new_docs.append(
                Document(doc.doc_id, doc.title, doc.raw_text, doc.source_path)
            )
            continue
        pieces: list[str] = []
        cursor = 0
        for sent in sentences:
            start, end = sent.char_span
            pieces.append(doc.raw_text[cursor:start])
            pieces.append(pattern.sub(lambda m: surface_to_id[m.group(0)], sent.text))
            cursor = end
        pieces.append(doc.raw_text[cursor:])
        new_docs.append(
            Document(doc.doc_id, doc.title, "".join(pieces), doc.source_path)
        )
    return Corpus(new_docs)

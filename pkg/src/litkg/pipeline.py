"""End-to-end pipeline: corpus to knowledge graph, with resumable stages.

Every stage writes plain text or JSON artifacts into the output directory,
so a run can be inspected, resumed from any stage, and reproduced: two
runs with the same config, inputs, and builtin providers are byte
identical.  All randomness flows from the single config seed and no
artifact carries a timestamp.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import clustering, corpus as corpus_mod, entities, kg as kg_mod, labeling, relations
from .embeddings import DEFAULT_DIM, VectorCache, embed_batch
from .provider import ProviderError, ProviderHandle

log = logging.getLogger(__name__)

STAGES = ["corpus", "entities", "relations", "embeddings", "clustering", "labeling", "kg"]


class ConfigError(Exception):
    pass


class StageError(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__(f"stage {stage}: {message}")
        self.stage = stage


@dataclass
class ClusteringSpec:
    algorithm: str = "kmeans"
    k: int = 200
    eps: float = 0.5
    min_pts: int = 2
    metric: str = "cosine"
    k_grid: list[int] | None = None


@dataclass
class ProviderSpec:
    kind: str = "builtin-hash"
    endpoint: str = ""
    dim: int | None = None

    def handle(self) -> ProviderHandle:
        return ProviderHandle(kind=self.kind, endpoint=self.endpoint, dim=self.dim)


@dataclass
class PipelineConfig:
    inputs: list[str] = field(default_factory=list)
    out_dir: str = "run"
    seed: int = 0
    gazetteer: list[str] = field(default_factory=list)
    alias_overrides: str | None = None
    dealias: entities.DealiasConfig = field(default_factory=entities.DealiasConfig)
    embedding: ProviderSpec = field(default_factory=lambda: ProviderSpec(dim=DEFAULT_DIM))
    summarization: ProviderSpec | None = None
    tagger: ProviderSpec | None = None
    clustering: ClusteringSpec = field(default_factory=ClusteringSpec)
    classifier_threshold: float = 0.35
    cache_dir: str | None = None

    def validate(self) -> None:
        if not self.inputs:
            raise ConfigError("no input files configured")
        if self.clustering.algorithm not in ("kmeans", "dbscan"):
            raise ConfigError(f"unknown clustering algorithm {self.clustering.algorithm!r}")
        if self.clustering.metric not in ("euclidean", "cosine"):
            raise ConfigError(f"unknown metric {self.clustering.metric!r}")
        if self.clustering.k < 1:
            raise ConfigError("k must be >= 1")
        if not 0 <= self.classifier_threshold <= 2:
            raise ConfigError("classifier threshold must be in [0, 2]")
        try:
            self.dealias.validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def to_json_obj(self) -> dict:
        obj = dataclasses.asdict(self)
        return obj

    @classmethod
    def from_json_obj(cls, obj: dict) -> "PipelineConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(obj)
        if "dealias" in kwargs and isinstance(kwargs["dealias"], dict):
            kwargs["dealias"] = entities.DealiasConfig(**kwargs["dealias"])
        for key in ("embedding", "summarization", "tagger"):
            if isinstance(kwargs.get(key), dict):
                kwargs[key] = ProviderSpec(**kwargs[key])
        if "clustering" in kwargs and isinstance(kwargs["clustering"], dict):
            kwargs["clustering"] = ClusteringSpec(**kwargs["clustering"])
        try:
            config = cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(f"bad config: {exc}") from exc
        return config

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        try:
            obj = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        return cls.from_json_obj(obj)


@dataclass
class RunReport:
    run_id: str = ""
    documents: int = 0
    sentences: int = 0
    relational_sentences: int = 0
    symmetric_sentences: int = 0
    instances: int = 0
    clusters: int = 0
    singleton_fraction: float = 0.0
    noise: int = 0
    unlabeled_clusters: int = 0
    components: int = 0
    silhouette: dict | None = None
    suitable_line: str = ""

    def to_json_obj(self) -> dict:
        return dataclasses.asdict(self)


def _dump_json(path: Path, obj) -> None:
    path.write_text(
        json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )


def _load_json(path: Path):
    return json.loads(path.read_text(encoding="utf-8"))


def _run_id(config: PipelineConfig) -> str:
    # identity covers inputs and parameters, not where the artifacts land
    obj = config.to_json_obj()
    obj.pop("out_dir", None)
    h = hashlib.sha256()
    h.update(json.dumps(obj, sort_keys=True).encode("utf-8"))
    for p in config.inputs:
        try:
            h.update(hashlib.sha256(Path(p).read_bytes()).digest())
        except OSError:
            h.update(b"missing")
    return h.hexdigest()[:12]


class _Artifacts:
    """Paths of the per-stage artifacts inside one run directory."""

    def __init__(self, out_dir: str | Path):
        self.root = Path(out_dir)
        self.config = self.root / "config.json"
        self.sentences = self.root / "sentences.tsv"
        self.alias_table = self.root / "alias_table.json"
        self.canonical = self.root / "canonical_sentences.tsv"
        self.instances = self.root / "instances.jsonl"
        self.embeddings = self.root / "embeddings.jsonl"
        self.assignment = self.root / "assignment.json"
        self.clusters = self.root / "clusters.json"
        self.labels = self.root / "labels.tsv"
        self.graph_json = self.root / "graph.json"
        self.graph_tsv = self.root / "graph.tsv"
        self.graph_dot = self.root / "graph.dot"
        self.report = self.root / "report.json"

    def load_sentences(self, path: Path) -> list[corpus_mod.Sentence]:
        sentences = []
        counters: dict[str, int] = {}
        for line in path.read_text(encoding="utf-8").splitlines():
            if not line:
                continue
            doc_id, index, text = line.split("\t", 2)
            sentences.append(
                corpus_mod.Sentence(
                    doc_id=doc_id,
                    index=int(index),
                    text=text,
                    char_span=(counters.get(doc_id, 0), counters.get(doc_id, 0) + len(text)),
                )
            )
            counters[doc_id] = counters.get(doc_id, 0) + len(text) + 1
        return sentences

    def load_instances(self) -> list[relations.RelationalInstance]:
        out = []
        for line in self.instances.read_text(encoding="utf-8").splitlines():
            if not line:
                continue
            obj = json.loads(line)
            out.append(relations.RelationalInstance(**obj))
        return out

    def load_embeddings(self) -> list[tuple[str, np.ndarray]]:
        out = []
        for line in self.embeddings.read_text(encoding="utf-8").splitlines():
            if not line:
                continue
            obj = json.loads(line)
            out.append((obj["instance_id"], np.asarray(obj["vector"], dtype=np.float64)))
        return out


def run_pipeline(config: PipelineConfig, from_stage: str = "corpus") -> RunReport:
    """Execute the workflow, writing artifacts after every stage.

    from_stage resumes a previous run in the same output directory; the
    earlier artifacts must already exist there.  Stage failures raise
    StageError with the stage name, leaving completed artifacts in place.
    """
    config.validate()
    if from_stage not in STAGES:
        raise ConfigError(f"unknown stage {from_stage!r}; expected one of {STAGES}")
    art = _Artifacts(config.out_dir)
    art.root.mkdir(parents=True, exist_ok=True)
    _dump_json(art.config, config.to_json_obj())
    start = STAGES.index(from_stage)

    def active(stage: str) -> bool:
        return STAGES.index(stage) >= start

    # corpus
    if active("corpus"):
        try:
            corp = corpus_mod.load_corpus(config.inputs)
            sentences = [
                s for doc in corp for s in corpus_mod.segment_sentences(doc)
            ]
        except corpus_mod.CorpusError as exc:
            raise StageError("corpus", str(exc)) from exc
        art.sentences.write_text(
            corpus_mod.sentences_to_tsv(sentences), encoding="utf-8"
        )
    else:
        corp = corpus_mod.load_corpus(config.inputs)

    # entities
    if active("entities"):
        try:
            gazetteer = set(config.gazetteer) or None
            tagger = config.tagger.handle() if config.tagger else None
            mentions = []
            for doc in corp:
                for sent in corpus_mod.segment_sentences(doc):
                    mentions.extend(entities.detect_mentions(sent, gazetteer, tagger))
            overrides = None
            if config.alias_overrides:
                overrides = entities.parse_override_file(
                    Path(config.alias_overrides).read_text(encoding="utf-8")
                )
            if mentions:
                table = entities.dealias(mentions, config.dealias, overrides)
            else:
                table = entities.AliasTable()
            canonical = entities.canonicalize(corp, table)
        except ProviderError as exc:
            raise StageError("entities", f"tagger provider failed: {exc}") from exc
        _dump_json(art.alias_table, table.to_json_obj())
        canon_sentences = [
            s for doc in canonical for s in corpus_mod.segment_sentences(doc)
        ]
        art.canonical.write_text(
            corpus_mod.sentences_to_tsv(canon_sentences), encoding="utf-8"
        )
    else:
        canon_sentences = art.load_sentences(art.canonical)

    # relations
    if active("relations"):
        found = relations.find_relational(canon_sentences)
        expanded = relations.expand_all(found)
        with art.instances.open("w", encoding="utf-8") as fh:
            for inst in expanded:
                fh.write(json.dumps(dataclasses.asdict(inst), sort_keys=True) + "\n")
    else:
        expanded = art.load_instances()

    # embeddings
    if active("embeddings"):
        handle = config.embedding.handle()
        cache = None
        if config.cache_dir and not handle.is_builtin:
            cache = VectorCache(config.cache_dir, handle.provider_id)
        try:
            vectors = embed_batch([i.full_text for i in expanded], handle, cache)
        except ProviderError as exc:
            raise StageError("embeddings", str(exc)) from exc
        with art.embeddings.open("w", encoding="utf-8") as fh:
            for inst, vec in zip(expanded, vectors):
                fh.write(
                    json.dumps(
                        {"instance_id": inst.instance_id, "vector": [float(x) for x in vec]},
                        sort_keys=True,
                    )
                    + "\n"
                )
        embedded = [(i.instance_id, v) for i, v in zip(expanded, vectors)]
    else:
        embedded = art.load_embeddings()

    # clustering
    silhouette_diag: dict | None = None
    if active("clustering"):
        spec = config.clustering
        ids = [iid for iid, _ in embedded]
        points = [vec for _, vec in embedded]
        try:
            if not embedded:
                assignment = clustering.ClusterAssignment(
                    labels={}, k=0, algorithm=spec.algorithm, metric=spec.metric, seed=config.seed
                )
            elif spec.algorithm == "dbscan":
                assignment = clustering.dbscan(
                    points, eps=spec.eps, min_pts=spec.min_pts, metric=spec.metric, ids=ids
                )
            else:
                k = min(spec.k, len({tuple(v) for v in map(tuple, points)}))
                if spec.k_grid:
                    grid = [g for g in spec.k_grid if 2 <= g <= len(points)]
                    if grid:
                        best, silhouette_diag = clustering.select_k(
                            points, grid, seed=config.seed, metric=spec.metric
                        )
                        if silhouette_diag["monotone"]:
                            log.warning(
                                "silhouette scores monotone across grid %s; keeping configured k=%d",
                                grid,
                                k,
                            )
                        else:
                            k = best
                assignment = clustering.kmeans(
                    points, k, metric=spec.metric, seed=config.seed, ids=ids
                )
        except (ValueError, AssertionError) as exc:
            raise StageError("clustering", str(exc)) from exc
        payload = json.loads(assignment.to_json())
        if silhouette_diag is not None:
            payload["selection"] = {
                "scores": {str(k): v for k, v in silhouette_diag["scores"].items()},
                "monotone": silhouette_diag["monotone"],
                "best_k": silhouette_diag["best_k"],
            }
        _dump_json(art.assignment, payload)
    else:
        payload = _load_json(art.assignment)
        assignment = clustering.ClusterAssignment(
            labels={k: int(v) for k, v in payload["labels"].items()},
            k=int(payload["k"]),
            algorithm=payload["algorithm"],
            metric=payload["metric"],
            seed=payload.get("seed"),
            params=payload.get("params", {}),
        )
        silhouette_diag = payload.get("selection")

    # labeling
    instances_by_id = {i.instance_id: i for i in expanded}
    if active("labeling"):
        build = clustering.build_clusters(assignment, embedded)
        provider = config.summarization.handle() if config.summarization else None
        cluster_rows = []
        label_map: dict[int, str] = {}
        vectors_by_id = dict(embedded)
        for cluster in build.clusters:
            summary = labeling.summarize_cluster(cluster, instances_by_id, provider)
            label = labeling.extract_label(summary, instances_by_id[cluster.medoid])
            label_map[cluster.cluster_id] = label.label
            cluster_rows.append(
                {
                    "cluster_id": cluster.cluster_id,
                    "members": cluster.members,
                    "medoid": cluster.medoid,
                    "centroid": [float(x) for x in cluster.centroid],
                    "medoid_vector": [float(x) for x in vectors_by_id[cluster.medoid]],
                    "summary": summary.summary_text,
                    "summary_source": summary.source,
                    "label": label.label,
                    "lemmas": label.lemmas,
                }
            )
        _dump_json(
            art.clusters, {"clusters": cluster_rows, "noise": build.noise}
        )
        art.labels.write_text(
            labeling.labels_to_tsv(
                [(r["cluster_id"], r["label"], r["summary"]) for r in cluster_rows]
            ),
            encoding="utf-8",
        )
    else:
        data = _load_json(art.clusters)
        cluster_rows = data["clusters"]
        label_map = {r["cluster_id"]: r["label"] for r in cluster_rows}

    # kg
    if active("kg"):
        try:
            result = kg_mod.build_graph(
                expanded, assignment, label_map, _table_from_artifact(art)
            )
        except kg_mod.GraphError as exc:
            raise StageError("kg", str(exc)) from exc
        art.graph_json.write_text(kg_mod.export_graph(result.graph, "json"), encoding="utf-8")
        art.graph_tsv.write_text(
            kg_mod.export_graph(result.graph, "triples-tsv"), encoding="utf-8"
        )
        art.graph_dot.write_text(kg_mod.export_graph(result.graph, "dot"), encoding="utf-8")
        graph = result.graph
        noise_count = len(result.noise_instances)
    else:
        graph = kg_mod.graph_from_json(art.graph_json.read_text(encoding="utf-8"))
        noise_count = sum(1 for l in assignment.labels.values() if l == clustering.NOISE)

    report = _build_report(
        config,
        sentences_path=art.sentences,
        instances=expanded,
        assignment=assignment,
        cluster_rows=cluster_rows,
        graph=graph,
        noise_count=noise_count,
        silhouette_diag=silhouette_diag,
    )
    _dump_json(art.report, report.to_json_obj())
    return report


def _table_from_artifact(art: _Artifacts) -> entities.AliasTable | None:
    if not art.alias_table.exists():
        return None
    obj = _load_json(art.alias_table)
    table = entities.AliasTable()
    for char_id, info in obj.items():
        table.clusters[char_id] = set(info["aliases"])
        table.canonical[char_id] = info["canonical"]
    return table


def _build_report(
    config: PipelineConfig,
    sentences_path: Path,
    instances,
    assignment,
    cluster_rows,
    graph,
    noise_count: int,
    silhouette_diag,
) -> RunReport:
    n_sentences = sum(
        1 for line in sentences_path.read_text(encoding="utf-8").splitlines() if line
    )
    relational_sents = {i.sent_id for i in instances}
    symmetric_sents = {i.sent_id for i in instances if i.symmetric}
    sizes = [len(r["members"]) for r in cluster_rows]
    singleton = sum(1 for s in sizes if s == 1)
    report = RunReport(
        run_id=_run_id(config),
        documents=len(config.inputs),
        sentences=n_sentences,
        relational_sentences=len(relational_sents),
        symmetric_sentences=len(symmetric_sents),
        instances=len(instances),
        clusters=len(cluster_rows),
        singleton_fraction=(singleton / len(sizes)) if sizes else 0.0,
        noise=noise_count,
        unlabeled_clusters=sum(1 for r in cluster_rows if r["label"] == labeling.UNLABELED),
        components=len(kg_mod.connected_components(graph)),
        silhouette=silhouette_diag,
        suitable_line=(
            f"{len(relational_sents)} suitable sentences out of {n_sentences}"
        ),
    )
    return report


def stats(out_dir: str | Path) -> RunReport:
    """Recompute the run report from the artifacts in out_dir."""
    art = _Artifacts(out_dir)
    for required in (art.config, art.sentences, art.instances, art.assignment, art.clusters, art.graph_json):
        if not required.exists():
            raise StageError("stats", f"missing artifact {required.name}")
    config = PipelineConfig.from_json_obj(_load_json(art.config))
    instances = art.load_instances()
    payload = _load_json(art.assignment)
    assignment = clustering.ClusterAssignment(
        labels={k: int(v) for k, v in payload["labels"].items()},
        k=int(payload["k"]),
        algorithm=payload["algorithm"],
        metric=payload["metric"],
        seed=payload.get("seed"),
    )
    cluster_rows = _load_json(art.clusters)["clusters"]
    graph = kg_mod.graph_from_json(art.graph_json.read_text(encoding="utf-8"))
    noise = sum(1 for v in assignment.labels.values() if v == clustering.NOISE)
    return _build_report(
        config,
        sentences_path=art.sentences,
        instances=instances,
        assignment=assignment,
        cluster_rows=cluster_rows,
        graph=graph,
        noise_count=noise,
        silhouette_diag=payload.get("selection"),
    )


def run_eps_sweep(out_dir: str | Path, eps_values: list[float], min_pts: int = 1) -> list[dict]:
    """DBSCAN eps sweep over a finished run's embeddings; writes eps_sweep.json."""
    art = _Artifacts(out_dir)
    if not art.embeddings.exists():
        raise StageError("sweep", "missing embeddings artifact")
    config = PipelineConfig.from_json_obj(_load_json(art.config))
    embedded = art.load_embeddings()
    rows = clustering.eps_sweep(
        [v for _, v in embedded],
        eps_values,
        min_pts=min_pts,
        metric=config.clustering.metric,
    )
    _dump_json(art.root / "eps_sweep.json", rows)
    return rows

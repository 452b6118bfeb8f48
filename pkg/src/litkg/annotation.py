"""Human review of relation clusters and the semi-supervised classifier.

Annotations land in an append-only JSONL log next to the run artifacts
(plus a compacted snapshot), so they survive crashes and diff cleanly.
Validated and edited cluster labels become a nearest-centroid classifier:
a sentence within the distance threshold of a validated centroid gets
that human label, anything else falls back to the nearest cluster's
automatic label.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .embeddings import cosine_distance, hash_embed
from .pipeline import PipelineConfig, _Artifacts, _load_json
from .provider import ProviderClient, ProviderError, ProviderHandle

VALID_DECISIONS = ("validate", "edit", "reject")
STATUSES = ("pending", "validated", "edited", "rejected")


class AnnotationError(Exception):
    pass


class ClusterNotFound(AnnotationError):
    pass


@dataclass
class Annotation:
    cluster_id: int
    status: str
    final_label: str
    note: str = ""
    timestamp: float = 0.0
    version: int = 1
    conflict: bool = False


@dataclass
class ClusterView:
    cluster_id: int
    label: str
    summary: str
    summary_source: str
    size: int
    status: str
    final_label: str | None
    version: int
    members: list[dict] = field(default_factory=list)


class AnnotationStore:
    """Append-only annotation log with a compacted snapshot."""

    def __init__(self, run_dir: str | Path):
        self.root = Path(run_dir)
        self.log_path = self.root / "annotations.log"
        self.snapshot_path = self.root / "annotations.json"
        self._lock = threading.Lock()
        self._state: dict[int, Annotation] = {}
        self._replay()

    def _replay(self) -> None:
        if not self.log_path.exists():
            return
        for line in self.log_path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            obj = json.loads(line)
            self._state[int(obj["cluster_id"])] = Annotation(**obj)

    def get(self, cluster_id: int) -> Annotation | None:
        return self._state.get(cluster_id)

    def all(self) -> dict[int, Annotation]:
        return dict(self._state)

    def record(self, annotation: Annotation) -> None:
        with self._lock:
            current = self._state.get(annotation.cluster_id)
            annotation.version = (current.version + 1) if current else 1
            self._state[annotation.cluster_id] = annotation
            with self.log_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(asdict(annotation), sort_keys=True) + "\n")
            tmp = self.snapshot_path.with_suffix(".json.tmp")
            tmp.write_text(
                json.dumps(
                    {str(cid): asdict(a) for cid, a in sorted(self._state.items())},
                    sort_keys=True,
                    indent=2,
                )
                + "\n",
                encoding="utf-8",
            )
            tmp.replace(self.snapshot_path)


@dataclass
class ClassifierEntry:
    """One cluster's prototypes: the centroid plus the medoid embedding.

    The medoid rides along so a sentence identical to a cluster's medoid
    classifies at distance exactly 0, which a bare centroid cannot give
    once members differ.
    """

    cluster_id: int
    label: str
    prototypes: list[np.ndarray]

    def distance(self, vector: np.ndarray) -> float:
        return min(cosine_distance(vector, p) for p in self.prototypes)


@dataclass
class RelationClassifier:
    """Nearest-prototype relation classifier over validated clusters."""

    validated: list[ClassifierEntry]
    fallback: list[ClassifierEntry]
    threshold: float

    def classify_vector(self, vector: np.ndarray) -> tuple[str, str, float]:
        if self.validated:
            scored = sorted(
                (e.distance(vector), e.cluster_id, e.label) for e in self.validated
            )
            dist, _, label = scored[0]
            if dist <= self.threshold:
                return label, "validated", dist
        if not self.fallback:
            raise AnnotationError("no clusters available to classify against")
        scored = sorted(
            (e.distance(vector), e.cluster_id, e.label) for e in self.fallback
        )
        dist, _, label = scored[0]
        return label, "automatic", dist


class AnnotationService:
    """Read-mostly facade over one finished run plus its annotation store."""

    def __init__(self, run_dir: str | Path):
        self.run_dir = Path(run_dir)
        art = _Artifacts(self.run_dir)
        for required in (art.config, art.clusters, art.instances, art.report):
            if not required.exists():
                raise AnnotationError(f"run artifact missing: {required.name}")
        self.config = PipelineConfig.from_json_obj(_load_json(art.config))
        self.report = _load_json(art.report)
        self.run_id = self.report.get("run_id", "")
        data = _load_json(art.clusters)
        self.clusters: dict[int, dict] = {int(r["cluster_id"]): r for r in data["clusters"]}
        self.noise: list[str] = data.get("noise", [])
        self.instances = {
            json.loads(line)["instance_id"]: json.loads(line)
            for line in art.instances.read_text(encoding="utf-8").splitlines()
            if line
        }
        self.graph_json = art.graph_json.read_text(encoding="utf-8") if art.graph_json.exists() else "{}"
        self.graph_dot = art.graph_dot.read_text(encoding="utf-8") if art.graph_dot.exists() else ""
        self.alias_table = _load_json(art.alias_table) if art.alias_table.exists() else {}
        self.store = AnnotationStore(self.run_dir)
        self._classifier: RelationClassifier | None = None
        self._classifier_lock = threading.Lock()
        self._stale = True

    # -- cluster views ----------------------------------------------------
    def _view(self, row: dict, with_members: bool = True) -> ClusterView:
        cid = int(row["cluster_id"])
        annotation = self.store.get(cid)
        status = annotation.status if annotation else "pending"
        members = []
        if with_members:
            for iid in row["members"]:
                inst = self.instances.get(iid, {})
                members.append(
                    {
                        "instance_id": iid,
                        "sent_id": inst.get("sent_id", ""),
                        "text": inst.get("full_text", ""),
                        "subject": inst.get("subject", ""),
                        "object": inst.get("object", ""),
                    }
                )
        return ClusterView(
            cluster_id=cid,
            label=row["label"],
            summary=row["summary"],
            summary_source=row["summary_source"],
            size=len(row["members"]),
            status=status,
            final_label=annotation.final_label if annotation else None,
            version=annotation.version if annotation else 0,
            members=members,
        )

    def list_clusters(
        self,
        status: str | None = None,
        sort: str = "cluster_id",
        page: int = 1,
        page_size: int = 20,
    ) -> dict:
        if status is not None and status not in STATUSES:
            raise AnnotationError(f"unknown status filter {status!r}")
        if sort not in ("size", "cluster_id"):
            raise AnnotationError(f"unknown sort {sort!r}")
        views = [self._view(row, with_members=False) for _, row in sorted(self.clusters.items())]
        if status is not None:
            views = [v for v in views if v.status == status]
        if sort == "size":
            views.sort(key=lambda v: (-v.size, v.cluster_id))
        total = len(views)
        pages = max(1, -(-total // page_size))
        page = max(1, min(page, pages))
        window = views[(page - 1) * page_size : page * page_size]
        return {
            "run_id": self.run_id,
            "page": page,
            "pages": pages,
            "total": total,
            "clusters": [asdict(v) for v in window],
        }

    def get_cluster(self, cluster_id: int) -> dict:
        if cluster_id not in self.clusters:
            raise ClusterNotFound(f"no cluster {cluster_id}")
        return asdict(self._view(self.clusters[cluster_id]))

    # -- annotation --------------------------------------------------------
    def annotate(
        self,
        cluster_id: int,
        decision: str,
        label: str | None = None,
        note: str = "",
        expected_version: int | None = None,
    ) -> Annotation:
        if cluster_id not in self.clusters:
            raise ClusterNotFound(f"no cluster {cluster_id}")
        if decision not in VALID_DECISIONS:
            raise AnnotationError(f"unknown decision {decision!r}")
        automatic = self.clusters[cluster_id]["label"]
        if decision == "validate":
            status, final = "validated", automatic
        elif decision == "reject":
            status, final = "rejected", ""
        else:
            if not label or not label.strip():
                raise AnnotationError("edit decision requires a label")
            final = label.strip()
            # an edit that leaves the automatic label unchanged is a validation
            status = "edited" if final != automatic else "validated"
        current = self.store.get(cluster_id)
        conflict = (
            expected_version is not None
            and current is not None
            and current.version != expected_version
        )
        annotation = Annotation(
            cluster_id=cluster_id,
            status=status,
            final_label=final,
            note=note,
            timestamp=time.time(),
            conflict=conflict,
        )
        self.store.record(annotation)
        self._stale = True
        return annotation

    # -- classifier ---------------------------------------------------------
    def _build_classifier(self) -> RelationClassifier:
        validated = []
        fallback = []
        for cid, row in sorted(self.clusters.items()):
            prototypes = [np.asarray(row["centroid"], dtype=np.float64)]
            if row.get("medoid_vector"):
                prototypes.append(np.asarray(row["medoid_vector"], dtype=np.float64))
            fallback.append(ClassifierEntry(cluster_id=cid, label=row["label"], prototypes=prototypes))
            annotation = self.store.get(cid)
            if annotation and annotation.status in ("validated", "edited"):
                validated.append(
                    ClassifierEntry(
                        cluster_id=cid, label=annotation.final_label, prototypes=prototypes
                    )
                )
        return RelationClassifier(
            validated=validated,
            fallback=fallback,
            threshold=self.config.classifier_threshold,
        )

    def classifier(self) -> RelationClassifier:
        with self._classifier_lock:
            if self._classifier is None or self._stale:
                self._classifier = self._build_classifier()
                self._stale = False
            return self._classifier

    def _embed(self, text: str) -> np.ndarray:
        handle = self.config.embedding.handle()
        if handle.is_builtin:
            return hash_embed(text, handle.dim or 256)
        client = ProviderClient(handle)
        try:
            dim = handle.dim or client.dim()
            resp = client.request({"op": "embed", "id": 0, "text": text})
            vec = np.asarray(resp.get("vector", []), dtype=np.float64)
            if vec.shape != (dim,):
                raise ProviderError(f"provider returned dim {vec.shape}, expected {dim}")
            return vec
        finally:
            client.close()

    def classify(self, text: str) -> dict:
        vector = self._embed(text)
        label, source, distance = self.classifier().classify_vector(vector)
        return {
            "run_id": self.run_id,
            "label": label,
            "source": source,
            "distance": distance,
        }

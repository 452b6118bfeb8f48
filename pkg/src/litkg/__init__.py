"""Knowledge-graph extraction from literary text.

The pipeline turns raw novel files into (character, relation, character)
triplets: person mentions are detected and dealiased into stable CHARn
identities, sentences mentioning exactly two characters are embedded and
clustered into relation types, each cluster is summarized and labeled from
the verbs between the two mentions, and the resulting edges are assembled
into an exportable graph.  A small annotation service turns human-validated
cluster labels into a nearest-centroid relation classifier.
"""

__version__ = "0.1.0"

from .corpus import Corpus, Document, Sentence, load_corpus, segment_sentences
from .entities import (
    AliasTable,
    DealiasConfig,
    Mention,
    canonicalize,
    dealias,
    detect_mentions,
    name_distance,
    normalized_levenshtein,
)
from .relations import RelationalInstance, classify_symmetry, expand, find_relational
from .embeddings import cosine_distance, embed_batch, euclidean_distance, hash_embed
from .provider import ProviderError, ProviderHandle
from .clustering import (
    NOISE,
    ClusterAssignment,
    RelationCluster,
    build_clusters,
    dbscan,
    eps_sweep,
    kmeans,
    select_k,
    silhouette,
)
from .labeling import ClusterSummary, RelationLabel, extract_label, lemmatize, summarize_cluster
from .kg import KnowledgeGraph, Triplet, build_graph, connected_components, export_graph
from .pipeline import PipelineConfig, RunReport, run_pipeline

__all__ = [
    "AliasTable",
    "ClusterAssignment",
    "ClusterSummary",
    "Corpus",
    "DealiasConfig",
    "Document",
    "KnowledgeGraph",
    "Mention",
    "NOISE",
    "PipelineConfig",
    "ProviderError",
    "ProviderHandle",
    "RelationCluster",
    "RelationLabel",
    "RelationalInstance",
    "RunReport",
    "Sentence",
    "Triplet",
    "build_clusters",
    "build_graph",
    "canonicalize",
    "classify_symmetry",
    "connected_components",
    "cosine_distance",
    "dbscan",
    "dealias",
    "detect_mentions",
    "embed_batch",
    "eps_sweep",
    "euclidean_distance",
    "expand",
    "export_graph",
    "extract_label",
    "find_relational",
    "hash_embed",
    "kmeans",
    "lemmatize",
    "load_corpus",
    "name_distance",
    "normalized_levenshtein",
    "run_pipeline",
    "segment_sentences",
    "select_k",
    "silhouette",
    "summarize_cluster",
]

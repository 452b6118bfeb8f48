"""Knowledge graph assembly and serialization.

Edges are directed (subject, relation label, object) triplets carrying
their sentence provenance; duplicates merge into the edge weight.  Nodes
are the characters participating in at least one edge, displayed by their
canonical alias.  Exports: sorted TSV, round-trippable JSON, and DOT.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .clustering import NOISE, ClusterAssignment
from .entities import AliasTable
from .relations import RelationalInstance


class GraphError(Exception):
    """Raised when the graph cannot be assembled or exported."""


@dataclass(frozen=True)
class Triplet:
    subject: str
    relation: str
    object: str
    provenance: tuple[tuple[str, str], ...]  # (sent_id, instance_id)

    @property
    def weight(self) -> int:
        return len(self.provenance)


@dataclass
class KnowledgeGraph:
    nodes: dict[str, dict] = field(default_factory=dict)
    edges: list[Triplet] = field(default_factory=list)


def _char_key(char_id: str) -> tuple[int, str]:
    m = re.fullmatch(r"CHAR(\d+)", char_id)
    return (int(m.group(1)), "") if m else (1 << 30, char_id)


@dataclass
class GraphBuild:
    graph: KnowledgeGraph
    noise_instances: list[str]


def build_graph(
    instances: list[RelationalInstance],
    assignment: ClusterAssignment,
    labels: dict[int, str],
    alias_table: AliasTable | None = None,
) -> GraphBuild:
    """Aggregate clustered instances into one edge per (subject, label, object).

    Every non-noise cluster must have a label; NOISE instances are excluded
    from the graph and reported back so nothing silently disappears.
    """
    groups: dict[tuple[str, str, str], list[tuple[str, str]]] = {}
    noise: list[str] = []
    for inst in instances:
        if inst.instance_id not in assignment.labels:
            raise GraphError(f"instance {inst.instance_id} missing from assignment")
        cluster = assignment.labels[inst.instance_id]
        if cluster == NOISE:
            noise.append(inst.instance_id)
            continue
        if cluster not in labels:
            raise GraphError(f"no label for cluster {cluster}")
        key = (inst.subject, labels[cluster], inst.object)
        groups.setdefault(key, []).append((inst.sent_id, inst.instance_id))
    edges = [
        Triplet(subject=s, relation=r, object=o, provenance=tuple(sorted(prov)))
        for (s, r, o), prov in groups.items()
    ]
    edges.sort(key=lambda e: (e.subject, e.relation, e.object))
    graph = KnowledgeGraph()
    for edge in edges:
        for endpoint in (edge.subject, edge.object):
            if endpoint not in graph.nodes:
                info = {"canonical": endpoint, "aliases": []}
                if alias_table is not None and endpoint in alias_table.clusters:
                    info = {
                        "canonical": alias_table.canonical[endpoint],
                        "aliases": sorted(alias_table.clusters[endpoint]),
                    }
                graph.nodes[endpoint] = info
    graph.edges = edges
    graph.nodes = {k: graph.nodes[k] for k in sorted(graph.nodes, key=_char_key)}
    return GraphBuild(graph=graph, noise_instances=sorted(noise))


def connected_components(kg: KnowledgeGraph) -> list[list[str]]:
    """Undirected components, each sorted, ordered by smallest character id."""
    adjacency: dict[str, set[str]] = {node: set() for node in kg.nodes}
    for edge in kg.edges:
        adjacency[edge.subject].add(edge.object)
        adjacency[edge.object].add(edge.subject)
    seen: set[str] = set()
    components: list[list[str]] = []
    for start in sorted(adjacency, key=_char_key):
        if start in seen:
            continue
        stack, comp = [start], []
        seen.add(start)
        while stack:
            node = stack.pop()
            comp.append(node)
            for nxt in sorted(adjacency[node], key=_char_key):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        components.append(sorted(comp, key=_char_key))
    components.sort(key=lambda c: _char_key(c[0]))
    return components


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_graph(kg: KnowledgeGraph, fmt: str) -> str:
    """Serialize the graph as "triples-tsv", "json", or "dot"."""
    if fmt == "triples-tsv":
        lines = ["subject\trelation\tobject\tweight"]
        for e in sorted(kg.edges, key=lambda e: (e.subject, e.relation, e.object)):
            lines.append(f"{e.subject}\t{e.relation}\t{e.object}\t{e.weight}")
        return "\n".join(lines) + "\n"
    if fmt == "json":
        obj = {
            "nodes": kg.nodes,
            "edges": [
                {
                    "subject": e.subject,
                    "relation": e.relation,
                    "object": e.object,
                    "weight": e.weight,
                    "provenance": [list(p) for p in e.provenance],
                }
                for e in kg.edges
            ],
        }
        return json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=2) + "\n"
    if fmt == "dot":
        lines = ["digraph relations {"]
        for node in sorted(kg.nodes, key=_char_key):
            label = kg.nodes[node].get("canonical", node)
            lines.append(f"  {_dot_quote(node)} [label={_dot_quote(label)}];")
        for e in sorted(kg.edges, key=lambda e: (e.subject, e.relation, e.object)):
            lines.append(
                f"  {_dot_quote(e.subject)} -> {_dot_quote(e.object)} "
                f"[label={_dot_quote(e.relation)}, weight={e.weight}];"
            )
        lines.append("}")
        return "\n".join(lines) + "\n"
    raise GraphError(f"unknown export format {fmt!r}")


def graph_from_json(text: str) -> KnowledgeGraph:
    obj = json.loads(text)
    kg = KnowledgeGraph()
    kg.nodes = {k: obj["nodes"][k] for k in sorted(obj["nodes"], key=_char_key)}
    kg.edges = [
        Triplet(
            subject=e["subject"],
            relation=e["relation"],
            object=e["object"],
            provenance=tuple((p[0], p[1]) for p in e["provenance"]),
        )
        for e in obj["edges"]
    ]
    kg.edges.sort(key=lambda e: (e.subject, e.relation, e.object))
    return kg

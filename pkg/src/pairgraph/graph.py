"""Complex-weighted multigraph representation of a pair-source experiment.

Every optical output path is a *vertex set*; the vertices inside it are the
mode labels a photon in that path can carry.  An edge is one photon-pair
correlation with a complex amplitude.  Graphs are immutable: every operation
returns a new :class:`ExperimentGraph`.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field, replace
from typing import Hashable, Iterable, Sequence

import numpy as np

ModeLabel = Hashable

#: Canonical integer encoding of polarization labels.
POLARIZATION = {"H": 0, "V": 1}
TRIGGER = "T"


class GraphError(ValueError):
    """Raised for structurally invalid graph operations."""


def label_key(label: ModeLabel) -> tuple:
    """Total order over mixed label types (integers first, then H/V, then T)."""
    if isinstance(label, (int, np.integer)) and not isinstance(label, bool):
        return (0, int(label), "")
    if label in POLARIZATION:
        return (1, POLARIZATION[label], "")
    if label == TRIGGER:
        return (2, 0, "")
    return (3, 0, str(label))


def format_label(label: ModeLabel) -> str:
    return str(label)


@dataclass(frozen=True)
class Vertex:
    path: str
    label: ModeLabel
    instance: int = 0

    def key(self, order: dict[str, int] | None = None) -> tuple:
        p = order[self.path] if order is not None else self.path
        return (p, label_key(self.label), self.instance)

    def __str__(self) -> str:
        s = f"{self.path}:{format_label(self.label)}"
        return s if self.instance == 0 else f"{s}#{self.instance}"


@dataclass(frozen=True)
class Edge:
    u: Vertex
    v: Vertex
    weight: complex
    tag: str | None = None

    def endpoints(self) -> tuple[Vertex, Vertex]:
        return self.u, self.v

    def scaled(self, factor: complex) -> "Edge":
        return replace(self, weight=self.weight * factor)

    def __str__(self) -> str:
        w = self.weight
        t = f" [{self.tag}]" if self.tag else ""
        return f"{self.u} -- {self.v}  ({w.real:+.6g}{w.imag:+.6g}j){t}"


def make_edge(u: Vertex, v: Vertex, weight: complex, tag: str | None = None) -> Edge:
    """Build an edge with canonical endpoint order and instance indices.

    Instance indices are recomputed: two endpoints sharing path and label get
    instances 0 and 1, everything else gets 0.
    """
    u = Vertex(u.path, u.label)
    v = Vertex(v.path, v.label)
    if (u.path, label_key(u.label)) > (v.path, label_key(v.label)):
        u, v = v, u
    if u == v:
        v = Vertex(v.path, v.label, 1)
    return Edge(u, v, complex(weight), tag)


@dataclass(frozen=True)
class ExperimentGraph:
    paths: tuple[str, ...] = ()
    edges: tuple[Edge, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if len(set(self.paths)) != len(self.paths):
            raise GraphError(f"duplicate path ids in {self.paths}")
        known = set(self.paths)
        for e in self.edges:
            for x in e.endpoints():
                if x.path not in known:
                    raise GraphError(f"edge endpoint on unknown path {x.path!r}")

    @property
    def path_index(self) -> dict[str, int]:
        return {p: i for i, p in enumerate(self.paths)}

    def with_edges(self, edges: Iterable[Edge]) -> "ExperimentGraph":
        return ExperimentGraph(self.paths, tuple(edges))

    def require_path(self, *paths: str) -> None:
        for p in paths:
            if p not in self.paths:
                raise GraphError(f"unknown path {p!r}")

    def labels(self, path: str) -> list[ModeLabel]:
        """Distinct labels present on ``path``, in canonical order."""
        found = {x.label for e in self.edges for x in e.endpoints() if x.path == path}
        return sorted(found, key=label_key)

    def canonical_edges(self) -> list[Edge]:
        """Edges sorted by (min endpoint, max endpoint, tag)."""
        order = self.path_index

        def key(e: Edge):
            return (e.u.key(order), e.v.key(order), e.tag or "")

        return sorted(self.edges, key=key)

    def __str__(self) -> str:
        lines = [f"paths: {' '.join(self.paths)}"]
        lines += [f"  {e}" for e in self.canonical_edges()]
        return "\n".join(lines)


def empty_graph() -> ExperimentGraph:
    return ExperimentGraph()


def add_path(g: ExperimentGraph, p: str) -> ExperimentGraph:
    if p in g.paths:
        raise GraphError(f"duplicate path id {p!r}")
    return ExperimentGraph(g.paths + (p,), g.edges)


def graph_with_paths(paths: Iterable[str]) -> ExperimentGraph:
    g = empty_graph()
    for p in paths:
        g = add_path(g, p)
    return g


def add_crystal(
    g: ExperimentGraph,
    path1: str,
    label1: ModeLabel,
    path2: str,
    label2: ModeLabel,
    amp: complex,
    tag: str | None = None,
) -> ExperimentGraph:
    """Append the edge created by one pair source; parallel edges stay separate."""
    g.require_path(path1, path2)
    e = make_edge(Vertex(path1, label1), Vertex(path2, label2), amp, tag)
    return g.with_edges(g.edges + (e,))


def polar(g_amp: float, phase: float) -> complex:
    return g_amp * cmath.exp(1j * phase)


def _check_single_label(g: ExperimentGraph, paths: Sequence[str]) -> None:
    for p in paths:
        if len(g.labels(p)) > 1:
            raise GraphError(f"path {p!r} carries several labels; adjacency view undefined")


def adjacency_matrix(g: ExperimentGraph, ordering: Sequence[str] | None = None) -> np.ndarray:
    """Summed edge weights between the listed paths.

    Only valid in the crystal-network regime where every path carries a single
    label.  Same-path edges land on the diagonal.
    """
    ordering = list(g.paths if ordering is None else ordering)
    if len(set(ordering)) != len(ordering):
        raise GraphError(f"duplicated path in ordering {ordering}")
    g.require_path(*ordering)
    _check_single_label(g, ordering)
    idx = {p: i for i, p in enumerate(ordering)}
    m = np.zeros((len(ordering), len(ordering)), dtype=complex)
    for e in g.edges:
        i, j = idx.get(e.u.path), idx.get(e.v.path)
        if i is None or j is None:
            continue
        if i == j:
            m[i, i] += e.weight
        else:
            m[i, j] += e.weight
            m[j, i] += e.weight
    return m


def induced_subgraph(g: ExperimentGraph, paths: Iterable[str]) -> ExperimentGraph:
    keep = list(paths)
    g.require_path(*keep)
    ks = set(keep)
    ordered = tuple(p for p in g.paths if p in ks)
    edges = tuple(e for e in g.edges if e.u.path in ks and e.v.path in ks)
    return ExperimentGraph(ordered, edges)

"""Linear-optical elements as rewrites of an :class:`ExperimentGraph`.

Every element acts photon by photon, so each rule is written for a single
edge endpoint: it returns the list of places that photon can end up in,
together with the amplitude picked up on the way.  An edge is replaced by the
product of its endpoints' alternatives.  Descendants of one parent edge that
land on identical endpoints are summed (this is where HOM-type cancellation
happens) and near-zero results are pruned.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .graph import (
    POLARIZATION,
    TRIGGER,
    Edge,
    ExperimentGraph,
    GraphError,
    ModeLabel,
    Vertex,
    make_edge,
)

PRUNE_THRESHOLD = 1e-12

# 50:50 splitter: transmission 1/sqrt2, reflection i/sqrt2
T_AMP = 1 / math.sqrt(2)
R_AMP = 1j / math.sqrt(2)

Alternatives = list[tuple[Vertex, complex]]
EndpointRule = Callable[[Vertex], Alternatives]


def _rewrite(
    g: ExperimentGraph, rule: EndpointRule, threshold: float = PRUNE_THRESHOLD
) -> ExperimentGraph:
    out: list[Edge] = []
    for e in g.edges:
        merged: dict[tuple, complex] = {}
        for (u, fu), (v, fv) in itertools.product(rule(e.u), rule(e.v)):
            d = make_edge(u, v, 1, e.tag)
            merged[(d.u, d.v)] = merged.get((d.u, d.v), 0) + e.weight * fu * fv
        out.extend(
            Edge(u, v, w, e.tag) for (u, v), w in merged.items() if abs(w) >= threshold
        )
    return g.with_edges(out)


def apply_phase_shifter(
    g: ExperimentGraph, path: str, phi: float, threshold: float = PRUNE_THRESHOLD
) -> ExperimentGraph:
    g.require_path(path)
    factor = cmath.exp(1j * phi)

    def rule(x: Vertex) -> Alternatives:
        return [(x, factor)] if x.path == path else [(x, 1)]

    return _rewrite(g, rule, threshold)


def mirror(label: ModeLabel) -> ModeLabel:
    """Reflection flips the sign of an OAM value; other labels are unchanged."""
    if isinstance(label, int):
        return -label
    return label


def apply_beam_splitter(
    g: ExperimentGraph,
    path_v: str,
    path_w: str,
    reflect_labels: Callable[[ModeLabel], ModeLabel] | None = None,
    threshold: float = PRUNE_THRESHOLD,
) -> ExperimentGraph:
    """50:50 beam splitter between two paths.

    A photon on either input transmits to the other path (amplitude 1/sqrt2)
    or reflects back into its own path (amplitude i/sqrt2).  With
    ``reflect_labels`` the reflected photon's label is also transformed, e.g.
    :func:`mirror` for OAM.
    """
    g.require_path(path_v, path_w)
    other = {path_v: path_w, path_w: path_v}
    refl = reflect_labels or (lambda lab: lab)

    def rule(x: Vertex) -> Alternatives:
        if x.path not in other:
            return [(x, 1)]
        return [
            (Vertex(other[x.path], x.label), T_AMP),
            (Vertex(x.path, refl(x.label)), R_AMP),
        ]

    return _rewrite(g, rule, threshold)


def apply_pbs(
    g: ExperimentGraph, path_v: str, path_w: str, threshold: float = PRUNE_THRESHOLD
) -> ExperimentGraph:
    """Polarizing beam splitter: H transmits to the partner path, V reflects with phase i."""
    g.require_path(path_v, path_w)
    other = {path_v: path_w, path_w: path_v}

    def rule(x: Vertex) -> Alternatives:
        if x.path not in other:
            return [(x, 1)]
        if x.label not in POLARIZATION:
            raise GraphError(f"PBS input {x} does not carry a polarization label")
        if x.label == "H":
            return [(Vertex(other[x.path], "H"), 1)]
        return [(x, 1j)]

    return _rewrite(g, rule, threshold)


@dataclass(frozen=True)
class AffineMap:
    """Integer label map ``l -> scale*l + offset``."""

    scale: int
    offset: int

    def __call__(self, label: ModeLabel) -> ModeLabel:
        if not isinstance(label, int):
            raise GraphError(f"affine label map needs integer labels, got {label!r}")
        return self.scale * label + self.offset


LabelMap = Mapping[ModeLabel, ModeLabel] | AffineMap


def _lookup(label_map: LabelMap, label: ModeLabel) -> ModeLabel:
    if isinstance(label_map, AffineMap):
        return label_map(label)
    if label not in label_map:
        raise GraphError(f"label {label!r} not covered by mode shifter map")
    return label_map[label]


def check_bijective(label_map: LabelMap) -> None:
    if isinstance(label_map, AffineMap):
        if label_map.scale not in (1, -1):
            raise GraphError("affine label map must have scale +1 or -1")
        return
    if len(set(label_map.values())) != len(label_map):
        raise GraphError(f"label map {dict(label_map)} is not a bijection")


def apply_mode_shifter(
    g: ExperimentGraph,
    path: str,
    label_map: LabelMap,
    phase: float = 0.0,
    threshold: float = PRUNE_THRESHOLD,
) -> ExperimentGraph:
    """Relabel every endpoint on ``path``; ``phase`` is picked up per photon."""
    g.require_path(path)
    check_bijective(label_map)
    factor = cmath.exp(1j * phase)

    def rule(x: Vertex) -> Alternatives:
        if x.path != path:
            return [(x, 1)]
        return [(Vertex(path, _lookup(label_map, x.label)), factor)]

    return _rewrite(g, rule, threshold)


def apply_spp_reflection(
    g: ExperimentGraph, path: str, threshold: float = PRUNE_THRESHOLD
) -> ExperimentGraph:
    """Mirror followed by a +2 spiral phase plate: ``l -> -l + 2`` with phase i."""
    return apply_mode_shifter(g, path, AffineMap(-1, 2), math.pi / 2, threshold)


def apply_oam_sorter(
    g: ExperimentGraph, path_v: str, path_w: str, threshold: float = PRUNE_THRESHOLD
) -> ExperimentGraph:
    """Parity sorter: even OAM reflects (sign flip, phase i), odd OAM crosses over."""
    g.require_path(path_v, path_w)
    other = {path_v: path_w, path_w: path_v}

    def rule(x: Vertex) -> Alternatives:
        if x.path not in other:
            return [(x, 1)]
        if not isinstance(x.label, int):
            raise GraphError(f"OAM sorter input {x} does not carry an integer label")
        if x.label % 2 == 0:
            return [(Vertex(x.path, -x.label), 1j)]
        return [(Vertex(other[x.path], x.label), 1)]

    return _rewrite(g, rule, threshold)


def apply_projection(
    g: ExperimentGraph, path: str, accepted: Sequence[ModeLabel], threshold: float = PRUNE_THRESHOLD
) -> ExperimentGraph:
    """Coherent projection: accepted labels become the trigger label, others are removed.

    The uniform projection amplitude (1/sqrt(len(accepted))) is a global
    factor and is not applied.
    """
    g.require_path(path)
    acc = set(accepted)

    def rule(x: Vertex) -> Alternatives:
        if x.path != path:
            return [(x, 1)]
        return [(Vertex(path, TRIGGER), 1)] if x.label in acc else []

    return _rewrite(g, rule, threshold)


# --- declarative element records ------------------------------------------------


@dataclass(frozen=True)
class PhaseShifter:
    path: str
    phi: float

    def apply(self, g, threshold=PRUNE_THRESHOLD):
        return apply_phase_shifter(g, self.path, self.phi, threshold)

    def paths(self):
        return (self.path,)


@dataclass(frozen=True)
class BeamSplitter:
    path_v: str
    path_w: str
    mirror_labels: bool = False

    def apply(self, g, threshold=PRUNE_THRESHOLD):
        refl = mirror if self.mirror_labels else None
        return apply_beam_splitter(g, self.path_v, self.path_w, refl, threshold)

    def paths(self):
        return (self.path_v, self.path_w)


@dataclass(frozen=True)
class PolarizingBS:
    path_v: str
    path_w: str

    def apply(self, g, threshold=PRUNE_THRESHOLD):
        return apply_pbs(g, self.path_v, self.path_w, threshold)

    def paths(self):
        return (self.path_v, self.path_w)


@dataclass(frozen=True)
class ModeShifter:
    path: str
    label_map: LabelMap = field(hash=False)
    phase: float = 0.0

    def apply(self, g, threshold=PRUNE_THRESHOLD):
        return apply_mode_shifter(g, self.path, self.label_map, self.phase, threshold)

    def paths(self):
        return (self.path,)


@dataclass(frozen=True)
class SPPReflection:
    path: str

    def apply(self, g, threshold=PRUNE_THRESHOLD):
        return apply_spp_reflection(g, self.path, threshold)

    def paths(self):
        return (self.path,)


@dataclass(frozen=True)
class OAMSorter:
    path_v: str
    path_w: str

    def apply(self, g, threshold=PRUNE_THRESHOLD):
        return apply_oam_sorter(g, self.path_v, self.path_w, threshold)

    def paths(self):
        return (self.path_v, self.path_w)


@dataclass(frozen=True)
class Projection:
    path: str
    accepted: tuple = ()

    def apply(self, g, threshold=PRUNE_THRESHOLD):
        return apply_projection(g, self.path, self.accepted, threshold)

    def paths(self):
        return (self.path,)


ElementOp = PhaseShifter | BeamSplitter | PolarizingBS | ModeShifter | SPPReflection | OAMSorter | Projection


def apply_elements(g: ExperimentGraph, elements: Sequence[ElementOp], threshold=PRUNE_THRESHOLD):
    for el in elements:
        g = el.apply(g, threshold)
    return g

"""Perfect matchings compatible with a detection pattern, and the post-selected state.

A detection pattern fixes how many photons land in each path.  A matching is
an edge subset in which every path appears as an endpoint exactly that many
times; its weight is the product of edge weights, and its *assignment* is the
sorted tuple of labels it leaves in each path.  The post-selected state is
the sum of matching weights grouped by assignment.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .graph import TRIGGER, Edge, ExperimentGraph, ModeLabel, label_key

CANCEL_THRESHOLD = 1e-12


class PatternError(ValueError):
    pass


@dataclass(frozen=True)
class DetectionPattern:
    counts: Mapping[str, int]

    def __post_init__(self):
        if any(c < 0 for c in self.counts.values()):
            raise PatternError("photon counts must be non-negative")

    @classmethod
    def one_per_path(cls, paths: Iterable[str]) -> "DetectionPattern":
        return cls({p: 1 for p in paths})

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def count(self, path: str) -> int:
        return self.counts.get(path, 0)

    def paths(self) -> list[str]:
        return [p for p, c in self.counts.items() if c > 0]


def as_pattern(pattern) -> DetectionPattern:
    if isinstance(pattern, DetectionPattern):
        return pattern
    if isinstance(pattern, Mapping):
        return DetectionPattern(dict(pattern))
    return DetectionPattern.one_per_path(pattern)


Assignment = tuple[tuple[ModeLabel, ...], ...]


@dataclass(frozen=True)
class MatchingTerm:
    edges: tuple[Edge, ...]
    weight: complex
    assignment: Assignment  # labels per path, over the pattern's path order

    def labels(self) -> tuple:
        return flatten(self.assignment)


def flatten(assignment: Assignment) -> tuple:
    """Single-photon-per-path assignments read as a flat label tuple."""
    if all(len(x) == 1 for x in assignment):
        return tuple(x[0] for x in assignment)
    return assignment


def _pattern_paths(g: ExperimentGraph, pattern: DetectionPattern) -> list[str]:
    return [p for p in g.paths if pattern.count(p) > 0]


def enumerate_matchings(g: ExperimentGraph, pattern) -> list[MatchingTerm]:
    """Every edge subset that covers each path exactly ``pattern`` times, once each.

    Backtracking always extends the lowest path (in graph order) that still
    needs photons; the edges added while a path is lowest are taken in
    increasing index order, which makes every subset appear exactly once.
    """
    pattern = as_pattern(pattern)
    unknown = set(pattern.paths()) - set(g.paths)
    if unknown:
        raise PatternError(f"pattern names unknown paths {sorted(unknown)}")
    if pattern.total % 2:
        return []
    paths = _pattern_paths(g, pattern)
    pos = {p: i for i, p in enumerate(paths)}
    need = [pattern.count(p) for p in paths]
    edges = [e for e in g.edges if e.u.path in pos and e.v.path in pos]
    incident: list[list[int]] = [[] for _ in paths]
    for k, e in enumerate(edges):
        for p in {e.u.path, e.v.path}:
            incident[pos[p]].append(k)

    out: list[MatchingTerm] = []
    chosen: list[int] = []
    used = [False] * len(edges)

    def emit():
        members = tuple(edges[k] for k in chosen)
        weight = math.prod((e.weight for e in members), start=1 + 0j)
        per_path: list[list] = [[] for _ in paths]
        for e in members:
            for x in e.endpoints():
                per_path[pos[x.path]].append(x.label)
        assignment = tuple(tuple(sorted(ls, key=label_key)) for ls in per_path)
        out.append(MatchingTerm(members, weight, assignment))

    def rec(low: int, last: int):
        while low < len(paths) and need[low] == 0:
            low, last = low + 1, -1
        if low == len(paths):
            emit()
            return
        for k in incident[low]:
            if k <= last or used[k]:
                continue
            e = edges[k]
            i, j = pos[e.u.path], pos[e.v.path]
            need[i] -= 1
            need[j] -= 1
            if need[i] >= 0 and need[j] >= 0:
                used[k] = True
                chosen.append(k)
                rec(low, k)
                chosen.pop()
                used[k] = False
            need[i] += 1
            need[j] += 1

    rec(0, -1)
    return out


@dataclass
class PostSelectedState:
    paths: tuple[str, ...]
    terms: dict[tuple, complex]
    normalized: bool = False
    n_matchings: int = 0
    n_cancelled: int = 0
    threshold: float = CANCEL_THRESHOLD
    raw: dict[tuple, complex] = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.terms)

    def norm_squared(self) -> float:
        """Plain sum of |amplitude|^2 over terms (no occupation factors)."""
        return sum(abs(a) ** 2 for a in self.terms.values())

    def probability(self) -> float:
        """Detection probability: |amplitude|^2 times n! per multiply occupied mode."""
        return sum(abs(a) ** 2 * occupation_factor(k) for k, a in self.terms.items())

    def normalize(self) -> "PostSelectedState":
        n = math.sqrt(self.probability())
        if n == 0:
            return self
        terms = {k: a / n for k, a in self.terms.items()}
        return PostSelectedState(
            self.paths, terms, True, self.n_matchings, self.n_cancelled, self.threshold, self.raw
        )

    def amplitude(self, labels: Sequence) -> complex:
        return self.terms.get(tuple(labels), 0j)

    def sorted_terms(self) -> list[tuple[tuple, complex]]:
        def key(item):
            return tuple(_term_key(x) for x in item[0])

        return sorted(self.terms.items(), key=key)

    def drop_paths(self, drop: Iterable[str]) -> "PostSelectedState":
        """Remove paths from the labels; amplitudes of coinciding terms add."""
        drop = set(drop)
        keep = [i for i, p in enumerate(self.paths) if p not in drop]
        terms: dict[tuple, complex] = {}
        for k, a in self.terms.items():
            kk = tuple(k[i] for i in keep)
            terms[kk] = terms.get(kk, 0j) + a
        terms = {k: a for k, a in terms.items() if abs(a) >= self.threshold}
        return PostSelectedState(
            tuple(self.paths[i] for i in keep), terms, False, self.n_matchings, self.n_cancelled, self.threshold
        )

    def trigger_paths(self) -> list[str]:
        """Paths whose label is the trigger symbol in every term."""
        out = []
        for i, p in enumerate(self.paths):
            if self.terms and all(_is_trigger(k[i]) for k in self.terms):
                out.append(p)
        return out

    def heralded(self) -> "PostSelectedState":
        return self.drop_paths(self.trigger_paths())

    def conditional(self, condition_paths: Sequence[str]) -> dict[tuple, "PostSelectedState"]:
        """Split by the outcome on ``condition_paths``; each value is the state of the rest."""
        cidx = [self.paths.index(p) for p in condition_paths]
        rest = [i for i in range(len(self.paths)) if i not in cidx]
        groups: dict[tuple, dict[tuple, complex]] = {}
        for k, a in self.terms.items():
            outcome = tuple(k[i] for i in cidx)
            groups.setdefault(outcome, {})[tuple(k[i] for i in rest)] = a
        rest_paths = tuple(self.paths[i] for i in rest)
        return {
            o: PostSelectedState(rest_paths, t, False, self.n_matchings, self.n_cancelled, self.threshold)
            for o, t in sorted(groups.items(), key=lambda kv: tuple(_term_key(x) for x in kv[0]))
        }


def occupation_factor(key: tuple) -> int:
    """Product of n! over modes holding n photons (a^dag^n |0> = sqrt(n!) |n>)."""
    out = 1
    for x in key:
        if isinstance(x, tuple):
            for lab in set(x):
                out *= math.factorial(x.count(lab))
    return out


def _is_trigger(x) -> bool:
    return x == TRIGGER or (isinstance(x, tuple) and all(y == TRIGGER for y in x))


def _term_key(x):
    if isinstance(x, tuple):
        return tuple(label_key(y) for y in x)
    return (label_key(x),)


def post_selected_state(
    g: ExperimentGraph, pattern, normalize: bool = False, threshold: float = CANCEL_THRESHOLD
) -> PostSelectedState:
    pattern = as_pattern(pattern)
    terms = enumerate_matchings(g, pattern)
    raw: dict[tuple, complex] = {}
    members: dict[tuple, int] = {}
    for t in terms:
        k = t.labels()
        raw[k] = raw.get(k, 0j) + t.weight
        members[k] = members.get(k, 0) + 1
    kept = {k: a for k, a in raw.items() if abs(a) >= threshold}
    cancelled = sum(n for k, n in members.items() if k not in kept)
    state = PostSelectedState(
        tuple(_pattern_paths(g, pattern)), kept, False, len(terms), cancelled, threshold, raw
    )
    return state.normalize() if normalize else state


def matching_sum(g: ExperimentGraph, pattern) -> complex:
    """Total weight of all matchings (the amplitude when all share one assignment)."""
    return sum((t.weight for t in enumerate_matchings(g, pattern)), 0j)


def equal_up_to_phase(
    state: Mapping[tuple, complex], target: Mapping[tuple, complex], tol: float = 1e-9
) -> bool:
    """Compare two normalized states component-wise after removing a global phase."""

    def normed(d):
        n = math.sqrt(sum(abs(a) ** 2 for a in d.values()))
        return {k: a / n for k, a in d.items()} if n else dict(d)

    s, t = normed(state), normed(target)
    keys = set(s) | set(t)
    ref = max(t, key=lambda k: abs(t[k]), default=None)
    if ref is None or abs(s.get(ref, 0)) == 0:
        return not keys
    phase = s[ref] / t[ref]
    phase /= abs(phase)
    return all(abs(s.get(k, 0) - phase * t.get(k, 0)) <= tol for k in keys)


@dataclass(frozen=True)
class MaverickReport:
    is_ghz: bool
    dimension: int
    parties: int
    ghz_terms: tuple[tuple, ...]
    surplus: tuple[tuple, ...]


def _is_ghz_family(terms: Sequence[tuple], amps: Sequence[complex], rtol: float) -> bool:
    for pos in range(len(terms[0])):
        if len({t[pos] for t in terms}) != len(terms):
            return False
    mags = [abs(a) for a in amps]
    return max(mags) - min(mags) <= rtol * max(mags)


def detect_maverick(state: PostSelectedState, dimension: int, parties: int, rtol: float = 1e-9) -> MaverickReport:
    """Check whether ``state`` is a ``dimension``-level ``parties``-party GHZ state.

    Otherwise look for a GHZ sub-family of ``dimension`` terms (mutually
    orthogonal on every party, equal magnitudes) and report the remaining
    terms as surplus.
    """
    items = state.sorted_terms()
    for k, _ in items:
        if len(k) != parties:
            raise PatternError(f"term {k} does not have {parties} parties")
    keys = [k for k, _ in items]
    amps = [a for _, a in items]
    if len(items) == dimension and _is_ghz_family(keys, amps, rtol):
        return MaverickReport(True, dimension, parties, tuple(keys), ())
    if len(items) > dimension:
        for combo in itertools.combinations(range(len(items)), dimension):
            ks = [keys[i] for i in combo]
            if _is_ghz_family(ks, [amps[i] for i in combo], rtol):
                surplus = tuple(keys[i] for i in range(len(items)) if i not in combo)
                return MaverickReport(False, dimension, parties, tuple(ks), surplus)
    return MaverickReport(False, dimension, parties, (), tuple(keys))

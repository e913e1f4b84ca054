"""Order-by-order Fock expansion of a network of coherently pumped pair sources.

Each source (one crystal, possibly emitting into several mode pairs) acts as
``exp(K^dag - K)`` with ``K^dag = sum_k g_k e^{i phi_k} a_k^dag b_k^dag``.  The
exponential is expanded as a Taylor series and every term carries its formal
power of ``g``; anything above ``order`` is dropped.  Bosonic factors
(sqrt(n+1) on creation, sqrt(n) on annihilation) are exact, so stimulated
emission shows up without extra bookkeeping.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .elements import PhaseShifter
from .graph import ExperimentGraph, ModeLabel, add_crystal, graph_with_paths, label_key
from .matchings import DetectionPattern, as_pattern

SIZE_CAP = 10**7
PRUNE = 1e-300


class LedgerTooLarge(RuntimeError):
    pass


@dataclass(frozen=True)
class CrystalSpec:
    path1: str
    label1: ModeLabel
    path2: str
    label2: ModeLabel
    g: float
    phase: float = 0.0
    tag: str | None = None

    @property
    def amplitude(self) -> complex:
        return self.g * cmath.exp(1j * self.phase)

    def scaled(self, factor: float) -> "CrystalSpec":
        return CrystalSpec(self.path1, self.label1, self.path2, self.label2, self.g * factor, self.phase, self.tag)


Mode = tuple[str, ModeLabel]
Occupation = tuple[int, ...]


@dataclass
class FockLedger:
    modes: tuple[Mode, ...]
    amplitudes: dict[Occupation, complex]
    order: int
    annihilation: bool = True

    def __len__(self):
        return len(self.amplitudes)

    def amplitude(self, occupation: Mapping[Mode, int]) -> complex:
        idx = {m: i for i, m in enumerate(self.modes)}
        state = [0] * len(self.modes)
        for m, n in occupation.items():
            if n and m not in idx:
                return 0j
            if n:
                state[idx[m]] = n
        return self.amplitudes.get(tuple(state), 0j)

    def norm_squared(self) -> float:
        return sum(abs(a) ** 2 for a in self.amplitudes.values())

    def paths(self) -> list[str]:
        out: list[str] = []
        for p, _ in self.modes:
            if p not in out:
                out.append(p)
        return out

    def path_counts(self, state: Occupation) -> dict[str, int]:
        out: dict[str, int] = {}
        for (p, _), n in zip(self.modes, state):
            out[p] = out.get(p, 0) + n
        return out

    def ket(self, state: Occupation, paths: Sequence[str] | None = None) -> str:
        """Render like ``|0,H,H,2H>``: per path, photon counts with labels."""
        paths = list(paths or self.paths())
        parts = []
        for p in paths:
            bits = [
                (f"{n}" if n > 1 else "") + str(lab)
                for (q, lab), n in zip(self.modes, state)
                if q == p and n
            ]
            parts.append("".join(bits) or "0")
        return "|" + ",".join(parts) + ">"


def _group_sources(crystals: Sequence[CrystalSpec]) -> list[list[CrystalSpec]]:
    """Entries sharing a tag are one source; untagged entries stand alone."""
    groups: list[list[CrystalSpec]] = []
    by_tag: dict[str, list[CrystalSpec]] = {}
    for c in crystals:
        if c.tag is None:
            groups.append([c])
        elif c.tag in by_tag:
            by_tag[c.tag].append(c)
        else:
            by_tag[c.tag] = [c]
            groups.append(by_tag[c.tag])
    return groups


Step = CrystalSpec | PhaseShifter | list


def _collect_modes(steps: Iterable) -> tuple[Mode, ...]:
    seen: dict[Mode, None] = {}
    for s in steps:
        for c in s if isinstance(s, list) else [s]:
            if isinstance(c, CrystalSpec):
                seen[(c.path1, c.label1)] = None
                seen[(c.path2, c.label2)] = None
    return tuple(seen)


def _pair_step(state: list[int], i: int, j: int, create: bool) -> float:
    """Apply a^dag b^dag (or a b) in place; return the bosonic factor (0 if vanishing)."""
    if create:
        if i == j:
            n = state[i]
            state[i] += 2
            return math.sqrt((n + 1) * (n + 2))
        f = math.sqrt((state[i] + 1) * (state[j] + 1))
        state[i] += 1
        state[j] += 1
        return f
    if i == j:
        n = state[i]
        if n < 2:
            return 0.0
        state[i] -= 2
        return math.sqrt(n * (n - 1))
    if state[i] == 0 or state[j] == 0:
        return 0.0
    f = math.sqrt(state[i] * state[j])
    state[i] -= 1
    state[j] -= 1
    return f


Terms = dict[tuple[Occupation, int], complex]


def _apply_generator(terms: Terms, pairs, order: int, annihilation: bool) -> Terms:
    out: Terms = {}
    for (state, power), amp in terms.items():
        if power >= order:
            continue
        for i, j, c in pairs:
            for create, coeff in ((True, c), (False, -c.conjugate())):
                if not create and not annihilation:
                    continue
                s = list(state)
                f = _pair_step(s, i, j, create)
                if f == 0.0:
                    continue
                key = (tuple(s), power + 1)
                out[key] = out.get(key, 0j) + amp * coeff * f
    return out


def expand_sequence(
    steps: Sequence[Step],
    order: int,
    annihilation: bool = True,
    size_cap: int = SIZE_CAP,
    modes: Sequence[Mode] | None = None,
) -> FockLedger:
    """Apply sources (and phase shifters) to vacuum in the listed order.

    ``steps`` holds :class:`CrystalSpec` entries (consecutive entries with the
    same tag form one source), lists of specs (explicit sources) and
    :class:`PhaseShifter` records.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    flat: list = []
    pending: list[CrystalSpec] = []
    for s in steps:
        if isinstance(s, CrystalSpec):
            pending.append(s)
            continue
        flat.extend(_group_sources(pending))
        pending = []
        flat.append(s)
    flat.extend(_group_sources(pending))

    modes = tuple(modes) if modes is not None else _collect_modes(flat)
    index = {m: i for i, m in enumerate(modes)}
    terms: Terms = {(tuple([0] * len(modes)), 0): 1 + 0j}
    for step in flat:
        if isinstance(step, PhaseShifter):
            hit = [i for i, (p, _) in enumerate(modes) if p == step.path]
            terms = {
                (st, pw): a * cmath.exp(1j * step.phi * sum(st[i] for i in hit))
                for (st, pw), a in terms.items()
            }
            continue
        if not isinstance(step, list):
            raise TypeError(f"Fock expansion supports crystals and phase shifters, not {step!r}")
        pairs = [(index[(c.path1, c.label1)], index[(c.path2, c.label2)], c.amplitude) for c in step]
        total = dict(terms)
        current = terms
        for n in range(1, order + 1):
            current = _apply_generator(current, pairs, order, annihilation)
            if not current:
                break
            for k, a in current.items():
                total[k] = total.get(k, 0j) + a / math.factorial(n)
            if len(total) > size_cap:
                raise LedgerTooLarge(f"Fock ledger exceeds {size_cap} entries")
        terms = {k: a for k, a in total.items() if abs(a) > PRUNE}

    amps: dict[Occupation, complex] = {}
    for (state, _), a in terms.items():
        amps[state] = amps.get(state, 0j) + a
    amps = {s: a for s, a in amps.items() if abs(a) > PRUNE}
    return FockLedger(modes, amps, order, annihilation)


def expand_network(
    crystals: Sequence[CrystalSpec], order: int, annihilation: bool = True, size_cap: int = SIZE_CAP
) -> FockLedger:
    return expand_sequence(list(crystals), order, annihilation, size_cap)


def _loss_map(loss, paths) -> dict[str, float]:
    if isinstance(loss, Mapping):
        out = {p: float(loss.get(p, 1.0)) for p in paths}
    else:
        out = {p: float(loss) for p in paths}
    for p, eta in out.items():
        if not 0.0 <= eta <= 1.0:
            raise ValueError(f"survival probability for {p} must lie in [0, 1], got {eta}")
    return out


def _binom_survive(n: int, k: int, eta: float) -> float:
    if k > n:
        return 0.0
    return math.comb(n, k) * eta**k * (1 - eta) ** (n - k)


def pattern_probability(
    ledger: FockLedger, pattern, loss=1.0, detector: str = "pnr"
) -> float:
    """Probability of the detected pattern after independent per-photon loss.

    ``loss`` is the survival probability (scalar or per path).  With
    ``detector="pnr"`` the per-path photon numbers must equal the pattern
    exactly; with ``"threshold"`` the set of clicking paths must equal the
    pattern's paths.  Labels are marginalized.
    """
    pattern = as_pattern(pattern)
    paths = ledger.paths()
    eta = _loss_map(loss, paths)
    extra = [p for p in pattern.paths() if p not in eta]
    if extra:
        return 0.0
    total = 0.0
    for state, amp in ledger.amplitudes.items():
        counts = ledger.path_counts(state)
        prob = abs(amp) ** 2
        for p in paths:
            n, k = counts.get(p, 0), pattern.count(p)
            if detector == "pnr":
                prob *= _binom_survive(n, k, eta[p])
            elif detector == "threshold":
                dark = (1 - eta[p]) ** n
                prob *= (1 - dark) if k > 0 else dark
            else:
                raise ValueError(f"unknown detector model {detector!r}")
            if prob == 0.0:
                break
        total += prob
    return total


def crystal_graph(crystals: Sequence[CrystalSpec], paths: Sequence[str] | None = None) -> ExperimentGraph:
    """Graph with one edge per crystal entry (weight g e^{i phase})."""
    if paths is None:
        paths = []
        for c in crystals:
            for p in (c.path1, c.path2):
                if p not in paths:
                    paths.append(p)
    g = graph_with_paths(paths)
    for c in crystals:
        g = add_crystal(g, c.path1, c.label1, c.path2, c.label2, c.amplitude, c.tag)
    return g


@dataclass
class OrderError:
    g: float
    order: int
    mean_error: float
    per_subset: dict[tuple[str, ...], float] = field(default_factory=dict)


def scale_to(crystals: Sequence[CrystalSpec], g: float) -> list[CrystalSpec]:
    """Rescale pump power so that the mean crystal amplitude is ``g``.

    Relative amplitudes (the network's matrix up to a factor) are kept.
    """
    ref = sum(c.g for c in crystals) / len(crystals)
    return [c.scaled(g / ref) for c in crystals]


def fold_subsets(paths: Sequence[str], k: int = 4) -> list[tuple[str, ...]]:
    return list(itertools.combinations(paths, k))


def higher_order_error(
    crystals: Sequence[CrystalSpec],
    g: float,
    orders: Iterable[int] = range(3, 8),
    loss=1.0,
    fold: int = 4,
    detector: str = "threshold",
    annihilation: bool = True,
) -> list[OrderError]:
    """Relative deviation of each k-fold probability between order 2 and higher orders.

    For every ``fold``-path subset with nonzero order-2 probability,
    ``|P_k - P_2| / P_k``; the returned value averages over those subsets.
    """
    net = scale_to(crystals, g)
    paths = crystal_graph(net).paths
    subsets = fold_subsets(paths, fold)
    if not subsets:
        return []
    orders = sorted(orders)
    ledgers = {k: expand_network(net, k, annihilation) for k in [2] + orders}
    base = {s: pattern_probability(ledgers[2], DetectionPattern.one_per_path(s), loss, detector) for s in subsets}
    out = []
    for k in orders:
        per = {}
        for s in subsets:
            if base[s] <= 0:
                continue
            pk = pattern_probability(ledgers[k], DetectionPattern.one_per_path(s), loss, detector)
            per[s] = abs(pk - base[s]) / pk
        mean = sum(per.values()) / len(per) if per else 0.0
        out.append(OrderError(g, k, mean, per))
    return out


def sorted_states(ledger: FockLedger) -> list[tuple[Occupation, complex]]:
    def key(item):
        st = item[0]
        return (sum(st), tuple(-x for x in st))

    return sorted(ledger.amplitudes.items(), key=key)


__all__ = [
    "CrystalSpec",
    "FockLedger",
    "LedgerTooLarge",
    "expand_network",
    "expand_sequence",
    "pattern_probability",
    "sorted_states",
    "higher_order_error",
    "crystal_graph",
    "scale_to",
    "label_key",
]

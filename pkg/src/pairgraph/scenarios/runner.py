"""Run parsed experiments and render the results.

A run evaluates every requested output at every sweep point and collects
:class:`Result` records into a :class:`RunReport`.  The report carries a
conventions block (splitter normalization, thresholds, detector model,
backend, seed) so that printed numbers can be interpreted on their own.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .. import _backend
from ..elements import PRUNE_THRESHOLD, PhaseShifter
from ..fock import CrystalSpec, expand_sequence, higher_order_error, pattern_probability
from ..graph import adjacency_matrix, add_crystal, format_label, graph_with_paths, induced_subgraph
from ..matchings import (
    CANCEL_THRESHOLD,
    DetectionPattern,
    detect_maverick,
    enumerate_matchings,
    post_selected_state,
)
from ..matrix import coincidence_probability
from ..rates import rate_table
from .spec_format import ExperimentSpec, emit_spec, evaluate, parse_spec

FORMATS = ("table", "json-lines", "csv")
DIGITS = 12


@dataclass
class Result:
    kind: str
    source: str
    spec: str
    point: dict[str, float]
    data: Any


@dataclass
class RunReport:
    scenario: str
    conventions: dict[str, Any]
    results: list[Result] = field(default_factory=list)

    def of_kind(self, kind: str) -> list[Result]:
        return [r for r in self.results if r.kind == kind]


# --- building ---------------------------------------------------------------------


def build_steps(spec: ExperimentSpec) -> list:
    """Crystals in file order; ``after=TAG`` elements follow the last crystal with that tag."""
    last = {c.tag: i for i, c in enumerate(spec.crystals)}
    slots: dict[int, list] = {}
    tail = []
    for e in spec.elements:
        if e.after is None:
            tail.append(e.op)
        else:
            slots.setdefault(last[e.after], []).append(e.op)
    steps: list = []
    for i, c in enumerate(spec.crystals):
        steps.append(c)
        steps.extend(slots.get(i, []))
    return steps + tail


def build_graph(spec: ExperimentSpec, threshold: float = PRUNE_THRESHOLD):
    g = graph_with_paths(spec.paths)
    for step in build_steps(spec):
        if isinstance(step, CrystalSpec):
            g = add_crystal(g, step.path1, step.label1, step.path2, step.label2, step.amplitude, step.tag)
        else:
            g = step.apply(g, threshold)
    return g


def with_params(spec: ExperimentSpec, overrides: dict[str, float]) -> ExperimentSpec:
    if not overrides:
        return spec
    params = dict(spec.params)
    params.update({k: repr(float(v)) for k, v in overrides.items()})
    return parse_spec(emit_spec(replace(spec, params=params)), spec.name)


def parse_sweep(text: str, params: dict[str, str] | None = None) -> np.ndarray:
    """``START:END:STEPS`` (inclusive ends) into an array of values."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"sweep {text!r} is not START:END:STEPS")
    start, end = (evaluate(p, params or {}) for p in parts[:2])
    steps = int(parts[2])
    if steps < 1:
        raise ValueError("sweep needs at least one step")
    return np.linspace(start, end, steps)


def pattern_name(p: DetectionPattern) -> str:
    items = [(k, v) for k, v in p.counts.items() if v > 0]
    if all(v == 1 for _, v in items):
        sep = "" if all(len(k) == 1 for k, _ in items) else "-"
        return sep.join(k for k, _ in items)
    return "-".join(f"{k}:{v}" for k, v in items)


# --- evaluating -------------------------------------------------------------------


def _opt(spec: ExperimentSpec, key: str, default: str) -> str:
    return spec.options.get(key, default)


def _flag(spec: ExperimentSpec, key: str, default: bool) -> bool:
    return _opt(spec, key, "true" if default else "false").lower() in ("1", "true", "yes", "on")


def _state_record(state, pattern: str, outcome=None) -> dict:
    return {
        "pattern": pattern,
        "outcome": None if outcome is None else list(outcome),
        "paths": list(state.paths),
        "normalized": state.normalized,
        "n_matchings": state.n_matchings,
        "n_cancelled": state.n_cancelled,
        "probability": state.probability(),
        "terms": [(list(k), complex(a)) for k, a in state.sorted_terms()],
    }


def _subsets(spec: ExperimentSpec):
    return [DetectionPattern.one_per_path(s) for s in itertools.combinations(spec.paths, spec.subsets)]


def evaluate_point(spec: ExperimentSpec, point: dict[str, float]) -> list[Result]:
    spec = with_params(spec, point)
    threshold = float(_opt(spec, "threshold", repr(PRUNE_THRESHOLD)))
    g = build_graph(spec, threshold)
    out: list[Result] = []

    def add(kind, source, data):
        out.append(Result(kind, source, spec.name, dict(point), data))

    patterns = list(spec.detection)
    for kind in spec.outputs:
        if kind == "state":
            normalize = _flag(spec, "normalize", False)
            condition = _opt(spec, "condition", "").split()
            for p in patterns:
                st = post_selected_state(g, p, threshold=float(_opt(spec, "cancel_threshold", repr(CANCEL_THRESHOLD))))
                if _flag(spec, "herald", True):
                    st = replace(st.heralded(), n_matchings=st.n_matchings, n_cancelled=st.n_cancelled)
                if condition:
                    for outcome, sub in st.conditional(condition).items():
                        sub = sub.normalize() if normalize else sub
                        add("state", "matchings", _state_record(sub, pattern_name(p), outcome))
                else:
                    add("state", "matchings", _state_record(st.normalize() if normalize else st, pattern_name(p)))
        elif kind == "matchings":
            for p in patterns:
                rows = [
                    {"edges": [str(e) for e in t.edges], "weight": complex(t.weight), "assignment": list(t.labels())}
                    for t in enumerate_matchings(g, p)
                ]
                add("matchings", "matchings", {"pattern": pattern_name(p), "terms": rows})
        elif kind == "histogram":
            pats = _subsets(spec) if spec.subsets else patterns
            probs = {}
            for p in pats:
                if all(len(g.labels(x)) <= 1 for x in p.paths()) and all(v == 1 for v in p.counts.values()):
                    probs[pattern_name(p)] = coincidence_probability(g, p.paths())
                else:
                    probs[pattern_name(p)] = post_selected_state(g, p).probability()
            total = sum(probs.values())
            if _flag(spec, "normalize_histogram", True) and total > 0:
                probs = {k: v / total for k, v in probs.items()}
            add("histogram", "matrix", {"probabilities": probs, "raw_total": total})
        elif kind == "fock":
            bad = [s for s in build_steps(spec) if not isinstance(s, (CrystalSpec, PhaseShifter))]
            if bad:
                add("fock", "fock", {"skipped": "Fock expansion supports crystals and phase shifters only"})
                continue
            detector = _opt(spec, "detector", "pnr")
            ledger = expand_sequence(build_steps(spec), spec.order, _flag(spec, "annihilation", True))
            pats = patterns + (_subsets(spec) if spec.subsets else [])
            probs = {pattern_name(p): pattern_probability(ledger, p, spec.loss, detector) for p in pats}
            add(
                "fock",
                "fock",
                {"order": spec.order, "loss": spec.loss, "detector": detector, "norm_squared": ledger.norm_squared(), "probabilities": probs},
            )
        elif kind == "adjacency":
            order = _opt(spec, "adjacency_order", "").split() or [p for p in spec.paths if g.labels(p)]
            sub = induced_subgraph(g, order)
            add("adjacency", "graph", {"paths": order, "matrix": adjacency_matrix(sub, order).tolist()})
        elif kind == "maverick":
            dim = int(_opt(spec, "ghz_dimension", "2"))
            for p in patterns:
                st = post_selected_state(g, p).heralded()
                rep = detect_maverick(st, dim, len(st.paths))
                add(
                    "maverick",
                    "matchings",
                    {
                        "pattern": pattern_name(p),
                        "is_ghz": rep.is_ghz,
                        "dimension": dim,
                        "ghz_terms": [list(t) for t in rep.ghz_terms],
                        "surplus": [list(t) for t in rep.surplus],
                    },
                )
        elif kind == "error":
            gs = [float(x) for x in _opt(spec, "error_g", "0.1").split()]
            orders = [int(x) for x in _opt(spec, "error_orders", "4").split()]
            fold = int(_opt(spec, "error_fold", "4"))
            rows = []
            for gv in gs:
                for e in higher_order_error(spec.crystals, gv, orders, spec.loss, fold):
                    rows.append({"g": e.g, "order": e.order, "mean_error": e.mean_error, "subsets": len(e.per_subset)})
            add("error", "fock", {"loss": spec.loss, "rows": rows})
        elif kind == "rates":
            rows = []
            for item in _opt(spec, "rates", "13:3:0.01 12:5:0.01").split():
                m, n, p = item.split(":")
                rows.append((int(m), int(n), float(p)))
            add("rates", "rates", {"rows": rate_table(rows)})
    return out


def _evaluate_job(args):
    text, name, point = args
    return evaluate_point(parse_spec(text, name), point)


def conventions(spec: ExperimentSpec, seed: int | None) -> dict[str, Any]:
    return {
        "beam_splitter": "transmission 1/sqrt(2) to the partner path, reflection i/sqrt(2)",
        "prune_threshold": float(_opt(spec, "threshold", repr(PRUNE_THRESHOLD))),
        "cancel_threshold": CANCEL_THRESHOLD,
        "projection": "accepted labels become T; the projection amplitude is a dropped global factor",
        "expansion_order": spec.order,
        "loss": spec.loss,
        "detector": _opt(spec, "detector", "pnr"),
        "annihilation_terms": _flag(spec, "annihilation", True),
        "backend": _backend.BACKEND,
        "seed": seed,
    }


def run_spec(
    spec: ExperimentSpec,
    order: int | None = None,
    loss: float | None = None,
    sweep: str | None = None,
    jobs: int = 1,
    seed: int | None = None,
    scenario: str | None = None,
) -> RunReport:
    """Evaluate ``spec`` (with optional overrides) and return the report."""
    if order is not None:
        spec = replace(spec, order=order)
    if loss is not None:
        if not 0 <= loss <= 1:
            raise ValueError("loss (survival probability) must lie in [0, 1]")
        spec = replace(spec, loss=loss)
    need = -(-spec.max_detected() // 2)
    if "fock" in spec.outputs and spec.order < need:
        raise ValueError(f"expansion order {spec.order} < {need} needed for the detection patterns")
    sweep = sweep or spec.options.get("sweep")
    param = spec.options.get("sweep_param", "phi")
    points = [{param: float(v)} for v in parse_sweep(sweep, spec.params)] if sweep else [{}]
    report = RunReport(scenario or spec.name, conventions(spec, seed))
    if jobs > 1 and len(points) > 1:
        text = emit_spec(spec)
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for chunk in pool.map(_evaluate_job, [(text, spec.name, p) for p in points]):
                report.results.extend(chunk)
    else:
        for p in points:
            report.results.extend(evaluate_point(spec, p))
    return report


# --- rendering --------------------------------------------------------------------


def fmt_float(x: float) -> float:
    return float(f"{x:.{DIGITS}g}")


def fmt_complex(z: complex) -> list[float]:
    z = complex(z)
    return [fmt_float(z.real), fmt_float(z.imag)]


def _label(x):
    if isinstance(x, (list, tuple)):
        return [_label(y) for y in x]
    if isinstance(x, (int, np.integer)):
        return int(x)
    return str(x)


def _ket(labels) -> str:
    def one(x):
        if isinstance(x, (list, tuple)):
            return ",".join(format_label(y) for y in x) or "0"
        return format_label(x)

    return "|" + ",".join(one(x) for x in labels) + ">"


def _cstr(z: complex) -> str:
    re, im = fmt_complex(z)
    return f"{re:+.6g}{im:+.6g}i"


def probability_rows(report: RunReport) -> list[tuple[dict, str, float]]:
    """(point, pattern, probability) rows from the highest-priority source present."""
    for kind in ("histogram", "state", "fock"):
        rows = []
        for r in report.of_kind(kind):
            if kind == "state":
                if r.data["outcome"] is None:
                    rows.append((r.point, r.data["pattern"], r.data["probability"]))
            else:
                for pat, pr in r.data.get("probabilities", {}).items():
                    rows.append((r.point, pat, pr))
        if rows:
            return rows
    return []


def _records(report: RunReport):
    for r in report.results:
        base = {"scenario": report.scenario, "spec": r.spec, "result": r.kind, "source": r.source}
        if r.point:
            base["point"] = {k: fmt_float(v) for k, v in r.point.items()}
        d = r.data
        if r.kind == "state":
            extra = {"pattern": d["pattern"], "paths": d["paths"]}
            if d["outcome"] is not None:
                extra["outcome"] = _label(d["outcome"])
            for labels, amp in d["terms"]:
                re, im = fmt_complex(amp)
                yield {**base, **extra, "assignment": _label(labels), "re": re, "im": im}
        elif r.kind == "matchings":
            for t in d["terms"]:
                re, im = fmt_complex(t["weight"])
                yield {**base, "pattern": d["pattern"], "edges": t["edges"], "assignment": _label(t["assignment"]), "re": re, "im": im}
        elif r.kind in ("histogram", "fock") and "probabilities" in d:
            for pat, pr in d["probabilities"].items():
                yield {**base, "pattern": pat, "probability": fmt_float(pr)}
        elif r.kind == "adjacency":
            yield {**base, "paths": d["paths"], "matrix": [[fmt_complex(z) for z in row] for row in d["matrix"]]}
        elif r.kind in ("error", "rates"):
            for row in d["rows"]:
                yield {**base, **{k: fmt_float(v) if isinstance(v, float) else v for k, v in row.items()}}
        else:
            yield {**base, **{k: v for k, v in d.items()}}


def emit(report: RunReport, fmt: str = "table") -> str:
    if fmt == "json-lines":
        lines = [json.dumps({"conventions": report.conventions, "scenario": report.scenario})]
        lines += [json.dumps(rec) for rec in _records(report)]
        return "\n".join(lines) + "\n"
    if fmt == "csv":
        rows = probability_rows(report)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        keys = sorted({k for pt, _, _ in rows for k in pt})
        w.writerow(keys + ["pattern", "probability"])
        for pt, pat, pr in rows:
            w.writerow([repr(fmt_float(pt[k])) for k in keys] + [pat, repr(fmt_float(pr))])
        return buf.getvalue()
    if fmt == "table":
        return _table(report)
    raise ValueError(f"unknown format {fmt!r}; choose from {FORMATS}")


def _point_str(pt: dict) -> str:
    return " ".join(f"{k}={v:.6g}" for k, v in pt.items())


def _table(report: RunReport) -> str:
    out = [f"scenario: {report.scenario}", "conventions:"]
    out += [f"  {k}: {v}" for k, v in report.conventions.items()]
    for r in report.results:
        d = r.data
        head = f"[{r.kind}] {r.spec}" + (f" ({_point_str(r.point)})" if r.point else "")
        out.append("")
        if r.kind == "state":
            extra = f" outcome {_ket(d['outcome'])}" if d["outcome"] is not None else ""
            out.append(
                f"{head} pattern {d['pattern']}{extra}: {d['n_matchings']} matchings, "
                f"{d['n_cancelled']} cancelled, probability {d['probability']:.6g}"
                + (" (normalized)" if d["normalized"] else "")
            )
            out.append(f"  paths: {','.join(d['paths'])}")
            if not d["terms"]:
                out.append("  (empty)")
            for labels, amp in d["terms"]:
                out.append(f"  {_cstr(amp):>28}  {_ket(labels)}")
        elif r.kind == "matchings":
            out.append(f"{head} pattern {d['pattern']}: {len(d['terms'])} matchings")
            for t in d["terms"]:
                out.append(f"  {_cstr(t['weight']):>28}  {_ket(t['assignment'])}  " + " ".join(t["edges"]))
        elif r.kind in ("histogram", "fock"):
            if "skipped" in d:
                out.append(f"{head}: skipped, {d['skipped']}")
                continue
            info = f" order {d['order']}, loss {d['loss']}, {d['detector']} detectors" if r.kind == "fock" else ""
            out.append(f"{head}{info}")
            out.append(f"  {'pattern':<16}probability")
            for pat, pr in d["probabilities"].items():
                out.append(f"  {pat:<16}{pr:.6e}")
        elif r.kind == "adjacency":
            out.append(f"{head} rows/cols {','.join(d['paths'])}")
            for row in d["matrix"]:
                out.append("  " + " ".join(f"{_cstr(z):>24}" for z in row))
        elif r.kind == "maverick":
            verdict = "GHZ" if d["is_ghz"] else "not GHZ"
            out.append(f"{head} pattern {d['pattern']}: {verdict} (d={d['dimension']})")
            out.append("  ghz terms: " + " ".join(_ket(t) for t in d["ghz_terms"]))
            out.append("  surplus:   " + (" ".join(_ket(t) for t in d["surplus"]) or "-"))
        elif r.kind == "error":
            out.append(f"{head} loss {d['loss']}")
            for row in d["rows"]:
                out.append(f"  g={row['g']:<6} order {row['order']}: mean relative error {row['mean_error']:.3e} over {row['subsets']} subsets")
        elif r.kind == "rates":
            out.append(head)
            out.append(f"  {'m':>4} {'n':>3} {'p':>8} {'R_BS':>11} {'R_SS':>11} {'R_PI':>11} {'PI/SS':>11}")
            for row in d["rows"]:
                out.append(
                    f"  {row['m']:>4} {row['n']:>3} {row['p']:>8g} {row['R_BS']:>11.4e} {row['R_SS']:>11.4e} "
                    f"{row['R_PI']:>11.4e} {row['ratio']:>11.4g}"
                )
    return "\n".join(out) + "\n"

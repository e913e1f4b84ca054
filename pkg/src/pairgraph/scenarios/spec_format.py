"""Parser and writer for experiment files (``*.exp``).

The format is line oriented with ``[section]`` headers; ``#`` starts a
comment.  See ``docs/experiment-format.md`` for the full grammar.  Numeric
fields accept plain numbers or small arithmetic expressions over ``pi`` and
the names defined in ``[params]`` (``a1+d2``, ``pi/2``, ``$phi``).
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, field
from typing import Any

from ..elements import (
    AffineMap,
    BeamSplitter,
    ModeShifter,
    OAMSorter,
    PhaseShifter,
    PolarizingBS,
    Projection,
    SPPReflection,
    check_bijective,
)
from ..fock import CrystalSpec
from ..graph import GraphError, ModeLabel
from ..matchings import DetectionPattern

SECTIONS = ("paths", "params", "crystals", "elements", "detection", "options")
OUTPUTS = ("state", "matchings", "histogram", "fock", "adjacency", "maverick", "error", "rates")


@dataclass(frozen=True)
class Diagnostic:
    line: int
    field: str
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.field}: {self.message}"


class SpecError(ValueError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(str(d) for d in diagnostics))


@dataclass
class ElementEntry:
    op: Any
    after: str | None = None
    raw: tuple[str, ...] = ()


@dataclass
class ExperimentSpec:
    name: str = "experiment"
    paths: list[str] = field(default_factory=list)
    params: dict[str, str] = field(default_factory=dict)
    crystals: list[CrystalSpec] = field(default_factory=list)
    crystal_raw: list[tuple[str, str]] = field(default_factory=list)  # (g expr, phase expr)
    annotations: dict[str, dict[str, str]] = field(default_factory=dict)
    elements: list[ElementEntry] = field(default_factory=list)
    detection: list[DetectionPattern] = field(default_factory=list)
    subsets: int | None = None
    order: int = 2
    loss: float = 1.0
    outputs: tuple[str, ...] = ("state",)
    options: dict[str, str] = field(default_factory=dict)

    def max_detected(self) -> int:
        sizes = [p.total for p in self.detection]
        if self.subsets:
            sizes.append(self.subsets)
        return max(sizes, default=0)


# --- expressions ------------------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}


def evaluate(expr: str, params: dict[str, str], _depth: int = 0) -> float:
    """Evaluate a numeric field; names resolve through ``params`` (``$`` optional)."""
    if _depth > 20:
        raise ValueError(f"parameter recursion too deep in {expr!r}")
    text = expr.replace("$", "")
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse number {expr!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        if isinstance(node, ast.Name):
            if node.id == "pi":
                return math.pi
            if node.id in params:
                return evaluate(params[node.id], params, _depth + 1)
            raise ValueError(f"undefined parameter {node.id!r}")
        raise ValueError(f"unsupported expression {expr!r}")

    return ev(tree)


def parse_label(tok: str) -> ModeLabel:
    try:
        return int(tok)
    except ValueError:
        return tok


# --- parsing ----------------------------------------------------------------------


def _split_kv(tokens: list[str]) -> tuple[list[str], dict[str, str]]:
    pos, kv = [], {}
    for t in tokens:
        if "=" in t:
            k, v = t.split("=", 1)
            kv[k] = v
        else:
            pos.append(t)
    return pos, kv


class _Parser:
    def __init__(self, text: str, name: str):
        self.spec = ExperimentSpec(name=name)
        self.diags: list[Diagnostic] = []
        self.text = text
        self.deferred: list[tuple[int, str, list[str]]] = []

    def err(self, line: int, fld: str, msg: str):
        self.diags.append(Diagnostic(line, fld, msg))

    def run(self) -> ExperimentSpec:
        section = None
        for no, raw in enumerate(self.text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1].strip().lower()
                if section not in SECTIONS:
                    self.err(no, "section", f"unknown section [{section}]")
                continue
            if section is None:
                self.err(no, "section", "content before the first [section] header")
                continue
            self.deferred.append((no, section, line.split()))
        # params first so that expressions anywhere can use them
        for no, section, toks in self.deferred:
            if section == "params":
                self.params_line(no, toks)
        for no, section, toks in self.deferred:
            handler = getattr(self, f"{section}_line", None)
            if handler and section != "params":
                handler(no, toks)
        self.validate()
        if self.diags:
            raise SpecError(self.diags)
        return self.spec

    def paths_line(self, no, toks):
        for t in toks:
            if t in self.spec.paths:
                self.err(no, "paths", f"duplicate path {t!r}")
            else:
                self.spec.paths.append(t)

    def params_line(self, no, toks):
        text = " ".join(toks)
        if "=" not in text:
            self.err(no, "params", "expected NAME = VALUE")
            return
        k, v = (s.strip() for s in text.split("=", 1))
        self.spec.params[k.lstrip("$")] = v

    def _path(self, no, fld, p) -> bool:
        if p not in self.spec.paths:
            self.err(no, fld, f"undeclared path {p!r}")
            return False
        return True

    def _num(self, no, fld, expr) -> float | None:
        try:
            return evaluate(expr, self.spec.params)
        except ValueError as exc:
            self.err(no, fld, str(exc))
            return None

    def crystals_line(self, no, toks):
        pos, kv = _split_kv(toks)
        if len(pos) not in (6, 7):
            self.err(no, "crystal", "expected: PATH1 LABEL1 PATH2 LABEL2 G PHASE [TAG]")
            return
        p1, l1, p2, l2, gx, phx = pos[:6]
        tag = pos[6] if len(pos) == 7 else f"c{len(self.spec.crystals) + 1}"
        ok = self._path(no, "crystal", p1) & self._path(no, "crystal", p2)
        g = self._num(no, "crystal.g", gx)
        ph = self._num(no, "crystal.phase", phx)
        if not ok or g is None or ph is None:
            return
        self.spec.crystals.append(CrystalSpec(p1, parse_label(l1), p2, parse_label(l2), g, ph, tag))
        self.spec.crystal_raw.append((gx, phx))
        if kv:
            self.spec.annotations.setdefault(tag, {}).update(kv)

    def elements_line(self, no, toks):
        pos, kv = _split_kv(toks)
        kind, args = pos[0].lower(), pos[1:]
        after = kv.pop("after", None)
        try:
            op = self._element(no, kind, args, kv)
        except (ValueError, GraphError) as exc:
            self.err(no, f"element {kind}", str(exc))
            return
        if op is None:
            return
        if after is not None and after not in {c.tag for c in self.spec.crystals}:
            self.err(no, f"element {kind}", f"after= names unknown crystal tag {after!r}")
            return
        self.spec.elements.append(ElementEntry(op, after, tuple(toks)))

    def _element(self, no, kind, args, kv):
        def paths(k):
            if len(args) < k:
                raise ValueError(f"expected {k} path argument(s)")
            return all([self._path(no, f"element {kind}", p) for p in args[:k]])

        if kind == "phase":
            if len(args) != 2:
                raise ValueError("expected: phase PATH PHI")
            if not paths(1):
                return None
            phi = self._num(no, "element phase", args[1])
            return None if phi is None else PhaseShifter(args[0], phi)
        if kind == "bs":
            if not paths(2):
                return None
            return BeamSplitter(args[0], args[1], "mirror" in args[2:])
        if kind == "pbs":
            return PolarizingBS(args[0], args[1]) if paths(2) else None
        if kind == "sorter":
            return OAMSorter(args[0], args[1]) if paths(2) else None
        if kind == "spp":
            return SPPReflection(args[0]) if paths(1) else None
        if kind == "project":
            if not paths(1):
                return None
            return Projection(args[0], tuple(parse_label(a) for a in args[1:]))
        if kind == "mode":
            if not paths(1):
                return None
            phase = self._num(no, "element mode.phase", kv.get("phase", "0"))
            if len(args) >= 2 and args[1] == "affine":
                if len(args) != 4:
                    raise ValueError("expected: mode PATH affine SCALE OFFSET")
                mapping = AffineMap(int(args[2]), int(args[3]))
            else:
                mapping = {}
                for pair in args[1:]:
                    if ":" not in pair:
                        raise ValueError(f"label map entry {pair!r} is not FROM:TO")
                    a, b = pair.split(":", 1)
                    mapping[parse_label(a)] = parse_label(b)
            check_bijective(mapping)
            return ModeShifter(args[0], mapping, phase or 0.0)
        raise ValueError(f"unknown element kind {kind!r}")

    def detection_line(self, no, toks):
        if toks[0].lower() == "subsets":
            if len(toks) != 2 or not toks[1].isdigit():
                self.err(no, "detection", "expected: subsets K")
                return
            k = int(toks[1])
            if k % 2:
                self.err(no, "detection", f"odd detection total {k}")
                return
            self.spec.subsets = k
            return
        counts: dict[str, int] = {}
        for t in toks:
            p, _, c = t.partition("=")
            if not self._path(no, "detection", p):
                return
            try:
                counts[p] = int(c) if c else 1
            except ValueError:
                self.err(no, "detection", f"bad photon count {t!r}")
                return
        pat = DetectionPattern(counts)
        if pat.total % 2:
            self.err(no, "detection", f"odd detection total {pat.total}")
            return
        self.spec.detection.append(pat)

    def options_line(self, no, toks):
        text = " ".join(toks)
        if "=" not in text:
            self.err(no, "options", "expected KEY = VALUE")
            return
        k, v = (s.strip() for s in text.split("=", 1))
        k = k.lower()
        try:
            if k == "order":
                self.spec.order = int(v)
            elif k == "loss":
                self.spec.loss = float(v)
                if not 0 <= self.spec.loss <= 1:
                    raise ValueError("loss (survival probability) must lie in [0, 1]")
            elif k == "outputs":
                outs = tuple(v.split())
                bad = [o for o in outs if o not in OUTPUTS]
                if bad:
                    raise ValueError(f"unknown outputs {bad}")
                self.spec.outputs = outs
            else:
                self.spec.options[k] = v
        except ValueError as exc:
            self.err(no, f"options.{k}", str(exc))

    def validate(self):
        s = self.spec
        if not s.paths:
            self.err(0, "paths", "no paths declared")
        need = -(-s.max_detected() // 2)
        if "fock" in s.outputs and s.order < need:
            self.err(0, "options.order", f"expansion order {s.order} < {need} needed for the detection patterns")
        for k in ("condition",):
            for p in s.options.get(k, "").split():
                if p not in s.paths:
                    self.err(0, f"options.{k}", f"undeclared path {p!r}")


def parse_spec(text: str, name: str = "experiment") -> ExperimentSpec:
    """Parse experiment-file text; raises :class:`SpecError` with all diagnostics."""
    return _Parser(text, name).run()


# --- writing ----------------------------------------------------------------------


def _fmt(x) -> str:
    return repr(float(x)) if not isinstance(x, str) else x


def _element_line(op) -> str:
    if isinstance(op, PhaseShifter):
        return f"phase {op.path} {_fmt(op.phi)}"
    if isinstance(op, BeamSplitter):
        return f"bs {op.path_v} {op.path_w}" + (" mirror" if op.mirror_labels else "")
    if isinstance(op, PolarizingBS):
        return f"pbs {op.path_v} {op.path_w}"
    if isinstance(op, OAMSorter):
        return f"sorter {op.path_v} {op.path_w}"
    if isinstance(op, SPPReflection):
        return f"spp {op.path}"
    if isinstance(op, Projection):
        return f"project {op.path} " + " ".join(str(a) for a in op.accepted)
    if isinstance(op, ModeShifter):
        if isinstance(op.label_map, AffineMap):
            body = f"affine {op.label_map.scale} {op.label_map.offset}"
        else:
            body = " ".join(f"{a}:{b}" for a, b in op.label_map.items())
        ph = f" phase={_fmt(op.phase)}" if op.phase else ""
        return f"mode {op.path} {body}{ph}"
    raise TypeError(f"cannot serialize {op!r}")


def emit_spec(spec: ExperimentSpec) -> str:
    """Serialize a spec so that ``parse_spec`` reproduces it."""
    out = ["[paths]", " ".join(spec.paths), ""]
    if spec.params:
        out.append("[params]")
        out += [f"{k} = {v}" for k, v in spec.params.items()]
        out.append("")
    out.append("[crystals]")
    for i, c in enumerate(spec.crystals):
        gx, phx = spec.crystal_raw[i] if i < len(spec.crystal_raw) else (_fmt(c.g), _fmt(c.phase))
        extra = "".join(f" {k}={v}" for k, v in spec.annotations.get(c.tag, {}).items()) if c.tag else ""
        if c.tag and extra and any(x.tag == c.tag for x in spec.crystals[:i]):
            extra = ""
        out.append(f"{c.path1} {c.label1} {c.path2} {c.label2} {gx} {phx} {c.tag}{extra}")
    out.append("")
    if spec.elements:
        out.append("[elements]")
        for e in spec.elements:
            line = " ".join(e.raw) if e.raw else _element_line(e.op)
            if not e.raw and e.after:
                line += f" after={e.after}"
            out.append(line)
        out.append("")
    out.append("[detection]")
    for p in spec.detection:
        out.append(" ".join(f"{k}={v}" for k, v in p.counts.items()))
    if spec.subsets:
        out.append(f"subsets {spec.subsets}")
    out += ["", "[options]", f"order = {spec.order}", f"loss = {spec.loss!r}", f"outputs = {' '.join(spec.outputs)}"]
    out += [f"{k} = {v}" for k, v in spec.options.items()]
    return "\n".join(out) + "\n"

"""Experiment files, bundled scenarios and report rendering."""

from .registry import SCENARIOS, Scenario, UnknownScenario, data_text, load_specs
from .runner import FORMATS, Result, RunReport, build_graph, build_steps, emit, run_spec
from .spec_format import Diagnostic, ExperimentSpec, SpecError, emit_spec, parse_spec


def run_scenario(name_or_spec, **kwargs) -> RunReport:
    """Run a registered scenario by name, or an :class:`ExperimentSpec`.

    Keyword arguments (``order``, ``loss``, ``sweep``, ``jobs``, ``seed``) are
    passed to :func:`run_spec`.  Multi-file scenarios merge their results in
    file order under one report.
    """
    if isinstance(name_or_spec, ExperimentSpec):
        return run_spec(name_or_spec, **kwargs)
    specs = load_specs(name_or_spec)
    report = None
    for spec in specs:
        part = run_spec(spec, scenario=name_or_spec, **kwargs)
        if report is None:
            report = part
        else:
            report.results.extend(part.results)
    return report


__all__ = [
    "Diagnostic",
    "ExperimentSpec",
    "FORMATS",
    "Result",
    "RunReport",
    "SCENARIOS",
    "Scenario",
    "SpecError",
    "UnknownScenario",
    "build_graph",
    "build_steps",
    "data_text",
    "emit",
    "emit_spec",
    "load_specs",
    "parse_spec",
    "run_scenario",
    "run_spec",
]

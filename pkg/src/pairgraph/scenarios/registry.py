"""Named scenarios bundled with the package."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .spec_format import ExperimentSpec, parse_spec


@dataclass(frozen=True)
class Scenario:
    name: str
    files: tuple[str, ...]
    description: str


SCENARIOS = {
    s.name: s
    for s in [
        Scenario("ghz4_path_identity", ("ghz4_path_identity.exp",), "four-photon GHZ state by path identity"),
        Scenario("frustrated_network", ("fig3.exp",), "frustrated pair creation, phase sweep of the fourfold rate"),
        Scenario("permanent_network", ("perm_network.exp",), "bipartite nine-crystal network, fourfold rates via Perm"),
        Scenario("hafnian_network", ("haf_network.exp",), "general nine-crystal network, fourfold rates via Haf"),
        Scenario("hom", ("hom.exp", "hom_distinguishable.exp"), "two-photon interference at a 50:50 splitter"),
        Scenario("pbs_demo", ("pbs_hh.exp", "pbs_hv.exp"), "polarizing splitter acting on |H,H> and |H,V> pairs"),
        Scenario("multiport_ghz3", ("multiport_ghz3.exp",), "three-photon three-level GHZ state from an OAM multiport"),
        Scenario("multiport_ghz4_maverick", ("multiport_ghz4_maverick.exp",), "four-photon extension with a surplus term"),
        Scenario("entanglement_swapping", ("entanglement_swapping.exp",), "Bell-state projection swaps entanglement onto (a,d)"),
    ]
}


class UnknownScenario(KeyError):
    pass


def data_text(filename: str) -> str:
    return resources.files(__package__).joinpath("data", filename).read_text(encoding="utf-8")


def get(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        raise UnknownScenario(f"unknown scenario {name!r}; known: {', '.join(SCENARIOS)}") from None


def load_specs(name: str) -> list[ExperimentSpec]:
    return [parse_spec(data_text(f), f.removesuffix(".exp")) for f in get(name).files]

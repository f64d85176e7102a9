"""Shared fixtures and small builders used across the test suite."""

from __future__ import annotations

import random
from decimal import Decimal

import pytest

from factornet.ledger import Party
from factornet.networks import Arc, NetworkKind, RiskNetwork
from factornet.tables import CountryIndicators, RegionIndicators, RiskTables, default_tables


@pytest.fixture(scope="session")
def bundled_tables() -> RiskTables:
    return default_tables()


def make_tables(
    *,
    regions: dict[str, tuple[float, float, int]] | None = None,
    sectors: dict[str, str] | None = None,
    countries: dict[str, tuple[int, int, int, float, int]] | None = None,
    **overrides,
) -> RiskTables:
    """Compact RiskTables builder for hand-crafted table content."""
    regions = regions or {
        "Nord": (10.0, 100, 0),
        "Centro": (20.0, 200, 0),
        "Sud": (30.0, 300, 1),
        "Isole": (40.0, 400, 1),
    }
    sectors = sectors or {"11.11": "LOW", "22.22": "LOW", "41.20": "HIGH", "92.00": "HIGH"}
    countries = countries or {
        "IT": (1, 0, 1, 56, 0),
        "DE": (1, 0, 1, 79, 0),
        "PA": (0, 1, 0, 36, 1),
        "LU": (1, 1, 1, 81, 0),
    }
    return RiskTables(
        sector_class=dict(sectors),
        region_indicators={
            name: RegionIndicators(crime_rate=c, suspicious_ops=s, mafia_presence=m)
            for name, (c, s, m) in regions.items()
        },
        country_indicators={
            code: CountryIndicators(
                white_list=bool(w), tax_haven=bool(t), ocse_compliant=bool(o),
                cpi=float(cpi), fatf_listed=bool(f),
            )
            for code, (w, t, o, cpi, f) in countries.items()
        },
        **overrides,
    )


@pytest.fixture
def small_tables() -> RiskTables:
    return make_tables()


def make_party(pid: str, sector="11.11", region="Nord", country="IT", label=None) -> Party:
    return Party(party_id=pid, sector_code=sector, region=region, country=country, high_risk_label=label)


def net_from_arcs(
    arcs: list[tuple[str, str, float]],
    *,
    kind: NetworkKind = NetworkKind.TRANSACTIONS,
    directed: bool = True,
    extra_nodes: tuple[str, ...] = (),
) -> RiskNetwork:
    """Build a finalized network straight from (tail, head, weight) triples."""
    nodes = set(extra_nodes)
    for tail, head, _ in arcs:
        nodes.add(tail)
        nodes.add(head)
    return RiskNetwork(
        kind=kind,
        nodes=frozenset(nodes),
        arcs=tuple(Arc(t, h, float(w)) for t, h, w in arcs),
        directed=directed,
        multigraph=True,
    )


def random_undirected_net(rng: random.Random, n_nodes: int, edge_prob: float) -> RiskNetwork:
    """Random simple graph as an undirected network with unit weights."""
    names = [f"N{i:02d}" for i in range(n_nodes)]
    arcs = []
    for i in range(n_nodes):
        for j in range(i + 1, n_nodes):
            if rng.random() < edge_prob:
                arcs.append((names[i], names[j], 1.0))
    return net_from_arcs(
        arcs, kind=NetworkKind.TACIT, directed=False, extra_nodes=tuple(names)
    )


def random_directed_net(rng: random.Random, n_nodes: int, arc_prob: float) -> RiskNetwork:
    """Random weighted directed network, possibly with parallel arcs."""
    names = [f"N{i:02d}" for i in range(n_nodes)]
    arcs = []
    for i in range(n_nodes):
        for j in range(n_nodes):
            if i != j and rng.random() < arc_prob:
                for _ in range(rng.choice([1, 1, 1, 2])):
                    arcs.append((names[i], names[j], float(rng.choice([1, 2, 3]))))
    return net_from_arcs(arcs, extra_nodes=tuple(names))


def euros(value) -> Decimal:
    return Decimal(str(value))

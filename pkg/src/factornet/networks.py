"""Construction of the four risk networks over ledger parties.

All directed networks share one topology — an arc per retained transaction,
pointing from the paying debtor to the credited seller — and differ only in
how arcs are weighted (amount bins vs. endpoint attribute scores). The tacit
network is an undirected graph joining parties that share an owner or a
representative. Finalization removes self-loops; attribute networks also
collapse parallel arcs.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from .errors import ValidationError
from .ledger import Party, TransactionRecord
from .scoring import arc_score, bin_amount, node_geo_score, node_sector_score, region_scores
from .tables import RiskTables

COLLAPSE_MODES = ("mean", "sum", "max")
DEFAULT_HIGH_RISK_THRESHOLD = 2.5


class NetworkKind(str, Enum):
    TRANSACTIONS = "transactions"
    SECTOR = "sector"
    GEO = "geo"
    TACIT = "tacit"


ANALYTIC_KINDS = (NetworkKind.TRANSACTIONS, NetworkKind.SECTOR, NetworkKind.GEO)


@dataclass(frozen=True)
class Arc:
    tail: str
    head: str
    weight: float


@dataclass(frozen=True)
class RiskNetwork:
    """A finalized, immutable network. ``nodes`` keeps every party that
    appeared in the source ledger, so isolates survive arc filtering."""

    kind: NetworkKind
    nodes: frozenset[str]
    arcs: tuple[Arc, ...]
    directed: bool
    multigraph: bool
    loops_removed: int = 0

    def sorted_nodes(self) -> list[str]:
        return sorted(self.nodes)

    def sorted_arcs(self) -> list[Arc]:
        return sorted(self.arcs, key=lambda a: (a.tail, a.head, a.weight))

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_arcs(self) -> int:
        return len(self.arcs)


def _split_loops(arcs: list[Arc]) -> tuple[list[Arc], int]:
    kept = [a for a in arcs if a.tail != a.head]
    return kept, len(arcs) - len(kept)


def build_transactions_network(
    records: list[TransactionRecord], tables: RiskTables
) -> RiskNetwork:
    """Amount-weighted multigraph: one arc per record, debtor -> seller,
    weighted by the amount bin. Records without a recorded debtor would form
    self-loops and are removed (their count is kept on the network)."""
    arcs = []
    nodes = set()
    for rec in records:
        nodes.add(rec.seller_id)
        tail = rec.debtor_id if rec.debtor_id is not None else rec.seller_id
        nodes.add(tail)
        arcs.append(Arc(tail=tail, head=rec.seller_id, weight=float(bin_amount(rec.amount, tables))))
    arcs, n_loops = _split_loops(arcs)
    return RiskNetwork(
        kind=NetworkKind.TRANSACTIONS,
        nodes=frozenset(nodes),
        arcs=tuple(arcs),
        directed=True,
        multigraph=True,
        loops_removed=n_loops,
    )


def _collapse(arcs: list[Arc], mode: str) -> list[Arc]:
    """Merge parallel arcs per ordered pair into a single weighted arc."""
    if mode not in COLLAPSE_MODES:
        raise ValidationError(f"collapse mode must be one of {COLLAPSE_MODES}, got {mode!r}")
    grouped: dict[tuple[str, str], list[float]] = {}
    for arc in arcs:
        grouped.setdefault((arc.tail, arc.head), []).append(arc.weight)
    out = []
    for (tail, head), weights in grouped.items():
        if mode == "mean":
            weight = sum(weights) / len(weights)
        elif mode == "sum":
            weight = sum(weights)
        else:
            weight = max(weights)
        out.append(Arc(tail=tail, head=head, weight=weight))
    return out


def build_attribute_network(
    records: list[TransactionRecord],
    parties: list[Party],
    tables: RiskTables,
    kind: NetworkKind,
    *,
    arc_combine: str = "mean",
    collapse: str = "mean",
) -> RiskNetwork:
    """Sector or geographic network: transaction topology re-weighted by the
    endpoint node scores, loops removed, parallel arcs collapsed."""
    if kind not in (NetworkKind.SECTOR, NetworkKind.GEO):
        raise ValidationError(f"attribute networks are SECTOR or GEO, got {kind}")

    by_id = {p.party_id: p for p in parties}
    if kind is NetworkKind.SECTOR:
        node_score = {pid: float(node_sector_score(p, tables)) for pid, p in by_id.items()}
    else:
        regions = region_scores(tables)
        node_score = {pid: node_geo_score(p, tables, regions) for pid, p in by_id.items()}

    arcs = []
    nodes = set()
    for rec in records:
        nodes.add(rec.seller_id)
        tail = rec.debtor_id if rec.debtor_id is not None else rec.seller_id
        nodes.add(tail)
        if tail == rec.seller_id:
            continue  # loop: dropped at finalization either way
        for pid in (tail, rec.seller_id):
            if pid not in node_score:
                raise ValidationError(f"party {pid!r} missing from the party list")
        arcs.append(
            Arc(
                tail=tail,
                head=rec.seller_id,
                weight=arc_score(node_score[rec.seller_id], node_score[tail], combine=arc_combine),
            )
        )
    n_loops = sum(
        1
        for rec in records
        if rec.debtor_id is None or rec.debtor_id == rec.seller_id
    )
    arcs = _collapse(arcs, collapse)
    return RiskNetwork(
        kind=kind,
        nodes=frozenset(nodes),
        arcs=tuple(sorted(arcs, key=lambda a: (a.tail, a.head))),
        directed=True,
        multigraph=False,
        loops_removed=n_loops,
    )


def filter_high_risk(net: RiskNetwork, threshold: float = DEFAULT_HIGH_RISK_THRESHOLD) -> RiskNetwork:
    """Keep arcs whose weight reaches ``threshold``; the node set is kept in
    full so downstream feature rows stay total."""
    return replace(net, arcs=tuple(a for a in net.arcs if a.weight >= threshold))


def build_tacit_network(records: list[TransactionRecord], parties: list[Party]) -> RiskNetwork:
    """Undirected simple graph joining clients that share a beneficial owner
    or an authorized representative.

    Owner and representative identifiers on a record describe the client
    executing the operation, i.e. the seller; a party's people are collected
    from its seller-side records.
    """
    people: dict[str, set[str]] = {}
    for rec in records:
        for person in (rec.owner_id, rec.representative_id):
            if person is not None:
                people.setdefault(person, set()).add(rec.seller_id)

    edges: set[tuple[str, str]] = set()
    for members in people.values():
        ordered = sorted(members)
        for i, a in enumerate(ordered):
            for b in ordered[i + 1 :]:
                edges.add((a, b))

    nodes = {p.party_id for p in parties}
    nodes.update(rec.seller_id for rec in records)
    arcs = tuple(Arc(tail=a, head=b, weight=1.0) for a, b in sorted(edges))
    return RiskNetwork(
        kind=NetworkKind.TACIT,
        nodes=frozenset(nodes),
        arcs=arcs,
        directed=False,
        multigraph=False,
    )


def build_analytic_networks(
    records: list[TransactionRecord],
    parties: list[Party],
    tables: RiskTables,
    *,
    arc_combine: str = "mean",
    collapse: str = "mean",
    thresholds: dict[NetworkKind, float] | None = None,
) -> dict[NetworkKind, RiskNetwork]:
    """Build and high-risk-filter the three directed analytic networks."""
    thresholds = thresholds or {}
    nets = {
        NetworkKind.TRANSACTIONS: build_transactions_network(records, tables),
        NetworkKind.SECTOR: build_attribute_network(
            records, parties, tables, NetworkKind.SECTOR, arc_combine=arc_combine, collapse=collapse
        ),
        NetworkKind.GEO: build_attribute_network(
            records, parties, tables, NetworkKind.GEO, arc_combine=arc_combine, collapse=collapse
        ),
    }
    return {
        kind: filter_high_risk(net, thresholds.get(kind, DEFAULT_HIGH_RISK_THRESHOLD))
        for kind, net in nets.items()
    }

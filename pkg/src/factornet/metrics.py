"""Per-client network metrics and feature-row assembly.

Degrees and constraint use arc weights. Closeness and betweenness use
hop-count shortest paths on the symmetrized arc support, restricted to each
node's connected component; both are standardized by component size so that
values are comparable across networks. Isolates score 0 everywhere.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Mapping, NamedTuple

from .errors import ValidationError
from .ledger import Party, TransactionRecord
from .networks import ANALYTIC_KINDS, NetworkKind, RiskNetwork

_KIND_SUFFIX = {
    NetworkKind.TRANSACTIONS: "transactions",
    NetworkKind.SECTOR: "sector",
    NetworkKind.GEO: "geo",
}

_METRIC_NAMES = ("in_degree", "out_degree", "all_degree", "closeness", "betweenness", "constraint")

#: Feature-matrix column order: label, control, then one six-metric block per
#: network (geographic, transactions, sector).
FEATURE_COLUMNS = ["high_risk", "missing_id"] + [
    f"{metric}_{suffix}"
    for suffix in ("geo", "transactions", "sector")
    for metric in _METRIC_NAMES
]


class Degrees(NamedTuple):
    in_degree: float
    out_degree: float
    all_degree: float


class _Graph:
    """Indexed view of a network: symmetrized adjacency for path metrics and
    symmetrized aggregate weights for constraint."""

    def __init__(self, net: RiskNetwork):
        self.ids = net.sorted_nodes()
        self.index = {pid: i for i, pid in enumerate(self.ids)}
        n = len(self.ids)
        weights: list[dict[int, float]] = [dict() for _ in range(n)]
        for arc in net.arcs:
            u, v = self.index[arc.tail], self.index[arc.head]
            weights[u][v] = weights[u].get(v, 0.0) + arc.weight
            weights[v][u] = weights[v].get(u, 0.0) + arc.weight
        self.weights = weights
        self.neighbors = [sorted(w) for w in weights]

    def components(self) -> list[list[int]]:
        seen = [False] * len(self.ids)
        out = []
        for start in range(len(self.ids)):
            if seen[start]:
                continue
            seen[start] = True
            queue = deque([start])
            members = [start]
            while queue:
                u = queue.popleft()
                for v in self.neighbors[u]:
                    if not seen[v]:
                        seen[v] = True
                        members.append(v)
                        queue.append(v)
            out.append(members)
        return out

    def bfs_distances(self, source: int) -> dict[int, int]:
        dist = {source: 0}
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for v in self.neighbors[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        return dist


def weighted_degrees(net: RiskNetwork) -> dict[str, Degrees]:
    """Sum arc weights into (in, out, all) per node; every node of the
    network gets an entry, isolates included."""
    incoming = {pid: 0.0 for pid in net.nodes}
    outgoing = {pid: 0.0 for pid in net.nodes}
    for arc in net.arcs:
        outgoing[arc.tail] += arc.weight
        incoming[arc.head] += arc.weight
    return {
        pid: Degrees(incoming[pid], outgoing[pid], incoming[pid] + outgoing[pid])
        for pid in net.nodes
    }


def closeness(net: RiskNetwork) -> dict[str, float]:
    """Component-restricted standardized closeness.

    For a node in a component of size c >= 2 this is (c - 1) divided by the
    sum of hop distances to the other component members; isolates get 0.
    """
    graph = _Graph(net)
    out = {pid: 0.0 for pid in net.nodes}
    for component in graph.components():
        if len(component) < 2:
            continue
        for u in component:
            total = sum(graph.bfs_distances(u).values())
            out[graph.ids[u]] = (len(component) - 1) / total
    return out


def betweenness(net: RiskNetwork) -> dict[str, float]:
    """Standardized shortest-path betweenness on the symmetrized graph.

    Brandes accumulation per source gives, for each node, twice the sum over
    unordered pairs of the fraction of their shortest paths passing through
    it; dividing by (c - 1)(c - 2) (c = component size) therefore yields the
    pair-count standardization. Components smaller than 3 score 0.
    """
    graph = _Graph(net)
    out = {pid: 0.0 for pid in net.nodes}
    for component in graph.components():
        c = len(component)
        if c < 3:
            continue
        raw = {u: 0.0 for u in component}
        for source in component:
            _brandes_accumulate(graph, source, raw)
        denom = (c - 1) * (c - 2)
        for u in component:
            out[graph.ids[u]] = raw[u] / denom
    return out


def _brandes_accumulate(graph: _Graph, source: int, raw: dict[int, float]):
    """One source pass of Brandes' algorithm: BFS with shortest-path counts,
    then reverse-order dependency accumulation into ``raw``."""
    dist = {source: 0}
    sigma = {source: 1}
    preds: dict[int, list[int]] = {source: []}
    order = []
    queue = deque([source])
    while queue:
        u = queue.popleft()
        order.append(u)
        for v in graph.neighbors[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                sigma[v] = 0
                preds[v] = []
                queue.append(v)
            if dist[v] == dist[u] + 1:
                sigma[v] += sigma[u]
                preds[v].append(u)
    delta = {u: 0.0 for u in order}
    for w in reversed(order):
        for u in preds[w]:
            delta[u] += sigma[u] / sigma[w] * (1.0 + delta[w])
        if w != source:
            raw[w] += delta[w]


def network_constraint(net: RiskNetwork) -> dict[str, float]:
    """Burt's network constraint from symmetrized, row-normalized weights.

    With p the proportional tie strengths of the symmetrized weight matrix,
    a node's constraint is the sum over its neighbors j of
    (p_ij + sum_q p_iq * p_qj)^2, q ranging over the node's other neighbors.
    Isolates get 0.
    """
    graph = _Graph(net)
    n = len(graph.ids)
    p: list[dict[int, float]] = []
    for i in range(n):
        total = sum(graph.weights[i].values())
        p.append({j: w / total for j, w in graph.weights[i].items()} if total > 0 else {})

    out = {}
    for i in range(n):
        total = 0.0
        for j in graph.neighbors[i]:
            indirect = 0.0
            for q in graph.neighbors[i]:
                if q == j:
                    continue
                pqj = p[q].get(j)
                if pqj is not None:
                    indirect += p[i][q] * pqj
            total += (p[i][j] + indirect) ** 2
        out[graph.ids[i]] = total
    return out


def missing_id(records: list[TransactionRecord]) -> dict[str, int]:
    """Per seller, the number of records missing the owner, the
    representative, or the debtor (a record counts once however many of the
    three are absent)."""
    counts: dict[str, int] = {}
    for rec in records:
        counts.setdefault(rec.seller_id, 0)
        if rec.owner_id is None or rec.representative_id is None or rec.debtor_id is None:
            counts[rec.seller_id] += 1
    return counts


@dataclass(frozen=True)
class ClientFeatureRow:
    """One party's full feature vector: 18 network metrics plus the
    missing-data control and the optional risk label."""

    party_id: str
    high_risk_label: int | None
    missing_id: int
    metrics: Mapping[str, float]

    @property
    def fit_eligible(self) -> bool:
        return self.high_risk_label is not None

    def value(self, column: str) -> float:
        if column == "missing_id":
            return float(self.missing_id)
        if column == "high_risk":
            if self.high_risk_label is None:
                raise ValidationError(f"party {self.party_id!r} has no high_risk label")
            return float(self.high_risk_label)
        try:
            return self.metrics[column]
        except KeyError:
            raise ValidationError(f"unknown feature column {column!r}") from None


def compute_metrics(net: RiskNetwork) -> dict[str, dict[str, float]]:
    """All six metrics of one network, keyed by metric name then party."""
    degrees = weighted_degrees(net)
    return {
        "in_degree": {pid: d.in_degree for pid, d in degrees.items()},
        "out_degree": {pid: d.out_degree for pid, d in degrees.items()},
        "all_degree": {pid: d.all_degree for pid, d in degrees.items()},
        "closeness": closeness(net),
        "betweenness": betweenness(net),
        "constraint": network_constraint(net),
    }


def assemble_features(
    networks: Mapping[NetworkKind, RiskNetwork],
    records: list[TransactionRecord],
    parties: list[Party],
) -> list[ClientFeatureRow]:
    """One feature row per party, sorted by id.

    Metrics come from the supplied (typically high-risk-filtered) networks;
    parties absent from a network score 0 on its block. Unlabeled parties
    are kept — they are scored, just not fit on.
    """
    for kind in ANALYTIC_KINDS:
        if kind not in networks:
            raise ValidationError(f"missing {kind.value} network")
    per_kind = {kind: compute_metrics(networks[kind]) for kind in ANALYTIC_KINDS}
    missing = missing_id(records)
    labels = {p.party_id: p.high_risk_label for p in parties}

    party_ids = {p.party_id for p in parties}
    party_ids.update(networks[NetworkKind.TRANSACTIONS].nodes)

    rows = []
    for pid in sorted(party_ids):
        metrics = {}
        for kind in ANALYTIC_KINDS:
            suffix = _KIND_SUFFIX[kind]
            for metric in _METRIC_NAMES:
                metrics[f"{metric}_{suffix}"] = per_kind[kind][metric].get(pid, 0.0)
        rows.append(
            ClientFeatureRow(
                party_id=pid,
                high_risk_label=labels.get(pid),
                missing_id=missing.get(pid, 0),
                metrics=metrics,
            )
        )
    return rows

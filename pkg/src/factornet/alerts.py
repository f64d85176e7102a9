"""Cluster analysis of the tacit-link network and the wake-up-call rule:
when any member of a connected component is flagged, warn every other
member of that component."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import ValidationError
from .networks import NetworkKind, RiskNetwork

ALERT_NONE = "NONE"
ALERT_WATCH = "WATCH"


@dataclass(frozen=True)
class TacitComponent:
    """A connected group of clients joined by shared owners or
    representatives. WATCH means at least one member is flagged and at least
    one is not."""

    component_id: int
    members: frozenset[str]
    flagged_members: frozenset[str]

    @property
    def alert_level(self) -> str:
        if self.flagged_members and len(self.members) > len(self.flagged_members):
            return ALERT_WATCH
        return ALERT_NONE


@dataclass(frozen=True)
class Alert:
    party_id: str
    component_id: int
    reasons: tuple[str, ...]


def components(net: RiskNetwork, flags: Iterable[str] = ()) -> list[TacitComponent]:
    """Connected components of the tacit network, isolates excluded.

    Components are numbered from 1 in order of their smallest member id, so
    ids are stable across runs and edge orderings.
    """
    if net.kind is not NetworkKind.TACIT:
        raise ValidationError(f"components are defined on the tacit network, got {net.kind.value}")
    flag_set = set(flags)

    parent: dict[str, str] = {}

    def find(x: str) -> str:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:  # path compression
            parent[x], x = root, parent[x]
        return root

    for arc in net.arcs:
        for node in (arc.tail, arc.head):
            parent.setdefault(node, node)
        ra, rb = find(arc.tail), find(arc.head)
        if ra != rb:
            parent[rb] = ra

    groups: dict[str, set[str]] = {}
    for node in parent:
        groups.setdefault(find(node), set()).add(node)

    ordered = sorted(groups.values(), key=min)
    return [
        TacitComponent(
            component_id=i,
            members=frozenset(members),
            flagged_members=frozenset(members & flag_set),
        )
        for i, members in enumerate(ordered, start=1)
    ]


def propagate_alerts(tacit_components: list[TacitComponent], flags: Iterable[str]) -> list[Alert]:
    """Emit one alert per unflagged member of every component that contains
    at least one flagged member; the reasons list the flagged co-members.
    Fully flagged components and flagged isolates emit nothing."""
    flag_set = set(flags)
    alerts = []
    for comp in tacit_components:
        flagged = sorted(comp.members & flag_set)
        if not flagged:
            continue
        for member in sorted(comp.members - flag_set):
            alerts.append(Alert(party_id=member, component_id=comp.component_id, reasons=tuple(flagged)))
    alerts.sort(key=lambda a: a.party_id)
    return alerts

"""Tacit components and the wake-up-call propagation rule, checked against a
brute-force reachability oracle."""

from __future__ import annotations

import random

import pytest

from factornet.alerts import ALERT_NONE, ALERT_WATCH, components, propagate_alerts
from factornet.errors import ValidationError
from factornet.networks import NetworkKind

from conftest import net_from_arcs, random_undirected_net


def tacit(arcs, extra_nodes=()):
    return net_from_arcs(arcs, kind=NetworkKind.TACIT, directed=False, extra_nodes=extra_nodes)


def reachability_oracle(net, flags: set[str]) -> set[str]:
    """Alert set as the union over flagged nodes of everything reachable from
    them (minus the flags), via naive edge-set expansion."""
    edges = {(a.tail, a.head) for a in net.arcs} | {(a.head, a.tail) for a in net.arcs}
    alerted = set()
    for flag in flags:
        frontier = {flag}
        seen = {flag}
        while frontier:
            frontier = {b for (a, b) in edges if a in frontier and b not in seen}
            seen |= frontier
        if len(seen) > 1:
            alerted |= seen
    return alerted - flags


class TestComponents:
    def test_two_components_exclude_isolates(self):
        net = tacit([("A", "B", 1), ("B", "C", 1), ("D", "E", 1)], extra_nodes=("LONER",))
        comps = components(net)
        assert [sorted(c.members) for c in comps] == [["A", "B", "C"], ["D", "E"]]
        assert [c.component_id for c in comps] == [1, 2]

    def test_edgeless_network_has_no_components(self):
        net = tacit([], extra_nodes=("A", "B"))
        assert components(net) == []

    def test_component_ids_stable_under_edge_order(self):
        arcs = [("C", "D", 1), ("A", "B", 1), ("B", "C", 1), ("X", "Y", 1)]
        ids1 = [(c.component_id, sorted(c.members)) for c in components(tacit(arcs))]
        ids2 = [(c.component_id, sorted(c.members)) for c in components(tacit(list(reversed(arcs))))]
        assert ids1 == ids2

    def test_alert_levels(self):
        net = tacit([("A", "B", 1), ("C", "D", 1), ("E", "F", 1)])
        comps = components(net, flags={"A", "C", "D"})
        by_min = {min(c.members): c for c in comps}
        assert by_min["A"].alert_level == ALERT_WATCH  # partially flagged
        assert by_min["C"].alert_level == ALERT_NONE   # fully flagged
        assert by_min["E"].alert_level == ALERT_NONE   # unflagged

    def test_only_tacit_networks_accepted(self):
        net = net_from_arcs([("A", "B", 1)])
        with pytest.raises(ValidationError, match="tacit"):
            components(net)


class TestPropagateAlerts:
    def test_flagging_one_member_alerts_the_other_two(self):
        net = tacit([("A", "B", 1), ("B", "C", 1)])
        alerts = propagate_alerts(components(net, {"B"}), {"B"})
        assert [(a.party_id, a.reasons) for a in alerts] == [("A", ("B",)), ("C", ("B",))]

    def test_no_flags_no_alerts(self):
        net = tacit([("A", "B", 1)])
        assert propagate_alerts(components(net), set()) == []

    def test_fully_flagged_component_emits_nothing(self):
        net = tacit([("A", "B", 1), ("B", "C", 1)])
        flags = {"A", "B", "C"}
        assert propagate_alerts(components(net, flags), flags) == []

    def test_flagged_isolate_emits_nothing(self):
        net = tacit([("A", "B", 1)], extra_nodes=("LONER",))
        assert propagate_alerts(components(net, {"LONER"}), {"LONER"}) == []

    def test_reasons_list_all_flagged_co_members(self):
        net = tacit([("A", "B", 1), ("B", "C", 1), ("C", "D", 1)])
        flags = {"B", "D"}
        alerts = propagate_alerts(components(net, flags), flags)
        assert [(a.party_id, a.reasons) for a in alerts] == [("A", ("B", "D")), ("C", ("B", "D"))]

    def test_adding_a_flag_never_removes_alerts(self):
        rng = random.Random(71)
        for _ in range(30):
            net = random_undirected_net(rng, rng.randint(2, 12), rng.uniform(0.1, 0.5))
            nodes = net.sorted_nodes()
            flags = set(rng.sample(nodes, rng.randint(0, len(nodes) // 2)))
            base = {a.party_id for a in propagate_alerts(components(net, flags), flags)}
            extra = set(flags)
            candidates = [n for n in nodes if n not in flags]
            if candidates:
                extra.add(rng.choice(candidates))
            grown = {a.party_id for a in propagate_alerts(components(net, extra), extra)}
            assert base - extra <= grown

    def test_matches_reachability_oracle_on_random_graphs(self):
        rng = random.Random(73)
        for _ in range(100):
            net = random_undirected_net(rng, rng.randint(1, 12), rng.uniform(0.0, 0.6))
            nodes = net.sorted_nodes()
            flags = set(rng.sample(nodes, rng.randint(0, len(nodes))))
            alerts = propagate_alerts(components(net, flags), flags)
            assert {a.party_id for a in alerts} == reachability_oracle(net, flags)

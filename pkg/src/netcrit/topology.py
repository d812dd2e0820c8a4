"""Role-typed graph model for control-network topologies.

A topology is an undirected graph whose nodes are traffic generators,
routers, or the single sink (the balancing authority that all measurement
traffic drains into). This module defines the line-oriented file format,
validation of the structural invariants, the three built-in case-study
networks, and construction of the equal-probability routing tables used by
the random-walk forwarding simulator.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from importlib import resources
from pathlib import Path


class NodeRole(Enum):
    GENERATOR = "generator"
    ROUTER = "router"
    SINK = "sink"


class TopologyError(ValueError):
    """Malformed topology text or a violated structural invariant."""


def natural_key(node_id: str):
    """Sort key that puts integer-like ids in numeric order ("2" before "10")."""
    if node_id.isdigit():
        return (0, int(node_id), node_id)
    return (1, 0, node_id)


def edge_key(u: str, v: str) -> tuple[str, str]:
    """Canonical unordered representation of an edge."""
    if natural_key(u) <= natural_key(v):
        return (u, v)
    return (v, u)


@dataclass(frozen=True)
class Topology:
    """Undirected graph of generators, routers and exactly one sink.

    Instances are immutable after construction and safe to share across
    concurrently executing simulation runs. ``nodes`` preserves declaration
    order; ``edges`` holds unordered pairs as declared.
    """

    name: str
    nodes: tuple[tuple[str, NodeRole], ...]
    edges: tuple[tuple[str, str], ...]

    @cached_property
    def roles(self) -> dict[str, NodeRole]:
        return {nid: role for nid, role in self.nodes}

    @cached_property
    def adjacency(self) -> dict[str, tuple[str, ...]]:
        """Neighbors of every node, in edge declaration order. Do not mutate."""
        nbrs: dict[str, list[str]] = {nid: [] for nid, _ in self.nodes}
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return {nid: tuple(ns) for nid, ns in nbrs.items()}

    @cached_property
    def sink_id(self) -> str:
        for nid, role in self.nodes:
            if role is NodeRole.SINK:
                return nid
        raise TopologyError(f"topology '{self.name}' has no sink")

    @property
    def node_ids(self) -> tuple[str, ...]:
        return tuple(nid for nid, _ in self.nodes)

    def ids_with_role(self, role: NodeRole) -> tuple[str, ...]:
        return tuple(nid for nid, r in self.nodes if r is role)

    @property
    def router_ids(self) -> tuple[str, ...]:
        return self.ids_with_role(NodeRole.ROUTER)

    @property
    def generator_ids(self) -> tuple[str, ...]:
        return self.ids_with_role(NodeRole.GENERATOR)

    def sink_adjacent_routers(self) -> frozenset[str]:
        """Routers directly linked to the sink (excluded from delay rankings)."""
        return frozenset(self.adjacency[self.sink_id])

    def edge_keys(self) -> tuple[tuple[str, str], ...]:
        return tuple(edge_key(u, v) for u, v in self.edges)


def validate_topology(t: Topology) -> None:
    """Raise TopologyError naming the violated invariant and the offending element."""
    seen: set[str] = set()
    for nid, _ in t.nodes:
        if nid in seen:
            raise TopologyError(f"duplicate node id '{nid}'")
        seen.add(nid)

    roles = t.roles
    sinks = t.ids_with_role(NodeRole.SINK)
    if len(sinks) == 0:
        raise TopologyError("no sink declared (exactly one required)")
    if len(sinks) > 1:
        raise TopologyError(f"multiple sinks declared: {', '.join(sinks)}")
    if not t.ids_with_role(NodeRole.GENERATOR):
        raise TopologyError("no generator declared (at least one required)")
    if not t.router_ids:
        raise TopologyError("no router declared (at least one required)")

    seen_edges: set[tuple[str, str]] = set()
    for u, v in t.edges:
        if u == v:
            raise TopologyError(f"self-loop on node '{u}'")
        for end in (u, v):
            if end not in roles:
                raise TopologyError(f"edge {u}-{v} references undeclared node '{end}'")
        key = edge_key(u, v)
        if key in seen_edges:
            raise TopologyError(f"duplicate edge {key[0]}-{key[1]}")
        seen_edges.add(key)

    adjacency = t.adjacency
    for gid in t.generator_ids:
        nbrs = adjacency[gid]
        if not nbrs:
            raise TopologyError(f"generator '{gid}' has no link (degree >= 1 required)")
        for n in nbrs:
            if roles[n] is not NodeRole.ROUTER:
                raise TopologyError(
                    f"generator '{gid}' may connect only to routers (edge {gid}-{n})"
                )
    for n in adjacency[t.sink_id]:
        if roles[n] is not NodeRole.ROUTER:
            raise TopologyError(
                f"sink '{t.sink_id}' may connect only to routers (edge {t.sink_id}-{n})"
            )

    # Connectivity: every node must reach the sink.
    reached = {t.sink_id}
    frontier = [t.sink_id]
    while frontier:
        nxt = []
        for v in frontier:
            for w in adjacency[v]:
                if w not in reached:
                    reached.add(w)
                    nxt.append(w)
        frontier = nxt
    if len(reached) != len(t.nodes):
        missing = sorted(set(roles) - reached, key=natural_key)
        raise TopologyError(f"graph not connected; unreachable from sink: {', '.join(missing)}")


_ROLES_BY_NAME = {r.value: r for r in NodeRole}


def parse_topology(text: str, name: str = "topology") -> Topology:
    """Parse the line-oriented topology format.

    Grammar (UTF-8, '#' starts a comment, blank lines ignored)::

        node <id> <generator|router|sink>
        edge <id> <id>

    Raises TopologyError with the offending line number on syntax errors and
    with the violated invariant on validation failures.
    """
    nodes: list[tuple[str, NodeRole]] = []
    edges: list[tuple[str, str]] = []
    declared: set[str] = set()
    sink_seen: str | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "node":
            if len(parts) != 3:
                raise TopologyError(f"line {lineno}: expected 'node <id> <role>'")
            nid, role_name = parts[1], parts[2]
            role = _ROLES_BY_NAME.get(role_name)
            if role is None:
                raise TopologyError(f"line {lineno}: unknown role '{role_name}'")
            if nid in declared:
                raise TopologyError(f"line {lineno}: duplicate node id '{nid}'")
            if role is NodeRole.SINK:
                if sink_seen is not None:
                    raise TopologyError(
                        f"line {lineno}: multiple sinks ('{sink_seen}' already declared)"
                    )
                sink_seen = nid
            declared.add(nid)
            nodes.append((nid, role))
        elif parts[0] == "edge":
            if len(parts) != 3:
                raise TopologyError(f"line {lineno}: expected 'edge <id> <id>'")
            edges.append((parts[1], parts[2]))
        else:
            raise TopologyError(f"line {lineno}: unknown directive '{parts[0]}'")

    topo = Topology(name=name, nodes=tuple(nodes), edges=tuple(edges))
    validate_topology(topo)
    return topo


def serialize_topology(t: Topology) -> str:
    """Render a topology back to the file format (comments are not preserved)."""
    lines = [f"node {nid} {role.value}" for nid, role in t.nodes]
    lines += [f"edge {u} {v}" for u, v in t.edges]
    return "\n".join(lines) + "\n"


def load_topology(path: str | Path) -> Topology:
    p = Path(path)
    return parse_topology(p.read_text(encoding="utf-8"), name=p.stem)


BUILTIN_CASE_IDS = (1, 2, 3)


def builtin_case(case_id: int) -> Topology:
    """Load one of the built-in case-study topologies (1, 2 or 3).

    Case 1: meshed wide-area network, 18 routers fed by 7 traffic zones
    (approximate layout; see the file header). Case 2: radial network whose
    fourteen routers form a complete binary tree under the sink, one
    generator per leaf router. Case 3: five-router ring with three
    generators on every router except the sink uplink.
    """
    if case_id not in BUILTIN_CASE_IDS:
        raise ValueError(f"invalid case id {case_id!r}; choose one of {BUILTIN_CASE_IDS}")
    text = (
        resources.files("netcrit.data").joinpath(f"case{case_id}.topo").read_text("utf-8")
    )
    return parse_topology(text, name=f"case{case_id}")


@dataclass(frozen=True)
class RoutingTable:
    """Per-router forwarding candidates with equal base probabilities.

    ``entries[router]`` lists (neighbor, probability) pairs covering every
    adjacent router plus the sink; generators are never forwarding targets.
    Immutable by convention; built once per topology and shared.
    """

    entries: dict[str, tuple[tuple[str, float], ...]]


def build_routing_table(t: Topology) -> RoutingTable:
    """Equal-probability routing over each router's eligible neighbors."""
    roles = t.roles
    entries: dict[str, tuple[tuple[str, float], ...]] = {}
    for router in t.router_ids:
        eligible = [n for n in t.adjacency[router] if roles[n] is not NodeRole.GENERATOR]
        if not eligible:
            raise TopologyError(
                f"router '{router}' has no eligible forwarding neighbor "
                "(adjacent routers or sink required)"
            )
        p = 1.0 / len(eligible)
        entries[router] = tuple((n, p) for n in eligible)
    return RoutingTable(entries=entries)

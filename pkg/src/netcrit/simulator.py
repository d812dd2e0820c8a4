"""Seeded discrete-event simulation of packet traffic on a topology.

Traffic model: every generator emits packets with exponential inter-arrival
times and exponential sizes into its adjacent router. Routers are
single-server FIFO queues with exponential service; a served packet is
forwarded to a uniformly chosen eligible neighbor, never back on its arrival
link unless that is the only option. The sink absorbs packets on arrival.
Packet size is sampled and recorded but does not affect service time, which
is specified in packets per second.

A DoS/DDoS disturbance collapses the forwarding probability of the targeted
routers: an arriving packet is admitted with that probability and otherwise
discarded on the spot, before it consumes queue space or server time. The
attacked router is effectively out of the system, which is what drives its
measured delay toward zero while traffic starves or piles up elsewhere.

Per-router delay is the running mean of sojourn (enter-to-leave) times over
forwarded packets, sampled every ``monitor_interval`` seconds.

The event calendar is a priority queue keyed by (timestamp, insertion
sequence); ties break by insertion order, so a run is fully deterministic
given its seed.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

from .rng import stream
from .topology import RoutingTable, Topology, build_routing_table, natural_key


class SimulationLimitError(RuntimeError):
    """The event budget was exhausted before the configured duration elapsed."""


def sample_exponential(rng, mean: float) -> float:
    """Inverse-CDF exponential draw: -mean * ln(1 - u) for one uniform u."""
    if mean <= 0:
        raise ValueError("mean must be > 0")
    return -mean * math.log1p(-rng.random())


@dataclass(frozen=True)
class SimConfig:
    """Run parameters. Times are continuous double-precision seconds.

    ``ttl`` is a hop budget (0 = unlimited). ``interarrival_cap`` optionally
    truncates inter-arrival draws for sensitivity studies; the default keeps
    the plain exponential and with it the Poisson arrival property.
    ``exponential_sampling`` switches the monitor from the default fixed tick
    to exponential sampling gaps with the same mean.
    """

    duration: float
    seed: int = 0
    mean_packet_size: float = 100.0
    mean_interarrival: float = 2.0
    router_service_rate: float = 2.2
    monitor_interval: float = 0.5
    ttl: int = 0
    interarrival_cap: float | None = None
    exponential_sampling: bool = False
    event_cap: int = 100_000_000

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("duration must be > 0")
        for name in ("mean_packet_size", "mean_interarrival", "router_service_rate",
                     "monitor_interval"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.ttl < 0:
            raise ValueError("ttl must be >= 0 (0 = unlimited)")
        if self.interarrival_cap is not None and self.interarrival_cap <= 0:
            raise ValueError("interarrival_cap must be > 0 when set")
        if self.event_cap <= 0:
            raise ValueError("event_cap must be > 0")


@dataclass(frozen=True)
class Scenario:
    """Stable traffic or a DoS/DDoS disturbance on one or more routers."""

    kind: str  # "stable" | "dos" | "ddos"
    targets: tuple[str, ...] = ()
    attack_forwarding_probability: float = 0.01

    def __post_init__(self):
        if self.kind not in ("stable", "dos", "ddos"):
            raise ValueError(f"unknown scenario kind '{self.kind}'")
        if self.kind == "stable" and self.targets:
            raise ValueError("stable scenario takes no targets")
        if self.kind == "dos" and len(self.targets) != 1:
            raise ValueError("dos scenario takes exactly one target")
        if self.kind == "ddos" and not self.targets:
            raise ValueError("ddos scenario needs at least one target")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError("scenario targets must be distinct")
        if not 0.0 < self.attack_forwarding_probability <= 1.0:
            raise ValueError("attack_forwarding_probability must be in (0, 1]")

    @classmethod
    def stable(cls) -> "Scenario":
        return cls(kind="stable")

    @classmethod
    def dos(cls, target: str, attack_forwarding_probability: float = 0.01) -> "Scenario":
        return cls(kind="dos", targets=(target,),
                   attack_forwarding_probability=attack_forwarding_probability)

    @classmethod
    def ddos(cls, targets, attack_forwarding_probability: float = 0.01) -> "Scenario":
        ordered = tuple(sorted(set(targets), key=natural_key))
        return cls(kind="ddos", targets=ordered,
                   attack_forwarding_probability=attack_forwarding_probability)

    @classmethod
    def from_string(cls, text: str, attack_forwarding_probability: float = 0.01) -> "Scenario":
        """Parse the scenario grammar: "stable" | "dos:<id>" | "ddos:<id>,<id>[,...]"."""
        head, _, rest = text.strip().partition(":")
        if head == "stable":
            if rest:
                raise ValueError("stable scenario takes no targets")
            return cls.stable()
        if head == "dos":
            if not rest:
                raise ValueError("dos scenario needs a target, e.g. dos:5")
            return cls.dos(rest, attack_forwarding_probability)
        if head == "ddos":
            targets = [p for p in rest.split(",") if p]
            if not targets:
                raise ValueError("ddos scenario needs targets, e.g. ddos:1,3")
            return cls.ddos(targets, attack_forwarding_probability)
        raise ValueError(f"unknown scenario '{text}' (expected stable | dos:<id> | ddos:<id>,...)")

    @property
    def label(self) -> str:
        if self.kind == "stable":
            return "stable"
        return f"{self.kind}:{','.join(self.targets)}"


@dataclass(slots=True)
class Packet:
    id: int
    size: float
    origin: str
    created_at: float
    arrival_link: str | None = None
    hops: int = 0


@dataclass
class RouterState:
    """Mutable per-router simulation state.

    The FIFO queue holds (packet, arrival_time) pairs; the packet in service
    stays at the head until its completion event fires.
    """

    queue: deque = field(default_factory=deque)
    in_service: bool = False
    busy_until: float = 0.0
    forwarded_count: int = 0
    cumulative_sojourn: float = 0.0
    dropped_count: int = 0
    attacked: bool = False
    attack_forwarding_probability: float = 1.0


@dataclass
class RouterSummary:
    final_delay: float
    forwarded: int
    dropped_attack: int
    attacked: bool
    sink_adjacent: bool


@dataclass
class SimResult:
    """Outcome of one run: delay time series, per-router stats, accounting.

    The packet accounting satisfies
    generated == delivered_to_sink + dropped_by_attack + dropped_by_ttl +
    in_flight_at_end, exactly, for every seed and scenario.
    """

    topology_name: str
    scenario: Scenario
    seed: int
    duration: float
    samples: dict[str, list[tuple[float, float]]]
    routers: dict[str, RouterSummary]
    generated: int
    delivered_to_sink: int
    dropped_by_attack: int
    dropped_by_ttl: int
    in_flight_at_end: int
    event_count: int
    generated_size_total: float
    interarrival_total: float
    interarrival_draws: int

    @property
    def mean_packet_size_observed(self) -> float:
        return self.generated_size_total / self.generated if self.generated else 0.0

    @property
    def mean_interarrival_observed(self) -> float:
        return self.interarrival_total / self.interarrival_draws if self.interarrival_draws else 0.0


def apply_scenario(scenario: Scenario, states: dict[str, RouterState]) -> dict[str, RouterState]:
    """Set the attacked flag (and recorded drop probability) on exactly the targets."""
    unknown = [t for t in scenario.targets if t not in states]
    if unknown:
        raise ValueError(f"scenario targets unknown routers: {', '.join(unknown)}")
    for st in states.values():
        st.attacked = False
        st.attack_forwarding_probability = 1.0
    for target in scenario.targets:
        st = states[target]
        st.attacked = True
        st.attack_forwarding_probability = scenario.attack_forwarding_probability
    return states


def next_hop(table: RoutingTable, router: str, arrival_link: str | None, rng) -> str:
    """Uniform choice among eligible neighbors, excluding the arrival link.

    Packets injected by a local generator have no arrival link and choose
    among all eligible neighbors. When the exclusion empties the candidate
    set (a leaf router), the packet goes back on its arrival link.
    """
    entries = table.entries.get(router)
    if entries is None:
        raise ValueError(f"'{router}' is not a router in the routing table")
    candidates = [n for n, _ in entries if n != arrival_link]
    if not candidates:
        return arrival_link
    if len(candidates) == 1:
        return candidates[0]
    return candidates[int(rng.random() * len(candidates))]


# Event kinds, in no particular priority: ties on the calendar break by
# insertion sequence alone.
_GEN, _ARRIVE, _COMPLETE, _MONITOR = 0, 1, 2, 3


def run(
    topology: Topology,
    config: SimConfig,
    scenario: Scenario,
    on_event: Callable[[str, float, str, int], None] | None = None,
) -> SimResult:
    """Execute one simulation run; deterministic given (topology, config, scenario).

    ``on_event``, if given, is called as on_event(kind, time, router, packet_id)
    with kind in {"arrive", "forward", "drop_attack", "drop_ttl"}; it exists
    for tracing and tests and does not affect the run.
    """
    table = build_routing_table(topology)
    sink = topology.sink_id
    router_ids = list(topology.router_ids)
    generator_ids = list(topology.generator_ids)
    adjacency = topology.adjacency
    sink_adjacent = topology.sink_adjacent_routers()

    states = {r: RouterState() for r in router_ids}
    apply_scenario(scenario, states)

    gen_streams = {g: stream(config.seed, "generator", g) for g in generator_ids}
    router_streams = {r: stream(config.seed, "router", r) for r in router_ids}
    monitor_streams = (
        {r: stream(config.seed, "monitor", r) for r in router_ids}
        if config.exponential_sampling
        else {}
    )

    samples: dict[str, list[tuple[float, float]]] = {r: [] for r in router_ids}
    heap: list[tuple] = []
    seq = 0
    generated = delivered = dropped_attack = dropped_ttl = 0
    size_total = 0.0
    inter_total = 0.0
    inter_draws = 0
    next_packet_id = 0
    mean_service = 1.0 / config.router_service_rate
    duration = config.duration
    ttl = config.ttl

    def push(time: float, kind: int, node, pkt=None):
        nonlocal seq
        heapq.heappush(heap, (time, seq, kind, node, pkt))
        seq += 1

    def draw_interarrival(g: str) -> float:
        nonlocal inter_total, inter_draws
        dt = sample_exponential(gen_streams[g], config.mean_interarrival)
        if config.interarrival_cap is not None:
            dt = min(dt, config.interarrival_cap)
        inter_total += dt
        inter_draws += 1
        return dt

    def begin_service(r: str, now: float):
        st = states[r]
        st.in_service = True
        done = now + sample_exponential(router_streams[r], mean_service)
        st.busy_until = done
        push(done, _COMPLETE, r)

    for g in generator_ids:
        push(draw_interarrival(g), _GEN, g)
    if config.exponential_sampling:
        for r in router_ids:
            push(sample_exponential(monitor_streams[r], config.monitor_interval), _MONITOR, r)
    else:
        push(config.monitor_interval, _MONITOR, None)

    events = 0
    while heap and heap[0][0] <= duration:
        now, _, kind, node, pkt = heapq.heappop(heap)
        events += 1
        if events > config.event_cap:
            raise SimulationLimitError(
                f"event cap {config.event_cap} exceeded at t={now:.3f}s "
                f"(raise SimConfig.event_cap to continue)"
            )

        if kind == _ARRIVE:
            st = states[node]
            if st.attacked and router_streams[node].random() >= st.attack_forwarding_probability:
                st.dropped_count += 1
                dropped_attack += 1
                if on_event is not None:
                    on_event("drop_attack", now, node, pkt.id)
                continue
            if on_event is not None:
                on_event("arrive", now, node, pkt.id)
            st.queue.append((pkt, now))
            if not st.in_service:
                begin_service(node, now)

        elif kind == _COMPLETE:
            st = states[node]
            pkt, arrived_at = st.queue.popleft()
            st.in_service = False
            if ttl and pkt.hops + 1 > ttl:
                dropped_ttl += 1
                if on_event is not None:
                    on_event("drop_ttl", now, node, pkt.id)
            else:
                st.cumulative_sojourn += now - arrived_at
                st.forwarded_count += 1
                pkt.hops += 1
                dest = next_hop(table, node, pkt.arrival_link, router_streams[node])
                if on_event is not None:
                    on_event("forward", now, node, pkt.id)
                if dest == sink:
                    delivered += 1
                else:
                    pkt.arrival_link = node
                    push(now, _ARRIVE, dest, pkt)
            if st.queue:
                begin_service(node, now)

        elif kind == _GEN:
            size = 0.0
            while size <= 0.0:  # sizes must be strictly positive
                size = sample_exponential(gen_streams[node], config.mean_packet_size)
            new_pkt = Packet(id=next_packet_id, size=size, origin=node, created_at=now)
            next_packet_id += 1
            generated += 1
            size_total += size
            targets = adjacency[node]
            if len(targets) == 1:
                router = targets[0]
            else:
                router = targets[int(gen_streams[node].random() * len(targets))]
            push(now, _ARRIVE, router, new_pkt)
            push(now + draw_interarrival(node), _GEN, node)

        else:  # _MONITOR
            if node is None:
                for r in router_ids:
                    st = states[r]
                    d = st.cumulative_sojourn / st.forwarded_count if st.forwarded_count else 0.0
                    samples[r].append((now, d))
                push(now + config.monitor_interval, _MONITOR, None)
            else:
                st = states[node]
                d = st.cumulative_sojourn / st.forwarded_count if st.forwarded_count else 0.0
                samples[node].append((now, d))
                push(now + sample_exponential(monitor_streams[node], config.monitor_interval),
                     _MONITOR, node)

    # Packets still queued (including any in service) plus any unprocessed
    # arrivals left on the calendar; counted independently so the
    # conservation identity is a real check, not a tautology.
    in_flight = sum(len(st.queue) for st in states.values())
    in_flight += sum(1 for entry in heap if entry[2] == _ARRIVE)

    routers = {}
    for r in router_ids:
        st = states[r]
        final = st.cumulative_sojourn / st.forwarded_count if st.forwarded_count else 0.0
        routers[r] = RouterSummary(
            final_delay=final,
            forwarded=st.forwarded_count,
            dropped_attack=st.dropped_count,
            attacked=st.attacked,
            sink_adjacent=r in sink_adjacent,
        )

    return SimResult(
        topology_name=topology.name,
        scenario=scenario,
        seed=config.seed,
        duration=duration,
        samples=samples,
        routers=routers,
        generated=generated,
        delivered_to_sink=delivered,
        dropped_by_attack=dropped_attack,
        dropped_by_ttl=dropped_ttl,
        in_flight_at_end=in_flight,
        event_count=events,
        generated_size_total=size_total,
        interarrival_total=inter_total,
        interarrival_draws=inter_draws,
    )

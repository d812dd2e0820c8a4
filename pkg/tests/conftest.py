import random

import pytest
from hypothesis import strategies as st

from netcrit.topology import NodeRole, Topology, parse_topology, validate_topology

MM1_TEXT = "node S sink\nnode R router\nnode G generator\nedge S R\nedge R G\n"


@pytest.fixture
def mm1_topology() -> Topology:
    """Single-queue micro topology: one generator, one router, the sink."""
    return parse_topology(MM1_TEXT, name="mm1")


@pytest.fixture
def path3_topology() -> Topology:
    """Path graph a-b-c with valid roles (generator, router, sink)."""
    return parse_topology(
        "node a generator\nnode b router\nnode c sink\nedge a b\nedge b c\n",
        name="path3",
    )


def make_random_topology(
    rng: random.Random,
    max_routers: int = 6,
    max_generators: int = 3,
    extra_edge_prob: float = 0.35,
) -> Topology:
    """Random valid topology: connected router core, one sink, some generators."""
    n_routers = rng.randint(1, max_routers)
    routers = [f"r{i}" for i in range(n_routers)]
    edges: list[tuple[str, str]] = []
    for i in range(1, n_routers):
        edges.append((routers[rng.randrange(i)], routers[i]))
    present = {frozenset(e) for e in edges}
    for i in range(n_routers):
        for j in range(i + 1, n_routers):
            pair = (routers[i], routers[j])
            if frozenset(pair) not in present and rng.random() < extra_edge_prob:
                edges.append(pair)
                present.add(frozenset(pair))
    edges.append(("S", routers[rng.randrange(n_routers)]))
    n_gens = rng.randint(1, max_generators)
    gens = [f"g{i}" for i in range(n_gens)]
    for g in gens:
        edges.append((g, routers[rng.randrange(n_routers)]))
    t = Topology(
        name="random",
        nodes=tuple(
            [("S", NodeRole.SINK)]
            + [(r, NodeRole.ROUTER) for r in routers]
            + [(g, NodeRole.GENERATOR) for g in gens]
        ),
        edges=tuple(edges),
    )
    validate_topology(t)
    return t


@st.composite
def topologies(draw, max_routers: int = 6, max_generators: int = 3):
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    return make_random_topology(random.Random(seed), max_routers, max_generators)

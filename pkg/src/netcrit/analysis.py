"""Delay-based criticality rankings and their comparison to metric rankings.

Routers directly linked to the sink are excluded from delay rankings: their
delay mirrors the sink's and says nothing about the topology. Top-k overlap
is cluster-aware, so a tie cluster straddling position k contributes
fractionally rather than by arbitrary tie breaking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import fmean, median
from typing import Mapping, Sequence

from .metrics import Direction, RankedClusters, rank_with_ties
from .simulator import SimResult
from .topology import Topology, natural_key

EXCLUDED_SINK_ADJACENT = "adjacent to sink"


@dataclass(frozen=True)
class DelayRanking:
    """Tie-clustered ranking of routers by final delay, highest first.

    ``excluded`` maps each left-out router to the reason ("adjacent to
    sink"); excluded routers never appear in the clusters. ``k`` is the
    default report depth for top-k listings.
    """

    clusters: RankedClusters
    excluded: Mapping[str, str]
    k: int = 3


@dataclass(frozen=True)
class RankingComparison:
    """Agreement between one metric ranking and a delay ranking."""

    k: int
    overlap: float
    spearman: float
    metric_topk: tuple[str, ...]
    delay_topk: tuple[str, ...]


def rank_by_delay(
    results: Sequence[SimResult],
    t: Topology,
    k: int = 3,
    tie_epsilon: float = 1e-9,
    aggregate: str = "mean",
) -> DelayRanking:
    """Rank routers by final delay aggregated across seeds (mean by default).

    All results must come from the same topology ``t``. Sink-adjacent
    routers are excluded before ranking.
    """
    if not results:
        raise ValueError("need at least one simulation result")
    if k < 1:
        raise ValueError("k must be >= 1")
    expected = set(t.router_ids)
    for r in results:
        if r.topology_name != t.name or set(r.routers) != expected:
            raise ValueError(
                f"result for topology '{r.topology_name}' does not match '{t.name}'"
            )
    if aggregate == "mean":
        agg = fmean
    elif aggregate == "median":
        agg = median
    else:
        raise ValueError(f"unknown aggregate '{aggregate}' (mean | median)")

    delays = {
        router: agg([res.routers[router].final_delay for res in results])
        for router in t.router_ids
    }
    excluded = {router: EXCLUDED_SINK_ADJACENT for router in t.sink_adjacent_routers()}
    ranked_ids = [router for router in t.router_ids if router not in excluded]
    if not ranked_ids:
        raise ValueError("every router is sink-adjacent; nothing to rank")
    clusters = rank_with_ties(
        delays, Direction.HIGHER_IS_CRITICAL, tie_epsilon, subset=ranked_ids
    )
    return DelayRanking(clusters=clusters, excluded=excluded, k=k)


def midranks(rc: RankedClusters) -> dict:
    """Mid-rank position of every member (ties share the average position)."""
    out = {}
    position = 0
    for cluster in rc.clusters:
        m = len(cluster.members)
        mid = position + (m + 1) / 2.0
        for member in cluster.members:
            out[member] = mid
        position += m
    return out


def topk_weights(rc: RankedClusters, k: int) -> dict:
    """Fractional top-k membership: full clusters above k count 1 per member;
    a cluster straddling position k contributes (k - taken)/size per member."""
    out = {}
    taken = 0
    for cluster in rc.clusters:
        m = len(cluster.members)
        if taken + m <= k:
            w = 1.0
        elif taken < k:
            w = (k - taken) / m
        else:
            w = 0.0
        for member in cluster.members:
            out[member] = w
        taken += m
    return out


def topk_members(rc: RankedClusters, k: int) -> tuple:
    """Members of all clusters intersecting the top k, in rank order."""
    out = []
    taken = 0
    for cluster in rc.clusters:
        if taken >= k:
            break
        out.extend(sorted(cluster.members, key=lambda x: natural_key(str(x))))
        taken += len(cluster.members)
    return tuple(out)


def overlap_at_k(a: RankedClusters, b: RankedClusters, k: int) -> float:
    """Cluster-aware |top-k(a) and top-k(b)| / k; symmetric in a and b."""
    wa = topk_weights(a, k)
    wb = topk_weights(b, k)
    return sum(min(wa[m], wb.get(m, 0.0)) for m in wa) / k


def spearman_from_clusters(a: RankedClusters, b: RankedClusters) -> float:
    """Spearman rank correlation using mid-ranks for ties.

    Returns 0.0 when either ranking has no rank variation (a single tie
    cluster), where the correlation is undefined.
    """
    ra = midranks(a)
    rb = midranks(b)
    members = sorted(ra, key=lambda x: natural_key(str(x)))
    xs = [ra[m] for m in members]
    ys = [rb[m] for m in members]
    n = len(members)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0.0 or syy == 0.0:
        return 0.0
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return sxy / math.sqrt(sxx * syy)


def compare_rankings(
    metric_ranks: RankedClusters, delay_rank: DelayRanking, k: int
) -> RankingComparison:
    """Overlap@k and Spearman between a metric ranking and a delay ranking.

    Both rankings must cover the same router universe (delay exclusions
    already applied on both sides).
    """
    universe = delay_rank.clusters.all_members()
    if metric_ranks.all_members() != universe:
        raise ValueError(
            "rankings cover different universes: "
            f"{sorted(metric_ranks.all_members(), key=str)} vs {sorted(universe, key=str)}"
        )
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > len(universe):
        raise ValueError(f"k={k} larger than ranked universe ({len(universe)} routers)")
    return RankingComparison(
        k=k,
        overlap=overlap_at_k(metric_ranks, delay_rank.clusters, k),
        spearman=spearman_from_clusters(metric_ranks, delay_rank.clusters),
        metric_topk=topk_members(metric_ranks, k),
        delay_topk=topk_members(delay_rank.clusters, k),
    )

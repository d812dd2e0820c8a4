"""CSV emitters and readers for metrics, runs, and comparison reports.

Floats are written with repr() so files round-trip exactly and identical
runs produce byte-identical output.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Mapping

from .analysis import RankingComparison
from .metrics import NOT_COMPUTABLE, RankedClusters
from .simulator import SimResult
from .topology import Topology, natural_key

NODE_METRICS_COLUMNS = ["node_id", "role", "betweenness", "eccentricity", "eigenvector"]
EDGE_METRICS_COLUMNS = ["u", "v", "edge_betweenness"]
RANKINGS_COLUMNS = ["metric", "rank", "members", "value"]
TIMESERIES_COLUMNS = ["router_id", "time_s", "delay_s"]
SUMMARY_COLUMNS = ["router_id", "final_delay_s", "forwarded", "dropped_attack",
                   "attacked", "sink_adjacent"]
ACCOUNTING_COLUMNS = ["generated", "delivered_to_sink", "dropped_by_attack",
                      "dropped_by_ttl", "in_flight_at_end"]
COMPARISON_COLUMNS = ["metric", "k", "overlap", "spearman", "metric_topk", "delay_topk"]

NOT_COMPUTABLE_TEXT = "X"
_MEMBER_SEP = ";"


def _writer(path: Path):
    handle = path.open("w", encoding="utf-8", newline="")
    return handle, csv.writer(handle, lineterminator="\n")


def _fmt(x: float) -> str:
    return repr(float(x))


def _members_text(members) -> str:
    return _MEMBER_SEP.join(
        m if isinstance(m, str) else "-".join(m)
        for m in sorted(members, key=lambda m: natural_key(str(m)))
    )


def write_node_metrics(path: str | Path, t: Topology, betweenness, eccentricity,
                       eigenvector) -> None:
    handle, w = _writer(Path(path))
    with handle:
        w.writerow(NODE_METRICS_COLUMNS)
        for nid, role in t.nodes:
            ecc = (NOT_COMPUTABLE_TEXT if eccentricity is NOT_COMPUTABLE
                   else str(int(eccentricity[nid])))
            w.writerow([nid, role.value, _fmt(betweenness[nid]), ecc,
                        _fmt(eigenvector[nid])])


def read_node_metrics(path: str | Path) -> list[dict]:
    rows = []
    with Path(path).open(encoding="utf-8", newline="") as handle:
        for rec in csv.DictReader(handle):
            rows.append({
                "node_id": rec["node_id"],
                "role": rec["role"],
                "betweenness": float(rec["betweenness"]),
                "eccentricity": (None if rec["eccentricity"] == NOT_COMPUTABLE_TEXT
                                 else int(rec["eccentricity"])),
                "eigenvector": float(rec["eigenvector"]),
            })
    return rows


def write_edge_metrics(path: str | Path, edge_values: Mapping[tuple[str, str], float]) -> None:
    handle, w = _writer(Path(path))
    with handle:
        w.writerow(EDGE_METRICS_COLUMNS)
        for (u, v) in sorted(edge_values, key=lambda e: (natural_key(e[0]), natural_key(e[1]))):
            w.writerow([u, v, _fmt(edge_values[(u, v)])])


def read_edge_metrics(path: str | Path) -> dict[tuple[str, str], float]:
    out = {}
    with Path(path).open(encoding="utf-8", newline="") as handle:
        for rec in csv.DictReader(handle):
            out[(rec["u"], rec["v"])] = float(rec["edge_betweenness"])
    return out


def write_rankings(path: str | Path, rankings: Mapping[str, RankedClusters]) -> None:
    """One row per (metric, cluster); NOT_COMPUTABLE metrics get a single X row."""
    handle, w = _writer(Path(path))
    with handle:
        w.writerow(RANKINGS_COLUMNS)
        for metric, rc in rankings.items():
            if rc is NOT_COMPUTABLE:
                w.writerow([metric, "", "", NOT_COMPUTABLE_TEXT])
                continue
            for cluster in rc.clusters:
                w.writerow([metric, cluster.rank, _members_text(cluster.members),
                            _fmt(cluster.value)])


def read_rankings(path: str | Path) -> list[dict]:
    rows = []
    with Path(path).open(encoding="utf-8", newline="") as handle:
        for rec in csv.DictReader(handle):
            if rec["value"] == NOT_COMPUTABLE_TEXT:
                rows.append({"metric": rec["metric"], "rank": None, "members": (),
                             "value": None})
                continue
            members = tuple(rec["members"].split(_MEMBER_SEP)) if rec["members"] else ()
            rows.append({"metric": rec["metric"], "rank": int(rec["rank"]),
                         "members": members, "value": float(rec["value"])})
    return rows


def write_timeseries(path: str | Path, result: SimResult) -> None:
    handle, w = _writer(Path(path))
    with handle:
        w.writerow(TIMESERIES_COLUMNS)
        for router, series in result.samples.items():
            for time_s, delay_s in series:
                w.writerow([router, _fmt(time_s), _fmt(delay_s)])


def read_timeseries(path: str | Path) -> dict[str, list[tuple[float, float]]]:
    out: dict[str, list[tuple[float, float]]] = {}
    with Path(path).open(encoding="utf-8", newline="") as handle:
        for rec in csv.DictReader(handle):
            out.setdefault(rec["router_id"], []).append(
                (float(rec["time_s"]), float(rec["delay_s"]))
            )
    return out


def write_summary(path: str | Path, result: SimResult) -> None:
    handle, w = _writer(Path(path))
    with handle:
        w.writerow(SUMMARY_COLUMNS)
        for router, rs in result.routers.items():
            w.writerow([router, _fmt(rs.final_delay), rs.forwarded, rs.dropped_attack,
                        int(rs.attacked), int(rs.sink_adjacent)])


def read_summary(path: str | Path) -> list[dict]:
    rows = []
    with Path(path).open(encoding="utf-8", newline="") as handle:
        for rec in csv.DictReader(handle):
            rows.append({
                "router_id": rec["router_id"],
                "final_delay_s": float(rec["final_delay_s"]),
                "forwarded": int(rec["forwarded"]),
                "dropped_attack": int(rec["dropped_attack"]),
                "attacked": bool(int(rec["attacked"])),
                "sink_adjacent": bool(int(rec["sink_adjacent"])),
            })
    return rows


def write_accounting(path: str | Path, result: SimResult) -> None:
    handle, w = _writer(Path(path))
    with handle:
        w.writerow(ACCOUNTING_COLUMNS)
        w.writerow([result.generated, result.delivered_to_sink, result.dropped_by_attack,
                    result.dropped_by_ttl, result.in_flight_at_end])


def read_accounting(path: str | Path) -> dict[str, int]:
    with Path(path).open(encoding="utf-8", newline="") as handle:
        rec = next(csv.DictReader(handle))
    return {k: int(v) for k, v in rec.items()}


def write_comparison(path: str | Path, comparisons: Mapping[str, RankingComparison]) -> None:
    handle, w = _writer(Path(path))
    with handle:
        w.writerow(COMPARISON_COLUMNS)
        for metric, c in comparisons.items():
            w.writerow([metric, c.k, _fmt(c.overlap), _fmt(c.spearman),
                        _MEMBER_SEP.join(c.metric_topk), _MEMBER_SEP.join(c.delay_topk)])


def read_comparison(path: str | Path) -> list[dict]:
    rows = []
    with Path(path).open(encoding="utf-8", newline="") as handle:
        for rec in csv.DictReader(handle):
            rows.append({
                "metric": rec["metric"],
                "k": int(rec["k"]),
                "overlap": float(rec["overlap"]),
                "spearman": float(rec["spearman"]),
                "metric_topk": tuple(rec["metric_topk"].split(_MEMBER_SEP)) if rec["metric_topk"] else (),
                "delay_topk": tuple(rec["delay_topk"].split(_MEMBER_SEP)) if rec["delay_topk"] else (),
            })
    return rows


def cluster_summary_text(title: str, rankings: Mapping[str, RankedClusters]) -> str:
    """Human-readable cluster table: one line per rank, tied members in parens."""
    lines = [title]
    width = max(len(m) for m in rankings) + 2
    for metric, rc in rankings.items():
        if rc is NOT_COMPUTABLE:
            lines.append(f"{metric:<{width}} -     {NOT_COMPUTABLE_TEXT}  (not computable: "
                         "some node pair is unreachable)")
            continue
        for cluster in rc.clusters:
            members = ", ".join(
                m if isinstance(m, str) else "-".join(m)
                for m in sorted(cluster.members, key=lambda m: natural_key(str(m)))
            )
            value = cluster.value
            value_text = str(int(value)) if float(value).is_integer() else f"{value:.4f}"
            lines.append(f"{metric:<{width}} {cluster.rank:<5} ({members})  {value_text}")
    return "\n".join(lines) + "\n"


def comparison_report_text(
    title: str,
    comparisons: Mapping[str, RankingComparison],
    excluded: Mapping[str, str],
) -> str:
    lines = [title]
    if excluded:
        excl = ", ".join(f"{r} ({reason})"
                         for r, reason in sorted(excluded.items(),
                                                 key=lambda kv: natural_key(kv[0])))
        lines.append(f"excluded from delay ranking: {excl}")
    width = max(len(m) for m in comparisons) + 2
    for metric, c in comparisons.items():
        lines.append(
            f"{metric:<{width}} overlap@{c.k}={c.overlap:.3f}  spearman={c.spearman:+.3f}  "
            f"metric_top{c.k}=({', '.join(c.metric_topk)})  "
            f"delay_top{c.k}=({', '.join(c.delay_topk)})"
        )
    return "\n".join(lines) + "\n"

"""Deterministic serializers (CSV, DOT, JSON) and run manifests."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import __version__
from .cascade_det import CascadeTrace
from .cascade_mc import McReport, SyntheticComparison
from .marketdata import DescriptiveStats, Region
from .netbuild import NodeMetrics
from .risk import RiskReport

DECIMALS = 6


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v) + 0.0:.{DECIMALS}f}"
    if isinstance(v, Region):
        return v.value
    return str(v)


def emit_csv(header: Sequence[str], rows: Iterable[Sequence]) -> bytes:
    """UTF-8 CSV, '\\n' line endings, reals in fixed 6-decimal notation."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    width = len(header)
    for row in rows:
        if len(row) != width:
            raise ValueError(f"row has {len(row)} cells, header has {width}")
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue().encode("utf-8")


def matrix_csv(matrix, tickers: Sequence[str], corner: str = "asset") -> bytes:
    m = np.asarray(matrix)
    return emit_csv([corner, *tickers], ([t, *m[i].tolist()] for i, t in enumerate(tickers)))


def read_matrix_csv(data: bytes) -> tuple[list[str], list[str], np.ndarray]:
    rows = list(csv.reader(io.StringIO(data.decode("utf-8"))))
    cols = rows[0][1:]
    labels = [r[0] for r in rows[1:]]
    values = np.array([[float(c) for c in r[1:]] for r in rows[1:]], dtype=float)
    return labels, cols, values.reshape(len(labels), len(cols))


def risk_csv(report: RiskReport) -> bytes:
    return emit_csv(["asset", "var", "cvar"], report.rows())


def stats_csv(stats: DescriptiveStats) -> bytes:
    return emit_csv(
        ["asset", "mean", "std_dev", "min", "max"],
        ([t, s.mean, s.std_dev, s.min, s.max] for t, s in stats.items()),
    )


def trace_csv(trace: CascadeTrace) -> bytes:
    """Iterations as rows, tickers as columns, 0/1 default flags."""
    m = trace.matrix()
    return emit_csv(["iteration", *trace.tickers], ([k, *m[k].tolist()] for k in range(len(m))))


def trace_json(trace: CascadeTrace) -> dict:
    new = trace.newly_defaulted()
    return {
        "tickers": list(trace.tickers),
        "theta": trace.theta,
        "influence_threshold": trace.influence_threshold,
        "converged": trace.converged,
        "iterations": [
            {
                "iteration": k,
                "state": s.astype(int).tolist(),
                "n_defaulted": int(s.sum()),
                "newly_defaulted": new[k],
            }
            for k, s in enumerate(trace.states)
        ],
    }


def mc_csv(reports: Sequence[McReport]) -> bytes:
    return emit_csv(
        ["scenario", "theta", "failure_probability", "avg_failed"],
        ([r.scenario_label, r.theta, r.failure_probability, r.avg_failed] for r in reports),
    )


def region_csv(report: McReport) -> bytes:
    return emit_csv(["region", "avg_failed"], list(report.per_region_avg_failed.items()))


def synthetic_csv(cmp: SyntheticComparison) -> bytes:
    return emit_csv(
        ["network_type", "failure_probability", "avg_failed"],
        [
            ["Real (Exposure-Based)", cmp.real.failure_probability, cmp.real.avg_failed],
            ["Synthetic (Erdos-Renyi)", cmp.synthetic.failure_probability, cmp.synthetic.avg_failed],
        ],
    )


def emit_dot(
    weights,
    tickers: Sequence[str],
    metrics: NodeMetrics,
    regions: Mapping[str, Region | str],
    name: str = "network",
) -> bytes:
    """Graphviz DOT with node `region`/`clustering` and edge `weight` attributes.

    Symmetric matrices become an undirected ``graph``; anything else a
    ``digraph``. Nodes and edges are ordered lexicographically by ticker.
    """
    w = np.asarray(weights, dtype=float)
    n = len(tickers)
    if w.shape != (n, n) or len(metrics.clustering) != n:
        raise ValueError("weights, tickers and metrics are not aligned")
    directed = not np.array_equal(w, w.T)
    order = sorted(range(n), key=lambda i: tickers[i])
    rank = {i: r for r, i in enumerate(order)}

    lines = [f'{"digraph" if directed else "graph"} "{name}" {{']
    for i in order:
        region = regions[tickers[i]]
        region = region.value if isinstance(region, Region) else str(region)
        lines.append(
            f'  "{tickers[i]}" [region="{region}", '
            f'clustering="{format_value(float(metrics.clustering[i]))}"];'
        )
    arrow = "->" if directed else "--"
    for i in order:
        for j in order:
            if i == j or w[i, j] == 0:
                continue
            if not directed and rank[j] < rank[i]:
                continue
            lines.append(f'  "{tickers[i]}" {arrow} "{tickers[j]}" [weight="{format_value(w[i, j])}"];')
    lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def to_json_bytes(obj) -> bytes:
    return (json.dumps(obj, indent=2, sort_keys=False, default=_json_default) + "\n").encode("utf-8")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Region):
        return o.value
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def build_manifest(inputs: Mapping[str, str | os.PathLike | None], config: Mapping, artifacts: Sequence[str]) -> dict:
    return {
        "tool": "gkcascade",
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "inputs": {
            k: {"path": str(p), "sha256": sha256_file(p)} for k, p in inputs.items() if p is not None
        },
        "config": dict(config),
        "artifacts": list(artifacts),
    }


def atomic_write(path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise

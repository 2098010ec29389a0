"""Core containers and structural statistics for innovation-flow networks.

A temporal edge log records innovation events: each event carries one unit of
weight, split equally across the industries that use the innovation. Summing
event weights up to a point in time yields a cumulative weighted digraph
snapshot, on which the structural statistics here operate: complementary
cumulative distributions of strengths and edge weights, local clustering and
global transitivity on the undirected projection, and agglomerative
modularity-maximizing (fast greedy) community detection.

Weights are carried as exact rationals in the log and converted to floats
once per edge when a snapshot is built. Text inputs are validated with a
tolerance of 1e-9 on weight equality.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterator, NamedTuple, Sequence

import numpy as np

from .errors import DataValidationError

WEIGHT_TOL = 1e-9


class Event(NamedTuple):
    """One innovation record: ``weight`` is assigned to each target."""

    time: int
    source: str
    targets: tuple[str, ...]
    weight: Fraction
    event_id: str | None = None

    @property
    def total(self) -> Fraction:
        return self.weight * len(self.targets)


@dataclass(frozen=True)
class TemporalEdgeLog:
    """Time-ordered innovation events over a fixed node universe.

    Events without an ``event_id`` must each carry total weight exactly 1
    (one innovation counted once). Events sharing a ``(time, event_id)`` pair
    jointly describe one innovation whose edges span several sources; their
    total weights must sum to 1.
    """

    events: tuple[Event, ...]
    node_universe: tuple[str, ...]
    eligible_sources: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        object.__setattr__(self, "node_universe", tuple(self.node_universe))
        object.__setattr__(self, "eligible_sources", tuple(self.eligible_sources))
        self._validate()

    def _validate(self) -> None:
        nodes = set(self.node_universe)
        if len(nodes) != len(self.node_universe):
            raise DataValidationError("node universe contains duplicate ids")
        unknown = set(self.eligible_sources) - nodes
        if unknown:
            raise DataValidationError(f"eligible sources outside universe: {sorted(unknown)}")
        groups: dict[tuple[int, str], Fraction] = {}
        prev_time = None
        for ev in self.events:
            if prev_time is not None and ev.time < prev_time:
                raise DataValidationError(f"events not ordered in time at t={ev.time}")
            prev_time = ev.time
            if len(set(ev.targets)) != len(ev.targets):
                raise DataValidationError(f"duplicate targets in event at t={ev.time}")
            if ev.source not in nodes:
                raise DataValidationError(f"unknown source {ev.source!r}")
            for t in ev.targets:
                if t not in nodes:
                    raise DataValidationError(f"unknown target {t!r}")
            if ev.weight <= 0:
                raise DataValidationError("event weight must be positive")
            if ev.event_id is None:
                if ev.total != 1:
                    raise DataValidationError(
                        f"event at t={ev.time} has total weight {ev.total}, expected 1"
                    )
            else:
                key = (ev.time, ev.event_id)
                groups[key] = groups.get(key, Fraction(0)) + ev.total
        for (t, eid), tot in groups.items():
            if tot != 1:
                raise DataValidationError(
                    f"event group {eid!r} at t={t} has total weight {tot}, expected 1"
                )

    @cached_property
    def node_index(self) -> dict[str, int]:
        return {v: k for k, v in enumerate(self.node_universe)}

    @cached_property
    def times(self) -> tuple[int, ...]:
        return tuple(sorted({ev.time for ev in self.events}))

    @property
    def n_events(self) -> int:
        return len(self.events)


def eligible_mask(log: TemporalEdgeLog) -> np.ndarray:
    """Boolean n-by-n mask of ordered pairs whose source may innovate."""
    n = len(log.node_universe)
    mask = np.zeros((n, n), dtype=bool)
    idx = log.node_index
    for s in log.eligible_sources:
        mask[idx[s], :] = True
    return mask


def eligible_pairs(log: TemporalEdgeLog) -> tuple[tuple[str, str], ...]:
    """Ordered (source, target) pairs of the eligible edge universe."""
    return tuple(
        (s, t) for s in log.eligible_sources for t in log.node_universe
    )


@dataclass(frozen=True, eq=False)
class WeightedDigraph:
    """Dense cumulative snapshot with cached strengths.

    The weight matrix is read-only; strengths and the total are derived from
    it, so the cache cannot drift from the definition.
    """

    nodes: tuple[str, ...]
    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        n = len(self.nodes)
        if w.shape != (n, n):
            raise DataValidationError(f"weight matrix shape {w.shape} != ({n}, {n})")
        if np.any(w < 0):
            raise DataValidationError("negative edge weight")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def n(self) -> int:
        return len(self.nodes)

    @cached_property
    def node_index(self) -> dict[str, int]:
        return {v: k for k, v in enumerate(self.nodes)}

    @cached_property
    def s_out(self) -> np.ndarray:
        s = self.w.sum(axis=1)
        s.setflags(write=False)
        return s

    @cached_property
    def s_in(self) -> np.ndarray:
        s = self.w.sum(axis=0)
        s.setflags(write=False)
        return s

    @cached_property
    def total_weight(self) -> float:
        return float(self.w.sum())

    def undirected_weights(self) -> np.ndarray:
        """Symmetrized weights w + w.T with self-loops removed."""
        sym = self.w + self.w.T
        np.fill_diagonal(sym, 0.0)
        return sym

    def weight(self, source: str, target: str) -> float:
        return float(self.w[self.node_index[source], self.node_index[target]])


def snapshot(log: TemporalEdgeLog, until: int) -> WeightedDigraph:
    """Cumulative weighted digraph of all events with time <= ``until``."""
    idx = log.node_index
    acc: dict[tuple[int, int], Fraction] = {}
    for ev in log.events:
        if ev.time > until:
            break
        i = idx[ev.source]
        for t in ev.targets:
            key = (i, idx[t])
            acc[key] = acc.get(key, Fraction(0)) + ev.weight
    n = len(log.node_universe)
    w = np.zeros((n, n))
    for (i, j), val in acc.items():
        w[i, j] = float(val)
    return WeightedDigraph(log.node_universe, w)


def period_counts(log: TemporalEdgeLog, period: tuple[int, int]) -> np.ndarray:
    """Events per source industry with time inside the closed interval."""
    start, end = period
    idx = log.node_index
    x = np.zeros(len(log.node_universe), dtype=int)
    for ev in log.events:
        if start <= ev.time <= end:
            x[idx[ev.source]] += 1
    return x


def iter_year_flows(log: TemporalEdgeLog) -> Iterator[tuple[int, dict[tuple[str, str], Fraction]]]:
    """Yield (year, per-pair flow) in ascending year order."""
    flows: dict[tuple[str, str], Fraction] = {}
    current: int | None = None
    for ev in log.events:
        if current is not None and ev.time != current:
            yield current, flows
            flows = {}
        current = ev.time
        for t in ev.targets:
            key = (ev.source, t)
            flows[key] = flows.get(key, Fraction(0)) + ev.weight
    if current is not None:
        yield current, flows


def rebin_times(log: TemporalEdgeLog, steps_per_year: int, start_year: int = 1) -> TemporalEdgeLog:
    """Relabel event times so that ``steps_per_year`` consecutive time steps
    form one calendar year; useful for turning per-step simulation output
    into yearly data."""
    if steps_per_year < 1:
        raise ValueError("steps_per_year must be >= 1")
    t0 = log.events[0].time if log.events else 0
    events = []
    for ev in log.events:
        year = start_year + (ev.time - t0) // steps_per_year
        eid = None if ev.event_id is None else f"{ev.time}:{ev.event_id}"
        events.append(Event(year, ev.source, ev.targets, ev.weight, eid))
    return TemporalEdgeLog(tuple(events), log.node_universe, log.eligible_sources)


# ---------------------------------------------------------------------------
# Distributions


@dataclass(frozen=True)
class CcdfSeries:
    """Empirical complementary CDF: prob of observing a value >= ``values[k]``."""

    values: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != len(self.probs):
            raise DataValidationError("values and probs differ in length")
        if not self.values:
            raise DataValidationError("empty CCDF")
        if self.probs[0] != 1.0:
            raise DataValidationError("CCDF must start at probability 1")
        for p, q in zip(self.probs, self.probs[1:]):
            if q > p:
                raise DataValidationError("CCDF probabilities must be nonincreasing")
        if any(p <= 0 or p > 1 for p in self.probs):
            raise DataValidationError("CCDF probabilities must lie in (0, 1]")


def ccdf(values: Sequence[float]) -> CcdfSeries:
    """Empirical CCDF over the distinct observed values, ascending."""
    arr = np.sort(np.asarray(list(values), dtype=float))
    if arr.size == 0:
        raise DataValidationError("cannot build a CCDF from no values")
    distinct, first = np.unique(arr, return_index=True)
    probs = (arr.size - first) / arr.size
    return CcdfSeries(tuple(float(v) for v in distinct), tuple(float(p) for p in probs))


def positive_edge_weights(g: WeightedDigraph, mask: np.ndarray | None = None) -> np.ndarray:
    """Weights of edges with positive weight, optionally restricted to a mask."""
    w = g.w if mask is None else np.where(mask, g.w, 0.0)
    return w[w > 0]


# ---------------------------------------------------------------------------
# Clustering and transitivity (undirected, unweighted projection)


class ClusteringPoint(NamedTuple):
    node: str
    degree: int
    coefficient: float | None


def _projection_adjacency(g: WeightedDigraph) -> np.ndarray:
    adj = (g.w + g.w.T) > 0
    np.fill_diagonal(adj, False)
    return adj


def local_clustering(g: WeightedDigraph, node: str) -> ClusteringPoint:
    """Degree and local clustering coefficient on the undirected projection.

    Nodes with fewer than two neighbors have no defined coefficient and are
    reported with ``coefficient=None`` so callers can exclude them from
    scaling plots.
    """
    adj = _projection_adjacency(g)
    i = g.node_index[node]
    nbrs = np.flatnonzero(adj[i])
    k = len(nbrs)
    if k < 2:
        return ClusteringPoint(node, k, None)
    links = int(np.count_nonzero(adj[np.ix_(nbrs, nbrs)])) // 2
    return ClusteringPoint(node, k, 2.0 * links / (k * (k - 1)))


def clustering_profile(g: WeightedDigraph) -> list[ClusteringPoint]:
    adj = _projection_adjacency(g)
    out = []
    for i, node in enumerate(g.nodes):
        nbrs = np.flatnonzero(adj[i])
        k = len(nbrs)
        if k < 2:
            out.append(ClusteringPoint(node, k, None))
        else:
            links = int(np.count_nonzero(adj[np.ix_(nbrs, nbrs)])) // 2
            out.append(ClusteringPoint(node, k, 2.0 * links / (k * (k - 1))))
    return out


def global_transitivity(g: WeightedDigraph) -> float:
    """3 x closed triads / connected triples on the undirected projection."""
    adj = _projection_adjacency(g).astype(float)
    deg = adj.sum(axis=1)
    triples2 = float((deg * (deg - 1)).sum())
    if triples2 == 0:
        raise DataValidationError("graph has no connected triples")
    closed6 = float(np.trace(adj @ adj @ adj))
    return closed6 / triples2


# ---------------------------------------------------------------------------
# Communities


@dataclass(frozen=True)
class Partition:
    assignment: dict[str, int]
    modularity: float


def modularity(sym_weights: np.ndarray, labels: Sequence[int]) -> float:
    """Standard weighted undirected modularity of a labeling.

    ``sym_weights`` is the symmetric projection matrix (zero diagonal).
    """
    m2 = sym_weights.sum()
    if m2 <= 0:
        raise DataValidationError("graph has no edges")
    labels = np.asarray(labels)
    deg = sym_weights.sum(axis=1)
    same = labels[:, None] == labels[None, :]
    return float((sym_weights[same].sum() - (np.outer(deg, deg)[same]).sum() / m2) / m2)


def greedy_communities(g: WeightedDigraph) -> Partition:
    """Fast greedy agglomerative modularity maximization.

    Starting from singletons, repeatedly merges the connected pair of
    communities with the largest modularity gain (ties broken by the lowest
    community-id pair), and returns the partition at the peak of the
    modularity trajectory. Self-loops are excluded from the projection, as in
    the clustering statistics.
    """
    if g.n == 0:
        raise DataValidationError("empty graph")
    sym = g.undirected_weights()
    m2 = sym.sum()
    if m2 <= 0:
        raise DataValidationError("graph has no edges")
    n = g.n
    e = sym / m2
    a = e.sum(axis=1)
    active = np.ones(n, dtype=bool)
    q = float(-(a**2).sum())
    best_q, best_step = q, 0
    merges: list[tuple[int, int]] = []
    while True:
        gain = 2.0 * (e - np.outer(a, a))
        connected = (e > 0) & active[:, None] & active[None, :]
        connected &= np.triu(np.ones((n, n), dtype=bool), k=1)
        if not connected.any():
            break
        masked = np.where(connected, gain, -np.inf)
        top = masked.max()
        ii, jj = np.nonzero(masked == top)
        i, j = int(ii[0]), int(jj[0])  # row-major scan = lexicographic tie-break
        e[i, :] += e[j, :]
        e[:, i] += e[:, j]
        e[j, :] = 0.0
        e[:, j] = 0.0
        a[i] += a[j]
        a[j] = 0.0
        active[j] = False
        q += float(top)
        merges.append((i, j))
        if q > best_q + 1e-15:
            best_q, best_step = q, len(merges)
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in merges[:best_step]:
        parent[find(j)] = find(i)
    roots: dict[int, int] = {}
    labels = np.empty(n, dtype=int)
    for k in range(n):
        r = find(k)
        if r not in roots:
            roots[r] = len(roots)
        labels[k] = roots[r]
    value = modularity(sym, labels)
    return Partition({node: int(labels[k]) for k, node in enumerate(g.nodes)}, value)


# ---------------------------------------------------------------------------
# Text input/output

EDGE_HEADER = ("year", "source", "target", "weight")


def load_universe(path) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Read a node universe file: one id per line, optional eligible flag."""
    nodes: list[str] = []
    eligible: list[str] = []
    saw_flag_column = False
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(f.strip() for f in r)]
    if rows and rows[0] and rows[0][0].strip().lower() == "id":
        rows = rows[1:]
    for row in rows:
        node = row[0].strip()
        nodes.append(node)
        if len(row) > 1 and row[1].strip() != "":
            saw_flag_column = True
            flag = row[1].strip().lower()
            if flag not in {"0", "1", "true", "false"}:
                raise DataValidationError(f"bad eligible_source flag {row[1]!r} for {node!r}")
            if flag in {"1", "true"}:
                eligible.append(node)
    if not saw_flag_column:
        eligible = list(nodes)
    return tuple(nodes), tuple(eligible)


def save_universe(log: TemporalEdgeLog, path) -> None:
    eligible = set(log.eligible_sources)
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["id", "eligible_source"])
        for node in log.node_universe:
            out.writerow([node, 1 if node in eligible else 0])


def _close_event(rows: list[tuple[int, str, str, float, str | None]]) -> Event:
    time, source = rows[0][0], rows[0][1]
    k = len(rows)
    expected = Fraction(1, k)
    for _, _, target, weight, _ in rows:
        if abs(weight - float(expected)) > WEIGHT_TOL:
            raise DataValidationError(
                f"row weight {weight} at t={time} source={source!r} is not 1/{k} "
                f"within {WEIGHT_TOL}"
            )
    return Event(time, source, tuple(r[2] for r in rows), expected, rows[0][4])


def _group_innovation(rows: list[tuple[int, str, str, float, str | None]]) -> list[Event]:
    """Rows sharing (year, event_id) form one innovation; split it by source."""
    k = len(rows)
    expected = Fraction(1, k)
    time, eid = rows[0][0], rows[0][4]
    for _, _, _, weight, _ in rows:
        if abs(weight - float(expected)) > WEIGHT_TOL:
            raise DataValidationError(
                f"row weight {weight} in event {eid!r} at t={time} is not 1/{k} "
                f"within {WEIGHT_TOL}"
            )
    by_source: dict[str, list[str]] = {}
    for _, source, target, _, _ in rows:
        by_source.setdefault(source, []).append(target)
    return [
        Event(time, source, tuple(targets), expected, eid)
        for source, targets in by_source.items()
    ]


def load_edge_log(edge_path, universe_path) -> TemporalEdgeLog:
    """Read a temporal edge log from the comma-separated event format.

    One row per (event, target) pair. Without an ``event_id`` column,
    consecutive rows sharing (year, source) are accumulated into one event
    until their weights sum to 1. With the column, rows sharing
    (year, event_id) form one innovation that may span several sources.
    """
    nodes, eligible = load_universe(universe_path)
    with open(edge_path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataValidationError("edge log file is empty") from None
        header = [h.strip().lower() for h in header]
        if tuple(header[:4]) != EDGE_HEADER:
            raise DataValidationError(
                f"edge log header must start with {','.join(EDGE_HEADER)}"
            )
        has_id = len(header) > 4 and header[4] == "event_id"
        rows: list[tuple[int, str, str, float, str | None]] = []
        for lineno, row in enumerate(reader, start=2):
            if not row or not any(f.strip() for f in row):
                continue
            try:
                year = int(row[0])
                weight = float(row[3])
            except (ValueError, IndexError):
                raise DataValidationError(f"malformed edge-log row {lineno}") from None
            eid: str | None = None
            if has_id:
                if len(row) < 5 or not row[4].strip():
                    raise DataValidationError(f"missing event_id on row {lineno}")
                eid = row[4].strip()
            rows.append((year, row[1].strip(), row[2].strip(), weight, eid))
    known = set(nodes)
    for year, source, target, _, _ in rows:
        if source not in known:
            raise DataValidationError(f"unknown source id {source!r} in edge log")
        if target not in known:
            raise DataValidationError(f"unknown target id {target!r} in edge log")
    events: list[Event] = []
    if has_id:
        pending: list[tuple[int, str, str, float, str | None]] = []
        for row in rows:
            if pending and (row[0], row[4]) != (pending[0][0], pending[0][4]):
                events.extend(_group_innovation(pending))
                pending = []
            pending.append(row)
        if pending:
            events.extend(_group_innovation(pending))
    else:
        pending = []
        acc = 0.0
        for row in rows:
            if pending and (row[0], row[1]) != (pending[0][0], pending[0][1]):
                raise DataValidationError(
                    f"event at t={pending[0][0]} source={pending[0][1]!r} has "
                    f"weights summing to {acc}, expected 1 within {WEIGHT_TOL}"
                )
            pending.append(row)
            acc += row[3]
            if abs(acc - 1.0) <= WEIGHT_TOL:
                events.append(_close_event(pending))
                pending, acc = [], 0.0
        if pending:
            raise DataValidationError(
                f"trailing event rows at t={pending[0][0]} sum to {acc}, expected 1"
            )
    return TemporalEdgeLog(tuple(events), nodes, eligible)


def save_edge_log(log: TemporalEdgeLog, path) -> None:
    has_id = any(ev.event_id is not None for ev in log.events)
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(list(EDGE_HEADER) + (["event_id"] if has_id else []))
        for k, ev in enumerate(log.events):
            # the loader requires every row to carry an id once the column
            # exists, so synthesize unique ids for id-less events
            eid = ev.event_id if ev.event_id is not None else f"_e{k}"
            for target in ev.targets:
                row = [ev.time, ev.source, target, repr(float(ev.weight))]
                if has_id:
                    row.append(eid)
                out.writerow(row)

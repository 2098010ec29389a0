"""Preferential weight assignment (PWA) over a fixed edge universe.

One innovation arrives per time step and lands on ``m`` distinct edges drawn
without replacement. An edge carrying weight w > 0 attracts new flow with
probability proportional to alpha * w**lam; the remaining (1 - alpha) mass is
spread uniformly over the edges still at weight zero. Probabilities are
recomputed between steps and frozen within a step.

The closed-form tail predictions evaluated here: a linear kernel (lam = 1)
yields a Pareto weight CCDF with exponent -1/alpha, and a sub-linear kernel
with 0.5 <= lam < 1 yields a stretched exponential
exp(-kappa * w**(1 - lam) / (1 - lam)) with kappa = (1 - alpha) * m * mu / alpha,
mu the kernel mean over positive edges. Tail fits use least squares on the
CCDF points with w >= 5 by default; the cutoff is configurable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import netcore
from .errors import DataValidationError
from .metrics import ScoreMatrix
from .netcore import CcdfSeries, Event, TemporalEdgeLog, WeightedDigraph

UNIT = "unit"
FRACTIONAL = "fractional"


@dataclass(frozen=True)
class SimConfig:
    """Parameters of one simulation run.

    ``unit`` mode assigns weight 1 to every drawn edge (theory validation,
    total weight m*t); ``fractional`` mode assigns 1/m (data mimicking, total
    weight t).
    """

    alpha: float
    lam: float
    m: int
    edge_universe: tuple[tuple[str, str], ...]
    horizon: int
    seed: int
    weight_mode: str = FRACTIONAL

    def __post_init__(self):
        object.__setattr__(self, "edge_universe", tuple(tuple(p) for p in self.edge_universe))
        if not 0 < self.alpha <= 1:
            raise DataValidationError(f"alpha must be in (0, 1], got {self.alpha}")
        if not 0 < self.lam <= 1:
            raise DataValidationError(f"lambda must be in (0, 1], got {self.lam}")
        if self.m < 1:
            raise DataValidationError("m must be a positive integer")
        if not self.edge_universe:
            raise DataValidationError("edge universe is empty")
        if len(set(self.edge_universe)) != len(self.edge_universe):
            raise DataValidationError("edge universe contains duplicate pairs")
        if self.m > len(self.edge_universe):
            raise DataValidationError(
                f"m={self.m} exceeds the {len(self.edge_universe)} distinct eligible edges"
            )
        if self.horizon < 1:
            raise DataValidationError("horizon must be positive")
        if self.weight_mode not in (UNIT, FRACTIONAL):
            raise DataValidationError(f"unknown weight_mode {self.weight_mode!r}")


def full_edge_universe(nodes, sources) -> tuple[tuple[str, str], ...]:
    """All ordered (source, target) pairs, self-loops included."""
    return tuple((s, t) for s in sources for t in nodes)


def sweden_profile(horizon: int, seed: int, weight_mode: str = FRACTIONAL) -> SimConfig:
    """Default profile calibrated to the Swedish innovation network estimates:
    alpha=0.855, lambda=0.649, m=2 users per innovation, and a 6370-edge
    universe (65 innovating sectors supplying 98 industries)."""
    nodes = tuple(f"I{k:02d}" for k in range(1, 99))
    sources = nodes[:65]
    return SimConfig(
        alpha=0.855,
        lam=0.649,
        m=2,
        edge_universe=full_edge_universe(nodes, sources),
        horizon=horizon,
        seed=seed,
        weight_mode=weight_mode,
    )


def _mixed_probabilities(w: np.ndarray, wlam: np.ndarray, alpha: float) -> np.ndarray:
    """Per-edge assignment probabilities for frozen weights over a universe."""
    a = w.size
    pos = w > 0
    n_pos = int(pos.sum())
    if n_pos == 0:
        return np.full(a, 1.0 / a)
    s_lam = float(wlam.sum())
    if n_pos == a:
        return wlam / s_lam
    p = np.empty(a)
    p[pos] = alpha * wlam[pos] / s_lam
    p[~pos] = (1.0 - alpha) / (a - n_pos)
    return p


def pwa_edge_probabilities(
    g: WeightedDigraph,
    alpha: float,
    lam: float,
    edge_universe,
) -> ScoreMatrix:
    """Probability that the next unit of flow lands on each universe edge."""
    if not 0 < alpha <= 1:
        raise DataValidationError(f"alpha must be in (0, 1], got {alpha}")
    if not 0 < lam <= 1:
        raise DataValidationError(f"lambda must be in (0, 1], got {lam}")
    pairs = tuple(edge_universe)
    if not pairs:
        raise DataValidationError("edge universe is empty")
    idx = g.node_index
    rows = np.array([idx[s] for s, _ in pairs])
    cols = np.array([idx[t] for _, t in pairs])
    w = g.w[rows, cols]
    p = _mixed_probabilities(w, w**lam, alpha)
    scores = np.zeros_like(g.w)
    mask = np.zeros(g.w.shape, dtype=bool)
    scores[rows, cols] = p
    mask[rows, cols] = True
    return ScoreMatrix(g.nodes, scores, "pwa_process", mask)


def simulate(config: SimConfig) -> TemporalEdgeLog:
    """Run the assignment process for ``horizon`` steps; deterministic per seed."""
    rng = np.random.default_rng(config.seed)
    pairs = config.edge_universe
    a = len(pairs)
    m = config.m
    lam = config.lam
    unit = config.weight_mode == UNIT
    add = 1.0 if unit else 1.0 / m
    w = np.zeros(a)
    wlam = np.zeros(a)
    events: list[Event] = []
    unit_w = Fraction(1)
    frac_w = Fraction(1, m)
    for t in range(1, config.horizon + 1):
        p = _mixed_probabilities(w, wlam, config.alpha)
        drawn = rng.choice(a, size=m, replace=False, p=p)
        if unit:
            for e in drawn:
                s, tgt = pairs[e]
                events.append(Event(t, s, (tgt,), unit_w))
        else:
            by_source: dict[str, list[str]] = {}
            for e in drawn:
                s, tgt = pairs[e]
                by_source.setdefault(s, []).append(tgt)
            for s, tgts in by_source.items():
                events.append(Event(t, s, tuple(tgts), frac_w, event_id=str(t)))
        for e in drawn:
            w[e] += add
            wlam[e] = w[e] ** lam
    nodes: list[str] = []
    seen: set[str] = set()
    sources: list[str] = []
    seen_src: set[str] = set()
    for s, tgt in pairs:
        if s not in seen:
            seen.add(s)
            nodes.append(s)
        if s not in seen_src:
            seen_src.add(s)
            sources.append(s)
    for s, tgt in pairs:
        if tgt not in seen:
            seen.add(tgt)
            nodes.append(tgt)
    return TemporalEdgeLog(tuple(events), tuple(nodes), tuple(sources))


def replicate_seeds(base_seed: int, n: int) -> list[int]:
    """Seeds for independent replicates: base_seed + replicate index."""
    return [base_seed + k for k in range(n)]


# ---------------------------------------------------------------------------
# Closed-form tails


def theoretical_ccdf_linear(alpha: float, scale: float) -> Callable[[float], float]:
    """Pareto tail C * w**(-1/alpha) predicted by the linear kernel."""
    if not 0 < alpha <= 1:
        raise DataValidationError(f"alpha must be in (0, 1], got {alpha}")
    exponent = -1.0 / alpha

    def tail(w):
        return scale * np.asarray(w, dtype=float) ** exponent

    return tail


def theoretical_ccdf_sublinear(lam: float, kappa: float, scale: float) -> Callable[[float], float]:
    """Stretched-exponential tail C * exp(-kappa * w**(1-lam) / (1-lam)).

    Valid for 0.5 <= lam < 1; outside that range the one-term series
    truncation behind the formula does not hold.
    """
    if not 0.5 <= lam < 1:
        raise DataValidationError(f"lambda must be in [0.5, 1), got {lam}")
    if kappa <= 0:
        raise DataValidationError(f"kappa must be positive, got {kappa}")
    stretch = 1.0 - lam

    def tail(w):
        w = np.asarray(w, dtype=float)
        return scale * np.exp(-kappa * w**stretch / stretch)

    return tail


@dataclass(frozen=True)
class WeightHistogram:
    """Edge-weight histogram over a fixed universe of ``total_edges`` edges."""

    bins: dict[float, int]
    total_edges: int

    @classmethod
    def from_graph(cls, g: WeightedDigraph, mask: np.ndarray | None = None) -> "WeightHistogram":
        w = g.w if mask is None else g.w[mask]
        values, counts = np.unique(np.asarray(w, dtype=float).ravel(), return_counts=True)
        bins = {float(v): int(c) for v, c in zip(values, counts)}
        total = int(np.asarray(w).size)
        if 0.0 not in bins:
            bins[0.0] = 0
        return cls(bins, total)

    @property
    def positive_edges(self) -> int:
        return self.total_edges - self.bins.get(0.0, 0)

    def kernel_mean(self, lam: float) -> float:
        """mu = sum over positive edges of w**lam, divided by their count."""
        num = sum(w**lam * c for w, c in self.bins.items() if w > 0)
        n = self.positive_edges
        if n == 0:
            raise DataValidationError("no positive-weight edges")
        return num / n


def estimate_mu(log: TemporalEdgeLog, lam: float) -> float:
    """Kernel mean over the positive edges of the final snapshot."""
    if not log.events:
        raise DataValidationError("empty log")
    g = netcore.snapshot(log, log.events[-1].time)
    hist = WeightHistogram.from_graph(g, netcore.eligible_mask(log))
    return hist.kernel_mean(lam)


def kappa_from(alpha: float, m: int, mu: float) -> float:
    """Stretched-exponential rate (1 - alpha) * m * mu / alpha."""
    return (1.0 - alpha) * m * mu / alpha


# ---------------------------------------------------------------------------
# Tail fitting


@dataclass(frozen=True)
class TailFit:
    slope: float
    intercept: float
    r_squared: float
    n_points: int


def _line_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    coef, intercept = np.polyfit(x, y, 1)
    resid = y - (coef * x + intercept)
    sst = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if sst == 0 else 1.0 - float((resid**2).sum()) / sst
    return float(coef), float(intercept), r2


def fit_tail_slope(series: CcdfSeries, min_value: float = 5.0) -> TailFit:
    """Least-squares slope of log prob against log value over the tail."""
    pts = [(v, p) for v, p in zip(series.values, series.probs) if v >= min_value]
    if len(pts) < 2:
        raise DataValidationError(
            f"need at least 2 CCDF points with value >= {min_value}, have {len(pts)}"
        )
    v = np.log(np.array([p[0] for p in pts]))
    q = np.log(np.array([p[1] for p in pts]))
    slope, intercept, r2 = _line_fit(v, q)
    return TailFit(slope, intercept, r2, len(pts))


@dataclass(frozen=True)
class StretchedTailFit:
    kappa: float
    scale: float
    r_squared: float
    n_points: int


def fit_stretched_tail(series: CcdfSeries, lam: float, min_value: float = 5.0) -> StretchedTailFit:
    """Fit log prob against w**(1-lam): straight when the tail is a
    stretched exponential with exponent 1-lam."""
    if not 0.5 <= lam < 1:
        raise DataValidationError(f"lambda must be in [0.5, 1), got {lam}")
    pts = [(v, p) for v, p in zip(series.values, series.probs) if v >= min_value]
    if len(pts) < 2:
        raise DataValidationError(
            f"need at least 2 CCDF points with value >= {min_value}, have {len(pts)}"
        )
    stretch = 1.0 - lam
    x = np.array([p[0] for p in pts]) ** stretch
    y = np.log(np.array([p[1] for p in pts]))
    slope, intercept, r2 = _line_fit(x, y)
    return StretchedTailFit(-slope * stretch, float(np.exp(intercept)), r2, len(pts))

"""Rolling link-prediction evaluation and network-stimulus predictors.

The rolling protocol scores every eligible pair on the cumulative network up
to the year before the evaluation year, predicts the N highest-ranked pairs
with N equal to the evaluation year's event count, and scores the prediction
against the pairs that actually received new flow. Stimulus predictors
allocate the previous period's innovation counts along existing forward and
backward linkages.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import metrics, netcore
from .errors import DataValidationError
from .metrics import KatzConfig, ScoreMatrix
from .netcore import TemporalEdgeLog, WeightedDigraph

Pair = tuple[str, str]


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @classmethod
    def from_sets(cls, pred: set[Pair], actual: set[Pair], universe: set[Pair]) -> "ConfusionCounts":
        if not universe:
            raise DataValidationError("empty evaluation universe")
        if not pred <= universe:
            raise DataValidationError("predicted pairs outside the universe")
        if not actual <= universe:
            raise DataValidationError("actual pairs outside the universe")
        tp = len(pred & actual)
        fp = len(pred - actual)
        fn = len(actual - pred)
        tn = len(universe) - tp - fp - fn
        return cls(tp, fp, tn, fn)


def top_n(scores: ScoreMatrix, n: int) -> list[Pair]:
    """The n eligible pairs with the highest scores.

    Ties are broken by (source id, target id) in ascending lexicographic
    order so the ranking is reproducible.
    """
    eligible = scores.eligible_count
    if n > eligible:
        raise DataValidationError(f"requested top {n} of only {eligible} eligible pairs")
    if n < 0:
        raise DataValidationError("n must be nonnegative")
    rows, cols = np.nonzero(scores.eligible_mask)
    ranked = sorted(
        ((-scores.scores[r, c], scores.nodes[r], scores.nodes[c]) for r, c in zip(rows, cols)),
    )
    return [(s, t) for _, s, t in ranked[:n]]


def accuracy(pred: Iterable[Pair], actual: Iterable[Pair], universe: Iterable[Pair]) -> float:
    """(TP + TN) / universe size."""
    counts = ConfusionCounts.from_sets(set(pred), set(actual), set(universe))
    return (counts.tp + counts.tn) / counts.total


def precision(pred: Iterable[Pair], actual: Iterable[Pair]) -> float:
    """TP / (TP + FP)."""
    pred = set(pred)
    if not pred:
        raise DataValidationError("precision undefined for an empty prediction set")
    return len(pred & set(actual)) / len(pred)


Predictor = Callable[[WeightedDigraph, np.ndarray], ScoreMatrix]


def make_predictors(
    names: Sequence[str],
    beta: float = 20.0,
    seed: int | None = None,
    mode: str = metrics.SYM,
) -> dict[str, Predictor]:
    """Build predictor callables by name.

    Known names: pwa, pa, common_neighbors, jaccard, adamic_adar, katz,
    random. ``katz`` uses the damping ``beta``; ``random`` draws fresh
    uniform scores per call from a generator seeded once with ``seed``.
    """
    rng = np.random.default_rng(seed)

    def random_scores(g: WeightedDigraph, mask: np.ndarray) -> ScoreMatrix:
        return ScoreMatrix(g.nodes, rng.random((g.n, g.n)), "random", mask)

    table: dict[str, Predictor] = {
        "pwa": lambda g, mask: metrics.pwa_score(g, mask),
        "pa": lambda g, mask: metrics.pa_score(g, mask),
        "common_neighbors": lambda g, mask: metrics.common_neighbors_matrix(g, mode, mask),
        "jaccard": lambda g, mask: metrics.jaccard_matrix(g, mode, mask),
        "adamic_adar": lambda g, mask: metrics.adamic_adar_matrix(g, mode, mask),
        "katz": lambda g, mask: metrics.katz(g, KatzConfig(beta), mask),
        "random": random_scores,
    }
    unknown = [n for n in names if n not in table]
    if unknown:
        raise DataValidationError(f"unknown predictors: {unknown}")
    return {n: table[n] for n in names}


@dataclass(frozen=True)
class YearOutcome:
    year: int
    predictor: str
    n: int
    counts: ConfusionCounts
    accuracy: float
    precision: float


def rolling_eval(
    log: TemporalEdgeLog,
    predictors: Mapping[str, Predictor],
    years: Sequence[int] | None = None,
) -> tuple[list[YearOutcome], list[str]]:
    """Evaluate predictors year by year; returns (outcomes, skip notes).

    For each evaluation year t the network snapshot through t-1 is scored,
    N is set to the number of events in t, and the actual set is every
    eligible pair with positive new flow in t. Years without events, or
    without any history, are skipped with a note.
    """
    if years is None:
        years = list(log.times[1:])
    mask = netcore.eligible_mask(log)
    universe = set(netcore.eligible_pairs(log))
    flows_by_year = dict(netcore.iter_year_flows(log))
    events_by_year: dict[int, int] = {}
    for ev in log.events:
        events_by_year[ev.time] = events_by_year.get(ev.time, 0) + 1
    outcomes: list[YearOutcome] = []
    notes: list[str] = []
    first_time = log.times[0] if log.times else None
    for year in years:
        n = events_by_year.get(year, 0)
        if n == 0:
            notes.append(f"year {year}: no events, skipped")
            continue
        if first_time is None or year <= first_time:
            notes.append(f"year {year}: no history before it, skipped")
            continue
        g = netcore.snapshot(log, year - 1)
        actual = {p for p, f in flows_by_year[year].items() if f > 0 and p in universe}
        for name, fn in predictors.items():
            scores = fn(g, mask)
            pred = set(top_n(scores, n))
            counts = ConfusionCounts.from_sets(pred, actual, universe)
            outcomes.append(
                YearOutcome(
                    year,
                    name,
                    n,
                    counts,
                    (counts.tp + counts.tn) / counts.total,
                    counts.tp / (counts.tp + counts.fp),
                )
            )
    return outcomes, notes


# ---------------------------------------------------------------------------
# Network stimulus


def stimulus_forward(g: WeightedDigraph, x_prev: np.ndarray) -> np.ndarray:
    """Expected innovations from forward linkages: suppliers' counts
    allocated along their outgoing flow shares."""
    x_prev = np.asarray(x_prev, dtype=float)
    out = g.s_out
    shares = np.divide(g.w, out[:, None], out=np.zeros_like(g.w), where=out[:, None] > 0)
    return shares.T @ x_prev


def stimulus_backward(g: WeightedDigraph, x_prev: np.ndarray) -> np.ndarray:
    """Expected innovations from backward linkages: users' counts allocated
    along their incoming flow shares."""
    x_prev = np.asarray(x_prev, dtype=float)
    inc = g.s_in
    shares = np.divide(g.w, inc[None, :], out=np.zeros_like(g.w), where=inc[None, :] > 0)
    return shares @ x_prev


@dataclass(frozen=True)
class StimulusRow:
    industry: str
    period: int
    period_start: int
    period_end: int
    x: int
    xf_hat: float
    xb_hat: float


@dataclass(frozen=True)
class StimulusPanel:
    rows: tuple[StimulusRow, ...]

    @property
    def industries(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(r.industry for r in self.rows))

    @property
    def periods(self) -> tuple[int, ...]:
        return tuple(sorted({r.period for r in self.rows}))

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, list[str], list[int]]:
        """(x, xf_hat, xb_hat, industry labels, period labels) row-wise."""
        x = np.array([r.x for r in self.rows], dtype=float)
        xf = np.array([r.xf_hat for r in self.rows])
        xb = np.array([r.xb_hat for r in self.rows])
        ind = [r.industry for r in self.rows]
        per = [r.period for r in self.rows]
        return x, xf, xb, ind, per


def stimulus_panel(log: TemporalEdgeLog, period_length: int = 5) -> StimulusPanel:
    """Panel of observed counts and stimulus predictors per period.

    Periods are left-aligned from the log's first year; a trailing short
    period is kept. For each period T >= 2 the predictors combine the
    cumulative network through the end of period T-1 with that period's
    counts.
    """
    if period_length < 1:
        raise DataValidationError("period length must be positive")
    if not log.events:
        raise DataValidationError("empty log")
    first = log.events[0].time
    last = log.events[-1].time
    bounds: list[tuple[int, int]] = []
    start = first
    while start <= last:
        bounds.append((start, min(start + period_length - 1, last)))
        start += period_length
    if len(bounds) < 2:
        raise DataValidationError("need at least two periods of data")
    rows: list[StimulusRow] = []
    for t in range(1, len(bounds)):
        prev_start, prev_end = bounds[t - 1]
        cur_start, cur_end = bounds[t]
        g = netcore.snapshot(log, prev_end)
        x_prev = netcore.period_counts(log, (prev_start, prev_end))
        x_cur = netcore.period_counts(log, (cur_start, cur_end))
        xf = stimulus_forward(g, x_prev)
        xb = stimulus_backward(g, x_prev)
        for k, node in enumerate(log.node_universe):
            rows.append(
                StimulusRow(node, t + 1, cur_start, cur_end, int(x_cur[k]), float(xf[k]), float(xb[k]))
            )
    return StimulusPanel(tuple(rows))

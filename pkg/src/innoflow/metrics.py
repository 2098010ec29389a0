"""Node-pair similarity scores used as link predictors.

Local metrics (weighted common neighbors, Jaccard, Adamic-Adar) default to
the symmetrized graph with self-loops removed; pass ``mode="out"`` for the
out-neighborhood variant in which neighborhoods, numerator weights and the
rarity strengths are all taken from directed out-edges. The global Katz
metric sums all walks between nodes on the globally normalized weight matrix
W = w / total, damped geometrically, and splits into direct and indirect
parts.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DataValidationError, SpectralRadiusError
from .linalg import spectral_radius
from .netcore import WeightedDigraph

SYM = "sym"
OUT = "out"


@dataclass(frozen=True, eq=False)
class ScoreMatrix:
    """A predictor's score for every eligible ordered node pair."""

    nodes: tuple[str, ...]
    scores: np.ndarray
    predictor_name: str
    eligible_mask: np.ndarray

    def __post_init__(self):
        n = len(self.nodes)
        scores = np.asarray(self.scores, dtype=float)
        mask = np.asarray(self.eligible_mask, dtype=bool)
        if scores.shape != (n, n) or mask.shape != (n, n):
            raise DataValidationError("score matrix and mask must be n-by-n")
        if not np.all(np.isfinite(scores[mask])):
            raise DataValidationError("non-finite score on an eligible pair")
        scores = scores.copy()
        scores.setflags(write=False)
        mask = mask.copy()
        mask.setflags(write=False)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "eligible_mask", mask)

    @cached_property
    def node_index(self) -> dict[str, int]:
        return {v: k for k, v in enumerate(self.nodes)}

    @property
    def eligible_count(self) -> int:
        return int(self.eligible_mask.sum())


@dataclass(frozen=True)
class KatzConfig:
    beta: float

    def __post_init__(self):
        if self.beta <= 0:
            raise DataValidationError(f"beta must be positive, got {self.beta}")


def _default_mask(g: WeightedDigraph, mask) -> np.ndarray:
    if mask is None:
        return np.ones((g.n, g.n), dtype=bool)
    return np.asarray(mask, dtype=bool)


def pwa_score(g: WeightedDigraph, eligible_mask=None) -> ScoreMatrix:
    """Relative cumulative weight w_ij / total."""
    if g.total_weight <= 0:
        raise DataValidationError("graph has no weight")
    return ScoreMatrix(g.nodes, g.w / g.total_weight, "pwa", _default_mask(g, eligible_mask))


def pa_score(g: WeightedDigraph, eligible_mask=None) -> ScoreMatrix:
    """Classical preferential attachment: s_out_i * s_in_j / total**2."""
    if g.total_weight <= 0:
        raise DataValidationError("graph has no weight")
    scores = np.outer(g.s_out, g.s_in) / g.total_weight**2
    return ScoreMatrix(g.nodes, scores, "pa", _default_mask(g, eligible_mask))


def _metric_parts(g: WeightedDigraph, mode: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (weights, adjacency, neighbor strengths) for the chosen mode."""
    if mode == SYM:
        w = g.undirected_weights()
    elif mode == OUT:
        w = g.w.copy()
        np.fill_diagonal(w, 0.0)
    else:
        raise ValueError(f"unknown neighborhood mode {mode!r}")
    adj = w > 0
    return w, adj, w.sum(axis=1)


def common_neighbors_w(g: WeightedDigraph, i: str, j: str, mode: str = SYM) -> float:
    """Total weight from i and j to their shared neighbors."""
    w, adj, _ = _metric_parts(g, mode)
    a, b = g.node_index[i], g.node_index[j]
    shared = adj[a] & adj[b]
    return float((w[a, shared] + w[b, shared]).sum())


def jaccard_w(g: WeightedDigraph, i: str, j: str, mode: str = SYM) -> float:
    """Common-neighbor weight normalized by both neighborhood strengths."""
    w, adj, strength = _metric_parts(g, mode)
    a, b = g.node_index[i], g.node_index[j]
    denom = strength[a] + strength[b]
    if denom == 0:
        return 0.0
    shared = adj[a] & adj[b]
    return float((w[a, shared] + w[b, shared]).sum()) / float(denom)


def adamic_adar_w(g: WeightedDigraph, i: str, j: str, mode: str = SYM) -> float:
    """Common-neighbor weight, discounting common neighbors that are
    strongly connected overall (natural log)."""
    w, adj, strength = _metric_parts(g, mode)
    a, b = g.node_index[i], g.node_index[j]
    shared = adj[a] & adj[b]
    return float(((w[a, shared] + w[b, shared]) / np.log1p(strength[shared])).sum())


def common_neighbors_matrix(g: WeightedDigraph, mode: str = SYM, eligible_mask=None) -> ScoreMatrix:
    w, adj, _ = _metric_parts(g, mode)
    adj_f = adj.astype(float)
    scores = w @ adj_f.T + adj_f @ w.T
    return ScoreMatrix(g.nodes, scores, "common_neighbors", _default_mask(g, eligible_mask))


def jaccard_matrix(g: WeightedDigraph, mode: str = SYM, eligible_mask=None) -> ScoreMatrix:
    w, adj, strength = _metric_parts(g, mode)
    adj_f = adj.astype(float)
    num = w @ adj_f.T + adj_f @ w.T
    denom = strength[:, None] + strength[None, :]
    scores = np.divide(num, denom, out=np.zeros_like(num), where=denom > 0)
    return ScoreMatrix(g.nodes, scores, "jaccard", _default_mask(g, eligible_mask))


def adamic_adar_matrix(g: WeightedDigraph, mode: str = SYM, eligible_mask=None) -> ScoreMatrix:
    w, adj, strength = _metric_parts(g, mode)
    rarity = np.zeros_like(strength)
    nz = strength > 0
    rarity[nz] = 1.0 / np.log1p(strength[nz])
    wr = w * rarity[None, :]
    adj_f = adj.astype(float)
    scores = wr @ adj_f.T + adj_f @ wr.T
    return ScoreMatrix(g.nodes, scores, "adamic_adar", _default_mask(g, eligible_mask))


def normalized_weights(g: WeightedDigraph) -> np.ndarray:
    """W = w / total, the matrix the Katz walk sum operates on."""
    if g.total_weight <= 0:
        raise DataValidationError("graph has no weight")
    return g.w / g.total_weight


def katz(g: WeightedDigraph, cfg: KatzConfig, eligible_mask=None) -> ScoreMatrix:
    """Damped sum over all directed walks: (I - beta*W)^(-1) - I.

    Requires beta times the spectral radius of W to stay below 1; the error
    reports the offending radius.
    """
    w = normalized_weights(g)
    radius = spectral_radius(w)
    if cfg.beta * radius >= 1.0:
        raise SpectralRadiusError(
            f"katz requires beta * spectral_radius(W) < 1; "
            f"beta={cfg.beta} with spectral radius {radius:.6g} gives {cfg.beta * radius:.6g}",
            radius,
        )
    n = g.n
    scores = np.linalg.solve(np.eye(n) - cfg.beta * w, np.eye(n)) - np.eye(n)
    return ScoreMatrix(g.nodes, scores, f"katz[beta={cfg.beta:g}]", _default_mask(g, eligible_mask))


def katz_decompose(scores, w: np.ndarray, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Split a Katz matrix into direct (beta*W) and indirect walk parts.

    Verifies that the inputs belong together via S = beta*W + beta*W@S.
    """
    s = scores.scores if isinstance(scores, ScoreMatrix) else np.asarray(scores, dtype=float)
    w = np.asarray(w, dtype=float)
    if s.shape != w.shape:
        raise DataValidationError("katz matrix and W have different shapes")
    resid = np.max(np.abs(s - beta * w - beta * w @ s))
    if resid > 1e-8:
        raise DataValidationError(
            f"inputs do not satisfy S = beta*W + beta*W@S (residual {resid:.3g}); "
            "mismatched (S, W, beta)?"
        )
    direct = beta * w
    return direct, s - direct

"""Regression kernel for the network evolution and stimulus designs.

OLS (pooled, within/fixed effects, time dummies) with classic, HC1 or
cluster-robust covariance, logit via iteratively reweighted least squares,
the two-step estimator of the attachment parameters (lambda from the log-log
flow equation, alpha from the relative-flow equation), and the panel
assemblers that turn an edge log plus proximity matrices into regression
samples. All solvers go through QR factorization; rank problems are reported
with the names of the offending columns.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg
from scipy import stats as spstats

from . import netcore
from .econ import ProximityMatrix
from .errors import (
    ConvergenceError,
    DataValidationError,
    PerfectSeparationError,
)
from .netcore import TemporalEdgeLog

_RANK_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """Named regressors, response, and optional cluster labels."""

    names: tuple[str, ...]
    x: np.ndarray
    y: np.ndarray
    groups: np.ndarray | None = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 2:
            raise DataValidationError("design matrix must be 2-d")
        if y.shape != (x.shape[0],):
            raise DataValidationError("response length does not match design rows")
        if len(self.names) != x.shape[1]:
            raise DataValidationError("column names do not match design columns")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if self.groups is not None:
            groups = np.asarray(self.groups)
            if groups.shape != (x.shape[0],):
                raise DataValidationError("group labels do not match design rows")
            object.__setattr__(self, "groups", groups)


@dataclass(frozen=True, eq=False)
class RegressionResult:
    names: tuple[str, ...]
    coefficients: np.ndarray
    covariance: np.ndarray
    se_type: str
    r_squared: float
    n_obs: int
    df_resid: int
    notes: tuple[str, ...] = ()

    @property
    def coef(self) -> dict[str, float]:
        return {n: float(c) for n, c in zip(self.names, self.coefficients)}

    @property
    def se(self) -> dict[str, float]:
        d = np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))
        return {n: float(s) for n, s in zip(self.names, d)}

    def conf_int(self, level: float = 0.95) -> dict[str, tuple[float, float]]:
        crit = float(spstats.t.ppf(0.5 + level / 2.0, max(self.df_resid, 1)))
        out = {}
        for name, c, s in zip(self.names, self.coefficients, np.diag(self.covariance)):
            half = crit * np.sqrt(max(s, 0.0))
            out[name] = (float(c - half), float(c + half))
        return out

    def summary(self) -> str:
        lines = [f"{'variable':<24}{'coef':>14}{'se':>14}"]
        se = self.se
        for name, c in self.coef.items():
            lines.append(f"{name:<24}{c:>14.6g}{se[name]:>14.6g}")
        lines.append(f"n={self.n_obs}  R2={self.r_squared:.4f}  se={self.se_type}")
        if self.notes:
            lines.extend(f"note: {n}" for n in self.notes)
        return "\n".join(lines)

    def key_values(self) -> str:
        rows = [f"n_obs={self.n_obs}", f"r2={self.r_squared!r}", f"se_type={self.se_type}"]
        se = self.se
        for name, c in self.coef.items():
            rows.append(f"coef.{name}={c!r}")
            rows.append(f"se.{name}={se[name]!r}")
        return "\n".join(rows)


def _check_rank(x: np.ndarray, names: Sequence[str]) -> None:
    zero = [names[k] for k in range(x.shape[1]) if not np.any(x[:, k])]
    if zero:
        raise DataValidationError(f"all-zero regressor columns: {zero}")
    _, r, piv = scipy.linalg.qr(x, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0:
        return
    rank = int((diag > _RANK_TOL * max(diag[0], 1.0) * max(x.shape)).sum())
    if rank < x.shape[1]:
        collinear = [names[k] for k in sorted(piv[rank:])]
        raise DataValidationError(f"design matrix is rank deficient; collinear columns: {collinear}")


def _has_intercept(x: np.ndarray, names: Sequence[str]) -> bool:
    for k, name in enumerate(names):
        col = x[:, k]
        if name in ("intercept", "const") or (col.size and np.all(col == col[0]) and col[0] != 0):
            return True
    return False


def _ols_covariance(
    x: np.ndarray,
    resid: np.ndarray,
    se_type: str,
    groups: np.ndarray | None,
    df_resid: int,
) -> np.ndarray:
    n, k = x.shape
    xtx_inv = np.linalg.inv(x.T @ x)
    if se_type == "classic":
        sigma2 = float(resid @ resid) / df_resid
        return sigma2 * xtx_inv
    if se_type == "hc1":
        meat = (x * resid[:, None] ** 2).T @ x
        return xtx_inv @ meat @ xtx_inv * (n / df_resid)
    if se_type == "cluster":
        if groups is None:
            raise DataValidationError("cluster standard errors need group labels")
        scores = x * resid[:, None]
        meat = np.zeros((k, k))
        labels, inverse = np.unique(groups, return_inverse=True)
        for g in range(labels.size):
            s = scores[inverse == g].sum(axis=0)
            meat += np.outer(s, s)
        n_g = labels.size
        if n_g < 2:
            raise DataValidationError("cluster standard errors need at least two clusters")
        factor = (n_g / (n_g - 1)) * ((n - 1) / df_resid)
        return xtx_inv @ meat @ xtx_inv * factor
    raise DataValidationError(f"unknown se_type {se_type!r}")


def ols(design: DesignMatrix, se_type: str = "classic") -> RegressionResult:
    """Least squares with the chosen covariance estimator."""
    x, y = design.x, design.y
    n, k = x.shape
    if n <= k:
        raise DataValidationError(f"need more observations ({n}) than regressors ({k})")
    _check_rank(x, design.names)
    beta, *_ = np.linalg.lstsq(x, y, rcond=None)
    resid = y - x @ beta
    df_resid = n - k
    ssr = float(resid @ resid)
    if _has_intercept(x, design.names):
        sst = float(((y - y.mean()) ** 2).sum())
    else:
        sst = float((y**2).sum())
    r2 = 1.0 - ssr / sst if sst > 0 else 1.0
    cov = _ols_covariance(x, resid, se_type, design.groups, df_resid)
    return RegressionResult(design.names, beta, cov, se_type, r2, n, df_resid)


def _group_means(values: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Per-observation group mean of ``values`` under ``labels``."""
    uniq, inverse = np.unique(labels, return_inverse=True)
    counts = np.bincount(inverse, minlength=uniq.size)
    if values.ndim == 1:
        sums = np.bincount(inverse, weights=values, minlength=uniq.size)
        return (sums / counts)[inverse]
    out = np.empty_like(values, dtype=float)
    for col in range(values.shape[1]):
        sums = np.bincount(inverse, weights=values[:, col], minlength=uniq.size)
        out[:, col] = (sums / counts)[inverse]
    return out


def _demean_by(values: np.ndarray, labels: np.ndarray) -> np.ndarray:
    return values - _group_means(values, labels)


def time_dummies(labels: Sequence, prefix: str = "t") -> tuple[tuple[str, ...], np.ndarray]:
    """Indicator columns for every label except the first (the baseline)."""
    arr = np.asarray(labels)
    uniq = np.unique(arr)
    names = tuple(f"{prefix}{v}" for v in uniq[1:])
    cols = np.column_stack([(arr == v).astype(float) for v in uniq[1:]]) if uniq.size > 1 else np.empty((arr.size, 0))
    return names, cols


def fixed_effects(
    x: np.ndarray,
    y: np.ndarray,
    unit_labels: Sequence,
    time_labels: Sequence | None = None,
    names: Sequence[str] | None = None,
    se_type: str = "classic",
) -> RegressionResult:
    """Within (unit-demeaned) estimator, optional time dummies.

    Coefficients coincide with the unit-dummy estimator. Singleton units are
    dropped (their within-variation is zero) and counted in the notes. The
    reported R-squared is the within R-squared.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(y, dtype=float)
    units = np.asarray(unit_labels)
    if names is None:
        names = tuple(f"x{k}" for k in range(x.shape[1]))
    names = tuple(names)
    uniq, inverse, counts = np.unique(units, return_inverse=True, return_counts=True)
    singleton = counts[inverse] < 2
    notes = []
    if singleton.any():
        notes.append(f"dropped {int(np.unique(units[singleton]).size)} singleton unit(s)")
    keep = ~singleton
    x, y, units = x[keep], y[keep], units[keep]
    if y.size == 0:
        raise DataValidationError("no units with at least two observations")
    if time_labels is not None:
        tl = np.asarray(time_labels)[keep]
        tnames, tcols = time_dummies(tl)
        x = np.hstack([x, tcols])
        names = names + tnames
    xd = _demean_by(x, units)
    yd = _demean_by(y, units)
    n, k = xd.shape
    n_units = int(np.unique(units).size)
    df_resid = n - k - n_units
    if df_resid <= 0:
        raise DataValidationError("not enough observations for the within estimator")
    _check_rank(xd, names)
    beta, *_ = np.linalg.lstsq(xd, yd, rcond=None)
    resid = yd - xd @ beta
    ssr = float(resid @ resid)
    sst = float((yd**2).sum())
    r2 = 1.0 - ssr / sst if sst > 0 else 1.0
    cov = _ols_covariance(xd, resid, se_type, units if se_type == "cluster" else None, df_resid)
    return RegressionResult(names, beta, cov, se_type, r2, n, df_resid, tuple(notes))


def logit(design: DesignMatrix, se_type: str = "classic", max_iter: int = 100, tol: float = 1e-10) -> RegressionResult:
    """Maximum-likelihood logit via iteratively reweighted least squares.

    Converges when the log-likelihood change drops below ``tol``; perfect
    separation is reported as an error, as is running out of iterations.
    McFadden's pseudo R-squared is reported in ``r_squared``.
    """
    x, y = design.x, design.y
    if not np.all((y == 0) | (y == 1)):
        raise DataValidationError("logit response must be binary 0/1")
    n, k = x.shape
    if n <= k:
        raise DataValidationError(f"need more observations ({n}) than regressors ({k})")
    _check_rank(x, design.names)
    beta = np.zeros(k)
    p_bar = y.mean()
    if p_bar in (0.0, 1.0):
        raise DataValidationError("response has no variation")
    ll_null = float(n * (p_bar * np.log(p_bar) + (1 - p_bar) * np.log(1 - p_bar)))
    ll_old = -np.inf
    trace: list[float] = []
    for _ in range(max_iter):
        eta = x @ beta
        p = 1.0 / (1.0 + np.exp(-np.clip(eta, -700, 700)))
        w = p * (1.0 - p)
        ll = float(y @ np.log(np.clip(p, 1e-300, None)) + (1 - y) @ np.log(np.clip(1 - p, 1e-300, None)))
        trace.append(ll)
        if abs(ll) < 1e-8 * n or np.max(np.abs(beta)) > 1e4:
            raise PerfectSeparationError(
                "perfect separation: likelihood is unbounded (coefficients diverging)"
            )
        if abs(ll - ll_old) < tol:
            xtwx = (x * w[:, None]).T @ x
            info_inv = np.linalg.inv(xtwx)
            df_resid = n - k
            if se_type == "classic":
                cov = info_inv
            elif se_type == "hc1":
                scores = x * (y - p)[:, None]
                cov = info_inv @ (scores.T @ scores) @ info_inv * (n / df_resid)
            elif se_type == "cluster":
                if design.groups is None:
                    raise DataValidationError("cluster standard errors need group labels")
                scores = x * (y - p)[:, None]
                meat = np.zeros((k, k))
                labels, inverse = np.unique(design.groups, return_inverse=True)
                for g in range(labels.size):
                    s = scores[inverse == g].sum(axis=0)
                    meat += np.outer(s, s)
                factor = (labels.size / (labels.size - 1)) * ((n - 1) / df_resid)
                cov = info_inv @ meat @ info_inv * factor
            else:
                raise DataValidationError(f"unknown se_type {se_type!r}")
            pseudo_r2 = 1.0 - ll / ll_null if ll_null != 0 else 0.0
            return RegressionResult(design.names, beta, cov, se_type, pseudo_r2, n, df_resid)
        ll_old = ll
        w = np.clip(w, 1e-10, None)
        z = eta + (y - p) / w
        wx = x * w[:, None]
        beta = np.linalg.solve(wx.T @ x, wx.T @ z)
    raise ConvergenceError(f"logit did not converge in {max_iter} iterations", trace)


# ---------------------------------------------------------------------------
# Panel assembly over edge universes


def _universe_arrays(log: TemporalEdgeLog, universe) -> tuple[list[tuple[str, str]], dict]:
    pairs = list(universe) if universe is not None else list(netcore.eligible_pairs(log))
    if not pairs:
        raise DataValidationError("empty edge universe")
    return pairs, {p: k for k, p in enumerate(pairs)}


def _iter_panel_years(log: TemporalEdgeLog, pairs, index):
    """Yield (year, cumulative weights before year, flows during year)."""
    cum = np.zeros(len(pairs))
    years = log.times
    flows_by_year = dict(netcore.iter_year_flows(log))
    for pos, year in enumerate(years):
        flow = np.zeros(len(pairs))
        for pair, val in flows_by_year[year].items():
            k = index.get(pair)
            if k is not None:
                flow[k] = float(val)
        if pos > 0:
            yield year, cum.copy(), flow
        cum += flow


@dataclass(frozen=True)
class TwoStepFit:
    lambda_hat: float
    alpha_hat: float
    step1: RegressionResult
    step2: RegressionResult
    n_years: int
    per_year_lambda: tuple[tuple[int, float], ...] = ()


def _step1_class_means(panel) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Per (year, weight class) mean flows: (log w, log mean flow, year, count)."""
    xs, ys, yrs, cnt = [], [], [], []
    for year, cum, flow in panel:
        pos = cum > 0
        if not pos.any():
            continue
        vals, inverse = np.unique(cum[pos], return_inverse=True)
        sums = np.bincount(inverse, weights=flow[pos])
        counts = np.bincount(inverse)
        means = sums / counts
        keep = means > 0
        if not keep.any():
            continue
        xs.append(np.log(vals[keep]))
        ys.append(np.log(means[keep]))
        yrs.append(np.full(int(keep.sum()), year))
        cnt.append(counts[keep].astype(float))
    if not xs:
        raise DataValidationError("no pair-years with positive weight and positive flow")
    return (np.concatenate(xs), np.concatenate(ys), np.concatenate(yrs), np.concatenate(cnt))


def two_step_pwa_fit(
    log: TemporalEdgeLog,
    universe=None,
    se_type: str = "classic",
    per_year: bool = False,
    step1: str = "class_mean",
) -> TwoStepFit:
    """Estimate the attachment exponent and the preferential share.

    Step 1 estimates the exponent from the log-log relation between yearly
    flows and the prior cumulative weight, over pairs with positive weight
    and positive flow, pooled across years. The default ``step1="class_mean"``
    regresses the log mean flow of each (year, weight-class) cell on log
    weight with year intercepts, weighted by the number of pairs in the cell;
    averaging within weight classes keeps the positive-flow restriction from
    flattening the slope when yearly flows per pair are small and the year
    intercepts absorb the drifting kernel normalization.
    ``step1="pairwise"`` is the raw pair-level regression for diagnostics.

    Step 2 regresses per-year relative flows on the kernel shares
    w**lambda_hat / sum(w**lambda_hat) over the whole eligible universe; the
    slope is the preferential share.
    """
    if len(log.times) < 2:
        raise DataValidationError("two-step fit needs a log spanning at least 2 years")
    if step1 not in ("class_mean", "pairwise"):
        raise DataValidationError(f"unknown step1 variant {step1!r}")
    pairs, index = _universe_arrays(log, universe)
    panel: list[tuple[int, np.ndarray, np.ndarray]] = list(_iter_panel_years(log, pairs, index))
    if step1 == "class_mean":
        lx, ly, yrs, counts = _step1_class_means(panel)
        uy = np.unique(yrs)
        dummies = np.column_stack([(yrs == v).astype(float) for v in uy])
        names = ("log_weight",) + tuple(f"year{v}" for v in uy)
        sw = np.sqrt(counts)
        d1 = DesignMatrix(names, np.column_stack([lx, dummies]) * sw[:, None], ly * sw)
        step1_result = ols(d1, se_type=se_type)
        lam_hat = float(step1_result.coefficients[0])
    else:
        logw: list[np.ndarray] = []
        logf: list[np.ndarray] = []
        for year, cum, flow in panel:
            sel = (cum > 0) & (flow > 0)
            if sel.any():
                logw.append(np.log(cum[sel]))
                logf.append(np.log(flow[sel]))
        if not logw:
            raise DataValidationError("no pair-years with positive weight and positive flow")
        lw = np.concatenate(logw)
        lf = np.concatenate(logf)
        d1 = DesignMatrix(("intercept", "log_weight"), np.column_stack([np.ones_like(lw), lw]), lf)
        step1_result = ols(d1, se_type=se_type)
        lam_hat = float(step1_result.coefficients[1])
    per_year_lam: list[tuple[int, float]] = []
    if per_year:
        for year, cum, flow in panel:
            sel = (cum > 0) & (flow > 0)
            if sel.sum() >= 3:
                sub = [(year, cum, flow)]
                try:
                    lx, ly, _, counts = _step1_class_means(sub)
                except DataValidationError:
                    continue
                if np.unique(lx).size < 2:
                    continue
                sw = np.sqrt(counts)
                d = DesignMatrix(
                    ("log_weight", "intercept"),
                    np.column_stack([lx, np.ones_like(lx)]) * sw[:, None],
                    ly * sw,
                )
                per_year_lam.append((year, float(ols(d).coefficients[0])))
    lam_for_step2 = lam_hat
    xs: list[np.ndarray] = []
    ys: list[np.ndarray] = []
    used_years = 0
    for year, cum, flow in panel:
        total_flow = flow.sum()
        kernel = np.where(cum > 0, cum, 1.0) ** lam_for_step2 * (cum > 0)
        denom = kernel.sum()
        if total_flow <= 0 or denom <= 0:
            continue
        xs.append(kernel / denom)
        ys.append(flow / total_flow)
        used_years += 1
    if not xs:
        raise DataValidationError("no usable years for step 2")
    x2 = np.concatenate(xs)
    y2 = np.concatenate(ys)
    d2 = DesignMatrix(("intercept", "kernel_share"), np.column_stack([np.ones_like(x2), x2]), y2)
    step2 = ols(d2, se_type=se_type)
    return TwoStepFit(
        lam_hat,
        float(step2.coefficients[1]),
        step1,
        step2,
        used_years,
        tuple(per_year_lam),
    )


def _two_way_within(values: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Two-way within transform, exact for a balanced crossed design:
    value - row mean - column mean + grand mean."""
    grand = values.mean(axis=0)
    return values - _group_means(values, rows) - _group_means(values, cols) + grand


def _is_balanced(rows: np.ndarray, cols: np.ndarray) -> bool:
    combos, counts = np.unique(np.stack([rows, cols], axis=1), axis=0, return_counts=True)
    if counts.min() != counts.max():
        return False
    r = np.unique(rows).size
    c = np.unique(cols).size
    return combos.shape[0] == r * c


def evolution_regression(
    log: TemporalEdgeLog,
    proximities: Sequence[ProximityMatrix] = (),
    spec: str = "linear",
    effects: str = "none",
    se_type: str = "hc1",
    universe=None,
) -> RegressionResult:
    """Pooled pair-year regression of flow formation on prior ties.

    ``spec``: "linear" uses relative flows on relative cumulative weight,
    "logit" models the presence of any flow, and "loglog" regresses log
    relative flows on log relative weight over the pairs with positive flow
    and positive history (zeros drop, shrinking the sample). Proximity
    matrices enter in levels. ``effects="fixed"`` adds sender and receiver
    effects plus year dummies. All-zero proximity regressors are dropped and
    reported with a zero coefficient rather than failing the rank check.
    """
    if spec not in ("linear", "logit", "loglog"):
        raise DataValidationError(f"unknown spec {spec!r}")
    if effects not in ("none", "fixed"):
        raise DataValidationError(f"unknown effects {effects!r}")
    pairs, index = _universe_arrays(log, universe)
    nodes = set(log.node_universe)
    for prox in proximities:
        missing = {p for pair in pairs for p in pair} - set(prox.sector_ids)
        if missing:
            raise DataValidationError(
                f"proximity {prox.kind!r} lacks sectors {sorted(missing)[:5]}"
            )
    zvals = []
    znames = []
    for prox in proximities:
        pidx = {s: k for k, s in enumerate(prox.sector_ids)}
        zvals.append(np.array([prox.values[pidx[s], pidx[t]] for s, t in pairs]))
        znames.append(prox.kind)
    if len(set(znames)) != len(znames):
        seen: dict[str, int] = {}
        for k, name in enumerate(znames):
            seen[name] = seen.get(name, 0) + 1
            if seen[name] > 1:
                znames[k] = f"{name}_{seen[name]}"
    rows_y: list[np.ndarray] = []
    rows_x: list[np.ndarray] = []
    rows_year: list[np.ndarray] = []
    keep_masks: list[np.ndarray] = []
    for year, cum, flow in _iter_panel_years(log, pairs, index):
        total_cum = cum.sum()
        total_flow = flow.sum()
        if total_cum <= 0 or total_flow <= 0:
            continue
        rel_w = cum / total_cum
        if spec == "linear":
            y = flow / total_flow
            x1 = rel_w
            keep = np.ones(len(pairs), dtype=bool)
        elif spec == "logit":
            y = (flow > 0).astype(float)
            x1 = rel_w
            keep = np.ones(len(pairs), dtype=bool)
        else:
            keep = (flow > 0) & (cum > 0)
            y = np.zeros(len(pairs))
            x1 = np.zeros(len(pairs))
            y[keep] = np.log(flow[keep] / total_flow)
            x1[keep] = np.log(rel_w[keep])
        rows_y.append(y)
        rows_x.append(x1)
        rows_year.append(np.full(len(pairs), year))
        keep_masks.append(keep)
    if not rows_y:
        raise DataValidationError("no usable years in the log")
    keep = np.concatenate(keep_masks)
    y = np.concatenate(rows_y)[keep]
    x1 = np.concatenate(rows_x)[keep]
    yearcol = np.concatenate(rows_year)[keep]
    n_years = len(rows_y)
    senders = np.array([s for s, _ in pairs] * n_years)[keep]
    receivers = np.array([t for _, t in pairs] * n_years)[keep]
    zmat = [np.tile(zv, n_years)[keep] for zv in zvals]
    names: list[str] = ["pref_attachment"]
    cols: list[np.ndarray] = [x1]
    dropped: list[str] = []
    for name, zv in zip(znames, zmat):
        if not np.any(zv):
            dropped.append(name)
        else:
            names.append(name)
            cols.append(zv)
    notes = tuple(f"dropped all-zero regressor {n!r} (coefficient pinned to 0)" for n in dropped)
    if effects == "none":
        names = ["intercept"] + names
        cols = [np.ones_like(y)] + cols
        design = DesignMatrix(tuple(names), np.column_stack(cols), y)
        result = logit(design, se_type=se_type) if spec == "logit" else ols(design, se_type=se_type)
    else:
        tnames, tcols = time_dummies(yearcol, prefix="year")
        if spec == "logit":
            dnames_s, dcols_s = time_dummies(senders, prefix="sender")
            dnames_r, dcols_r = time_dummies(receivers, prefix="receiver")
            full_names = ["intercept"] + names + list(tnames) + list(dnames_s) + list(dnames_r)
            full_cols = [np.ones_like(y)] + cols + [tcols, dcols_s, dcols_r]
            design = DesignMatrix(tuple(full_names), np.column_stack(full_cols), y)
            result = logit(design, se_type=se_type)
        else:
            x = np.column_stack(cols + [tcols]) if tcols.size else np.column_stack(cols)
            all_names = tuple(names) + tnames
            if _is_balanced(senders, receivers):
                xd = _two_way_within(x, senders, receivers)
                yd = _two_way_within(y, senders, receivers)
                n, k = xd.shape
                n_fe = np.unique(senders).size + np.unique(receivers).size - 1
                df_resid = n - k - n_fe
                if df_resid <= 0:
                    raise DataValidationError("not enough observations for two-way effects")
                _check_rank(xd, all_names)
                beta, *_ = np.linalg.lstsq(xd, yd, rcond=None)
                resid = yd - xd @ beta
                ssr = float(resid @ resid)
                sst = float((yd**2).sum())
                r2 = 1.0 - ssr / sst if sst > 0 else 1.0
                cov = _ols_covariance(xd, resid, se_type, None, df_resid)
                result = RegressionResult(all_names, beta, cov, se_type, r2, n, df_resid)
            else:
                dnames_s, dcols_s = time_dummies(senders, prefix="sender")
                dnames_r, dcols_r = time_dummies(receivers, prefix="receiver")
                full_names = ("intercept",) + all_names + dnames_s + dnames_r
                full_cols = np.column_stack([np.ones_like(y), x, dcols_s, dcols_r])
                design = DesignMatrix(full_names, full_cols, y)
                result = ols(design, se_type=se_type)
    coef_names = list(result.names)
    coefficients = list(result.coefficients)
    for name in dropped:
        coef_names.append(name)
        coefficients.append(0.0)
    return RegressionResult(
        tuple(coef_names),
        np.array(coefficients),
        result.covariance,
        result.se_type,
        result.r_squared,
        result.n_obs,
        result.df_resid,
        notes + result.notes,
    )


def stimulus_regression(
    panel,
    effects: str = "none",
    time_dummies_on: bool = False,
    se_type: str = "hc1",
    regressors: Sequence[str] = ("forward", "backward"),
) -> RegressionResult:
    """Elasticity regression of log(1+count) on log(1+stimulus predictors)."""
    x_count, xf, xb, industries, periods = panel.arrays()
    if len(set(periods)) < 1:
        raise DataValidationError("panel needs at least one usable period")
    y = np.log1p(x_count)
    cols = []
    names = []
    if "forward" in regressors:
        names.append("forward")
        cols.append(np.log1p(xf))
    if "backward" in regressors:
        names.append("backward")
        cols.append(np.log1p(xb))
    if not cols:
        raise DataValidationError("no regressors selected")
    x = np.column_stack(cols)
    if effects == "none":
        if time_dummies_on:
            tn, tc = time_dummies(periods, prefix="period")
            x = np.hstack([x, tc])
            names.extend(tn)
        design = DesignMatrix(("intercept",) + tuple(names), np.column_stack([np.ones_like(y), x]), y,
                              groups=np.asarray(industries))
        return ols(design, se_type=se_type)
    if effects == "fixed":
        return fixed_effects(
            x,
            y,
            unit_labels=industries,
            time_labels=periods if time_dummies_on else None,
            names=tuple(names),
            se_type=se_type,
        )
    raise DataValidationError(f"unknown effects {effects!r}")

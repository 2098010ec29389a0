"""Proximity matrices from input-output data.

Builds the Leontief inverse, embodied R&D flow matrix, Los input-similarity
index and a gravity control from an input-output table, and ingests
exogenous square proximity matrices (e.g. skill-relatedness) that are
computed elsewhere. Sector granularities are bridged by an explicit mapping
file; nothing is aggregated silently.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DataValidationError, SpectralRadiusError
from .linalg import spectral_radius

KINDS = ("leontief", "rd_flows", "los", "gravity", "skill")

ROWS = "rows"
COLUMNS = "columns"


@dataclass(frozen=True, eq=False)
class IoTable:
    """Input coefficients plus the vectors needed by the proximity builders.

    ``a[i, k]`` is the value of input k required per unit output of sector i;
    ``x`` gross output, ``y`` final demand, ``r`` R&D expenditure and ``q``
    the output denominator for R&D intensity.
    """

    sector_ids: tuple[str, ...]
    a: np.ndarray
    x: np.ndarray
    y: np.ndarray
    r: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        n = len(self.sector_ids)
        a = np.asarray(self.a, dtype=float)
        if a.shape != (n, n):
            raise DataValidationError(f"A must be {n}x{n}, got {a.shape}")
        if np.any(a < 0):
            i, k = np.argwhere(a < 0)[0]
            raise DataValidationError(
                f"negative input coefficient at ({self.sector_ids[i]}, {self.sector_ids[k]})"
            )
        radius = spectral_radius(a)
        if radius >= 1.0:
            raise SpectralRadiusError(
                f"input coefficient matrix has spectral radius {radius:.6g} >= 1", radius
            )
        for name in ("x", "y", "r", "q"):
            vec = np.asarray(getattr(self, name), dtype=float)
            if vec.shape != (n,):
                raise DataValidationError(f"vector {name} must have length {n}")
            object.__setattr__(self, name, vec)
        object.__setattr__(self, "a", a)


@dataclass(frozen=True, eq=False)
class ProximityMatrix:
    sector_ids: tuple[str, ...]
    values: np.ndarray
    kind: str

    def __post_init__(self):
        n = len(self.sector_ids)
        values = np.asarray(self.values, dtype=float)
        if values.shape != (n, n):
            raise DataValidationError(f"proximity matrix must be {n}x{n}, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DataValidationError("proximity matrix contains non-finite entries")
        object.__setattr__(self, "values", values)

    def drop_diagonal(self) -> "ProximityMatrix":
        values = self.values.copy()
        np.fill_diagonal(values, 0.0)
        return ProximityMatrix(self.sector_ids, values, self.kind)


def leontief(a: np.ndarray, sector_ids=None) -> ProximityMatrix:
    """(I - A)^(-1); requires spectral radius of A below 1."""
    a = np.asarray(a, dtype=float)
    radius = spectral_radius(a)
    if radius >= 1.0:
        raise SpectralRadiusError(
            f"Leontief inverse undefined: spectral radius {radius:.6g} >= 1", radius
        )
    n = a.shape[0]
    ids = tuple(sector_ids) if sector_ids is not None else tuple(f"S{k}" for k in range(n))
    values = np.linalg.solve(np.eye(n) - a, np.eye(n))
    return ProximityMatrix(ids, values, "leontief")


def rd_flows(table: IoTable) -> ProximityMatrix:
    """R&D embodied in direct and indirect requirements:
    diag(r) diag(q)^(-1) (I - A)^(-1) diag(y)."""
    if np.any(table.q <= 0):
        bad = table.sector_ids[int(np.argmax(table.q <= 0))]
        raise DataValidationError(f"R&D intensity undefined: sector {bad!r} has q <= 0")
    linv = leontief(table.a, table.sector_ids).values
    values = (table.r / table.q)[:, None] * linv * table.y[None, :]
    return ProximityMatrix(table.sector_ids, values, "rd_flows")


def los_index(a: np.ndarray, sector_ids=None, orientation: str = ROWS) -> ProximityMatrix:
    """Cosine similarity between sectors' input-coefficient vectors.

    ``orientation="rows"`` compares input mixes (a[i, :] per sector i, the
    default); ``"columns"`` compares delivery profiles instead. Pairs
    involving an all-zero vector score 0.
    """
    a = np.asarray(a, dtype=float)
    if np.any(a < 0):
        raise DataValidationError("los index expects nonnegative coefficients")
    if orientation == COLUMNS:
        a = a.T
    elif orientation != ROWS:
        raise ValueError(f"unknown orientation {orientation!r}")
    n = a.shape[0]
    ids = tuple(sector_ids) if sector_ids is not None else tuple(f"S{k}" for k in range(n))
    norms = np.sqrt((a**2).sum(axis=1))
    dots = a @ a.T
    denom = np.outer(norms, norms)
    values = np.divide(dots, denom, out=np.zeros_like(dots), where=denom > 0)
    np.clip(values, 0.0, 1.0, out=values)
    values[np.arange(n), np.arange(n)] = np.where(norms > 0, 1.0, 0.0)
    return ProximityMatrix(ids, values, "los")


def gravity(value_added: np.ndarray, g: float, sector_ids=None) -> ProximityMatrix:
    """F_ij = g * m_i * m_j / m**2 with m the total value added."""
    m = np.asarray(value_added, dtype=float)
    total = m.sum()
    if total <= 0:
        raise DataValidationError("total value added must be positive")
    ids = tuple(sector_ids) if sector_ids is not None else tuple(f"S{k}" for k in range(m.size))
    return ProximityMatrix(ids, g * np.outer(m, m) / total**2, "gravity")


# ---------------------------------------------------------------------------
# File ingestion


class DroppedSectorsWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SectorMapping:
    """Many-to-one sector bridge: each source sector maps to one target id
    with a weight (default 1)."""

    entries: tuple[tuple[str, str, float], ...]

    @classmethod
    def load(cls, path) -> "SectorMapping":
        entries = []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise DataValidationError("empty mapping file")
            header = [h.strip().lower() for h in header]
            if header[:2] != ["source_id", "target_id"]:
                raise DataValidationError("mapping header must be source_id,target_id[,weight]")
            for row in reader:
                if not row or not any(f.strip() for f in row):
                    continue
                weight = float(row[2]) if len(row) > 2 and row[2].strip() else 1.0
                if weight <= 0:
                    raise DataValidationError(f"non-positive mapping weight for {row[0]!r}")
                entries.append((row[0].strip(), row[1].strip(), weight))
        sources = [e[0] for e in entries]
        if len(set(sources)) != len(sources):
            raise DataValidationError("mapping lists a source sector twice")
        return cls(tuple(entries))

    def targets(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(e[1] for e in self.entries))


def _warn_dropped(ids, mapped, context: str) -> None:
    dropped = [s for s in ids if s not in mapped]
    if dropped:
        warnings.warn(
            f"{context}: sectors without a mapping were dropped: {dropped}",
            DroppedSectorsWarning,
            stacklevel=3,
        )


def _aggregate_table(table: IoTable, mapping: SectorMapping) -> IoTable:
    """Aggregate an IO table onto mapped target ids via weighted flows.

    Coefficients are aggregated through the flow matrix Z = A diag(x) so the
    result is again a valid coefficient matrix for the aggregated outputs.
    """
    mapped = {e[0]: (e[1], e[2]) for e in mapping.entries}
    _warn_dropped(table.sector_ids, mapped, "io table mapping")
    keep = [k for k, s in enumerate(table.sector_ids) if s in mapped]
    if not keep:
        raise DataValidationError("mapping matches no sector in the table")
    targets = mapping.targets()
    tindex = {t: k for k, t in enumerate(targets)}
    n_new = len(targets)
    agg = np.zeros((len(keep), n_new))
    for row, k in enumerate(keep):
        t, wgt = mapped[table.sector_ids[k]]
        agg[row, tindex[t]] = wgt
    sub = np.ix_(keep, keep)
    x_old = table.x[keep]
    z = table.a[sub] * x_old[None, :]
    z_new = agg.T @ z @ agg
    x_new = agg.T @ x_old
    if np.any(x_new <= 0):
        bad = targets[int(np.argmax(x_new <= 0))]
        raise DataValidationError(f"aggregated output for {bad!r} is not positive")
    a_new = z_new / x_new[None, :]
    return IoTable(
        targets,
        a_new,
        x_new,
        agg.T @ table.y[keep],
        agg.T @ table.r[keep],
        agg.T @ table.q[keep],
    )


def load_io_table(path, mapping: SectorMapping | None = None) -> IoTable:
    """Read the block-tagged comma-separated IO-table format.

    Each block starts with a ``block=<name>`` line; the A block carries a
    sector-id header row and column, vector blocks one ``id,value`` row per
    sector.
    """
    blocks: dict[str, list[list[str]]] = {}
    current: str | None = None
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.lower().startswith("block="):
                current = line.split("=", 1)[1].strip()
                blocks[current] = []
                continue
            if current is None:
                raise DataValidationError("content before the first block= tag")
            blocks[current].append(next(csv.reader([line])))
    missing = [b for b in ("A", "x", "y", "r", "q") if b not in blocks]
    if missing:
        raise DataValidationError(f"io table file lacks blocks: {missing}")
    a_rows = blocks["A"]
    header = [h.strip() for h in a_rows[0][1:]]
    ids = []
    a_vals = []
    for row in a_rows[1:]:
        ids.append(row[0].strip())
        try:
            a_vals.append([float(v) for v in row[1:]])
        except ValueError:
            raise DataValidationError(f"non-numeric coefficient in A row {row[0]!r}") from None
    if header != ids:
        raise DataValidationError("A block header and row ids disagree")
    if any(len(r) != len(ids) for r in a_vals):
        raise DataValidationError("A block is not square")
    a = np.array(a_vals)
    neg = np.argwhere(a < 0)
    if neg.size:
        i, k = neg[0]
        raise DataValidationError(f"negative coefficient at ({ids[i]}, {ids[k]})")

    def vector(name: str) -> np.ndarray:
        rows = blocks[name]
        got = {r[0].strip(): float(r[1]) for r in rows}
        missing_ids = [s for s in ids if s not in got]
        if missing_ids:
            raise DataValidationError(f"block {name} lacks sectors {missing_ids}")
        extra = [s for s in got if s not in ids]
        if extra:
            raise DataValidationError(f"block {name} has unknown sectors {extra}")
        return np.array([got[s] for s in ids])

    table = IoTable(tuple(ids), a, vector("x"), vector("y"), vector("r"), vector("q"))
    if mapping is not None:
        table = _aggregate_table(table, mapping)
    return table


def load_exogenous_matrix(path, kind: str, mapping: SectorMapping | None = None) -> ProximityMatrix:
    """Read a square proximity matrix with id headers, optionally remapped."""
    if kind not in KINDS:
        raise DataValidationError(f"unknown proximity kind {kind!r}")
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(f.strip() for f in r)]
    if not rows:
        raise DataValidationError("empty matrix file")
    header = [h.strip() for h in rows[0][1:]]
    ids = []
    vals = []
    for row in rows[1:]:
        ids.append(row[0].strip())
        vals.append([float(v) for v in row[1:]])
    if header != ids:
        raise DataValidationError("matrix header and row ids disagree")
    if any(len(r) != len(ids) for r in vals):
        raise DataValidationError("matrix is not square")
    values = np.array(vals)
    if mapping is not None:
        mapped = {e[0]: (e[1], e[2]) for e in mapping.entries}
        _warn_dropped(ids, mapped, "matrix mapping")
        keep = [k for k, s in enumerate(ids) if s in mapped]
        if not keep:
            raise DataValidationError("mapping matches no sector in the matrix")
        targets = mapping.targets()
        tindex = {t: k for k, t in enumerate(targets)}
        agg = np.zeros((len(keep), len(targets)))
        for row, k in enumerate(keep):
            t, wgt = mapped[ids[k]]
            agg[row, tindex[t]] = wgt
        values = agg.T @ values[np.ix_(keep, keep)] @ agg
        ids = list(targets)
    return ProximityMatrix(tuple(ids), values, kind)


def save_proximity(matrix: ProximityMatrix, path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow([""] + list(matrix.sector_ids))
        for k, sid in enumerate(matrix.sector_ids):
            out.writerow([sid] + [repr(float(v)) for v in matrix.values[k]])

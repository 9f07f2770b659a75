"""Labeled datasets in canonical order (positives first, then negatives)."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Raised for malformed or inconsistent input data."""


@dataclass(frozen=True)
class Dataset:
    """Points reordered so that rows ``[0, m)`` are +1 and ``[m, l)`` are -1.

    ``order[i]`` is the row index in the original input of canonical row ``i``.
    """

    points: np.ndarray
    labels: np.ndarray
    order: np.ndarray = field(repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        lab = np.asarray(self.labels, dtype=int)
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise DataError("points must be a 2-D array with at least one feature")
        if lab.shape != (pts.shape[0],):
            raise DataError("one label per point required")
        pts.setflags(write=False)
        lab.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", lab)
        object.__setattr__(self, "order", np.asarray(self.order, dtype=int))

    @property
    def m(self) -> int:
        return int(np.count_nonzero(self.labels == 1))

    @property
    def n(self) -> int:
        return int(np.count_nonzero(self.labels == -1))

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def positives(self) -> np.ndarray:
        return self.points[: self.m]

    @property
    def negatives(self) -> np.ndarray:
        return self.points[self.m:]

    def original_order(self) -> tuple[np.ndarray, np.ndarray]:
        """Points and labels in the row order they were read in."""
        inv = np.empty_like(self.order)
        inv[self.order] = np.arange(self.size)
        return self.points[inv], self.labels[inv]


def make_dataset(points, labels) -> Dataset:
    """Validate and canonicalize; a stable sort keeps within-class order."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    lab = np.asarray(labels)
    if pts.ndim != 2 or pts.shape[1] < 1:
        raise DataError("points must be a 2-D array with at least one feature")
    if lab.shape != (pts.shape[0],):
        raise DataError(f"got {lab.shape[0] if lab.ndim else 0} labels for {pts.shape[0]} points")
    if not np.all(np.isfinite(pts)):
        raise DataError("non-finite feature value")
    bad = ~np.isin(lab, (1, -1))
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise DataError(f"row {i + 1}: label {lab[i]!r} outside {{+1,-1}}")
    lab = lab.astype(int)
    if not np.any(lab == 1):
        raise DataError("at least one positive (+1) example is required (m = 0)")
    order = np.argsort(-lab, kind="stable")
    return Dataset(pts[order], lab[order], order)


def _parse_label(tok: str, row: int):
    try:
        v = float(tok)
    except ValueError:
        raise DataError(f"row {row}: cannot parse label {tok!r}") from None
    if v not in (1.0, -1.0):
        raise DataError(f"row {row}: label {tok.strip()} outside {{+1,-1}}")
    return int(v)


def read_csv_rows(path) -> np.ndarray:
    """Numeric rows of a comma-separated file; a non-numeric first row is a header."""
    rows = []
    ncol = None
    lines = Path(path).read_text().splitlines()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        toks = [t.strip() for t in line.split(",")]
        try:
            vals = [float(t) for t in toks]
        except ValueError:
            if not rows and ncol is None:
                ncol = len(toks)  # header
                continue
            bad = next(j for j, t in enumerate(toks) if not _is_float(t))
            raise DataError(f"row {lineno}, column {bad + 1}: cannot parse {toks[bad]!r}") from None
        if ncol is None:
            ncol = len(vals)
        elif len(vals) != ncol:
            raise DataError(f"row {lineno}: expected {ncol} columns, got {len(vals)}")
        rows.append(vals)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return np.array(rows, dtype=float)


def _is_float(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def read_libsvm(path, dim: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Parse ``label idx:val ...`` lines (1-based indices, missing entries are 0)."""
    labels, entries = [], []
    max_idx = 0
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        labels.append(_parse_label(toks[0], lineno))
        row = {}
        for tok in toks[1:]:
            try:
                k, v = tok.split(":")
                idx, val = int(k), float(v)
            except ValueError:
                raise DataError(f"row {lineno}: bad entry {tok!r}") from None
            if idx < 1:
                raise DataError(f"row {lineno}: feature index {idx} must be >= 1")
            row[idx] = val
            max_idx = max(max_idx, idx)
        entries.append(row)
    if not labels:
        raise DataError(f"{path}: no data rows")
    ncol = max(max_idx, dim or 0, 1)
    pts = np.zeros((len(labels), ncol))
    for i, row in enumerate(entries):
        for k, v in row.items():
            pts[i, k - 1] = v
    return pts, np.array(labels)


def load_dataset(path, format: str = "csv") -> Dataset:
    """Load a labeled file (CSV with the label in the last column, or LIBSVM)."""
    if format == "libsvm":
        pts, lab = read_libsvm(path)
        return make_dataset(pts, lab)
    if format != "csv":
        raise DataError(f"unknown format {format!r}")
    arr = read_csv_rows(path)
    if arr.shape[1] < 2:
        raise DataError("CSV needs at least one feature column and a label column")
    for i, v in enumerate(arr[:, -1]):
        if v not in (1.0, -1.0):
            raise DataError(f"row {i + 1}: label {v:g} outside {{+1,-1}}")
    return make_dataset(arr[:, :-1], arr[:, -1].astype(int))


def save_dataset(d: Dataset, path, format: str = "csv") -> None:
    """Write in the original row order so load -> save -> load round-trips."""
    pts, lab = d.original_order()
    with open(path, "w") as fh:
        for x, y in zip(pts, lab):
            if format == "csv":
                fh.write(",".join(repr(float(v)) for v in x) + f",{int(y)}\n")
            elif format == "libsvm":
                feats = " ".join(f"{j + 1}:{float(v)!r}" for j, v in enumerate(x) if v != 0.0)
                fh.write(f"{int(y):+d} {feats}".rstrip() + "\n")
            else:
                raise DataError(f"unknown format {format!r}")


def relabel_banana(d: Dataset) -> Dataset:
    """Mark every point with ``x2 + (3/7)(x1 - 3) > 0`` as negative.

    Points exactly on the line keep their label.
    """
    if d.dim != 2:
        raise DataError(f"banana relabel needs 2-D points, got dimension {d.dim}")
    pts, lab = d.original_order()
    lab = lab.copy()
    lab[pts[:, 1] + (3.0 / 7.0) * (pts[:, 0] - 3.0) > 0] = -1
    return make_dataset(pts, lab)

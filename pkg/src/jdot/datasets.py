"""Seeded toy generators, CSV ingestion, and subsampling.

Toy generators are deterministic under a fixed seed. The CSV dialect is
comma-separated UTF-8 with a required header row and '.' decimals.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError

DOMAIN_TAGS = ("source", "target")

# 3-class layout: centers on a ring of radius 3, one class per angle,
# per-class isotropic spread
DEFAULT_CENTER_ANGLES = (0.0, math.pi / 3.0, 2.0 * math.pi / 3.0)
DEFAULT_CENTER_RADIUS = 3.0
DEFAULT_SIGMAS = (0.4, 0.6, 0.8)


@dataclass
class LabeledDataset:
    """Feature matrix plus labels.

    ``y`` is a 1-D integer array of class indices (classification), a 2-D
    real array (regression), or None for unlabeled inputs.
    """

    X: np.ndarray
    y: np.ndarray | None
    domain_tag: str = "source"

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=np.float64)
        if self.X.ndim == 1:
            self.X = self.X.reshape(-1, 1)
        if self.X.ndim != 2 or self.X.shape[0] < 1:
            raise DataError("X must be a non-empty 2-D array")
        if not np.all(np.isfinite(self.X)):
            raise DataError("X contains non-finite values")
        if self.domain_tag not in DOMAIN_TAGS:
            raise DataError(f"unknown domain tag {self.domain_tag!r}")
        if self.y is None:
            return
        y = np.asarray(self.y)
        if np.issubdtype(y.dtype, np.integer):
            y = y.astype(np.int64)
            if y.ndim != 1:
                raise DataError("class indices must be 1-D")
            if np.any(y < 0):
                raise DataError("class indices must be non-negative")
        else:
            y = np.ascontiguousarray(y, dtype=np.float64)
            if y.ndim == 1:
                y = y.reshape(-1, 1)
            if y.ndim != 2:
                raise DataError("regression targets must be 1-D or 2-D")
            if not np.all(np.isfinite(y)):
                raise DataError("labels contain non-finite values")
        if y.shape[0] != self.X.shape[0]:
            raise DataError(
                f"label count {y.shape[0]} does not match sample count "
                f"{self.X.shape[0]}"
            )
        self.y = y

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    @property
    def task(self) -> str | None:
        if self.y is None:
            return None
        if np.issubdtype(self.y.dtype, np.integer):
            return "classification"
        return "regression"

    @property
    def n_classes(self) -> int:
        if self.task != "classification":
            raise DataError("n_classes is defined for classification labels only")
        return int(self.y.max()) + 1


def default_gaussian_centers() -> np.ndarray:
    angles = np.asarray(DEFAULT_CENTER_ANGLES)
    return DEFAULT_CENTER_RADIUS * np.stack(
        [np.cos(angles), np.sin(angles)], axis=1
    )


def gen_rotated_gaussians(
    n_per_class: int,
    rotation: float,
    seed: int,
    centers=None,
    sigmas=None,
) -> tuple[LabeledDataset, LabeledDataset]:
    """3-class 2-D Gaussian mixture and its rotated copy.

    The source draws one isotropic Gaussian cloud per class (default
    centers on a radius-3 ring at angles 0, 60 and 120 degrees, spreads
    0.4/0.6/0.8); the target is the same draws rotated by ``rotation``
    about the origin, labels kept for evaluation only. The angle is
    reduced modulo 2*pi so a full turn reproduces the source exactly.
    """
    if n_per_class < 1:
        raise DataError("n_per_class must be >= 1")
    c = default_gaussian_centers() if centers is None else np.asarray(
        centers, dtype=np.float64
    )
    s = np.asarray(DEFAULT_SIGMAS if sigmas is None else sigmas, dtype=np.float64)
    if c.ndim != 2 or c.shape[1] != 2 or c.shape[0] != s.shape[0]:
        raise DataError("centers must be (K, 2) with one sigma per class")
    rng = np.random.default_rng(seed)
    blocks = []
    labels = []
    for k in range(c.shape[0]):
        blocks.append(c[k] + s[k] * rng.standard_normal((n_per_class, 2)))
        labels.append(np.full(n_per_class, k, dtype=np.int64))
    xs = np.vstack(blocks)
    y = np.concatenate(labels)
    angle = math.fmod(rotation, 2.0 * math.pi)
    if angle == 0.0:
        xt = xs.copy()
    else:
        ca, sa = math.cos(angle), math.sin(angle)
        rot = np.array([[ca, -sa], [sa, ca]])
        xt = xs @ rot.T
    source = LabeledDataset(X=xs, y=y, domain_tag="source")
    target = LabeledDataset(X=xt, y=y.copy(), domain_tag="target")
    return source, target


def gen_1d_regression_shift(
    n: int,
    seed: int,
    noise: float = 0.05,
    shift: float = math.pi,
) -> tuple[LabeledDataset, LabeledDataset]:
    """1-D regression pair with shifted inputs and flipped response.

    Source: x uniform on [-pi/2, pi/2], y = sin(x) + noise.
    Target: x uniform on the interval shifted by ``shift``,
    y = -sin(x - shift) + noise, so the joint distributions differ in
    both the input range and the sign of the response. At the default
    shift of pi the flipped curve is the smooth continuation of the
    source sinusoid, which keeps the label-aligned coupling reachable
    from a source-only initial model.
    """
    if n < 2:
        raise DataError("n must be >= 2")
    if noise < 0.0:
        raise DataError("noise must be non-negative")
    rng = np.random.default_rng(seed)
    half = math.pi / 2.0
    xs = rng.uniform(-half, half, n)
    ys = np.sin(xs) + noise * rng.standard_normal(n)
    xt = rng.uniform(-half + shift, half + shift, n)
    yt = -np.sin(xt - shift) + noise * rng.standard_normal(n)
    source = LabeledDataset(
        X=xs.reshape(-1, 1), y=ys.reshape(-1, 1), domain_tag="source"
    )
    target = LabeledDataset(
        X=xt.reshape(-1, 1), y=yt.reshape(-1, 1), domain_tag="target"
    )
    return source, target


def _parse_cell(raw: str, row: int, col: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise DataError(
            f"non-numeric value {raw!r} at row {row}, column {col!r}"
        ) from None


def load_csv(
    path,
    feature_cols=None,
    label_col: str | None = "y",
    task: str = "regression",
    domain_tag: str = "source",
) -> LabeledDataset:
    """Read a comma-separated file with a header row into a dataset.

    ``feature_cols`` defaults to every column except the label column, in
    header order. ``label_col=None`` loads unlabeled inputs. Row numbers
    in error messages are 1-based data rows (the header is row 0).
    """
    if task not in ("regression", "classification"):
        raise DataError(f"unknown task {task!r}")
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, header row required") from None
        header = [h.strip() for h in header]
        if label_col is not None and label_col not in header:
            raise DataError(f"{path}: label column {label_col!r} not in header")
        if feature_cols is None:
            feature_cols = [h for h in header if h != label_col]
        missing = [c for c in feature_cols if c not in header]
        if missing:
            raise DataError(f"{path}: feature columns {missing} not in header")
        if not feature_cols:
            raise DataError(f"{path}: no feature columns")
        col_pos = {name: header.index(name) for name in header}
        feat_idx = [col_pos[c] for c in feature_cols]
        label_idx = col_pos[label_col] if label_col is not None else None
        rows = []
        labels = []
        for r, record in enumerate(reader, start=1):
            if len(record) != len(header):
                raise DataError(
                    f"{path}: row {r} has {len(record)} cells, expected "
                    f"{len(header)}"
                )
            rows.append(
                [_parse_cell(record[i], r, header[i]) for i in feat_idx]
            )
            if label_idx is not None:
                labels.append(_parse_cell(record[label_idx], r, label_col))
    if not rows:
        raise DataError(f"{path}: no data rows")
    X = np.asarray(rows, dtype=np.float64)
    if label_col is None:
        return LabeledDataset(X=X, y=None, domain_tag=domain_tag)
    yf = np.asarray(labels, dtype=np.float64)
    if task == "classification":
        if np.any(yf != np.floor(yf)) or np.any(yf < 0):
            raise DataError(
                f"{path}: classification labels must be non-negative integers"
            )
        return LabeledDataset(
            X=X, y=yf.astype(np.int64), domain_tag=domain_tag
        )
    return LabeledDataset(X=X, y=yf.reshape(-1, 1), domain_tag=domain_tag)


def save_csv(ds: LabeledDataset, path, label_col: str = "y") -> None:
    """Write a dataset in the dialect ``load_csv`` reads.

    Floats are written with repr so a round trip reproduces them exactly.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        feature_names = [f"f{i}" for i in range(ds.dim)]
        if ds.y is None:
            writer.writerow(feature_names)
            for row in ds.X:
                writer.writerow([repr(v) for v in row.tolist()])
            return
        if ds.task == "classification":
            writer.writerow(feature_names + [label_col])
            for row, label in zip(ds.X, ds.y):
                writer.writerow([repr(v) for v in row.tolist()] + [int(label)])
            return
        if ds.y.shape[1] != 1:
            raise DataError("CSV export supports single-output regression only")
        writer.writerow(feature_names + [label_col])
        for row, label in zip(ds.X, ds.y[:, 0]):
            writer.writerow([repr(v) for v in row.tolist()] + [repr(float(label))])


def subsample(ds: LabeledDataset, fraction: float, seed: int) -> LabeledDataset:
    """Uniform subsample without replacement, original row order kept.

    The kept count is floor(fraction * N), guarded to at least 1 row.
    """
    if not 0.0 < fraction <= 1.0:
        raise DataError("fraction must lie in (0, 1]")
    k = max(1, int(math.floor(fraction * ds.n)))
    if fraction == 1.0:
        k = ds.n
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(ds.n, size=k, replace=False))
    y = None if ds.y is None else ds.y[idx]
    return LabeledDataset(X=ds.X[idx], y=y, domain_tag=ds.domain_tag)

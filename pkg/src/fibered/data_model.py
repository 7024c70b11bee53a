"""Core data types, CSV/JSON I/O and seeded randomness."""

from __future__ import annotations

import dataclasses
import json
import math
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

GRAM_TOL = 1e-9
SYMMETRY_TOL = 1e-9


class DatasetError(ValueError):
    """Raised when input files violate the dataset invariants."""


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- randomness


def seeded_rng(seed: int, stream: str = "") -> np.random.Generator:
    """Counter-based generator for one named stream of a run.

    Every stochastic subroutine asks for its own stream, so adding or
    reordering subroutines never shifts another subroutine's draws.
    """
    key = (zlib.crc32(stream.encode("utf8")),) if stream else ()
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


# ---------------------------------------------------------------- frames


@dataclass(frozen=True)
class Frame:
    """A rows x cols matrix with orthonormal columns (a point of V(cols, rows))."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2:
            raise ValueError("frame must be a 2-d matrix")
        if a.shape[1] > a.shape[0]:
            raise ValueError(f"frame has more columns than rows: {a.shape}")
        dev = np.abs(a.T @ a - np.eye(a.shape[1])).max(initial=0.0)
        if dev > GRAM_TOL:
            raise ValueError(f"columns not orthonormal (Gram deviation {dev:.3g})")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]


# ---------------------------------------------------------------- dataset


@dataclass(frozen=True)
class Dataset:
    distances: np.ndarray
    base_image: np.ndarray
    points: Optional[np.ndarray] = None
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        d = np.array(self.distances, dtype=float)
        b = np.array(self.base_image, dtype=float)
        if b.ndim == 1:
            b = b[:, None]
        validate_distances(d)
        if b.shape[0] != d.shape[0]:
            raise DatasetError(
                f"base map has {b.shape[0]} rows but the metric has {d.shape[0]} points")
        if not np.all(np.isfinite(b)):
            bad = int(np.argwhere(~np.isfinite(b))[0, 0])
            raise DatasetError(f"base map row {bad} is not finite")
        for arr in (d, b):
            arr.setflags(write=False)
        object.__setattr__(self, "distances", d)
        object.__setattr__(self, "base_image", b)
        if self.points is not None:
            p = np.array(self.points, dtype=float)
            if p.ndim != 2 or p.shape[0] != d.shape[0]:
                raise DatasetError("points and distances disagree on the number of points")
            p.setflags(write=False)
            object.__setattr__(self, "points", p)

    @property
    def n_points(self) -> int:
        return self.distances.shape[0]

    def with_distances(self, distances: np.ndarray) -> "Dataset":
        return dataclasses.replace(self, distances=distances)

    def with_base(self, base_image: np.ndarray) -> "Dataset":
        return dataclasses.replace(self, base_image=base_image)


def validate_distances(d: np.ndarray) -> None:
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise DatasetError(f"distance matrix must be square, got shape {d.shape}")
    if not np.all(np.isfinite(d)):
        row = int(np.argwhere(~np.isfinite(d))[0, 0])
        raise DatasetError(f"distance matrix row {row} has non-finite entries")
    asym = np.abs(d - d.T)
    if asym.size and asym.max() > SYMMETRY_TOL:
        i, j = np.unravel_index(np.argmax(asym), asym.shape)
        raise DatasetError(f"distance matrix is asymmetric at row {i}, column {j}")
    if np.any(np.abs(np.diag(d)) > SYMMETRY_TOL):
        row = int(np.argmax(np.abs(np.diag(d))))
        raise DatasetError(f"distance matrix has a nonzero diagonal at row {row}")
    if np.any(d < 0):
        row = int(np.argwhere(d < 0)[0, 0])
        raise DatasetError(f"distance matrix row {row} has negative entries")


def euclidean_distances(points: np.ndarray) -> np.ndarray:
    sq = np.sum(points**2, axis=1)
    g = sq[:, None] + sq[None, :] - 2.0 * points @ points.T
    np.maximum(g, 0.0, out=g)
    d = np.sqrt(g)
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    return d


def read_matrix_csv(path, name: str = "matrix") -> np.ndarray:
    """Read a comma separated float matrix; a non-numeric first line is a header."""
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            try:
                rows.append([float(x) for x in fields])
            except ValueError:
                if lineno == 1 and not rows:
                    continue
                raise DatasetError(f"{name} CSV row {lineno}: non-numeric entry")
    if not rows:
        raise DatasetError(f"{name} CSV {path} is empty")
    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise DatasetError(
                f"{name} CSV row {i}: expected {width} columns, found {len(r)}")
    return np.array(rows, dtype=float)


def write_matrix_csv(path, matrix: np.ndarray, header: Optional[list] = None) -> None:
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    with open(path, "w") as fh:
        if header:
            fh.write(",".join(header) + "\n")
        for row in matrix:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def load_dataset(points_path=None, distances_path=None, base_path=None) -> Dataset:
    if points_path is None and distances_path is None:
        raise DatasetError("need a points CSV or a distances CSV")
    if base_path is None:
        raise DatasetError("a base-map CSV is required")
    points = read_matrix_csv(points_path, "points") if points_path else None
    if distances_path:
        distances = read_matrix_csv(distances_path, "distances")
    else:
        distances = euclidean_distances(points)
    base = read_matrix_csv(base_path, "base")
    if points is not None and points.shape[0] != distances.shape[0]:
        raise DatasetError(
            f"points CSV has {points.shape[0]} rows, distances CSV has {distances.shape[0]}")
    return Dataset(distances=distances, base_image=base, points=points)


# ---------------------------------------------------------------- config


@dataclass(frozen=True)
class PipelineConfig:
    """Parameters of one fiberwise reduction run.

    ``r`` and ``D`` may be left as None; r then defaults to d - e and D is
    chosen from the first Stiefel-Whitney class (or r + 1 in cut-unfold mode).
    ``reach`` overrides the estimated reach when set.
    """

    k: int = 16
    e: int = 1
    d: int = 2
    r: Optional[int] = None
    D: Optional[int] = None
    fiber_scale: float = 0.5
    n_iter: int = 1000
    seed: int = 0
    normalization_mode: str = "global"
    reach: Optional[float] = None
    cover_start: int = 0
    cut_unfold: bool = False

    def __post_init__(self):
        if not 0.0 < self.fiber_scale < 1.0:
            raise ConfigError("fiber_scale must lie in (0, 1)")
        if self.k < 2:
            raise ConfigError("k must be at least 2")
        if self.e < 1:
            raise ConfigError("e must be at least 1")
        if self.d < self.e:
            raise ConfigError("d must be at least e")
        if self.r is not None and not 0 <= self.r <= self.d:
            raise ConfigError("r must lie in [0, d]")
        if self.n_iter < 1:
            raise ConfigError("n_iter must be positive")
        if self.normalization_mode not in ("global", "per_chart"):
            raise ConfigError("normalization_mode must be 'global' or 'per_chart'")
        if self.reach is not None and not self.reach > 0:
            raise ConfigError("reach override must be positive")

    @property
    def fiber_rank(self) -> int:
        return self.d - self.e if self.r is None else self.r

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "PipelineConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return f"{zlib.crc32(blob):08x}"


# ---------------------------------------------------------------- diagrams


@dataclass(frozen=True)
class PersistenceDiagram:
    """Multiset of (dim, birth, death) triples; death may be math.inf."""

    field_char: int
    classes: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.field_char not in (2, 3):
            raise ValueError("field characteristic must be 2 or 3")
        cls = tuple((int(q), float(b), float(d)) for q, b, d in self.classes)
        for q, b, d in cls:
            if not d > b:
                raise ValueError(f"class ({q}, {b}, {d}) does not die after birth")
        object.__setattr__(self, "classes", tuple(sorted(cls)))

    def in_dim(self, dim: int) -> np.ndarray:
        return np.array([(b, d) for q, b, d in self.classes if q == dim]).reshape(-1, 2)

    def to_json(self) -> list:
        return [
            {"dim": q, "birth": b, "death": d if math.isfinite(d) else None,
             "infinite": not math.isfinite(d)}
            for q, b, d in self.classes
        ]

    @classmethod
    def from_json(cls, field_char: int, items: list) -> "PersistenceDiagram":
        return cls(field_char, tuple(
            (it["dim"], it["birth"], math.inf if it["infinite"] else it["death"])
            for it in items))


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default))


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    raise TypeError(f"not JSON serializable: {type(o)}")

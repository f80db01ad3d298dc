"""Problem data model: candidate regions, demands, budgets, and distances.

Instances are immutable after construction and safe to share across
threads. Distances are computed lazily from positions; an optional
precomputed matrix can be attached for instances up to ``MATRIX_LIMIT``
nodes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

EARTH_RADIUS_KM = 6371.0
MATRIX_LIMIT = 5000

METRICS = ("euclidean", "haversine")


class InstanceError(ValueError):
    """Instance file or construction violates the data contract."""

    def __init__(self, message: str, field_path: str | None = None):
        self.field_path = field_path
        super().__init__(message if field_path is None else f"{field_path}: {message}")


@dataclass(eq=False)
class ProblemInstance:
    """Candidate regions with per-type demands and facility budgets.

    positions[:, 0] is x (longitude degrees under the haversine metric),
    positions[:, 1] is y (latitude degrees under haversine). Node ids are
    the row indices 0..n-1.
    """

    positions: np.ndarray
    metric: str
    demands: dict[str, np.ndarray]
    budgets: dict[str, int]
    _dmat: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        pos = np.ascontiguousarray(np.asarray(self.positions, dtype=np.float64))
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise InstanceError("positions must be an (n, 2) array", "nodes")
        pos.flags.writeable = False
        self.positions = pos
        n = pos.shape[0]
        if n == 0:
            raise InstanceError("instance has no nodes", "nodes")
        if self.metric not in METRICS:
            raise InstanceError(f"unknown metric {self.metric!r}", "metric")
        if set(self.demands) != set(self.budgets):
            raise InstanceError("demand and budget type keys differ", "budgets")
        if not self.budgets:
            raise InstanceError("at least one facility type is required", "budgets")
        clean = {}
        for k, h in self.demands.items():
            arr = np.ascontiguousarray(np.asarray(h, dtype=np.float64))
            if arr.shape != (n,):
                raise InstanceError(
                    f"expected {n} demand values, got {arr.shape[0]}", f"demands.{k}"
                )
            if not np.all(np.isfinite(arr)):
                raise InstanceError("demands must be finite", f"demands.{k}")
            if np.any(arr < 0):
                raise InstanceError("demands must be non-negative", f"demands.{k}")
            arr.flags.writeable = False
            clean[k] = arr
        self.demands = clean
        for k, p in self.budgets.items():
            if int(p) != p or p < 1:
                raise InstanceError("budget must be a positive integer", f"budgets.{k}")
        self.budgets = {k: int(p) for k, p in self.budgets.items()}
        total = sum(self.budgets.values())
        if total > n:
            raise InstanceError(
                f"total budget {total} exceeds node count {n}; "
                "incompatible placements are infeasible",
                "budgets",
            )

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def types(self) -> list[str]:
        return list(self.budgets)

    def __eq__(self, other):
        if not isinstance(other, ProblemInstance):
            return NotImplemented
        return (
            self.metric == other.metric
            and np.array_equal(self.positions, other.positions)
            and self.budgets == other.budgets
            and list(self.demands) == list(other.demands)
            and all(np.array_equal(self.demands[k], other.demands[k]) for k in self.demands)
        )

    # -- distances ---------------------------------------------------------

    def _check_ids(self, *ids: int):
        for i in ids:
            if not 0 <= i < self.n:
                raise InstanceError(f"node id {i} out of range 0..{self.n - 1}")

    def distance(self, i: int, j: int) -> float:
        """Distance between nodes i and j (unit-square lengths or km)."""
        self._check_ids(int(i), int(j))
        if self._dmat is not None:
            return float(self._dmat[i, j])
        return float(self._pairwise(np.array([i]), np.array([j]))[0, 0])

    def dist_to_all(self, j: int) -> np.ndarray:
        """Distances from every node to node j, shape (n,)."""
        self._check_ids(int(j))
        if self._dmat is not None:
            return self._dmat[:, j]
        return self._pairwise(np.arange(self.n), np.array([j]))[:, 0]

    def columns(self, cols: np.ndarray) -> np.ndarray:
        """Distance submatrix from every node to each node in cols, (n, len(cols))."""
        cols = np.asarray(cols, dtype=np.int64)
        if self._dmat is not None:
            return self._dmat[:, cols]
        return self._pairwise(np.arange(self.n), cols)

    def pairwise(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        if self._dmat is not None:
            return self._dmat[np.ix_(rows, cols)]
        return self._pairwise(rows, cols)

    def _pairwise(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        p = self.positions
        if self.metric == "euclidean":
            return np.hypot(
                p[rows, 0][:, None] - p[cols, 0][None, :],
                p[rows, 1][:, None] - p[cols, 1][None, :],
            )
        lon = np.radians(p[:, 0])
        lat = np.radians(p[:, 1])
        dlat = lat[rows][:, None] - lat[cols][None, :]
        dlon = lon[rows][:, None] - lon[cols][None, :]
        a = np.sin(dlat / 2.0) ** 2 + (
            np.cos(lat[rows])[:, None] * np.cos(lat[cols])[None, :]
        ) * np.sin(dlon / 2.0) ** 2
        return 2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))

    def precompute_distances(self):
        """Attach a full n x n distance matrix (n <= MATRIX_LIMIT only)."""
        if self.n > MATRIX_LIMIT:
            raise InstanceError(
                f"precomputed matrix limited to n <= {MATRIX_LIMIT}, got n = {self.n}"
            )
        if self._dmat is None:
            # column-by-column so entries match the lazy path bit for bit
            mat = np.empty((self.n, self.n), dtype=np.float64)
            idx = np.arange(self.n)
            for j in range(self.n):
                mat[:, j] = self._pairwise(idx, np.array([j]))[:, 0]
            mat.flags.writeable = False
            self._dmat = mat
        return self

    def diameter(self) -> float:
        """Maximum pairwise distance, chunked to avoid a full matrix."""
        best = 0.0
        idx = np.arange(self.n)
        for start in range(0, self.n, 512):
            cols = idx[start : start + 512]
            best = max(best, float(self.pairwise(idx, cols).max()))
        return best

    # -- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "metric": self.metric,
            "nodes": [
                {"id": i, "x": float(self.positions[i, 0]), "y": float(self.positions[i, 1])}
                for i in range(self.n)
            ],
            "demands": {k: [float(v) for v in h] for k, h in self.demands.items()},
            "budgets": dict(self.budgets),
        }


def save_instance(instance: ProblemInstance, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(instance.to_json_dict(), f, indent=1)
        f.write("\n")


def load_instance(path) -> ProblemInstance:
    """Load and validate an instance from the JSON schema."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise InstanceError("top-level value must be an object")
    for key in ("metric", "nodes", "demands", "budgets"):
        if key not in raw:
            raise InstanceError("missing required key", key)
    nodes = raw["nodes"]
    if not isinstance(nodes, list) or not nodes:
        raise InstanceError("must be a non-empty array", "nodes")
    n = len(nodes)
    positions = np.zeros((n, 2), dtype=np.float64)
    seen = set()
    for idx, node in enumerate(nodes):
        if not isinstance(node, dict):
            raise InstanceError("node entries must be objects", f"nodes[{idx}]")
        for key in ("id", "x", "y"):
            if key not in node:
                raise InstanceError("missing key", f"nodes[{idx}].{key}")
        nid = node["id"]
        if not isinstance(nid, int) or not 0 <= nid < n:
            raise InstanceError(
                f"ids must be contiguous integers 0..{n - 1}", f"nodes[{idx}].id"
            )
        if nid in seen:
            raise InstanceError(f"duplicate node id {nid}", f"nodes[{idx}].id")
        seen.add(nid)
        positions[nid, 0] = float(node["x"])
        positions[nid, 1] = float(node["y"])
    if not isinstance(raw["demands"], dict) or not isinstance(raw["budgets"], dict):
        raise InstanceError("demands and budgets must be objects", "demands")
    try:
        return ProblemInstance(
            positions=positions,
            metric=raw["metric"],
            demands={str(k): v for k, v in raw["demands"].items()},
            budgets={str(k): v for k, v in raw["budgets"].items()},
        )
    except InstanceError:
        raise
    except (TypeError, ValueError) as exc:
        raise InstanceError(str(exc)) from exc


def generate_synthetic(
    n: int,
    types: Mapping[str, int],
    seed: int,
    demand_model: str = "uniform",
    metric: str = "euclidean",
) -> ProblemInstance:
    """Reproducible synthetic city: uniform positions in the unit square,
    demands drawn per demand_model and normalized so each type sums to n.

    Identical arguments produce a bit-identical instance.
    """
    if demand_model not in ("uniform", "lognormal"):
        raise InstanceError(f"unknown demand model {demand_model!r}", "demand_model")
    total = sum(int(p) for p in types.values())
    if n < total:
        raise InstanceError(
            f"n = {n} is smaller than the total budget {total}", "budgets"
        )
    rng = np.random.default_rng(seed)
    positions = rng.uniform(0.0, 1.0, size=(n, 2))
    demands = {}
    for k in types:
        if demand_model == "uniform":
            h = rng.uniform(0.0, 1.0, size=n)
        else:
            h = rng.lognormal(mean=0.0, sigma=1.0, size=n)
        s = h.sum()
        if s > 0:
            h = h * (n / s)
        demands[k] = h
    return ProblemInstance(
        positions=positions,
        metric=metric,
        demands=demands,
        budgets={k: int(p) for k, p in types.items()},
    )


def line_instance(demands: Iterable[float] = (1.0, 2.0, 3.0, 4.0)) -> ProblemInstance:
    """Tiny collinear fixture used across tests and the bundled demo."""
    h = np.asarray(list(demands), dtype=np.float64)
    n = h.shape[0]
    positions = np.stack([np.arange(n, dtype=np.float64), np.zeros(n)], axis=1)
    return ProblemInstance(
        positions=positions,
        metric="euclidean",
        demands={"a": h},
        budgets={"a": 1},
    )

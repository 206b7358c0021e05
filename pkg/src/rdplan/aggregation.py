"""Hierarchical clustering of days into representative days.

Two agglomeration schemes share the same Ward-type dissimilarity between
cluster centroids:

* :func:`agglomerate` merges the globally closest pair at every step and keeps
  the cluster holding an extreme day pinned to that day's features.
* :func:`ctpc_agglomerate` only merges chronologically adjacent clusters and
  knows nothing about extremes (the chronological time-period baseline).

Ties between equal dissimilarities go to the pair with the smallest
``(lower first-day, higher first-day)`` key.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data_ingest import FEATURES, FeatureDays
from .errors import BadNrd, EmptyCluster

logger = logging.getLogger(__name__)


@dataclass
class Cluster:
    members: list[int]
    centroid: np.ndarray
    pinned_extreme: int | None = None

    def __post_init__(self):
        if not self.members:
            raise EmptyCluster("a cluster needs at least one member day")
        self.members = sorted(self.members)

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def first_day(self) -> int:
        return self.members[0]


@dataclass
class Clustering:
    clusters: list[Cluster]
    merge_log: list[tuple[int, int, float]] = field(default_factory=list)
    method: str = "proposed"

    @property
    def nrd(self) -> int:
        return len(self.clusters)

    def labels(self, n_days: int | None = None) -> np.ndarray:
        n_days = n_days or sum(c.size for c in self.clusters)
        out = np.full(n_days, -1, dtype=int)
        for k, c in enumerate(self.clusters):
            out[c.members] = k
        return out


def centroid(members, features: FeatureDays | np.ndarray) -> np.ndarray:
    """Arithmetic mean of the member days' feature vectors."""
    members = list(members)
    if not members:
        raise EmptyCluster("centroid of an empty member set")
    matrix = features.matrix if isinstance(features, FeatureDays) else np.asarray(features, dtype=float)
    return matrix[sorted(members)].mean(axis=0)


def ward_dissimilarity(a: Cluster, b: Cluster) -> float:
    return ward_from_parts(a.size, a.centroid, b.size, b.centroid)


def ward_from_parts(size_a: int, centroid_a, size_b: int, centroid_b) -> float:
    diff = np.asarray(centroid_a, dtype=float) - np.asarray(centroid_b, dtype=float)
    return float(2.0 * size_a * size_b / (size_a + size_b) * np.dot(diff, diff))


def mark_extreme_days(features: FeatureDays, extra=()) -> list[int]:
    """Day of the maximum hourly raw net-load, then any user-supplied extras.

    ``np.argmax`` on the row-major flattening returns the first maximum, so
    ties resolve to the earliest day.
    """
    flat = int(np.argmax(features.raw_net_load))
    days = [flat // features.raw_net_load.shape[1]]
    for d in extra:
        d = int(d)
        if not 0 <= d < features.n_days:
            raise ValueError(f"extreme day {d} outside 0..{features.n_days - 1}")
        if d not in days:
            days.append(d)
    return days


def _check_nrd(nrd: int, n_days: int) -> None:
    if not isinstance(nrd, (int, np.integer)) or not 1 <= nrd <= n_days:
        raise BadNrd(f"nrd must be an integer in [1, {n_days}], got {nrd!r}")


def _pairwise_ward(centroids: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    diff = centroids[:, None, :] - centroids[None, :, :]
    dist = np.einsum("ijk,ijk->ij", diff, diff)
    factor = 2.0 * sizes[:, None] * sizes[None, :] / (sizes[:, None] + sizes[None, :])
    return factor * dist


def _row_ward(k: int, centroids: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    diff = centroids - centroids[k]
    dist = np.einsum("ij,ij->i", diff, diff)
    return 2.0 * sizes[k] * sizes / (sizes[k] + sizes) * dist


def agglomerate(
    features: FeatureDays,
    nrd: int,
    extremes=(),
    *,
    conflict: str = "earliest",
    seed: int | None = None,
) -> Clustering:
    """Merge days until ``nrd`` clusters remain.

    A cluster containing an extreme day keeps that day's features as its
    centroid. When two pinned clusters merge, ``conflict="earliest"`` keeps
    the earlier extreme day; ``conflict="random"`` picks one with ``seed``.
    """
    matrix = features.matrix
    n = matrix.shape[0]
    _check_nrd(nrd, n)
    extremes = [int(e) for e in extremes]
    if len(set(extremes)) != len(extremes):
        raise ValueError("extreme days must be distinct")
    if conflict not in ("earliest", "random"):
        raise ValueError(f"unknown conflict rule {conflict!r}")
    rng = np.random.default_rng(seed)

    # clusters are kept sorted by first member day so that np.argmin over the
    # row-major upper triangle realizes the lexicographic tie rule
    members: list[list[int]] = [[d] for d in range(n)]
    pins: list[int | None] = [d if d in extremes else None for d in range(n)]
    centroids = matrix.astype(float).copy()
    sizes = np.ones(n)
    dmat = _pairwise_ward(centroids, sizes)
    np.fill_diagonal(dmat, np.inf)
    dmat[np.tril_indices(n, -1)] = np.inf
    merge_log: list[tuple[int, int, float]] = []

    while len(members) > nrd:
        flat = int(np.argmin(dmat))
        i, j = divmod(flat, dmat.shape[1])
        dval = float(dmat[i, j])
        merge_log.append((members[i][0], members[j][0], dval))

        pin_i, pin_j = pins[i], pins[j]
        if pin_i is not None and pin_j is not None:
            if conflict == "earliest":
                pin = min(pin_i, pin_j)
            else:
                pin = int(rng.choice([pin_i, pin_j]))
            logger.warning("clusters pinned to extreme days %d and %d merged; keeping %d", pin_i, pin_j, pin)
        else:
            pin = pin_i if pin_i is not None else pin_j

        merged = sorted(members[i] + members[j])
        members[i] = merged
        pins[i] = pin
        del members[j], pins[j]
        centroids = np.delete(centroids, j, axis=0)
        sizes = np.delete(sizes, j)
        dmat = np.delete(np.delete(dmat, j, axis=0), j, axis=1)

        sizes[i] = len(merged)
        centroids[i] = matrix[pin] if pin is not None else matrix[merged].mean(axis=0)
        row = _row_ward(i, centroids, sizes)
        dmat[i, i + 1 :] = row[i + 1 :]
        dmat[:i, i] = row[:i]

    clusters = [
        Cluster(members=m, centroid=centroids[k].copy(), pinned_extreme=pins[k]) for k, m in enumerate(members)
    ]
    return Clustering(clusters=clusters, merge_log=merge_log, method="proposed")


def ctpc_agglomerate(features: FeatureDays, nrd: int) -> Clustering:
    """Chronological clustering: only neighbouring day ranges may merge."""
    matrix = features.matrix
    n = matrix.shape[0]
    _check_nrd(nrd, n)
    members: list[list[int]] = [[d] for d in range(n)]
    centroids = matrix.astype(float).copy()
    sizes = np.ones(n)
    diff = centroids[1:] - centroids[:-1]
    adjacent = 2.0 * sizes[1:] * sizes[:-1] / (sizes[1:] + sizes[:-1]) * np.einsum("ij,ij->i", diff, diff)
    merge_log: list[tuple[int, int, float]] = []

    while len(members) > nrd:
        i = int(np.argmin(adjacent))
        merge_log.append((members[i][0], members[i + 1][0], float(adjacent[i])))
        members[i] = members[i] + members[i + 1]
        del members[i + 1]
        centroids = np.delete(centroids, i + 1, axis=0)
        sizes = np.delete(sizes, i + 1)
        adjacent = np.delete(adjacent, i)
        sizes[i] = len(members[i])
        centroids[i] = matrix[members[i]].mean(axis=0)
        if i > 0:
            adjacent[i - 1] = ward_from_parts(sizes[i - 1], centroids[i - 1], sizes[i], centroids[i])
        if i < len(adjacent):
            adjacent[i] = ward_from_parts(sizes[i], centroids[i], sizes[i + 1], centroids[i + 1])

    clusters = [Cluster(members=m, centroid=centroids[k].copy()) for k, m in enumerate(members)]
    return Clustering(clusters=clusters, merge_log=merge_log, method="ctpc")


@dataclass
class RepresentativeDaySet:
    """Representative-day profiles ready for the planning model.

    ``lf`` is load per-unit of the annual peak, ``wf`` the wind capacity
    factor; both are ``nrd x hours``. ``weights`` counts cluster member days.
    """

    lf: np.ndarray
    wf: np.ndarray
    weights: np.ndarray
    centroids: np.ndarray
    extreme: np.ndarray
    norms: dict[str, tuple[float, float]] = field(default_factory=dict)
    members: list[list[int]] | None = None
    method: str = "proposed"

    def __post_init__(self):
        self.lf = np.atleast_2d(np.asarray(self.lf, dtype=float))
        self.wf = np.atleast_2d(np.asarray(self.wf, dtype=float))
        self.weights = np.asarray(self.weights, dtype=float)
        self.centroids = np.atleast_2d(np.asarray(self.centroids, dtype=float))
        self.extreme = np.asarray(self.extreme, dtype=bool)

    @property
    def nrd(self) -> int:
        return self.lf.shape[0]

    @property
    def hours(self) -> int:
        return self.lf.shape[1]

    def to_json(self) -> dict:
        rds = []
        for k in range(self.nrd):
            rd = {
                "lf": self.lf[k].tolist(),
                "wf": self.wf[k].tolist(),
                "weight": float(self.weights[k]),
                "extreme": bool(self.extreme[k]),
                "centroid": self.centroids[k].tolist(),
            }
            if self.members is not None:
                rd["members"] = list(map(int, self.members[k]))
            rds.append(rd)
        return {
            "method": self.method,
            "rds": rds,
            "norms": {name: list(self.norms[name]) for name in self.norms},
        }

    @classmethod
    def from_json(cls, data: dict) -> RepresentativeDaySet:
        rds = data["rds"]
        members = [rd["members"] for rd in rds] if all("members" in rd for rd in rds) else None
        return cls(
            lf=[rd["lf"] for rd in rds],
            wf=[rd["wf"] for rd in rds],
            weights=[rd["weight"] for rd in rds],
            centroids=[rd["centroid"] for rd in rds],
            extreme=[rd["extreme"] for rd in rds],
            norms={k: tuple(v) for k, v in data.get("norms", {}).items()},
            members=members,
            method=data.get("method", "proposed"),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n")

    @classmethod
    def load(cls, path) -> RepresentativeDaySet:
        return cls.from_json(json.loads(Path(path).read_text()))


def extract_representatives(clustering: Clustering, features: FeatureDays) -> RepresentativeDaySet:
    """Turn final clusters into physical 24-hour load and wind profiles.

    Pinned clusters take the extreme day's raw profiles when they are
    available, so the representative reproduces that day exactly.
    """
    lf, wf, cents, extreme = [], [], [], []
    for c in clustering.clusters:
        prof = features.denormalize(c.centroid)
        load, wind = prof["load"], prof["wind"]
        if c.pinned_extreme is not None and features.raw_load_pu is not None:
            load = features.raw_load_pu[c.pinned_extreme].copy()
            wind = features.raw_wind[c.pinned_extreme].copy()
        lf.append(load)
        wf.append(np.clip(wind, 0.0, 1.0))
        cents.append(c.centroid)
        extreme.append(c.pinned_extreme is not None)
    return RepresentativeDaySet(
        lf=np.array(lf),
        wf=np.array(wf),
        weights=np.array([c.size for c in clustering.clusters], dtype=float),
        centroids=np.array(cents),
        extreme=np.array(extreme),
        norms={name: tuple(features.norms[name]) for name in FEATURES},
        members=[list(c.members) for c in clustering.clusters],
        method=clustering.method,
    )


def representative_days(
    features: FeatureDays,
    nrd: int,
    method: str = "proposed",
    extra_extremes=(),
    conflict: str = "earliest",
    seed: int | None = None,
) -> RepresentativeDaySet:
    """Convenience wrapper: extremes, clustering and profile extraction."""
    if method == "proposed":
        extremes = mark_extreme_days(features, extra_extremes)
        clustering = agglomerate(features, nrd, extremes, conflict=conflict, seed=seed)
    elif method == "ctpc":
        clustering = ctpc_agglomerate(features, nrd)
    else:
        raise ValueError(f"unknown aggregation method {method!r}")
    return extract_representatives(clustering, features)

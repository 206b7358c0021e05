"""Map real days onto representative days and chain them into linked blocks."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .aggregation import RepresentativeDaySet
from .data_ingest import FeatureDays
from .errors import DimensionMismatch

logger = logging.getLogger(__name__)


def map_days(features: FeatureDays | np.ndarray, reps: RepresentativeDaySet | np.ndarray) -> np.ndarray:
    """Index of the closest representative centroid for every real day.

    Squared Euclidean distance in the normalized feature space; ties go to
    the lowest representative index.
    """
    matrix = features.matrix if isinstance(features, FeatureDays) else np.asarray(features, dtype=float)
    cents = reps.centroids if isinstance(reps, RepresentativeDaySet) else np.atleast_2d(np.asarray(reps, float))
    if matrix.ndim != 2 or cents.shape[1] != matrix.shape[1]:
        raise DimensionMismatch(f"day features {matrix.shape} vs representative centroids {cents.shape}")
    diff = matrix[:, None, :] - cents[None, :, :]
    dist = np.einsum("dkf,dkf->dk", diff, diff)
    assignment = np.argmin(dist, axis=1)
    unused = sorted(set(range(cents.shape[0])) - set(assignment.tolist()))
    if unused:
        logger.warning("representative days %s have no mapped real day", unused)
    return assignment


@dataclass
class SldPlan:
    """Chronological blocks of consecutive days mapped to the same RD.

    ``blocks`` rows are ``(start_day, end_day_inclusive, rd)``.
    """

    blocks: np.ndarray
    nrd: int

    def __post_init__(self):
        self.blocks = np.asarray(self.blocks, dtype=int).reshape(-1, 3)

    @property
    def n_sld(self) -> int:
        return self.blocks.shape[0]

    @property
    def weights(self) -> np.ndarray:
        return (self.blocks[:, 1] - self.blocks[:, 0] + 1).astype(float)

    @property
    def rd_of_block(self) -> np.ndarray:
        return self.blocks[:, 2]

    @property
    def mp(self) -> np.ndarray:
        mp = np.zeros((self.n_sld, self.nrd), dtype=int)
        mp[np.arange(self.n_sld), self.rd_of_block] = 1
        return mp

    def expand(self) -> np.ndarray:
        """Day-by-day RD assignment (inverse of :func:`build_slds`)."""
        return np.repeat(self.rd_of_block, self.weights.astype(int))

    def to_json(self) -> dict:
        return {
            "nrd": int(self.nrd),
            "blocks": self.blocks.tolist(),
            "mp": self.mp.tolist(),
            "weights": self.weights.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> SldPlan:
        nrd = data.get("nrd")
        if nrd is None:
            nrd = len(data["mp"][0]) if data.get("mp") else max(b[2] for b in data["blocks"]) + 1
        return cls(blocks=data["blocks"], nrd=nrd)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json()) + "\n")

    @classmethod
    def load(cls, path) -> SldPlan:
        return cls.from_json(json.loads(Path(path).read_text()))


def build_slds(assignment, nrd: int | None = None) -> SldPlan:
    """Run-length encode a day -> RD assignment into SLD blocks."""
    a = np.asarray(assignment, dtype=int)
    if a.ndim != 1 or a.size == 0:
        raise DimensionMismatch("assignment must be a non-empty 1-D sequence")
    if a.min() < 0:
        raise DimensionMismatch("negative representative index in assignment")
    nrd = int(a.max()) + 1 if nrd is None else int(nrd)
    if a.max() >= nrd:
        raise DimensionMismatch(f"assignment references rd {a.max()} but nrd={nrd}")
    starts = np.flatnonzero(np.r_[True, a[1:] != a[:-1]])
    ends = np.r_[starts[1:] - 1, a.size - 1]
    return SldPlan(blocks=np.column_stack([starts, ends, a[starts]]), nrd=nrd)


def identity_plan(n_days: int) -> SldPlan:
    days = np.arange(n_days)
    return SldPlan(blocks=np.column_stack([days, days, days]), nrd=n_days)


def weight_report(reps: RepresentativeDaySet, plan: SldPlan) -> dict:
    """Compare cluster weights with the day counts implied by the SLD mapping.

    Reassignment of days to their closest centroid can move days between
    representatives, so the two weightings need not agree.
    """
    implied = plan.weights @ plan.mp
    delta = implied - reps.weights
    return {
        "cluster_weights": reps.weights.tolist(),
        "mapped_days": implied.tolist(),
        "max_abs_difference": float(np.max(np.abs(delta))) if delta.size else 0.0,
        "unmapped_rds": [int(k) for k in np.flatnonzero(implied == 0)],
    }

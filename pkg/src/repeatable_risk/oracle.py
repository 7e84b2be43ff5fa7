"""Ground-truth risk by exhaustive enumeration or exact summation."""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .distributions import Categorical, Distribution, distribution_to_config
from .errors import DimensionError


@dataclass(frozen=True)
class GroundTruth:
    r_star: float
    resolution: float
    points_evaluated: int
    failure_set: np.ndarray  # uint8 per grid cell
    lower: float = 0.0

    @property
    def centers(self) -> np.ndarray:
        return self.lower + (np.arange(self.points_evaluated) + 0.5) * self.resolution

    def to_json(self) -> dict:
        return {"r_star": self.r_star, "resolution": self.resolution,
                "points_evaluated": self.points_evaluated, "lower": self.lower,
                "failure_set": "".join(map(str, self.failure_set.tolist()))}

    @classmethod
    def from_json(cls, d: dict) -> "GroundTruth":
        bits = np.frombuffer(d["failure_set"].encode(), dtype=np.uint8) - ord("0")
        return cls(d["r_star"], d["resolution"], d["points_evaluated"], bits.astype(np.uint8),
                   d.get("lower", 0.0))


def enumerate_risk(subject, p: Distribution, resolution: float, support=None) -> GroundTruth:
    """Evaluate the subject at every cell center of p's support.

    Cell masses are density * width, renormalized to sum to one.
    """
    lower, upper = support if support is not None else p.support
    length = upper - lower
    if not resolution > 0 or resolution > length:
        raise ValueError("resolution must be positive and no larger than the support")
    cells = int(round(length / resolution))
    if abs(cells * resolution - length) > resolution:
        raise ValueError("resolution does not divide the support")
    centers = lower + (np.arange(cells) + 0.5) * resolution
    mass = p.pdf(centers) * resolution
    mass = mass / mass.sum()
    phi = np.asarray(subject.failures(centers), dtype=np.uint8)
    # fixed summation order keeps r_star bit-stable
    r_star = math.fsum((mass * phi).tolist())
    return GroundTruth(min(1.0, r_star), resolution, cells, phi, lower)


def exact_risk_categorical(subject, p: Categorical) -> float:
    labels = np.asarray(subject.labels, dtype=float)
    if labels.size != len(p.probabilities):
        raise DimensionError("failure labels and probabilities differ in length")
    return math.fsum((labels * p.probs).tolist())


def cached_enumerate_risk(subject, p: Distribution, resolution: float,
                          cache_dir: str | None = None) -> GroundTruth:
    """enumerate_risk with an on-disk JSON cache keyed by subject hash and resolution."""
    if cache_dir is None:
        return enumerate_risk(subject, p, resolution)
    name = getattr(subject, "name", "subject")
    p_key = hashlib.sha256(json.dumps(distribution_to_config(p), sort_keys=True).encode())
    path = os.path.join(cache_dir,
                        f"truth_{name}_{subject.key()}_{p_key.hexdigest()[:12]}_{resolution!r}.json")
    if os.path.exists(path):
        with open(path) as fh:
            return GroundTruth.from_json(json.load(fh))
    truth = enumerate_risk(subject, p, resolution)
    os.makedirs(cache_dir, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(truth.to_json(), fh)
    return truth

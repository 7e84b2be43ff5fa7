"""One-dimensional probability laws over the test sample space.

All continuous integrals (normalizers, KL divergence, log-ratio tail masses)
use composite Simpson on a fixed uniform grid so that every derived quantity
is a deterministic function of the distribution parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import AbsoluteContinuityError, ConfigError, DimensionError

DEFAULT_PANELS = 2**17


def simpson_weights(lower: float, upper: float, panels: int = DEFAULT_PANELS):
    """Nodes and composite-Simpson weights for ``panels`` (even) sub-intervals."""
    if panels < 2 or panels % 2:
        raise ValueError("Simpson needs an even number of panels >= 2")
    nodes = np.linspace(lower, upper, panels + 1)
    h = (upper - lower) / panels
    w = np.full(panels + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return nodes, w * (h / 3.0)


def _as_points(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise DimensionError(f"expected 1-D sample points, got shape {arr.shape}")
        arr = arr[:, 0]
    elif arr.ndim > 2:
        raise DimensionError(f"expected 1-D sample points, got shape {arr.shape}")
    return arr


class Distribution:
    discrete = False
    lower: float
    upper: float

    @property
    def support(self) -> tuple[float, float]:
        return (self.lower, self.upper)

    def pdf(self, x) -> np.ndarray:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class Uniform1D(Distribution):
    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError("Uniform1D needs lower < upper")

    def pdf(self, x):
        x = _as_points(x)
        inside = (x >= self.lower) & (x <= self.upper)
        return np.where(inside, 1.0 / (self.upper - self.lower), 0.0)

    def sample(self, rng, size):
        return self.lower + (self.upper - self.lower) * rng.random(size)


@dataclass(frozen=True)
class TruncatedNormal1D(Distribution):
    mean: float
    std: float
    lower: float
    upper: float
    normalizer: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.std > 0:
            raise ValueError("TruncatedNormal1D needs std > 0")
        if not self.lower < self.upper:
            raise ValueError("TruncatedNormal1D needs lower < upper")
        nodes, w = simpson_weights(self.lower, self.upper)
        object.__setattr__(self, "normalizer", float(w @ self._gauss(nodes)))

    def _gauss(self, x):
        z = (x - self.mean) / self.std
        return np.exp(-0.5 * z * z) / (self.std * math.sqrt(2.0 * math.pi))

    def pdf(self, x):
        x = _as_points(x)
        inside = (x >= self.lower) & (x <= self.upper)
        return np.where(inside, self._gauss(x) / self.normalizer, 0.0)

    def sample(self, rng, size):
        # inverse-CDF on the truncated range
        lo = special.ndtr((self.lower - self.mean) / self.std)
        hi = special.ndtr((self.upper - self.mean) / self.std)
        u = lo + (hi - lo) * rng.random(size)
        x = self.mean + self.std * special.ndtri(u)
        return np.clip(x, self.lower, self.upper)


@dataclass(frozen=True)
class Mixture1D(Distribution):
    """Finite mixture of continuous 1-D components."""

    weights: tuple[float, ...]
    components: tuple[Distribution, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(w) != len(self.components) or len(w) == 0:
            raise ValueError("weights and components must have equal, non-zero length")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("mixture weights must be non-negative and sum to 1")
        if any(c.discrete for c in self.components):
            raise ValueError("mixture components must be continuous")

    @property
    def lower(self):
        return min(c.lower for c in self.components)

    @property
    def upper(self):
        return max(c.upper for c in self.components)

    def pdf(self, x):
        x = _as_points(x)
        out = np.zeros_like(x, dtype=float)
        for w, c in zip(self.weights, self.components):
            out += w * c.pdf(x)
        return out

    def sample(self, rng, size):
        which = np.searchsorted(np.cumsum(self.weights), rng.random(size), side="right")
        which = np.minimum(which, len(self.components) - 1)
        out = np.empty(size, dtype=float)
        for j, c in enumerate(self.components):
            idx = np.flatnonzero(which == j)
            if idx.size:
                out[idx] = c.sample(rng, idx.size)
        return out


@dataclass(frozen=True)
class Categorical(Distribution):
    probabilities: tuple[float, ...]
    discrete = True

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("Categorical needs a non-empty probability vector")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("Categorical probabilities must be non-negative and sum to 1")
        object.__setattr__(self, "probabilities", tuple(float(v) for v in p))

    @property
    def lower(self):
        return 0.0

    @property
    def upper(self):
        return float(len(self.probabilities) - 1)

    @property
    def probs(self) -> np.ndarray:
        return np.asarray(self.probabilities)

    def pdf(self, x):
        x = _as_points(x)
        k = np.rint(x)
        valid = (k == x) & (k >= 0) & (k < len(self.probabilities))
        out = np.zeros_like(x, dtype=float)
        out[valid] = self.probs[k[valid].astype(np.int64)]
        return out

    def sample(self, rng, size):
        idx = np.searchsorted(np.cumsum(self.probs), rng.random(size), side="right")
        return np.minimum(idx, len(self.probabilities) - 1).astype(float)


def density(d: Distribution, x) -> np.ndarray | float:
    """Density (or mass, for categorical laws) of ``d`` at ``x``."""
    out = d.pdf(x)
    return float(out) if np.ndim(x) == 0 else out


def draw(d: Distribution, rng: np.random.Generator, size: int | None = None):
    """Draw from ``d``; a scalar when ``size`` is None."""
    if size is None:
        return float(d.sample(rng, 1)[0])
    return d.sample(rng, size)


def _check_pair(p: Distribution, q: Distribution):
    if p.discrete != q.discrete:
        raise DimensionError("cannot compare a discrete law with a continuous one")


class LogRatioProfile:
    """Cells of p's support with their p-mass and log(p/q) value.

    The same cell partition backs ``tail_prob_log_ratio`` and the budget
    planner, so both see identical tail masses.
    """

    def __init__(self, p: Distribution, q: Distribution, panels: int = DEFAULT_PANELS):
        _check_pair(p, q)
        if p.discrete:
            mass = p.probs
            pts = np.arange(len(mass), dtype=float)
        else:
            edges = np.linspace(p.lower, p.upper, panels + 1)
            pts = 0.5 * (edges[:-1] + edges[1:])
            h = (p.upper - p.lower) / panels
            pe = p.pdf(edges)
            mass = (h / 6.0) * (pe[:-1] + 4.0 * p.pdf(pts) + pe[1:])
        pp = p.pdf(pts)
        qq = q.pdf(pts)
        keep = pp > 0
        if np.any(qq[keep] <= 0):
            raise AbsoluteContinuityError("q has zero density where p is positive")
        lr = np.log(pp[keep]) - np.log(qq[keep])
        order = np.argsort(lr, kind="stable")
        self.log_ratio = lr[order]
        # suffix[i] = mass of cells i.. in sorted order
        m = mass[keep][order]
        self._suffix = np.concatenate([np.cumsum(m[::-1])[::-1], [0.0]])

    def tail(self, threshold: float) -> float:
        """p-mass of {x : log p(x)/q(x) > threshold}."""
        i = np.searchsorted(self.log_ratio, threshold, side="right")
        return float(min(1.0, max(0.0, self._suffix[i])))


def kl_divergence(p: Distribution, q: Distribution, panels: int = DEFAULT_PANELS) -> float:
    """D(p || q) by exact summation (categorical) or composite Simpson (continuous)."""
    _check_pair(p, q)
    if p.discrete:
        pp, qq = p.probs, q.probs
        if len(pp) != len(qq):
            raise DimensionError("categorical laws over different supports")
        keep = pp > 0
        if np.any(qq[keep] <= 0):
            raise AbsoluteContinuityError("q has zero mass where p is positive")
        return max(0.0, float(np.sum(pp[keep] * (np.log(pp[keep]) - np.log(qq[keep])))))
    nodes, w = simpson_weights(p.lower, p.upper, panels)
    pp = p.pdf(nodes)
    qq = q.pdf(nodes)
    keep = pp > 0
    if np.any(qq[keep] <= 0):
        raise AbsoluteContinuityError("q has zero density where p is positive")
    f = np.zeros_like(pp)
    f[keep] = pp[keep] * (np.log(pp[keep]) - np.log(qq[keep]))
    return max(0.0, float(w @ f))


def tail_prob_log_ratio(p: Distribution, q: Distribution, threshold: float,
                        panels: int = DEFAULT_PANELS) -> float:
    """P_{x~p}(log p(x)/q(x) > threshold)."""
    return LogRatioProfile(p, q, panels).tail(threshold)


# Importance presets for the pendulum bench. Not taken from any published
# configuration; they are two reasonable tail-biased choices.
PRESETS = {
    "pendulum_nominal": lambda: TruncatedNormal1D(0.0, 0.5, -0.9, 0.9),
    "pendulum_q1": lambda: Uniform1D(-0.9, 0.9),
    "pendulum_q2": lambda: Mixture1D(
        (0.5, 0.5),
        (TruncatedNormal1D(-0.7, 0.15, -0.9, 0.9), TruncatedNormal1D(0.7, 0.15, -0.9, 0.9)),
    ),
}


def distribution_from_config(cfg: dict) -> Distribution:
    """Build a distribution from a config block.

    Accepted forms::

        {"preset": "pendulum_q1"}
        {"kind": "uniform", "lower": -0.9, "upper": 0.9}
        {"kind": "truncated_normal", "mean": 0, "std": 0.5, "lower": -0.9, "upper": 0.9}
        {"kind": "categorical", "probabilities": [0.5, 0.5]}
        {"kind": "mixture", "weights": [...], "components": [<block>, ...]}
    """
    if not isinstance(cfg, dict):
        raise ConfigError(f"distribution block must be a mapping, got {cfg!r}")
    try:
        if "preset" in cfg:
            return PRESETS[cfg["preset"]]()
        kind = cfg["kind"]
        if kind == "uniform":
            return Uniform1D(float(cfg["lower"]), float(cfg["upper"]))
        if kind == "truncated_normal":
            return TruncatedNormal1D(float(cfg["mean"]), float(cfg["std"]),
                                     float(cfg["lower"]), float(cfg["upper"]))
        if kind == "categorical":
            return Categorical(tuple(cfg["probabilities"]))
        if kind == "mixture":
            comps = tuple(distribution_from_config(c) for c in cfg["components"])
            return Mixture1D(tuple(float(w) for w in cfg["weights"]), comps)
    except KeyError as exc:
        raise ConfigError(f"distribution block missing {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown distribution kind {cfg.get('kind')!r}")


def distribution_to_config(d: Distribution) -> dict:
    if isinstance(d, Uniform1D):
        return {"kind": "uniform", "lower": d.lower, "upper": d.upper}
    if isinstance(d, TruncatedNormal1D):
        return {"kind": "truncated_normal", "mean": d.mean, "std": d.std,
                "lower": d.lower, "upper": d.upper}
    if isinstance(d, Categorical):
        return {"kind": "categorical", "probabilities": list(d.probabilities)}
    if isinstance(d, Mixture1D):
        return {"kind": "mixture", "weights": list(d.weights),
                "components": [distribution_to_config(c) for c in d.components]}
    raise TypeError(f"cannot serialize {type(d).__name__}")

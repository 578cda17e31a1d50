"""Concrete families: noisy-cube dictators, categorical indicators, and a
finite stand-in for the uniform-on-[0,1] finite-support class.

Coordinates and hypothesis ids are 0-based throughout.  The categorical
rate of coordinate ``j`` is ``1 / log2(j + 256)``, i.e. the 1-based rate
``1 / log2(i + 255)`` with ``i = j + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import (
    CategoricalFamily,
    ConstantHypothesis,
    CoordinateHypothesis,
    DimensionError,
    Distribution,
    Hypothesis,
    HypothesisClass,
    LabeledSample,
    NoisyCube,
    UniformDomain,
    UnlabeledSample,
    dictator_class,
    indicator_class,
)


def categorical_rates(n: int) -> tuple[float, ...]:
    """``eps_j = 1 / log2(j + 256)`` for 0-based ``j < n``; the first rate is 1/8."""
    return tuple(1.0 / math.log2(j + 256) for j in range(n))


@dataclass(frozen=True)
class NoisyCubeInstance:
    """Dictators on ``{0,1}^n`` under the family ``{D_x^rho}``."""

    n: int
    rho: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be at least 1")
        if not 0 <= self.rho < 0.5:
            raise ValueError("rho must lie in [0, 1/2)")

    @cached_property
    def hypotheses(self) -> HypothesisClass:
        return dictator_class(self.n)

    def distribution(self, center) -> NoisyCube:
        center = np.asarray(center, dtype=np.uint8)
        if center.size != self.n:
            raise DimensionError(f"center must have {self.n} bits")
        return NoisyCube(center, self.rho)

    def family(self) -> list[NoisyCube]:
        """Every member ``D_x^rho``, centers in lexicographic order (small n only)."""
        if self.n > 16:
            raise ValueError("refusing to enumerate more than 2^16 centers")
        bits = (np.arange(1 << self.n)[:, None] >> np.arange(self.n)[::-1]) & 1
        return [NoisyCube(row.astype(np.uint8), self.rho) for row in bits]


def cube_distance_closed_form(center, rho: float, i: int, j: int) -> float:
    """Distance between dictators ``i`` and ``j`` under ``D_x^rho``."""
    if i == j:
        raise ValueError("closed form needs two distinct dictators")
    if not 0 <= rho < 0.5:
        raise ValueError("rho must lie in [0, 1/2)")
    agree = 2 * rho * (1 - rho)
    return agree if center[i] == center[j] else 1 - agree


@dataclass(frozen=True)
class CategoricalInstance:
    """Indicators ``f_j = [x_j = 0]`` under the family ``{D_i}`` truncated to ``n`` coordinates."""

    n: int
    eps: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("truncation must be at least 1")
        eps = categorical_rates(self.n) if self.eps is None else tuple(self.eps)
        if len(eps) != self.n:
            raise DimensionError("need one rate per coordinate")
        object.__setattr__(self, "eps", eps)

    @cached_property
    def hypotheses(self) -> HypothesisClass:
        return indicator_class(self.n)

    @cached_property
    def rates(self) -> np.ndarray:
        return np.asarray(self.eps)

    def distribution(self, special: int) -> CategoricalFamily:
        return CategoricalFamily(special, self.eps)

    def family(self) -> list[CategoricalFamily]:
        return [self.distribution(i) for i in range(self.n)]

    def means(self, special: int) -> np.ndarray:
        """``E_{D_special}[f_j]`` for every ``j``."""
        out = self.rates.copy()
        out[special] = 0.5
        return out

    @cached_property
    def rate_distances(self) -> np.ndarray:
        """``eps_j (1 - eps_k) + eps_k (1 - eps_j)`` for every pair (read-only)."""
        e = self.rates
        out = e[:, None] * (1 - e[None, :]) + e[None, :] * (1 - e[:, None])
        out.setflags(write=False)
        return out

    def distance_matrix(self, special: int) -> np.ndarray:
        """All pairwise closed-form distances under ``D_special`` (zero diagonal)."""
        out = self.rate_distances.copy()
        out[special, :] = 0.5
        out[:, special] = 0.5
        np.fill_diagonal(out, 0.0)
        return out


def categorical_distance_closed_form(inst: CategoricalInstance, special: int, j: int, k: int) -> float:
    """``d_{D_special}(f_j, f_k)``: 1/2 if the special index is involved, else
    ``eps_j (1 - eps_k) + eps_k (1 - eps_j)``."""
    if j == k:
        raise ValueError("closed form needs two distinct indicators")
    for idx in (special, j, k):
        if not 0 <= idx < inst.n:
            raise DimensionError(f"index {idx} outside truncation {inst.n}")
    if special in (j, k):
        return 0.5
    ej, ek = inst.eps[j], inst.eps[k]
    return ej * (1 - ek) + ek * (1 - ej)


@dataclass(frozen=True)
class BenedekItaiInstance:
    """Uniform distribution on ``[N]`` with indicators of subsets of size <= ``k``
    plus the all-ones function.

    The class is far too large to enumerate; hypotheses are built on demand.
    """

    N: int
    k: int | None = None

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("domain size must be at least 1")
        k = self.N if self.k is None else self.k
        if not 0 <= k <= self.N:
            raise ValueError("support bound must lie in [0, N]")
        object.__setattr__(self, "k", k)

    @cached_property
    def distribution(self) -> UniformDomain:
        return UniformDomain(self.N)

    @property
    def all_ones(self) -> ConstantHypothesis:
        return ConstantHypothesis(0, 1)

    def subset_indicator(self, members, id: int = 1) -> CoordinateHypothesis:
        members = frozenset(int(v) for v in members)
        if len(members) > self.k:
            raise ValueError(f"support of size {len(members)} exceeds bound {self.k}")
        if any(not 0 <= v < self.N for v in members):
            raise DimensionError("subset element outside the domain")
        return CoordinateHypothesis(id, 0, members)

    def uc_witness(self, sample: LabeledSample) -> CoordinateHypothesis:
        """Indicator of the sampled points: consistent with an all-ones sample,
        yet far from all-ones under the uniform distribution."""
        return self.subset_indicator(np.unique(sample.points.columns((0,))))


# ---------------------------------------------------------------------------
# Sampling


def sample(dist: Distribution, m: int, rng: np.random.Generator, coords=None) -> UnlabeledSample:
    """Draw ``m`` i.i.d. points; ``coords`` restricts to a subset of coordinates."""
    if m < 1:
        raise ValueError("sample size must be at least 1")
    return dist.sample(m, rng, coords)


def label(points: UnlabeledSample, h: Hypothesis) -> LabeledSample:
    if any(not 0 <= c < points.dim for c in h.coords):
        raise DimensionError(f"hypothesis {h.id} reads outside dimension {points.dim}")
    return LabeledSample(points, h(points))


@dataclass
class ExampleOracle:
    """Example source for one adversary choice ``(D, h)``; owns the trial's stream."""

    distribution: Distribution
    target: Hypothesis
    rng: np.random.Generator

    def unlabeled(self, m: int, coords=None) -> UnlabeledSample:
        return sample(self.distribution, m, self.rng, coords)

    def labeled(self, m: int, coords=None) -> LabeledSample:
        return label(self.unlabeled(m, coords), self.target)

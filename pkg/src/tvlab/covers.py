"""Epsilon-covers, covering maps and metric-entropy profiles for finite classes."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .classes import CategoricalInstance
from .core import EXACT_TOL, Distribution, HypothesisClass, distance_matrix

EXHAUSTIVE_MAX_CLASS = 20


@dataclass(frozen=True)
class CoverMapPair:
    """Cover ``C`` (hypothesis ids) with a covering map ``id -> representative id``.

    ``mapping`` is defined on every covered id; ``radius`` is the target
    guarantee ``d(h, c(h)) <= radius``.
    """

    cover: tuple[int, ...]
    mapping: dict
    radius: float

    def __len__(self) -> int:
        return len(self.cover)

    def __call__(self, idx: int) -> int:
        return self.mapping[idx]

    def max_radius(self, distances: np.ndarray) -> float:
        """Largest ``d(h, c(h))`` according to a distance matrix."""
        return max((float(distances[h, c]) for h, c in self.mapping.items()), default=0.0)

    def is_valid(self, distances: np.ndarray, tol: float = EXACT_TOL) -> bool:
        return (
            set(self.mapping.values()) <= set(self.cover)
            and all(self.mapping[c] == c for c in self.cover)
            and self.max_radius(distances) <= self.radius + tol
        )


@dataclass(frozen=True)
class EntropyProfile:
    eps: tuple[float, ...]
    sizes: tuple[int, ...]
    covers: tuple[CoverMapPair, ...]

    def __iter__(self):
        return iter(zip(self.eps, self.sizes))


def greedy_cover_from_matrix(distances: np.ndarray, eps: float, members: Sequence[int] | None = None) -> CoverMapPair:
    """First-uncovered scan in ascending id order over ``members``.

    Each hypothesis maps to the first existing center within ``eps``; if
    none exists it becomes a center itself.
    """
    if eps <= 0:
        raise ValueError("cover radius must be positive")
    members = range(distances.shape[0]) if members is None else sorted(members)
    centers: list[int] = []
    mapping: dict[int, int] = {}
    for h in members:
        for c in centers:
            if distances[h, c] <= eps:
                mapping[h] = c
                break
        else:
            centers.append(h)
            mapping[h] = h
    return CoverMapPair(tuple(centers), mapping, eps)


def greedy_cover(dist: Distribution, hclass: HypothesisClass, eps: float, members=None) -> CoverMapPair:
    return greedy_cover_from_matrix(distance_matrix(dist, hclass), eps, members)


def minimum_cover_size(distances: np.ndarray, eps: float) -> int:
    """Smallest eps-cover by exhaustive subset search (oracle; at most 20 hypotheses)."""
    size = distances.shape[0]
    if size > EXHAUSTIVE_MAX_CLASS:
        raise ValueError(f"exhaustive search is capped at {EXHAUSTIVE_MAX_CLASS} hypotheses")
    close = distances <= eps + EXACT_TOL
    for k in range(1, size + 1):
        for subset in itertools.combinations(range(size), k):
            if close[:, list(subset)].any(axis=1).all():
                return k
    return size


def categorical_canonical_cover(inst: CategoricalInstance, special: int, eps: float) -> CoverMapPair:
    """Explicit cover of the indicator class under ``D_special``.

    Keeps every ``f_j`` with mean ``>= eps/2`` and adds the first ``f_k``
    outside that set (mean ``< eps/2``), to which every remaining indicator
    maps.
    """
    if not 0 < eps <= 1:
        raise ValueError("cover radius must lie in (0, 1]")
    means = inst.means(special)
    heavy = [j for j in range(inst.n) if means[j] >= eps / 2]
    light = [j for j in range(inst.n) if means[j] < eps / 2]
    cover = heavy + light[:1]
    mapping = {j: j for j in heavy}
    for j in light:
        mapping[j] = light[0]
    return CoverMapPair(tuple(sorted(cover)), mapping, eps)


def canonical_cover_bound(eps: float) -> float:
    return 2 ** (2 / eps) + 1


def entropy_profile(dist: Distribution, hclass: HypothesisClass, eps_grid: Sequence[float]) -> EntropyProfile:
    """Greedy cover sizes on a grid, made non-increasing in eps.

    A cover valid at a smaller radius is valid at every larger one, so each
    grid point keeps the smallest cover found at or below its radius.
    """
    if any(not 0 < e <= 1 for e in eps_grid):
        raise ValueError("grid values must lie in (0, 1]")
    distances = distance_matrix(dist, hclass)
    grid = sorted(set(float(e) for e in eps_grid))
    best = None
    covers = []
    for e in grid:
        cand = greedy_cover_from_matrix(distances, e)
        if best is None or len(cand) <= len(best):
            best = cand
        covers.append(CoverMapPair(best.cover, best.mapping, e))
    return EntropyProfile(tuple(grid), tuple(len(c) for c in covers), tuple(covers))


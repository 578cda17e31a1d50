"""Domain types and distance machinery shared by every other module.

Points live in small finite alphabets and samples are stored as 2-D integer
arrays (one row per point).  A sample may hold only a subset of the
coordinates of its domain; hypotheses ask the sample for the columns they
depend on, so a learner that only looks at a handful of coordinates never
pays for the rest of a 10^5-dimensional cube.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

EXACT_TOL = 1e-12
BRUTE_FORCE_MAX_SUPPORT = 1 << 20


class DimensionError(ValueError):
    """Raised when objects from different domains are combined."""


class InfeasibleError(RuntimeError):
    """Raised when no family member realizes a set of distance estimates."""


# ---------------------------------------------------------------------------
# Samples


@dataclass(frozen=True, eq=False)
class UnlabeledSample:
    """i.i.d. points from a domain of dimension ``dim``.

    ``points`` has shape ``(m, k)``.  When ``coords`` is ``None`` the columns
    are the full coordinate range ``0..dim-1``; otherwise column ``c`` of
    ``points`` holds coordinate ``coords[c]``.
    """

    points: np.ndarray
    dim: int
    coords: tuple[int, ...] | None = None
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = np.asarray(self.points)
        if pts.ndim != 2:
            raise DimensionError(f"points must be 2-D, got shape {pts.shape}")
        width = self.dim if self.coords is None else len(self.coords)
        if pts.shape[1] != width:
            raise DimensionError(f"expected {width} columns, got {pts.shape[1]}")
        if self.coords is not None and any(not 0 <= c < self.dim for c in self.coords):
            raise DimensionError("sample coordinate outside the domain")
        object.__setattr__(self, "points", pts)
        index = None if self.coords is None else {c: k for k, c in enumerate(self.coords)}
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return self.points.shape[0]

    def columns(self, coords: Sequence[int]) -> np.ndarray:
        """Values of the requested coordinates, shape ``(m, len(coords))``."""
        if self._index is None and isinstance(coords, range) and coords == range(self.dim):
            return self.points
        for c in coords:
            if not 0 <= c < self.dim:
                raise DimensionError(f"coordinate {c} outside dimension {self.dim}")
        if self._index is None:
            return self.points[:, list(coords)]
        try:
            return self.points[:, [self._index[c] for c in coords]]
        except KeyError as exc:
            raise DimensionError(f"coordinate {exc.args[0]} was not sampled") from None


@dataclass(frozen=True, eq=False)
class LabeledSample:
    points: UnlabeledSample
    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.uint8)
        if labels.shape != (len(self.points),):
            raise DimensionError("one label per point is required")
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.dim


def as_sample(points, dim: int | None = None) -> UnlabeledSample:
    """Wrap a point or an array of points as a full-width sample."""
    if isinstance(points, UnlabeledSample):
        return points
    arr = np.atleast_2d(np.asarray(points))
    return UnlabeledSample(arr, arr.shape[1] if dim is None else dim)


# ---------------------------------------------------------------------------
# Hypotheses


@dataclass(frozen=True)
class Hypothesis:
    """Binary classifier that reads a fixed, finite set of coordinates.

    Subclasses implement :meth:`_evaluate`, which maps an ``(m, k)`` array of
    coordinate values (columns ordered as ``coords``) to ``m`` labels.
    """

    id: int

    @property
    def coords(self) -> tuple[int, ...]:
        raise NotImplementedError

    def _evaluate(self, values: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, sample) -> np.ndarray:
        sample = as_sample(sample)
        values = sample.columns(self.coords)
        return np.asarray(self._evaluate(values), dtype=np.uint8)


@dataclass(frozen=True)
class CoordinateHypothesis(Hypothesis):
    """``h(x) = 1`` iff ``x[coord]`` is one of ``accept``."""

    coord: int
    accept: frozenset

    @property
    def coords(self) -> tuple[int, ...]:
        return (self.coord,)

    def _evaluate(self, values):
        col = values[:, 0]
        if len(self.accept) == 1:
            (v,) = self.accept
            return col == v
        return np.isin(col, list(self.accept))


@dataclass(frozen=True)
class ConstantHypothesis(Hypothesis):
    value: int

    @property
    def coords(self) -> tuple[int, ...]:
        return ()

    def _evaluate(self, values):
        return np.full(values.shape[0], self.value, dtype=np.uint8)


@dataclass(frozen=True)
class JuntaHypothesis(Hypothesis):
    """Arbitrary vectorized rule over a few coordinates (used for oracle tests)."""

    support: tuple[int, ...]
    rule: Callable[[np.ndarray], np.ndarray]

    @property
    def coords(self) -> tuple[int, ...]:
        return self.support

    def _evaluate(self, values):
        return self.rule(values)


def dictator(i: int) -> CoordinateHypothesis:
    """The cube dictator ``1_i(x) = [x_i = 1]``."""
    return CoordinateHypothesis(i, i, frozenset({1}))


def zero_indicator(i: int) -> CoordinateHypothesis:
    """``f_i(x) = [x_i = 0]`` on the categorical domain."""
    return CoordinateHypothesis(i, i, frozenset({0}))


@dataclass(frozen=True)
class HypothesisClass:
    dim: int
    hypotheses: tuple[Hypothesis, ...]

    def __post_init__(self):
        hyps = tuple(self.hypotheses)
        if not hyps:
            raise ValueError("hypothesis class must be nonempty")
        if [h.id for h in hyps] != list(range(len(hyps))):
            raise ValueError("hypothesis ids must be dense 0..|H|-1 in order")
        for h in hyps:
            if any(not 0 <= c < self.dim for c in h.coords):
                raise DimensionError(f"hypothesis {h.id} reads outside dimension {self.dim}")
        object.__setattr__(self, "hypotheses", hyps)

    def __len__(self) -> int:
        return len(self.hypotheses)

    def __getitem__(self, idx: int) -> Hypothesis:
        return self.hypotheses[idx]

    def __iter__(self):
        return iter(self.hypotheses)

    def label_matrix(self, sample) -> np.ndarray:
        """Labels of every hypothesis on every point, shape ``(|H|, m)``."""
        sample = as_sample(sample, self.dim)
        return np.stack([h(sample) for h in self.hypotheses])


def dictator_class(n: int) -> HypothesisClass:
    return HypothesisClass(n, tuple(dictator(i) for i in range(n)))


def indicator_class(n: int) -> HypothesisClass:
    return HypothesisClass(n, tuple(zero_indicator(i) for i in range(n)))


@dataclass(frozen=True)
class SymmetricDifference:
    """The event ``h Δ h'``: points where the two hypotheses disagree."""

    first: Hypothesis
    second: Hypothesis

    def __call__(self, sample) -> np.ndarray:
        return self.first(sample) != self.second(sample)

    def measure(self, dist) -> float:
        return exact_distance(dist, self.first, self.second)


# ---------------------------------------------------------------------------
# Distributions


class Distribution:
    """Base for distributions over ``alphabet ** dim``."""

    dim: int
    alphabet: int

    def sample(self, m: int, rng: np.random.Generator, coords=None) -> UnlabeledSample:
        raise NotImplementedError

    def _dtype(self):
        return np.uint8 if self.alphabet <= 256 else np.int64


class ProductDistribution(Distribution):
    """Independent coordinates; subclasses supply per-coordinate marginals."""

    def marginal(self, coord: int) -> np.ndarray:
        raise NotImplementedError

    def cumulative(self, coords: Sequence[int]) -> np.ndarray:
        """Cumulative marginals, shape ``(len(coords), alphabet - 1)``."""
        return np.stack([np.cumsum(self.marginal(c))[:-1] for c in coords])

    def sample(self, m, rng, coords=None):
        if m < 1:
            raise ValueError("sample size must be at least 1")
        cols = list(range(self.dim)) if coords is None else list(coords)
        cum = self.cumulative(cols)
        u = rng.random((m, len(cols)))
        out = np.zeros((m, len(cols)), dtype=self._dtype())
        for k in range(cum.shape[1]):
            out += u >= cum[:, k]
        return UnlabeledSample(out, self.dim, None if coords is None else tuple(cols))


@dataclass(frozen=True, eq=False)
class NoisyCube(ProductDistribution):
    """``D_x^rho``: each bit of ``center`` flipped independently with probability ``rho``."""

    center: np.ndarray
    rho: float

    def __post_init__(self):
        center = np.asarray(self.center, dtype=np.uint8)
        if center.ndim != 1 or center.size < 1:
            raise DimensionError("center must be a nonempty bit vector")
        if np.any(center > 1):
            raise ValueError("center must be over {0,1}")
        if not 0 <= self.rho < 0.5:
            raise ValueError("rho must lie in [0, 1/2)")
        center.setflags(write=False)
        object.__setattr__(self, "center", center)

    alphabet = 2

    @property
    def dim(self) -> int:
        return self.center.size

    def __eq__(self, other):
        return (
            isinstance(other, NoisyCube)
            and self.rho == other.rho
            and np.array_equal(self.center, other.center)
        )

    def __hash__(self):
        return hash((self.center.tobytes(), self.rho))

    def marginal(self, coord):
        bit = self.center[coord]
        return np.array([1 - self.rho, self.rho]) if bit == 0 else np.array([self.rho, 1 - self.rho])

    def sample(self, m, rng, coords=None):
        if m < 1:
            raise ValueError("sample size must be at least 1")
        cols = slice(None) if coords is None else list(coords)
        center = self.center[cols]
        flips = rng.random((m, center.size)) < self.rho
        out = np.bitwise_xor(flips, center).astype(np.uint8)
        return UnlabeledSample(out, self.dim, None if coords is None else tuple(coords))


@dataclass(frozen=True)
class CategoricalFamily(ProductDistribution):
    """``D_i``: coordinate ``special`` uniform on {0,1}; coordinate ``j`` puts
    mass ``eps[j]`` on each of 0 and 1 and the rest on 2."""

    special: int
    eps: tuple[float, ...]

    alphabet = 3

    def __post_init__(self):
        eps = tuple(float(e) for e in self.eps)
        if not eps:
            raise DimensionError("truncation must be at least 1")
        if any(not 0 < e <= 0.25 for e in eps):
            raise ValueError("every eps_j must lie in (0, 1/4]")
        if not 0 <= self.special < len(eps):
            raise ValueError("special index outside truncation")
        object.__setattr__(self, "eps", eps)

    @property
    def dim(self) -> int:
        return len(self.eps)

    def marginal(self, coord):
        if coord == self.special:
            return np.array([0.5, 0.5, 0.0])
        e = self.eps[coord]
        return np.array([e, e, 1 - 2 * e])

    def cumulative(self, coords):
        eps = np.asarray(self.eps)[list(coords)]
        cum = np.stack([eps, 2 * eps], axis=1)
        special = np.asarray(coords) == self.special
        cum[special] = (0.5, 1.0)
        return cum


@dataclass(frozen=True)
class UniformDomain(ProductDistribution):
    """Uniform distribution over ``{0, ..., size-1}`` (a 1-dimensional domain)."""

    size: int

    dim = 1

    @property
    def alphabet(self) -> int:
        return self.size

    def marginal(self, coord):
        if coord != 0:
            raise DimensionError("uniform domain has a single coordinate")
        return np.full(self.size, 1.0 / self.size)

    def sample(self, m, rng, coords=None):
        if m < 1:
            raise ValueError("sample size must be at least 1")
        if coords is not None and tuple(coords) != (0,):
            raise DimensionError("uniform domain has a single coordinate")
        pts = rng.integers(0, self.size, size=(m, 1), dtype=np.int64)
        return UnlabeledSample(pts, 1, None if coords is None else (0,))


@dataclass(frozen=True, eq=False)
class FiniteTable(Distribution):
    """Arbitrary distribution on finitely many points."""

    points: np.ndarray
    mass: np.ndarray
    alphabet: int = 2

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=np.int64))
        mass = np.asarray(self.mass, dtype=float)
        if pts.shape[0] != mass.size:
            raise DimensionError("one mass per point is required")
        if np.any(mass < 0) or abs(math.fsum(mass) - 1) > EXACT_TOL:
            raise ValueError("masses must be nonnegative and sum to 1")
        if np.any(pts < 0) or np.any(pts >= self.alphabet):
            raise ValueError("table point outside the alphabet")
        pts.setflags(write=False)
        mass.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "mass", mass)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __eq__(self, other):
        return (
            isinstance(other, FiniteTable)
            and np.array_equal(self.points, other.points)
            and np.array_equal(self.mass, other.mass)
        )

    def __hash__(self):
        return hash((self.points.tobytes(), self.points.shape, self.mass.tobytes()))

    def sample(self, m, rng, coords=None):
        if m < 1:
            raise ValueError("sample size must be at least 1")
        rows = rng.choice(self.points.shape[0], size=m, p=self.mass)
        pts = self.points[rows]
        if coords is not None:
            pts = pts[:, list(coords)]
        return UnlabeledSample(pts.astype(self._dtype()), self.dim,
                               None if coords is None else tuple(coords))


# ---------------------------------------------------------------------------
# Distances


def _check_domain(dist: Distribution, *hyps: Hypothesis):
    for h in hyps:
        if any(not 0 <= c < dist.dim for c in h.coords):
            raise DimensionError(f"hypothesis {h.id} reads outside dimension {dist.dim}")


def _product_pattern_measure(dist: ProductDistribution, coords, predicate) -> float:
    """Mass of ``predicate`` over the joint support of a few coordinates."""
    supports = []
    for c in coords:
        p = dist.marginal(c)
        vals = np.flatnonzero(p > 0)
        supports.append((vals, p[vals]))
    if not coords:
        grid = np.empty((1, 0), dtype=np.int64)
        probs = np.ones(1)
    else:
        grid = np.array(list(itertools.product(*(v for v, _ in supports))), dtype=np.int64)
        probs = np.ones(grid.shape[0])
        for k, (vals, p) in enumerate(supports):
            probs *= p[np.searchsorted(vals, grid[:, k])]
    sample = UnlabeledSample(grid, dist.dim, tuple(coords))
    return math.fsum(probs[predicate(sample)])


def exact_distance(dist: Distribution, h: Hypothesis, g: Hypothesis) -> float:
    """``Pr_{x ~ dist}[h(x) != g(x)]``.

    Product distributions are handled by enumerating only the joint values
    of the coordinates the two hypotheses read; finite tables by summation.
    """
    _check_domain(dist, h, g)
    if h == g:
        return 0.0
    if isinstance(dist, ProductDistribution):
        coords = tuple(sorted(set(h.coords) | set(g.coords)))
        return _product_pattern_measure(dist, coords, lambda s: h(s) != g(s))
    if isinstance(dist, FiniteTable):
        sample = UnlabeledSample(dist.points, dist.dim)
        return math.fsum(dist.mass[h(sample) != g(sample)])
    raise TypeError(f"{type(dist).__name__} does not support exact measure")


def positive_rate(dist: Distribution, h: Hypothesis) -> float:
    """``Pr_{x ~ dist}[h(x) = 1]``."""
    return exact_distance(dist, h, ConstantHypothesis(-1, 0))


@lru_cache(maxsize=4096)
def distance_matrix(dist: Distribution, hclass: HypothesisClass) -> np.ndarray:
    """Matrix of exact distances ``d_D(h_a, h_b)`` over the class (cached, read-only).

    Hypotheses reading disjoint coordinates of a product distribution are
    independent, so their distance is ``p(1-q) + q(1-p)``; every other pair
    goes through :func:`exact_distance`.
    """
    if hclass.dim != dist.dim:
        raise DimensionError("class and distribution dimensions differ")
    size = len(hclass)
    out = np.zeros((size, size))
    if isinstance(dist, ProductDistribution):
        rates = np.array([positive_rate(dist, h) for h in hclass])
        out[:] = rates[:, None] * (1 - rates[None, :]) + rates[None, :] * (1 - rates[:, None])
        coord_sets = [set(h.coords) for h in hclass]
        for a, b in itertools.combinations(range(size), 2):
            if coord_sets[a] & coord_sets[b]:
                out[a, b] = out[b, a] = exact_distance(dist, hclass[a], hclass[b])
    else:
        for a, b in itertools.combinations(range(size), 2):
            out[a, b] = out[b, a] = exact_distance(dist, hclass[a], hclass[b])
    np.fill_diagonal(out, 0.0)
    out.setflags(write=False)
    return out


def empirical_distance(sample: UnlabeledSample, h: Hypothesis, g: Hypothesis) -> float:
    """Fraction of sample points on which ``h`` and ``g`` disagree."""
    sample = as_sample(sample)
    if len(sample) < 1:
        raise ValueError("empirical distance needs a nonempty sample")
    if h == g:
        return 0.0
    return int(np.count_nonzero(h(sample) != g(sample))) / len(sample)


def empirical_distance_matrix(sample: UnlabeledSample, hyps: Sequence[Hypothesis]) -> np.ndarray:
    if len(sample) < 1:
        raise ValueError("empirical distance needs a nonempty sample")
    labels = np.stack([h(sample) for h in hyps]).astype(np.int64)
    m = len(sample)
    agree_ones = labels @ labels.T
    ones = labels.sum(axis=1)
    disagreements = ones[:, None] + ones[None, :] - 2 * agree_ones
    return disagreements / m


def tv_class_conditional(dist: Distribution, other: Distribution, hclass: HypothesisClass) -> float:
    """``max_{h,h'} |D(h Δ h') - D'(h Δ h')|`` over all pairs in the class."""
    if dist.dim != other.dim:
        raise DimensionError("distributions live on different domains")
    diff = np.abs(distance_matrix(dist, hclass) - distance_matrix(other, hclass))
    return float(diff.max())


def growth_count(hclass: HypothesisClass, sample: UnlabeledSample) -> int:
    """Number of distinct labelings the class induces on the sample."""
    if len(sample) < 1:
        raise ValueError("growth count needs a nonempty sample")
    return int(np.unique(hclass.label_matrix(sample), axis=0).shape[0])


# ---------------------------------------------------------------------------
# Brute-force oracles


def full_support(dist: Distribution) -> tuple[np.ndarray, np.ndarray]:
    """Every support point with its mass, by explicit enumeration.

    Capped at ``BRUTE_FORCE_MAX_SUPPORT`` points (2^20, i.e. n <= 20 on the cube).
    """
    if isinstance(dist, FiniteTable):
        return dist.points, dist.mass
    if not isinstance(dist, ProductDistribution):
        raise TypeError(f"{type(dist).__name__} has no enumerable support")
    supports = []
    for c in range(dist.dim):
        p = dist.marginal(c)
        supports.append(np.flatnonzero(p > 0))
    size = math.prod(len(s) for s in supports)
    if size > BRUTE_FORCE_MAX_SUPPORT:
        raise ValueError(f"support of {size} points exceeds the brute-force cap")
    mesh = np.meshgrid(*supports, indexing="ij")
    points = np.stack([g.ravel() for g in mesh], axis=1)
    mass = np.ones(points.shape[0])
    for c in range(dist.dim):
        mass *= dist.marginal(c)[points[:, c]]
    return points, mass


def brute_force_distance_matrix(dist: Distribution, hyps: Iterable[Hypothesis]) -> np.ndarray:
    """Exact distances by summing over the entire support of ``dist``."""
    points, mass = full_support(dist)
    sample = UnlabeledSample(points, dist.dim)
    labels = np.stack([h(sample) for h in hyps])
    # group support points by their joint labeling; each group mass is an exact sum
    packed = np.ascontiguousarray(np.packbits(labels, axis=0).T)
    keys = packed.view(np.dtype((np.void, packed.shape[1]))).ravel()
    _, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    inverse = np.asarray(inverse).ravel()
    order = np.argsort(inverse, kind="stable")
    cuts = np.flatnonzero(np.diff(inverse[order])) + 1
    group_mass = np.array([math.fsum(chunk) for chunk in np.split(mass[order], cuts)])
    group_labels = labels[:, first]
    size = labels.shape[0]
    out = np.zeros((size, size))
    for a, b in itertools.combinations(range(size), 2):
        out[a, b] = out[b, a] = math.fsum(group_mass[group_labels[a] != group_labels[b]])
    return out


def brute_force_distance(dist: Distribution, h: Hypothesis, g: Hypothesis) -> float:
    return float(brute_force_distance_matrix(dist, (h, g))[0, 1])

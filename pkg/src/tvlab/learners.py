"""Learner constructions: PAC learners, TV learners, uniform-estimator
conversions and confident learners.

Learner inputs that stand for an abstract guarantee (a PAC learner, an STV
learner, an ETV learner, a uniform estimator) are plain callables:

* PAC learner: ``LabeledSample -> Hypothesis``
* STV / WTV learner: ``UnlabeledSample -> DistanceEstimate``
* ETV learner: ``UnlabeledSample -> Distribution``
* uniform estimator: ``LabeledSample -> ndarray`` of estimated errors, one per class member

All tie-breaking is by lowest hypothesis id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .classes import CategoricalInstance, ExampleOracle
from .core import (
    EXACT_TOL,
    ConstantHypothesis,
    Distribution,
    Hypothesis,
    HypothesisClass,
    InfeasibleError,
    LabeledSample,
    UnlabeledSample,
    distance_matrix,
    empirical_distance,
    empirical_distance_matrix,
    exact_distance,
)
from .covers import CoverMapPair, greedy_cover

BOT = -1

CONSTANT_ZERO = ConstantHypothesis(0, 0)
CONSTANT_ONE = ConstantHypothesis(1, 1)


# ---------------------------------------------------------------------------
# Sample sizes


def chernoff_size(eps: float, delta: float, count: int = 1) -> int:
    """Samples for ``count`` simultaneous additive-``eps/2`` estimates w.p. ``1 - delta``."""
    return math.ceil((2 / eps**2) * (math.log(count) + math.log(2 / delta)))


def erm_size(eps: float, delta: float, count: int) -> int:
    """Realizable ERM over ``count`` hypotheses to error ``eps`` w.p. ``1 - delta``."""
    return math.ceil((8 / eps) * (math.log(count) + math.log(1 / delta)))


def hoeffding_size(accuracy: float, delta: float, count: int = 1) -> int:
    """Samples for ``count`` simultaneous additive-``accuracy`` estimates w.p. ``1 - delta``."""
    return math.ceil(math.log(2 * count / delta) / (2 * accuracy**2))


def majority_sample_size(delta: float) -> int:
    return math.ceil(48 * math.log(1 / delta))


def categorical_wtv_sample_size(delta: float) -> int:
    return math.ceil(72 * math.log(2 / delta))


def ubme_wtv_sample_size(eps: float, delta: float, cover_size: int) -> int:
    return math.ceil((512 / eps**2) * (math.log(cover_size) + math.log(1 / delta)))


@dataclass(frozen=True)
class SampleSizePlan:
    """Sample-size functions ``(eps, delta) -> int`` for each learning notion."""

    n_pac: Callable[[float, float], int]
    n_stv: Callable[[float, float], int]
    n_wtv: Callable[[float, float], int]
    n_etv: Callable[[float, float], int]
    n_ue: Callable[[float, float], int]

    @classmethod
    def for_finite_class(cls, size: int) -> SampleSizePlan:
        """Plain ERM / empirical-estimator sizes for a class of ``size`` hypotheses."""
        pairs = size * size
        return cls(
            n_pac=lambda e, d: erm_size(e, d, size),
            n_stv=lambda e, d: chernoff_size(e, d, pairs),
            n_wtv=lambda e, d: chernoff_size(e, d, pairs),
            n_etv=lambda e, d: chernoff_size(e, d, pairs),
            n_ue=lambda e, d: hoeffding_size(e, d, size),
        )


# ---------------------------------------------------------------------------
# Outputs


@dataclass(frozen=True, eq=False)
class DistanceEstimate:
    """Approximate metric on class ids, optionally with a known good set.

    ``pair(a, b)`` gives the estimate for one pair; ``block(ids)`` (optional)
    gives the whole sub-matrix at once, with ``ids=None`` meaning every id.
    """

    size: int
    pair: Callable[[int, int], float]
    known_good: frozenset | None = None
    block: Callable[[Sequence[int]], np.ndarray] | None = None
    cover_map: dict | None = None

    def __call__(self, a: int, b: int) -> float:
        if a == b:
            return 0.0
        return float(self.pair(a, b))

    def matrix(self, ids: Sequence[int] | None = None) -> np.ndarray:
        """Estimates on ``ids`` (every id if omitted).

        May return a read-only view; read-only matrices already have a zero diagonal.
        """
        if self.block is not None:
            out = np.asarray(self.block(None if ids is None else list(ids)), dtype=float)
        else:
            ids = range(self.size) if ids is None else list(ids)
            out = np.array([[self.pair(a, b) for b in ids] for a in ids], dtype=float)
        if out.flags.writeable:
            np.fill_diagonal(out, 0.0)
        return out

    @classmethod
    def from_matrix(cls, values: np.ndarray, known_good=None, cover_map=None) -> DistanceEstimate:
        values = np.array(values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError("estimate matrix must be square")
        if not np.array_equal(values, values.T):
            raise ValueError("distance estimates must be symmetric")
        return cls._wrap(values, known_good, cover_map)

    @classmethod
    def _wrap(cls, values: np.ndarray, known_good=None, cover_map=None) -> DistanceEstimate:
        """Freeze a fresh symmetric matrix (owned by the caller) without re-validating it."""
        np.fill_diagonal(values, 0.0)
        values.setflags(write=False)
        good = None if known_good is None else frozenset(int(g) for g in known_good)
        return cls(
            values.shape[0],
            lambda a, b: values[a, b],
            good,
            lambda ids: values if ids is None else values[np.ix_(ids, ids)],
            cover_map,
        )


@dataclass(frozen=True, eq=False)
class ConfidentOutput:
    """String over ``{0, 1, ⊥}``; ``⊥`` is stored as ``BOT``."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.int8)
        if vals.ndim != 1 or not np.isin(vals, (0, 1, BOT)).all():
            raise ValueError("confident output must be a string over {0, 1, BOT}")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return self.values.size

    def __str__(self) -> str:
        return "".join("⊥" if v == BOT else str(int(v)) for v in self.values)

    @property
    def labeled(self) -> np.ndarray:
        return self.values != BOT

    def succeeds_on(self, center) -> bool:
        """Labels at least half the coordinates and never contradicts ``center``."""
        center = np.asarray(center)
        mask = self.labeled
        return 2 * int(mask.sum()) >= self.values.size and bool(
            np.array_equal(self.values[mask], center[mask])
        )


# ---------------------------------------------------------------------------
# Supervised learners


def empirical_errors(sample: LabeledSample, hyps: Sequence[Hypothesis]) -> np.ndarray:
    """Mistake counts of each hypothesis on the sample."""
    return np.array([np.count_nonzero(h(sample.points) != sample.labels) for h in hyps])


def erm(sample: LabeledSample, hyps) -> Hypothesis:
    """Empirical risk minimizer; ties go to the lowest id."""
    if len(sample) < 1:
        raise ValueError("ERM needs a nonempty sample")
    hyps = sorted(hyps, key=lambda h: h.id)
    return hyps[int(np.argmin(empirical_errors(sample, hyps)))]


def majority_constant_learner(sample: LabeledSample) -> ConstantHypothesis:
    """Constant function equal to the majority label (ties give 0)."""
    if len(sample) < 1:
        raise ValueError("majority vote needs a nonempty sample")
    ones = int(sample.labels.sum())
    return CONSTANT_ONE if 2 * ones > len(sample) else CONSTANT_ZERO


# ---------------------------------------------------------------------------
# Realizing estimates inside a finite family


@lru_cache(maxsize=64)
def _family_distances(family: tuple, hclass: HypothesisClass) -> np.ndarray:
    return np.stack([distance_matrix(d, hclass) for d in family])


def find_realizing(
    family: Sequence[Distribution],
    hclass: HypothesisClass,
    estimates: np.ndarray,
    ids: Sequence[int],
    tol: float,
) -> Distribution:
    """First family member whose exact distances on ``ids`` are within ``tol`` of ``estimates``.

    ``estimates`` is indexed like ``ids``.
    """
    family = tuple(family)
    if not family:
        raise InfeasibleError("empty distribution family")
    ids = list(ids)
    if not ids:
        return family[0]
    exact = _family_distances(family, hclass)[:, ids][:, :, ids]
    dev = np.abs(exact - np.asarray(estimates)[None]).reshape(len(family), -1).max(axis=1)
    hits = np.flatnonzero(dev <= tol + EXACT_TOL)
    if hits.size == 0:
        raise InfeasibleError(
            f"no family member realizes the estimates within {tol} (closest deviation {dev.min():.4g})"
        )
    return family[int(hits[0])]


# ---------------------------------------------------------------------------
# STV -> PAC


@dataclass(frozen=True)
class ExactSTV:
    """STV learner that knows the true distribution: exact distances, everything good."""

    distribution: Distribution
    hclass: HypothesisClass

    def __call__(self, sample: UnlabeledSample) -> DistanceEstimate:
        return DistanceEstimate.from_matrix(
            distance_matrix(self.distribution, self.hclass), known_good=range(len(self.hclass))
        )


def stv_to_pac(
    stv: Callable[[UnlabeledSample], DistanceEstimate],
    family: Sequence[Distribution],
    hclass: HypothesisClass,
    eps: float,
    delta: float,
    oracle: ExampleOracle,
    stv_sample_size: int,
) -> Hypothesis:
    """PAC learner built from an ``eps/4``-accurate STV learner.

    1. run ``stv`` on ``stv_sample_size`` unlabeled points;
    2. pick the first family member matching the estimates on ``G_T`` within
       ``eps/4`` and greedily ``eps/4``-cover ``G_T`` under it;
    3. ERM over the cover on ``ceil((32/eps)(ln|C| + ln(4/delta)))`` fresh
       labeled examples.

    An empty good set leaves nothing to cover; ERM then runs over the whole class.
    """
    estimate = stv(oracle.unlabeled(stv_sample_size))
    good = sorted(estimate.known_good or ())
    nearby = find_realizing(family, hclass, estimate.matrix(good), good, eps / 4)
    if good:
        cover = greedy_cover(nearby, hclass, eps / 4, members=good)
        candidates = [hclass[c] for c in cover.cover]
    else:
        candidates = list(hclass)
    m = math.ceil((32 / eps) * (math.log(len(candidates)) + math.log(4 / delta)))
    return erm(oracle.labeled(m), candidates)


# ---------------------------------------------------------------------------
# PAC -> WTV and UBME -> WTV


def pac_to_wtv(
    pac: Callable[[LabeledSample], Hypothesis],
    hclass: HypothesisClass,
    first: UnlabeledSample,
    second: UnlabeledSample,
) -> DistanceEstimate:
    """WTV estimate from a PAC learner via the non-uniform cover ``{pac(T, h(T))}``.

    ``cover_map`` on the result holds ``c_T(h) = pac(T, h(T))`` for every id,
    and the estimate is ``d_hat_{T'}(c_T(h), c_T(h'))``.
    """
    labels = hclass.label_matrix(first)
    rows, inverse = np.unique(labels, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).ravel()
    learned = [pac(LabeledSample(first, row)) for row in rows]
    reps = empirical_distance_matrix(second, learned)
    values = reps[np.ix_(inverse, inverse)]
    cover_map = {h.id: learned[inverse[h.id]] for h in hclass}
    return DistanceEstimate.from_matrix(values, cover_map=cover_map)


def pac_to_wtv_second_size(eps: float, delta: float, growth: int) -> int:
    return math.ceil((8 / eps**2) * (math.log(growth) + math.log(2 / delta)))


def pac_cover_good_set(dist: Distribution, hclass: HypothesisClass, estimate: DistanceEstimate, eps: float) -> frozenset:
    """Analysis set ``{g : d_D(g, c_T(g)) <= eps/3}`` for a :func:`pac_to_wtv` estimate."""
    return frozenset(
        h.id for h in hclass if exact_distance(dist, h, estimate.cover_map[h.id]) <= eps / 3 + EXACT_TOL
    )


def ubme_wtv(sample: UnlabeledSample, hclass: HypothesisClass) -> DistanceEstimate:
    """The empirical distance estimator itself, as a WTV output."""
    if len(sample) < 1:
        raise ValueError("empirical estimator needs a nonempty sample")
    return DistanceEstimate(
        len(hclass),
        lambda a, b: empirical_distance(sample, hclass[a], hclass[b]),
        block=lambda ids: empirical_distance_matrix(sample, [hclass[i] for i in ids] if ids else hclass.hypotheses),
    )


def ubme_good_set(
    dist: Distribution,
    hclass: HypothesisClass,
    sample: UnlabeledSample,
    cover: CoverMapPair,
    eps: float,
    ids: Sequence[int] | None = None,
) -> frozenset:
    """``{h : |d_hat_T(h, c(h)) - d_D(h, c(h))| <= eps/8}`` (restricted to ``ids`` if given)."""
    ids = range(len(hclass)) if ids is None else ids
    good = set()
    for h in ids:
        rep = cover(h)
        gap = abs(empirical_distance(sample, hclass[h], hclass[rep]) - exact_distance(dist, hclass[h], hclass[rep]))
        if gap <= eps / 8 + EXACT_TOL:
            good.add(h)
    return frozenset(good)


# ---------------------------------------------------------------------------
# Zero-error WTV on the categorical class


def empirical_zero_rates(inst: CategoricalInstance, sample: UnlabeledSample) -> np.ndarray:
    """``mu_j^T``: fraction of sample points with ``x_j = 0``."""
    return (sample.columns(range(inst.n)) == 0).mean(axis=0)


def categorical_wtv_learner(
    inst: CategoricalInstance, sample: UnlabeledSample, rates: np.ndarray | None = None
) -> DistanceEstimate:
    """Closed-form rate distance when both empirical rates are below 1/3, else 1/2.

    ``rates`` may carry precomputed empirical zero rates for ``sample``.
    """
    if len(sample) < 1:
        raise ValueError("WTV learner needs a nonempty sample")
    if rates is None:
        rates = empirical_zero_rates(inst, sample)
    low = rates < 1 / 3
    values = np.where(low[:, None] & low[None, :], inst.rate_distances, 0.5)
    return DistanceEstimate._wrap(values)


def categorical_good_set(
    inst: CategoricalInstance, special: int, sample: UnlabeledSample, rates: np.ndarray | None = None
) -> frozenset:
    """Indicators whose empirical rate is within 1/6 of the truth under ``D_special``.

    ``rates`` may carry precomputed empirical zero rates for ``sample``.
    """
    if rates is None:
        rates = empirical_zero_rates(inst, sample)
    gap = np.abs(inst.means(special) - rates)
    return frozenset(int(j) for j in np.flatnonzero(gap < 1 / 6))


# ---------------------------------------------------------------------------
# Uniform estimation <-> ETV


def empirical_error_estimator(hclass: HypothesisClass) -> Callable[[LabeledSample], np.ndarray]:
    """The plain empirical-error uniform estimator over a finite class."""

    def estimate(sample: LabeledSample) -> np.ndarray:
        return empirical_errors(sample, hclass.hypotheses) / len(sample)

    return estimate


def ue_to_etv(
    ue: Callable[[LabeledSample], np.ndarray],
    family: Sequence[Distribution],
    hclass: HypothesisClass,
    eps: float,
    delta: float,
    oracle: ExampleOracle,
    plan: SampleSizePlan | None = None,
) -> Distribution:
    """ETV learner from a uniform estimator (unlabeled data only).

    1. cover: minimize the estimator on every labeling of an unlabeled sample;
    2. covering map: ``c(h) = argmin_{h' in C} E_{(T, h'(T))}(h)``;
    3. estimate distances on ``C`` from a fresh sample and extend through ``c``;
    4. return the first family member within ``eps/2`` of every extended estimate.
    """
    plan = plan or SampleSizePlan.for_finite_class(len(hclass))
    hyps = hclass.hypotheses

    first = oracle.unlabeled(plan.n_ue(eps / 16, delta / 3))
    rows = np.unique(hclass.label_matrix(first), axis=0)
    cover = sorted({int(np.argmin(ue(LabeledSample(first, row)))) for row in rows})

    second = oracle.unlabeled(plan.n_ue(eps / 16, delta / (3 * len(cover))))
    scores = np.stack([ue(LabeledSample(second, hyps[c](second))) for c in cover])
    mapping = {h: cover[int(np.argmin(scores[:, h]))] for h in range(len(hclass))}

    third = oracle.unlabeled(hoeffding_size(eps / 8, delta / 3, len(cover) ** 2))
    on_cover = empirical_distance_matrix(third, [hyps[c] for c in cover])
    pos = np.array([cover.index(mapping[h]) for h in range(len(hclass))])
    extended = on_cover[np.ix_(pos, pos)]

    return find_realizing(family, hclass, extended, range(len(hclass)), eps / 2)


def etv_to_ue(
    etv: Callable[[UnlabeledSample], Distribution],
    cover_source: Callable[[Distribution], CoverMapPair],
    unlabeled: UnlabeledSample,
    sample: LabeledSample,
    hclass: HypothesisClass,
) -> np.ndarray:
    """Uniform estimator ``E_S(h) = err_S(c_{D'}(h))`` with ``D'`` from the ETV learner."""
    nearby = etv(unlabeled)
    cover = cover_source(nearby)
    reps = list(cover.cover)
    errs = dict(zip(reps, empirical_errors(sample, [hclass[c] for c in reps]) / len(sample)))
    return np.array([errs[cover(h)] for h in range(len(hclass))])


def etv_to_ue_sample_size(eps: float, delta: float, cover_size: int) -> int:
    return math.ceil((8 / eps**2) * (math.log(cover_size) + math.log(2 / delta)))


# ---------------------------------------------------------------------------
# Confident learners on the noisy cube


def confident_from_stv(estimate: DistanceEstimate, n: int, rng: np.random.Generator) -> ConfidentOutput:
    """Guess the bit of the first good dictator, then propagate by the 1/2 threshold."""
    out = np.full(n, BOT, dtype=np.int8)
    good = sorted(estimate.known_good or ())
    if not good:
        return ConfidentOutput(out)
    anchor = good[0]
    guess = int(rng.integers(0, 2))
    out[anchor] = guess
    for j in good[1:]:
        out[j] = guess if estimate(anchor, j) < 0.5 else 1 - guess
    return ConfidentOutput(out)


def noisy_majority_confident(sample: UnlabeledSample) -> ConfidentOutput:
    """Abstain on the ``n/2`` coordinates whose empirical mean is nearest 1/2
    (lowest index first among ties); majority bit elsewhere (ties give 0)."""
    m = len(sample)
    if m < 1:
        raise ValueError("noisy majority needs a nonempty sample")
    n = sample.dim
    if n % 2:
        raise ValueError("noisy majority needs an even dimension")
    ones = sample.columns(range(n)).sum(axis=0, dtype=np.int64)
    # integer distance from one half, |2*ones - m|, avoids float ties
    noise = np.abs(2 * ones - m)
    abstain = np.argsort(noise, kind="stable")[: (n + 1) // 2]
    out = (2 * ones > m).astype(np.int8)
    out[abstain] = BOT
    return ConfidentOutput(out)


@dataclass(frozen=True)
class LowerBoundParams:
    t_threshold: int
    conditions_met: bool


def lower_bound_params(n: int, rho: float) -> LowerBoundParams:
    """``t = floor(2 log2 n / (5 log2(1/rho)))`` and whether ``rho > 12 log2(1/rho) / log2 n``."""
    if n <= 2:
        raise ValueError("n must exceed 2")
    if not 0 < rho < 0.5:
        raise ValueError("rho must lie in (0, 1/2)")
    log_n = math.log2(n)
    log_inv = math.log2(1 / rho)
    return LowerBoundParams(math.floor(2 * log_n / (5 * log_inv)), rho > 12 * log_inv / log_n)

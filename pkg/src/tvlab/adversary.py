"""Randomized adversaries from the lower bounds, consistency sets and exact posteriors."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .classes import CategoricalInstance
from .core import Distribution, Hypothesis, LabeledSample, NoisyCube, dictator


@dataclass(frozen=True)
class AdversaryDraw:
    distribution: Distribution
    target: Hypothesis
    index: int


def uniform_cube_adversary(n: int, rho: float, rng: np.random.Generator, target: int = 0) -> AdversaryDraw:
    """Uniform center ``x`` on the cube; ``index`` is ``x`` read as a big-endian integer.

    The target dictator is fixed (``target``): the confident-learning
    experiments only look at the marginal.
    """
    if n < 1:
        raise ValueError("dimension must be at least 1")
    center = rng.integers(0, 2, size=n, dtype=np.uint8)
    index = int.from_bytes(np.packbits(center).tobytes(), "big") >> ((-n) % 8)
    return AdversaryDraw(NoisyCube(center, rho), dictator(target), index)


def adversary_weights(inst: CategoricalInstance, t: int) -> np.ndarray:
    """Prior ``Pr[i] ∝ eps_i^t``, normalized in log space."""
    if t < 1:
        raise ValueError("sample budget must be at least 1")
    logw = t * np.log(inst.rates)
    return np.exp(logw - logsumexp(logw))


def weighted_categorical_adversary(inst: CategoricalInstance, t: int, rng: np.random.Generator) -> AdversaryDraw:
    weights = adversary_weights(inst, t)
    i = int(rng.choice(inst.n, p=weights))
    return AdversaryDraw(inst.distribution(i), inst.hypotheses[i], i)


@dataclass(frozen=True)
class ConsistencySet:
    members: frozenset

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, j) -> bool:
        return j in self.members


def consistency_set(sample: LabeledSample, inst: CategoricalInstance) -> ConsistencySet:
    """Indices ``j`` such that every example has ``x_j ∈ {0,1}`` (support of ``D_j``)
    and ``f_j(x) = y``."""
    if len(sample) == 0:
        return ConsistencySet(frozenset(range(inst.n)))
    x = sample.points.columns(range(inst.n))
    y = sample.labels[:, None].astype(bool)
    ok = (x <= 1) & ((x == 0) == y)
    return ConsistencySet(frozenset(int(j) for j in np.flatnonzero(ok.all(axis=0))))


def posterior_log_weights(members, inst: CategoricalInstance, t: int) -> np.ndarray:
    """Unnormalized log posterior of each adversary choice given ``E_W``.

    For ``j`` in ``W``: prior ``eps_j^t`` times ``Pr[E_W | j]``, i.e. the
    product of ``eps_i^t`` over ``W \\ {j}`` and ``1 - eps_i^t`` outside
    ``W``.  Indices outside ``W`` get ``-inf``.
    """
    w = sorted(members)
    if not w:
        raise ValueError("posterior needs a nonempty consistency set")
    log_eps_t = t * np.log(inst.rates)
    outside = np.ones(inst.n, dtype=bool)
    outside[w] = False
    log_miss = math.fsum(np.log1p(-np.exp(log_eps_t[outside])))
    out = np.full(inst.n, -np.inf)
    for j in w:
        others = math.fsum(log_eps_t[i] for i in w if i != j)
        out[j] = log_eps_t[j] + others + log_miss
    return out


def exact_posterior(members, inst: CategoricalInstance, t: int) -> np.ndarray:
    """Posterior over ``[n]`` given ``E_W``; uniform on ``W`` because every
    log weight is the same sum taken in a different order."""
    if isinstance(members, ConsistencySet):
        members = members.members
    logw = posterior_log_weights(members, inst, t)
    return np.exp(logw - logsumexp(logw))


@dataclass(frozen=True)
class MultiConsistency:
    exact: float
    bound: float


def multi_consistency_probability(inst: CategoricalInstance, i: int, t: int) -> MultiConsistency:
    """``Pr[|W| = 1 | i] = prod_{j != i} (1 - eps_j^t)`` and its ``exp(-sum eps_j^t)`` bound."""
    if t < 1:
        raise ValueError("sample budget must be at least 1")
    p = np.delete(inst.rates, i) ** t
    return MultiConsistency(math.exp(math.fsum(np.log1p(-p))), math.exp(-math.fsum(p)))


def crossing_truncation(t: int, target: float = math.log(2), limit: int = 10**7) -> int:
    """Smallest ``n`` with ``sum_{j=1}^{n-1} eps_j^t >= target`` (1-based rates)."""
    total, n = 0.0, 1
    while total < target:
        if n > limit:
            raise ValueError("partial sums did not reach the target")
        total += (1 / math.log2(n + 255)) ** t
        n += 1
    return n


def mixture_multi_consistency(inst: CategoricalInstance, t: int) -> float:
    """``Pr[|W| >= 2]`` with the index drawn from the weighted adversary."""
    weights = adversary_weights(inst, t)
    return math.fsum(w * (1 - multi_consistency_probability(inst, i, t).exact) for i, w in enumerate(weights))


@dataclass(frozen=True)
class FlipEvents:
    flip_probability: float
    extreme_expectation: float
    extreme_bound: float
    extreme_exp_bound: float


def flip_event_probability(n: int, rho: float, t: int) -> FlipEvents:
    """Closed forms for the two failure events of noisy majority.

    ``flip_probability``: some coordinate flipped in all ``t`` samples,
    ``1 - (1 - rho^t)^n``.  ``extreme_expectation``: expected number of
    coordinates whose ``t`` bits all agree, ``n (rho^t + (1-rho)^t)``, next to
    the looser ``2n(1-rho)^t`` and ``2n e^{-rho t}``.
    """
    if n < 1 or t < 1:
        raise ValueError("n and t must be positive")
    if not 0 <= rho <= 0.5:
        raise ValueError("rho must lie in [0, 1/2]")
    p = rho**t
    if p == 0:
        flip = 0.0
    elif p == 1:
        flip = 1.0
    else:
        flip = -math.expm1(n * math.log1p(-p))
    return FlipEvents(
        flip,
        n * (p + (1 - rho) ** t),
        2 * n * (1 - rho) ** t,
        2 * n * math.exp(-rho * t),
    )

"""Seeded Monte Carlo trials and Wilson failure-rate estimates.

Every trial gets its own generator, seeded by a 128-bit BLAKE2b digest of
``(experiment name, master seed, trial index)``.  Reports therefore do not
depend on execution order or on how many workers ran them.
"""

from __future__ import annotations

import hashlib
import logging
import math
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

log = logging.getLogger(__name__)

Z95 = 1.96

Experiment = Callable[[np.random.Generator], "tuple[bool, Mapping[str, float]]"]


@dataclass(frozen=True)
class TrialReport:
    index: int
    seed: int
    success: bool
    metrics: dict = field(default_factory=dict)
    error: str | None = None


@dataclass(frozen=True)
class RateEstimate:
    count: int
    trials: int
    point: float
    lower: float
    upper: float

    def as_dict(self) -> dict:
        return {"count": self.count, "trials": self.trials, "point": self.point,
                "lower": self.lower, "upper": self.upper}


def trial_seed(master_seed: int, index: int, name: str = "") -> int:
    """128-bit seed material for one trial."""
    payload = f"{name}\x00{int(master_seed)}\x00{int(index)}".encode()
    return int.from_bytes(hashlib.blake2b(payload, digest_size=16).digest(), "big")


def trial_rng(master_seed: int, index: int, name: str = "") -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(trial_seed(master_seed, index, name)))


def _run_one(experiment: Experiment, master_seed: int, index: int, name: str) -> TrialReport:
    seed = trial_seed(master_seed, index, name)
    rng = np.random.Generator(np.random.PCG64(seed))
    try:
        success, metrics = experiment(rng)
    except Exception as exc:  # a failing trial is recorded, never fatal
        log.debug("trial %d failed:\n%s", index, traceback.format_exc())
        return TrialReport(index, seed, False, {}, f"{type(exc).__name__}: {exc}")
    return TrialReport(index, seed, bool(success), {k: float(v) for k, v in metrics.items()})


def _run_chunk(experiment, master_seed, indices, name):
    return [_run_one(experiment, master_seed, i, name) for i in indices]


def run_trials(
    experiment: Experiment,
    trials: int,
    master_seed: int,
    name: str = "",
    workers: int = 1,
) -> list[TrialReport]:
    """Run ``trials`` seeded trials; reports come back in index order.

    ``experiment(rng)`` returns ``(success, metrics)``.  With ``workers > 1``
    the experiment must be picklable (a module-level function or a
    ``functools.partial`` of one).
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    if workers <= 1 or trials < 2:
        return _run_chunk(experiment, master_seed, range(trials), name)
    chunks = [range(start, trials, workers) for start in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(_run_chunk, [experiment] * workers, [master_seed] * workers, chunks, [name] * workers)
        reports = [r for part in parts for r in part]
    return sorted(reports, key=lambda r: r.index)


def wilson_interval(count: int, trials: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("need at least one trial")
    p = count / trials
    denom = 1 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    margin = z / denom * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
    return max(0.0, center - margin), min(1.0, center + margin)


def rate(count: int, trials: int) -> RateEstimate:
    lower, upper = wilson_interval(count, trials)
    point = count / trials
    # clamp so rounding in the interval never excludes the point estimate
    return RateEstimate(count, trials, point, min(lower, point), max(upper, point))


def event_rate(flags: Iterable[bool]) -> RateEstimate:
    flags = list(flags)
    if not flags:
        raise ValueError("no observations")
    return rate(sum(bool(f) for f in flags), len(flags))


def failure_rate(reports: Iterable[TrialReport]) -> RateEstimate:
    """Wilson 95% interval on the fraction of failed trials."""
    return event_rate(not r.success for r in reports)


def success_rate(reports: Iterable[TrialReport]) -> RateEstimate:
    return event_rate(r.success for r in reports)

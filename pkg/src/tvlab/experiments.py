"""Experiment definitions behind the command-line subcommands.

Each experiment declares its parameters (with defaults and range checks)
and a runner ``run(config, workers) -> ExperimentResult``.  Trial functions
are module-level so they can be shipped to worker processes.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, partial
from typing import Callable

import numpy as np

from .adversary import (
    consistency_set,
    crossing_truncation,
    exact_posterior,
    mixture_multi_consistency,
    flip_event_probability,
    uniform_cube_adversary,
    weighted_categorical_adversary,
)
from .classes import (
    BenedekItaiInstance,
    CategoricalInstance,
    ExampleOracle,
    NoisyCubeInstance,
    categorical_distance_closed_form,
    cube_distance_closed_form,
    label,
)
from .core import (
    EXACT_TOL,
    NoisyCube,
    brute_force_distance_matrix,
    dictator_class,
    distance_matrix,
    exact_distance,
    growth_count,
    tv_class_conditional,
)
from .covers import canonical_cover_bound, categorical_canonical_cover, entropy_profile, greedy_cover
from .harness import TrialReport, event_rate, failure_rate, rate, run_trials, success_rate, trial_rng
from .learners import (
    ExactSTV,
    categorical_good_set,
    categorical_wtv_learner,
    categorical_wtv_sample_size,
    chernoff_size,
    empirical_error_estimator,
    empirical_zero_rates,
    erm,
    etv_to_ue,
    etv_to_ue_sample_size,
    majority_constant_learner,
    majority_sample_size,
    noisy_majority_confident,
    pac_cover_good_set,
    pac_to_wtv,
    pac_to_wtv_second_size,
    stv_to_pac,
    ue_to_etv,
)


class ConfigError(ValueError):
    """A configuration value is malformed or violates a precondition."""


# ---------------------------------------------------------------------------
# Parameters


def parse_real(text: str) -> float:
    """Decimal or fraction literal (``0.25``, ``1/8``)."""
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"not a number: {text!r}") from exc


def parse_int(text: str) -> int:
    value = parse_real(text)
    if value != int(value):
        raise ConfigError(f"not an integer: {text!r}")
    return int(value)


def parse_reals(text: str) -> tuple[float, ...]:
    return tuple(parse_real(t) for t in str(text).split(",") if t.strip())


def parse_ints(text: str) -> tuple[int, ...]:
    return tuple(parse_int(t) for t in str(text).split(",") if t.strip())


def format_value(value) -> str:
    if isinstance(value, tuple):
        return ",".join(format_value(v) for v in value)
    return repr(value) if isinstance(value, float) else str(value)


@dataclass(frozen=True)
class Param:
    default: object
    parse: Callable[[str], object]
    check: Callable[[object], bool] = lambda v: True
    requirement: str = ""
    help: str = ""


def _positive(v) -> bool:
    return v >= 1


def _unit_open(v) -> bool:
    return 0 < v < 1


def _common(trials: int) -> dict[str, Param]:
    return {
        "trials": Param(trials, parse_int, _positive, "trials >= 1", "number of seeded trials"),
        "seed": Param(0, parse_int, lambda v: v >= 0, "seed >= 0", "master seed"),
    }


@dataclass(frozen=True)
class ExperimentResult:
    records: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


@dataclass(frozen=True)
class Experiment:
    name: str
    description: str
    params: dict
    run: Callable[[dict, int], ExperimentResult]
    complete: Callable[[dict], None] = lambda cfg: None

    def resolve(self, overrides: dict) -> dict:
        """Defaults overlaid with string or typed overrides, parsed and range-checked.

        ``complete`` then runs cross-key checks and fills derived values
        (keys left at 0 meaning "derive"), so the result is the full config.
        """
        unknown = set(overrides) - set(self.params)
        if unknown:
            raise ConfigError(f"unknown key(s) for {self.name}: {', '.join(sorted(unknown))}")
        cfg = {}
        for key, param in self.params.items():
            value = overrides.get(key, param.default)
            if isinstance(value, str):
                try:
                    value = param.parse(value)
                except ConfigError as exc:
                    raise ConfigError(f"{key}: {exc}") from None
            if not param.check(value):
                raise ConfigError(f"{key} = {format_value(value)} violates: {param.requirement}")
            cfg[key] = value
        self.complete(cfg)
        return cfg


def _trial_records(reports: list[TrialReport]) -> list[dict]:
    return [
        {
            "record": "trial",
            "index": r.index,
            "seed": f"{r.seed:032x}",
            "success": r.success,
            "metrics": dict(sorted(r.metrics.items())),
            "error": r.error,
        }
        for r in reports
    ]


def _metric(reports, name: str, default: float = 0.0) -> np.ndarray:
    return np.array([r.metrics.get(name, default) for r in reports], dtype=float)


def _all_ran(reports) -> bool:
    return all(r.error is None for r in reports)


# ---------------------------------------------------------------------------
# verify-distances


def _cube_centers(n: int, seed: int) -> list[np.ndarray]:
    rng = trial_rng(seed, n, "verify-distances/centers")
    return [
        np.zeros(n, dtype=np.uint8),
        (np.arange(n) % 2).astype(np.uint8),
        rng.integers(0, 2, size=n, dtype=np.uint8),
    ]


def _sizes(n: int) -> list[int]:
    return sorted({s for s in (4, 8, 12) if s < n} | {n})


def run_verify_distances(cfg: dict, workers: int = 1) -> ExperimentResult:
    records = []
    worst = 0.0
    for n in _sizes(cfg["n"]):
        hclass = dictator_class(n)
        for rho in cfg["rho"]:
            for center in _cube_centers(n, cfg["seed"]):
                dist = NoisyCube(center, rho)
                brute = brute_force_distance_matrix(dist, hclass)
                fast = distance_matrix(dist, hclass)
                for i in range(n):
                    for j in range(i + 1, n):
                        closed = cube_distance_closed_form(center, rho, i, j)
                        gap = max(abs(closed - brute[i, j]), abs(fast[i, j] - brute[i, j]))
                        worst = max(worst, gap)
                        records.append({
                            "record": "quantity", "family": "cube", "n": n, "rho": rho,
                            "center": "".join(map(str, center)), "i": i, "j": j,
                            "closed": closed, "brute": float(brute[i, j]), "abs_diff": gap,
                        })
    for n in _sizes(min(cfg["n"], cfg["categorical_max"])):
        inst = CategoricalInstance(n)
        for special in range(n):
            dist = inst.distribution(special)
            brute = brute_force_distance_matrix(dist, inst.hypotheses)
            fast = distance_matrix(dist, inst.hypotheses)
            for j in range(n):
                for k in range(j + 1, n):
                    closed = categorical_distance_closed_form(inst, special, j, k)
                    gap = max(abs(closed - brute[j, k]), abs(fast[j, k] - brute[j, k]))
                    worst = max(worst, gap)
                    records.append({
                        "record": "quantity", "family": "categorical", "n": n, "special": special,
                        "i": j, "j": k, "closed": closed, "brute": float(brute[j, k]), "abs_diff": gap,
                    })
    summary = {"pairs": len(records), "max_abs_diff": worst}
    return ExperimentResult(records, summary, {"closed_matches_brute": worst <= EXACT_TOL})


# ---------------------------------------------------------------------------
# majority-learner


def majority_trial(rng: np.random.Generator, n: int, rho: float, m: int):
    inst = NoisyCubeInstance(n, rho)
    dist = inst.distribution(rng.integers(0, 2, size=n, dtype=np.uint8))
    target = inst.hypotheses[int(rng.integers(n))]
    learned = majority_constant_learner(ExampleOracle(dist, target, rng).labeled(m))
    error = exact_distance(dist, learned, target)
    return error <= rho + EXACT_TOL, {"error": error, "constant": learned.value}


def run_majority(cfg: dict, workers: int = 1) -> ExperimentResult:
    m = cfg["m"]
    trial = partial(majority_trial, n=cfg["n"], rho=cfg["rho"], m=m)
    reports = run_trials(trial, cfg["trials"], cfg["seed"], "majority-learner", workers)
    succ = success_rate(reports)
    summary = {"sample_size": m, "success": succ.as_dict(), "failure": failure_rate(reports).as_dict()}
    checks = {"success_at_least_0.90": succ.point >= 0.90 and _all_ran(reports)}
    return ExperimentResult(_trial_records(reports), summary, checks)


# ---------------------------------------------------------------------------
# confident-fail


def confident_fail_trial(rng: np.random.Generator, n: int, rho: float, t: int):
    draw = uniform_cube_adversary(n, rho, rng)
    center = draw.distribution.center
    sample = draw.distribution.sample(t, rng)
    pts = sample.points
    differs = pts != center
    flip = bool(differs.all(axis=0).any())
    extreme = int((pts.all(axis=0) | ~pts.any(axis=0)).sum())
    out = noisy_majority_confident(sample)
    mask = out.labeled
    wrong = int(np.count_nonzero(out.values[mask] != center[mask]))
    return out.succeeds_on(center), {"flip": float(flip), "extreme": extreme, "labeled": int(mask.sum()), "wrong": wrong}


def run_confident_fail(cfg: dict, workers: int = 1) -> ExperimentResult:
    n, rho, t = cfg["n"], cfg["rho"], cfg["t"]
    trial = partial(confident_fail_trial, n=n, rho=rho, t=t)
    reports = run_trials(trial, cfg["trials"], cfg["seed"], "confident-fail", workers)
    closed = flip_event_probability(n, rho, t)
    flips = event_rate(_metric(reports, "flip") > 0)
    se = math.sqrt(closed.flip_probability * (1 - closed.flip_probability) / len(reports))
    fail = failure_rate(reports)
    records = [
        {"record": "quantity", "name": "flip_probability", "closed_form": closed.flip_probability,
         "empirical": flips.point, "standard_error": se},
        {"record": "quantity", "name": "extreme_count", "closed_form": closed.extreme_expectation,
         "empirical": float(_metric(reports, "extreme").mean()),
         "upper_bound": closed.extreme_bound, "exp_bound": closed.extreme_exp_bound},
    ]
    summary = {"failure": fail.as_dict(), "flip": flips.as_dict(), "flip_closed_form": closed.flip_probability}
    checks = {
        "flip_within_3se": abs(flips.point - closed.flip_probability) <= 3 * se + EXACT_TOL,
        "failure_at_least_0.85": fail.point >= 0.85 and _all_ran(reports),
    }
    return ExperimentResult(records + _trial_records(reports), summary, checks)


def _confident_validate(cfg):
    if cfg["n"] % 2:
        raise ConfigError(f"n = {cfg['n']} violates: noisy majority needs an even dimension")


# ---------------------------------------------------------------------------
# stv-to-pac


@lru_cache(maxsize=8)
def _cube_family(n: int, rho: float) -> tuple:
    return tuple(NoisyCubeInstance(n, rho).family())


def stv_to_pac_trial(rng: np.random.Generator, n: int, rho: float, eps: float, delta: float, stv_size: int):
    inst = NoisyCubeInstance(n, rho)
    hclass = inst.hypotheses
    dist = inst.distribution(rng.integers(0, 2, size=n, dtype=np.uint8))
    target = hclass[int(rng.integers(n))]
    oracle = ExampleOracle(dist, target, rng)
    learned = stv_to_pac(ExactSTV(dist, hclass), _cube_family(n, rho), hclass, eps, delta, oracle, stv_size)
    error = exact_distance(dist, learned, target)
    return error <= eps + EXACT_TOL, {"error": error, "learned": learned.id, "target": target.id}


def run_stv_to_pac(cfg: dict, workers: int = 1) -> ExperimentResult:
    n, eps, delta = cfg["n"], cfg["eps"], cfg["delta"]
    stv_size = chernoff_size(eps / 4, delta / 2, n * n)
    trial = partial(stv_to_pac_trial, n=n, rho=cfg["rho"], eps=eps, delta=delta, stv_size=stv_size)
    reports = run_trials(trial, cfg["trials"], cfg["seed"], "stv-to-pac", workers)
    succ = success_rate(reports)
    summary = {"stv_sample_size": stv_size, "success": succ.as_dict()}
    return ExperimentResult(_trial_records(reports), summary, {"success_at_least_0.90": succ.point >= 0.90})


# ---------------------------------------------------------------------------
# wtv-exact


@lru_cache(maxsize=8)
def _categorical(n: int) -> CategoricalInstance:
    return CategoricalInstance(n)


@lru_cache(maxsize=8)
def _categorical_truth(n: int, special: int) -> np.ndarray:
    out = _categorical(n).distance_matrix(special)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=64)
def _categorical_distribution(n: int, special: int):
    return _categorical(n).distribution(special)


def wtv_exact_trial(rng: np.random.Generator, n: int, special: int, m: int):
    inst = _categorical(n)
    sample = _categorical_distribution(n, special).sample(m, rng)
    rates = empirical_zero_rates(inst, sample)
    estimate = categorical_wtv_learner(inst, sample, rates)
    good = sorted(categorical_good_set(inst, special, sample, rates))
    truth = _categorical_truth(n, special)
    if len(good) < n:
        truth = truth[np.ix_(good, good)]
    error = 0.0
    if good:
        values = estimate.matrix(None if len(good) == n else good)
        # exact equality is the common case and avoids a full float pass
        if not np.array_equal(values, truth):
            error = float(np.abs(values - truth).max())
    metrics = {"good_size": len(good), "max_error": error}
    missing = np.setdiff1d(np.arange(n), good)
    metrics.update({f"excluded_{j}": 1.0 for j in missing})
    return error == 0.0, metrics


def run_wtv_exact(cfg: dict, workers: int = 1) -> ExperimentResult:
    n, special = cfg["n"], cfg["special"]
    m = cfg["m"]
    trial = partial(wtv_exact_trial, n=n, special=special, m=m)
    reports = run_trials(trial, cfg["trials"], cfg["seed"], "wtv-exact", workers)

    inst = _categorical(n)
    core_gap = float(np.abs(_categorical_truth(n, special)
                            - distance_matrix(inst.distribution(special), inst.hypotheses)).max())
    excluded = Counter(key for r in reports for key in r.metrics if key.startswith("excluded_"))
    membership = [rate(len(reports) - excluded[f"excluded_{j}"], len(reports)) for j in range(n)]
    worst = min(range(n), key=lambda j: (membership[j].lower, j))
    records = [{"record": "quantity", "name": "membership", "j": j, **membership[j].as_dict()} for j in range(n)]
    records.append({"record": "quantity", "name": "closed_vs_exact_max_gap", "value": core_gap})
    summary = {
        "sample_size": m,
        "zero_error": success_rate(reports).as_dict(),
        "worst_member": worst,
        "worst_membership": membership[worst].as_dict(),
    }
    checks = {
        "zero_error_every_trial": all(r.success for r in reports),
        "membership_at_least_0.95": all(r.point >= 0.95 for r in membership),
        "membership_lower_at_least_0.94": all(r.lower >= 0.94 for r in membership),
        "closed_form_matches_exact": core_gap <= EXACT_TOL,
    }
    return ExperimentResult(records + _trial_records(reports), summary, checks)


def _complete_wtv_exact(cfg):
    if not 0 <= cfg["special"] < cfg["n"]:
        raise ConfigError(f"special = {cfg['special']} violates: 0 <= special < n")
    cfg["m"] = cfg["m"] or categorical_wtv_sample_size(cfg["delta"])


def _complete_majority(cfg):
    cfg["m"] = cfg["m"] or majority_sample_size(cfg["delta"])


def _complete_adversary(cfg):
    cfg["n"] = cfg["n"] or crossing_truncation(cfg["t"])


# ---------------------------------------------------------------------------
# wtv-adversary


def wtv_adversary_trial(rng: np.random.Generator, n: int, t: int):
    inst = _categorical(n)
    draw = weighted_categorical_adversary(inst, t, rng)
    sample = ExampleOracle(draw.distribution, draw.target, rng).labeled(t)
    members = consistency_set(sample, inst)
    post = exact_posterior(members, inst, t)
    uniform = np.zeros(n)
    uniform[sorted(members.members)] = 1 / len(members)
    deviation = float(np.abs(post - uniform).max())
    learned = erm(sample, inst.hypotheses)
    erm_error = 0.0 if learned.id == draw.index else categorical_distance_closed_form(inst, draw.index, learned.id, draw.index)
    pick = min(members.members)
    consistent_error = 0.0 if pick == draw.index else 0.5
    in_w = draw.index in members
    metrics = {
        "index": draw.index,
        "w_size": len(members),
        "multi": float(len(members) >= 2),
        "posterior_deviation": deviation,
        "erm_error": erm_error,
        "erm_fail": float(erm_error >= 0.25),
        "consistent_error": consistent_error,
        "in_w": float(in_w),
    }
    return deviation <= EXACT_TOL and in_w, metrics


def run_wtv_adversary(cfg: dict, workers: int = 1) -> ExperimentResult:
    t, n = cfg["t"], cfg["n"]
    inst = CategoricalInstance(n)
    trial = partial(wtv_adversary_trial, n=n, t=t)
    reports = run_trials(trial, cfg["trials"], cfg["seed"], "wtv-adversary", workers)
    multi = event_rate(_metric(reports, "multi") > 0)
    erm_fail = event_rate(_metric(reports, "erm_fail") > 0)
    multi_reports = [r for r in reports if r.metrics.get("multi")]
    conditional = event_rate(r.metrics["consistent_error"] > 0 for r in multi_reports) if multi_reports else None
    exact_multi = mixture_multi_consistency(inst, t)
    partial_sum = math.fsum(e**t for e in inst.rates[: n - 1])
    records = [
        {"record": "quantity", "name": "truncation", "n": n, "partial_sum": partial_sum},
        {"record": "quantity", "name": "multi_consistency", "exact": exact_multi, "empirical": multi.point},
    ]
    summary = {
        "n": n,
        "posterior_uniform": success_rate(reports).as_dict(),
        "multi": multi.as_dict(),
        "multi_exact": exact_multi,
        "erm_fail": erm_fail.as_dict(),
        "consistent_conditional_error": None if conditional is None else conditional.as_dict(),
    }
    checks = {
        "posterior_uniform_every_trial": all(r.success for r in reports),
        "multi_at_least_0.45": multi.point >= 0.45,
        "erm_fail_at_least_0.20": erm_fail.point >= 0.20,
    }
    return ExperimentResult(records + _trial_records(reports), summary, checks)


# ---------------------------------------------------------------------------
# cover-profile


def run_cover_profile(cfg: dict, workers: int = 1) -> ExperimentResult:
    inst = CategoricalInstance(cfg["n"])
    hclass = inst.hypotheses
    records = []
    ok = True
    for special in cfg["specials"]:
        dist = inst.distribution(special)
        exact = distance_matrix(dist, hclass)
        profile = entropy_profile(dist, hclass, cfg["eps_grid"])
        for eps, greedy in zip(profile.eps, profile.covers):
            canon = categorical_canonical_cover(inst, special, eps)
            bound = canonical_cover_bound(eps)
            row = {
                "record": "quantity", "special": special, "eps": eps,
                "canonical_size": len(canon), "bound": bound,
                "canonical_radius": canon.max_radius(exact), "canonical_valid": canon.is_valid(exact),
                "greedy_size": len(greedy), "greedy_radius": greedy.max_radius(exact),
                "greedy_valid": greedy.is_valid(exact),
            }
            ok &= (row["canonical_size"] <= bound and row["canonical_valid"] and row["greedy_valid"]
                   and row["greedy_size"] <= row["canonical_size"])
            records.append(row)
    sizes = {f"{r['special']}@{format_value(r['eps'])}": [r["canonical_size"], r["greedy_size"]] for r in records}
    return ExperimentResult(records, {"sizes_canonical_greedy": sizes}, {"covers_valid_and_bounded": ok})


def _specials_in_range(cfg):
    if any(not 0 <= s < cfg["n"] for s in cfg["specials"]):
        raise ConfigError("specials violates: every special index lies in [0, n)")


# ---------------------------------------------------------------------------
# ue-etv-roundtrip


def ue_etv_trial(rng: np.random.Generator, n: int, rho: float, eps: float, delta: float):
    inst = NoisyCubeInstance(n, rho)
    hclass = inst.hypotheses
    dist = inst.distribution(rng.integers(0, 2, size=n, dtype=np.uint8))
    target = hclass[int(rng.integers(n))]
    oracle = ExampleOracle(dist, target, rng)

    nearby = ue_to_etv(empirical_error_estimator(hclass), _cube_family(n, rho), hclass, eps, delta, oracle)
    tv = tv_class_conditional(dist, nearby, hclass)

    def cover_source(d):
        return greedy_cover(d, hclass, eps / 4)

    m = etv_to_ue_sample_size(eps, delta, len(cover_source(dist)))
    estimates = etv_to_ue(lambda _: dist, cover_source, oracle.unlabeled(1), oracle.labeled(m), hclass)
    truth = distance_matrix(dist, hclass)[target.id]
    ue_gap = float(np.abs(estimates - truth).max())
    forward, backward = tv <= eps + EXACT_TOL, ue_gap <= eps + EXACT_TOL
    metrics = {"tv": tv, "forward_ok": float(forward), "ue_gap": ue_gap, "backward_ok": float(backward)}
    return forward and backward, metrics


def run_ue_etv(cfg: dict, workers: int = 1) -> ExperimentResult:
    trial = partial(ue_etv_trial, n=cfg["n"], rho=cfg["rho"], eps=cfg["eps"], delta=cfg["delta"])
    reports = run_trials(trial, cfg["trials"], cfg["seed"], "ue-etv-roundtrip", workers)
    forward = event_rate(_metric(reports, "forward_ok") > 0)
    backward = event_rate(_metric(reports, "backward_ok") > 0)
    summary = {"ue_to_etv": forward.as_dict(), "etv_to_ue": backward.as_dict()}
    checks = {"ue_to_etv_at_least_0.90": forward.point >= 0.90, "etv_to_ue_at_least_0.90": backward.point >= 0.90}
    return ExperimentResult(_trial_records(reports), summary, checks)


# ---------------------------------------------------------------------------
# uc-fails


def uc_trial(rng: np.random.Generator, N: int, size: int):
    inst = BenedekItaiInstance(N)
    sample = label(inst.distribution.sample(size, rng), inst.all_ones)
    witness = inst.uc_witness(sample)
    empirical = float(np.count_nonzero(witness(sample.points) != sample.labels)) / size
    true_error = exact_distance(inst.distribution, witness, inst.all_ones)
    ok = empirical == 0.0 and true_error >= 1 - size / N - EXACT_TOL
    return ok, {"size": size, "empirical_error": empirical, "true_error": true_error}


def run_uc_fails(cfg: dict, workers: int = 1) -> ExperimentResult:
    records, summary, ok = [], {}, True
    for size in cfg["sizes"]:
        trial = partial(uc_trial, N=cfg["N"], size=size)
        reports = run_trials(trial, cfg["trials"], cfg["seed"], f"uc-fails/{size}", workers)
        records += [dict(rec, size=size) for rec in _trial_records(reports)]
        summary[str(size)] = {
            "witness_ok": success_rate(reports).as_dict(),
            "min_true_error": float(_metric(reports, "true_error").min()),
            "floor": 1 - size / cfg["N"],
        }
        ok &= all(r.success for r in reports)
    return ExperimentResult(records, summary, {"witness_every_sample": ok})


def _sizes_in_range(cfg):
    if any(not 1 <= s <= cfg["N"] for s in cfg["sizes"]):
        raise ConfigError("sizes violates: every sample size lies in [1, N]")


# ---------------------------------------------------------------------------
# pac-to-wtv


def _pairs(n: int, limit: int) -> list[tuple[int, int]]:
    return [(a, b) for a in range(n) for b in range(a + 1, n)][:limit]


def pac_to_wtv_trial(rng: np.random.Generator, n: int, rho: float, eps: float, delta: float, pairs: int):
    inst = NoisyCubeInstance(n, rho)
    hclass = inst.hypotheses
    dist = inst.distribution(rng.integers(0, 2, size=n, dtype=np.uint8))
    first = dist.sample(majority_sample_size(delta), rng)
    second = dist.sample(pac_to_wtv_second_size(eps, delta, growth_count(hclass, first)), rng)
    estimate = pac_to_wtv(majority_constant_learner, hclass, first, second)
    good = pac_cover_good_set(dist, hclass, estimate, eps)
    exact = distance_matrix(dist, hclass)
    metrics = {"good_size": len(good)}
    ok = 0
    for a, b in _pairs(n, pairs):
        hit = a in good and b in good and abs(estimate(a, b) - exact[a, b]) <= eps + EXACT_TOL
        ok += hit
        if not hit:
            metrics[f"pair_fail_{a}_{b}"] = 1.0
    metrics["pairs_ok"] = ok
    return ok == len(_pairs(n, pairs)), metrics


def run_pac_to_wtv(cfg: dict, workers: int = 1) -> ExperimentResult:
    n, delta = cfg["n"], cfg["delta"]
    trial = partial(pac_to_wtv_trial, n=n, rho=cfg["rho"], eps=cfg["eps"], delta=delta, pairs=cfg["pairs"])
    reports = run_trials(trial, cfg["trials"], cfg["seed"], "pac-to-wtv", workers)
    rates = {(a, b): event_rate(_metric(reports, f"pair_fail_{a}_{b}") == 0) for a, b in _pairs(n, cfg["pairs"])}
    records = [{"record": "quantity", "name": "pair_accuracy", "a": a, "b": b, **r.as_dict()} for (a, b), r in rates.items()]
    worst = min(rates, key=lambda k: (rates[k].point, k))
    summary = {"pairs": len(rates), "worst_pair": list(worst), "worst": rates[worst].as_dict(),
               "all_pairs": success_rate(reports).as_dict()}
    checks = {"each_pair_at_least_1-3delta": all(r.point >= 1 - 3 * delta for r in rates.values())}
    return ExperimentResult(records + _trial_records(reports), summary, checks)


# ---------------------------------------------------------------------------
# Registry


def _cube_params(n, rho, n_max=16):
    return {
        "n": Param(n, parse_int, lambda v: 2 <= v <= n_max, f"2 <= n <= {n_max}", "cube dimension"),
        "rho": Param(rho, parse_real, lambda v: 0 <= v < 0.5, "0 <= rho < 1/2", "noise rate"),
    }


def _eps_delta(eps, delta):
    return {
        "eps": Param(eps, parse_real, _unit_open, "0 < eps < 1", "accuracy"),
        "delta": Param(delta, parse_real, _unit_open, "0 < delta < 1", "confidence"),
    }


EXPERIMENTS: dict[str, Experiment] = {
    e.name: e
    for e in [
        Experiment(
            "verify-distances",
            "closed-form distances against full-enumeration brute force",
            {
                "n": Param(12, parse_int, lambda v: 2 <= v <= 16, "2 <= n <= 16", "largest dimension checked"),
                "rho": Param((0.0, 0.05, 0.25), parse_reals, lambda v: bool(v) and all(0 <= r < 0.5 for r in v),
                             "every rho in [0, 1/2)", "cube noise rates"),
                "categorical_max": Param(12, parse_int, lambda v: 2 <= v <= 12, "2 <= categorical_max <= 12",
                                         "largest categorical truncation"),
                "seed": Param(0, parse_int, lambda v: v >= 0, "seed >= 0", "master seed (random centers)"),
            },
            run_verify_distances,
        ),
        Experiment(
            "majority-learner",
            "majority-label constant learner on noisy-cube dictators",
            {**_cube_params(16, 0.1),
             "delta": Param(0.1, parse_real, _unit_open, "0 < delta < 1", "confidence"),
             "m": Param(0, parse_int, lambda v: v >= 0, "m >= 0", "sample size (0: ceil(48 ln(1/delta)))"),
             **_common(10_000)},
            run_majority,
            _complete_majority,
        ),
        Experiment(
            "confident-fail",
            "noisy-majority confident learner and its failure events",
            {
                "n": Param(100_000, parse_int, lambda v: v >= 2, "n >= 2", "cube dimension"),
                "rho": Param(0.3, parse_real, lambda v: 0 <= v <= 0.5, "0 <= rho <= 1/2", "noise rate"),
                "t": Param(3, parse_int, _positive, "t >= 1", "samples per trial"),
                **_common(500),
            },
            run_confident_fail,
            _confident_validate,
        ),
        Experiment(
            "stv-to-pac",
            "PAC learning through an exact strong-TV oracle",
            {**_cube_params(8, 0.05, n_max=10), **_eps_delta(0.3, 0.1), **_common(2000)},
            run_stv_to_pac,
        ),
        Experiment(
            "wtv-exact",
            "zero-error weak-TV learner on the categorical class",
            {
                "n": Param(512, parse_int, _positive, "n >= 1", "truncation"),
                "special": Param(0, parse_int, lambda v: v >= 0, "special >= 0", "index of the uniform coordinate"),
                "delta": Param(0.05, parse_real, _unit_open, "0 < delta < 1", "confidence"),
                "m": Param(0, parse_int, lambda v: v >= 0, "m >= 0", "sample size (0: ceil(72 ln(2/delta)))"),
                **_common(10_000),
            },
            run_wtv_exact,
            _complete_wtv_exact,
        ),
        Experiment(
            "wtv-adversary",
            "weighted categorical adversary: consistency sets, posteriors, ERM error",
            {
                "t": Param(2, parse_int, _positive, "t >= 1", "samples per trial"),
                "n": Param(0, parse_int, lambda v: v >= 0, "n >= 0", "truncation (0: derived crossing n)"),
                **_common(2000),
            },
            run_wtv_adversary,
            _complete_adversary,
        ),
        Experiment(
            "cover-profile",
            "canonical and greedy covers of the categorical class",
            {
                "n": Param(512, parse_int, _positive, "n >= 1", "truncation"),
                "eps_grid": Param((0.5, 0.25, 0.125), parse_reals,
                                  lambda v: bool(v) and all(0 < e <= 1 for e in v), "every eps in (0, 1]", "radii"),
                "specials": Param((0, 5, 511), parse_ints, bool, "at least one special index", "special indices"),
            },
            run_cover_profile,
            _specials_in_range,
        ),
        Experiment(
            "ue-etv-roundtrip",
            "uniform estimation to exact TV learning and back on a small cube",
            {**_cube_params(4, 0.05, n_max=8), **_eps_delta(0.3, 0.1), **_common(1000)},
            run_ue_etv,
        ),
        Experiment(
            "uc-fails",
            "uniform-convergence failure witness on a finite uniform domain",
            {
                "N": Param(10_000, parse_int, _positive, "N >= 1", "domain size"),
                "sizes": Param((10, 100), parse_ints, bool, "at least one sample size", "sample sizes"),
                **_common(200),
            },
            run_uc_fails,
            _sizes_in_range,
        ),
        Experiment(
            "pac-to-wtv",
            "weak-TV learning from a PAC learner's non-uniform cover",
            {**_cube_params(8, 0.05), **_eps_delta(0.3, 0.1),
             "pairs": Param(100, parse_int, _positive, "pairs >= 1", "number of fixed pairs checked"),
             **_common(2000)},
            run_pac_to_wtv,
        ),
    ]
}

"""End-to-end acceptance criteria, each run through the command-line tool.

Every criterion writes a flat config file, runs the matching subcommand in a
fresh interpreter, checks wall-clock time against its budget, and re-checks
the claims from the emitted records rather than trusting the summary alone.
"""

from __future__ import annotations

import json
import math
import subprocess
import sys
import time
from pathlib import Path

import pytest

from tvlab.adversary import crossing_truncation
from tvlab.covers import canonical_cover_bound
from tvlab.harness import wilson_interval

pytestmark = pytest.mark.acceptance

CONFIGS = {
    1: ("verify-distances", {"n": 12, "rho": "0,0.05,0.25", "categorical_max": 12, "seed": 0}),
    2: ("wtv-exact", {"n": 512, "special": 0, "delta": 0.05, "trials": 10_000, "seed": 0}),
    3: ("wtv-adversary", {"t": 2, "trials": 1000, "seed": 0}),
    4: ("wtv-adversary", {"t": 2, "trials": 2000, "seed": 0}),
    5: ("majority-learner", {"n": 16, "rho": 0.1, "delta": 0.1, "trials": 10_000, "seed": 0}),
    6: ("confident-fail", {"n": 100_000, "rho": 0.3, "t": 3, "trials": 500, "seed": 7}),
    7: ("stv-to-pac", {"n": 8, "rho": 0.05, "eps": 0.3, "delta": 0.1, "trials": 2000, "seed": 0}),
    8: ("ue-etv-roundtrip", {"n": 4, "rho": 0.05, "eps": 0.3, "delta": 0.1, "trials": 1000, "seed": 0}),
    9: ("cover-profile", {"n": 512, "eps_grid": "1/2,1/4,1/8", "specials": "0,5,511"}),
    10: ("uc-fails", {"N": 10_000, "sizes": "10,100", "trials": 200, "seed": 0}),
}

BUDGET_S = {1: 10, 2: 60, 3: 120, 4: 120, 5: 30, 6: 120, 7: 120, 8: 120, 9: 10, 10: 5}


class Run:
    def __init__(self, path: Path, returncode: int, elapsed: float, stderr: str):
        self.path = path
        self.returncode = returncode
        self.elapsed = elapsed
        self.stderr = stderr
        self.records = [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines()]

    def of(self, kind: str) -> list[dict]:
        return [r for r in self.records if r["record"] == kind]

    @property
    def header(self) -> dict:
        return self.records[0]

    @property
    def summary(self) -> dict:
        return self.records[-1]

    @property
    def trials(self) -> list[dict]:
        return self.of("trial")


def run_cli(workdir: Path, number: int, tag: str = "") -> Run:
    name, cfg = CONFIGS[number]
    config = workdir / f"criterion{number}{tag}.cfg"
    config.write_text("".join(f"{k} = {v}\n" for k, v in cfg.items()), encoding="utf-8")
    out = workdir / f"criterion{number}{tag}.jsonl"
    start = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "tvlab", name, "--config", str(config), "--out", str(out), "--workers", "1"],
        capture_output=True, text=True,
    )
    elapsed = time.perf_counter() - start
    assert proc.returncode in (0, 1), proc.stderr
    return Run(out, proc.returncode, elapsed, proc.stderr)


@pytest.fixture(scope="session")
def workdir(tmp_path_factory) -> Path:
    return tmp_path_factory.mktemp("acceptance")


_RUNS: dict[int, Run] = {}


@pytest.fixture(scope="session")
def runs(workdir):
    def get(number: int) -> Run:
        if number not in _RUNS:
            _RUNS[number] = run_cli(workdir, number)
        return _RUNS[number]

    return get


def _timed(run: Run, number: int) -> tuple[bool, str]:
    budget = BUDGET_S[number]
    return run.elapsed < budget, f"{run.elapsed:.1f} s, budget {budget} s"


def _verdict(criterion_log, number, title, checks: dict, run: Run):
    in_time, timing = _timed(run, number)
    checks = {**checks, "runtime": in_time}
    failed = [k for k, ok in checks.items() if not ok]
    detail = timing + ("" if not failed else "; failed: " + ", ".join(failed))
    criterion_log(number, title, not failed, detail)
    assert not failed, detail


def test_criterion_01_distance_oracle_equivalence(runs, criterion_log):
    run = runs(1)
    pairs = run.of("quantity")
    families = {(r["family"], r["n"]) for r in pairs}
    rhos = {r["rho"] for r in pairs if r["family"] == "cube"}
    checks = {
        "exit_0": run.returncode == 0,
        "covers_cube_and_categorical_up_to_12": {("cube", 12), ("categorical", 12)} <= families,
        "covers_all_rhos": rhos == {0.0, 0.05, 0.25},
        "every_pair_within_1e-12": all(abs(r["closed"] - r["brute"]) <= 1e-12 for r in pairs),
        "fast_path_within_1e-12": all(r["abs_diff"] <= 1e-12 for r in pairs),
    }
    _verdict(criterion_log, 1, "closed-form distances equal brute force within 1e-12", checks, run)


def test_criterion_02_zero_error_wtv(runs, criterion_log):
    run = runs(2)
    trials = run.trials
    members = [r for r in run.of("quantity") if r.get("name") == "membership"]
    worst = min(members, key=lambda r: r["count"])
    lower, _ = wilson_interval(worst["count"], worst["trials"])
    checks = {
        "exit_0": run.returncode == 0,
        "sample_size_ceil_72_ln_40": run.header["config"]["m"] == math.ceil(72 * math.log(40)),
        "10000_trials": len(trials) == 10_000,
        "zero_error_every_trial": all(t["metrics"]["max_error"] == 0.0 and t["success"] for t in trials),
        "all_512_indices_tracked": len(members) == 512,
        "each_member_frequency_at_least_0.95": worst["count"] / worst["trials"] >= 0.95,
        "each_member_wilson_lower_at_least_0.94": lower >= 0.94,
    }
    _verdict(criterion_log, 2, "zero-error WTV learner on its good set", checks, run)


def test_criterion_03_posterior_uniformity(runs, criterion_log):
    run = runs(3)
    trials = run.trials
    multi = sum(t["metrics"]["multi"] for t in trials) / len(trials)
    checks = {
        "exit_0": run.returncode == 0,
        "crossing_n": run.header["config"]["n"] == crossing_truncation(2) == 47,
        "1000_trials": len(trials) == 1000,
        "posterior_uniform_to_1e-12": all(t["metrics"]["posterior_deviation"] <= 1e-12 for t in trials),
        "true_index_consistent": all(t["metrics"]["in_w"] == 1.0 for t in trials),
        "multi_frequency_at_least_0.45": multi >= 0.45,
    }
    _verdict(criterion_log, 3, f"posterior uniform on W; Pr[|W|>=2] = {multi:.3f}", checks, run)


def test_criterion_04_erm_failure_under_adversary(runs, criterion_log):
    run = runs(4)
    trials = run.trials
    fail = sum(t["metrics"]["erm_error"] >= 0.25 for t in trials) / len(trials)
    checks = {
        "2000_trials": len(trials) == 2000,
        "same_parameters": run.header["config"]["t"] == 2 and run.header["config"]["n"] == 47,
        "erm_error_quarter_frequency_at_least_0.20": fail >= 0.20,
    }
    _verdict(criterion_log, 4, f"ERM error >= 1/4 with frequency {fail:.3f}", checks, run)


def test_criterion_05_majority_learner(runs, criterion_log):
    run = runs(5)
    trials = run.trials
    rho = run.header["config"]["rho"]
    ok = sum(t["metrics"]["error"] <= rho + 1e-12 for t in trials) / len(trials)
    checks = {
        "exit_0": run.returncode == 0,
        "sample_size_ceil_48_ln_10": run.header["config"]["m"] == math.ceil(48 * math.log(10)),
        "10000_trials": len(trials) == 10_000,
        "error_at_most_rho_frequency_at_least_0.90": ok >= 0.90,
    }
    _verdict(criterion_log, 5, f"majority learner error <= rho with frequency {ok:.4f}", checks, run)


def test_criterion_06_confident_learning_failure(runs, criterion_log):
    run = runs(6)
    trials = run.trials
    n, rho, t = (run.header["config"][k] for k in ("n", "rho", "t"))
    closed = 1 - (1 - rho**t) ** n
    freq = sum(tr["metrics"]["flip"] for tr in trials) / len(trials)
    se = math.sqrt(closed * (1 - closed) / len(trials))
    failure = sum(not tr["success"] for tr in trials) / len(trials)
    checks = {
        "exit_0": run.returncode == 0,
        "seed_7_and_500_trials": run.header["config"]["seed"] == 7 and len(trials) == 500,
        "flip_frequency_within_3se": abs(freq - closed) <= 3 * se + 1e-12,
        "noisy_majority_failure_at_least_0.85": failure >= 0.85,
    }
    _verdict(criterion_log, 6, f"flip freq {freq:.3f} vs {closed:.6f}; failure {failure:.3f}", checks, run)


def test_criterion_07_stv_to_pac(runs, criterion_log):
    run = runs(7)
    trials = run.trials
    eps = run.header["config"]["eps"]
    ok = sum(t["metrics"]["error"] <= eps + 1e-12 for t in trials) / len(trials)
    checks = {
        "exit_0": run.returncode == 0,
        "2000_trials": len(trials) == 2000,
        "error_at_most_eps_frequency_at_least_0.90": ok >= 0.90,
    }
    _verdict(criterion_log, 7, f"STV->PAC error <= eps with frequency {ok:.4f}", checks, run)


def test_criterion_08_ue_etv_round_trip(runs, criterion_log):
    run = runs(8)
    trials = run.trials
    eps = run.header["config"]["eps"]
    forward = sum(t["metrics"]["tv"] <= eps + 1e-12 for t in trials) / len(trials)
    backward = sum(t["metrics"]["ue_gap"] <= eps + 1e-12 for t in trials) / len(trials)
    checks = {
        "exit_0": run.returncode == 0,
        "1000_trials": len(trials) == 1000,
        "ue_to_etv_tv_at_most_0.3_frequency_at_least_0.90": eps == 0.3 and forward >= 0.90,
        "etv_to_ue_eps_accurate_frequency_at_least_0.90": backward >= 0.90,
    }
    _verdict(criterion_log, 8, f"UE->ETV {forward:.3f}, ETV->UE {backward:.3f}", checks, run)


def test_criterion_09_cover_bounds(runs, criterion_log):
    run = runs(9)
    rows = run.of("quantity")
    checks = {
        "exit_0": run.returncode == 0,
        "all_three_radii": {r["eps"] for r in rows} == {0.5, 0.25, 0.125},
        "canonical_within_bound": all(r["canonical_size"] <= canonical_cover_bound(r["eps"]) for r in rows),
        "canonical_valid": all(r["canonical_valid"] and r["canonical_radius"] <= r["eps"] + 1e-12 for r in rows),
        "greedy_valid": all(r["greedy_valid"] and r["greedy_radius"] <= r["eps"] + 1e-12 for r in rows),
        "greedy_no_larger": all(r["greedy_size"] <= r["canonical_size"] for r in rows),
    }
    _verdict(criterion_log, 9, "canonical covers bounded and valid; greedy no larger", checks, run)


def test_criterion_10_uc_failure_witness(runs, criterion_log):
    run = runs(10)
    trials = run.trials
    N = run.header["config"]["N"]
    checks = {
        "exit_0": run.returncode == 0,
        "both_sizes": {t["size"] for t in trials} == {10, 100},
        "empirical_error_zero": all(t["metrics"]["empirical_error"] == 0.0 for t in trials),
        "true_error_floor": all(t["metrics"]["true_error"] >= 1 - t["size"] / N - 1e-12 for t in trials),
    }
    _verdict(criterion_log, 10, "witness fits the sample yet has true error >= 1 - |S|/N", checks, run)


def test_criterion_11_determinism(runs, workdir, criterion_log):
    identical = {}
    for number in range(2, 9):
        first = runs(number)
        again = run_cli(workdir, number, tag="-rerun")
        identical[f"criterion_{number}"] = first.path.read_bytes() == again.path.read_bytes()
    failed = [k for k, ok in identical.items() if not ok]
    criterion_log(11, "reruns of criteria 2-8 are byte-identical", not failed,
                  "all identical" if not failed else "differ: " + ", ".join(failed))
    assert not failed

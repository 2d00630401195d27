"""Acceptance suite: one test per criterion at the full validation level."""

import subprocess
import sys
import time

import pytest

from pamlab import validation

SEED = 0


def _detail(res):
    return "\n".join(f"  {m}: {v} (threshold {t}, ok {ok})" for m, v, t, ok in res.rows)


def _check(res, report_criterion, budget_s=None):
    report_criterion(res.line() + f"  ({res.runtime_s:.1f} s)")
    assert res.passed, f"{res.line()}\n{_detail(res)}"
    if budget_s is not None:
        assert res.runtime_s < budget_s, f"criterion {res.cid} took {res.runtime_s:.1f} s > {budget_s} s"


def _run(cid):
    return validation.CRITERIA[cid]("full", SEED, 1)


def test_criterion_01_spectral_oracle(report_criterion):
    _check(_run(1), report_criterion, budget_s=30)


def test_criterion_02_green_path_expansion(report_criterion):
    _check(_run(2), report_criterion, budget_s=60)


def test_criterion_03_resolvent_identity(report_criterion):
    _check(_run(3), report_criterion)


def test_criterion_04_pde_cross_check(report_criterion):
    _check(_run(4), report_criterion)


def test_criterion_05_scaling_function(report_criterion):
    _check(_run(5), report_criterion, budget_s=300)


def test_criterion_06_zeta_sanity(report_criterion):
    _check(_run(6), report_criterion)


def test_criterion_07_saddle_point(report_criterion):
    _check(_run(7), report_criterion)


def test_criterion_08_extreme_values(report_criterion):
    _check(_run(8), report_criterion, budget_s=120)


def test_criterion_09_stable_pareto(report_criterion):
    _check(_run(9), report_criterion)


def test_criterion_10_stable_pam(report_criterion):
    _check(_run(10), report_criterion, budget_s=900)


def test_criterion_11_annealed(report_criterion):
    _check(_run(11), report_criterion)


def test_criterion_12_end_to_end_determinism(report_criterion, tmp_path):
    outputs = []
    t0 = time.perf_counter()
    for workers in (1, 2):
        proc = subprocess.run(
            [sys.executable, "-m", "pamlab", "validate", "--level", "quick", "--seed", str(SEED),
             "--workers", str(workers)],
            capture_output=True, timeout=300,
        )
        assert proc.returncode in (0, 1), proc.stderr.decode()
        outputs.append(proc.stdout)
    same = outputs[0] == outputs[1] and len(outputs[0]) > 0
    res = validation.CriterionResult(12, "end-to-end determinism", same)
    res.add("csv_bytes", len(outputs[0]))
    res.add("identical", same, None, same)
    res.runtime_s = time.perf_counter() - t0
    _check(res, report_criterion, budget_s=600)

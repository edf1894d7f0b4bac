"""Acceptance criteria at full scale. Each test prints one PASS/FAIL line."""
import json
import subprocess
import sys
import time

import numpy as np
import pytest

from qfeedback.campaign import CampaignConfig, random_campaign

LN2 = np.log(2.0)
CLI = [sys.executable, "-m", "qfeedback"]


@pytest.fixture
def verdict(capsys):
    def report(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({detail})")
        assert ok, detail

    return report


def _cli(*argv):
    start = time.perf_counter()
    proc = subprocess.run([*CLI, *argv], capture_output=True, check=False)
    return proc, time.perf_counter() - start


def _all_checked(report, name, n):
    s = report.verdicts.get(name)
    return s is not None and s.checked == n and s.satisfied == n


def _worst(report, name):
    s = report.verdicts[name]
    return s.worst_slack


def test_01_szilard(verdict):
    proc, elapsed = _cli("szilard", "--temp", "1", "--error", "0")
    doc = json.loads(proc.stdout)
    iso = next(v for v in doc["verdicts"] if v["name"] == "isothermal")
    ok = (
        proc.returncode == 0
        and abs(doc["qc_mutual"] - LN2) <= 1e-9
        and abs(doc["W_ext"] - LN2) <= 1e-9
        and abs(iso["slack"]) <= 1e-9
        and elapsed < 1.0
    )
    verdict(1, "Szilard engine", ok, f"W_ext={doc['W_ext']!r}, slack={iso['slack']:.1e}, {elapsed:.2f} s")


def test_02_carnot(verdict):
    proc, elapsed = _cli("carnot", "--t-hot", "2", "--t-cold", "1", "--q-hot", "10")
    doc = json.loads(proc.stdout)
    two = next(v for v in doc["verdicts"] if v["name"] == "two_bath")
    eff = doc["W_ext"] / doc["Q"]["H"]
    ok = (
        proc.returncode == 0
        and abs(doc["W_ext"] - (5 + LN2)) <= 1e-12
        and round(eff, 4) == 0.5693
        and eff > 0.5
        and abs(two["slack"]) <= 1e-12
        and elapsed < 1.0
    )
    verdict(2, "Carnot with feedback", ok, f"W_ext={doc['W_ext']!r}, eta={eff:.4f}, slack={two['slack']:.1e}, {elapsed:.2f} s")


def test_03_information_bounds(verdict):
    cfg = CampaignConfig(seed=3, n_instances=10_000, mode="information", system_dims=(2, 3, 4), n_outcomes_range=(2, 4))
    start = time.perf_counter()
    rep = random_campaign(cfg)
    elapsed = time.perf_counter() - start
    n = cfg.n_instances
    ok = not rep.errors and _all_checked(rep, "qc_lower", n) and _all_checked(rep, "qc_upper", n) and elapsed < 120
    verdict(
        3, "0 <= I <= H on 10^4 pairs", ok,
        f"worst lower={_worst(rep, 'qc_lower'):.1e}, worst upper={_worst(rep, 'qc_upper'):.1e}, {elapsed:.1f} s",
    )


def test_04_extremal_channels(verdict):
    base = dict(n_instances=1000, mode="information", system_dims=(2, 3, 4), n_outcomes_range=(2, 4))
    un = random_campaign(CampaignConfig(seed=4, channel_kind="uninformative", **base))
    pr = random_campaign(CampaignConfig(seed=5, channel_kind="projective", **base))
    ok = (
        not un.errors and not pr.errors
        and _all_checked(un, "uninformative_zero", 1000)
        and _all_checked(pr, "error_free_equals_shannon", 1000)
    )
    verdict(
        4, "extremal channels", ok,
        f"max I uninformative={-_worst(un, 'uninformative_zero'):.1e}, "
        f"max |I-H| projective={-_worst(pr, 'error_free_equals_shannon'):.1e}",
    )


def test_05_classical_reduction(verdict):
    rep = random_campaign(
        CampaignConfig(seed=6, n_instances=1000, mode="information", channel_kind="commuting",
                       system_dims=(2, 3, 4), n_outcomes_range=(2, 4))
    )
    ok = not rep.errors and _all_checked(rep, "classical_oracle", 1000)
    verdict(5, "classical reduction", ok, f"max |I - oracle|={-_worst(rep, 'classical_oracle'):.1e}")


@pytest.fixture(scope="module")
def random_information_campaign():
    return random_campaign(
        CampaignConfig(seed=7, n_instances=1000, mode="information", system_dims=(2, 3, 4), n_outcomes_range=(2, 4))
    )


def test_06_decomposition_identity(verdict, random_information_campaign):
    rep = random_information_campaign
    ok = not rep.errors and _all_checked(rep, "holevo_decomposition", 1000)
    verdict(6, "I = chi - dS_meas", ok, f"max residual={-_worst(rep, 'holevo_decomposition'):.1e}")


def test_07_proof_constructions(verdict, random_information_campaign):
    rep = random_information_campaign
    names = ("sigma_entropies", "sigma_marginal_Q", "dij_doubly_stochastic")
    ok = not rep.errors and all(_all_checked(rep, name, 1000) for name in names)
    detail = ", ".join(f"{name}={-_worst(rep, name):.1e}" for name in names)
    verdict(7, "proof constructions", ok, detail)


def test_08_generalized_second_law(verdict):
    start = time.perf_counter()
    one = random_campaign(CampaignConfig(seed=8, n_instances=10_000, bath_dims=(4, 5, 6, 7, 8), n_outcomes_range=(1, 4)))
    two = random_campaign(
        CampaignConfig(seed=9, n_instances=1000, bath_dims=(2, 3, 4), n_baths_range=(2, 2), n_outcomes_range=(1, 4))
    )
    elapsed = time.perf_counter() - start
    ok = elapsed < 600
    worst = []
    for rep in (one, two):
        n = rep.config.n_instances
        ok = ok and not rep.errors
        ok = ok and _all_checked(rep, "second_law", n) and _all_checked(rep, "entropy", n)
        worst += [_worst(rep, "second_law"), _worst(rep, "entropy")]
    verdict(8, "exact second law", ok, f"worst slack={min(worst):.1e}, {elapsed:.1f} s")


def test_09_clausius(verdict):
    rep = random_campaign(
        CampaignConfig(seed=10, n_instances=1000, bath_dims=(2, 3, 4), n_baths_range=(2, 2),
                       channel_kind="trivial", cyclic=True)
    )
    ok = not rep.errors and _all_checked(rep, "clausius", 1000)
    verdict(9, "Clausius for feedback-free cycles", ok, f"max sum Q/T={-_worst(rep, 'clausius'):.1e}")


def test_10_determinism(verdict, tmp_path):
    spec = tmp_path / "spec.json"
    subprocess.run([*CLI, "random-spec", "--seed", "2", "--baths", "2", "--out", str(spec)], check=True)
    commands = [
        ("szilard", "--temp", "1.7", "--error", "0.1"),
        ("carnot",),
        ("campaign", "--seed", "12", "--instances", "50", "--baths", "1-2", "--outcomes", "1-3", "--records"),
        ("campaign", "--seed", "12", "--instances", "200", "--mode", "information", "--dims", "2,3,4", "--outcomes", "2-4"),
        ("verify-file", str(spec)),
    ]
    same = []
    for argv in commands:
        first = subprocess.run([*CLI, *argv], capture_output=True).stdout
        second = subprocess.run([*CLI, *argv], capture_output=True).stdout
        same.append(bool(first) and first == second)
    verdict(10, "byte-identical reports", all(same), f"{sum(same)}/{len(same)} commands reproduced")

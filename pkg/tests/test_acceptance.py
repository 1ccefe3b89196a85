"""Acceptance criteria 1-10, one PASS/FAIL line per criterion.

Criteria 1-9 run in-process through the verification suites; criterion 10
runs the full verification through the command line in a separate process
with four workers and compares its report byte for byte with the in-process
single-worker report.
"""

import json
import subprocess
import sys
import time

import pytest

from collective_decay.io import dumps
from collective_decay.verify import SUITE_FUNCS, SUITES, Check

# wall-clock limits (s) per suite, from the tightest criterion each suite carries
RUNTIME_LIMITS = {"tensors": 10, "pv": 60, "equivalence": 300, "dicke": 300, "microsim": 300 + 600}


@pytest.fixture(scope="module")
def suites():
    results, timings = {}, {}
    for name in SUITES:
        t0 = time.perf_counter()
        results[name] = SUITE_FUNCS[name](workers=1)
        timings[name] = time.perf_counter() - t0
    return results, timings


def criterion_checks(suites, criterion):
    results, _ = suites
    return [c for checks in results.values() for c in checks if c.criterion == criterion]


def report(criterion, checks, extra_ok=True, note=""):
    ok = bool(checks) and all(c.passed for c in checks) and extra_ok
    print(f"\ncriterion {criterion}: {'PASS' if ok else 'FAIL'}{note}")
    for c in checks:
        print("    " + c.line())
    return ok


@pytest.mark.parametrize("criterion", range(1, 10))
def test_criterion(criterion, suites):
    checks = criterion_checks(suites, criterion)
    _, timings = suites
    suite = {1: "tensors", 2: "pv", 3: "equivalence", 4: "equivalence", 5: "dicke", 6: "dicke",
             7: "microsim", 8: "microsim", 9: "pv"}[criterion]
    fast = timings[suite] < RUNTIME_LIMITS[suite]
    assert report(criterion, checks, fast, f" ({suite} suite {timings[suite]:.1f} s)")


def test_criterion_10_reproducible(suites, tmp_path):
    results, _ = suites
    in_process = {"suites": {name: [Check(**c.__dict__).__dict__ for c in checks]
                             for name, checks in results.items()}}
    in_process["passed"] = all(c.passed for checks in results.values() for c in checks)
    proc = subprocess.run(
        [sys.executable, "-m", "collective_decay", "verify", "--suite", "all", "--workers", "4",
         "--out-dir", str(tmp_path), "--report", "report.json"],
        capture_output=True, text=True)
    cli_text = (tmp_path / "report.json").read_text()
    identical = cli_text == dumps(in_process)
    cli = json.loads(cli_text)
    worst = max(abs(a["measured"] - b["measured"])
                for name in SUITES
                for a, b in zip(cli["suites"][name], in_process["suites"][name]))
    check = Check(10, "verify all: workers 4 (CLI) vs workers 1 (in-process), max |diff|",
                  worst, 1e-10, identical and worst <= 1e-10)
    assert report(10, [check], proc.returncode == 0,
                  f" (byte-identical reports: {identical}, exit {proc.returncode})")

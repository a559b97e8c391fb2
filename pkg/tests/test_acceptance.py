"""Acceptance criteria, one test each, with their runtime budgets.

Every test records a one-line PASS/FAIL verdict; the lines are printed at the
end of the pytest run (see ``conftest.py``) and by ``python3 tests/test_acceptance.py``.
"""
import os
import subprocess
import sys
import tempfile
import time

import pytest

from specdisc import verify

pytestmark = pytest.mark.acceptance

# criterion number -> runtime budget in seconds (None: unbudgeted)
BUDGETS = {1: 10, 2: 30, 3: 5, 4: None, 5: None, 6: 20, 7: 60, 8: 10, 9: 30, 10: None}
TITLES = {
    1: "resolvent criterion equivalence",
    2: "spectral rank equals algebraic rank",
    3: "characteristic functional identities",
    4: "commuting witness with n distinct nonzero points",
    5: "commuting perturbation adds and removes at most rank(a) points each",
    6: "Volterra Laurent coefficients",
    7: "Volterra perturbation scan",
    8: "hole filling functional",
    9: "discontinuity probe",
    10: "spectra utilities",
    11: "byte-identical verify output",
}

VERDICTS: dict[int, str] = {}


def _record(k: int, ok: bool, info: str) -> None:
    VERDICTS[k] = f"{'PASS' if ok else 'FAIL'}  criterion {k:>2}: {TITLES[k]}  {info}"


def _brief(metrics: dict) -> str:
    parts = []
    for key, v in metrics.items():
        if isinstance(v, bool) or not isinstance(v, (int, float, list)):
            continue
        if isinstance(v, list) and not all(isinstance(x, (int, float)) for x in v):
            continue
        if isinstance(v, list):
            v = "[" + ",".join(str(x) if isinstance(x, int) else f"{x:.3g}" for x in v) + "]"
        parts.append(f"{key}={v:.4g}" if isinstance(v, float) else f"{key}={v}")
    return " ".join(parts)


def _run_criterion(k: int):
    cfg = verify.VerifyConfig()
    t0 = time.perf_counter()
    res = verify.CRITERIA[k](cfg)
    dt = time.perf_counter() - t0
    budget = BUDGETS[k]
    ok = res.passed and (budget is None or dt < budget)
    limit = f" < {budget}s" if budget else ""
    _record(k, ok, f"({dt:.1f}s{limit}) {_brief(res.metrics)} {res.detail}".rstrip())
    return res, dt, ok


@pytest.mark.parametrize("k", sorted(BUDGETS))
def test_criterion(k):
    res, dt, ok = _run_criterion(k)
    assert res.passed, f"criterion {k} failed: {res.metrics} {res.detail}"
    if BUDGETS[k] is not None:
        assert dt < BUDGETS[k], f"criterion {k} took {dt:.1f}s (budget {BUDGETS[k]}s)"


def _verify_json(workers: str, path: str) -> bytes:
    env = dict(os.environ, SPECDISC_WORKERS=workers)
    proc = subprocess.run([sys.executable, "-m", "specdisc", "verify", "--json", path],
                          env=env, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stdout + proc.stderr
    with open(path, "rb") as fh:
        return fh.read()


def test_criterion_11_determinism():
    with tempfile.TemporaryDirectory() as d:
        first = _verify_json("4", os.path.join(d, "a.json"))
        second = _verify_json("4", os.path.join(d, "b.json"))
        single = _verify_json("1", os.path.join(d, "c.json"))
    repeat_ok = first == second
    workers_ok = first == single
    _record(11, repeat_ok and workers_ok,
            f"(repeat identical: {repeat_ok}, workers 1 vs 4 identical: {workers_ok})")
    assert repeat_ok and workers_ok


if __name__ == "__main__":
    for k in sorted(BUDGETS):
        _run_criterion(k)
        print(VERDICTS[k], flush=True)
    try:
        test_criterion_11_determinism()
    except AssertionError:
        pass
    print(VERDICTS.get(11, "FAIL  criterion 11: verify run failed"))
    sys.exit(0 if all(v.startswith("PASS") for v in VERDICTS.values()) else 1)

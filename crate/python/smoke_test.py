#!/usr/bin/env python3
"""Smoke test for the qvi_py extension module.

Builds nothing itself: run `cargo build -p qvi-py --release` first, then
`python3 python/smoke_test.py`. The script locates the compiled cdylib,
loads it under the importable name, and drives every exposed entry point
against the analytic benchmark values.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        REPO / "target" / "release" / "libqvi_py.so",
        REPO / "target" / "debug" / "libqvi_py.so",
        REPO / "target" / "release" / "libqvi_py.dylib",
        REPO / "target" / "debug" / "libqvi_py.dylib",
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("qvi_py cdylib not found; run `cargo build -p qvi-py --release` first")
    staging = Path(tempfile.mkdtemp(prefix="qvi_py_"))
    shutil.copy(built, staging / "qvi_py.so")
    sys.path.insert(0, str(staging))
    import qvi_py

    return qvi_py


failures = []
checks_run = 0


def check(name, ok, detail=""):
    global checks_run
    checks_run += 1
    status = "PASS" if ok else "FAIL"
    print(f"{status} {name}" + (f" ({detail})" if detail else ""))
    if not ok:
        failures.append(name)


def main():
    qvi = load_module()

    names = qvi.preset_names()
    check("preset_names", set(names) == {"ou_quadratic", "two_regime_flat", "robust_drift"}, str(names))

    ou = qvi.Model.preset("ou_quadratic")
    check("model_attrs", ou.m == 1 and ou.dim == 1 and ou.gamma == 1.0, repr(ou))

    reports = qvi.validate(ou, -6.0, 6.0, 241)
    check("validate_ou", all(passed for (_, passed, _) in reports), str(reports))

    try:
        qvi.Model.preset("unknown")
        check("unknown_preset_raises", False)
    except ValueError as e:
        check("unknown_preset_raises", "available" in str(e))

    # Discounted closed form: V(0) = 1/(beta (beta + 2)) for the quadratic
    # benchmark; beta = 1 gives 1/3.
    elliptic = qvi.solve_elliptic(ou, -6.0, 6.0, 241, 1.0)
    mid = min(range(len(elliptic.xs)), key=lambda k: abs(elliptic.xs[k]))
    v0 = elliptic.values[mid][0]
    check("elliptic_ou_v0", abs(v0 - 1.0 / 3.0) < 0.02, f"V(0) = {v0:.5f}")

    # Vanishing discount: lambda -> 1/2.
    ergodic = qvi.extract_ergodic(ou, -6.0, 6.0, 241, [0.5, 0.2, 0.1, 0.05])
    check(
        "ergodic_ou_lambda",
        abs(ergodic.lambda_richardson - 0.5) < 0.02,
        f"richardson = {ergodic.lambda_richardson:.5f}",
    )

    # Two-regime closed form: V(T)/T with the regime-1 probe is (T - 0.1)/T.
    flat = qvi.Model.preset("two_regime_flat")
    averages = qvi.solve_parabolic(flat, -6.0, 6.0, 121, 10.0, [1.0], 0.0, 1)
    lam1 = dict(averages)[1.0]
    lam10 = dict(averages)[10.0]
    check("parabolic_two_regime", abs(lam1 - 0.9) < 1e-6 and abs(lam10 - 0.99) < 1e-6,
          f"lambda(1) = {lam1:.6f}, lambda(10) = {lam10:.6f}")

    # Monte Carlo against the same discounted value, plus determinism.
    mean, stderr = qvi.estimate_payoff(ou, 0.0, 1.0, 4000, 0.01, 12.0, 42)
    check(
        "mc_ou_payoff",
        abs(mean - 1.0 / 3.0) < 3.0 * stderr + 0.01,
        f"mean = {mean:.5f} +- {stderr:.5f}",
    )
    mean2, stderr2 = qvi.estimate_payoff(ou, 0.0, 1.0, 4000, 0.01, 12.0, 42)
    check("mc_deterministic", mean == mean2 and stderr == stderr2)

    try:
        qvi.estimate_payoff(ou, 0.0, 0.1, 100, 0.01, 1.0, 42)
        check("mc_tail_guard", False)
    except RuntimeError as e:
        check("mc_tail_guard", "tail" in str(e))

    if failures:
        sys.exit(f"{len(failures)} smoke check(s) failed: {', '.join(failures)}")
    print(f"all {checks_run} smoke checks passed")


if __name__ == "__main__":
    main()

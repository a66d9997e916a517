"""Acceptance checks, runnable from the CLI (``polyra verify``) and from pytest."""

from __future__ import annotations

import inspect
import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import lp, sweep
from .adversary import exhaustive_adversary, flex_benchmark_family, three_type_inputs
from .core import ProblemInstance, ball_queyranne_L, opt_total_flexible
from .engine import run_simulation
from .polytope import (
    NestSizes,
    build_B1,
    build_B2,
    build_Bf,
    check_consistency,
    f1_curve,
    f2_curve,
    near_optimal_nests,
    nested_polytope,
)


@dataclass(frozen=True)
class CheckResult:
    key: str
    title: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.key} {self.title}: {self.detail} ({self.seconds:.2f}s)"


def random_instance(
    rng: np.random.Generator, K: int | tuple[int, int], M: int | tuple[int, int] | None = None
) -> ProblemInstance:
    """Random valid instance: consecutive reward ratios uniform in (0.02, 0.98)."""
    K = int(rng.integers(K[0], K[1] + 1)) if isinstance(K, tuple) else K
    if M is None:
        M = int(rng.integers(1, K))
    elif isinstance(M, tuple):
        M = int(rng.integers(M[0], min(M[1], K - 1) + 1))
    ratios = rng.uniform(0.02, 0.98, K - 1)
    r = float(rng.uniform(0.5, 5.0)) * np.concatenate([np.cumprod(ratios[::-1])[::-1], [1.0]])
    return ProblemInstance(K, M, float(rng.uniform(0.5, 3.0)), tuple(r))


def random_nests(rng: np.random.Generator, inst: ProblemInstance) -> NestSizes:
    n = np.sort(rng.uniform(0.0, inst.C, inst.K - 1))
    return NestSizes(tuple(n) + (inst.C,))


def _tol(tol: float, tamper: bool) -> float:
    return -1.0 if tamper else tol


# ---------------------------------------------------------------- criteria


def check_two_type(tamper: bool = False, full: bool = True) -> tuple[bool, str]:
    tol = _tol(1e-6, tamper)
    worst, at_half = 0.0, math.nan
    t0 = time.perf_counter()
    for g in np.arange(1, 10) / 10:
        inst = ProblemInstance(2, 1, 1.0, (float(g), 1.0))
        res = exhaustive_adversary(inst, build_Bf(inst), q=4, T=2, B=4)
        worst = max(worst, abs(res.min_cr - 2 / (3 - g)))
        if abs(g - 0.5) < 1e-12:
            at_half = res.min_cr
    elapsed = time.perf_counter() - t0
    ok = worst <= tol and elapsed < 120
    return ok, f"max |min_cr - 2/(3-g)| = {worst:.2e} over 9 ratios; g=0.5 gives {at_half:.6f}; {elapsed:.1f}s"


UPPER3_TABLE = {
    1: {0.25: 0.480, 0.5: 0.588, 0.75: 0.746},
    2: {0.25: 0.571, 0.5: 0.667, 0.75: 0.800},
}


def check_upper3(tamper: bool = False, full: bool = True) -> tuple[bool, str]:
    tol = _tol(5e-4, tamper)
    t0 = time.perf_counter()
    worst = 0.0
    for M, row in UPPER3_TABLE.items():
        for g, want in row.items():
            worst = max(worst, abs(lp.solve_upper3(ProblemInstance.geometric(3, M, g)).gamma_star - want))
    elapsed = time.perf_counter() - t0
    return worst <= tol and elapsed < 1.0, f"max deviation {worst:.2e} over 6 points; {elapsed:.3f}s"


def _three_type_cases(rng: np.random.Generator, M: int, n_random: int) -> list[ProblemInstance]:
    out = [ProblemInstance.geometric(3, M, g) for g in (0.25, 0.5, 0.75)]
    out += [random_instance(rng, 3, M) for _ in range(n_random)]
    return out


def check_three_type(tamper: bool = False, full: bool = True, seed: int = 3) -> tuple[bool, str]:
    tol = _tol(1e-6, tamper)
    rng = np.random.default_rng(seed)
    q, B = (3, 6) if full else (3, 4)
    t0 = time.perf_counter()
    worst_gap, tight, runs = math.inf, 0, 0
    for M in (1, 2):
        for inst in _three_type_cases(rng, M, 2 if full else 0):
            sol = lp.solve_upper3(inst)
            p = build_B1(inst, sol) if M == 1 else nested_polytope(inst, build_B2(inst, sol))
            fam = [run_simulation(inst, p, s).min_period_cr for s in three_type_inputs(inst)]
            res = exhaustive_adversary(inst, p, q=q, T=2, B=B)
            crs = fam + [res.min_cr]
            worst_gap = min(worst_gap, min(crs) - sol.gamma_star)
            tight += abs(res.min_cr - sol.gamma_star) <= abs(tol) and tol >= 0
            runs += 1
    elapsed = time.perf_counter() - t0
    ok = worst_gap >= -tol and tight == runs and elapsed < 600 and tol >= 0
    return ok, (
        f"min(CR - G*) = {worst_gap:.2e}; witness tight on {tight}/{runs} instances "
        f"(q={q}, T=2, B={B}); {elapsed:.1f}s"
    )


def check_closed_forms(tamper: bool = False, full: bool = True, seed: int = 4) -> tuple[bool, str]:
    tol = _tol(1e-7, tamper)
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    bad_lp, bad_bar, predicted, lp_higher = 0, 0, 0, 0
    for _ in range(500):
        inst = random_instance(rng, (2, 8))
        try:
            lp.solve_simple_upper(inst, tol=tol)
        except lp.ClosedFormMismatch:
            bad_lp += 1
            predicted += not lp.simple_upper_closed_form_optimal(inst)
            solved = lp.solve_lp(lp.simple_upper_program(inst)).objective
            lp_higher += solved > lp.gamma_lp_closed_form(inst)
        try:
            lp.solve_gamma_bar_lp(inst, tol=tol)
        except lp.ClosedFormMismatch:
            bad_bar += 1
    elapsed = time.perf_counter() - t0
    ok = bad_lp == 0 and bad_bar == 0 and elapsed < 30
    return ok, (
        f"simple-upper mismatches {bad_lp}/500 (dual-sign test predicts {predicted}, LP higher in "
        f"{lp_higher}); relaxed-nest mismatches {bad_bar}/500; {elapsed:.1f}s"
    )


def check_identities(tamper: bool = False, full: bool = True, seed: int = 5) -> tuple[bool, str]:
    tol = _tol(1e-7, tamper)
    rng = np.random.default_rng(seed)
    worst, worst_slack, order_bad = 0.0, math.inf, 0
    for _ in range(200):
        inst = random_instance(rng, 3)
        sol = lp.solve_upper3(inst, tol=max(tol, 1e-7))
        scale = max(1.0, inst.rewards[-1] * inst.C)
        res = lp.upper3_identities(inst, sol.gamma_star, sol.s)
        st = lp.upper3_structure(inst, sol.gamma_star, sol.s)
        worst = max(worst, max(abs(v) for v in res.values()) / scale)
        worst = max(worst, max(abs(v) for k, v in st.items() if k != "half_share") / scale)
        if "half_share" in st:
            worst_slack = min(worst_slack, st["half_share"])
        if inst.M == 1:
            order_bad += sol.s[0, 0] < sol.s[0, 1]
    ok = worst <= tol and worst_slack >= -tol and order_bad == 0
    return ok, f"max identity residual {worst:.2e}; min M=2 slack {worst_slack:.3f}; order violations {order_bad}"


def check_consistency_suite(tamper: bool = False, full: bool = True, seed: int = 6) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    eps = _tol(1e-9, tamper)
    failures, checked = 0, 0
    for i in range(200):
        inst = random_instance(rng, (2, 6), (0, 5))
        polys = [nested_polytope(inst, random_nests(rng, inst))]
        if inst.M >= 1:
            polys.append(nested_polytope(inst, near_optimal_nests(inst)))
        three = random_instance(rng, 3, 1)
        polys_b1 = [(three, build_B1(three, lp.solve_upper3(three)))]
        for inst_, p in [(inst, p) for p in polys] + polys_b1:
            rep = check_consistency(inst_, p, seed=seed + i, n_samples=1000, eps=eps)
            failures += not rep.consistent
            checked += 1
    return failures == 0, f"{checked - failures}/{checked} polytopes consistent (1000 states each)"


def check_near_optimal(tamper: bool = False, full: bool = True, seed: int = 7) -> tuple[bool, str]:
    tol = _tol(1e-7, tamper)
    rng = np.random.default_rng(seed)
    worst = math.inf
    for _ in range(500):
        inst = random_instance(rng, (2, 6))
        worst = min(worst, lp.solve_nest_cr(inst, near_optimal_nests(inst)) - 0.8 * lp.gamma_up(inst))
    grid = np.linspace(1.0, 10.0, 10_001)[1:]
    prod = {c: min(f1_curve(G, c) * f2_curve(G, c) for G in grid) for c in (True, False)}
    at2 = {c: f1_curve(2.0, c) * f2_curve(2.0, c) for c in (True, False)}
    ftol = _tol(1e-4, tamper)
    ok = (
        worst >= -tol
        and min(prod.values()) >= 0.8 - max(tol, 0) - (0 if not tamper else 1)
        and abs(at2[True] - 0.8) <= ftol
        and abs(at2[False] - 0.8125) <= ftol
    )
    return ok, (
        f"min(G_nest - 0.8 G_up) = {worst:.3e}; grid min f1*f2 small={prod[True]:.4f} "
        f"large={prod[False]:.4f}; at G=2: {at2[True]:.5f}, {at2[False]:.5f}"
    )


def check_flexible_benchmark(tamper: bool = False, full: bool = True, seed: int = 8) -> tuple[bool, str]:
    tol = _tol(1e-9, tamper)
    rng = np.random.default_rng(seed)
    worst_L, worst_opt = 0.0, 0.0
    for K in range(2, 7):
        for _ in range(10):
            inst = random_instance(rng, K, K - 1)
            sol = lp.solve_lp(lp.flex_benchmark_program(inst))
            worst_L = max(worst_L, abs(sol.value("gamma") - ball_queyranne_L(inst)))
            for j, seq in enumerate(flex_benchmark_family(inst), start=1):
                want = 2 * inst.rewards[j - 1] * inst.C
                worst_opt = max(worst_opt, abs(opt_total_flexible(inst, seq) - want) / max(1.0, want))
    ok = worst_L <= tol and worst_opt <= tol
    return ok, f"max |LP - L| = {worst_L:.1e}; max rel |OPT-total(I^j) - 2 r_j C| = {worst_opt:.1e}"


def check_figures(tamper: bool = False, full: bool = True) -> tuple[bool, str]:
    tol = _tol(5e-4, tamper)
    parts, ok = [], True
    for name, spec in sweep.standard_specs().items():
        worst, n = sweep.compare_to_reference(name, sweep.to_csv(spec))
        ok &= worst <= tol
        parts.append(f"{name} {worst:.1e} ({n} pts)")
    return ok, "; ".join(parts)


CRITERIA: list[tuple[str, str, Callable[..., tuple[bool, str]]]] = [
    ("C1", "two-type optimality via exhaustive adversary", check_two_type),
    ("C2", "three-type upper bound table", check_upper3),
    ("C3", "three-type optimal polytopes attain G*", check_three_type),
    ("C4", "closed form vs LP agreement", check_closed_forms),
    ("C5", "upper3 tightness identities", check_identities),
    ("C6", "polytope consistency", check_consistency_suite),
    ("C7", "near-optimal nests within 0.8", check_near_optimal),
    ("C8", "flexible-benchmark bound", check_flexible_benchmark),
    ("C9", "reference curve reproduction", check_figures),
]


def run_check(key: str, full: bool = True, tamper: bool = False, seed: int | None = None) -> CheckResult:
    """Run one criterion. ``seed`` replaces the default seed of randomized checks."""
    for k, title, fn in CRITERIA:
        if k == key:
            kwargs = {"tamper": tamper, "full": full}
            if seed is not None and "seed" in inspect.signature(fn).parameters:
                kwargs["seed"] = seed
            t0 = time.perf_counter()
            try:
                ok, detail = fn(**kwargs)
            except Exception as exc:  # a crash is a failed check, not a crashed suite
                ok, detail = False, f"error: {type(exc).__name__}: {exc}"
            return CheckResult(k, title, bool(ok), detail, time.perf_counter() - t0)
    raise KeyError(key)


def run_suite(
    level: str = "fast",
    tamper: bool = False,
    seed: int | None = None,
    echo: Callable[[str], None] | None = None,
) -> list[CheckResult]:
    if level not in ("fast", "full"):
        raise ValueError("level must be 'fast' or 'full'")
    out = []
    for key, _, _ in CRITERIA:
        res = run_check(key, full=level == "full", tamper=tamper, seed=seed)
        if echo:
            echo(res.line())
        out.append(res)
    return out

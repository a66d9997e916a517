"""Linear programs bounding the competitive ratio, with closed-form cross-checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ProblemInstance, ball_queyranne_L, big_G
from .polytope import NestSizes, gamma_bar_closed_form
from .simplex import EQ, GE, LE, LinearProgram, LpSolution, ModelBuilder, solve_lp

CHECK_TOL = 1e-7


class ClosedFormMismatch(RuntimeError):
    """An LP optimum disagrees with its analytic value."""


class TightnessViolation(RuntimeError):
    """An upper3 optimum fails one of its structural tightness identities."""


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


def _solve(lp: LinearProgram) -> LpSolution:
    sol = solve_lp(lp)
    if not sol.optimal:
        raise RuntimeError(f"LP returned status {sol.status}")
    return sol


def _close(a: float, b: float, tol: float, scale: float = 1.0) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(scale))


# ---------------------------------------------------------------- three types


@dataclass(frozen=True, eq=False)
class Upper3Solution:
    gamma_star: float
    s: np.ndarray
    canonicalized: bool
    M: int
    lp: LpSolution | None = None


def upper3_program(inst: ProblemInstance) -> LinearProgram:
    _require(inst.K == 3 and inst.M in (1, 2), "upper3 needs K=3 and M in {1,2}")
    r1, r2, r3 = inst.rewards
    C, M = inst.C, inst.M
    mb = ModelBuilder()
    g = mb.var("gamma")
    s = {(i, t): mb.var(f"s[{i},{t}]") for i in (1, 2, 3) for t in (1, 2)}
    for t in (1, 2):
        mb.add({s[1, t]: 1, s[2, t]: 1, s[3, t]: 1}, LE, C, f"capacity[{t}]")
        mb.add({s[1, t]: r1, s[2, t]: r2, s[3, t]: r3, g: -r3 * C}, GE, 0.0, f"revenue3[{t}]")
    mb.add({s[1, 1]: r1, s[1, 2]: r1, g: -r1 * C}, GE, 0.0, "revenue1")
    terms = {s[2, t]: r2 - r1 for t in range(1, M + 1)}
    terms[g] = -r2 * C
    mb.add(terms, GE, -r1 * C, "capacity2")
    terms = {s[1, 1]: r1, s[1, 2]: r1}
    for t in range(1, M + 1):
        terms[s[2, t]] = r2
    terms[g] = -r2 * C
    mb.add(terms, GE, 0.0, "revenue2")
    if M == 1:
        mb.add({s[1, 2]: r1, s[2, 2]: r2, g: -r2 * C}, GE, 0.0, "revenue2_late")
    mb.maximize({g: 1.0})
    return mb.build()


def upper3_identities(inst: ProblemInstance, gamma: float, s: np.ndarray) -> dict[str, float]:
    """Residuals of the tightness identities every upper3 optimum satisfies."""
    r1, r2, r3 = inst.rewards
    C, M = inst.C, inst.M
    s2m = float(s[1, :M].sum())
    out = {}
    for t in (0, 1):
        out[f"a[{t + 1}]"] = s[:, t].sum() - C
        out[f"e[{t + 1}]"] = r1 * s[0, t] + r2 * s[1, t] + r3 * s[2, t] - gamma * r3 * C
    out["b"] = r1 * (s[0, 0] + s[0, 1]) - gamma * r1 * C
    out["c"] = r1 * min(s[0, 0] + s[0, 1], C - s2m) + r2 * s2m - gamma * r2 * C
    if M == 1:
        out["d"] = r1 * s[0, 1] + r2 * s[1, 1] - gamma * r2 * C
    return out


def upper3_structure(inst: ProblemInstance, gamma: float, s: np.ndarray) -> dict[str, float]:
    """Residuals of the follow-on identities (difference form and M=2 slack)."""
    r1, r2, r3 = inst.rewards
    C = inst.C
    out = {}
    for t in (0, 1):
        out[f"diff[{t + 1}]"] = (r3 - r1) * s[0, t] + (r3 - r2) * s[1, t] - (1 - gamma) * r3 * C
    if inst.M == 2:
        out["half_share"] = C - s[1].sum() - 0.5 * s[0].sum()  # must be >= 0
    return out


def solve_upper3(inst: ProblemInstance, tol: float = CHECK_TOL) -> Upper3Solution:
    sol = _solve(upper3_program(inst))
    gamma = sol.value("gamma")
    s = np.array([[sol.value(f"s[{i},{t}]") for t in (1, 2)] for i in (1, 2, 3)])
    swapped = False
    if inst.M == 1 and s[0, 0] < s[0, 1]:
        s = s[:, ::-1].copy()
        swapped = True
    scale = inst.rewards[-1] * inst.C
    bad = {k: v for k, v in upper3_identities(inst, gamma, s).items() if abs(v) > tol * max(1.0, scale)}
    if bad:
        raise TightnessViolation(f"upper3 optimum not tight: {bad}")
    return Upper3Solution(gamma, s, swapped, inst.M, sol)


# ---------------------------------------------------------------- general K


def gamma_lp_closed_form(inst: ProblemInstance) -> float:
    _require(inst.M >= 1, "closed form needs M >= 1")
    K, M = inst.K, inst.M
    r = inst.rewards
    denom = (
        2 * big_G(inst)
        + M
        - sum(inst.ratio(i) for i in range(1, M + 2))
        - r[M - 1] / r[M]
        + r[M - 1] / r[K - 1]
    )
    return 2.0 / denom


def gamma_up(inst: ProblemInstance) -> float:
    return min(gamma_lp_closed_form(inst), 1.0 / big_G(inst))


def simple_upper_program(inst: ProblemInstance) -> LinearProgram:
    _require(inst.M >= 1, "simple-upper needs M >= 1")
    K, M, C = inst.K, inst.M, inst.C
    r = inst.rewards
    mb = ModelBuilder()
    g = mb.var("gamma")
    s = [mb.var(f"s[{i}]") for i in range(1, K + 1)]
    for k in range(1, M + 1):
        terms = {s[i]: r[i] for i in range(k)}
        terms[g] = -r[k - 1] * C
        mb.add(terms, GE, 0.0, f"before_m[{k}]")
    for k in range(M + 1, K):
        terms = {s[i]: 2 * r[i] for i in range(M)}
        terms.update({s[i]: r[i] for i in range(M, k)})
        terms[g] = -2 * r[k - 1] * C
        mb.add(terms, GE, 0.0, f"after_m[{k}]")
    terms = {s[i]: r[i] for i in range(K)}
    terms[g] = -2 * r[K - 1] * C
    mb.add(terms, GE, 0.0, "last")
    mb.add({j: 1.0 for j in s}, LE, 2 * C, "sum")
    mb.maximize({g: 1.0})
    return mb.build()


def simple_upper_closed_form_s(inst: ProblemInstance) -> np.ndarray:
    K, M, C = inst.K, inst.M, inst.C
    g = gamma_lp_closed_form(inst)
    r = inst.rewards
    s = np.empty(K)
    for i in range(1, K + 1):
        base = 1.0 - inst.ratio(i)
        if i <= M:
            s[i - 1] = g * base * C
        elif i < K:
            s[i - 1] = 2 * g * base * C
        else:
            s[i - 1] = 2 * g * (base + 0.5 * r[M - 1] / r[K - 1]) * C
    return s


def simple_upper_closed_form_optimal(inst: ProblemInstance) -> bool:
    """Dual feasibility of the closed-form vertex.

    The multiplier on the last before-flex row (k = M) at that vertex is
    proportional to 1/r_M - 2/r_{M+1} + 1/r_K, so the vertex is optimal
    only when r_{M+1}/r_M + r_{M+1}/r_K >= 2. Otherwise the LP optimum is larger.
    """
    r, M, K = inst.rewards, inst.M, inst.K
    return r[M] / r[M - 1] + r[M] / r[K - 1] >= 2.0 - 1e-12


def solve_simple_upper(inst: ProblemInstance, tol: float = CHECK_TOL) -> LpSolution:
    sol = _solve(simple_upper_program(inst))
    g = sol.value("gamma")
    closed = gamma_lp_closed_form(inst)
    if not _close(g, closed, tol):
        raise ClosedFormMismatch(f"simple-upper optimum {g} vs closed form {closed}")
    s = np.array([sol.value(f"s[{i}]") for i in range(1, inst.K + 1)])
    expect = simple_upper_closed_form_s(inst)
    if not np.allclose(s, expect, rtol=0.0, atol=tol * max(1.0, inst.C)):
        raise ClosedFormMismatch(f"simple-upper allocation {s} vs closed form {expect}")
    return sol


# ---------------------------------------------------------------- nested


def _nest_rows(mb: ModelBuilder, inst: ProblemInstance, g: int, delta, capacity: bool, fixed: bool) -> None:
    """Add the nest constraints; ``delta`` holds sizes if ``fixed`` else variable indices."""
    K, M, C = inst.K, inst.M, inst.C
    r = inst.rewards
    for j in range(1, K + 1):
        s = [mb.var(f"s[{i},{j}]") for i in range(1, j + 1)]
        terms = {s[i]: r[i] for i in range(j)}
        terms[g] = -C * r[j - 1]
        mb.add(terms, GE, 0.0, f"revenue[{j}]")
        if capacity:
            mb.add({v: 1.0 for v in s}, LE, C, f"capacity[{j}]")
        for i in range(j):
            tag = f"[{i + 1},{j}]"
            if fixed:
                d = float(delta[i])
                if j <= M:
                    mb.add({s[i]: 1.0}, GE, d, "lower" + tag)
                    mb.add({s[i]: 1.0}, LE, 2 * d, "upper" + tag)
                else:
                    mb.add({s[i]: 1.0}, LE, d, "upper" + tag)
            else:
                if j <= M:
                    mb.add({s[i]: 1.0, delta[i]: -1.0}, GE, 0.0, "lower" + tag)
                    mb.add({s[i]: 1.0, delta[i]: -2.0}, LE, 0.0, "upper" + tag)
                else:
                    mb.add({s[i]: 1.0, delta[i]: -1.0}, LE, 0.0, "upper" + tag)


def nest_program(inst: ProblemInstance, nests: NestSizes) -> LinearProgram:
    nests.check(inst)
    mb = ModelBuilder()
    g = mb.var("gamma")
    _nest_rows(mb, inst, g, [float(d) for d in nests.deltas], capacity=True, fixed=True)
    mb.maximize({g: 1.0})
    return mb.build()


def solve_nest(inst: ProblemInstance, nests: NestSizes) -> LpSolution:
    return _solve(nest_program(inst, nests))


def solve_nest_cr(inst: ProblemInstance, nests: NestSizes) -> float:
    return solve_nest(inst, nests).value("gamma")


def _joint_program(inst: ProblemInstance, capacity: bool) -> LinearProgram:
    mb = ModelBuilder()
    g = mb.var("gamma")
    d = [mb.var(f"dn[{i}]") for i in range(1, inst.K + 1)]
    mb.add({v: 1.0 for v in d}, EQ, inst.C, "nest_total")
    _nest_rows(mb, inst, g, d, capacity=capacity, fixed=False)
    mb.maximize({g: 1.0})
    return mb.build()


def solve_gamma_nest_star_lp(inst: ProblemInstance) -> LpSolution:
    return _solve(_joint_program(inst, capacity=True))


def solve_gamma_nest_star(inst: ProblemInstance) -> tuple[float, NestSizes]:
    sol = solve_gamma_nest_star_lp(inst)
    d = np.array([sol.value(f"dn[{i}]") for i in range(1, inst.K + 1)])
    return sol.value("gamma"), NestSizes.from_deltas(d, inst.C)


def solve_gamma_bar(inst: ProblemInstance, tol: float = CHECK_TOL) -> LpSolution:
    _require(inst.M >= 1, "needs M >= 1")
    sol = _solve(_joint_program(inst, capacity=False))
    closed = gamma_bar_closed_form(inst)
    if not _close(sol.value("gamma"), closed, tol):
        raise ClosedFormMismatch(f"relaxed nest optimum {sol.value('gamma')} vs closed form {closed}")
    return sol


def solve_gamma_bar_lp(inst: ProblemInstance, tol: float = CHECK_TOL) -> float:
    return solve_gamma_bar(inst, tol).value("gamma")


# ---------------------------------------------------------------- flexible benchmark


def flex_benchmark_program(inst: ProblemInstance) -> LinearProgram:
    K, C = inst.K, inst.C
    r = inst.rewards
    mb = ModelBuilder()
    g = mb.var("gamma")
    a = [mb.var(f"a[{k}]") for k in range(1, K + 1)]
    for k in range(1, K + 1):
        terms = {a[i]: r[i] for i in range(k)}
        terms[g] = -2 * r[k - 1] * C
        mb.add(terms, GE, 0.0, f"revenue[{k}]")
    mb.add({v: 1.0 for v in a}, LE, 2 * C, "capacity")
    mb.maximize({g: 1.0})
    return mb.build()


def solve_appendix_b(inst: ProblemInstance, tol: float = 1e-9) -> LpSolution:
    _require(inst.M == inst.K - 1, "the flexible-benchmark LP needs M = K-1")
    sol = _solve(flex_benchmark_program(inst))
    g = sol.value("gamma")
    L = ball_queyranne_L(inst)
    if not _close(g, L, tol):
        raise ClosedFormMismatch(f"flexible-benchmark optimum {g} vs L = {L}")
    a = np.array([sol.value(f"a[{k}]") for k in range(1, inst.K + 1)])
    expect = np.array([2 * g * (1 - inst.ratio(k)) * inst.C for k in range(1, inst.K + 1)])
    if not np.allclose(a, expect, rtol=0.0, atol=max(tol, 1e-9) * max(1.0, inst.C) * 10):
        raise ClosedFormMismatch(f"flexible-benchmark allocation {a} vs {expect}")
    return sol


def solution_json(sol: LpSolution, tol: float = CHECK_TOL) -> dict:
    return {
        "gamma": sol.value("gamma"),
        "variables": sol.values(),
        "tight_constraints": sol.tight(tol),
    }

"""Feasible polytopes over bucket states.

Coordinates are ordered ``b_{1,1}..b_{M,1}, b_{M+1}..b_K, b_{1,2}..b_{M,2}``:
index ``k-1`` is the row-1 bucket of type ``k`` and index ``K+k-1`` is the
row-2 bucket of flexible type ``k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import EPS, ProblemInstance, big_G
from .simplex import LE, LinearProgram, solve_lp


class PolytopeError(ValueError):
    pass


class InfeasibleStateError(PolytopeError):
    pass


class NestError(PolytopeError):
    pass


@dataclass(frozen=True, eq=False)
class Polytope:
    dimension: int
    A: np.ndarray
    rhs: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        A = np.asarray(self.A, dtype=float).reshape(-1, self.dimension)
        b = np.asarray(self.rhs, dtype=float).ravel()
        if b.size != A.shape[0]:
            raise PolytopeError("one rhs per constraint required")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise PolytopeError("non-finite constraint data")
        if np.any(A < 0):
            raise PolytopeError("coefficients must be nonnegative")
        if np.any(b < 0):
            raise PolytopeError("rhs must be nonnegative so the zero state is feasible")
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "rhs", b)

    @classmethod
    def from_rows(cls, dimension: int, rows: Sequence[tuple[Sequence[float], float]], label: str = "") -> "Polytope":
        A = np.array([r[0] for r in rows], dtype=float).reshape(len(rows), dimension)
        return cls(dimension, A, np.array([r[1] for r in rows], dtype=float), label)

    @property
    def constraints(self) -> list[tuple[np.ndarray, float]]:
        return [(self.A[i].copy(), float(self.rhs[i])) for i in range(self.rhs.size)]

    def slack(self, x: np.ndarray) -> np.ndarray:
        return self.rhs - self.A @ np.asarray(x, dtype=float)

    def contains(self, x: np.ndarray, eps: float = EPS) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= -eps) and np.all(self.slack(x) >= -eps))

    def same_constraints(self, other: "Polytope", tol: float = 1e-12) -> bool:
        return (
            self.dimension == other.dimension
            and self.A.shape == other.A.shape
            and np.allclose(self.A, other.A, rtol=0, atol=tol)
            and np.allclose(self.rhs, other.rhs, rtol=0, atol=tol)
        )

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "constraints": [{"coeffs": a.tolist(), "rhs": b} for a, b in self.constraints],
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Polytope":
        try:
            rows = [(c["coeffs"], float(c["rhs"])) for c in d["constraints"]]
            dim = int(d["dimension"])
        except (KeyError, TypeError) as exc:
            raise PolytopeError(f"malformed polytope: {exc}") from exc
        if any(len(r[0]) != dim for r in rows):
            raise PolytopeError("coefficient vector length must equal dimension")
        return cls.from_rows(dim, rows, str(d.get("label", "")))


@dataclass(frozen=True)
class NestSizes:
    n: tuple[float, ...]

    def __post_init__(self) -> None:
        n = tuple(float(x) for x in self.n)
        if not n:
            raise NestError("empty nest vector")
        if n[0] < -EPS or any(b < a - EPS for a, b in zip(n, n[1:])):
            raise NestError(f"nests must be nondecreasing and nonnegative, got {n}")
        object.__setattr__(self, "n", n)

    @property
    def deltas(self) -> np.ndarray:
        return np.maximum(np.diff(np.concatenate([[0.0], self.n])), 0.0)

    def check(self, inst: ProblemInstance) -> None:
        if len(self.n) != inst.K:
            raise NestError(f"expected {inst.K} nests, got {len(self.n)}")
        if abs(self.n[-1] - inst.C) > EPS * max(1.0, inst.C):
            raise NestError(f"last nest must equal C={inst.C}, got {self.n[-1]}")

    @classmethod
    def from_deltas(cls, deltas: Sequence[float], C: float | None = None) -> "NestSizes":
        n = np.cumsum(np.maximum(np.asarray(deltas, dtype=float), 0.0))
        if C is not None:
            if abs(n[-1] - C) > 1e-7 * max(1.0, C):
                raise NestError(f"nest increments sum to {n[-1]}, not C={C}")
            n[-1] = C
            n = np.minimum(n, C)
        return cls(tuple(n))


def row1(k: int) -> int:
    return k - 1


def row2(inst: ProblemInstance, k: int) -> int:
    if not 1 <= k <= inst.M:
        raise PolytopeError(f"type {k} has no row-2 bucket")
    return inst.K + k - 1


def nested_polytope(inst: ProblemInstance, nests: NestSizes, label: str = "") -> Polytope:
    nests.check(inst)
    K, M = inst.K, inst.M
    rows = []
    for k in range(1, M + 1):
        for offset in (0, K):
            a = np.zeros(K + M)
            a[offset : offset + k] = 1.0
            rows.append((a, nests.n[k - 1]))
    for k in range(M + 1, K + 1):
        a = np.zeros(K + M)
        a[:k] = 1.0
        rows.append((a, nests.n[k - 1]))
    return Polytope.from_rows(K + M, rows, label or "nested(" + ",".join(f"{x:g}" for x in nests.n) + ")")


def trivial_polytope(inst: ProblemInstance) -> Polytope:
    """No protection at all: every nest equals C."""
    return nested_polytope(inst, NestSizes((inst.C,) * inst.K), "trivial")


def max_increment(p: Polytope, state: np.ndarray, coord: int, cap: float) -> float:
    x = np.asarray(state, dtype=float)
    slack = p.slack(x)
    if np.any(slack < -EPS) or np.any(x < -EPS):
        raise InfeasibleStateError(f"state {x} is infeasible in {p.label}")
    col = p.A[:, coord]
    hit = col > 0
    step = float(cap)
    if hit.any():
        step = min(step, float(np.min(np.maximum(slack[hit], 0.0) / col[hit])))
    return max(step, 0.0)


def _two_type(inst: ProblemInstance, M: int) -> None:
    if inst.K != 2 or inst.M != M:
        raise PolytopeError(f"needs K=2 and M={M}")


def build_Bf(inst: ProblemInstance) -> Polytope:
    _two_type(inst, 1)
    C = inst.C
    lim = C / (3 - inst.ratio(2))
    return Polytope.from_rows(3, [([1, 0, 0], lim), ([0, 0, 1], lim), ([1, 1, 0], C)], "B^f")


def build_Bi(inst: ProblemInstance) -> Polytope:
    _two_type(inst, 0)
    C = inst.C
    return Polytope.from_rows(2, [([1, 0], C / (2 - inst.ratio(2))), ([1, 1], C)], "B^i")


def build_B1(inst: ProblemInstance, sol) -> Polytope:
    """Optimal three-type polytope for one flexible type, from an upper3 optimum."""
    if inst.K != 3 or inst.M != 1:
        raise PolytopeError("needs K=3 and M=1")
    s = np.asarray(sol.s, dtype=float)
    if s[0, 0] < s[0, 1] - EPS:
        raise PolytopeError("upper3 solution is not canonical (s11 < s12)")
    r1, r2, r3 = inst.rewards
    d31, d32 = r3 - r1, r3 - r2
    rows = [
        ([1, 1, 1, 0], s[:, 0].sum()),
        ([d31, d32, 0, 0], d31 * s[0, 0] + d32 * s[1, 0]),
        ([1, 0, 0, 0], s[0, 0]),
        ([0, 0, 0, 1], s[0, 1]),
    ]
    return Polytope.from_rows(4, rows, "B^(1)")


def build_B2(inst: ProblemInstance, sol) -> NestSizes:
    if inst.K != 3 or inst.M != 2:
        raise PolytopeError("needs K=3 and M=2")
    s = np.asarray(sol.s, dtype=float)
    n1 = 0.5 * (s[0, 0] + s[0, 1])
    n2 = n1 + 0.5 * (s[1, 0] + s[1, 1])
    return NestSizes((min(n1, inst.C), min(n2, inst.C), inst.C))


def gamma_bar_closed_form(inst: ProblemInstance) -> float:
    if inst.M < 1:
        raise PolytopeError("needs M >= 1")
    return 2.0 / (2 * big_G(inst) + inst.M - sum(inst.ratio(i) for i in range(1, inst.M + 2)))


def near_optimal_nests(inst: ProblemInstance) -> NestSizes:
    g = gamma_bar_closed_form(inst)
    K, M, C = inst.K, inst.M, inst.C
    d = np.empty(K)
    for i in range(1, K + 1):
        if i <= M:
            d[i - 1] = 0.5 * g * (1 - inst.ratio(i)) * C
        elif i == M + 1:
            d[i - 1] = g * (1 - 0.5 * inst.rewards[M - 1] / inst.rewards[M]) * C
        else:
            d[i - 1] = g * (1 - inst.ratio(i)) * C
    if abs(d.sum() - C) > EPS * max(1.0, C):
        raise NestError(f"near-optimal nest increments sum to {d.sum()}, not {C}")
    return NestSizes.from_deltas(d, C)


def flex_nest_is_small(inst: ProblemInstance) -> bool:
    """True when 2*n_M <= C for the near-optimal nests (ties count as small)."""
    n = near_optimal_nests(inst).n
    return 2 * n[inst.M - 1] <= inst.C + EPS * max(1.0, inst.C)


def f1_curve(G: float, small: bool) -> float:
    return 1.0 if small else 1.0 - 0.5 * math.exp(-2 * G + 1)


def f2_curve(G: float, small: bool) -> float:
    m = max(2.0 - G, 0.0)
    if small:
        return 1.0 - (1.0 - m) / (2 * G + 1 - m)
    return 1.0 - (1.0 - m) / (4 * G - 2)


def f1(inst: ProblemInstance) -> float:
    return f1_curve(big_G(inst), flex_nest_is_small(inst))


def f2(inst: ProblemInstance) -> float:
    return f2_curve(big_G(inst), flex_nest_is_small(inst))


# ---------------------------------------------------------------- consistency


@dataclass(frozen=True, eq=False)
class ConsistencyReport:
    consistent: bool
    downward_closed: bool
    rollover_ok: bool
    samples: int
    method: str
    witness: np.ndarray | None = None
    image: np.ndarray | None = None
    violated: int | None = None

    def __bool__(self) -> bool:
        return self.consistent


def rollover_worst_case(inst: ProblemInstance, x: np.ndarray) -> np.ndarray:
    """State after a period close with no leftover: all of row 2 carries over."""
    y = np.zeros(inst.K + inst.M)
    y[: inst.M] = x[inst.K : inst.K + inst.M]
    return y


def _box(p: Polytope) -> np.ndarray:
    ub = np.full(p.dimension, np.inf)
    for c in range(p.dimension):
        col = p.A[:, c]
        hit = col > 0
        if hit.any():
            ub[c] = float(np.min(p.rhs[hit] / col[hit]))
    finite = ub[np.isfinite(ub)]
    fill = float(finite.max()) if finite.size else 1.0
    ub[~np.isfinite(ub)] = fill
    return ub


def sample_states(p: Polytope, rng: np.random.Generator, n: int) -> np.ndarray:
    """Feasible states from the bounding box.

    Box draws that land inside are kept. Draws outside are pulled radially onto
    the boundary (valid since the polytope is star-shaped about 0), and half of
    those are then shrunk uniformly, so both boundary and interior states appear.
    """
    ub = _box(p)
    X = rng.uniform(0.0, 1.0, (n, p.dimension)) * ub
    load = X @ p.A.T
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(load > 0, p.rhs / load, np.inf)
    t = np.minimum(1.0, ratio.min(axis=1, initial=np.inf))
    outside = t < 1.0
    shrink = np.where(outside & (rng.random(n) < 0.5), rng.random(n), 1.0)
    return X * (t * shrink)[:, None]


def check_consistency(
    inst: ProblemInstance,
    p: Polytope,
    seed: int = 0,
    n_samples: int = 1000,
    exact: bool = False,
    eps: float = EPS,
) -> ConsistencyReport:
    """Definition-level consistency check: downward closure plus rollover feasibility."""
    if p.dimension != inst.K + inst.M:
        raise PolytopeError(f"dimension {p.dimension} does not match K+M={inst.K + inst.M}")
    down = bool(np.all(p.A >= 0))
    scale = max(1.0, float(np.abs(p.rhs).max(initial=0.0)))
    if exact:
        return _exact_rollover(inst, p, down, eps * scale)
    rng = np.random.default_rng(seed)
    states = sample_states(p, rng, n_samples)
    images = np.zeros_like(states)
    images[:, : inst.M] = states[:, inst.K : inst.K + inst.M]
    viol = images @ p.A.T - p.rhs
    bad = np.nonzero((viol > eps * scale).any(axis=1))[0]
    if bad.size:
        i = int(bad[0])
        row = int(np.argmax(viol[i]))
        return ConsistencyReport(False, down, False, n_samples, "sampled", states[i], images[i], row)
    return ConsistencyReport(down, down, True, n_samples, "sampled")


def _exact_rollover(inst: ProblemInstance, p: Polytope, down: bool, tol: float) -> ConsistencyReport:
    """Maximize each constraint over rollover images; exact up to LP tolerance."""
    K, M, d = inst.K, inst.M, p.dimension
    T = np.zeros((d, d))
    for k in range(M):
        T[k, K + k] = 1.0
    for i, a in enumerate(p.A):
        obj = a @ T
        if not np.any(obj > 0):
            continue
        lp = LinearProgram(obj, p.A, (LE,) * p.rhs.size, p.rhs)
        sol = solve_lp(lp)
        if sol.status != "optimal":
            return ConsistencyReport(False, down, False, 0, "exact", None, None, i)
        if sol.objective > p.rhs[i] + tol:
            return ConsistencyReport(False, down, False, 0, "exact", sol.x, T @ sol.x, i)
    return ConsistencyReport(down, down, True, 0, "exact")

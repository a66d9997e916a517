"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Problems here are small (a few hundred rows at most), so a dense tableau is
simpler and fully deterministic. All variables are implicitly nonnegative and
the objective is maximized.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

EPS = 1e-9
_PIVOT_TOL = 1e-9

LE, GE, EQ = "<=", ">=", "="
_SENSES = (LE, GE, EQ)


class LpError(ValueError):
    """Malformed linear program."""


@dataclass(frozen=True, eq=False)
class LinearProgram:
    objective: np.ndarray
    A: np.ndarray
    senses: tuple[str, ...]
    rhs: np.ndarray
    var_names: tuple[str, ...] = ()
    row_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        c = np.asarray(self.objective, dtype=float).ravel()
        A = np.asarray(self.A, dtype=float)
        if A.size == 0:
            A = A.reshape(0, c.size)
        b = np.asarray(self.rhs, dtype=float).ravel()
        if A.ndim != 2 or A.shape[1] != c.size:
            raise LpError(f"constraint matrix shape {A.shape} does not match {c.size} variables")
        if b.size != A.shape[0] or len(self.senses) != A.shape[0]:
            raise LpError("rhs/senses length must equal the number of rows")
        if any(s not in _SENSES for s in self.senses):
            raise LpError(f"unknown relation in {self.senses}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise LpError("non-finite coefficient")
        names = tuple(self.var_names) or tuple(f"x{i}" for i in range(c.size))
        rows = tuple(self.row_names) or tuple(f"r{i}" for i in range(b.size))
        if len(names) != c.size or len(rows) != b.size:
            raise LpError("name label count mismatch")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "rhs", b)
        object.__setattr__(self, "senses", tuple(self.senses))
        object.__setattr__(self, "var_names", names)
        object.__setattr__(self, "row_names", rows)

    @property
    def n_vars(self) -> int:
        return self.objective.size

    @property
    def n_rows(self) -> int:
        return self.rhs.size


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: str
    objective: float
    x: np.ndarray
    slacks: np.ndarray
    var_names: tuple[str, ...] = ()
    row_names: tuple[str, ...] = ()
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"

    def value(self, name: str) -> float:
        return float(self.x[self.var_names.index(name)])

    def values(self) -> dict[str, float]:
        return {n: float(v) for n, v in zip(self.var_names, self.x)}

    def tight(self, tol: float = 1e-7) -> list[str]:
        return [n for n, s in zip(self.row_names, self.slacks) if abs(s) <= tol]


class ModelBuilder:
    """Incremental LP construction by variable name."""

    def __init__(self) -> None:
        self._names: list[str] = []
        self._index: dict[str, int] = {}
        self._rows: list[tuple[dict[int, float], str, float, str]] = []
        self._obj: dict[int, float] = {}

    def var(self, name: str) -> int:
        if name in self._index:
            raise LpError(f"duplicate variable {name}")
        self._index[name] = len(self._names)
        self._names.append(name)
        return self._index[name]

    def __getitem__(self, name: str) -> int:
        return self._index[name]

    def add(self, terms: dict[int, float], sense: str, rhs: float, name: str = "") -> None:
        self._rows.append((dict(terms), sense, float(rhs), name or f"r{len(self._rows)}"))

    def maximize(self, terms: dict[int, float]) -> None:
        self._obj = dict(terms)

    def build(self) -> LinearProgram:
        n = len(self._names)
        A = np.zeros((len(self._rows), n))
        for r, (terms, _, _, _) in enumerate(self._rows):
            for j, v in terms.items():
                A[r, j] += v
        c = np.zeros(n)
        for j, v in self._obj.items():
            c[j] += v
        return LinearProgram(
            objective=c,
            A=A,
            senses=tuple(r[1] for r in self._rows),
            rhs=np.array([r[2] for r in self._rows]),
            var_names=tuple(self._names),
            row_names=tuple(r[3] for r in self._rows),
        )


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    col_vals = T[:, col].copy()
    col_vals[row] = 0.0
    nz = np.nonzero(np.abs(col_vals) > 0.0)[0]
    if nz.size:
        T[nz] -= np.outer(col_vals[nz], T[row])


_REFRESH = 32


def _reinvert(T: np.ndarray, F: np.ndarray, b: np.ndarray, c: np.ndarray, basis: np.ndarray) -> None:
    """Rebuild the tableau from the original columns ``F`` for the current basis.

    Pivoting accumulates round-off; recomputing B^-1 [F | b] from scratch keeps
    badly scaled problems on track. Left unchanged if the basis looks singular.
    """
    m = basis.size
    try:
        body = np.linalg.solve(F[:, basis], np.column_stack([F, b]))
    except np.linalg.LinAlgError:
        return
    if not np.all(np.isfinite(body)):
        return
    xb = body[:, -1]
    if xb.min(initial=0.0) < -1e-7 * max(1.0, float(np.abs(xb).max(initial=0.0))):
        return  # the drifted tableau is closer to a feasible basis; keep it
    body[:, -1] = np.maximum(xb, 0.0)
    T[:m] = body
    T[m, :-1] = c[basis] @ body[:, :-1] - c
    T[m, -1] = c[basis] @ body[:, -1]


_STALL = 50


def _leaving_row(T: np.ndarray, basis: np.ndarray, col: int, strict: bool) -> int:
    """Ratio test. Harris two-pass by default; strict Bland when ``strict``.

    Harris: find the largest step that keeps every basic value above -EPS, then
    among rows blocking before that step take the largest pivot element. Bland:
    among exact minimum ratios take the lowest basic index.
    """
    m = T.shape[0] - 1
    column = T[:m, col]
    pos = np.nonzero(column > _PIVOT_TOL)[0]
    if pos.size == 0:
        return -1
    rhs = T[pos, -1]
    piv = column[pos]
    if strict:
        ratios = rhs / piv
        best = ratios.min()
        ties = pos[ratios <= best + EPS * max(1.0, abs(best))]
        return int(ties[np.argmin(basis[ties])])
    theta = ((rhs + EPS) / piv).min()
    cand = np.nonzero(rhs / piv <= theta)[0]
    big = piv[cand].max()
    # near-equal pivots: lowest basic index keeps the choice deterministic
    pick = cand[piv[cand] >= big * (1 - 1e-12)]
    return int(pos[pick[np.argmin(basis[pos[pick]])]])


def _run(
    T: np.ndarray,
    basis: np.ndarray,
    allowed: int,
    max_iter: int,
    refresh=None,
    stop_at: float = np.inf,
) -> tuple[str, int]:
    """Maximize the objective stored in the last row (as reduced costs -c).

    Entering: lowest-index column with negative reduced cost (Bland). Leaving:
    Harris ratio test, switching to Bland's lowest-index rule after a run of
    degenerate pivots so cycling cannot persist. Stops early once the objective
    reaches ``stop_at`` (phase 1 only needs feasibility).
    """
    m = T.shape[0] - 1
    stall, last = 0, T[m, -1]
    for it in range(max_iter):
        if refresh is not None and it and it % _REFRESH == 0:
            refresh()
        if T[m, -1] >= stop_at:
            return "optimal", it
        cost = T[m, :allowed]
        cand = np.nonzero(cost < -EPS)[0]
        if cand.size == 0:
            return "optimal", it
        col = int(cand[0])
        row = _leaving_row(T, basis, col, strict=stall >= _STALL)
        if row < 0:
            return "unbounded", it
        _pivot(T, row, col)
        basis[row] = col
        rhs = T[:m, -1]
        rhs[(rhs < 0) & (rhs > -10 * EPS)] = 0.0
        if T[m, -1] > last + EPS * max(1.0, abs(last)):
            stall, last = 0, T[m, -1]
        else:
            stall += 1
    raise RuntimeError("simplex iteration limit reached")


def solve_lp(lp: LinearProgram, max_iter: int = 50_000) -> LpSolution:
    """Solve ``max c.x s.t. A x (<=,>=,=) b, x >= 0``."""
    # row equilibration; tolerances below are absolute, so tiny rows would vanish
    scale = np.abs(lp.A).max(axis=1, initial=0.0)
    scale[scale == 0.0] = 1.0
    A = lp.A / scale[:, None]
    b = lp.rhs / scale
    senses = list(lp.senses)
    m, n = A.shape
    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1
    for i in np.nonzero(flip)[0]:
        senses[i] = {LE: GE, GE: LE, EQ: EQ}[senses[i]]

    n_slack = sum(s != EQ for s in senses)
    n_art = sum(s != LE for s in senses)
    total = n + n_slack + n_art
    F = np.zeros((m, total))
    F[:, :n] = A
    basis = np.empty(m, dtype=np.int64)
    k_s, k_a = n, n + n_slack
    for i, s in enumerate(senses):
        if s == LE:
            F[i, k_s] = 1.0
            basis[i] = k_s
            k_s += 1
        else:
            if s == GE:
                F[i, k_s] = -1.0
                k_s += 1
            F[i, k_a] = 1.0
            basis[i] = k_a
            k_a += 1
    first_art = n + n_slack
    T = np.zeros((m + 1, total + 1))
    T[:m, :total] = F
    T[:m, -1] = b
    iters = 0

    if n_art:
        # phase 1: maximize -sum(artificials)
        c1 = np.zeros(total)
        c1[first_art:] = -1.0
        _reinvert(T, F, b, c1, basis)
        feas_tol = 1e-9 * max(1.0, float(np.abs(b).max(initial=0.0)))
        status, iters = _run(
            T, basis, total, max_iter, lambda: _reinvert(T, F, b, c1, basis), stop_at=-feas_tol
        )
        if T[m, -1] < -100 * feas_tol:
            return _failed(lp, "infeasible", iters)
        # drive remaining artificials out of the basis
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if basis[i] >= first_art:
                # the artificial sits at (numerically) zero; pivot on the largest entry
                T[i, -1] = 0.0
                row = np.abs(T[i, :first_art])
                j = int(np.argmax(row)) if row.size else 0
                if row.size and row[j] > 1e-9:
                    _pivot(T, i, j)
                    basis[i] = j
                else:
                    keep[i] = False  # redundant row
        if not keep.all():
            T = np.vstack([T[:m][keep], T[m:]])
            basis = basis[keep]
            F, b = F[keep], b[keep]
            m = basis.size
        T = np.hstack([T[:, :first_art], T[:, -1:]])
        F = F[:, :first_art]

    c2 = np.zeros(first_art)
    c2[:n] = lp.objective
    _reinvert(T, F, b, c2, basis)
    status, it2 = _run(T, basis, first_art, max_iter, lambda: _reinvert(T, F, b, c2, basis))
    iters += it2
    if status != "optimal":
        return _failed(lp, status, iters)
    _reinvert(T, F, b, c2, basis)

    x = np.zeros(first_art)
    x[basis] = T[:m, -1]
    xs = x[:n]
    xs[np.abs(xs) < 1e-13] = 0.0
    slacks = _slacks(lp, xs)
    if np.any(slacks / scale < -1e-7 * max(1.0, float(np.abs(b).max(initial=0.0)))):
        # round-off broke feasibility; never report such a point as optimal
        return _failed(lp, "numerical", iters)
    return LpSolution(
        status="optimal",
        objective=float(lp.objective @ xs),
        x=xs,
        slacks=slacks,
        var_names=lp.var_names,
        row_names=lp.row_names,
        iterations=iters,
    )


def _slacks(lp: LinearProgram, x: np.ndarray) -> np.ndarray:
    ax = lp.A @ x
    out = np.empty(lp.n_rows)
    for i, s in enumerate(lp.senses):
        if s == LE:
            out[i] = lp.rhs[i] - ax[i]
        elif s == GE:
            out[i] = ax[i] - lp.rhs[i]
        else:
            out[i] = -abs(ax[i] - lp.rhs[i])
    return out


def _failed(lp: LinearProgram, status: str, iters: int) -> LpSolution:
    return LpSolution(
        status=status,
        objective=float("nan") if status == "infeasible" else float("inf"),
        x=np.full(lp.n_vars, np.nan),
        slacks=np.full(lp.n_rows, np.nan),
        var_names=lp.var_names,
        row_names=lp.row_names,
        iterations=iters,
    )


def linear_program(
    objective: Sequence[float],
    rows: Sequence[tuple[Sequence[float], str, float]],
    var_names: Sequence[str] = (),
) -> LinearProgram:
    """Convenience constructor from ``(coeffs, relation, rhs)`` triples."""
    n = len(objective)
    A = np.array([r[0] for r in rows], dtype=float).reshape(len(rows), n)
    return LinearProgram(
        objective=np.asarray(objective, dtype=float),
        A=A,
        senses=tuple(r[1] for r in rows),
        rhs=np.array([r[2] for r in rows], dtype=float),
        var_names=tuple(var_names),
    )

"""The POLYRA online policy: acceptance, leftover service and period rollover."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    EPS,
    ArrivalEvent,
    ArrivalSequence,
    PeriodTrace,
    ProblemInstance,
    opt_period,
    period_cr,
)
from .polytope import InfeasibleStateError, Polytope, PolytopeError, max_increment


class CapacityError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class BucketState:
    row1: np.ndarray
    row2: np.ndarray

    @classmethod
    def zero(cls, inst: ProblemInstance) -> "BucketState":
        return cls(np.zeros(inst.K), np.zeros(inst.M))

    @classmethod
    def from_vector(cls, inst: ProblemInstance, x: np.ndarray) -> "BucketState":
        x = np.asarray(x, dtype=float)
        return cls(x[: inst.K].copy(), x[inst.K : inst.K + inst.M].copy())

    def vector(self) -> np.ndarray:
        return np.concatenate([self.row1, self.row2])


@dataclass(frozen=True, eq=False)
class AcceptResult:
    accepted_row2: float
    accepted_row1: float
    state: BucketState

    @property
    def accepted(self) -> float:
        return self.accepted_row2 + self.accepted_row1


@dataclass(frozen=True, eq=False)
class PeriodClose:
    served_row2: np.ndarray
    carried: np.ndarray
    reward: float
    next_state: BucketState


@dataclass(frozen=True, eq=False)
class SimulationReport:
    traces: tuple[PeriodTrace, ...]
    min_period_cr: float
    total_reward: float
    total_opt: float

    def to_dict(self) -> dict:
        return {
            "periods": [t.to_dict() for t in self.traces],
            "min_period_cr": self.min_period_cr,
            "total_reward": self.total_reward,
            "total_opt": self.total_opt,
        }


def _check_dimension(inst: ProblemInstance, p: Polytope) -> None:
    if p.dimension != inst.K + inst.M:
        raise PolytopeError(f"polytope dimension {p.dimension} != K+M = {inst.K + inst.M}")


def _tol(p: Polytope) -> float:
    return EPS * max(1.0, float(p.rhs.max(initial=0.0)))


def polyra_accept(inst: ProblemInstance, p: Polytope, state: BucketState, event: ArrivalEvent) -> AcceptResult:
    """Accept as much of ``event`` as the polytope allows, row 2 first for flexible types."""
    _check_dimension(inst, p)
    k = event.agent_type
    if not 1 <= k <= inst.K:
        raise ValueError(f"type {k} outside 1..{inst.K}")
    x = state.vector()
    if not p.contains(x, _tol(p)):
        raise InfeasibleStateError(f"state {x} infeasible in {p.label}")
    e2 = 0.0
    if k <= inst.M:
        e2 = max_increment(p, x, inst.K + k - 1, event.mass)
        x[inst.K + k - 1] += e2
    e1 = max_increment(p, x, k - 1, event.mass - e2)
    x[k - 1] += e1
    return AcceptResult(e2, e1, BucketState.from_vector(inst, x))


def end_of_period(inst: ProblemInstance, state: BucketState) -> PeriodClose:
    """Serve row 2 from leftover capacity (highest type first) and roll the rest over."""
    r = inst.r
    leftover = inst.C - float(state.row1.sum())
    if leftover < -EPS * max(1.0, inst.C):
        raise CapacityError(f"row 1 uses {state.row1.sum()} > C = {inst.C}")
    leftover = max(leftover, 0.0)
    served = np.zeros(inst.M)
    for k in range(inst.M - 1, -1, -1):
        served[k] = min(leftover, state.row2[k])
        leftover -= served[k]
    carried = state.row2 - served
    reward = float(r @ state.row1 + r[: inst.M] @ served)
    nxt = np.zeros(inst.K)
    nxt[: inst.M] = carried
    return PeriodClose(served, carried, reward, BucketState(nxt, np.zeros(inst.M)))


def run_simulation(inst: ProblemInstance, p: Polytope, seq: ArrivalSequence) -> SimulationReport:
    _check_dimension(inst, p)
    seq.check(inst)
    tol = _tol(p)
    state = BucketState.zero(inst)
    periods = list(seq.periods) + [()]
    traces = []
    for t, events in enumerate(periods, start=1):
        carried_in = float(state.row1.sum())
        accepted = np.zeros(inst.K)
        rejected = np.zeros(inst.K)
        for e in events:
            res = polyra_accept(inst, p, state, e)
            state = res.state
            accepted[e.agent_type - 1] += res.accepted
            rejected[e.agent_type - 1] += e.mass - res.accepted
        close = end_of_period(inst, state)
        served = state.row1.copy()
        served[: inst.M] += close.served_row2
        opt = opt_period(inst, events)
        traces.append(
            PeriodTrace(
                t=t,
                served_mass_by_type=tuple(map(float, served)),
                reward=float(close.reward),
                opt=float(opt),
                cr=float(period_cr(close.reward, opt)),
                accepted_by_type=tuple(map(float, accepted)),
                rejected_by_type=tuple(map(float, rejected)),
                carried=tuple(map(float, close.carried)),
                carried_in=carried_in,
            )
        )
        state = close.next_state
        if not p.contains(state.vector(), tol):
            raise InfeasibleStateError(f"rollover left state {state.vector()} outside {p.label}")
    crs = [tr.cr for tr in traces if tr.opt > EPS]
    return SimulationReport(
        traces=tuple(traces),
        min_period_cr=float(min(crs, default=1.0)),
        total_reward=float(sum(tr.reward for tr in traces)),
        total_opt=float(sum(tr.opt for tr in traces)),
    )

"""Problem instances, arrival sequences and clairvoyant benchmarks."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .simplex import LE, ModelBuilder, solve_lp

EPS = 1e-9


class InstanceError(ValueError):
    """Base class for invalid problem instances."""


class RewardOrderError(InstanceError):
    pass


class FlexibleCountError(InstanceError):
    pass


class NonPositiveError(InstanceError):
    pass


class SequenceError(ValueError):
    pass


def validate_instance(inst) -> None:
    """Raise an ``InstanceError`` subclass unless ``inst`` is a valid instance."""
    K, M, C = inst.K, inst.M, inst.C
    r = tuple(inst.rewards)
    if int(K) != K or K < 2:
        raise InstanceError(f"K must be an integer >= 2, got {K}")
    if len(r) != K:
        raise InstanceError(f"expected {K} rewards, got {len(r)}")
    if int(M) != M or M < 0 or M >= K:
        raise FlexibleCountError(f"M must satisfy 0 <= M < K, got M={M}, K={K}")
    if not math.isfinite(C) or C <= 0:
        raise NonPositiveError(f"capacity must be positive, got {C}")
    if any(not math.isfinite(x) or x <= 0 for x in r):
        raise NonPositiveError(f"rewards must be positive, got {r}")
    if any(a >= b for a, b in zip(r, r[1:])):
        raise RewardOrderError(f"rewards must be strictly increasing, got {r}")


@dataclass(frozen=True)
class ProblemInstance:
    K: int
    M: int
    C: float
    rewards: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "rewards", tuple(float(x) for x in self.rewards))
        object.__setattr__(self, "C", float(self.C))
        validate_instance(self)

    @property
    def r(self) -> np.ndarray:
        return np.array(self.rewards)

    @property
    def dimension(self) -> int:
        return self.K + self.M

    def ratio(self, i: int) -> float:
        """r_{i-1}/r_i for 1-based i, with r_0 = 0."""
        return 0.0 if i == 1 else self.rewards[i - 2] / self.rewards[i - 1]

    @classmethod
    def geometric(cls, K: int, M: int, gamma: float, C: float = 1.0) -> "ProblemInstance":
        """Rewards with constant ratio r_{i-1}/r_i = gamma and r_K = 1."""
        return cls(K, M, C, tuple(gamma ** (K - i) for i in range(1, K + 1)))

    def to_dict(self) -> dict:
        return {"K": self.K, "M": self.M, "C": self.C, "rewards": list(self.rewards)}

    @classmethod
    def from_dict(cls, d: dict) -> "ProblemInstance":
        try:
            return cls(int(d["K"]), int(d["M"]), float(d["C"]), tuple(float(x) for x in d["rewards"]))
        except (KeyError, TypeError) as exc:
            raise InstanceError(f"malformed instance: {exc}") from exc


@dataclass(frozen=True)
class ArrivalEvent:
    agent_type: int
    mass: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "mass", float(self.mass))
        if int(self.agent_type) != self.agent_type or self.agent_type < 1:
            raise SequenceError(f"agent type must be a positive integer, got {self.agent_type}")
        if not math.isfinite(self.mass) or self.mass < 0:
            raise SequenceError(f"mass must be finite and nonnegative, got {self.mass}")


@dataclass(frozen=True)
class ArrivalSequence:
    periods: tuple[tuple[ArrivalEvent, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "periods", tuple(tuple(p) for p in self.periods))

    @property
    def T(self) -> int:
        return len(self.periods)

    def events(self) -> list[ArrivalEvent]:
        return [e for p in self.periods for e in p]

    def check(self, inst: ProblemInstance) -> None:
        for e in self.events():
            if e.agent_type > inst.K:
                raise SequenceError(f"type {e.agent_type} exceeds K={inst.K}")

    @classmethod
    def of(cls, *periods: Iterable[tuple[int, float]]) -> "ArrivalSequence":
        """Build from plain ``(type, mass)`` pairs, one iterable per period."""
        return cls(tuple(tuple(ArrivalEvent(int(k), m) for k, m in p) for p in periods))

    def as_tuples(self) -> list[list[tuple[int, float]]]:
        return [[(e.agent_type, e.mass) for e in p] for p in self.periods]

    def to_dict(self) -> dict:
        return {"periods": [[{"type": e.agent_type, "mass": e.mass} for e in p] for p in self.periods]}

    @classmethod
    def from_dict(cls, d: dict) -> "ArrivalSequence":
        try:
            return cls(
                tuple(
                    tuple(ArrivalEvent(int(e["type"]), float(e["mass"])) for e in p)
                    for p in d["periods"]
                )
            )
        except (KeyError, TypeError) as exc:
            raise SequenceError(f"malformed sequence: {exc}") from exc


@dataclass(frozen=True)
class PeriodTrace:
    t: int
    served_mass_by_type: tuple[float, ...]
    reward: float
    opt: float
    cr: float
    accepted_by_type: tuple[float, ...] = ()
    rejected_by_type: tuple[float, ...] = ()
    carried: tuple[float, ...] = ()
    carried_in: float = 0.0

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "reward": self.reward,
            "opt": self.opt,
            "cr": self.cr,
            "served_mass_by_type": list(self.served_mass_by_type),
            "accepted_by_type": list(self.accepted_by_type),
            "rejected_by_type": list(self.rejected_by_type),
            "carried": list(self.carried),
            "carried_in": self.carried_in,
        }


def period_cr(reward: float, opt: float) -> float:
    return 1.0 if opt <= EPS else reward / opt


def opt_period(inst: ProblemInstance, events: Sequence[ArrivalEvent]) -> float:
    """Fractional knapsack with unit sizes: greedy by reward."""
    mass = np.zeros(inst.K)
    for e in events:
        mass[e.agent_type - 1] += e.mass
    left, total = inst.C, 0.0
    for k in range(inst.K - 1, -1, -1):
        take = min(left, mass[k])
        total += take * inst.rewards[k]
        left -= take
        if left <= 0:
            break
    return total


def opt_total_flexible(inst: ProblemInstance, seq: ArrivalSequence, include_dummy: bool = False) -> float:
    """Clairvoyant total reward when flexible agents may be served one period late.

    By default service happens only inside the sequence's own horizon 1..T, so a
    flexible agent arriving in period T must be served in T. ``include_dummy``
    also opens period T+1 for such agents.
    """
    seq.check(inst)
    horizon = seq.T + (1 if include_dummy else 0)
    mb = ModelBuilder()
    obj: dict[int, float] = {}
    per_period: dict[int, dict[int, float]] = {}
    for t, period in enumerate(seq.periods):
        for n, e in enumerate(period):
            taus = [t, t + 1] if e.agent_type <= inst.M else [t]
            idx = []
            for tau in taus:
                if tau >= horizon:
                    continue
                j = mb.var(f"x[{t + 1},{n + 1}]@{tau + 1}")
                idx.append(j)
                obj[j] = inst.rewards[e.agent_type - 1]
                per_period.setdefault(tau, {})[j] = 1.0
            if idx:
                mb.add({j: 1.0 for j in idx}, LE, e.mass, f"mass[{t + 1},{n + 1}]")
    if not obj:
        return 0.0
    for tau, terms in sorted(per_period.items()):
        mb.add(terms, LE, inst.C, f"cap[{tau + 1}]")
    mb.maximize(obj)
    sol = solve_lp(mb.build())
    if not sol.optimal:
        raise RuntimeError(f"benchmark LP returned {sol.status}")
    return sol.objective


def big_G(inst: ProblemInstance) -> float:
    return inst.K - inst.M - sum(inst.ratio(i) for i in range(inst.M + 2, inst.K + 1))


def ball_queyranne_L(inst: ProblemInstance) -> float:
    r = inst.rewards
    return 1.0 / (inst.K - sum(r[i] / r[i + 1] for i in range(inst.K - 1)))


def load_json(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def load_instance(path: str | Path) -> ProblemInstance:
    return ProblemInstance.from_dict(load_json(path))


def load_sequence(path: str | Path) -> ArrivalSequence:
    return ArrivalSequence.from_dict(load_json(path))

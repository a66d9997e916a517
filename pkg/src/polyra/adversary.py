"""Worst-case arrival families and an exhaustive small-grid adversary."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .core import EPS, ArrivalEvent, ArrivalSequence, ProblemInstance
from .polytope import Polytope, PolytopeError

SEQUENCE_BUDGET = 10_000_000


class BudgetExceeded(ValueError):
    pass


@dataclass(frozen=True)
class SequenceFamily:
    label: str
    primary: ArrivalSequence
    members: tuple[ArrivalSequence, ...]
    member_labels: tuple[str, ...] = ()
    notes: tuple[str, ...] = field(default=())

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def is_prefix_family(self) -> bool:
        """Every member's event stream is a prefix of the primary's, period by period."""
        return all(is_truncation(m, self.primary) for m in self.members)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "primary": self.primary.to_dict(),
            "members": [
                {"label": lab, **m.to_dict()} for lab, m in zip(self._labels(), self.members)
            ],
            "notes": list(self.notes),
        }

    def _labels(self) -> tuple[str, ...]:
        return self.member_labels or tuple(str(i + 1) for i in range(len(self.members)))


def is_truncation(seq: ArrivalSequence, primary: ArrivalSequence) -> bool:
    """True when ``seq`` sends an initial segment of ``primary`` and nothing else.

    Periods fully sent must match exactly; the cut period must be a prefix of the
    primary's period; later periods must be empty.
    """
    if seq.T > primary.T:
        return False
    cut = False
    for t in range(primary.T):
        mine = seq.periods[t] if t < seq.T else ()
        theirs = primary.periods[t]
        if cut:
            if mine:
                return False
            continue
        if mine != theirs[: len(mine)]:
            return False
        if len(mine) < len(theirs):
            cut = True
    return True


def _blocks(types, C: float) -> tuple[ArrivalEvent, ...]:
    return tuple(ArrivalEvent(k, C) for k in types)


def _truncations(periods: list[tuple[ArrivalEvent, ...]]) -> list[ArrivalSequence]:
    """All block-boundary cuts of a sequence, shortest first, ending with the full one."""
    out = []
    T = len(periods)
    for t in range(T):
        for n in range(1, len(periods[t]) + 1):
            cut = [periods[s] if s < t else () for s in range(T)]
            cut[t] = periods[t][:n]
            out.append(ArrivalSequence(tuple(cut)))
    return out


def staircase_family(inst: ProblemInstance) -> SequenceFamily:
    K, M, C = inst.K, inst.M, inst.C
    periods = [_blocks(range(1, K + 1), C), _blocks(range(M + 1, K + 1), C)]
    members = _truncations(periods)
    return SequenceFamily("staircase", ArrivalSequence(tuple(periods)), tuple(members))


def three_type_inputs(inst: ProblemInstance) -> SequenceFamily:
    """The four three-type inputs a-d. Input a opens with 2C of type 1."""
    if inst.K != 3 or inst.M not in (1, 2):
        raise PolytopeError("three-type inputs need K=3 and M in {1,2}")
    C, M = inst.C, inst.M
    a = ArrivalSequence.of([(1, 2 * C), (2, C), (3, C)], [(k, C) for k in range(M + 1, 4)])
    b = ArrivalSequence.of([(1, C), (2, C), (3, C)], [(M + 1, C)])
    c = ArrivalSequence.of([(1, C), (2, C)], [])
    d = ArrivalSequence.of([(1, C)], [])
    return SequenceFamily(
        "three-type",
        a,
        (a, b, c, d),
        ("a", "b", "c", "d"),
        ("input a is not a literal prefix extension of b; only b, c, d nest",),
    )


def example1_variants(inst: ProblemInstance) -> list[SequenceFamily]:
    """Staircases with flexible types removed, plus a three-period staircase."""
    K, M, C = inst.K, inst.M, inst.C
    notes = () if K >= 4 else (f"K={K} < 4: variants only informative for K > 3",)
    out = []
    for j in range(1, M + 1):
        keep = [k for k in range(1, K + 1) if not j <= k <= M]
        periods = [_blocks(keep, C), _blocks(range(M + 1, K + 1), C)]
        out.append(
            SequenceFamily(
                f"drop-types-{j}..{M}",
                ArrivalSequence(tuple(periods)),
                tuple(_truncations(periods)),
                notes=notes,
            )
        )
    full = _blocks(range(1, K + 1), C)
    periods = [full, full, _blocks(range(M + 1, K + 1), C)]
    out.append(
        SequenceFamily("three-period", ArrivalSequence(tuple(periods)), tuple(_truncations(periods)), notes=notes)
    )
    return out


def flex_benchmark_family(inst: ProblemInstance) -> SequenceFamily:
    K, C = inst.K, inst.C
    if inst.M != K - 1:
        raise PolytopeError("flexible-benchmark family needs M = K-1")
    members = []
    for j in range(1, K + 1):
        block = [(k, 2 * C) for k in range(1, j + 1)]
        members.append(ArrivalSequence.of(block, block if j == K else []))
    labels = tuple(f"I^{j}" for j in range(1, K + 1))
    return SequenceFamily("flex-benchmark", members[-1], tuple(members), labels)


# ---------------------------------------------------------------- exhaustive search


@dataclass(frozen=True)
class AdversaryResult:
    min_cr: float
    witness: ArrivalSequence
    sequences: int


def sequence_count(K: int, q: int, T: int, B: int) -> int:
    """Sequences with exactly T periods (empty allowed) and at most B events in total."""
    return sum((K * q) ** b * math.comb(b + T - 1, T - 1) for b in range(B + 1))


def exhaustive_adversary(
    inst: ProblemInstance,
    p: Polytope,
    q: int = 4,
    T: int = 2,
    B: int | None = None,
    budget: int = SEQUENCE_BUDGET,
) -> AdversaryResult:
    """Minimum per-period ratio over all grid sequences.

    Events are (type, j*C/q) for j = 1..q; at most ``B`` events are spread over
    at most ``T`` periods. The first sequence in enumeration order attaining the
    minimum is returned as the witness.
    """
    if p.dimension != inst.K + inst.M:
        raise PolytopeError(f"polytope dimension {p.dimension} != K+M = {inst.K + inst.M}")
    B = 2 * inst.K if B is None else B
    if q < 1 or T < 1 or B < 0:
        raise ValueError("q, T must be >= 1 and B >= 0")
    n = sequence_count(inst.K, q, T, B)
    if n > budget:
        raise BudgetExceeded(f"{n} sequences exceed the budget of {budget}")
    best, path, length, count = _kernels.search(
        np.ascontiguousarray(p.A),
        np.ascontiguousarray(p.rhs),
        inst.r,
        inst.K,
        inst.M,
        inst.C,
        q,
        T,
        B,
        EPS,
    )
    return AdversaryResult(float(best), _decode(inst, path[:length], q, T), int(count))


def _decode(inst: ProblemInstance, path, q: int, T: int) -> ArrivalSequence:
    periods: list[list[tuple[int, float]]] = [[]]
    for c in path:
        c = int(c)
        if c == inst.K * q:
            periods.append([])
        else:
            periods[-1].append((c // q + 1, (c % q + 1) * inst.C / q))
    while len(periods) < T:
        periods.append([])
    return ArrivalSequence.of(*periods)


def grid_sequences(K: int, C: float, q: int, T: int, B: int):
    """Generate the same sequences the search visits, in the same order (slow; for tests)."""
    events = [(k, j * C / q) for k in range(1, K + 1) for j in range(1, q + 1)]

    def rec(prefix: list[list[tuple[int, float]]], used: int):
        yield ArrivalSequence.of(*(prefix + [[]] * (T - len(prefix))))
        if used < B:
            for e in events:
                prefix[-1].append(e)
                yield from rec(prefix, used + 1)
                prefix[-1].pop()
        if len(prefix) < T:
            prefix.append([])
            yield from _skip_first(rec(prefix, used))
            prefix.pop()

    yield from rec([[]], 0)


def _skip_first(gen):
    next(gen)
    yield from gen

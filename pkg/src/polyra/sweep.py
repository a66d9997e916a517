"""Parameter sweeps over reward ratios (or G) written as fixed-format CSV."""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import lp
from .core import ProblemInstance, ball_queyranne_L, big_G
from .polytope import f1, f1_curve, f2, f2_curve, gamma_bar_closed_form, near_optimal_nests


class SweepError(ValueError):
    pass


def optimal_cr(inst: ProblemInstance) -> float:
    """Best achievable ratio where a tight value is known, else NaN."""
    if inst.M == 0:
        return ball_queyranne_L(inst)
    if inst.K == 2:
        return lp.gamma_lp_closed_form(inst)
    if inst.K == 3:
        return lp.solve_upper3(inst).gamma_star
    return math.nan


def _needs_flex(fn: Callable[[ProblemInstance], float]) -> Callable[[ProblemInstance], float]:
    return lambda inst: fn(inst) if inst.M >= 1 else math.nan


QUANTITIES: dict[str, Callable[[ProblemInstance], float]] = {
    "optimal_cr": optimal_cr,
    "gamma_star": lambda i: lp.solve_upper3(i).gamma_star if i.K == 3 and i.M >= 1 else math.nan,
    "gamma_lp": _needs_flex(lp.gamma_lp_closed_form),
    "gamma_lp_solved": _needs_flex(lambda i: lp.solve_lp(lp.simple_upper_program(i)).objective),
    "gamma_up": _needs_flex(lp.gamma_up),
    "gamma_bar": _needs_flex(gamma_bar_closed_form),
    "gamma_nest_nbar": _needs_flex(lambda i: lp.solve_nest_cr(i, near_optimal_nests(i))),
    "gamma_nest_star": lambda i: lp.solve_gamma_nest_star(i)[0],
    "L": ball_queyranne_L,
    "G": big_G,
    "f1": _needs_flex(f1),
    "f2": _needs_flex(f2),
    "f1f2": _needs_flex(lambda i: f1(i) * f2(i)),
}

F_QUANTITIES = {
    "f1": f1_curve,
    "f2": f2_curve,
    "f1f2": lambda G, small: f1_curve(G, small) * f2_curve(G, small),
}


def _grid(spec) -> tuple[float, ...]:
    if isinstance(spec, dict):
        try:
            pts = np.linspace(float(spec["start"]), float(spec["stop"]), int(spec["num"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise SweepError(f"bad grid {spec}: {exc}") from exc
        return tuple(round(float(x), 12) for x in pts)
    return tuple(float(x) for x in spec)


@dataclass(frozen=True)
class SweepSpec:
    """Rewards r_i = gamma**(K-i) for each gamma; one column per (quantity, M)."""

    K: int
    M: tuple[int, ...]
    gammas: tuple[float, ...]
    C: float = 1.0
    quantities: tuple[str, ...] = ("optimal_cr",)

    def __post_init__(self) -> None:
        g = np.asarray(self.gammas, dtype=float)
        if g.size == 0 or np.any(g <= 0) or np.any(g >= 1):
            raise SweepError("gamma grid must be nonempty and inside (0, 1)")
        if np.any(np.diff(g) <= 0):
            raise SweepError("gamma grid must be strictly increasing")
        if any(not 0 <= m < self.K for m in self.M):
            raise SweepError(f"every M must satisfy 0 <= M < K={self.K}")
        unknown = [q for q in self.quantities if q not in QUANTITIES]
        if unknown:
            raise SweepError(f"unknown quantities {unknown}; choose from {sorted(QUANTITIES)}")
        if self.C <= 0:
            raise SweepError("C must be positive")

    def columns(self) -> list[str]:
        return ["gamma"] + [f"{q}_M{m}" for q in self.quantities for m in self.M]

    def rows(self) -> list[list[float]]:
        out = []
        for g in self.gammas:
            insts = {m: ProblemInstance.geometric(self.K, m, g, self.C) for m in self.M}
            out.append([g] + [QUANTITIES[q](insts[m]) for q in self.quantities for m in self.M])
        return out


@dataclass(frozen=True)
class FSweepSpec:
    """Gap functions evaluated directly on a G grid, for either nest-size case."""

    G: tuple[float, ...]
    cases: tuple[str, ...] = ("small", "large")
    quantities: tuple[str, ...] = ("f1", "f2", "f1f2")

    def __post_init__(self) -> None:
        if not self.G or any(g < 1 for g in self.G):
            raise SweepError("G grid must be nonempty with G >= 1")
        if any(c not in ("small", "large") for c in self.cases):
            raise SweepError("cases must be 'small' (2n_M <= C) or 'large'")
        unknown = [q for q in self.quantities if q not in F_QUANTITIES]
        if unknown:
            raise SweepError(f"unknown quantities {unknown}")

    def columns(self) -> list[str]:
        return ["G"] + [f"{q}_{c}" for c in self.cases for q in self.quantities]

    def rows(self) -> list[list[float]]:
        return [
            [G] + [F_QUANTITIES[q](G, c == "small") for c in self.cases for q in self.quantities]
            for G in self.G
        ]


def spec_from_dict(d: dict) -> SweepSpec | FSweepSpec:
    kind = d.get("kind", "gamma")
    try:
        if kind == "gamma":
            M = d["M"]
            return SweepSpec(
                K=int(d["K"]),
                M=tuple(int(m) for m in (M if isinstance(M, list) else [M])),
                gammas=_grid(d["gammas"]),
                C=float(d.get("C", 1.0)),
                quantities=tuple(d.get("quantities", ["optimal_cr"])),
            )
        if kind == "f":
            return FSweepSpec(
                G=_grid(d["G"]),
                cases=tuple(d.get("cases", ["small", "large"])),
                quantities=tuple(d.get("quantities", ["f1", "f2", "f1f2"])),
            )
    except (KeyError, TypeError) as exc:
        raise SweepError(f"malformed sweep spec: {exc}") from exc
    raise SweepError(f"unknown sweep kind {kind!r}")


def _fmt(v: float) -> str:
    return "" if v is None or not math.isfinite(v) else f"{v:.6f}"


def to_csv(spec: SweepSpec | FSweepSpec) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(spec.columns())
    for row in spec.rows():
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_atomic(path: str | Path, text: str) -> None:
    """Write via a temp file in the target directory so errors leave nothing behind."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent if str(path.parent) else ".", prefix=".sweep-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_csv(text: str) -> dict[str, list[float]]:
    rows = list(csv.reader(io.StringIO(text)))
    head, body = rows[0], rows[1:]
    return {h: [float(r[j]) if r[j] else math.nan for r in body] for j, h in enumerate(head)}


def reference_curves(name: str) -> dict[str, list[float]]:
    """Bundled reference curves: two_type, three_type, f_small, f_large."""
    text = resources.files("polyra").joinpath("data", f"ref_{name}.csv").read_text(encoding="utf-8")
    return read_csv(text)


def standard_specs() -> dict[str, SweepSpec | FSweepSpec]:
    """Sweeps that regenerate the bundled reference curves."""
    g99 = {"start": 0.01, "stop": 0.99, "num": 99}
    G90 = {"start": 1.0, "stop": 9.9, "num": 90}
    return {
        "two_type": spec_from_dict({"K": 2, "M": [1, 0], "gammas": g99}),
        "three_type": spec_from_dict({"K": 3, "M": [2, 1, 0], "gammas": g99}),
        "f_small": spec_from_dict({"kind": "f", "G": G90, "cases": ["small"], "quantities": ["f1", "f2"]}),
        "f_large": spec_from_dict({"kind": "f", "G": G90, "cases": ["large"]}),
    }


def compare_to_reference(name: str, csv_text: str) -> tuple[float, int]:
    """Max abs deviation from the reference curve and number of points compared."""
    ours = read_csv(csv_text)
    ref = reference_curves(name)
    xkey = "gamma" if "gamma" in ref else "G"
    pairs = {
        "two_type": {"M1": "optimal_cr_M1", "M0": "optimal_cr_M0"},
        "three_type": {"M2": "optimal_cr_M2", "M1": "optimal_cr_M1", "M0": "optimal_cr_M0"},
        "f_small": {"f1": "f1_small", "f2": "f2_small"},
        "f_large": {"f1": "f1_large", "f2": "f2_large", "f1f2": "f1f2_large"},
    }[name]
    index = {round(x, 6): k for k, x in enumerate(ours[xkey])}
    worst, n = 0.0, 0
    for k, x in enumerate(ref[xkey]):
        j = index.get(round(x, 6))
        if j is None:
            continue  # e.g. gamma = 0 lies outside the valid instance range
        for rc, oc in pairs.items():
            worst = max(worst, abs(ref[rc][k] - ours[oc][j]))
            n += 1
    return worst, n

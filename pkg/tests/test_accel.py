import json
import os
import subprocess
import sys

import pytest

from polyra import _accel

SNIPPET = """
import json
from polyra import _accel
from polyra.adversary import exhaustive_adversary
from polyra.core import ProblemInstance
from polyra.polytope import near_optimal_nests, nested_polytope
inst = ProblemInstance(3, 1, 1.0, (0.2, 0.45, 1.0))
res = exhaustive_adversary(inst, nested_polytope(inst, near_optimal_nests(inst)), q=2, T=2, B=4)
print(json.dumps({"backend": _accel.backend(), "cr": res.min_cr.hex(), "n": res.sequences,
                  "w": res.witness.to_dict()}))
"""


def _run(disable: str):
    env = dict(os.environ, POLYRA_DISABLE_NUMBA=disable)
    proc = subprocess.run([sys.executable, "-c", SNIPPET], env=env, capture_output=True, text=True, timeout=600)
    assert proc.returncode == 0, proc.stderr
    return json.loads(proc.stdout.strip().splitlines()[-1])


def test_backends_agree_bit_for_bit():
    pure = _run("1")
    assert pure["backend"] == "python"
    fast = _run("0")
    pytest.importorskip("numba")
    assert fast["backend"] == "numba"
    assert {k: v for k, v in fast.items() if k != "backend"} == {k: v for k, v in pure.items() if k != "backend"}


def test_njit_fallback_is_identity(monkeypatch):
    monkeypatch.setattr(_accel, "NUMBA_ENABLED", False)

    def f(x):
        return x + 1

    assert _accel.njit(f) is f
    assert _accel.njit(cache=False)(f) is f
    assert _accel.backend() == "python"

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyra import lp
from polyra.adversary import (
    BudgetExceeded,
    example1_variants,
    exhaustive_adversary,
    flex_benchmark_family,
    grid_sequences,
    is_truncation,
    sequence_count,
    staircase_family,
    three_type_inputs,
)
from polyra.core import ArrivalSequence, ProblemInstance, opt_total_flexible
from polyra.engine import run_simulation
from polyra.polytope import (
    NestSizes,
    PolytopeError,
    build_B1,
    build_Bf,
    build_Bi,
    near_optimal_nests,
    nested_polytope,
    trivial_polytope,
)

from conftest import instances


def blocks(*types, C=1.0):
    return [(k, C) for k in types]


# ---------------------------------------------------------------- families


def test_staircase_two_types(k2):
    fam = staircase_family(k2)
    assert fam.primary == ArrivalSequence.of(blocks(1, 2), blocks(2))
    assert ArrivalSequence.of(blocks(1), []) in fam.members
    assert ArrivalSequence.of(blocks(1, 2), []) in fam.members
    assert fam.members[-1] == fam.primary
    assert fam.is_prefix_family()


def test_staircase_sizes():
    assert len(staircase_family(ProblemInstance(3, 1, 1.0, (1, 2, 3)))) == 5
    inst = ProblemInstance(4, 2, 3.0, (1, 2, 3, 4))
    fam = staircase_family(inst)
    assert fam.primary == ArrivalSequence.of(blocks(1, 2, 3, 4, C=3.0), blocks(3, 4, C=3.0))
    assert len(fam) == 2 * 4 - 2


def test_three_type_inputs(k3m1, k3m2):
    f1 = three_type_inputs(k3m1)
    a, b, c, d = f1.members
    assert a == ArrivalSequence.of([(1, 2.0), (2, 1.0), (3, 1.0)], [(2, 1.0), (3, 1.0)])
    assert d == ArrivalSequence.of([(1, 1.0)], [])
    assert three_type_inputs(k3m2).primary.periods[1] == ArrivalSequence.of([(3, 1.0)]).periods[0]
    # b, c, d nest; a is listed first but is not an extension of them
    assert is_truncation(c, b) and is_truncation(d, b) and is_truncation(d, c)
    assert not f1.is_prefix_family()
    assert f1.notes
    with pytest.raises(PolytopeError):
        three_type_inputs(ProblemInstance(2, 1, 1.0, (1, 2)))


def test_example1_variants():
    inst = ProblemInstance(4, 2, 3.0, (1, 3, 4, 400))
    fams = {f.label: f for f in example1_variants(inst)}
    assert fams["drop-types-2..2"].primary.periods[0] == ArrivalSequence.of(blocks(1, 3, 4, C=3.0)).periods[0]
    three = fams["three-period"].primary
    full = ArrivalSequence.of(blocks(1, 2, 3, 4, C=3.0)).periods[0]
    assert three.periods[0] == three.periods[1] == full
    assert three.periods[2] == ArrivalSequence.of(blocks(3, 4, C=3.0)).periods[0]
    no_flex = fams["drop-types-1..2"].primary
    assert no_flex.periods[0] == no_flex.periods[1] == ArrivalSequence.of(blocks(3, 4, C=3.0)).periods[0]
    assert all(f.is_prefix_family() for f in fams.values())
    assert not fams["three-period"].notes
    assert example1_variants(ProblemInstance(3, 1, 1.0, (1, 2, 3)))[0].notes


def test_flex_benchmark_family():
    k2 = ProblemInstance(2, 1, 1.0, (1, 2))
    fam = flex_benchmark_family(k2)
    assert fam.members[0] == ArrivalSequence.of([(1, 2.0)], [])
    assert fam.members[1] == ArrivalSequence.of([(1, 2.0), (2, 2.0)], [(1, 2.0), (2, 2.0)])
    with pytest.raises(PolytopeError):
        flex_benchmark_family(ProblemInstance(3, 1, 1.0, (1, 2, 3)))


@given(instances(K=st.integers(2, 6), M=lambda k: st.just(k - 1)))
def test_flex_benchmark_totals(inst):
    for j, seq in enumerate(flex_benchmark_family(inst), start=1):
        assert opt_total_flexible(inst, seq) == pytest.approx(2 * inst.rewards[j - 1] * inst.C, rel=1e-9)


@given(instances(K=st.integers(2, 6)))
def test_families_are_prefix_closed(inst):
    assert staircase_family(inst).is_prefix_family()
    for f in example1_variants(inst):
        assert f.is_prefix_family()


def test_family_json(k3m1):
    d = three_type_inputs(k3m1).to_dict()
    assert [m["label"] for m in d["members"]] == ["a", "b", "c", "d"]
    assert d["primary"]["periods"][0][0] == {"type": 1, "mass": 2.0}


# ---------------------------------------------------------------- exhaustive search


def brute(inst, p, q, T, B):
    best, witness, n = np.inf, None, 0
    for seq in grid_sequences(inst.K, inst.C, q, T, B):
        n += 1
        cr = run_simulation(inst, p, seq).min_period_cr
        if cr < best:
            best, witness = cr, seq
    return best, witness, n


@pytest.mark.parametrize(
    "inst, make, q, T, B",
    [
        (ProblemInstance(2, 1, 1.0, (1, 2)), "bf", 2, 2, 3),
        (ProblemInstance(2, 1, 1.5, (0.3, 2)), "bf", 3, 2, 2),
        (ProblemInstance(2, 0, 1.0, (1, 2)), "bi", 2, 3, 3),
        (ProblemInstance(3, 1, 1.0, (0.25, 0.5, 1)), "b1", 2, 2, 2),
        (ProblemInstance(3, 2, 2.0, (0.1, 0.5, 1)), "nbar", 2, 2, 2),
        (ProblemInstance(4, 2, 1.0, (0.1, 0.3, 0.5, 1)), "nbar", 1, 3, 3),
    ],
)
def test_search_matches_brute_force(inst, make, q, T, B):
    p = {
        "bf": lambda: build_Bf(inst),
        "bi": lambda: build_Bi(inst),
        "b1": lambda: build_B1(inst, lp.solve_upper3(inst)),
        "nbar": lambda: nested_polytope(inst, near_optimal_nests(inst)),
    }[make]()
    res = exhaustive_adversary(inst, p, q=q, T=T, B=B)
    best, witness, n = brute(inst, p, q, T, B)
    assert res.sequences == n == sequence_count(inst.K, q, T, B)
    assert res.min_cr == pytest.approx(best, abs=1e-12)
    assert res.witness == witness
    assert run_simulation(inst, p, res.witness).min_period_cr == pytest.approx(res.min_cr, abs=1e-12)


def test_two_type_optimum(k2):
    res = exhaustive_adversary(k2, build_Bf(k2), q=4, T=2, B=4)
    assert res.min_cr == pytest.approx(0.8, abs=1e-9)


def test_inflexible_two_type():
    inst = ProblemInstance(2, 0, 1.0, (1, 2))
    res = exhaustive_adversary(inst, build_Bi(inst), q=4, T=2, B=4)
    assert res.min_cr == pytest.approx(1 / (2 - 0.5), abs=1e-9)


def test_trivial_polytope_ratio(k2):
    res = exhaustive_adversary(k2, trivial_polytope(k2), q=4, T=2, B=4)
    assert res.min_cr == pytest.approx(0.5, abs=1e-9)


@given(
    instances(K=st.integers(2, 3), M=lambda k: st.integers(1, k - 1)),
    st.integers(1, 3),
    st.integers(1, 2),
)
@settings(max_examples=15)
def test_monotone_in_budget_horizon_and_grid(inst, B, T):
    p = nested_polytope(inst, near_optimal_nests(inst))
    base = exhaustive_adversary(inst, p, q=2, T=T, B=B).min_cr
    assert exhaustive_adversary(inst, p, q=2, T=T, B=B + 1).min_cr <= base + 1e-12
    assert exhaustive_adversary(inst, p, q=2, T=T + 1, B=B).min_cr <= base + 1e-12
    assert exhaustive_adversary(inst, p, q=4, T=T, B=B).min_cr <= base + 1e-12


def test_structured_sequences_attain_the_optimum(k2, k3m1):
    cr = min(run_simulation(k2, build_Bf(k2), s).min_period_cr for s in staircase_family(k2))
    assert cr == pytest.approx(0.8)
    sol = lp.solve_upper3(k3m1)
    p = build_B1(k3m1, sol)
    assert min(run_simulation(k3m1, p, s).min_period_cr for s in three_type_inputs(k3m1)) == pytest.approx(
        sol.gamma_star
    )


def test_budget_guard(k3m1):
    p = build_B1(k3m1, lp.solve_upper3(k3m1))
    with pytest.raises(BudgetExceeded):
        exhaustive_adversary(k3m1, p, q=4, T=3, B=8)
    with pytest.raises(PolytopeError):
        exhaustive_adversary(k3m1, build_Bf(ProblemInstance(2, 1, 1.0, (1, 2))))
    with pytest.raises(ValueError):
        exhaustive_adversary(k3m1, p, q=0)


def test_sequence_count_formula():
    assert sequence_count(2, 4, 2, 4) == 22_737
    assert sequence_count(3, 3, 2, 6) == 4_110_364
    assert sum(1 for _ in grid_sequences(2, 1.0, 1, 2, 2)) == sequence_count(2, 1, 2, 2)


def test_default_budget_is_twice_K(k2):
    res = exhaustive_adversary(k2, build_Bf(k2), q=1, T=2)
    assert res.sequences == sequence_count(2, 1, 2, 4)

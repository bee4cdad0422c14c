from fractions import Fraction

import pytest
from hypothesis import given, settings

from mkpsim import Instance, check_feasible, gen_adversarial, objective
from mkpsim.oracle import (
    OptimalSolution,
    approx_ratio,
    batch_round_greedy,
    bound_holds,
    brute_force_optimum,
    exact_optimum,
    strict_sequential_greedy,
    _branch_and_bound,
)

from conftest import small_instances


def family_optimum(n: int, W: int) -> int:
    """Independent closed form for the adversarial family: devote L knapsacks
    to unit-weight items (profit 2 each, at most W per knapsack) and fill the
    rest with one heavy item each; maximize over L."""
    return max(2 * min(n, L * W) + (n - L) * W for L in range(n + 1))


class TestExactOptimum:
    def test_family_n2_w10(self):
        opt = exact_optimum(gen_adversarial(2, 10))
        assert opt.opt == 20
        assert check_feasible(opt.assignment, gen_adversarial(2, 10)) is None

    def test_empty_instance(self):
        opt = exact_optimum(Instance.from_pairs([], [7]))
        assert opt.opt == 0

    def test_instance_a(self, instance_a):
        opt = exact_optimum(instance_a)
        assert opt.opt == 21
        assert objective(opt.assignment, instance_a) == 21
        assert check_feasible(opt.assignment, instance_a) is None

    @pytest.mark.parametrize("n", [1, 2, 4, 8])
    @pytest.mark.parametrize("W", [3, 10, 100])
    def test_family_grid_matches_closed_form(self, n, W):
        opt = exact_optimum(gen_adversarial(n, W))
        assert opt.opt == family_optimum(n, W)

    def test_budget_exhaustion_is_explicit(self):
        inst = gen_adversarial(8, 100)  # big enough to skip plain enumeration
        assert _branch_and_bound(inst, node_budget=3) is None

    def test_solution_is_repeatable(self, instance_a):
        first = exact_optimum(instance_a)
        second = exact_optimum(instance_a)
        assert first.assignment.placement == second.assignment.placement


class TestBruteForce:
    def test_guard_rejects_huge_instances(self):
        inst = Instance.from_pairs([(1, 1)] * 30, [9, 9, 9])
        with pytest.raises(ValueError):
            brute_force_optimum(inst)

    def test_instance_a(self, instance_a):
        opt = brute_force_optimum(instance_a)
        assert opt.opt == 21
        assert opt.explored > 0

    @settings(max_examples=150, deadline=None)
    @given(small_instances())
    def test_branch_and_bound_agrees_with_enumeration(self, inst):
        brute = brute_force_optimum(inst)
        bnb = _branch_and_bound(inst, node_budget=10**6)
        assert bnb is not None
        assert bnb.opt == brute.opt
        assert objective(bnb.assignment, inst) == bnb.opt
        assert check_feasible(bnb.assignment, inst) is None


class TestGreedyRecomputations:
    def test_strict_sequential_on_instance_a(self, instance_a):
        assert strict_sequential_greedy(instance_a).profit == 17

    def test_strict_sequential_single_knapsack_everything_fits(self):
        inst = Instance.from_pairs([(4, 1), (9, 2), (1, 3)], [10])
        solution = strict_sequential_greedy(inst)
        assert solution.profit == 14
        assert solution.assignment.unassigned_items() == []

    @pytest.mark.parametrize("n", [1, 2, 4])
    def test_strict_sequential_family_picks_light_items(self, n):
        assert strict_sequential_greedy(gen_adversarial(n, 10)).profit == 2 * n

    def test_batch_on_instance_a(self, instance_a):
        assert batch_round_greedy(instance_a).profit == 14

    @pytest.mark.parametrize("n", [1, 2, 4])
    def test_batch_family_picks_light_items(self, n):
        assert batch_round_greedy(gen_adversarial(n, 10)).profit == 2 * n

    @settings(max_examples=60, deadline=None)
    @given(small_instances(max_m=1))
    def test_batch_equals_sequential_below_two_items(self, inst):
        batch = batch_round_greedy(inst)
        sequential = strict_sequential_greedy(inst)
        assert batch.assignment.placement == sequential.assignment.placement


class TestBoundAndRatio:
    def test_instance_a_bound_holds_after_final(self, instance_a):
        opt = exact_optimum(instance_a)
        assert bound_holds(18, opt, 2)  # 54 >= 21

    def test_zero_profit_zero_opt(self):
        opt = OptimalSolution(None, 0, 0)
        assert bound_holds(0, opt, 3)

    def test_pre_final_family_value_fails_the_bound(self):
        opt = exact_optimum(gen_adversarial(2, 10))
        assert opt.opt == 20
        assert not bound_holds(4, opt, 2)  # 12 < 20: the reassignment pass is load-bearing

    def test_ratio_family(self):
        opt = exact_optimum(gen_adversarial(2, 10))
        assert approx_ratio(4, opt) == Fraction(1, 5)
        assert approx_ratio(20, opt) == Fraction(1)

    def test_ratio_instance_a(self, instance_a):
        assert approx_ratio(18, exact_optimum(instance_a)) == Fraction(6, 7)

    def test_ratio_defined_as_one_for_zero_opt(self):
        assert approx_ratio(0, OptimalSolution(None, 0, 0)) == Fraction(1)

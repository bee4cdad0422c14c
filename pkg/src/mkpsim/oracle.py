"""Ground-truth solvers and bound checkers.

Two independent exact solvers are provided: a pruned exhaustive enumeration
(the simplest thing that is obviously correct, for self-checks at tiny sizes)
and a branch-and-bound search (the workhorse for desk-scale instances).  Both
return a provably maximum-profit assignment; the branch-and-bound returns an
explicit "unavailable" (``None``) rather than a possibly-wrong answer when
its node budget runs out.

Also here: centralized, message-free restatements of the two greedy dispatch
semantics (strict one-item-at-a-time and batch rounds), used as independent
cross-checks of the protocol simulations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .core import Assignment, Instance, objective, sort_by_density

BRUTE_FORCE_GUARD = 10**8  # hard cap on (n+1)**m for exhaustive enumeration
_BRUTE_AUTO_LIMIT = 20_000  # below this, enumeration is cheaper than bounding
DEFAULT_NODE_BUDGET = 5_000_000


@dataclass(frozen=True)
class OptimalSolution:
    """A maximum-profit feasible assignment plus search effort."""

    assignment: Assignment
    opt: int
    explored: int


@dataclass(frozen=True)
class GreedySolution:
    assignment: Assignment
    profit: int


def brute_force_optimum(inst: Instance, *, guard: int = BRUTE_FORCE_GUARD) -> OptimalSolution:
    """Exhaustive search over all (n+1)^m placements, with capacity pruning.

    Items are considered in id order; choices are 'unassigned' first, then
    knapsacks 0..n-1, so the first optimum found (kept on ties) is
    deterministic.  Refuses instances whose worst-case tree exceeds ``guard``.
    """
    m, n = inst.m, inst.n
    if m * math.log2(n + 1) > math.log2(guard):
        raise ValueError(
            f"instance too large for exhaustive enumeration: (n+1)^m > {guard}"
        )

    remaining = list(inst.capacities)
    choice: list[int | None] = [None] * m
    best_profit = -1
    best_choice: list[int | None] = list(choice)
    explored = 0

    def dfs(idx: int, profit: int) -> None:
        nonlocal best_profit, best_choice, explored
        explored += 1
        if idx == m:
            if profit > best_profit:
                best_profit = profit
                best_choice = list(choice)
            return
        item = inst.items[idx]
        choice[idx] = None
        dfs(idx + 1, profit)
        for j in range(n):
            if remaining[j] >= item.weight:
                remaining[j] -= item.weight
                choice[idx] = j
                dfs(idx + 1, profit + item.cost)
                choice[idx] = None
                remaining[j] += item.weight

    dfs(0, 0)
    return OptimalSolution(_build_assignment(inst, best_choice), best_profit, explored)


def _build_assignment(inst: Instance, choice: list[int | None]) -> Assignment:
    assignment = Assignment.empty(inst)
    for item_id, j in enumerate(choice):
        if j is not None:
            assignment.assign(inst, item_id, j)
    return assignment


def _branch_and_bound(inst: Instance, node_budget: int) -> OptimalSolution | None:
    """Depth-first branch and bound over items in density order.

    Upper bound: the fractional single-knapsack relaxation of the remaining
    items over the pooled remaining capacity, compared in exact integer
    arithmetic.  Two dominance rules keep symmetric instances tractable:
    knapsacks with equal remaining capacity are interchangeable for every
    future decision, so only one representative per distinct capacity is
    branched on; and a state already reached with the same remaining-capacity
    multiset at no smaller profit cannot be improved by revisiting.  Returns
    ``None`` when the node budget runs out.
    """
    order = sort_by_density(inst.items)
    items = [inst.items[i] for i in order]
    m, n = inst.m, inst.n
    remaining = list(inst.capacities)
    placement: list[int | None] = [None] * m  # per density position
    best_profit = -1
    best_placement: list[int | None] = list(placement)
    seen: dict[tuple, int] = {}
    explored = 0
    budget_hit = False

    def promising(idx: int, profit: int) -> bool:
        # True iff the fractional bound strictly beats the incumbent.
        pool = sum(remaining)
        ub = profit
        for k in range(idx, m):
            if ub > best_profit:
                return True
            item = items[k]
            if item.weight <= pool:
                pool -= item.weight
                ub += item.cost
            else:
                return ub * item.weight + pool * item.cost > best_profit * item.weight
        return ub > best_profit

    def dfs(idx: int, profit: int) -> None:
        nonlocal best_profit, best_placement, explored, budget_hit
        if budget_hit:
            return
        explored += 1
        if explored > node_budget:
            budget_hit = True
            return
        if idx == m:
            if profit > best_profit:
                best_profit = profit
                best_placement = list(placement)
            return
        state = (idx, tuple(sorted(remaining)))
        if profit <= seen.get(state, -1):
            return
        seen[state] = profit
        if not promising(idx, profit):
            return
        item = items[idx]
        seen_caps = set()
        for j in sorted(range(n), key=lambda j: (-remaining[j], j)):
            cap = remaining[j]
            if cap < item.weight or cap in seen_caps:
                continue
            seen_caps.add(cap)
            remaining[j] -= item.weight
            placement[idx] = j
            dfs(idx + 1, profit + item.cost)
            placement[idx] = None
            remaining[j] += item.weight
            if budget_hit:
                return
        dfs(idx + 1, profit)

    dfs(0, 0)
    if budget_hit:
        return None
    by_item: list[int | None] = [None] * m
    for pos, j in enumerate(best_placement):
        by_item[order[pos]] = j
    return OptimalSolution(_build_assignment(inst, by_item), best_profit, explored)


def exact_optimum(
    inst: Instance, *, node_budget: int = DEFAULT_NODE_BUDGET
) -> OptimalSolution | None:
    """The exact optimum, or ``None`` when it cannot be certified in budget.

    Tiny instances go through plain enumeration; everything else through
    branch and bound.  Both paths are exact, so the returned value never
    depends on the strategy split.
    """
    if inst.m * math.log2(inst.n + 1) <= math.log2(_BRUTE_AUTO_LIMIT):
        return brute_force_optimum(inst)
    return _branch_and_bound(inst, node_budget)


def strict_sequential_greedy(inst: Instance) -> GreedySolution:
    """Items in density order, each to the largest-remaining knapsack that
    fits (ties: smallest index), or discarded.  Matches the pre-reassignment
    output of the one-item-per-round protocols."""
    assignment = Assignment.empty(inst)
    for item_id in sort_by_density(inst.items):
        item = inst.items[item_id]
        best_j = None
        for j in range(inst.n):
            if assignment.remaining[j] >= item.weight and (
                best_j is None or assignment.remaining[j] > assignment.remaining[best_j]
            ):
                best_j = j
        if best_j is not None:
            assignment.assign(inst, item_id, best_j)
    return GreedySolution(assignment, objective(assignment, inst))


def batch_round_greedy(inst: Instance) -> GreedySolution:
    """Message-free recomputation of the batch-round dispatch.

    Each round ranks the knapsacks by remaining capacity at round start
    (ties: ascending index) and matches the next n items positionally; the
    cursor advances past every considered item, fit or not.
    """
    assignment = Assignment.empty(inst)
    order = sort_by_density(inst.items)
    rounds = -(-inst.m // inst.n)
    cursor = 0
    for _ in range(rounds):
        ranked = sorted(range(inst.n), key=lambda j: (-assignment.remaining[j], j))
        reported = [assignment.remaining[j] for j in ranked]  # round-start values
        for pos, j in enumerate(ranked):
            if cursor >= inst.m:
                break
            item = inst.items[order[cursor]]
            if item.weight <= reported[pos]:
                assignment.assign(inst, item.id, j)
            cursor += 1
    return GreedySolution(assignment, objective(assignment, inst))


def bound_holds(profit: int, opt: OptimalSolution, n: int) -> bool:
    """Exact integer check of profit >= OPT / (n+1)."""
    return profit * (n + 1) >= opt.opt


def approx_ratio(profit: int, opt: OptimalSolution) -> Fraction:
    """profit / OPT as an exact rational; defined as 1 when OPT is 0."""
    if opt.opt == 0:
        return Fraction(1)
    return Fraction(profit, opt.opt)

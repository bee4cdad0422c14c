"""Instance generation, experiment orchestration, and report serialization.

The random generator is pinned for reproducibility: instances are drawn from
CPython's ``random.Random`` (the Mersenne Twister), seeded with the given
64-bit seed, in a fixed draw order -- for each item its cost then its weight
via ``randint``, then each capacity left to right.  Identical parameters
therefore produce byte-identical instances on every platform, and golden
digests stay valid.
"""

from __future__ import annotations

import csv
import io
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .algorithms import ALGORITHMS, RunResult, run_algorithm
from .core import Instance, check_feasible, instance_digest, sort_by_density
from .oracle import (
    OptimalSolution,
    approx_ratio,
    batch_round_greedy,
    bound_holds,
    exact_optimum,
    strict_sequential_greedy,
)
from .simnet import SOURCE, Trace, Winner


@dataclass(frozen=True)
class GenParams:
    """Parameters for the uniform random instance generator.

    Costs are drawn from [1, cost_max], weights from [1, weight_max],
    capacities from [cap_min, cap_max].
    """

    m: int
    n: int
    cost_max: int
    weight_max: int
    cap_min: int
    cap_max: int
    seed: int

    def __post_init__(self):
        if self.m < 0:
            raise ValueError(f"m must be >= 0, got {self.m}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        for name in ("cost_max", "weight_max", "cap_min"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.cap_max < self.cap_min:
            raise ValueError(
                f"capacity range [{self.cap_min}, {self.cap_max}] is empty"
            )


def gen_random(params: GenParams) -> Instance:
    """Uniform instance from the pinned generator; deterministic in the seed."""
    rng = random.Random(params.seed)
    pairs = [
        (rng.randint(1, params.cost_max), rng.randint(1, params.weight_max))
        for _ in range(params.m)
    ]
    capacities = [rng.randint(params.cap_min, params.cap_max) for _ in range(params.n)]
    return Instance.from_pairs(pairs, capacities)


def gen_adversarial(n: int, W: int) -> Instance:
    """The worst-case family: n knapsacks of capacity W, n cost-2/weight-1
    items followed by n items of cost and weight W.

    Requires W >= 3 so that the light items strictly dominate by density
    (2/1 > W/W) while swapping a light item for a heavy one still strictly
    improves a knapsack (W > 2).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if W < 3:
        raise ValueError(
            f"W must be >= 3 (got {W}): with W < 3 a heavy item no longer "
            "strictly beats a light one, so the family loses its point"
        )
    pairs = [(2, 1)] * n + [(W, W)] * n
    return Instance.from_pairs(pairs, [W] * n)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

CSV_COLUMNS = (
    "algorithm",
    "m",
    "n",
    "profit",
    "opt",
    "ratio_num",
    "ratio_den",
    "messages",
    "phases",
    "rounds",
)


@dataclass(frozen=True)
class RunReport:
    """Serializable record of one algorithm run on one instance.

    ``oracle`` is "none" when no comparison was requested, "ok" when OPT was
    computed, and "unavailable" when the exact solver gave up; the optional
    fields are populated only in the "ok" case.
    """

    algorithm: str
    instance: str
    m: int
    n: int
    profit: int
    placement: dict[int, int | None]
    messages: int
    phases: int
    rounds: int
    oracle: str = "none"
    opt: int | None = None
    ratio: Fraction | None = None
    bound_ok: bool | None = None


def report_to_json(report: RunReport) -> str:
    """Stable, human-diffable serialization with a fixed field order."""
    doc: dict = {
        "algorithm": report.algorithm,
        "instance": report.instance,
        "m": report.m,
        "n": report.n,
        "profit": report.profit,
        "placement": {str(i): k for i, k in sorted(report.placement.items())},
        "messages": report.messages,
        "phases": report.phases,
        "rounds": report.rounds,
    }
    if report.oracle == "ok":
        doc["opt"] = report.opt
        doc["ratio"] = f"{report.ratio.numerator}/{report.ratio.denominator}"
        doc["bound_ok"] = report.bound_ok
    elif report.oracle == "unavailable":
        doc["opt"] = "unavailable"
    return json.dumps(doc, indent=2) + "\n"


def reports_to_csv(reports) -> str:
    """Flat tabular export for sweeps; oracle-less columns stay empty."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in reports:
        if r.oracle == "ok":
            opt, num, den = r.opt, r.ratio.numerator, r.ratio.denominator
        else:
            opt = num = den = ""
        writer.writerow(
            [r.algorithm, r.m, r.n, r.profit, opt, num, den, r.messages, r.phases, r.rounds]
        )
    return buf.getvalue()


def make_report(
    inst: Instance, result: RunResult, opt: OptimalSolution | None, oracle: str
) -> RunReport:
    ratio = bound = None
    opt_value = None
    if oracle == "ok":
        opt_value = opt.opt
        ratio = approx_ratio(result.profit, opt)
        bound = bound_holds(result.profit, opt, inst.n)
    return RunReport(
        algorithm=result.algorithm,
        instance=instance_digest(inst),
        m=inst.m,
        n=inst.n,
        profit=result.profit,
        placement=dict(result.assignment.placement),
        messages=result.messages,
        phases=result.phases,
        rounds=result.rounds,
        oracle=oracle,
        opt=opt_value,
        ratio=ratio,
        bound_ok=bound,
    )


def run_experiment(inst: Instance, algorithms=ALGORITHMS, with_oracle: bool = False):
    """Run the requested algorithms and return reports in the fixed
    simple/modified/dist/tree order; oracle data is attached when requested
    and available, and marked unavailable otherwise."""
    requested = set(algorithms)
    unknown = requested - set(ALGORITHMS)
    if unknown:
        raise ValueError(f"unknown algorithm(s): {sorted(unknown)}")
    opt = None
    oracle = "none"
    if with_oracle:
        opt = exact_optimum(inst)
        oracle = "ok" if opt is not None else "unavailable"
    reports = []
    for name in ALGORITHMS:
        if name in requested:
            reports.append(make_report(inst, run_algorithm(name, inst), opt, oracle))
    return reports


# ---------------------------------------------------------------------------
# Trace audit
# ---------------------------------------------------------------------------

def audit_max_capacity_dispatch(inst: Instance, trace: Trace, algorithm: str) -> list[str]:
    """Replay a dist/tree trace and check the greedy dispatch invariant.

    For every round, the item (taken in density order) must go to a knapsack
    whose pre-assignment remaining capacity is maximal among the knapsacks
    that fit it, with ties broken towards the smallest id; an item may be
    discarded only when nothing fits.  Winners are read off the trace's
    winner reports; capacities are replayed from the instance.
    """
    if algorithm == "dist":
        period = 3
    elif algorithm == "tree":
        period = inst.n.bit_length() - 1 + 3
    else:
        raise ValueError(f"audit applies to 'dist' or 'tree', not {algorithm!r}")

    winners: dict[int, int] = {}
    for d in trace:
        if d.recipient == SOURCE and isinstance(d.payload, Winner):
            round_index = (d.phase - 1) // period
            if round_index in winners:
                return [f"round {round_index}: more than one winner report"]
            winners[round_index] = d.payload.processor

    violations = []
    remaining = list(inst.capacities)
    for round_index, item_id in enumerate(sort_by_density(inst.items)):
        item = inst.items[item_id]
        fitting = [j for j in range(inst.n) if remaining[j] >= item.weight]
        winner = winners.get(round_index)
        if winner is None:
            if fitting:
                violations.append(
                    f"round {round_index}: item {item_id} discarded although "
                    f"knapsack(s) {fitting} fit it"
                )
            continue
        j = winner - 1
        if j not in fitting:
            violations.append(
                f"round {round_index}: item {item_id} went to knapsack {j} "
                f"which cannot fit it"
            )
            continue
        best = max(remaining[k] for k in fitting)
        best_j = min(k for k in fitting if remaining[k] == best)
        if remaining[j] != best:
            violations.append(
                f"round {round_index}: item {item_id} went to knapsack {j} "
                f"(remaining {remaining[j]}) but knapsack {best_j} had {best}"
            )
        elif j != best_j:
            violations.append(
                f"round {round_index}: capacity tie broken towards knapsack {j} "
                f"instead of {best_j}"
            )
        remaining[j] -= item.weight
    return violations


# ---------------------------------------------------------------------------
# Verification sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepParams:
    """A (m, n, seed) grid for verification sweeps.

    Seeds are mixed with m and n so distinct grid points never share a
    random stream: seed = m * 1_000_003 + n * 10_007 + s for s in 0..seeds-1.
    """

    m_lo: int
    m_hi: int
    n_lo: int
    n_hi: int
    seeds: int
    cost_max: int = 50
    weight_max: int = 50
    cap_min: int = 1
    cap_max: int = 100

    def __post_init__(self):
        if not (0 <= self.m_lo <= self.m_hi):
            raise ValueError(f"bad m range {self.m_lo}..{self.m_hi}")
        if not (1 <= self.n_lo <= self.n_hi):
            raise ValueError(f"bad n range {self.n_lo}..{self.n_hi}")
        if self.seeds < 1:
            raise ValueError("seeds must be >= 1")

    def grid(self):
        for m in range(self.m_lo, self.m_hi + 1):
            for n in range(self.n_lo, self.n_hi + 1):
                for s in range(self.seeds):
                    yield GenParams(
                        m,
                        n,
                        self.cost_max,
                        self.weight_max,
                        self.cap_min,
                        self.cap_max,
                        seed=m * 1_000_003 + n * 10_007 + s,
                    )


@dataclass
class InstanceVerification:
    """All four runs on one instance plus every cross-check outcome."""

    instance: Instance
    results: dict[str, RunResult]
    opt: OptimalSolution | None
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_instance(inst: Instance, *, with_oracle: bool = True) -> InstanceVerification:
    """Run every algorithm on the instance and check the full battery:
    feasibility, exact message/phase/round accounting, the simulation vs
    centralized-recomputation equivalences, the per-round greedy trace audit,
    reassignment monotonicity, and (with the oracle) the 1/(n+1) bound for
    the three finalized algorithms."""
    m, n = inst.m, inst.n
    results = {name: run_algorithm(name, inst) for name in ALGORITHMS}
    bad: list[str] = []

    def expect(condition: bool, message: str) -> None:
        if not condition:
            bad.append(message)

    for name, res in results.items():
        for label, assignment in (
            ("final", res.assignment),
            ("pre-final", res.pre_final_assignment),
        ):
            violation = check_feasible(assignment, inst)
            expect(violation is None, f"{name}: {label} assignment infeasible: {violation}")
        expect(
            res.profit >= res.pre_final_profit,
            f"{name}: reassignment decreased profit "
            f"{res.pre_final_profit} -> {res.profit}",
        )

    rounds = -(-m // n)
    simple, modified = results["simple"], results["modified"]
    dist, tree = results["dist"], results["tree"]

    expect(simple.rounds == rounds, f"simple: rounds {simple.rounds} != {rounds}")
    expect(
        simple.messages == 2 * n * rounds,
        f"simple: messages {simple.messages} != {2 * n * rounds}",
    )
    expect(
        simple.messages <= 2 * m + 2 * n,
        f"simple: messages {simple.messages} > 2m+2n = {2 * m + 2 * n}",
    )
    expect(
        simple.phases == (2 * rounds if rounds else 1),
        f"simple: phases {simple.phases} != {2 * rounds if rounds else 1}",
    )

    expect(
        modified.messages == 2 * n * rounds + len(modified.changed_knapsacks),
        f"modified: messages {modified.messages} != dispatch {2 * n * rounds} "
        f"+ directives {len(modified.changed_knapsacks)}",
    )
    expect(
        modified.pre_final_assignment.placement == simple.assignment.placement,
        "modified: pre-reassignment placement differs from simple",
    )

    assigned = len(dist.pre_final_assignment.assigned_items())
    expect(
        dist.messages == m * n * n + assigned + len(dist.changed_knapsacks),
        f"dist: messages {dist.messages} != m*n^2 + assigned + changed = "
        f"{m * n * n + assigned + len(dist.changed_knapsacks)}",
    )
    expect(
        dist.messages <= m * (n + n * n) + n,
        f"dist: messages {dist.messages} > m(n+n^2)+n = {m * (n + n * n) + n}",
    )
    expect(
        dist.phases == (3 * m + 1 if m else 1),
        f"dist: phases {dist.phases} != {3 * m + 1 if m else 1}",
    )
    expect(dist.rounds == m, f"dist: rounds {dist.rounds} != {m}")

    levels = n.bit_length() - 1
    tree_assigned = len(tree.pre_final_assignment.assigned_items())
    expect(
        tree.messages == 2 * m * n + tree_assigned + len(tree.changed_knapsacks),
        f"tree: messages {tree.messages} != 2mn + assigned + changed = "
        f"{2 * m * n + tree_assigned + len(tree.changed_knapsacks)}",
    )
    expect(
        tree.messages <= 2 * m * n + m + n,
        f"tree: messages {tree.messages} > 2mn+m+n = {2 * m * n + m + n}",
    )
    expect(
        tree.phases == (m * (levels + 3) if m else 1),
        f"tree: phases {tree.phases} != {m * (levels + 3) if m else 1}",
    )

    expect(
        dist.assignment.placement == tree.assignment.placement,
        "dist and tree disagree on the final placement",
    )
    expect(
        dist.pre_final_assignment.placement == tree.pre_final_assignment.placement,
        "dist and tree disagree on the pre-reassignment placement",
    )
    expect(dist.profit == tree.profit, "dist and tree disagree on profit")

    sequential = strict_sequential_greedy(inst)
    expect(
        dist.pre_final_assignment.placement == sequential.assignment.placement,
        "dist pre-reassignment placement differs from the sequential recomputation",
    )
    expect(
        dist.pre_final_profit == sequential.profit,
        f"dist pre-reassignment profit {dist.pre_final_profit} != "
        f"sequential {sequential.profit}",
    )
    batch = batch_round_greedy(inst)
    expect(
        simple.assignment.placement == batch.assignment.placement,
        "simple placement differs from the batch recomputation",
    )

    for name in ("dist", "tree"):
        for problem in audit_max_capacity_dispatch(inst, results[name].trace, name):
            bad.append(f"{name}: trace audit: {problem}")

    opt = None
    if with_oracle:
        opt = exact_optimum(inst)
        if opt is None:
            bad.append("oracle unavailable: bound left unchecked")
        else:
            for name in ("modified", "dist", "tree"):
                res = results[name]
                expect(
                    bound_holds(res.profit, opt, n),
                    f"{name}: bound violated: {res.profit} * ({n}+1) < {opt.opt}",
                )

    return InstanceVerification(inst, results, opt, bad)


@dataclass
class SweepSummary:
    instances: int
    failures: list[tuple[GenParams, list[str]]]

    @property
    def ok(self) -> bool:
        return not self.failures


def verify_sweep(params: SweepParams, *, with_oracle: bool = True) -> SweepSummary:
    """Verify every instance of the sweep grid; collects per-instance failures."""
    failures = []
    count = 0
    for gp in params.grid():
        count += 1
        verdict = verify_instance(gen_random(gp), with_oracle=with_oracle)
        if not verdict.ok:
            failures.append((gp, verdict.violations))
    return SweepSummary(count, failures)

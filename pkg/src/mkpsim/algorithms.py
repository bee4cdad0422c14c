"""The four greedy dispatch protocols, written as simnet node programs.

All four share the same skeleton: the source holds every item, sorted by
decreasing cost/weight (ties by ascending item id), and items are handed to
knapsacks greedily, preferring the largest remaining capacity with ties going
to the smallest processor id.

``simple``   batch rounds.  Each round every processor reports its remaining
             capacity; the source ranks the reports (capacity descending, id
             ascending) and matches the next n items positionally against
             that ranking, sending each matched item iff it fits the
             *reported* capacity and an explicit bottom otherwise.  The item
             cursor advances past every considered item, matched or not, so
             an item rejected by its matched knapsack is gone for good even
             if another knapsack could have taken it.  ceil(m/n) rounds of
             two phases; exactly 2n messages per round.

``modified`` the batch rounds above followed by the reassignment pass
             (:func:`final_reassign`), computed at the source and pushed with
             one directive per knapsack that changed.

``dist``     one item per round.  The source broadcasts the item's weight;
             every processor broadcasts (id, capacity-or-bottom) to every
             other processor; all of them compute the same argmax, and the
             unique winner reports to the source and deducts.  If nobody is
             eligible the winner phase stays silent and the source moves on.
             Three phases and n^2 + (1 if assigned) messages per round, plus
             the reassignment pass.

``tree``     same greedy rule, but the argmax is computed by bottom-up
             aggregation over the binary tree (root p_1, children 2j/2j+1):
             each node merges its own eligible capacity with its children's
             pairs and forwards the best to its parent; the root reports the
             winner (or bottom) to the source, which then awards the item to
             the winner.  floor(log2 n) + 3 phases and 2n + (1 if assigned)
             messages per round, plus the reassignment pass.

Per-run message totals, as counted by the engine (a = items assigned before
the reassignment pass, ch = knapsacks changed by it, R = ceil(m/n)):

    simple    2nR
    modified  2nR + ch
    dist      m*n^2 + a + ch
    tree      2mn + a + ch
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import Assignment, Instance, check_feasible, objective, sort_by_density
from .simnet import (
    SOURCE,
    Bottom,
    CapacityReport,
    ConsensusPair,
    FinalDirective,
    ItemOffer,
    Message,
    Node,
    RunMetrics,
    Send,
    SimulationFault,
    SourceNode,
    Trace,
    WeightOffer,
    Winner,
    build_network,
    run_protocol,
    tree_links,
)

__all__ = [
    "ALGORITHMS",
    "RunResult",
    "final_reassign",
    "run_algorithm",
    "run_simple_greedy",
    "run_modified_greedy",
    "run_distributed_greedy",
    "run_tree_greedy",
    "tree_links",
]

ALGORITHMS = ("simple", "modified", "dist", "tree")


def final_reassign(
    assignment: Assignment, inst: Instance, pool=None
) -> tuple[Assignment, tuple[int, ...]]:
    """One reassignment pass over the knapsacks, in ascending index order.

    Each knapsack keeps its current contents unless the most profitable pool
    item that fits its *full* capacity (ties: smallest id) is strictly more
    profitable than everything it holds, in which case the contents are
    swapped for that single item.  Evicted items rejoin the pool and stay
    available to later knapsacks.  The pool defaults to the items the
    assignment leaves unassigned.

    Returns the new assignment and the tuple of changed knapsack indices.
    The total profit never decreases: a swap happens only when the incoming
    item outweighs everything the knapsack held, and no other knapsack is
    touched by it.
    """
    result = assignment.copy()
    pool_set = set(result.unassigned_items() if pool is None else pool)
    changed = []
    for j in range(inst.n):
        best = None
        for i in sorted(pool_set):
            item = inst.item(i)
            if item.weight <= inst.capacities[j] and (best is None or item.cost > best.cost):
                best = item
        if best is None:
            continue
        current_profit = sum(inst.item(i).cost for i in result.items_in(j))
        if best.cost > current_profit:
            evicted = result.replace_contents(inst, j, [best.id])
            pool_set.remove(best.id)
            pool_set.update(evicted)
            changed.append(j)
    return result, tuple(changed)


# ---------------------------------------------------------------------------
# Shared processor bookkeeping
# ---------------------------------------------------------------------------

class ProcessorNode(Node):
    def __init__(self, j: int, capacity: int):
        self.j = j
        self.capacity = capacity
        self.remaining = capacity

    def _take(self, weight: int) -> None:
        if weight > self.remaining:
            raise SimulationFault(
                f"p{self.j} received an item of weight {weight} with only "
                f"{self.remaining} remaining"
            )
        self.remaining -= weight

    def _apply_directive(self, directive: FinalDirective) -> None:
        load = sum(w for _, w in directive.contents)
        if load > self.capacity:
            raise SimulationFault(f"p{self.j} got an overfull reassignment directive")
        self.remaining = self.capacity - load


class GreedySource(SourceNode):
    """Common source-side state: the sorted item list and the running record."""

    def __init__(self, inst: Instance, with_final: bool):
        self.inst = inst
        self.with_final = with_final
        self.order = [inst.items[i] for i in sort_by_density(inst.items)]
        self.assignment = Assignment.empty(inst)
        self.pre_final_assignment: Assignment | None = None
        self.changed: tuple[int, ...] = ()
        self.phase = 0

    def recorded_assignment(self) -> Assignment:
        return self.assignment

    def _finish(self) -> list[Send]:
        """Run the reassignment pass (if any) and halt; returns directives."""
        out: list[Send] = []
        self.pre_final_assignment = self.assignment.copy()
        if self.with_final:
            self.assignment, self.changed = final_reassign(self.assignment, self.inst)
            for j in self.changed:
                contents = tuple(
                    (i, self.inst.item(i).weight) for i in self.assignment.items_in(j)
                )
                out.append((j + 1, FinalDirective(contents)))
        self.halted = True
        return out


# ---------------------------------------------------------------------------
# Batch rounds (simple / modified)
# ---------------------------------------------------------------------------
#
# Phase layout, R = ceil(m/n) rounds:
#   2r+1  every processor reports its remaining capacity
#   2r+2  the source ranks the reports and dispatches item-or-bottom to each
#   2R+1  (modified only) reassignment pass, directives out, source halts
# The simple variant halts in phase 2R, right after the last dispatch batch.

class BatchProcessor(ProcessorNode):
    """Reports capacity once per round; the round budget is fixed up front
    so the protocol ends without any extra signalling."""

    def __init__(self, j: int, capacity: int, rounds_total: int):
        super().__init__(j, capacity)
        self.rounds_total = rounds_total
        self.rounds_sent = 0
        self.phase = 0

    def step(self, inbox: list[Message]) -> list[Send]:
        self.phase += 1
        got_dispatch = False
        directives = []
        for msg in inbox:
            payload = msg.payload
            if msg.sender != SOURCE:
                raise SimulationFault(f"p{self.j} expected traffic from S only")
            if isinstance(payload, ItemOffer):
                self._take(payload.weight)
                got_dispatch = True
            elif isinstance(payload, Bottom):
                got_dispatch = True
            elif isinstance(payload, FinalDirective):
                directives.append(payload)
            else:
                raise SimulationFault(f"p{self.j}: unexpected payload {payload!r}")
        for directive in directives:
            self._apply_directive(directive)
        if (self.phase == 1 or got_dispatch) and self.rounds_sent < self.rounds_total:
            self.rounds_sent += 1
            return [(SOURCE, CapacityReport(self.remaining))]
        return []


class BatchSource(GreedySource):
    def __init__(self, inst: Instance, with_final: bool):
        super().__init__(inst, with_final)
        self.rounds_total = -(-inst.m // inst.n)  # ceil(m/n)
        self.rounds_done = 0
        self.cursor = 0

    def step(self, inbox: list[Message]) -> list[Send]:
        self.phase += 1
        reports: dict[int, int] = {}
        for msg in inbox:
            if not isinstance(msg.payload, CapacityReport):
                raise SimulationFault(f"S: unexpected payload {msg.payload!r}")
            reports[msg.sender] = msg.payload.capacity

        if self.rounds_done < self.rounds_total:
            if not reports:
                return []  # odd phase: reports are still in flight
            if len(reports) != self.inst.n:
                raise SimulationFault("S expected a capacity report from every processor")
            out: list[Send] = []
            ranked = sorted(reports.items(), key=lambda kv: (-kv[1], kv[0]))
            for j, reported in ranked:
                if self.cursor < self.inst.m:
                    item = self.order[self.cursor]
                    if item.weight <= reported:
                        out.append((j, ItemOffer(item.cost, item.weight)))
                        self.assignment.assign(self.inst, item.id, j - 1)
                    else:
                        out.append((j, Bottom()))
                    self.cursor += 1
                else:
                    out.append((j, Bottom()))
            self.rounds_done += 1
            if self.rounds_done == self.rounds_total and not self.with_final:
                self.pre_final_assignment = self.assignment.copy()
                self.halted = True
            return out

        # all rounds dispatched (or there were none): wrap up
        return self._finish()


# ---------------------------------------------------------------------------
# Full-broadcast consensus (dist)
# ---------------------------------------------------------------------------
#
# Phase layout, one item per round, m rounds:
#   3r+1  source broadcasts the item weight (and books the previous winner)
#   3r+2  processors broadcast (id, capacity or bottom) to each other
#   3r+3  everyone computes the same argmax; the winner reports and deducts
#   3m+1  source books the last winner, runs the reassignment pass, halts
# A round whose item fits nowhere simply leaves phase 3r+3 silent.

class BroadcastProcessor(ProcessorNode):
    def __init__(self, j: int, capacity: int, n: int):
        super().__init__(j, capacity)
        self.n = n
        self.current_weight: int | None = None
        self.my_report: ConsensusPair | None = None

    def step(self, inbox: list[Message]) -> list[Send]:
        offers: list[WeightOffer] = []
        pairs: list[ConsensusPair] = []
        directives: list[FinalDirective] = []
        for msg in inbox:
            payload = msg.payload
            if isinstance(payload, WeightOffer):
                if msg.sender != SOURCE:
                    raise SimulationFault(f"p{self.j}: weight offer from non-source")
                offers.append(payload)
            elif isinstance(payload, ConsensusPair):
                if msg.sender == SOURCE:
                    raise SimulationFault(f"p{self.j}: capacity pair from the source")
                pairs.append(payload)
            elif isinstance(payload, FinalDirective):
                directives.append(payload)
            else:
                raise SimulationFault(f"p{self.j}: unexpected payload {payload!r}")

        out: list[Send] = []
        if offers:
            if len(offers) != 1 or pairs:
                raise SimulationFault(f"p{self.j}: malformed round start")
            weight = offers[0].weight
            self.current_weight = weight
            eligible = self.remaining >= weight
            self.my_report = ConsensusPair(self.j, self.remaining if eligible else None)
            if self.n > 1:
                out.extend(
                    (k, self.my_report) for k in range(1, self.n + 1) if k != self.j
                )
            else:
                # nobody to talk to: the lone processor decides immediately
                if eligible:
                    out.append((SOURCE, Winner(self.j)))
                    self._take(weight)
                self.my_report = None
        elif pairs:
            if self.my_report is None or len(pairs) != self.n - 1:
                raise SimulationFault(f"p{self.j}: capacity exchange out of step")
            candidates = [
                (pair.best, pair.capacity)
                for pair in pairs + [self.my_report]
                if pair.capacity is not None
            ]
            if candidates:
                best_id, _ = max(candidates, key=lambda t: (t[1], -t[0]))
                if best_id == self.j:
                    out.append((SOURCE, Winner(self.j)))
                    self._take(self.current_weight)
            self.my_report = None

        for directive in directives:
            self._apply_directive(directive)
        return out


class BroadcastSource(GreedySource):
    def __init__(self, inst: Instance):
        super().__init__(inst, with_final=True)
        self.idx = 0
        self.pending: int | None = None  # item id awaiting this round's winner

    def step(self, inbox: list[Message]) -> list[Send]:
        self.phase += 1
        winners = []
        for msg in inbox:
            if not isinstance(msg.payload, Winner):
                raise SimulationFault(f"S: unexpected payload {msg.payload!r}")
            winners.append(msg.payload.processor)
        if len(winners) > 1:
            raise SimulationFault(f"two winners in one round: {sorted(winners)}")
        if winners:
            if self.pending is None:
                raise SimulationFault("winner reported outside any round")
            self.assignment.assign(self.inst, self.pending, winners[0] - 1)
            self.pending = None

        if (self.phase - 1) % 3 != 0:
            return []
        # round boundary: an unresolved item fit nowhere and stays unassigned
        self.pending = None
        if self.idx < self.inst.m:
            item = self.order[self.idx]
            self.idx += 1
            self.pending = item.id
            return [(j, WeightOffer(item.weight)) for j in range(1, self.inst.n + 1)]
        return self._finish()


# ---------------------------------------------------------------------------
# Tree consensus (tree)
# ---------------------------------------------------------------------------
#
# D = floor(log2 n), P = D + 3 phases per round.  Round-local offsets:
#   1    source broadcasts the item weight (last round's award lands now)
#   2    offer arrives; nodes at depth D send their pair up
#   ...  a node at depth d sends at offset D - d + 2, by which time both of
#        its children (depth d+1) have been heard
#   D+2  the root merges and reports winner-or-bottom to the source
#   D+3  the source books the round and awards the item to the winner;
#        after the last round it also runs the reassignment pass and halts.

class TreeProcessor(ProcessorNode):
    def __init__(self, j: int, capacity: int, n: int):
        super().__init__(j, capacity)
        self.links = tree_links(j, n)
        depth = j.bit_length() - 1
        self.levels = n.bit_length() - 1  # floor(log2 n)
        self.period = self.levels + 3
        self.send_offset = self.levels - depth + 2
        self.phase = 0
        self.current_weight: int | None = None
        self.child_pairs: list[ConsensusPair] = []

    def step(self, inbox: list[Message]) -> list[Send]:
        self.phase += 1
        offset = (self.phase - 1) % self.period + 1
        directives = []
        for msg in inbox:
            payload = msg.payload
            if isinstance(payload, WeightOffer):
                if msg.sender != SOURCE:
                    raise SimulationFault(f"p{self.j}: weight offer from non-source")
                if offset == 2:  # the round's offer broadcast
                    self.current_weight = payload.weight
                    self.child_pairs = []
                elif offset == 1:  # the award for the round just decided
                    if payload.weight != self.current_weight:
                        raise SimulationFault(f"p{self.j}: award weight mismatch")
                    self._take(payload.weight)
                else:
                    raise SimulationFault(f"p{self.j}: weight offer off schedule")
            elif isinstance(payload, ConsensusPair):
                if msg.sender not in (self.links.left, self.links.right):
                    raise SimulationFault(
                        f"p{self.j}: aggregation pair from non-child p{msg.sender}"
                    )
                self.child_pairs.append(payload)
            elif isinstance(payload, FinalDirective):
                if msg.sender != SOURCE:
                    raise SimulationFault(f"p{self.j}: directive from non-source")
                directives.append(payload)
            else:
                raise SimulationFault(f"p{self.j}: unexpected payload {payload!r}")

        out: list[Send] = []
        if offset == self.send_offset and self.current_weight is not None and not directives:
            candidates = [
                (pair.best, pair.capacity)
                for pair in self.child_pairs
                if pair.capacity is not None
            ]
            if self.remaining >= self.current_weight:
                candidates.append((self.j, self.remaining))
            if candidates:
                best_id, best_cap = max(candidates, key=lambda t: (t[1], -t[0]))
            else:
                best_id, best_cap = None, None
            if self.j == 1:
                out.append(
                    (SOURCE, Winner(best_id) if best_id is not None else Bottom())
                )
            else:
                out.append((self.links.parent, ConsensusPair(best_id, best_cap)))

        for directive in directives:
            self._apply_directive(directive)
        return out


class TreeSource(GreedySource):
    def __init__(self, inst: Instance):
        super().__init__(inst, with_final=True)
        self.period = inst.n.bit_length() - 1 + 3  # floor(log2 n) + 3

    def step(self, inbox: list[Message]) -> list[Send]:
        self.phase += 1
        offset = (self.phase - 1) % self.period + 1
        round_index = (self.phase - 1) // self.period

        if offset != self.period:
            if inbox:
                raise SimulationFault("S: consensus result arrived off schedule")
            if offset == 1:
                if round_index < self.inst.m:
                    item = self.order[round_index]
                    return [
                        (j, WeightOffer(item.weight)) for j in range(1, self.inst.n + 1)
                    ]
                return self._finish()  # m == 0: nothing to dispatch
            return []

        # offset == period: the root's verdict for this round's item is due
        if len(inbox) != 1 or inbox[0].sender != 1:
            raise SimulationFault("S expected exactly one verdict from the root")
        payload = inbox[0].payload
        item = self.order[round_index]
        out: list[Send] = []
        if isinstance(payload, Winner):
            self.assignment.assign(self.inst, item.id, payload.processor - 1)
            out.append((payload.processor, WeightOffer(item.weight)))
        elif not isinstance(payload, Bottom):
            raise SimulationFault(f"S: unexpected verdict {payload!r}")
        if round_index == self.inst.m - 1:
            out.extend(self._finish())
        return out


# ---------------------------------------------------------------------------
# Run wrappers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunResult:
    """Everything one protocol run produced.

    ``assignment``/``profit`` reflect the run's final output; the pre-final
    fields snapshot the state before the reassignment pass (identical for
    ``simple``, which has none).
    """

    algorithm: str
    assignment: Assignment
    profit: int
    pre_final_assignment: Assignment
    pre_final_profit: int
    changed_knapsacks: tuple[int, ...]
    metrics: RunMetrics
    trace: Trace
    rounds: int

    @property
    def messages(self) -> int:
        return self.metrics.messages

    @property
    def phases(self) -> int:
        return self.metrics.phases


def _check_run(inst: Instance, assignment: Assignment, processors: dict[int, ProcessorNode]):
    violation = check_feasible(assignment, inst)
    if violation is not None:
        raise SimulationFault(f"protocol produced an infeasible assignment: {violation}")
    for j, proc in processors.items():
        load = sum(
            inst.item(i).weight for i, k in assignment.placement.items() if k == j - 1
        )
        if proc.remaining != inst.capacities[j - 1] - load:
            raise SimulationFault(
                f"p{j} remaining capacity {proc.remaining} disagrees with the "
                f"source's record"
            )


def _finish_result(
    name: str,
    inst: Instance,
    source: GreedySource,
    processors: dict[int, ProcessorNode],
    rounds: int,
) -> RunResult:
    assignment, metrics, trace = run_protocol(
        build_network(inst.n, with_tree=isinstance(source, TreeSource)),
        source,
        processors,
    )
    _check_run(inst, assignment, processors)
    pre = source.pre_final_assignment
    return RunResult(
        algorithm=name,
        assignment=assignment,
        profit=objective(assignment, inst),
        pre_final_assignment=pre,
        pre_final_profit=objective(pre, inst),
        changed_knapsacks=source.changed,
        metrics=metrics,
        trace=trace,
        rounds=rounds,
    )


def run_simple_greedy(inst: Instance) -> RunResult:
    """Batch-round dispatch without the reassignment pass."""
    source = BatchSource(inst, with_final=False)
    processors = {
        j: BatchProcessor(j, inst.capacities[j - 1], source.rounds_total)
        for j in range(1, inst.n + 1)
    }
    return _finish_result("simple", inst, source, processors, source.rounds_total)


def run_modified_greedy(inst: Instance) -> RunResult:
    """Batch-round dispatch plus the per-knapsack reassignment pass."""
    source = BatchSource(inst, with_final=True)
    processors = {
        j: BatchProcessor(j, inst.capacities[j - 1], source.rounds_total)
        for j in range(1, inst.n + 1)
    }
    return _finish_result("modified", inst, source, processors, source.rounds_total)


def run_distributed_greedy(inst: Instance) -> RunResult:
    """One item per round, winner chosen by all-to-all capacity exchange."""
    source = BroadcastSource(inst)
    processors = {
        j: BroadcastProcessor(j, inst.capacities[j - 1], inst.n)
        for j in range(1, inst.n + 1)
    }
    return _finish_result("dist", inst, source, processors, inst.m)


def run_tree_greedy(inst: Instance) -> RunResult:
    """One item per round, winner chosen by convergecast up the binary tree."""
    source = TreeSource(inst)
    processors = {
        j: TreeProcessor(j, inst.capacities[j - 1], inst.n)
        for j in range(1, inst.n + 1)
    }
    return _finish_result("tree", inst, source, processors, inst.m)


_RUNNERS = {
    "simple": run_simple_greedy,
    "modified": run_modified_greedy,
    "dist": run_distributed_greedy,
    "tree": run_tree_greedy,
}


def run_algorithm(name: str, inst: Instance) -> RunResult:
    try:
        runner = _RUNNERS[name]
    except KeyError:
        raise ValueError(f"unknown algorithm {name!r}; choose from {ALGORITHMS}") from None
    return runner(inst)

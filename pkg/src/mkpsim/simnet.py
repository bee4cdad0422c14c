"""Deterministic synchronous round-based message-passing engine.

Topology: one distinguished source node ``S`` (id 0) connected to every
processor, plus a complete graph over the processors p_1..p_n.  A network may
additionally carry binary-tree links: p_1 is the root, the children of p_j
are p_2j and p_2j+1, the parent is p_floor(j/2).

Execution model: the run proceeds in *phases*.  In phase t every node takes
one step, consuming the messages sent during phase t-1 and emitting new ones;
nothing sent in a phase is readable before the next.  The model is failure
free: every sent message is delivered exactly once, one phase later.

Accounting: every point-to-point delivery counts as one message, so a
broadcast to k recipients counts k.  The phase counter reported in
:class:`RunMetrics` is the phase in which the source program declared itself
finished; trailing phases that only drain in-flight messages (final
bookkeeping at the processors) are not counted as communication phases.
Phases in which nobody speaks still count if the source is still running --
a silent phase is meaningful in a synchronous protocol.

Determinism: within a phase, deliveries are ordered by (sender, recipient),
node steps run in fixed id order, and programs are required to be
deterministic, so identical inputs produce byte-identical traces.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import Assignment

SOURCE = 0  # node id of the source/dispatcher; processors are 1..n


class SimulationFault(RuntimeError):
    """A protocol or engine invariant was violated during a run."""


# ---------------------------------------------------------------------------
# Message payloads
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CapacityReport:
    """Processor -> source: current remaining capacity."""
    capacity: int


@dataclass(frozen=True)
class ItemOffer:
    """Source -> processor: a dispatched item as a (cost, weight) pair."""
    cost: int
    weight: int


@dataclass(frozen=True)
class WeightOffer:
    """Source -> processors: an item's weight only (costs stay at the source)."""
    weight: int


@dataclass(frozen=True)
class Bottom:
    """The explicit 'nothing for you' message."""


@dataclass(frozen=True)
class ConsensusPair:
    """A (processor id, capacity) candidate; either side may be absent."""
    best: int | None
    capacity: int | None


@dataclass(frozen=True)
class Winner:
    """The processor id that takes the current item."""
    processor: int


@dataclass(frozen=True)
class FinalDirective:
    """Source -> processor: replacement contents as (item id, weight) pairs."""
    contents: tuple[tuple[int, int], ...]


Payload = (
    CapacityReport | ItemOffer | WeightOffer | Bottom | ConsensusPair | Winner | FinalDirective
)


@dataclass(frozen=True)
class Message:
    sender: int
    recipient: int
    payload: Payload


# (recipient, payload); the engine stamps the sender.
Send = tuple[int, Payload]


# ---------------------------------------------------------------------------
# Topology
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TreeLinks:
    parent: int | None
    left: int | None
    right: int | None


def tree_links(j: int, n: int) -> TreeLinks:
    """Tree neighbours of processor j in the rooted binary tree over 1..n.

    Parent is floor(j/2) (absent for the root p_1); children are 2j and 2j+1
    when they exist.
    """
    if not 1 <= j <= n:
        raise ValueError(f"processor id {j} out of range 1..{n}")
    parent = j // 2 if j > 1 else None
    left = 2 * j if 2 * j <= n else None
    right = 2 * j + 1 if 2 * j + 1 <= n else None
    return TreeLinks(parent, left, right)


@dataclass(frozen=True)
class Network:
    """n processors fully connected to each other and to the source."""

    n: int
    tree: tuple[TreeLinks, ...] | None = None

    def is_node(self, node_id: int) -> bool:
        return 0 <= node_id <= self.n

    def links(self, j: int) -> TreeLinks:
        if self.tree is None:
            raise ValueError("network was built without tree links")
        return self.tree[j - 1]


def build_network(n: int, with_tree: bool = False) -> Network:
    if n < 1:
        raise ValueError(f"a network needs at least one processor, got n={n}")
    tree = tuple(tree_links(j, n) for j in range(1, n + 1)) if with_tree else None
    return Network(n, tree)


# ---------------------------------------------------------------------------
# Node programs
# ---------------------------------------------------------------------------

class Node:
    """A deterministic step function: inbox -> outbox, state held on self."""

    def step(self, inbox: list[Message]) -> list[Send]:
        raise NotImplementedError


class SourceNode(Node):
    """A node program for S; sets ``halted`` when the protocol is finished."""

    halted: bool = False

    def recorded_assignment(self) -> Assignment:
        raise NotImplementedError


# ---------------------------------------------------------------------------
# Trace and metrics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Delivery:
    """One delivered message, stamped with the phase in which it was sent."""
    phase: int
    sender: int
    recipient: int
    payload: Payload


Trace = tuple[Delivery, ...]


@dataclass(frozen=True)
class RunMetrics:
    """Message/phase accounting for one protocol run.

    ``per_phase`` lists (phase, deliveries sent in that phase) for every
    phase with traffic; it always sums to ``messages``.
    """

    messages: int
    phases: int
    per_phase: tuple[tuple[int, int], ...]


def metrics_of(trace: Trace) -> RunMetrics:
    """Recompute metrics from a trace alone.

    The phase count here is the last phase with traffic; the engine's own
    metric can be higher when the protocol ends on a deliberately silent
    phase.  Message counts always agree.
    """
    counts: dict[int, int] = {}
    for d in trace:
        counts[d.phase] = counts.get(d.phase, 0) + 1
    phases = max(counts) if counts else 0
    return RunMetrics(len(trace), phases, tuple(sorted(counts.items())))


def node_name(node_id: int) -> str:
    return "S" if node_id == SOURCE else f"p{node_id}"


def render_payload(payload: Payload) -> str:
    if isinstance(payload, CapacityReport):
        return f"capacity {payload.capacity}"
    if isinstance(payload, ItemOffer):
        return f"item {payload.cost} {payload.weight}"
    if isinstance(payload, WeightOffer):
        return f"weight {payload.weight}"
    if isinstance(payload, Bottom):
        return "bottom"
    if isinstance(payload, ConsensusPair):
        best = "-" if payload.best is None else str(payload.best)
        cap = "-" if payload.capacity is None else str(payload.capacity)
        return f"pair {best} {cap}"
    if isinstance(payload, Winner):
        return f"winner {payload.processor}"
    if isinstance(payload, FinalDirective):
        parts = " ".join(f"{i}:{w}" for i, w in payload.contents)
        return f"final {parts}".rstrip()
    raise TypeError(f"unknown payload {payload!r}")


def render_trace(trace: Trace) -> str:
    """Line-oriented dump, one delivery per line: ``phase from to payload``."""
    lines = [
        f"{d.phase} {node_name(d.sender)} {node_name(d.recipient)} {render_payload(d.payload)}"
        for d in trace
    ]
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------

DEFAULT_MAX_PHASES = 1_000_000


def run_protocol(
    network: Network,
    source: SourceNode,
    processors: dict[int, Node],
    *,
    max_phases: int = DEFAULT_MAX_PHASES,
) -> tuple[Assignment, RunMetrics, Trace]:
    """Run source/processor programs to completion.

    The run ends when the source has halted and no messages remain in
    flight; processors are reactive and never halt on their own.  Returns
    the assignment the source recorded, the metrics, and the full delivery
    trace.

    Faults (raised as :class:`SimulationFault`, never silently dropped):
    a message addressed to a nonexistent node or to the node itself, a
    message sent after the source halted, and a message delivered to the
    already-halted source.
    """
    if sorted(processors) != list(range(1, network.n + 1)):
        raise SimulationFault("processor programs must cover ids 1..n exactly")

    in_flight: list[Message] = []
    log: list[Delivery] = []
    phase = 0
    halt_phase: int | None = None

    while True:
        phase += 1
        if phase > max_phases:
            raise SimulationFault(f"protocol did not terminate within {max_phases} phases")

        inboxes: dict[int, list[Message]] = {}
        for msg in sorted(in_flight, key=lambda msg: (msg.sender, msg.recipient)):
            inboxes.setdefault(msg.recipient, []).append(msg)
        in_flight = []

        was_halted = source.halted
        if was_halted and SOURCE in inboxes:
            raise SimulationFault("message delivered to the halted source")

        outgoing: list[Message] = []
        for node_id in range(network.n + 1):
            if node_id == SOURCE:
                if was_halted:
                    continue
                sends = source.step(inboxes.get(SOURCE, []))
            else:
                sends = processors[node_id].step(inboxes.get(node_id, []))
            for recipient, payload in sends:
                if not network.is_node(recipient):
                    raise SimulationFault(
                        f"{node_name(node_id)} sent to nonexistent node {recipient}"
                    )
                if recipient == node_id:
                    raise SimulationFault(f"{node_name(node_id)} sent to itself")
                if was_halted:
                    raise SimulationFault(
                        f"{node_name(node_id)} sent a message after the source halted"
                    )
                outgoing.append(Message(node_id, recipient, payload))

        outgoing.sort(key=lambda msg: (msg.sender, msg.recipient))
        for msg in outgoing:
            log.append(Delivery(phase, msg.sender, msg.recipient, msg.payload))
        in_flight = outgoing

        if source.halted and halt_phase is None:
            halt_phase = phase
        if source.halted and not in_flight:
            break

    counts: dict[int, int] = {}
    for d in log:
        counts[d.phase] = counts.get(d.phase, 0) + 1
    metrics = RunMetrics(len(log), halt_phase, tuple(sorted(counts.items())))
    return source.recorded_assignment(), metrics, tuple(log)

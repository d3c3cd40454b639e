"""Synthetic trace generation and the interleaving validity oracle.

A trace is a sequence of step-sets of message instances. The generator
instantiates a configurable number of instances of every flow, picks each
instance's branch uniformly at random, then repeatedly picks a uniformly
random unfinished instance and emits its next message as a singleton step
until all instances finish. The scheduler is deliberately maximally
interleaving: concurrency is the difficulty the miner has to cope with.

``validate_interleaving`` is the independent oracle for this process: it
decides, by memoized backtracking, whether a trace can be partitioned
into per-instance subsequences that each spell out exactly one branch.

Randomness comes from SplitMix64 with per-trace derived seeds, so output
is reproducible byte-for-byte and individual traces can be regenerated in
isolation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DataError
from .flows import FlowSet, Message, branches
from .rng import SplitMix64, derive_seed

StepSet = frozenset[Message]


@dataclass(frozen=True)
class Trace:
    """Sequence of step-sets; the generator only emits singleton steps."""

    steps: tuple[StepSet, ...]

    def flattened(self) -> tuple[Message, ...]:
        """Linearize step-sets, ordering simultaneous messages canonically."""
        out: list[Message] = []
        for step in self.steps:
            out.extend(sorted(step, key=str))
        return tuple(out)

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class TraceSet:
    traces: tuple[Trace, ...]

    def __len__(self) -> int:
        return len(self.traces)

    def __iter__(self):
        return iter(self.traces)


@dataclass(frozen=True)
class GenConfig:
    runs: int = 600
    instances_per_flow: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.runs < 0:
            raise ValueError("runs must be >= 0")
        if self.instances_per_flow < 1:
            raise ValueError("instances_per_flow must be >= 1")


def generate_traces(fs: FlowSet, cfg: GenConfig) -> TraceSet:
    """Generate ``cfg.runs`` interleaved traces of the flow set.

    Deterministic in (fs, cfg): trace i uses seed ``derive_seed(seed, i)``,
    so traces are independent of each other and of ``runs``.
    """
    flow_branches = [(flow, [flow.branch_messages(b) for b in branches(flow)]) for flow in fs.flows]
    traces = [
        _generate_one(flow_branches, cfg.instances_per_flow, derive_seed(cfg.seed, i))
        for i in range(cfg.runs)
    ]
    return TraceSet(traces=tuple(traces))


def _generate_one(flow_branches, instances_per_flow: int, seed: int) -> Trace:
    rng = SplitMix64(seed)
    # Branch choices first, in (flow order, instance index) order.
    chosen: list[tuple[Message, ...]] = []
    for _flow, branch_list in flow_branches:
        for _ in range(instances_per_flow):
            chosen.append(branch_list[rng.randbelow(len(branch_list))])
    cursors = [0] * len(chosen)
    steps: list[StepSet] = []
    unfinished = [i for i, b in enumerate(chosen) if cursors[i] < len(b)]
    while unfinished:
        pick = unfinished[rng.randbelow(len(unfinished))]
        steps.append(frozenset({chosen[pick][cursors[pick]]}))
        cursors[pick] += 1
        if cursors[pick] == len(chosen[pick]):
            unfinished.remove(pick)
    return Trace(steps=tuple(steps))


def validate_interleaving(trace: Trace, fs: FlowSet, instances_per_flow: int) -> bool:
    """Decide whether a trace is a legal interleaving of complete branches.

    True iff the flattened message sequence can be partitioned into
    ``instances_per_flow * len(fs.flows)`` subsequences such that each is
    exactly one branch of its flow. Backtracking with memoization;
    exponential worst case, fine at desk scale.
    """
    seq = trace.flattened()
    flow_branch_msgs = [[flow.branch_messages(b) for b in branches(flow)] for flow in fs.flows]

    # Per-instance NFA state: all (branch, cursor) pairs consistent with
    # the tokens consumed so far. Instances of one flow are
    # interchangeable, so flow states are kept sorted to collapse
    # symmetric assignments.
    initial_states = []
    for branch_list in flow_branch_msgs:
        init = frozenset((bi, 0) for bi in range(len(branch_list)))
        initial_states.append(tuple([init] * instances_per_flow))
    start = tuple(initial_states)

    def complete(flow_idx: int, state: frozenset[tuple[int, int]]) -> bool:
        return any(cursor == len(flow_branch_msgs[flow_idx][bi]) for bi, cursor in state)

    seen: set[tuple[int, tuple]] = set()

    def search(pos: int, states: tuple) -> bool:
        if pos == len(seq):
            return all(complete(fi, inst) for fi, flow_states in enumerate(states) for inst in flow_states)
        key = (pos, states)
        if key in seen:
            return False
        seen.add(key)
        token = seq[pos]
        for fi, flow_states in enumerate(states):
            branch_list = flow_branch_msgs[fi]
            tried: set[frozenset] = set()
            for ii, inst in enumerate(flow_states):
                if inst in tried:
                    continue  # identical sibling instance, same outcome
                tried.add(inst)
                advanced = frozenset(
                    (bi, cursor + 1)
                    for bi, cursor in inst
                    if cursor < len(branch_list[bi]) and branch_list[bi][cursor] == token
                )
                if not advanced:
                    continue
                new_flow = list(flow_states)
                new_flow[ii] = advanced
                new_states = list(states)
                new_states[fi] = tuple(sorted(new_flow, key=sorted))
                if search(pos + 1, tuple(new_states)):
                    return True
        return False

    return search(0, start)


def render_trace_file(ts: TraceSet) -> str:
    """One trace per line; step-sets joined with ``|``, steps with spaces."""
    lines = []
    for trace in ts.traces:
        lines.append(" ".join("|".join(sorted(str(m) for m in step)) for step in trace.steps))
    return "\n".join(lines) + ("\n" if lines else "")


def parse_trace_file(text: str) -> TraceSet:
    """Inverse of render_trace_file; blank lines are rejected."""
    traces: list[Trace] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            raise DataError(f"trace file line {lineno} is empty")
        steps: list[StepSet] = []
        for part in line.split(" "):
            try:
                steps.append(frozenset(Message.parse(tok) for tok in part.split("|")))
            except ValueError as exc:
                raise DataError(f"trace file line {lineno}: {exc}") from exc
        traces.append(Trace(steps=tuple(steps)))
    return TraceSet(traces=tuple(traces))

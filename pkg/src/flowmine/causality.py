"""Structural causality predicate and the causality graph over messages.

Two messages chain when they share a component: under the default
``forward`` convention, ``causal(u, v)`` holds iff the component that
receives ``u`` originates ``v`` (``u.dest == v.src``). Every consecutive
pair along a flow branch satisfies the predicate, so the graph built from
all unique trace messages over-approximates every flow; mining carves the
true sub-structure back out.

The graph may contain cycles (shared messages routinely create them), so
consumers must not assume acyclicity. The ``literal`` direction switch
flips the predicate to ``u.src == v.dest``.
"""

from __future__ import annotations

from typing import Iterable

from .flows import Message

DIRECTIONS = ("forward", "literal")


def causal(mi: Message, mj: Message, direction: str = "forward") -> bool:
    """Structural causality predicate between two messages."""
    if direction == "forward":
        return mi.dest == mj.src
    if direction == "literal":
        return mi.src == mj.dest
    raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")


class CausalityGraph:
    """Immutable directed graph over unique messages.

    Edges are exactly the ordered pairs satisfying the causality
    predicate, self-edges excluded (a flow branch can never repeat a
    node, so self-loops are unusable by construction).
    """

    def __init__(self, nodes: Iterable[Message], edges: Iterable[tuple[Message, Message]]):
        self.nodes: frozenset[Message] = frozenset(nodes)
        self.edges: frozenset[tuple[Message, Message]] = frozenset(edges)
        succ: dict[Message, list[Message]] = {n: [] for n in self.nodes}
        for u, v in self.edges:
            succ[u].append(v)
        for vs in succ.values():
            vs.sort()
        self._succ = succ

    def successors(self, node: Message) -> list[Message]:
        """Out-neighbors in canonical (lexicographic) order."""
        return list(self._succ[node])

    def __contains__(self, node: Message) -> bool:
        return node in self.nodes

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CausalityGraph):
            return NotImplemented
        return self.nodes == other.nodes and self.edges == other.edges

    def __hash__(self):
        return hash((self.nodes, self.edges))

    def __repr__(self) -> str:
        return f"CausalityGraph(nodes={len(self.nodes)}, edges={len(self.edges)})"


def build_causality_graph(messages: Iterable[Message], direction: str = "forward") -> CausalityGraph:
    """Build the causality graph over a non-empty set of unique messages."""
    nodes = frozenset(messages)
    if not nodes:
        raise ValueError("message set must be non-empty")
    edges = [
        (u, v)
        for u in nodes
        for v in nodes
        if u != v and causal(u, v, direction)
    ]
    return CausalityGraph(nodes, edges)


def render_graph(graph: CausalityGraph) -> str:
    """Dump the edge list, one ``u -> v`` per line, lexicographically.

    The same format is used for full causality graphs and mined
    subgraphs so the two can be diffed directly.
    """
    lines = sorted(f"{u} -> {v}" for u, v in graph.edges)
    return "\n".join(lines) + ("\n" if lines else "")

"""Message flow specifications: messages, flow DAGs, and their file format.

A message is a ``src:dest:cmd`` triple. A flow is a DAG over messages with
a unique start (in-degree 0) and one or more end messages; every node lies
on some start-to-end path, and every edge chains through a common
component (the receiving component of the edge source originates the edge
target). A branch is one root-to-terminal path; branches are the unit the
evaluator scores.

Flow files are strict JSON::

    { "flows": [ { "name": str,
                   "messages": [ { "id": int, "src": str, "dest": str, "cmd": str } ],
                   "edges": [[int, int]],
                   "start": int,
                   "ends": [int] } ] }

Unknown keys are rejected; parsing validates every flow and is total (no
partial results on error).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterator

from .errors import FlowFileError

_TOKEN_RE = re.compile(r"^[^\s:]+$")


@dataclass(frozen=True, order=True)
class Message:
    """Atomic trace unit: originating component, receiver, operation."""

    src: str
    dest: str
    cmd: str

    def __post_init__(self):
        for name in ("src", "dest", "cmd"):
            value = getattr(self, name)
            if not isinstance(value, str) or not _TOKEN_RE.match(value):
                raise ValueError(
                    f"message field {name}={value!r} must be a non-empty token "
                    "without ':' or whitespace"
                )

    def __str__(self) -> str:
        return f"{self.src}:{self.dest}:{self.cmd}"

    @classmethod
    def parse(cls, text: str) -> "Message":
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"expected src:dest:cmd, got {text!r}")
        return cls(*parts)


Branch = tuple[int, ...]


@dataclass(frozen=True)
class FlowSpec:
    """One flow: a DAG of local-id message nodes with a start and ends."""

    name: str
    messages: tuple[tuple[int, Message], ...]
    edges: tuple[tuple[int, int], ...]
    start: int
    ends: frozenset[int]

    def message_of(self, local_id: int) -> Message:
        return self._by_id[local_id]

    @property
    def _by_id(self) -> dict[int, Message]:
        by_id = getattr(self, "_by_id_cache", None)
        if by_id is None:
            by_id = dict(self.messages)
            object.__setattr__(self, "_by_id_cache", by_id)
        return by_id

    def successors(self, local_id: int) -> list[int]:
        return sorted(v for (u, v) in self.edges if u == local_id)

    def message_set(self) -> frozenset[Message]:
        return frozenset(m for _, m in self.messages)

    def branch_messages(self, branch: Branch) -> tuple[Message, ...]:
        return tuple(self.message_of(i) for i in branch)


@dataclass(frozen=True)
class FlowSet:
    """A set of flows; messages may be shared across flows."""

    flows: tuple[FlowSpec, ...]

    def message_universe(self) -> frozenset[Message]:
        out: set[Message] = set()
        for flow in self.flows:
            out |= flow.message_set()
        return frozenset(out)

    def flow_named(self, name: str) -> FlowSpec:
        for flow in self.flows:
            if flow.name == name:
                return flow
        raise KeyError(name)


def _edge_is_causal(u: Message, v: Message) -> bool:
    # Forward-chaining convention; must match causality.causal's default.
    return u.dest == v.src


def validate_flow(flow: FlowSpec) -> list[str]:
    """Check every FlowSpec invariant; returns human-readable violations.

    An empty list means the flow is valid. Violations name the offending
    node or edge; they are data, not exceptions.
    """
    out: list[str] = []
    ids = [i for i, _ in flow.messages]
    id_set = set(ids)
    if len(ids) != len(id_set):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        out.append(f"duplicate local-id(s) {dupes}")
        return out
    for u, v in flow.edges:
        if u not in id_set or v not in id_set:
            out.append(f"edge ({u},{v}) references undefined local-id")
    if out:
        return out
    if flow.start not in id_set:
        out.append(f"start {flow.start} is not a node")
        return out
    if not flow.ends:
        out.append("ends must be non-empty")
    for e in sorted(flow.ends):
        if e not in id_set:
            out.append(f"end {e} is not a node")
    if out:
        return out

    succ: dict[int, list[int]] = {i: [] for i in id_set}
    pred: dict[int, list[int]] = {i: [] for i in id_set}
    for u, v in flow.edges:
        succ[u].append(v)
        pred[v].append(u)

    cycle_node = _find_cycle(succ)
    if cycle_node is not None:
        out.append(f"edge relation has a directed cycle through node {cycle_node}")

    if pred[flow.start]:
        out.append(f"start {flow.start} has incoming edge(s) from {sorted(pred[flow.start])}")
    other_roots = sorted(i for i in id_set if i != flow.start and not pred[i])
    if other_roots:
        out.append(f"node(s) {other_roots} have in-degree 0 but are not the start")

    reach_fwd = _reachable(succ, flow.start)
    reach_back: set[int] = set()
    for e in flow.ends:
        reach_back |= _reachable(pred, e)
    for i in sorted(id_set):
        if i not in reach_fwd or i not in reach_back:
            out.append(f"node {i} is not on any start-to-end path")

    for u, v in flow.edges:
        mu, mv = flow.message_of(u), flow.message_of(v)
        if not _edge_is_causal(mu, mv):
            out.append(f"edge ({u},{v}) violates causality: {mu} -> {mv}")
    return out


def _find_cycle(succ: dict[int, list[int]]) -> int | None:
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {i: WHITE for i in succ}
    for root in succ:
        if color[root] != WHITE:
            continue
        stack: list[tuple[int, Iterator[int]]] = [(root, iter(succ[root]))]
        color[root] = GRAY
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if color[nxt] == GRAY:
                    return nxt
                if color[nxt] == WHITE:
                    color[nxt] = GRAY
                    stack.append((nxt, iter(succ[nxt])))
                    advanced = True
                    break
            if not advanced:
                color[node] = BLACK
                stack.pop()
    return None


def _reachable(adj: dict[int, list[int]], root: int) -> set[int]:
    seen = {root}
    todo = [root]
    while todo:
        node = todo.pop()
        for nxt in adj[node]:
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return seen


def branches(flow: FlowSpec) -> list[Branch]:
    """All directed start-to-end paths, lexicographic by local-id sequence.

    Paths may continue through an end node when it has successors; each
    end visited yields its own branch. The flow must be valid (a DAG), so
    enumeration terminates.
    """
    succ: dict[int, list[int]] = {i: [] for i, _ in flow.messages}
    for u, v in flow.edges:
        succ[u].append(v)
    for vs in succ.values():
        vs.sort()

    out: list[Branch] = []
    path: list[int] = [flow.start]

    def walk(node: int) -> None:
        if node in flow.ends:
            out.append(tuple(path))
        for nxt in succ[node]:
            path.append(nxt)
            walk(nxt)
            path.pop()

    walk(flow.start)
    out.sort()
    return out


_FLOW_KEYS = {"name", "messages", "edges", "start", "ends"}
_MESSAGE_KEYS = {"id", "src", "dest", "cmd"}


def parse_flow_file(text: str) -> FlowSet:
    """Parse and validate a flow file; raises FlowFileError on any defect."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FlowFileError(f"syntax error at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc

    if not isinstance(doc, dict) or set(doc) != {"flows"}:
        raise FlowFileError("top level must be an object with exactly the key 'flows'")
    if not isinstance(doc["flows"], list):
        raise FlowFileError("'flows' must be a list")

    flows: list[FlowSpec] = []
    names: set[str] = set()
    for idx, raw in enumerate(doc["flows"]):
        flow = _parse_flow(raw, idx)
        if flow.name in names:
            raise FlowFileError(f"duplicate flow name {flow.name!r}")
        names.add(flow.name)
        violations = validate_flow(flow)
        if violations:
            raise FlowFileError(f"flow {flow.name!r} is invalid: " + "; ".join(violations))
        flows.append(flow)
    return FlowSet(flows=tuple(flows))


def _parse_flow(raw: object, idx: int) -> FlowSpec:
    where = f"flows[{idx}]"
    if not isinstance(raw, dict):
        raise FlowFileError(f"{where} must be an object")
    unknown = set(raw) - _FLOW_KEYS
    if unknown:
        raise FlowFileError(f"{where} has unknown key(s) {sorted(unknown)}")
    missing = _FLOW_KEYS - set(raw)
    if missing:
        raise FlowFileError(f"{where} is missing key(s) {sorted(missing)}")
    if not isinstance(raw["name"], str) or not raw["name"]:
        raise FlowFileError(f"{where}.name must be a non-empty string")

    messages: list[tuple[int, Message]] = []
    seen_ids: set[int] = set()
    for midx, mraw in enumerate(_req_list(raw, "messages", where)):
        mwhere = f"{where}.messages[{midx}]"
        if not isinstance(mraw, dict):
            raise FlowFileError(f"{mwhere} must be an object")
        if set(mraw) != _MESSAGE_KEYS:
            raise FlowFileError(f"{mwhere} must have exactly keys {sorted(_MESSAGE_KEYS)}")
        local_id = mraw["id"]
        if not isinstance(local_id, int) or isinstance(local_id, bool):
            raise FlowFileError(f"{mwhere}.id must be an integer")
        if local_id in seen_ids:
            raise FlowFileError(f"{mwhere}: duplicate local-id {local_id}")
        seen_ids.add(local_id)
        try:
            msg = Message(mraw["src"], mraw["dest"], mraw["cmd"])
        except ValueError as exc:
            raise FlowFileError(f"{mwhere}: {exc}") from exc
        messages.append((local_id, msg))

    edges: list[tuple[int, int]] = []
    for eidx, eraw in enumerate(_req_list(raw, "edges", where)):
        ewhere = f"{where}.edges[{eidx}]"
        if not isinstance(eraw, list) or len(eraw) != 2 or not all(isinstance(x, int) and not isinstance(x, bool) for x in eraw):
            raise FlowFileError(f"{ewhere} must be a pair of integers")
        u, v = eraw
        if u not in seen_ids or v not in seen_ids:
            raise FlowFileError(f"{ewhere}: edge ({u},{v}) references undefined local-id")
        edges.append((u, v))

    start = raw["start"]
    if not isinstance(start, int) or isinstance(start, bool):
        raise FlowFileError(f"{where}.start must be an integer")
    ends_raw = _req_list(raw, "ends", where)
    if not all(isinstance(x, int) and not isinstance(x, bool) for x in ends_raw):
        raise FlowFileError(f"{where}.ends must be a list of integers")
    for e in ends_raw:
        if e not in seen_ids:
            raise FlowFileError(f"{where}.ends: end {e} references undefined local-id")
    if start not in seen_ids:
        raise FlowFileError(f"{where}.start: {start} references undefined local-id")

    return FlowSpec(
        name=raw["name"],
        messages=tuple(messages),
        edges=tuple(edges),
        start=start,
        ends=frozenset(ends_raw),
    )


def _req_list(raw: dict, key: str, where: str) -> list:
    if not isinstance(raw[key], list):
        raise FlowFileError(f"{where}.{key} must be a list")
    return raw[key]


def render_flow_file(fs: FlowSet) -> str:
    """Serialize a FlowSet to the flow-file format (stable byte output)."""
    doc = {
        "flows": [
            {
                "name": f.name,
                "messages": [
                    {"id": i, "src": m.src, "dest": m.dest, "cmd": m.cmd}
                    for i, m in f.messages
                ],
                "edges": [[u, v] for u, v in f.edges],
                "start": f.start,
                "ends": sorted(f.ends),
            }
            for f in fs.flows
        ]
    }
    return json.dumps(doc, indent=2) + "\n"

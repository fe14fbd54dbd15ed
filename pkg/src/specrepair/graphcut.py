"""Def-use graph, minimum cut over variable nodes, and type extraction.

The graph is the constraint set viewed as a directed graph from the transient
source to the stable sink.  Only variable atoms are removable (in SLH-only
mode, only variables assigned from a memory read); expression atoms and the
source/sink are permanent.  A minimum-cardinality cut is computed by the
classic node-splitting reduction to max flow: each candidate becomes an
in/out pair joined by a unit-capacity edge, everything else is effectively
infinite, and the saturated unit edges on the source side of the final
residual graph form the cut.

Everything here is deterministic: candidates are visited in program order and
augmenting paths are shortest-first, so ties between equal-size cuts are
always broken the same way.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .lang import LangError, STABLE, TRANSIENT
from .typesys import (
    ConstraintSet,
    Edge,
    ExprAtom,
    Mode,
    S_SINK,
    SSink,
    T_SOURCE,
    TSource,
    VarAtom,
)


class Infeasible(LangError):
    """A source-to-sink path avoids every cut candidate."""

    def __init__(self, path: list):
        self.path = path
        shown = " -> ".join(str(a) for a in path)
        super().__init__(f"uncuttable flow: {shown}")


@dataclass
class DefUseGraph:
    edges: list[Edge]
    nodes: list
    candidates: list[VarAtom]

    def adjacency(self) -> dict:
        adj: dict = {}
        for e in self.edges:
            adj.setdefault(e.src, []).append(e.dst)
        return adj


def build_graph(k: ConstraintSet, mode: Mode = Mode()) -> DefUseGraph:
    nodes = [T_SOURCE, S_SINK]
    nodes += [a for a in k.atoms() if not isinstance(a, (TSource, SSink))]
    var_atoms = [a for a in nodes if isinstance(a, VarAtom)]
    if mode.slh_only_cuts:
        load_assigned = {e.dst.name for e in k
                         if isinstance(e.dst, VarAtom)
                         and isinstance(e.src, ExprAtom)
                         and e.src.kind == "read"}
        candidates = [a for a in var_atoms if a.name in load_assigned]
    else:
        candidates = var_atoms
    return DefUseGraph(list(k.edges), nodes, candidates)


def _reachable(adj: dict, start, removed: set) -> set:
    seen = {start}
    frontier = [start]
    while frontier:
        node = frontier.pop()
        for nxt in adj.get(node, ()):
            if nxt in removed or nxt in seen:
                continue
            seen.add(nxt)
            frontier.append(nxt)
    return seen


def _find_path(adj: dict, removed: set) -> list | None:
    """A source-to-sink path avoiding `removed`, or None."""
    parent: dict = {T_SOURCE: None}
    queue = deque([T_SOURCE])
    while queue:
        node = queue.popleft()
        if isinstance(node, SSink):
            path = []
            while node is not None:
                path.append(node)
                node = parent[node]
            return list(reversed(path))
        for nxt in adj.get(node, ()):
            if nxt in removed or nxt in parent:
                continue
            parent[nxt] = node
            queue.append(nxt)
    return None


def is_cut(g: DefUseGraph, names) -> bool:
    """True iff removing the named variable nodes disconnects source from
    sink."""
    removed = {a for a in g.nodes
               if isinstance(a, VarAtom) and a.name in set(names)}
    return _find_path(g.adjacency(), removed) is None


@dataclass
class MinCutResult:
    cut: list[str]
    flow: int


def max_flow_min_cut(g: DefUseGraph) -> MinCutResult:
    """Shortest-augmenting-path max flow on the node-split graph.

    Raises Infeasible when some source-to-sink path carries no candidate
    (only possible with a restricted candidate set).
    """
    adj_plain = g.adjacency()
    candidate_atoms = set(g.candidates)
    blocked = _find_path(adj_plain, candidate_atoms)
    if blocked is not None:
        raise Infeasible(blocked)

    inf = len(g.candidates) + 1
    source = (T_SOURCE, "x")
    sink = (S_SINK, "x")

    def node_in(a):
        return (a, "in") if a in candidate_atoms else (a, "x")

    def node_out(a):
        return (a, "out") if a in candidate_atoms else (a, "x")

    capacity: dict = {}
    neighbors: dict = {}

    def add_edge(u, v, cap) -> None:
        if (u, v) not in capacity:
            capacity[(u, v)] = 0
            capacity[(v, u)] = capacity.get((v, u), 0)
            neighbors.setdefault(u, []).append(v)
            neighbors.setdefault(v, []).append(u)
        capacity[(u, v)] += cap

    for a in g.candidates:
        add_edge((a, "in"), (a, "out"), 1)
    for e in g.edges:
        add_edge(node_out(e.src), node_in(e.dst), inf)

    flow = 0
    while True:
        parent = {source: None}
        queue = deque([source])
        while queue and sink not in parent:
            u = queue.popleft()
            for v in neighbors.get(u, ()):
                if v not in parent and capacity.get((u, v), 0) > 0:
                    parent[v] = u
                    queue.append(v)
        if sink not in parent:
            break
        bottleneck = inf
        v = sink
        while parent[v] is not None:
            u = parent[v]
            bottleneck = min(bottleneck, capacity[(u, v)])
            v = u
        v = sink
        while parent[v] is not None:
            u = parent[v]
            capacity[(u, v)] -= bottleneck
            capacity[(v, u)] += bottleneck
            v = u
        flow += bottleneck

    # Source side of the residual graph; saturated unit edges that straddle
    # it are the minimum cut.
    side = {source}
    frontier = [source]
    while frontier:
        u = frontier.pop()
        for v in neighbors.get(u, ()):
            if v not in side and capacity.get((u, v), 0) > 0:
                side.add(v)
                frontier.append(v)
    cut = [a.name for a in g.candidates
           if (a, "in") in side and (a, "out") not in side]
    return MinCutResult(cut, flow)


def min_cut(g: DefUseGraph) -> list[str]:
    """Minimum-cardinality candidate cut, in program order."""
    return max_flow_min_cut(g).cut


def brute_force_min_cut(g: DefUseGraph, limit: int = 12) -> list[str]:
    """Exhaustive smallest cut, for cross-checking on small graphs."""
    from itertools import combinations

    names = [a.name for a in g.candidates]
    if len(names) > limit:
        raise LangError(f"brute force limited to {limit} candidates")
    for size in range(len(names) + 1):
        for subset in combinations(names, size):
            if is_cut(g, subset):
                return list(subset)
    raise Infeasible(_find_path(g.adjacency(), set(g.candidates)) or [])


def extract_env(k_or_graph, cut, variables: list[str]) -> dict[str, str]:
    """Typing environment induced by a cut: a variable is transient when the
    source still reaches its atom after the cut nodes are removed."""
    g = k_or_graph if isinstance(k_or_graph, DefUseGraph) \
        else build_graph(k_or_graph)
    cut_set = set(cut)
    if not is_cut(g, cut_set):
        raise LangError("not a cut; refusing to extract a typing environment")
    removed = {a for a in g.nodes
               if isinstance(a, VarAtom) and a.name in cut_set}
    reach = _reachable(g.adjacency(), T_SOURCE, removed)
    env = {}
    for x in variables:
        atom = VarAtom(x)
        env[x] = TRANSIENT if x not in cut_set and atom in reach else STABLE
    return env


def to_dot(g: DefUseGraph, cut=()) -> str:
    """Graphviz rendering; cut nodes are drawn doubled and red."""
    cut_set = set(cut)
    ids = {a: f"n{i}" for i, a in enumerate(g.nodes)}
    lines = ["digraph defuse {", "  rankdir=LR;"]
    for a in g.nodes:
        nid = ids[a]
        label = str(a).replace('"', '\\"')
        if isinstance(a, TSource):
            style = 'shape=circle, color=magenta, fontcolor=magenta'
        elif isinstance(a, SSink):
            style = 'shape=circle, color=teal, fontcolor=teal'
        elif isinstance(a, VarAtom) and a.name in cut_set:
            style = 'shape=box, color=red, peripheries=2'
        elif isinstance(a, VarAtom):
            style = 'shape=box'
        else:
            style = 'shape=box, style=rounded'
        lines.append(f'  {nid} [label="{label}", {style}];')
    for e in g.edges:
        lines.append(f"  {ids[e.src]} -> {ids[e.dst]};")
    lines.append("}")
    return "\n".join(lines) + "\n"

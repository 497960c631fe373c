"""Circulation view of MKP and SIGAP assignments.

A network has a source ``s``, one node per job, one per machine and a sink
``t``.  Edges are ordered: source->job (job order), job->machine (canonical
edge order), machine->sink (machine order), then the return edge ``(t, s)``.

A fractional assignment ``x`` maps to the circulation sending ``x_ij * s_i``
along job->machine edge ``(i, j)``.  Differences of such circulations are
circulations too, possibly negative; :func:`conformal_decompose` splits one
into sign-consistent flow cycles.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Optional, Sequence, Union

from .core import (
    EdgeSet,
    FractionalAssignment,
    Instance,
    InfeasibleError,
    Variant,
    VariantError,
    canonical_edge_order,
    require_variant,
)

ZERO = Fraction(0)


class _Unbounded:
    """Capacity marker for edges without a capacity; never a large number."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INF"

    def __reduce__(self):
        return (_Unbounded, ())


INF = _Unbounded()

Node = Union[str, tuple[str, int]]
SOURCE: Node = "s"
SINK: Node = "t"


def job_node(i: int) -> Node:
    return ("job", i)


def machine_node(j: int) -> Node:
    return ("machine", j)


@dataclass(frozen=True)
class FlowEdge:
    tail: Node
    head: Node
    weight: Fraction
    capacity: Union[Fraction, _Unbounded]

    def admits(self, f: Fraction) -> bool:
        return f >= 0 and (self.capacity is INF or f <= self.capacity)


@dataclass(frozen=True)
class FlowNetwork:
    n: int
    m: int
    job_sizes: tuple[Fraction, ...]
    edges: tuple[FlowEdge, ...]
    kind: Variant

    @property
    def nodes(self) -> list[Node]:
        return [SOURCE] + [job_node(i) for i in range(self.n)] + [machine_node(j) for j in range(self.m)] + [SINK]

    def index(self, tail: Node, head: Node) -> Optional[int]:
        for k, e in enumerate(self.edges):
            if e.tail == tail and e.head == head:
                return k
        return None

    def assignment_edges(self) -> list[tuple[int, tuple[int, int]]]:
        """(edge index, (job, machine)) for every job->machine edge."""
        return [
            (k, (e.tail[1], e.head[1]))
            for k, e in enumerate(self.edges)
            if isinstance(e.tail, tuple) and e.tail[0] == "job"
        ]


def build_network(inst: Instance, E: EdgeSet, kind: Variant) -> FlowNetwork:
    """Network G[E] for an MKP or SIGAP instance.

    MKP: the welfare weight ``v_i / s_i`` sits on each source edge.
    SIGAP: values differ per machine, so the weight ``v_ij / s_i`` sits on
    job->machine edges and source edges weigh 0.  Either way the weight of
    ``f_x`` equals the welfare of ``x``.
    """
    kind = Variant(kind)
    if kind not in (Variant.MKP, Variant.SIGAP):
        raise VariantError(f"no flow interpretation for {kind.value}")
    require_variant(inst, kind)
    sizes = tuple(inst.sizes[i][0] for i in range(inst.n))
    edges = []
    for i in range(inst.n):
        w = inst.values[i][0] / sizes[i] if kind is Variant.MKP else ZERO
        edges.append(FlowEdge(SOURCE, job_node(i), w, sizes[i]))
    for i, j in canonical_edge_order(inst.n, inst.m):
        if (i, j) in E:
            w = ZERO if kind is Variant.MKP else inst.values[i][j] / sizes[i]
            edges.append(FlowEdge(job_node(i), machine_node(j), w, INF))
    for j in range(inst.m):
        edges.append(FlowEdge(machine_node(j), SINK, ZERO, inst.capacities[j]))
    edges.append(FlowEdge(SINK, SOURCE, ZERO, INF))
    return FlowNetwork(inst.n, inst.m, sizes, tuple(edges), kind)


@dataclass(frozen=True)
class Circulation:
    network: FlowNetwork
    flow: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.flow) != len(self.network.edges):
            raise ValueError("one flow value per network edge is required")

    @classmethod
    def zero(cls, net: FlowNetwork) -> "Circulation":
        return cls(net, (ZERO,) * len(net.edges))

    def __add__(self, other: "Circulation") -> "Circulation":
        self._same(other)
        return Circulation(self.network, tuple(a + b for a, b in zip(self.flow, other.flow)))

    def __sub__(self, other: "Circulation") -> "Circulation":
        self._same(other)
        return Circulation(self.network, tuple(a - b for a, b in zip(self.flow, other.flow)))

    def __neg__(self) -> "Circulation":
        return Circulation(self.network, tuple(-a for a in self.flow))

    def _same(self, other: "Circulation") -> None:
        if other.network != self.network:
            raise ValueError("circulations live on different networks")

    def is_zero(self) -> bool:
        return not any(self.flow)

    def weight(self) -> Fraction:
        return sum((e.weight * f for e, f in zip(self.network.edges, self.flow)), ZERO)

    def imbalance(self) -> dict:
        """Inflow minus outflow at every node with a nonzero imbalance."""
        bal: dict = {}
        for e, f in zip(self.network.edges, self.flow):
            if f:
                bal[e.head] = bal.get(e.head, ZERO) + f
                bal[e.tail] = bal.get(e.tail, ZERO) - f
        return {v: b for v, b in bal.items() if b}

    def conserves(self) -> bool:
        return not self.imbalance()

    def is_feasible(self) -> bool:
        return self.conserves() and all(e.admits(f) for e, f in zip(self.network.edges, self.flow))

    def by_edge(self) -> dict:
        return {(e.tail, e.head): f for e, f in zip(self.network.edges, self.flow) if f}


def assignment_to_circulation(x: FractionalAssignment, net: FlowNetwork) -> Circulation:
    """``f_x``: ``x_ij * s_i`` on each job->machine edge, balanced through s and t."""
    flow = [ZERO] * len(net.edges)
    on_net = set()
    for k, (i, j) in net.assignment_edges():
        flow[k] = x.x[i][j] * net.job_sizes[i]
        on_net.add((i, j))
    for e in x.support():
        if e not in on_net:
            raise InfeasibleError(f"x uses ({e[0] + 1}, {e[1] + 1}), which is not an edge of the network")
    job_out = [ZERO] * net.n
    machine_in = [ZERO] * net.m
    for k, (i, j) in net.assignment_edges():
        job_out[i] += flow[k]
        machine_in[j] += flow[k]
    for k, e in enumerate(net.edges):
        if e.tail == SOURCE:
            flow[k] = job_out[e.head[1]]
        elif e.head == SINK:
            flow[k] = machine_in[e.tail[1]]
        elif e.tail == SINK:
            flow[k] = sum(job_out, ZERO)
    return Circulation(net, tuple(flow))


def circulation_to_assignment(f: Circulation) -> FractionalAssignment:
    """Inverse of :func:`assignment_to_circulation`; only feasible circulations map back."""
    if not f.conserves():
        raise InfeasibleError(f"flow is not conserved at {sorted(map(str, f.imbalance()))}")
    for e, v in zip(f.network.edges, f.flow):
        if not e.admits(v):
            raise InfeasibleError(f"flow {v} on {e.tail}->{e.head} violates capacity {e.capacity}")
    net = f.network
    entries = {(i, j): f.flow[k] / net.job_sizes[i] for k, (i, j) in net.assignment_edges()}
    return FractionalAssignment.from_dict(net.n, net.m, entries)


def conformal_decompose(delta: Circulation) -> list[Circulation]:
    """Split a circulation into flow cycles that agree with its sign on every edge.

    Repeatedly walk from the first edge still carrying residual flow,
    following edges in their direction of residual flow (forward when
    positive, backward when negative), until a node repeats; the closed
    part of the walk is a cycle, and its bottleneck is peeled off.  Each
    peel zeroes at least one edge, so at most ``len(edges)`` cycles result.
    """
    if not delta.conserves():
        raise ValueError("conformal decomposition needs a circulation")
    net = delta.network
    residual = list(delta.flow)
    # Oriented adjacency: node -> [(edge index, next node)] for either direction.
    out_of: dict = {}
    for k, e in enumerate(net.edges):
        out_of.setdefault(e.tail, []).append((k, e.head, 1))
        out_of.setdefault(e.head, []).append((k, e.tail, -1))

    cycles = []
    while True:
        start = next((k for k, r in enumerate(residual) if r), None)
        if start is None:
            return cycles
        e = net.edges[start]
        first, node = (e.tail, e.head) if residual[start] > 0 else (e.head, e.tail)
        path_nodes = [first]
        path_edges = [start]
        seen = {first: 0}
        while node not in seen:
            seen[node] = len(path_nodes)
            path_nodes.append(node)
            k = next(
                k for k, _, d in out_of[node]
                if (residual[k] > 0 and d == 1) or (residual[k] < 0 and d == -1)
            )
            path_edges.append(k)
            nxt = net.edges[k].head if residual[k] > 0 else net.edges[k].tail
            node = nxt
        loop = path_edges[seen[node]:]
        amount = min(abs(residual[k]) for k in loop)
        flow = [ZERO] * len(net.edges)
        for k in loop:
            flow[k] = amount if residual[k] > 0 else -amount
            residual[k] -= flow[k]
        cycles.append(Circulation(net, tuple(flow)))


def is_flow_cycle(c: Circulation) -> bool:
    """Nonzero circulation whose support is a single simple (undirected) cycle."""
    if c.is_zero() or not c.conserves():
        return False
    support = [e for e, f in zip(c.network.edges, c.flow) if f]
    degree: dict = {}
    for e in support:
        degree[e.tail] = degree.get(e.tail, 0) + 1
        degree[e.head] = degree.get(e.head, 0) + 1
    if any(d != 2 for d in degree.values()):
        return False
    # Connected: walk the support from one node.
    adj: dict = {}
    for e in support:
        adj.setdefault(e.tail, []).append(e.head)
        adj.setdefault(e.head, []).append(e.tail)
    start = support[0].tail
    stack, reached = [start], {start}
    while stack:
        v = stack.pop()
        for u in adj[v]:
            if u not in reached:
                reached.add(u)
                stack.append(u)
    return len(reached) == len(degree)


def is_conformal(delta: Circulation, cycles: Sequence[Circulation]) -> bool:
    total = [ZERO] * len(delta.flow)
    for c in cycles:
        for k, (d, g) in enumerate(zip(delta.flow, c.flow)):
            if d * g < 0:
                return False
            total[k] += g
    return tuple(total) == delta.flow


def check_prefix_feasibility(
    f: Circulation, f_prime: Circulation, cycles: Sequence[Circulation], subset: Iterable[int]
) -> bool:
    """Whether ``f`` plus the cycles indexed by ``subset`` is a feasible circulation.

    For a conformal decomposition of ``f_prime - f`` with both endpoints
    feasible this always holds; the function exists as a test oracle.
    """
    g = f
    for l in subset:
        g = g + cycles[l]
    return g.is_feasible()


def all_prefixes_feasible(f: Circulation, f_prime: Circulation, cycles: Sequence[Circulation]) -> bool:
    k = len(cycles)
    return all(
        check_prefix_feasibility(f, f_prime, cycles, subset)
        for size in range(k + 1)
        for subset in combinations(range(k), size)
    )

"""Multigraphs with per-edge dimension ratios, trace specifications, marginals.

The quantum system behind these structures has one subsystem per edge
endpoint (a "leg"): an edge carries a maximally entangled pair between its
two legs, a vertex groups the legs that interact through one random unitary.
A marginal selects which legs are traced out; everything downstream (flow
networks, markings, predictors, the simulator) speaks in terms of the types
defined here.

Leg numbering is part of the external contract: edges are scanned in list
order and edge ``i`` contributes legs ``2*i`` (first endpoint) and ``2*i+1``
(second endpoint).  Parsing the same document twice yields identical leg
tables.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

from .errors import ParseError, ValidationError

#: Node names reserved for the flow network's distinguished nodes.
RESERVED_NODE_NAMES = ("source", "sink")


@dataclass(frozen=True)
class Edge:
    """An undirected edge; ``u == v`` is a loop.  ``d`` is the integer
    dimension ratio shared by both endpoints (subsystem dimension d*N)."""

    u: str
    v: str
    d: int = 1


@dataclass(frozen=True)
class Leg:
    """One edge endpoint, i.e. one subsystem."""

    leg_id: int
    vertex: str
    edge: int
    side: int  # 0 = first endpoint, 1 = second endpoint
    ratio: int


@dataclass(frozen=True)
class Graph:
    """A validated multigraph with loops and per-edge dimension ratios."""

    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        if not self.vertices:
            raise ValidationError("graph has no vertices")
        seen = set()
        for name in self.vertices:
            if not isinstance(name, str) or not name:
                raise ValidationError(f"invalid vertex name {name!r}")
            if name in RESERVED_NODE_NAMES:
                raise ValidationError(f"vertex name {name!r} is reserved")
            if name in seen:
                raise ValidationError(f"duplicate vertex {name!r}")
            seen.add(name)
        if not self.edges:
            raise ValidationError("graph has no edges")
        for i, e in enumerate(self.edges):
            for endpoint in (e.u, e.v):
                if endpoint not in seen:
                    raise ValidationError(
                        f"edge {i} references undefined vertex {endpoint!r}"
                    )
            if not isinstance(e.d, int) or isinstance(e.d, bool) or e.d < 1:
                raise ValidationError(
                    f"edge {i} has non-positive dimension ratio {e.d!r}"
                )
        for name in self.vertices:
            if self.degree(name) == 0:
                raise ValidationError(f"vertex {name!r} has degree 0")

    # -- derived tables ----------------------------------------------------

    @cached_property
    def legs(self) -> tuple[Leg, ...]:
        out = []
        for i, e in enumerate(self.edges):
            out.append(Leg(2 * i, e.u, i, 0, e.d))
            out.append(Leg(2 * i + 1, e.v, i, 1, e.d))
        return tuple(out)

    @cached_property
    def _legs_by_vertex(self) -> dict[str, tuple[int, ...]]:
        table: dict[str, list[int]] = {v: [] for v in self.vertices}
        for leg in self.legs:
            table[leg.vertex].append(leg.leg_id)
        return {v: tuple(ids) for v, ids in table.items()}

    @cached_property
    def _degree(self) -> dict[str, int]:
        deg = {v: 0 for v in self.vertices}
        for e in self.edges:
            deg[e.u] += 1
            deg[e.v] += 1
        return deg

    def degree(self, vertex: str) -> int:
        try:
            return self._degree[vertex]
        except KeyError:
            raise ValidationError(f"unknown vertex {vertex!r}") from None

    def legs_of(self, vertex: str) -> tuple[int, ...]:
        """Leg ids attached to ``vertex``, ascending."""
        try:
            return self._legs_by_vertex[vertex]
        except KeyError:
            raise ValidationError(f"unknown vertex {vertex!r}") from None

    def leg(self, leg_id: int) -> Leg:
        if not 0 <= leg_id < len(self.legs):
            raise ValidationError(f"unknown leg id {leg_id!r}")
        return self.legs[leg_id]

    @property
    def n_legs(self) -> int:
        return 2 * len(self.edges)

    def loop_indices(self, vertex: str) -> tuple[int, ...]:
        """Indices of loop edges at ``vertex``."""
        return tuple(
            i for i, e in enumerate(self.edges) if e.u == e.v == vertex
        )

    def edges_between(self, v: str, w: str) -> tuple[int, ...]:
        """Indices of non-loop edges joining two distinct vertices."""
        if v == w:
            return ()
        pair = {v, w}
        return tuple(
            i for i, e in enumerate(self.edges) if {e.u, e.v} == pair
        )

    def multiplicity(self, v: str, w: str) -> int:
        return len(self.edges_between(v, w))

    def to_document(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [{"u": e.u, "v": e.v, "d": e.d} for e in self.edges],
        }


@dataclass(frozen=True)
class TraceSpec:
    """Which subsystems are traced out.

    ``counts`` mode carries the counting function ``s`` (number of
    *surviving* legs per vertex); ``legs`` mode carries the explicit set of
    traced leg ids.  ``t(v) = deg(v) - s(v)`` is always the traced count.
    """

    mode: str
    s: Mapping[str, int] | None = None
    traced: frozenset[int] | None = None

    @classmethod
    def from_counts(cls, s: Mapping[str, int]) -> "TraceSpec":
        return cls(mode="counts", s=dict(s))

    @classmethod
    def from_legs(cls, traced: Iterable[int]) -> "TraceSpec":
        return cls(mode="legs", traced=frozenset(traced))


@dataclass(frozen=True)
class Marginal:
    """A graph together with a validated trace specification."""

    graph: Graph
    trace: TraceSpec

    @cached_property
    def s_counts(self) -> dict[str, int]:
        """Surviving-leg count per vertex (derived from legs by grouping)."""
        if self.trace.mode == "counts":
            return dict(self.trace.s)
        counts = {v: self.graph.degree(v) for v in self.graph.vertices}
        for leg_id in self.trace.traced:
            counts[self.graph.leg(leg_id).vertex] -= 1
        return counts

    def s(self, vertex: str) -> int:
        return self.s_counts[vertex]

    def t(self, vertex: str) -> int:
        return self.graph.degree(vertex) - self.s_counts[vertex]

    @property
    def traced_legs(self) -> frozenset[int] | None:
        """Explicit traced legs, or ``None`` for a counts-mode spec."""
        return self.trace.traced

    def completed_traced_legs(self) -> frozenset[int]:
        """Leg-level view; counts-mode specs trace the lowest-numbered legs
        of each vertex (the deterministic completion rule)."""
        if self.trace.traced is not None:
            return self.trace.traced
        traced = []
        for v in self.graph.vertices:
            traced.extend(self.graph.legs_of(v)[: self.t(v)])
        return frozenset(traced)

    def surviving_legs(self) -> tuple[int, ...]:
        traced = self.completed_traced_legs()
        return tuple(
            leg.leg_id for leg in self.graph.legs if leg.leg_id not in traced
        )

    def to_document(self) -> dict:
        doc = self.graph.to_document()
        if self.trace.mode == "counts":
            doc["trace"] = {"mode": "counts", "s": dict(self.trace.s)}
        else:
            doc["trace"] = {"mode": "legs", "traced": sorted(self.trace.traced)}
        return doc


def resolve_trace(graph: Graph, spec: TraceSpec) -> Marginal:
    """Validate a trace specification against the graph and bundle them."""
    if spec.mode == "counts":
        if spec.s is None:
            raise ValidationError("counts-mode trace without counts")
        for v in graph.vertices:
            if v not in spec.s:
                raise ValidationError(f"missing trace count for vertex {v!r}")
        for v, count in spec.s.items():
            if v not in graph._degree:
                raise ValidationError(f"trace count for unknown vertex {v!r}")
            if not isinstance(count, int) or isinstance(count, bool):
                raise ValidationError(f"count for vertex {v!r} is not an integer")
            if not 0 <= count <= graph.degree(v):
                raise ValidationError(
                    f"count {count} for vertex {v!r} outside [0, {graph.degree(v)}]"
                )
    elif spec.mode == "legs":
        if spec.traced is None:
            raise ValidationError("legs-mode trace without traced set")
        for leg_id in spec.traced:
            if not isinstance(leg_id, int) or isinstance(leg_id, bool):
                raise ValidationError(f"traced leg id {leg_id!r} is not an integer")
            if not 0 <= leg_id < graph.n_legs:
                raise ValidationError(f"traced leg id {leg_id} does not exist")
    else:
        raise ValidationError(f"unknown trace mode {spec.mode!r}")
    return Marginal(graph=graph, trace=spec)


def is_adapted(marginal: Marginal) -> bool:
    """True iff every vertex is traced either not at all or entirely."""
    g = marginal.graph
    return all(marginal.s(v) in (0, g.degree(v)) for v in g.vertices)


# -- document I/O ----------------------------------------------------------


def _load_document(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("graph document must be a JSON object")
    return doc


def graph_from_document(doc: dict) -> Graph:
    if "vertices" not in doc or "edges" not in doc:
        raise ParseError("graph document needs 'vertices' and 'edges'")
    if not isinstance(doc["vertices"], list) or not isinstance(doc["edges"], list):
        raise ParseError("'vertices' and 'edges' must be lists")
    edges = []
    for i, rec in enumerate(doc["edges"]):
        if not isinstance(rec, dict) or "u" not in rec or "v" not in rec:
            raise ParseError(f"edge {i} must be an object with 'u' and 'v'")
        d = rec.get("d", 1)
        edges.append(Edge(u=rec["u"], v=rec["v"], d=d))
    return Graph(vertices=tuple(doc["vertices"]), edges=tuple(edges))


def trace_from_document(doc: dict) -> TraceSpec:
    rec = doc.get("trace")
    if rec is None:
        raise ParseError("document has no 'trace' section")
    if not isinstance(rec, dict) or "mode" not in rec:
        raise ParseError("'trace' must be an object with a 'mode'")
    if rec["mode"] == "counts":
        if "s" not in rec or not isinstance(rec["s"], dict):
            raise ParseError("counts-mode trace needs an 's' mapping")
        return TraceSpec.from_counts(rec["s"])
    if rec["mode"] == "legs":
        if "traced" not in rec or not isinstance(rec["traced"], list):
            raise ParseError("legs-mode trace needs a 'traced' list")
        return TraceSpec.from_legs(rec["traced"])
    raise ParseError(f"unknown trace mode {rec['mode']!r}")


def parse_graph(text: str) -> Graph:
    """Parse a serialized graph document (the 'trace' section is ignored)."""
    return graph_from_document(_load_document(text))


def parse_marginal(text: str) -> Marginal:
    """Parse a graph document together with its trace section."""
    doc = _load_document(text)
    graph = graph_from_document(doc)
    return resolve_trace(graph, trace_from_document(doc))

"""Shared fixture builders: canonical graphs, marginals and graph families."""

from __future__ import annotations

import itertools
import json
import math

import numpy as np

from arealaw import Edge, Graph, Marginal, TraceSpec, parse_marginal, resolve_trace


def doc(vertices, edges, trace) -> dict:
    return {
        "vertices": vertices,
        "edges": [{"u": u, "v": v, "d": d} for (u, v, d) in edges],
        "trace": trace,
    }


def marginal_from(vertices, edges, trace) -> Marginal:
    return parse_marginal(json.dumps(doc(vertices, edges, trace)))


def single_loop(s: int = 1, d: int = 1) -> Marginal:
    return marginal_from(["V"], [("V", "V", d)],
                         {"mode": "counts", "s": {"V": s}})


def two_loops(s: int = 2) -> Marginal:
    return marginal_from(["V"], [("V", "V", 1), ("V", "V", 1)],
                         {"mode": "counts", "s": {"V": s}})


def black_hole(traced, d1: int = 1, d2: int = 1) -> Marginal:
    """Two edges joined in a path; legs 0/1 on the first edge, 2/3 on the
    second.  Case 1 traces [0, 1], case 2 traces [0, 2], the adapted
    marginal traces [0, 3]."""
    return marginal_from(
        ["V1", "V2", "V3"], [("V1", "V2", d1), ("V2", "V3", d2)],
        {"mode": "legs", "traced": list(traced)},
    )


def black_hole_counts(s1, s2, s3, d1: int = 1, d2: int = 1) -> Marginal:
    return marginal_from(
        ["V1", "V2", "V3"], [("V1", "V2", d1), ("V2", "V3", d2)],
        {"mode": "counts", "s": {"V1": s1, "V2": s2, "V3": s3}},
    )


def oxygen(traced, d1: int = 1, d2: int = 1) -> Marginal:
    """Double edge between two vertices; legs 0/2 at V1, legs 1/3 at V2.
    Case 1 traces [0, 1] (one edge entirely), case 2 traces [0, 3]."""
    return marginal_from(
        ["V1", "V2"], [("V1", "V2", d1), ("V1", "V2", d2)],
        {"mode": "legs", "traced": list(traced)},
    )


def adapted_five(N_ratio: int = 1) -> Marginal:
    """Five parallel unit-ratio edges, one side fully traced: a 5-crossing
    adapted partition."""
    edges = [("A", "B", N_ratio)] * 5
    return marginal_from(["A", "B"], edges,
                         {"mode": "counts", "s": {"A": 0, "B": 5}})


# -- random families ---------------------------------------------------------


def random_graph(rng: np.random.Generator, max_vertices: int = 4,
                 max_edges: int = 5, dims=(1,)) -> Graph:
    """A random multigraph with loops, minimum degree one."""
    while True:
        k = int(rng.integers(1, max_vertices + 1))
        m = int(rng.integers(1, max_edges + 1))
        names = [f"V{i}" for i in range(k)]
        edges = []
        for _ in range(m):
            u, v = rng.integers(0, k, size=2)
            d = int(dims[rng.integers(0, len(dims))])
            edges.append(Edge(u=names[u], v=names[v], d=d))
        degree = {n: 0 for n in names}
        for e in edges:
            degree[e.u] += 1
            degree[e.v] += 1
        if min(degree.values()) >= 1:
            return Graph(vertices=tuple(names), edges=tuple(edges))


def random_marginal(rng: np.random.Generator, max_vertices: int = 4,
                    max_edges: int = 5, dims=(1,)) -> Marginal:
    g = random_graph(rng, max_vertices, max_edges, dims)
    s = {v: int(rng.integers(0, g.degree(v) + 1)) for v in g.vertices}
    return resolve_trace(g, TraceSpec.from_counts(s))


def random_adapted_marginal(rng: np.random.Generator, max_vertices: int = 4,
                            max_edges: int = 3, dims=(1, 2, 3),
                            max_vertex_dim: int = 1000,
                            max_total_dim: int = 2 ** 18,
                            N: int = 3) -> Marginal:
    """An adapted marginal small enough for full (no-skip) simulation."""
    while True:
        g = random_graph(rng, max_vertices, max_edges, dims)
        leg_dims = [leg.ratio * N for leg in g.legs]
        if math.prod(leg_dims) > max_total_dim:
            continue
        if any(
            math.prod(leg_dims[l] for l in g.legs_of(v)) > max_vertex_dim
            for v in g.vertices
        ):
            continue
        traced_vertices = {v for v in g.vertices if rng.random() < 0.5}
        s = {
            v: 0 if v in traced_vertices else g.degree(v) for v in g.vertices
        }
        return resolve_trace(g, TraceSpec.from_counts(s))


def random_transport_instance(rng: np.random.Generator):
    """Feasible by construction: quotas cover the edge degree with an even
    deficit; every quota stays <= 4."""
    from arealaw import TransportInstance

    while True:
        k = int(rng.integers(1, 5))
        sites = [f"P{i}" for i in range(k)]
        pairs = {}
        for i in range(k):
            for j in range(i + 1, k):
                count = int(rng.integers(0, 4))
                if count:
                    pairs[(sites[i], sites[j])] = count
        degree = {s: 0 for s in sites}
        for (a, b), c in pairs.items():
            degree[a] += c
            degree[b] += c
        if any(d > 8 for d in degree.values()):
            continue
        quotas = {}
        ok = True
        for s in sites:
            pad = int(rng.integers(0, 3)) * 2
            total = degree[s] + pad
            if total > 8:
                total = degree[s]
            lo = max(0, total - 4)
            hi = min(4, total)
            if lo > hi:
                ok = False
                break
            to_a = int(rng.integers(lo, hi + 1))
            quotas[s] = (to_a, total - to_a)
        if not ok:
            continue
        return TransportInstance.build(sites, pairs, quotas, N=2)


def all_counting_functions(g: Graph):
    ranges = [range(g.degree(v) + 1) for v in g.vertices]
    for combo in itertools.product(*ranges):
        yield dict(zip(g.vertices, combo))


def enumerate_small_graphs(max_vertices: int = 4, max_edges: int = 5):
    """All multigraphs (loops and multi-edges included) with minimum degree
    one, up to vertex relabeling."""
    out = []
    for k in range(1, max_vertices + 1):
        names = tuple(f"V{i}" for i in range(k))
        pair_types = [(i, j) for i in range(k) for j in range(i, k)]
        perms = list(itertools.permutations(range(k)))
        seen = set()
        for m in range(1, max_edges + 1):
            for combo in itertools.combinations_with_replacement(
                range(len(pair_types)), m
            ):
                edges = [pair_types[c] for c in combo]
                degree = [0] * k
                for a, b in edges:
                    degree[a] += 1
                    degree[b] += 1
                if min(degree) == 0:
                    continue
                canon = min(
                    tuple(sorted(
                        (min(p[a], p[b]), max(p[a], p[b])) for a, b in edges
                    ))
                    for p in perms
                )
                if canon in seen:
                    continue
                seen.add(canon)
                out.append(Graph(
                    vertices=names,
                    edges=tuple(Edge(u=names[a], v=names[b], d=1)
                                for a, b in canon),
                ))
    return out

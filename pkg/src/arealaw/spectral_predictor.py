"""Closed-form and numerical entropy predictions.

The Marchenko-Pastur family drives every known correction: ``mp_moment``
gives its moments (validated against quadrature), ``mp_xlogx`` the value of
``integral x ln x dpi_c``, and ``page_entropy`` the asymptotic mean entropy
of an induced random state, written in the symmetric form
``ln(Dmin) - Dmin / (2 Dmax)``.

``predict_entropy`` dispatches a marginal to its most specific known case:
adapted partitions are exact and deterministic; a unique surviving vertex,
the two-edge path and the double-edge topologies have closed corrections;
everything else falls back to the generic leading term (boundary area times
``ln N``) with an unknown constant.  All stored entropies are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.integrate import quad

from .boundary_flow import build_network, max_flow
from .errors import UnknownCaseError, ValidationError
from .graph_model import Marginal, is_adapted
from .nc_combinatorics import MAX_P, narayana

CASE_LABELS = (
    "adapted",
    "single_loop",
    "one_vertex",
    "black_hole_1",
    "black_hole_2",
    "oxygen_1",
    "oxygen_2",
    "generic",
)


@dataclass(frozen=True)
class MPParams:
    """Marchenko-Pastur parameter; density support is
    ``[1 + c - 2 sqrt(c), 1 + c + 2 sqrt(c)]`` plus an atom of mass
    ``max(1 - c, 0)`` at zero."""

    c: float

    def __post_init__(self):
        if self.c <= 0:
            raise ValidationError("Marchenko-Pastur parameter must be positive")

    @property
    def support(self) -> tuple[float, float]:
        r = 2.0 * math.sqrt(self.c)
        return (1.0 + self.c - r, 1.0 + self.c + r)

    @property
    def atom(self) -> float:
        return max(1.0 - self.c, 0.0)


def mp_moment(c, p: int):
    """p-th moment of the Marchenko-Pastur distribution.

    Evaluates ``sum_k narayana(p, k) c^k`` (the non-crossing partition sum),
    which keeps exact types exact: a ``Fraction`` argument yields a
    ``Fraction``.
    """
    if not 1 <= p <= MAX_P:
        raise ValidationError(f"moment order p={p} outside [1, {MAX_P}]")
    return sum(narayana(p, k) * c ** k for k in range(1, p + 1))


def mp_xlogx(c: float) -> float:
    """Closed form of ``integral x ln x dpi_c(x)`` (natural log):
    ``1/2 + c ln c`` for ``c >= 1`` and ``c^2 / 2`` for ``0 < c < 1``."""
    if c <= 0:
        raise ValidationError("Marchenko-Pastur parameter must be positive")
    if c >= 1:
        return 0.5 + c * math.log(c)
    return 0.5 * c * c


def _mp_quadrature(c: float, f) -> float:
    """Integrate ``f`` against the continuous part of ``pi_c`` using the
    edge-singularity-aware substitution ``x = 1 + c + 2 sqrt(c) cos(theta)``;
    the atom at zero contributes nothing for the integrands used here."""
    root = math.sqrt(c)

    def integrand(theta: float) -> float:
        x = 1.0 + c + 2.0 * root * math.cos(theta)
        if x <= 1e-300:
            return 0.0
        return (2.0 * c / math.pi) * f(x) * math.sin(theta) ** 2 / x

    value, _ = quad(integrand, 0.0, math.pi, limit=200)
    return value


def mp_moment_quadrature(c: float, p: int) -> float:
    """Independent quadrature route for :func:`mp_moment`."""
    return _mp_quadrature(c, lambda x: x ** p)


def mp_xlogx_quadrature(c: float) -> float:
    """Independent quadrature route for :func:`mp_xlogx`."""
    return _mp_quadrature(c, lambda x: x * math.log(x))


def page_entropy(dim_system: int, dim_environment: int) -> float:
    """Asymptotic mean entropy of the marginal of a random bipartite pure
    state, ``ln(Dmin) - Dmin / (2 Dmax)`` in nats.

    This is the rescaling-consistent reading of the Marchenko-Pastur
    correction (``ln(c d) - mp_xlogx(c) / c`` with ``c`` the dimension
    ratio); the min/max form keeps it exactly symmetric in its arguments.
    """
    if dim_system < 2 or dim_environment < 2:
        raise ValidationError("both dimensions must be at least 2")
    lo, hi = sorted((dim_system, dim_environment))
    return math.log(lo) - lo / (2.0 * hi)


def _page_correction(scale_a: float, scale_b: float) -> float:
    """O(1) entropy deficit for two effective dimensions growing at the same
    rate in N with constant prefactors ``scale_a``/``scale_b``: routed
    through :func:`mp_xlogx` with the ratio as the parameter."""
    c = min(scale_a, scale_b) / max(scale_a, scale_b)
    return mp_xlogx(c) / c


def limit_correction(case: str, d1: float = 1.0, d2: float = 1.0) -> float:
    """Known correction constants, per case label.

    ``d1``/``d2`` are the case's dimension prefactors: the two effective
    scales for ``one_vertex`` (surviving vs traced-side products), the two
    edge ratios for the path and double-edge topologies.
    """
    if case == "adapted":
        return 0.0
    if case == "single_loop":
        return _page_correction(1.0, 1.0)  # equal dimensions: 1/2
    if case == "one_vertex":
        return _page_correction(d1, d2)
    if case in ("black_hole_1", "oxygen_1"):
        return _page_correction(d1 * d1, d2 * d2)  # min^2 / (2 max^2)
    if case in ("black_hole_2", "oxygen_2"):
        return _page_correction(1.0, 1.0)
    if case == "generic":
        raise UnknownCaseError("no closed-form correction for the generic case")
    raise ValidationError(f"unknown case label {case!r}")


@dataclass(frozen=True)
class EntropyPrediction:
    """Mean-entropy prediction ``area * ln N + offset - correction``.

    ``correction`` is ``None`` when only the leading term is known;
    ``exact`` marks predictions that hold deterministically at every N.
    """

    case: str
    leading_area: int
    leading_offset: float  # nats
    correction: float | None  # nats, None = unknown
    exact: bool

    def value(self, N: int) -> float:
        """Predicted mean entropy in nats (leading term only if the
        correction is unknown)."""
        base = self.leading_area * math.log(N) + self.leading_offset
        return base - (self.correction or 0.0)

    def to_document(self) -> dict:
        return {
            "case": self.case,
            "leading_area": self.leading_area,
            "leading_offset_nats": self.leading_offset,
            "correction_nats": self.correction,
            "exact": self.exact,
        }


def crossing_edges(marginal: Marginal) -> tuple[int, ...]:
    """Edges joining a fully traced vertex to a fully surviving one."""
    g = marginal.graph
    fully_traced = {v for v in g.vertices if marginal.s(v) == 0}
    fully_surviving = {v for v in g.vertices if marginal.t(v) == 0}
    return tuple(
        i for i, e in enumerate(g.edges)
        if (e.u in fully_traced and e.v in fully_surviving)
        or (e.u in fully_surviving and e.v in fully_traced)
    )


def _detect_template(marginal: Marginal):
    """Structural match for the two-edge path and double-edge topologies
    with their two-leg trace patterns; returns (case, d_traced_side, d_other)
    or None."""
    g = marginal.graph
    traced = marginal.completed_traced_legs()
    if len(g.edges) != 2 or len(traced) != 2:
        return None
    if any(e.u == e.v for e in g.edges):
        return None

    if len(g.vertices) == 3:
        degrees = sorted(g.degree(v) for v in g.vertices)
        if degrees != [1, 1, 2]:
            return None
        middle = next(v for v in g.vertices if g.degree(v) == 2)
        end_legs = [l for l in traced if g.leg(l).vertex != middle]
        middle_legs = [l for l in traced if g.leg(l).vertex == middle]
        if len(end_legs) != 1 or len(middle_legs) != 1:
            return None
        end_edge = g.leg(end_legs[0]).edge
        middle_edge = g.leg(middle_legs[0]).edge
        d_end = g.edges[end_edge].d
        d_other = g.edges[1 - end_edge].d
        if middle_edge == end_edge:
            return ("black_hole_1", d_end, d_other)
        return ("black_hole_2", d_end, d_other)

    if len(g.vertices) == 2:
        if g.multiplicity(*g.vertices) != 2:
            return None
        per_vertex = {v: [l for l in traced if g.leg(l).vertex == v]
                      for v in g.vertices}
        if any(len(legs) != 1 for legs in per_vertex.values()):
            return None
        edges_hit = {g.leg(l).edge for l in traced}
        d = [g.edges[0].d, g.edges[1].d]
        if len(edges_hit) == 1:
            hit = edges_hit.pop()
            return ("oxygen_1", d[hit], d[1 - hit])
        return ("oxygen_2", d[0], d[1])
    return None


def predict_entropy(marginal: Marginal, N: int) -> EntropyPrediction:
    """Dispatch a marginal to its most specific known prediction.

    Case priority: adapted, single loop, unique surviving vertex, path /
    double-edge template, generic.  The leading area always equals the
    maximal flow of the marginal's network.
    """
    if N < 2:
        raise ValidationError("N must be at least 2")
    g = marginal.graph
    X = max_flow(build_network(marginal)).value

    if is_adapted(marginal):
        edges = crossing_edges(marginal)
        offset = math.fsum(math.log(g.edges[i].d) for i in edges)
        return EntropyPrediction(
            case="adapted", leading_area=len(edges), leading_offset=offset,
            correction=0.0, exact=True,
        )

    if len(g.vertices) == 1 and len(g.edges) == 1 and marginal.s(g.vertices[0]) == 1:
        d = g.edges[0].d
        return EntropyPrediction(
            case="single_loop", leading_area=1, leading_offset=math.log(d),
            correction=limit_correction("single_loop"), exact=False,
        )

    surviving_vertices = [v for v in g.vertices if marginal.s(v) > 0]
    if len(surviving_vertices) == 1:
        v = surviving_vertices[0]
        traced = marginal.completed_traced_legs()
        n_s = marginal.s(v)
        n_t = marginal.t(v)
        external = [l for l in g.legs_of(v) if g.leg(l).edge not in g.loop_indices(v)]
        n_g = len(external)
        d_s = math.prod(g.leg(l).ratio for l in g.legs_of(v) if l not in traced)
        d_t = math.prod(g.leg(l).ratio for l in g.legs_of(v) if l in traced)
        d_g = math.prod(g.leg(l).ratio for l in external)
        if n_s < n_t + n_g:
            area, offset, corr = n_s, math.log(d_s), 0.0
        elif n_s > n_t + n_g:
            area, offset, corr = n_t + n_g, math.log(d_t * d_g), 0.0
        else:
            area = n_s
            offset = math.log(min(d_s, d_t * d_g))
            corr = limit_correction("one_vertex", d_s, d_t * d_g)
        return EntropyPrediction(
            case="one_vertex", leading_area=area, leading_offset=offset,
            correction=corr, exact=False,
        )

    template = _detect_template(marginal)
    if template is not None:
        case, da, db = template
        if case.endswith("_1"):
            offset = 2.0 * math.log(min(da, db))
        else:
            offset = math.log(da * db)
        return EntropyPrediction(
            case=case, leading_area=2, leading_offset=offset,
            correction=limit_correction(case, da, db), exact=False,
        )

    return EntropyPrediction(
        case="generic", leading_area=X, leading_offset=0.0,
        correction=None, exact=False,
    )

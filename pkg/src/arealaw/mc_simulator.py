"""Monte Carlo realization of the random graph-state ensemble.

A state is the tensor product of one maximally entangled pair per edge with
an independent Haar-random unitary applied at each vertex; a marginal traces
out the selected legs.  Construction is a dense vector plus axis permutation
and per-vertex reshaped matrix application; no tensor-network engine.

Determinism contract: every sample derives its own generator from
``(seed, sample_index)`` and every vertex from ``(seed, sample_index,
vertex_slot)``, so results do not depend on execution order, parallelism or
which vertices are skipped.  Aggregation uses exact summation in sample
order.  Cross-platform bit-equality is not promised (eigensolvers).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import AreaLawError, ResourceGuardError, ValidationError
from .graph_model import Marginal
from .spectral_predictor import mp_moment

DEFAULT_STATE_DIM_LIMIT = 2 ** 24
DEFAULT_HAAR_DIM_LIMIT = 4096

#: Normative numeric thresholds for spectra.
EIGENVALUE_CLIP_REL = 1e-12
RANK_THRESHOLD_REL = 1e-9

#: Reduced density matrices are materialised only up to this dimension;
#: larger states keep the pure-state factor, which carries the same spectrum.
MATRIX_MATERIALIZE_LIMIT = 4096

NUMERICS_DISCLAIMER = (
    "deterministic for fixed (seed, inputs, build); floating-point "
    "eigensolvers may differ across platforms or BLAS builds"
)


def state_dim_limit() -> int:
    return int(os.environ.get("AREALAW_STATE_DIM_LIMIT", DEFAULT_STATE_DIM_LIMIT))


def haar_dim_limit() -> int:
    return int(os.environ.get("AREALAW_HAAR_DIM_LIMIT", DEFAULT_HAAR_DIM_LIMIT))


def ginibre(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Matrix of i.i.d. standard complex Gaussian entries."""
    return (rng.standard_normal((rows, cols))
            + 1j * rng.standard_normal((rows, cols))) / math.sqrt(2.0)


def haar_unitary(dim: int, rng: np.random.Generator,
                 size: int | None = None) -> np.ndarray:
    """Haar-distributed unitary via QR of a Ginibre matrix.

    The triangular factor's diagonal is normalized to positive reals (phase
    correction); without it the factorization is not measure-correct.
    ``size`` stacks independent samples along a leading axis.
    """
    limit = haar_dim_limit()
    if dim < 1:
        raise ValidationError("unitary dimension must be positive")
    if dim > limit:
        raise ResourceGuardError(
            f"Haar dimension {dim} exceeds the guard {limit} "
            "(set AREALAW_HAAR_DIM_LIMIT to override)"
        )
    shape = (dim, dim) if size is None else (size, dim, dim)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.einsum("...ii->...i", r)
    phases = diag / np.abs(diag)
    return q * phases[..., None, :]


def leg_dimensions(marginal: Marginal, N: int) -> tuple[int, ...]:
    """Per-leg Hilbert space dimensions ``d_e * N`` in leg order."""
    return tuple(leg.ratio * N for leg in marginal.graph.legs)


@dataclass(frozen=True, eq=False)
class ReducedState:
    """Reduced density operator of a pure graph state.

    ``factor`` is the pure state reshaped to (surviving x traced); the
    density matrix is ``factor @ factor^dagger`` and is materialised in
    ``matrix`` only for small surviving dimensions.
    """

    factor: np.ndarray
    dims: tuple[int, ...]             # surviving leg dimensions
    surviving_legs: tuple[int, ...]
    traced_legs: tuple[int, ...]
    flags: tuple[str, ...]
    matrix: np.ndarray | None

    @property
    def dim(self) -> int:
        return self.factor.shape[0]


@dataclass(frozen=True, eq=False)
class SpectralReport:
    eigenvalues: np.ndarray           # descending, length = surviving dim
    entropy: float                    # von Neumann, nats
    renyi: dict[float, float]
    rank: int


@dataclass(frozen=True, eq=False)
class MCReport:
    samples: int
    mean_H: float
    stderr_H: float
    per_sample_H: tuple[float, ...]
    renyi_mean: dict[float, float]
    spectra: tuple[np.ndarray, ...] | None
    seed: int
    N: int
    q_list: tuple[float, ...]
    flags: tuple[str, ...]
    disclaimer: str = NUMERICS_DISCLAIMER

    def to_document(self) -> dict:
        return {
            "samples": self.samples,
            "seed": self.seed,
            "N": self.N,
            "mean_H_nats": self.mean_H,
            "stderr_H": self.stderr_H,
            "per_sample_H": list(self.per_sample_H),
            "renyi_mean": {str(q): v for q, v in self.renyi_mean.items()},
            "flags": list(self.flags),
            "numerics": self.disclaimer,
        }


def _apply_on_axes(psi: np.ndarray, axes: Sequence[int],
                   matrix: np.ndarray) -> np.ndarray:
    """Apply ``matrix`` on the grouped ``axes`` of ``psi``."""
    n = psi.ndim
    rest = [a for a in range(n) if a not in axes]
    perm = list(axes) + rest
    shaped = psi.transpose(perm)
    inner_shape = shaped.shape
    shaped = matrix @ shaped.reshape(matrix.shape[0], -1)
    return shaped.reshape(inner_shape).transpose(np.argsort(perm))


def _resolve_unitary_spec(marginal: Marginal, unitaries) -> dict[str, object]:
    vertices = marginal.graph.vertices
    if unitaries is None:
        return {v: "sample" for v in vertices}
    if isinstance(unitaries, str):
        if unitaries not in ("sample", "identity"):
            raise ValidationError(f"unknown unitary mode {unitaries!r}")
        return {v: unitaries for v in vertices}
    resolved = {}
    for v in vertices:
        resolved[v] = unitaries.get(v, "sample")
    for v in unitaries:
        if v not in resolved:
            raise ValidationError(f"unitary given for unknown vertex {v!r}")
    return resolved


def build_reduced_state(marginal: Marginal, N: int, unitaries=None,
                        rng: np.random.Generator | None = None, *,
                        skip_traced: bool = True, skip_surviving: bool = True,
                        vector_fast_path: bool = True) -> ReducedState:
    """Build the pure graph state and trace out the traced legs.

    ``unitaries`` is ``"sample"`` (default), ``"identity"``, or a mapping
    from vertex to a matrix or one of those strings.  Sampled unitaries on
    fully traced vertices are skipped (the partial trace absorbs them
    exactly); on fully surviving vertices they are skipped when
    ``skip_surviving`` is set (spectrum-invariant).  Both skips are recorded
    in the flags, as is the single-vertex fast path, which replaces
    "fixed state + Haar unitary" by a uniformly random state vector.
    """
    if N < 2:
        raise ValidationError("N must be at least 2")
    g = marginal.graph
    dims = leg_dimensions(marginal, N)
    total = math.prod(dims)
    limit = state_dim_limit()
    if total > limit:
        raise ResourceGuardError(
            f"state dimension {total} exceeds the guard {limit} "
            "(set AREALAW_STATE_DIM_LIMIT to override)"
        )
    spec = _resolve_unitary_spec(marginal, unitaries)
    traced = sorted(marginal.completed_traced_legs())
    surviving = [l for l in range(g.n_legs) if l not in set(traced)]
    if rng is None:
        rng = np.random.default_rng()
    streams = rng.spawn(len(g.vertices) + 1)

    flags: list[str] = []
    needs_sampling = [
        v for v in g.vertices if isinstance(spec[v], str) and spec[v] == "sample"
    ]
    if (vector_fast_path and len(g.vertices) == 1
            and needs_sampling == list(g.vertices)):
        # a Haar unitary applied to any fixed vector is a uniform vector
        vec = ginibre(total, 1, streams[-1])[:, 0]
        psi = (vec / np.linalg.norm(vec)).reshape(dims)
        flags.append("vector_path")
    else:
        vec = np.ones(1, dtype=complex)
        for e in g.edges:
            d = e.d * N
            vec = np.kron(vec, np.eye(d, dtype=complex).reshape(-1) / math.sqrt(d))
        psi = vec.reshape(dims)
        for slot, v in enumerate(g.vertices):
            action = spec[v]
            legs = g.legs_of(v)
            vdim = math.prod(dims[l] for l in legs)
            if isinstance(action, str):
                if action == "identity":
                    flags.append(f"identity:{v}")
                    continue
                all_traced = marginal.s(v) == 0
                all_surviving = marginal.t(v) == 0
                if all_traced and skip_traced:
                    flags.append(f"skipped_traced:{v}")
                    continue
                if all_surviving and skip_surviving:
                    flags.append(f"skipped_surviving:{v}")
                    continue
                matrix = haar_unitary(vdim, streams[slot])
            else:
                matrix = np.asarray(action, dtype=complex)
                if matrix.shape != (vdim, vdim):
                    raise ValidationError(
                        f"unitary for vertex {v!r} has shape {matrix.shape}, "
                        f"expected {(vdim, vdim)}"
                    )
                defect = np.abs(matrix.conj().T @ matrix - np.eye(vdim)).max()
                if defect > 1e-8:
                    raise ValidationError(f"matrix for vertex {v!r} is not unitary")
            psi = _apply_on_axes(psi, list(legs), matrix)

    ds = math.prod(dims[l] for l in surviving) if surviving else 1
    dt = math.prod(dims[l] for l in traced) if traced else 1
    factor = psi.transpose(surviving + traced).reshape(ds, dt)

    norm = np.linalg.norm(factor) ** 2
    if abs(norm - 1.0) > 1e-10:
        raise ValidationError(f"state normalization drifted to {norm}")

    matrix = None
    if ds <= MATRIX_MATERIALIZE_LIMIT:
        rho = factor @ factor.conj().T
        matrix = (rho + rho.conj().T) / 2.0
    return ReducedState(
        factor=factor,
        dims=tuple(dims[l] for l in surviving),
        surviving_legs=tuple(surviving),
        traced_legs=tuple(traced),
        flags=tuple(flags),
        matrix=matrix,
    )


def _spectrum_from_factor(factor: np.ndarray) -> np.ndarray:
    """Eigenvalues of ``factor factor^dagger`` padded with the structural
    zeros, descending."""
    ds = factor.shape[0]
    try:
        sv = np.linalg.svd(factor, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        scale = float(np.abs(factor).max())
        raise AreaLawError(
            f"eigensolver failed on a {factor.shape} factor "
            f"(max magnitude {scale:.3e}): {exc}"
        ) from exc
    eig = np.zeros(ds)
    eig[: sv.shape[0]] = sv ** 2
    eig[::-1].sort()
    return eig


def spectral_report(state: ReducedState,
                    q_list: Sequence[float] = (0.0, 1.0, 2.0)) -> SpectralReport:
    """Spectrum, von Neumann and Renyi entropies of a reduced state.

    Eigenvalues below ``EIGENVALUE_CLIP_REL`` (relative to the largest) are
    clamped to zero; the numerical rank uses ``RANK_THRESHOLD_REL``.
    ``q = 1`` is the von Neumann entropy, ``q = 0`` is ``ln rank``.
    """
    eig = _spectrum_from_factor(state.factor)
    top = eig[0] if eig.size else 0.0
    eig[eig < EIGENVALUE_CLIP_REL * top] = 0.0
    rank = int(np.count_nonzero(eig > RANK_THRESHOLD_REL * top))
    positive = eig[eig > 0]
    entropy = float(-np.sum(positive * np.log(positive))) if positive.size else 0.0
    renyi: dict[float, float] = {}
    for q in q_list:
        q = float(q)
        if q < 0:
            raise ValidationError("Renyi order must be non-negative")
        if q == 0.0:
            renyi[q] = math.log(rank) if rank else 0.0
        elif q == 1.0:
            renyi[q] = entropy
        else:
            renyi[q] = float(np.log(np.sum(positive ** q)) / (1.0 - q))
    return SpectralReport(eigenvalues=eig, entropy=entropy, renyi=renyi, rank=rank)


def _experiment_sample(payload):
    """One Monte Carlo sample; top level so process pools can pickle it."""
    marginal, N, seed, index, q_list, skip_traced, skip_surviving = payload
    rng = np.random.default_rng([seed, index])
    state = build_reduced_state(
        marginal, N, None, rng,
        skip_traced=skip_traced, skip_surviving=skip_surviving,
    )
    report = spectral_report(state, q_list)
    return index, report.entropy, report.renyi, report.eigenvalues, state.flags


def run_experiment(marginal: Marginal, N: int, samples: int, seed: int,
                   q_list: Sequence[float] = (0.0, 1.0, 2.0), *,
                   jobs: int = 1, store_spectra: bool = True,
                   skip_traced: bool = True,
                   skip_surviving: bool = True) -> MCReport:
    """Estimate the mean entanglement entropy of a marginal.

    Per-sample generators derive from ``(seed, sample_index)``, so reports
    are reproducible and independent of ``jobs``.  Guards are checked before
    any sampling starts.
    """
    if samples < 1:
        raise ValidationError("need at least one sample")
    _check_guards(marginal, N)
    q_list = tuple(float(q) for q in q_list)
    payloads = [
        (marginal, N, seed, i, q_list, skip_traced, skip_surviving)
        for i in range(samples)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            raw = list(pool.map(_experiment_sample, payloads))
    else:
        raw = [_experiment_sample(p) for p in payloads]
    raw.sort(key=lambda item: item[0])

    entropies = [item[1] for item in raw]
    mean = math.fsum(entropies) / samples
    if samples > 1:
        var = math.fsum((h - mean) ** 2 for h in entropies) / (samples - 1)
        stderr = math.sqrt(var / samples)
    else:
        stderr = 0.0
    renyi_mean = {
        q: math.fsum(item[2][q] for item in raw) / samples for q in q_list
    }
    flags = tuple(sorted(set(flag for item in raw for flag in item[4])))
    spectra = tuple(item[3] for item in raw) if store_spectra else None
    return MCReport(
        samples=samples, mean_H=mean, stderr_H=stderr,
        per_sample_H=tuple(entropies), renyi_mean=renyi_mean,
        spectra=spectra, seed=seed, N=N, q_list=q_list, flags=flags,
    )


def _check_guards(marginal: Marginal, N: int) -> None:
    if N < 2:
        raise ValidationError("N must be at least 2")
    g = marginal.graph
    dims = leg_dimensions(marginal, N)
    total = math.prod(dims)
    if total > state_dim_limit():
        raise ResourceGuardError(
            f"state dimension {total} exceeds the guard {state_dim_limit()}"
        )
    single_vertex_fast = len(g.vertices) == 1
    if single_vertex_fast:
        return
    for v in g.vertices:
        if marginal.s(v) == 0 or marginal.t(v) == 0:
            continue  # skipped vertices never sample a unitary
        vdim = math.prod(dims[l] for l in g.legs_of(v))
        if vdim > haar_dim_limit():
            raise ResourceGuardError(
                f"vertex {v!r} needs a Haar unitary of dimension {vdim}, "
                f"above the guard {haar_dim_limit()}"
            )


@dataclass(frozen=True)
class MomentDistances:
    orders: tuple[int, ...]
    empirical: tuple[float, ...]
    theoretical: tuple[float, ...]
    distances: tuple[float, ...]


def empirical_vs_mp(report: MCReport, c: float, rescale: float,
                    max_p: int = 4) -> MomentDistances:
    """Distance between the empirical rescaled spectral moments and the
    Marchenko-Pastur moments of parameter ``c``.

    The empirical measure of each sample puts mass ``1/dim`` on every
    rescaled eigenvalue (zeros included, carrying the atom); ``rescale`` is
    the case-prescribed power of ``N``.
    """
    if report.spectra is None:
        raise ValidationError("report was produced without stored spectra")
    orders = tuple(range(1, max_p + 1))
    empirical = []
    theoretical = []
    for p in orders:
        per_sample = [
            float(np.mean((rescale * spec) ** p)) for spec in report.spectra
        ]
        empirical.append(math.fsum(per_sample) / len(per_sample))
        theoretical.append(float(mp_moment(c, p)))
    distances = tuple(abs(e - t) for e, t in zip(empirical, theoretical))
    return MomentDistances(
        orders=orders, empirical=tuple(empirical),
        theoretical=tuple(theoretical), distances=distances,
    )


def sample_wishart_spectrum(dim_system: int, dim_environment: int,
                            rng: np.random.Generator) -> np.ndarray:
    """Spectrum of a trace-normalized Wishart state ``G G^dag / Tr``.

    Identical in distribution to the marginal of a uniformly random
    bipartite pure state with these two dimensions.
    """
    g = ginibre(dim_system, dim_environment, rng)
    sv = np.linalg.svd(g, compute_uv=False)
    eig = np.zeros(dim_system)
    eig[: sv.shape[0]] = sv ** 2
    eig /= eig.sum()
    eig[::-1].sort()
    return eig


def wishart_experiment(dim_system: int, dim_environment: int, samples: int,
                       seed: int,
                       q_list: Sequence[float] = (0.0, 1.0, 2.0)) -> MCReport:
    """Monte Carlo over Wishart-normalized states; the fast route for
    bipartite (single-edge) marginals with arbitrary dimensions."""
    if dim_system < 2 or dim_environment < 2:
        raise ValidationError("both dimensions must be at least 2")
    if samples < 1:
        raise ValidationError("need at least one sample")
    q_list = tuple(float(q) for q in q_list)
    entropies = []
    spectra = []
    renyi_acc = {q: [] for q in q_list}
    for i in range(samples):
        rng = np.random.default_rng([seed, i])
        eig = sample_wishart_spectrum(dim_system, dim_environment, rng)
        spectra.append(eig)
        top = eig[0]
        positive = eig[eig > EIGENVALUE_CLIP_REL * top]
        h = float(-np.sum(positive * np.log(positive)))
        entropies.append(h)
        rank = int(np.count_nonzero(eig > RANK_THRESHOLD_REL * top))
        for q in q_list:
            if q == 0.0:
                renyi_acc[q].append(math.log(rank))
            elif q == 1.0:
                renyi_acc[q].append(h)
            else:
                renyi_acc[q].append(float(np.log(np.sum(positive ** q)) / (1.0 - q)))
    mean = math.fsum(entropies) / samples
    if samples > 1:
        var = math.fsum((h - mean) ** 2 for h in entropies) / (samples - 1)
        stderr = math.sqrt(var / samples)
    else:
        stderr = 0.0
    return MCReport(
        samples=samples, mean_H=mean, stderr_H=stderr,
        per_sample_H=tuple(entropies),
        renyi_mean={q: math.fsum(v) / samples for q, v in renyi_acc.items()},
        spectra=tuple(spectra), seed=seed, N=dim_system,
        q_list=q_list, flags=("wishart_path",),
    )

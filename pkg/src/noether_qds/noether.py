"""Constants of motion of quantum dynamical semigroups.

Generators are :class:`~noether_qds.qds.SuperOperator` matrices. Functions taking
a ``gen`` expect the Schrodinger (state) generator; functions taking
``heisenberg`` expect its Hilbert-Schmidt adjoint.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import (DimensionMismatch, NonSemisimpleZeroEigenvalue, NotFaithful,
                     NotTracePreserving, PostulateFailed)
from .linops import (DEFAULT_TOL, OperatorSubspace, SpectralDecomposition, ToleranceConfig,
                     as_matrix, dag, hermitian_function, hermitian_part, is_hermitian,
                     matrix_exp, nullspace, require_hermitian, spectral_decompose,
                     subspace_distance, unvec, vec)
from .qds import (LindbladSpec, SuperOperator, is_cp_trace_preserving, left_right,
                  lindblad_heisenberg, lindblad_schrodinger)


@dataclass(frozen=True)
class PinchingMap:
    """The map S -> sum_a f(a) P_a S P_a built from the spectral projectors of A."""

    spectrum: SpectralDecomposition
    weights: tuple[complex, ...]
    superop: SuperOperator

    def __call__(self, S) -> np.ndarray:
        return self.superop(S)

    def observable(self) -> np.ndarray:
        """f(A); its expectation equals the trace of the pinched state."""
        return sum(w * P for w, P in zip(self.weights, self.spectrum.projectors))


def pinching_superop(projectors, weights=None) -> SuperOperator:
    d = projectors[0].shape[0]
    if weights is None:
        weights = [1.0] * len(projectors)
    mat = sum(w * left_right(P, P) for w, P in zip(weights, projectors))
    return SuperOperator(d, mat)


def hat_map(A, f=(0.0, 1.0), cfg: ToleranceConfig = DEFAULT_TOL) -> PinchingMap:
    """Superoperator attached to the observable f(A).

    Args:
        A: Hermitian matrix.
        f: polynomial coefficients in increasing degree (``numpy.polynomial``
            order), or a callable evaluated on the distinct eigenvalues.
            The default is f(x) = x.
        cfg: tolerances; ``eig_cluster_tol`` decides which eigenvalues coincide.
    """
    spec = spectral_decompose(A, cfg)
    fn = f if callable(f) else (lambda x: np.polynomial.polynomial.polyval(x, f))
    weights = tuple(complex(fn(a)) for a in spec.eigenvalues)
    return PinchingMap(spec, weights, pinching_superop(spec.projectors, weights))


def superop_commutator(T1: SuperOperator, T2: SuperOperator) -> SuperOperator:
    if T1.dim_hilbert != T2.dim_hilbert:
        raise DimensionMismatch("superoperators act on different dimensions")
    return SuperOperator(T1.dim_hilbert, T1.mat @ T2.mat - T2.mat @ T1.mat)


class ConstancyResult(NamedTuple):
    holds: bool
    residual: float


def is_constant_quantum(A, gen: SuperOperator,
                        cfg: ToleranceConfig = DEFAULT_TOL) -> ConstancyResult:
    """Test [hat f(A), gen] = 0 for every polynomial f.

    The weights f(a) over distinct eigenvalues are free, so the family commutes
    with ``gen`` exactly when every single-projector pinching S -> P_a S P_a does.
    The residual is the largest commutator norm relative to max(1, ||gen||_F).
    """
    spec = spectral_decompose(A, cfg)
    scale = max(1.0, float(np.linalg.norm(gen.mat)))
    residual = 0.0
    for P in spec.projectors:
        phi = SuperOperator(gen.dim_hilbert, left_right(P, P))
        residual = max(residual, float(np.linalg.norm(superop_commutator(phi, gen).mat)) / scale)
    return ConstancyResult(residual <= cfg.commute_tol, residual)


def fixed_points(heisenberg: SuperOperator, cfg: ToleranceConfig = DEFAULT_TOL) -> OperatorSubspace:
    """Kernel of the Heisenberg generator as an operator subspace."""
    basis = nullspace(heisenberg.mat, cfg)
    return OperatorSubspace.from_vectors(basis, heisenberg.dim_hilbert, cfg, orthonormal=True)


def commutant(generators, cfg: ToleranceConfig = DEFAULT_TOL, d: int | None = None) -> OperatorSubspace:
    """All operators commuting with every given matrix and with its adjoint.

    With no generators the commutant is the full operator space; pass ``d`` then.
    """
    mats = [as_matrix(X) for X in generators]
    if mats:
        shapes = {X.shape for X in mats}
        if len(shapes) != 1:
            raise DimensionMismatch(f"generators have different shapes {sorted(shapes)}")
        d = mats[0].shape[0]
    elif d is None:
        raise DimensionMismatch("an empty generator list needs an explicit dimension")
    closed = []
    for X in mats:
        closed.append(X)
        if not np.allclose(X, dag(X), atol=0, rtol=0):
            closed.append(dag(X))
    I = np.eye(d)
    # vec(X A - A X) for each X, stacked
    rows = [left_right(X, I) - left_right(I, X) for X in closed]
    stacked = np.vstack(rows) if rows else np.zeros((0, d * d), dtype=complex)
    basis = nullspace(stacked, cfg)
    return OperatorSubspace.from_vectors(basis, d, cfg, orthonormal=True)


def ergodic_projection(gen: SuperOperator, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Spectral projection of ``gen`` onto its zero eigenvalue.

    This is the long-time Cesaro mean of ``expm(t gen)`` for generators of
    bounded semigroups: decaying and oscillating modes average out.

    Raises:
        NonSemisimpleZeroEigenvalue: if the zero eigenvalue has a Jordan block
            or its algebraic multiplicity exceeds the kernel dimension.
    """
    mat = gen.mat
    right = nullspace(mat, cfg)
    left = nullspace(dag(mat), cfg)
    if right.shape[1] != left.shape[1]:
        raise NonSemisimpleZeroEigenvalue("left and right kernels differ in dimension")
    k = right.shape[1]
    if k == 0:
        return np.zeros_like(mat)
    # algebraic multiplicity: eigenvalues clustered at zero. Jordan blocks of size m
    # split to roughly eps^(1/m), so a loose radius catches them.
    scale = max(1.0, float(np.linalg.norm(mat, 2)))
    lam = np.linalg.eigvals(mat)
    algebraic = int(np.count_nonzero(np.abs(lam) <= 1e-6 * scale))
    overlap = dag(left) @ right
    smin = float(np.linalg.svd(overlap, compute_uv=False)[-1])
    if algebraic > k or smin < 1e-6:
        raise NonSemisimpleZeroEigenvalue(
            f"zero eigenvalue: kernel dimension {k}, algebraic multiplicity {algebraic}, "
            f"left/right overlap {smin:.2g}")
    return right @ np.linalg.solve(overlap, dag(left))


@dataclass(frozen=True)
class StationaryReport:
    kernel_dim: int
    candidate: np.ndarray
    min_eigenvalue: float
    postulate_p_holds: bool
    stationarity_residual: float
    projection: np.ndarray = field(repr=False, compare=False)


def stationary_state(gen: SuperOperator, cfg: ToleranceConfig = DEFAULT_TOL,
                     check_channel: bool = True) -> StationaryReport:
    """Decide whether a strictly positive stationary density matrix exists.

    The candidate is the ergodic projection of the maximally mixed state. That
    projection is positive and trace preserving, and I/d dominates c * rho for
    any state rho, so the candidate is faithful whenever some faithful
    stationary state exists. Its smallest eigenvalue therefore settles the
    question in both directions.

    Raises:
        NotTracePreserving: if ``check_channel`` and ``expm(gen)`` is not a
            trace-preserving CP map.
        NonSemisimpleZeroEigenvalue: see :func:`ergodic_projection`.
    """
    d = gen.dim_hilbert
    if check_channel:
        rep = is_cp_trace_preserving(SuperOperator(d, matrix_exp(gen.mat, 1.0)), cfg)
        if not rep.is_channel:
            raise NotTracePreserving(
                f"expm(gen) is not a channel: min Choi eigenvalue {rep.min_choi_eigenvalue:.3g}, "
                f"trace residual {rep.trace_residual:.3g}")
    P0 = ergodic_projection(gen, cfg)
    rho = hermitian_part(unvec(P0 @ vec(np.eye(d) / d), d))
    tr = np.trace(rho).real
    if tr > 0:
        rho = rho / tr
    min_eig = float(np.linalg.eigvalsh(rho)[0])
    residual = float(np.linalg.norm(gen.mat @ vec(rho)))
    return StationaryReport(
        kernel_dim=int(np.linalg.matrix_rank(P0, tol=cfg.subspace_tol)) if P0.any() else 0,
        candidate=rho,
        min_eigenvalue=min_eig,
        postulate_p_holds=min_eig > cfg.positivity_tol,
        stationarity_residual=residual,
        projection=P0,
    )


def conditional_expectation(A, heisenberg: SuperOperator,
                            cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Projection of ``A`` onto the fixed-point algebra along the decaying modes.

    It preserves the faithful stationary state and commutes with the
    Heisenberg semigroup.

    Raises:
        PostulateFailed: if the dual semigroup has no faithful stationary state.
    """
    A = as_matrix(A)
    d = heisenberg.dim_hilbert
    if A.shape[0] != d:
        raise DimensionMismatch(f"observable of shape {A.shape} on C^{d}")
    report = stationary_state(heisenberg.adjoint(), cfg)
    if not report.postulate_p_holds:
        raise PostulateFailed(f"stationary candidate has min eigenvalue {report.min_eigenvalue:.3g}")
    return unvec(ergodic_projection(heisenberg, cfg) @ vec(A), d)


def _require_faithful(rho, cfg: ToleranceConfig) -> np.ndarray:
    rho = require_hermitian(rho, cfg, name="rho")
    if np.linalg.eigvalsh(hermitian_part(rho))[0] <= cfg.positivity_tol:
        raise NotFaithful("density matrix is not strictly positive")
    return rho


def modular_unitary(rho, t: float, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """rho^{it}."""
    rho = _require_faithful(rho, cfg)
    return hermitian_function(rho, lambda x: np.exp(1j * t * np.log(x)), cfg)


def modular_flow(rho, t: float, A, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """rho^{it} A rho^{-it}.

    Raises:
        NotFaithful: if ``rho`` has an eigenvalue <= ``positivity_tol``.
    """
    U = modular_unitary(rho, t, cfg)
    return U @ as_matrix(A) @ dag(U)


def modular_commutation_residuals(rho, heisenberg: SuperOperator, times,
                                  cfg: ToleranceConfig = DEFAULT_TOL) -> dict:
    """||sigma_s J_t - J_t sigma_s||_F for every pair (s, t) of ``times``.

    Reported as a diagnostic only; keys are ``(s, t)`` tuples.
    """
    out = {}
    J = {t: matrix_exp(heisenberg.mat, t) for t in times}
    for s in times:
        U = modular_unitary(rho, s, cfg)
        sigma = left_right(U, dag(U))
        for t in times:
            out[(s, t)] = float(np.linalg.norm(sigma @ J[t] - J[t] @ sigma))
    return out


@dataclass(frozen=True)
class NoetherReportQuantum:
    is_fixed_point: bool
    hat_commutes: bool
    in_commutant: bool
    postulate_p_holds: bool
    min_stationary_eigenvalue: float
    residuals: dict = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        return self.is_fixed_point == self.hat_commutes == self.in_commutant

    @property
    def is_constant(self) -> bool:
        return self.hat_commutes


def noether_check(A, spec: LindbladSpec, cfg: ToleranceConfig = DEFAULT_TOL,
                  commutant_space: OperatorSubspace | None = None,
                  stationary: StationaryReport | None = None) -> NoetherReportQuantum:
    """Evaluate the three characterizations of a constant of motion for ``A``.

    (a) fixed point of the Heisenberg generator; (b) hat-map commutation with
    the Schrodinger generator, applied to the Hermitian and anti-Hermitian
    parts separately when ``A`` is not Hermitian; (c) membership in the
    commutant of {H, L_k, L_k*}.

    ``commutant_space`` and ``stationary`` may be passed to reuse work across
    many observables of the same generator.
    """
    A = as_matrix(A)
    if A.shape != (spec.dim, spec.dim):
        raise DimensionMismatch(f"observable of shape {A.shape} for a C^{spec.dim} generator")
    M = lindblad_schrodinger(spec)
    L = lindblad_heisenberg(spec)
    a_norm = max(1.0, float(np.linalg.norm(A)))
    l_scale = max(1.0, float(np.linalg.norm(L.mat)))

    fixed_res = float(np.linalg.norm(L.mat @ vec(A))) / (a_norm * l_scale)

    if is_hermitian(A, cfg):
        parts = [hermitian_part(A)]
    else:
        parts = [hermitian_part(A), hermitian_part(-1j * A)]
    hat_res = max(is_constant_quantum(P, M, cfg).residual for P in parts)

    if commutant_space is None:
        commutant_space = commutant(spec.operators(), cfg)
    comm_res = commutant_space.residual(A)

    if stationary is None:
        stationary = stationary_state(M, cfg, check_channel=False)

    return NoetherReportQuantum(
        is_fixed_point=fixed_res <= cfg.commute_tol,
        hat_commutes=hat_res <= cfg.commute_tol,
        in_commutant=comm_res <= cfg.subspace_tol,
        postulate_p_holds=stationary.postulate_p_holds,
        min_stationary_eigenvalue=stationary.min_eigenvalue,
        residuals={"fixed_point": fixed_res, "hat_commutator": hat_res, "commutant": comm_res},
    )


def heisenberg_drift(A, heisenberg: SuperOperator, times) -> float:
    """max over ``times`` of ||J_t(A) - A||_F."""
    A = as_matrix(A)
    v = vec(A)
    return max(float(np.linalg.norm(matrix_exp(heisenberg.mat, t) @ v - v)) for t in times)


def fixed_points_match_commutant(spec: LindbladSpec, cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    """subspace_distance between ker L and the commutant of {H, L_k, L_k*}."""
    return subspace_distance(fixed_points(lindblad_heisenberg(spec), cfg),
                             commutant(spec.operators(), cfg))

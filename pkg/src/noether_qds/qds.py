"""Quantum channels and Lindblad semigroups as column-stacked superoperators."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NegativeTime, NotCompletelyPositive
from .linops import (DEFAULT_TOL, ToleranceConfig, as_matrix, dag, hermitian_part,
                     matrix_exp, require_hermitian, unvec, vec)


@dataclass(frozen=True)
class SuperOperator:
    """Linear map on d x d matrices stored as a d^2 x d^2 matrix on vec(S)."""

    dim_hilbert: int
    mat: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.mat, dtype=complex)
        n = self.dim_hilbert ** 2
        if mat.shape != (n, n):
            raise DimensionMismatch(f"superoperator on C^{self.dim_hilbert} needs shape "
                                    f"({n}, {n}), got {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise ValueError("superoperator has non-finite entries")
        object.__setattr__(self, "mat", mat)

    def __call__(self, S) -> np.ndarray:
        S = as_matrix(S)
        if S.shape[0] != self.dim_hilbert:
            raise DimensionMismatch(f"operator of shape {S.shape} on a C^{self.dim_hilbert} map")
        return unvec(self.mat @ vec(S), self.dim_hilbert)

    def __matmul__(self, other: "SuperOperator") -> "SuperOperator":
        _same_dim(self, other)
        return SuperOperator(self.dim_hilbert, self.mat @ other.mat)

    def adjoint(self) -> "SuperOperator":
        """Hilbert-Schmidt adjoint, i.e. the dual map under (X, Y) -> tr(X* Y)."""
        return SuperOperator(self.dim_hilbert, dag(self.mat))

    def exp(self, t: float) -> "SuperOperator":
        if t < 0:
            raise NegativeTime(f"t must be >= 0, got {t}")
        return SuperOperator(self.dim_hilbert, matrix_exp(self.mat, t))

    @classmethod
    def identity(cls, d: int) -> "SuperOperator":
        return cls(d, np.eye(d * d, dtype=complex))


def _same_dim(*maps: SuperOperator):
    dims = {m.dim_hilbert for m in maps}
    if len(dims) != 1:
        raise DimensionMismatch(f"superoperators act on different dimensions {sorted(dims)}")


def left_right(A, B) -> np.ndarray:
    """Matrix of S -> A S B in the column-stacking convention."""
    return np.kron(np.asarray(B).T, np.asarray(A))


@dataclass(frozen=True)
class KrausSet:
    operators: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(as_matrix(V) for V in self.operators)
        if not ops:
            raise DimensionMismatch("a Kraus set needs at least one operator")
        if len({V.shape for V in ops}) != 1:
            raise DimensionMismatch("Kraus operators have different shapes")
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def __len__(self):
        return len(self.operators)

    def __call__(self, S) -> np.ndarray:
        S = as_matrix(S)
        return sum(V @ S @ dag(V) for V in self.operators)

    def trace_preservation_residual(self) -> float:
        d = self.dim
        return float(np.linalg.norm(sum(dag(V) @ V for V in self.operators) - np.eye(d)))


def kraus_to_superop(K) -> SuperOperator:
    """Matrix of S -> sum_k V_k S V_k*, i.e. sum_k conj(V_k) kron V_k."""
    if not isinstance(K, KrausSet):
        K = KrausSet(tuple(K))
    mat = sum(np.kron(V.conj(), V) for V in K.operators)
    return SuperOperator(K.dim, mat)


def choi_matrix(T: SuperOperator) -> np.ndarray:
    """C = sum_ij E_ij kron T(E_ij); T is completely positive iff C is PSD."""
    d = T.dim_hilbert
    C = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            E = np.zeros((d, d), dtype=complex)
            E[i, j] = 1.0
            C[i * d:(i + 1) * d, j * d:(j + 1) * d] = T(E)
    return C


def superop_to_kraus(T: SuperOperator, cfg: ToleranceConfig = DEFAULT_TOL) -> KrausSet:
    """Kraus operators from the eigendecomposition of the Choi matrix.

    Eigenpairs with eigenvalue above ``positivity_tol * tr(C)`` are kept.

    Raises:
        NotCompletelyPositive: if the Choi matrix has an eigenvalue below
            ``-positivity_tol * max(1, tr C)``.
    """
    d = T.dim_hilbert
    C = choi_matrix(T)
    scale = max(1.0, abs(np.trace(C).real))
    if np.linalg.norm(C - dag(C)) > cfg.herm_tol * max(1.0, np.linalg.norm(C)):
        raise NotCompletelyPositive("Choi matrix is not Hermitian")
    w, U = np.linalg.eigh(hermitian_part(C))
    if w[0] < -cfg.positivity_tol * scale:
        raise NotCompletelyPositive(f"Choi matrix has eigenvalue {w[0]:.3g} < 0")
    keep = w > cfg.positivity_tol * scale
    # eigenvector entry (i, a) of block i corresponds to V[a, i]
    ops = [np.sqrt(w[k]) * U[:, k].reshape(d, d).T for k in np.flatnonzero(keep)[::-1]]
    if not ops:
        ops = [np.zeros((d, d), dtype=complex)]
    return KrausSet(tuple(ops))


@dataclass(frozen=True)
class ChannelReport:
    choi_psd: bool
    trace_preserving: bool
    unital: bool
    min_choi_eigenvalue: float
    trace_residual: float
    unital_residual: float

    @property
    def is_channel(self) -> bool:
        return self.choi_psd and self.trace_preserving


def is_cp_trace_preserving(T: SuperOperator, cfg: ToleranceConfig = DEFAULT_TOL) -> ChannelReport:
    d = T.dim_hilbert
    C = choi_matrix(T)
    min_eig = float(np.linalg.eigvalsh(hermitian_part(C))[0])
    herm_ok = np.linalg.norm(C - dag(C)) <= cfg.herm_tol * max(1.0, np.linalg.norm(C))
    vid = vec(np.eye(d))
    # tr T(S) = <vec I, mat vec S>, so trace preservation means mat* vec I = vec I
    trace_res = float(np.linalg.norm(dag(T.mat) @ vid - vid))
    unital_res = float(np.linalg.norm(T.mat @ vid - vid))
    scale = max(1.0, np.linalg.norm(T.mat))
    return ChannelReport(
        choi_psd=bool(herm_ok and min_eig >= -cfg.positivity_tol * max(1.0, d)),
        trace_preserving=trace_res <= cfg.commute_tol * scale,
        unital=unital_res <= cfg.commute_tol * scale,
        min_choi_eigenvalue=min_eig,
        trace_residual=trace_res,
        unital_residual=unital_res,
    )


@dataclass(frozen=True)
class LindbladSpec:
    """Hamiltonian plus Lindblad (jump) operators of a GKSL generator."""

    H: np.ndarray
    lindblad_ops: tuple[np.ndarray, ...] = field(default=())
    cfg: ToleranceConfig = field(default=DEFAULT_TOL, compare=False, repr=False)

    def __post_init__(self):
        H = require_hermitian(self.H, self.cfg, name="H")
        ops = tuple(as_matrix(L) for L in self.lindblad_ops)
        for L in ops:
            if L.shape != H.shape:
                raise DimensionMismatch(f"Lindblad operator of shape {L.shape} "
                                        f"with H of shape {H.shape}")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "lindblad_ops", ops)

    @property
    def dim(self) -> int:
        return self.H.shape[0]

    def operators(self) -> list[np.ndarray]:
        """H, each L_k and each L_k*: the set whose commutant is the constant algebra."""
        return [self.H, *self.lindblad_ops, *(dag(L) for L in self.lindblad_ops)]


def lindblad_schrodinger(spec: LindbladSpec) -> SuperOperator:
    """Generator of the state evolution.

    M(S) = sum_k (L_k S L_k* - 1/2 S L_k* L_k - 1/2 L_k* L_k S) + i [S, H]
    """
    d = spec.dim
    I = np.eye(d)
    mat = 1j * (left_right(I, spec.H) - left_right(spec.H, I))
    for L in spec.lindblad_ops:
        LdL = dag(L) @ L
        mat = mat + left_right(L, dag(L)) - 0.5 * left_right(I, LdL) - 0.5 * left_right(LdL, I)
    return SuperOperator(d, mat)


def lindblad_heisenberg(spec: LindbladSpec) -> SuperOperator:
    """Generator of the observable evolution, dual to :func:`lindblad_schrodinger`.

    L(A) = sum_k (L_k* A L_k - 1/2 A L_k* L_k - 1/2 L_k* L_k A) - i [A, H]
    """
    d = spec.dim
    I = np.eye(d)
    mat = -1j * (left_right(I, spec.H) - left_right(spec.H, I))
    for L in spec.lindblad_ops:
        LdL = dag(L) @ L
        mat = mat + left_right(dag(L), L) - 0.5 * left_right(I, LdL) - 0.5 * left_right(LdL, I)
    return SuperOperator(d, mat)


def evolve(gen: SuperOperator, X, t: float) -> np.ndarray:
    """unvec(expm(t * gen) vec(X))."""
    if t < 0:
        raise NegativeTime(f"t must be >= 0, got {t}")
    X = as_matrix(X)
    if X.shape[0] != gen.dim_hilbert:
        raise DimensionMismatch(f"operator of shape {X.shape} on a C^{gen.dim_hilbert} generator")
    return unvec(matrix_exp(gen.mat, t) @ vec(X), gen.dim_hilbert)

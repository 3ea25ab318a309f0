"""Dense complex-matrix substrate.

Operators on C^d are plain ``numpy`` arrays of shape ``(d, d)``. Superoperators
act on column-stacked vectors, ``vec(X) = X.reshape(-1, order="F")``, so that
``vec(A @ S @ B) == kron(B.T, A) @ vec(S)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from itertools import product

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NotHermitian


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical tolerances shared by every check in the package.

    The defaults are tuned for double precision at dimension d <= 16.
    """

    herm_tol: float = 1e-8
    eig_cluster_tol: float = 1e-8
    nullspace_tol: float = 1e-9
    commute_tol: float = 1e-8
    positivity_tol: float = 1e-9
    subspace_tol: float = 1e-8
    time_grid: tuple[float, ...] = (0.0, 0.1, 0.5, 1.0, 5.0)

    def __post_init__(self):
        for name in ("herm_tol", "eig_cluster_tol", "nullspace_tol",
                     "commute_tol", "positivity_tol", "subspace_tol"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be strictly positive, got {value!r}")
        if any(t < 0 for t in self.time_grid):
            raise ValueError("time grid entries must be nonnegative")
        object.__setattr__(self, "time_grid", tuple(float(t) for t in self.time_grid))

    def with_overrides(self, **overrides) -> "ToleranceConfig":
        return replace(self, **overrides)


DEFAULT_TOL = ToleranceConfig()


def as_matrix(X, square: bool = True) -> np.ndarray:
    """Coerce ``X`` to a finite 2-D complex array."""
    M = np.asarray(X, dtype=complex)
    if M.ndim != 2 or min(M.shape) < 1:
        raise DimensionMismatch(f"expected a nonempty 2-D matrix, got shape {M.shape}")
    if square and M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def dag(X: np.ndarray) -> np.ndarray:
    return X.conj().T


def vec(X: np.ndarray) -> np.ndarray:
    return np.asarray(X).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if d is None:
        d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise DimensionMismatch(f"vector of length {v.size} is not a vectorized {d}x{d} matrix")
    return v.reshape((d, d), order="F")


def hermiticity_residual(A: np.ndarray) -> float:
    return float(np.linalg.norm(A - dag(A)))


def is_hermitian(A, cfg: ToleranceConfig = DEFAULT_TOL) -> bool:
    A = as_matrix(A)
    return hermiticity_residual(A) <= cfg.herm_tol * max(1.0, np.linalg.norm(A))


def require_hermitian(A, cfg: ToleranceConfig = DEFAULT_TOL, name: str = "A") -> np.ndarray:
    A = as_matrix(A)
    if not is_hermitian(A, cfg):
        raise NotHermitian(f"{name} is not Hermitian: ||{name} - {name}*||_F = "
                           f"{hermiticity_residual(A):.3g}")
    return A


def hermitian_part(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + dag(A))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Distinct eigenvalues of a Hermitian matrix with their orthogonal projectors."""

    eigenvalues: tuple[float, ...]
    projectors: tuple[np.ndarray, ...]

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    def reconstruct(self) -> np.ndarray:
        return sum(a * P for a, P in zip(self.eigenvalues, self.projectors))

    def apply_function(self, f) -> np.ndarray:
        """Return f(A) = sum_a f(a) P_a."""
        return sum(f(a) * P for a, P in zip(self.eigenvalues, self.projectors))

    def __len__(self):
        return len(self.eigenvalues)


def spectral_decompose(A, cfg: ToleranceConfig = DEFAULT_TOL) -> SpectralDecomposition:
    """Spectral decomposition with near-degenerate eigenvalues merged.

    Consecutive sorted eigenvalues closer than ``eig_cluster_tol * max(1, ||A||_2)``
    share one projector, so the result sums over distinct eigenvalues only.

    Raises:
        NotHermitian: if ``A`` is not Hermitian within ``herm_tol``.
    """
    A = require_hermitian(A, cfg)
    w, V = np.linalg.eigh(hermitian_part(A))
    scale = max(1.0, float(np.max(np.abs(w))))
    gap = cfg.eig_cluster_tol * scale

    clusters = [[0]]
    for i in range(1, len(w)):
        if w[i] - w[i - 1] < gap:
            clusters[-1].append(i)
        else:
            clusters.append([i])

    eigenvalues, projectors = [], []
    for idx in clusters:
        U = V[:, idx]
        eigenvalues.append(float(np.mean(w[idx])))
        projectors.append(U @ dag(U))
    return SpectralDecomposition(tuple(eigenvalues), tuple(projectors))


def hermitian_function(A, f, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """f(A) through the spectral calculus; ``f`` may return complex values."""
    A = require_hermitian(A, cfg)
    w, V = np.linalg.eigh(hermitian_part(A))
    return (V * np.asarray([f(x) for x in w], dtype=complex)) @ dag(V)


def matrix_exp(X, t: float = 1.0) -> np.ndarray:
    """Return exp(t X)."""
    X = as_matrix(X)
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    return scipy.linalg.expm(t * X)


def nullspace(X, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the numerical kernel of ``X``, one vector per column.

    Singular values at or below ``nullspace_tol * max(1, sigma_max)`` count as zero.
    A matrix with zero rows has the whole space as kernel.
    """
    X = np.asarray(X, dtype=complex)
    if X.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D array, got shape {X.shape}")
    n = X.shape[1]
    if X.shape[0] == 0:
        return np.eye(n, dtype=complex)
    # tall inputs: the reduced SVD already returns all n right singular vectors
    _, s, Vh = np.linalg.svd(X, full_matrices=X.shape[0] < n)
    sigma_max = s[0] if s.size else 0.0
    cutoff = cfg.nullspace_tol * max(1.0, sigma_max)
    rank = int(np.count_nonzero(s > cutoff))
    return Vh[rank:].conj().T


def orthonormalize(vectors: np.ndarray, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (columns) for the column span of ``vectors``."""
    vectors = np.asarray(vectors, dtype=complex)
    if vectors.shape[1] == 0:
        return vectors
    U, s, _ = np.linalg.svd(vectors, full_matrices=False)
    rank = int(np.count_nonzero(s > cfg.subspace_tol * max(1.0, s[0])))
    return U[:, :rank]


@dataclass(frozen=True)
class OperatorSubspace:
    """A subspace of d x d operators with a Hilbert-Schmidt orthonormal basis.

    Use :meth:`from_vectors` to build one; it computes the algebra flags.
    """

    dim_hilbert: int
    basis: tuple[np.ndarray, ...]
    closed_under_adjoint: bool
    closed_under_product: bool
    contains_identity: bool
    closure_residuals: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_vectors(cls, vectors: np.ndarray, d: int,
                     cfg: ToleranceConfig = DEFAULT_TOL,
                     orthonormal: bool = False) -> "OperatorSubspace":
        vectors = np.asarray(vectors, dtype=complex).reshape(d * d, -1)
        B = vectors if orthonormal else orthonormalize(vectors, cfg)
        basis = tuple(unvec(B[:, j], d) for j in range(B.shape[1]))

        def outside(Y):
            y = vec(Y)
            return float(np.linalg.norm(y - B @ (dag(B) @ y))) if B.size else float(np.linalg.norm(y))

        identity_res = outside(np.eye(d)) / np.sqrt(d)
        adjoint_res = max((outside(dag(X)) for X in basis), default=0.0)
        product_res = max((outside(X @ Y) for X, Y in product(basis, repeat=2)), default=0.0)
        tol = cfg.subspace_tol
        return cls(
            dim_hilbert=d,
            basis=basis,
            closed_under_adjoint=adjoint_res <= tol,
            closed_under_product=product_res <= tol,
            contains_identity=identity_res <= tol,
            closure_residuals={"identity": identity_res, "adjoint": adjoint_res,
                               "product": product_res},
        )

    @property
    def dim(self) -> int:
        return len(self.basis)

    def basis_matrix(self) -> np.ndarray:
        """Basis vectors vec(X_j) as columns of a d^2 x k matrix."""
        if not self.basis:
            return np.zeros((self.dim_hilbert ** 2, 0), dtype=complex)
        return np.column_stack([vec(X) for X in self.basis])

    def projector(self) -> np.ndarray:
        B = self.basis_matrix()
        return B @ dag(B)

    def project(self, A) -> np.ndarray:
        B = self.basis_matrix()
        return unvec(B @ (dag(B) @ vec(as_matrix(A))), self.dim_hilbert)

    def residual(self, A) -> float:
        """Relative Hilbert-Schmidt distance from ``A`` to the subspace."""
        A = as_matrix(A)
        return float(np.linalg.norm(A - self.project(A)) / max(1.0, np.linalg.norm(A)))

    def contains(self, A, cfg: ToleranceConfig = DEFAULT_TOL) -> bool:
        return self.residual(A) <= cfg.subspace_tol

    @property
    def is_algebra(self) -> bool:
        return self.closed_under_adjoint and self.closed_under_product and self.contains_identity


def subspace_distance(U: OperatorSubspace, V: OperatorSubspace) -> float:
    """Frobenius norm of the difference of the orthogonal projectors onto both spans."""
    if U.dim_hilbert != V.dim_hilbert:
        raise DimensionMismatch(f"subspaces live on C^{U.dim_hilbert} and C^{V.dim_hilbert}")
    return float(np.linalg.norm(U.projector() - V.projector()))

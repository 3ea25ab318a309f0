"""Finite-state classical Markov semigroups and their constants of motion.

A generator ``M`` acts on probability column vectors: ``p(t) = expm(t M) p``.
``M[x, y]`` is the rate of jumping from state y to state x.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import ColumnSumNonzero, DimensionMismatch, NegativeOffDiagonal, NegativeTime
from .linops import DEFAULT_TOL, ToleranceConfig, matrix_exp


@dataclass(frozen=True)
class ClassicalGenerator:
    M: np.ndarray
    residuals: dict = field(default_factory=dict, compare=False)

    @property
    def dim(self) -> int:
        return self.M.shape[0]


@dataclass(frozen=True)
class ClassPartition:
    classes: tuple[tuple[int, ...], ...]

    def labels(self) -> np.ndarray:
        d = sum(len(c) for c in self.classes)
        out = np.empty(d, dtype=int)
        for k, block in enumerate(self.classes):
            out[list(block)] = k
        return out

    def __len__(self):
        return len(self.classes)


@dataclass(frozen=True)
class NoetherReportClassical:
    cond_distribution: bool
    cond_moments: bool
    cond_measurable: bool
    cond_commutator: bool
    details: dict = field(default_factory=dict)

    @property
    def conditions(self) -> tuple[bool, bool, bool, bool]:
        return (self.cond_distribution, self.cond_moments,
                self.cond_measurable, self.cond_commutator)

    @property
    def consistent(self) -> bool:
        return len(set(self.conditions)) == 1

    @property
    def is_constant(self) -> bool:
        return self.cond_commutator


def _real_square(M) -> np.ndarray:
    M = np.asarray(M)
    if np.iscomplexobj(M):
        if np.any(np.abs(M.imag) > 0):
            raise ValueError("classical generator must be real")
        M = M.real
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise DimensionMismatch(f"generator must be a nonempty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("generator has non-finite entries")
    return M


def validate_generator(M, cfg: ToleranceConfig = DEFAULT_TOL) -> ClassicalGenerator:
    """Check that off-diagonal rates are nonnegative and every column sums to zero.

    Raises:
        NegativeOffDiagonal: on the first offending entry (row-major order).
        ColumnSumNonzero: on the first column whose sum exceeds the tolerance.
    """
    if isinstance(M, ClassicalGenerator):
        return M
    M = _real_square(M)
    scale = max(1.0, float(np.max(np.abs(M))))
    off = M - np.diag(np.diag(M))
    neg = np.argwhere(off < -cfg.positivity_tol * scale)
    if neg.size:
        x, y = neg[0]
        raise NegativeOffDiagonal(int(x), int(y), float(M[x, y]))
    col_sums = M.sum(axis=0)
    bad = np.flatnonzero(np.abs(col_sums) > cfg.commute_tol * scale)
    if bad.size:
        raise ColumnSumNonzero(int(bad[0]), float(col_sums[bad[0]]))
    return ClassicalGenerator(M.copy(), residuals={
        "min_off_diagonal": float(off.min()) if M.shape[0] > 1 else 0.0,
        "max_abs_column_sum": float(np.max(np.abs(col_sums))),
    })


def transition(gen, t: float, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Column-stochastic transition matrix ``T_t = expm(t M)``."""
    if t < 0:
        raise NegativeTime(f"t must be >= 0, got {t}")
    gen = validate_generator(gen, cfg)
    return matrix_exp(gen.M, t).real


def hat_diag(A) -> np.ndarray:
    """Multiplication operator of a random variable: ``diag(A(1), ..., A(d))``."""
    return np.diag(np.asarray(A, dtype=float))


def communication_classes(gen, cfg: ToleranceConfig = DEFAULT_TOL) -> ClassPartition:
    """Connected components of the symmetrized off-diagonal support graph of ``M``.

    Exact nonzero tests on the support avoid the accidental cancellations that
    can make entries of powers of ``M`` vanish.
    """
    gen = validate_generator(gen, cfg)
    d = gen.dim
    support = (gen.M != 0) & ~np.eye(d, dtype=bool)
    _, labels = connected_components(support, directed=True, connection="weak")
    # order classes by their smallest member
    order = {}
    for x, lab in enumerate(labels):
        order.setdefault(lab, []).append(x)
    return ClassPartition(tuple(tuple(v) for v in sorted(order.values())))


def level_sets(A, cfg: ToleranceConfig = DEFAULT_TOL) -> list[np.ndarray]:
    """Boolean indicator vectors of the level sets {x : A(x) = a}, values clustered within tol."""
    A = np.asarray(A, dtype=float)
    order = np.argsort(A, kind="stable")
    gap = cfg.eig_cluster_tol * max(1.0, float(np.max(np.abs(A))) if A.size else 1.0)
    groups = [[order[0]]]
    for prev, cur in zip(order[:-1], order[1:]):
        if A[cur] - A[prev] < gap:
            groups[-1].append(cur)
        else:
            groups.append([cur])
    out = []
    for g in groups:
        ind = np.zeros(A.size, dtype=bool)
        ind[g] = True
        out.append(ind)
    return out


def check_constant(A, gen, cfg: ToleranceConfig = DEFAULT_TOL) -> NoetherReportClassical:
    """Evaluate the four equivalent characterizations of a constant of motion.

    1. distribution: the law of A is time-invariant from every point mass,
       sampled on ``cfg.time_grid``;
    2. moments: ``sum_x A(x)^m M[x, y] == 0`` for m = 1, 2 and all y;
    3. measurable: A is constant on every communication class;
    4. commutator: ``[diag(A), M] == 0``.
    """
    gen = validate_generator(gen, cfg)
    A = np.asarray(A, dtype=float)
    d = gen.dim
    if A.shape != (d,):
        raise DimensionMismatch(f"random variable has shape {A.shape}, expected ({d},)")
    M = gen.M
    a_scale = max(1.0, float(np.max(np.abs(A))))
    m_scale = max(1.0, float(np.max(np.abs(M))))

    indicators = np.array(level_sets(A, cfg), dtype=float)
    dist_res = 0.0
    for t in cfg.time_grid:
        # row k, column y: probability that A lies in level set k at time t, started at y
        law = indicators @ transition(gen, t, cfg)
        dist_res = max(dist_res, float(np.max(np.abs(law - indicators))))

    moment_res = max(float(np.max(np.abs((A ** m) @ M))) for m in (1, 2))

    labels = communication_classes(gen, cfg).labels()
    spread = 0.0
    for k in np.unique(labels):
        vals = A[labels == k]
        spread = max(spread, float(vals.max() - vals.min()))

    A_hat = hat_diag(A)
    comm_res = float(np.linalg.norm(A_hat @ M - M @ A_hat))

    tol = cfg.commute_tol
    return NoetherReportClassical(
        cond_distribution=dist_res <= tol,
        cond_moments=moment_res <= tol * a_scale ** 2 * m_scale,
        cond_measurable=spread <= tol * a_scale,
        cond_commutator=comm_res <= tol * a_scale * m_scale,
        details={
            "distribution_residual": dist_res,
            "moment_residual": moment_res,
            "class_spread": spread,
            "commutator_residual": comm_res,
            "n_classes": int(labels.max()) + 1,
        },
    )

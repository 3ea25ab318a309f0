"""Seeded instance generators and batch verification of the equivalence theorems."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import classical, noether
from .errors import InvalidBlocks, NoetherError
from .linops import (DEFAULT_TOL, ToleranceConfig, dag, hermitian_part, matrix_exp,
                     subspace_distance, unvec, vec)
from .qds import LindbladSpec, lindblad_heisenberg, lindblad_schrodinger

KINDS = ("random_classical", "random_lindblad", "structured_commutant",
         "classical_embedding", "named_example")


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_complex(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    return hermitian_part(random_complex(rng, (d, d)))


def random_density(rng: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    G = random_complex(rng, (d, rank or d))
    rho = G @ dag(G)
    return rho / np.trace(rho).real


def gen_random_classical(d: int, sparsity: float = 0.0, seed=None) -> classical.ClassicalGenerator:
    """Random generator: uniform off-diagonal rates, each zeroed with probability ``sparsity``."""
    if d < 2:
        raise ValueError("d must be >= 2")
    if not 0.0 <= sparsity <= 1.0:
        raise ValueError("sparsity must lie in [0, 1]")
    rng = _rng(seed)
    rates = rng.uniform(0.0, 1.0, size=(d, d))
    if sparsity > 0:
        rates = rates * (rng.random((d, d)) >= sparsity)
    np.fill_diagonal(rates, 0.0)
    M = rates - np.diag(rates.sum(axis=0))
    return classical.validate_generator(M)


def _check_blocks(blocks) -> list[tuple[int, int]]:
    try:
        out = [(int(n), int(m)) for n, m in blocks]
    except (TypeError, ValueError) as exc:
        raise InvalidBlocks(f"blocks must be (n, m) pairs, got {blocks!r}") from exc
    if not out or any(n < 1 or m < 1 for n, m in out):
        raise InvalidBlocks(f"block sizes must be positive, got {out}")
    return out


def gen_structured_lindblad(blocks, seed=None, n_ops: int = 2) -> LindbladSpec:
    """Random H and L_k inside the algebra of direct sums of (n_i x n_i) kron I_{m_i}.

    The commutant then contains the direct sum of I_{n_i} kron M_{m_i}, of
    dimension sum m_i^2, and generically equals it.
    """
    blocks = _check_blocks(blocks)
    rng = _rng(seed)

    def sample(hermitian: bool) -> np.ndarray:
        parts = []
        for n, m in blocks:
            X = random_hermitian(rng, n) if hermitian else random_complex(rng, (n, n))
            parts.append(np.kron(X, np.eye(m)))
        d = sum(p.shape[0] for p in parts)
        out = np.zeros((d, d), dtype=complex)
        i = 0
        for p in parts:
            k = p.shape[0]
            out[i:i + k, i:i + k] = p
            i += k
        return out

    H = sample(True)
    ops = tuple(sample(False) / math.sqrt(2) for _ in range(n_ops))
    return LindbladSpec(H, ops)


def expected_commutant_dim(blocks) -> int:
    return sum(m * m for _, m in _check_blocks(blocks))


def classical_embedding(gen) -> LindbladSpec:
    """Jump operators sqrt(M[x, y]) |x><y| for every positive off-diagonal rate, H = 0."""
    gen = classical.validate_generator(gen)
    d = gen.dim
    ops = []
    for x in range(d):
        for y in range(d):
            if x != y and gen.M[x, y] > 0:
                L = np.zeros((d, d), dtype=complex)
                L[x, y] = math.sqrt(gen.M[x, y])
                ops.append(L)
    return LindbladSpec(np.zeros((d, d)), tuple(ops))


SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)


def dephasing(rate: float = 1.0) -> LindbladSpec:
    return LindbladSpec(np.zeros((2, 2)), (math.sqrt(rate) * SIGMA_Z,))


def amplitude_damping(rate: float = 1.0) -> LindbladSpec:
    return LindbladSpec(np.zeros((2, 2)), (math.sqrt(rate) * SIGMA_MINUS,))


def unitary_only(H=SIGMA_Z) -> LindbladSpec:
    return LindbladSpec(np.asarray(H, dtype=complex), ())


def depolarizing(rate: float = 1.0) -> LindbladSpec:
    c = math.sqrt(rate / 4)
    return LindbladSpec(np.zeros((2, 2)), (c * SIGMA_X, c * SIGMA_Y, c * SIGMA_Z))


NAMED_EXAMPLES = {
    "dephasing": dephasing,
    "amplitude_damping": amplitude_damping,
    "unitary_only": unitary_only,
    "depolarizing": depolarizing,
}

# closed-form facts for each named example: commutant dimension, whether a
# faithful stationary state exists, and that state
NAMED_EXPECTATIONS = {
    "dephasing": {"commutant_dim": 2, "postulate_p": True, "stationary": np.eye(2) / 2},
    "amplitude_damping": {"commutant_dim": 1, "postulate_p": False,
                          "stationary": np.diag([1.0, 0.0])},
    "unitary_only": {"commutant_dim": 2, "postulate_p": True, "stationary": np.eye(2) / 2},
    "depolarizing": {"commutant_dim": 1, "postulate_p": True, "stationary": np.eye(2) / 2},
}


@dataclass(frozen=True)
class InstanceRecipe:
    kind: str
    d: int = 2
    seed: int = 0
    trials: int = 1
    blocks: tuple[tuple[int, int], ...] | None = None
    sparsity: float = 0.3
    name: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown recipe kind {self.kind!r}; expected one of {KINDS}")
        if self.trials < 0:
            raise ValueError("trials must be >= 0")
        if self.kind == "named_example":
            if self.name not in NAMED_EXAMPLES:
                raise ValueError(f"unknown named example {self.name!r}")
            return
        if self.d < 2:
            raise ValueError("d must be >= 2")
        if not 0.0 <= self.sparsity <= 1.0:
            raise ValueError("sparsity must lie in [0, 1]")
        if self.blocks is not None:
            blocks = tuple(_check_blocks(self.blocks))
            if sum(n * m for n, m in blocks) != self.d:
                raise InvalidBlocks(f"blocks {blocks} do not fill dimension {self.d}")
            object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_dict(cls, data: dict) -> "InstanceRecipe":
        allowed = {"kind", "d", "seed", "trials", "blocks", "sparsity", "name"}
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown recipe fields {sorted(unknown)}")
        if "kind" not in data:
            raise ValueError("recipe is missing 'kind'")
        kw = dict(data)
        if kw.get("blocks") is not None:
            kw["blocks"] = tuple(tuple(b) for b in kw["blocks"])
        return cls(**kw)

    def to_dict(self) -> dict:
        out = asdict(self)
        if self.blocks is not None:
            out["blocks"] = [list(b) for b in self.blocks]
        return out


@dataclass
class SuiteSummary:
    kind: str
    trials: int = 0
    passed: int = 0
    failed: int = 0
    failures: list = field(default_factory=list)
    details: list = field(default_factory=list)

    def add(self, index: int, ok: bool, residuals: dict):
        self.trials += 1
        entry = {"index": index, "passed": bool(ok), "residuals": residuals}
        self.details.append(entry)
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            self.failures.append(entry)


@dataclass
class VerificationSummary:
    suites: list

    @property
    def ok(self) -> bool:
        return all(s.failed == 0 for s in self.suites)

    @property
    def total(self) -> int:
        return sum(s.trials for s in self.suites)

    def to_dict(self) -> dict:
        return {"ok": self.ok, "total": self.total,
                "suites": [asdict(s) for s in self.suites]}


def class_constant_variable(gen, rng) -> np.ndarray:
    labels = classical.communication_classes(gen).labels()
    values = rng.standard_normal(labels.max() + 1)
    return values[labels]


def _run_classical(rec: InstanceRecipe, rng, cfg) -> tuple[bool, dict]:
    d = int(rng.integers(2, rec.d + 1))
    sparsity = float(rng.uniform(0.0, rec.sparsity))
    gen = gen_random_classical(d, sparsity, rng)
    res = {"d": d}
    ok = True
    for label, A in (("class_constant", class_constant_variable(gen, rng)),
                     ("generic", rng.standard_normal(d))):
        rep = classical.check_constant(A, gen, cfg)
        ok &= rep.consistent
        res[label] = list(rep.conditions)
        A_hat = classical.hat_diag(A)
        C = A_hat @ gen.M - gen.M @ A_hat
        structure = float(np.max(np.abs(C - (A[:, None] - A[None, :]) * gen.M)))
        res[f"{label}_structure"] = structure
        ok &= structure <= 1e-12 * max(1.0, float(np.max(np.abs(A)))) * max(1.0, float(np.max(np.abs(gen.M))))
    conservation = max(float(np.max(np.abs(classical.transition(gen, t).sum(axis=0) - 1.0)))
                       for t in cfg.time_grid)
    res["conservation"] = conservation
    ok &= conservation <= 1e-10
    return bool(ok), res


def check_lindblad_instance(spec: LindbladSpec, rng, cfg: ToleranceConfig = DEFAULT_TOL,
                            expected_commutant_dim: int | None = None) -> tuple[bool, dict]:
    """Run every quantum invariant on one instance and return (ok, residuals)."""
    d = spec.dim
    M = lindblad_schrodinger(spec)
    L = lindblad_heisenberg(spec)
    stat = noether.stationary_state(M, cfg)
    F = noether.fixed_points(L, cfg)
    C = noether.commutant(spec.operators(), cfg)
    vid = vec(np.eye(d))
    res = {
        "d": d,
        "postulate_p": stat.postulate_p_holds,
        "min_stationary_eigenvalue": stat.min_eigenvalue,
        "trace_annihilation": float(np.linalg.norm(dag(M.mat) @ vid)),
        "fixed_dim": F.dim,
        "commutant_dim": C.dim,
    }
    ok = res["trace_annihilation"] <= 1e-11 * max(1.0, float(np.linalg.norm(M.mat)))
    if expected_commutant_dim is not None:
        ok &= C.dim == expected_commutant_dim

    # Hermitian constant from the commutant and a generic Hermitian observable
    coeffs = rng.standard_normal(C.dim) + 1j * rng.standard_normal(C.dim)
    inside = hermitian_part(sum(c * X for c, X in zip(coeffs, C.basis)))
    generic = random_hermitian(rng, d)
    for label, A in (("constant", inside), ("generic", generic)):
        rep = noether.noether_check(A, spec, cfg, commutant_space=C, stationary=stat)
        drift = noether.heisenberg_drift(A, L, cfg.time_grid)
        res[f"{label}_checks"] = [rep.is_fixed_point, rep.hat_commutes, rep.in_commutant]
        res[f"{label}_drift"] = drift
        if stat.postulate_p_holds:
            ok &= rep.consistent
            ok &= rep.hat_commutes == (drift <= 1e-9 * max(1.0, np.linalg.norm(A)))
        if rep.hat_commutes:
            # a constant keeps tr f(A) rho(t) fixed for f(x) = x^3
            fA = np.linalg.matrix_power(A, 3)
            rho = random_density(rng, d)
            dev = max(abs(np.trace(fA @ unvec(matrix_exp(M.mat, t) @ vec(rho), d))
                          - np.trace(fA @ rho)) for t in cfg.time_grid)
            res[f"{label}_expectation_drift"] = float(dev)
            ok &= dev <= 1e-9 * max(1.0, np.linalg.norm(fA))
        if rep.in_commutant:
            diss = (L(A @ A) - L(A) @ A - A @ L(A))
            res[f"{label}_dissipation"] = float(np.linalg.norm(diss))
            ok &= res[f"{label}_dissipation"] <= 1e-10 * max(1.0, np.linalg.norm(A)) ** 2 \
                * max(1.0, np.linalg.norm(L.mat))

    if stat.postulate_p_holds:
        res["fixed_vs_commutant"] = subspace_distance(F, C)
        res["fixed_closure"] = dict(F.closure_residuals)
        ok &= res["fixed_vs_commutant"] <= 1e-8
        ok &= F.is_algebra

        E = noether.ergodic_projection(L, cfg)
        A = random_complex(rng, (d, d))
        EA = unvec(E @ vec(A), d)
        rho = stat.candidate
        module = max((abs(np.trace(rho @ X @ EA) - np.trace(rho @ X @ A)) for X in F.basis),
                     default=0.0)
        comm = max(float(np.linalg.norm(E @ matrix_exp(L.mat, t) - matrix_exp(L.mat, t) @ E))
                   for t in cfg.time_grid)
        res["condexp_module"] = float(module)
        res["condexp_commutation"] = comm
        ok &= module <= 1e-9 * max(1.0, np.linalg.norm(A)) and comm <= 1e-8
    return bool(ok), res


def _run_embedding(rec: InstanceRecipe, rng, cfg) -> tuple[bool, dict]:
    d = int(rng.integers(2, rec.d + 1))
    gen = gen_random_classical(d, float(rng.uniform(0.0, rec.sparsity)), rng)
    spec = classical_embedding(gen)
    M = lindblad_schrodinger(spec)
    p = rng.dirichlet(np.ones(d))
    evolution = max(float(np.max(np.abs(np.diag(unvec(matrix_exp(M.mat, t) @ vec(np.diag(p)), d))
                                        - classical.transition(gen, t) @ p)))
                    for t in cfg.time_grid)
    res = {"d": d, "evolution": evolution}
    ok = evolution <= 1e-9
    C = noether.commutant(spec.operators(), cfg, d=d)
    stat = noether.stationary_state(M, cfg, check_channel=False)
    for label, A in (("class_constant", class_constant_variable(gen, rng)),
                     ("generic", rng.standard_normal(d))):
        c_rep = classical.check_constant(A, gen, cfg)
        q_rep = noether.noether_check(classical.hat_diag(A), spec, cfg,
                                      commutant_space=C, stationary=stat)
        res[label] = {"classical": c_rep.is_constant, "hat_commutes": q_rep.hat_commutes,
                      "in_commutant": q_rep.in_commutant}
        ok &= c_rep.is_constant == q_rep.hat_commutes == q_rep.in_commutant
    return bool(ok), res


def _run_named(rec: InstanceRecipe, rng, cfg) -> tuple[bool, dict]:
    spec = NAMED_EXAMPLES[rec.name]()
    expected = NAMED_EXPECTATIONS[rec.name]
    ok, res = check_lindblad_instance(spec, rng, cfg, expected["commutant_dim"])
    stat = noether.stationary_state(lindblad_schrodinger(spec), cfg)
    res["stationary_error"] = float(np.max(np.abs(stat.candidate - expected["stationary"])))
    ok &= stat.postulate_p_holds == expected["postulate_p"]
    ok &= res["stationary_error"] <= 1e-9
    return bool(ok), res


def _run_lindblad(rec: InstanceRecipe, rng, cfg) -> tuple[bool, dict]:
    if rec.kind == "random_lindblad":
        blocks = [(int(rng.integers(2, rec.d + 1)), 1)]
    elif rec.blocks is not None:
        blocks = list(rec.blocks)
    else:
        blocks = random_blocks(rec.d, rng)
    spec = gen_structured_lindblad(blocks, rng)
    ok, res = check_lindblad_instance(spec, rng, cfg, expected_commutant_dim(blocks))
    res["blocks"] = [list(b) for b in blocks]
    return ok, res


def random_blocks(d_max: int, rng) -> list[tuple[int, int]]:
    """Random block structure with total dimension between 2 and ``d_max``."""
    while True:
        blocks, total = [], 0
        for _ in range(int(rng.integers(1, 4))):
            n = int(rng.integers(1, 4))
            m = int(rng.integers(1, 3))
            if total + n * m > d_max:
                break
            blocks.append((n, m))
            total += n * m
        if total >= 2:
            return blocks


_RUNNERS = {
    "random_classical": _run_classical,
    "random_lindblad": _run_lindblad,
    "structured_commutant": _run_lindblad,
    "classical_embedding": _run_embedding,
    "named_example": _run_named,
}


def verify_equivalences(recipes, cfg: ToleranceConfig = DEFAULT_TOL) -> VerificationSummary:
    """Run every recipe's trials and collect pass/fail counts with residuals.

    Trial ``i`` of recipe ``k`` draws from ``default_rng([seed, k, i])``, so
    results are reproducible and independent of evaluation order. Numerical
    errors raised inside a trial are recorded as failures.
    """
    suites = []
    for k, rec in enumerate(recipes):
        summary = SuiteSummary(rec.kind if rec.name is None else f"{rec.kind}:{rec.name}")
        for i in range(rec.trials):
            rng = np.random.default_rng([rec.seed, k, i])
            try:
                ok, res = _RUNNERS[rec.kind](rec, rng, cfg)
            except NoetherError as exc:
                ok, res = False, {"error": f"{type(exc).__name__}: {exc}"}
            summary.add(i, ok, res)
        suites.append(summary)
    return VerificationSummary(suites)


def default_suite(seed: int = 0, trials: int | None = None) -> list[InstanceRecipe]:
    """Built-in batch covering every equivalence: the ``paper-suite`` of the CLI."""
    def n(default):
        return default if trials is None else trials

    recipes = [
        InstanceRecipe("random_classical", d=6, seed=seed, trials=n(200), sparsity=0.8),
        InstanceRecipe("structured_commutant", d=8, seed=seed, trials=n(50)),
        InstanceRecipe("random_lindblad", d=4, seed=seed, trials=n(10)),
        InstanceRecipe("classical_embedding", d=6, seed=seed, trials=n(100), sparsity=0.8),
    ]
    recipes += [InstanceRecipe("named_example", seed=seed, trials=n(1), name=name)
                for name in NAMED_EXAMPLES]
    return recipes

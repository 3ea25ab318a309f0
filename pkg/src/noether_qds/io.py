"""Problem documents, complex-number encoding and the report schema."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .linops import DEFAULT_TOL, ToleranceConfig

FORMAT_VERSION = "1"


class DocumentError(ValueError):
    """A problem or recipe document is malformed."""


def encode_complex_matrix(X) -> list:
    X = np.asarray(X, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in X]


def decode_complex_matrix(data, name: str, d: int | None = None) -> np.ndarray:
    try:
        X = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise DocumentError(f"{name}: entries must be [re, im] pairs of numbers") from exc
    if X.ndim != 3 or X.shape[2] != 2:
        raise DocumentError(f"{name}: expected a row-major matrix of [re, im] pairs, "
                            f"got array of shape {X.shape}")
    Z = X[..., 0] + 1j * X[..., 1]
    _check_square(Z, name, d)
    return Z


def decode_real_matrix(data, name: str, d: int | None = None) -> np.ndarray:
    try:
        X = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise DocumentError(f"{name}: entries must be real numbers") from exc
    if X.ndim != 2:
        raise DocumentError(f"{name}: expected a row-major real matrix, got shape {X.shape}")
    _check_square(X, name, d)
    return X


def _check_square(X, name, d):
    if X.shape[0] != X.shape[1] or (d is not None and X.shape[0] != d):
        raise DocumentError(f"{name}: expected shape ({d}, {d}), got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise DocumentError(f"{name}: entries must be finite")


_TOL_FIELDS = {f.name for f in fields(ToleranceConfig)}


def tolerance_config(overrides: dict | None, base: ToleranceConfig = DEFAULT_TOL) -> ToleranceConfig:
    overrides = dict(overrides or {})
    unknown = set(overrides) - _TOL_FIELDS
    if unknown:
        raise DocumentError(f"unknown tolerance fields {sorted(unknown)}")
    try:
        return base.with_overrides(**overrides)
    except (TypeError, ValueError) as exc:
        raise DocumentError(f"tolerances: {exc}") from exc


@dataclass
class ProblemDocument:
    """One classical or quantum problem.

    Classical: ``M`` real d x d generator and ``A`` real length-d vector.
    Quantum: ``H`` and each of ``L`` are d x d complex matrices with entries
    encoded as ``[re, im]``; ``A`` is an optional observable and
    ``observables`` an optional list of further ones.
    """

    kind: str
    d: int
    version: str = FORMAT_VERSION
    M: np.ndarray | None = None
    H: np.ndarray | None = None
    L: list = field(default_factory=list)
    A: np.ndarray | None = None
    observables: list | None = None
    tolerances: dict | None = None

    @classmethod
    def from_dict(cls, data) -> "ProblemDocument":
        if not isinstance(data, dict):
            raise DocumentError("problem document must be a JSON object")
        for key in ("version", "kind", "d"):
            if key not in data:
                raise DocumentError(f"missing field {key!r}")
        version = data["version"]
        if str(version) != FORMAT_VERSION:
            raise DocumentError(f"unsupported format version {version!r}")
        kind = data["kind"]
        d = data["d"]
        if isinstance(d, bool) or not isinstance(d, int) or d < 1:
            raise DocumentError(f"d must be a positive integer, got {d!r}")
        known = {"version", "kind", "d", "M", "A", "H", "L", "observables", "tolerances"}
        unknown = set(data) - known
        if unknown:
            raise DocumentError(f"unknown fields {sorted(unknown)}")
        tolerances = data.get("tolerances")
        if tolerances is not None:
            if not isinstance(tolerances, dict):
                raise DocumentError("tolerances must be an object")
            tolerance_config(tolerances)

        if kind == "classical":
            if "M" not in data:
                raise DocumentError("classical document is missing field 'M'")
            if "A" not in data:
                raise DocumentError("classical document is missing field 'A'")
            M = decode_real_matrix(data["M"], "M", d)
            try:
                A = np.asarray(data["A"], dtype=float)
            except (TypeError, ValueError) as exc:
                raise DocumentError("A: entries must be real numbers") from exc
            if A.shape != (d,) or not np.all(np.isfinite(A)):
                raise DocumentError(f"A: expected {d} finite real values")
            return cls(kind=kind, d=d, version=str(version), M=M, A=A, tolerances=tolerances)

        if kind == "quantum":
            if "H" not in data:
                raise DocumentError("quantum document is missing field 'H'")
            H = decode_complex_matrix(data["H"], "H", d)
            L_raw = data.get("L", [])
            if not isinstance(L_raw, list):
                raise DocumentError("L must be a list of matrices")
            L = [decode_complex_matrix(X, f"L[{k}]", d) for k, X in enumerate(L_raw)]
            A = decode_complex_matrix(data["A"], "A", d) if "A" in data else None
            obs = None
            if "observables" in data:
                if not isinstance(data["observables"], list):
                    raise DocumentError("observables must be a list of matrices")
                obs = [decode_complex_matrix(X, f"observables[{k}]", d)
                       for k, X in enumerate(data["observables"])]
            return cls(kind=kind, d=d, version=str(version), H=H, L=L, A=A,
                       observables=obs, tolerances=tolerances)

        raise DocumentError(f"kind must be 'classical' or 'quantum', got {kind!r}")

    @classmethod
    def load(cls, path) -> "ProblemDocument":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise DocumentError(f"cannot read {path}: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DocumentError(f"{path}: invalid JSON: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        out = {"version": self.version, "kind": self.kind, "d": self.d}
        if self.kind == "classical":
            out["M"] = np.asarray(self.M, dtype=float).tolist()
            out["A"] = np.asarray(self.A, dtype=float).tolist()
        else:
            out["H"] = encode_complex_matrix(self.H)
            out["L"] = [encode_complex_matrix(X) for X in self.L]
            if self.A is not None:
                out["A"] = encode_complex_matrix(self.A)
            if self.observables is not None:
                out["observables"] = [encode_complex_matrix(X) for X in self.observables]
        if self.tolerances is not None:
            out["tolerances"] = dict(self.tolerances)
        return out

    def all_observables(self) -> list:
        obs = [] if self.A is None else [self.A]
        return obs + list(self.observables or [])

    def config(self, base: ToleranceConfig = DEFAULT_TOL) -> ToleranceConfig:
        return tolerance_config(self.tolerances, base)


_NUM = {"type": "number"}
_BOOL = {"type": "boolean"}
_COMPLEX_MATRIX = {"type": "array", "items": {"type": "array", "items": {
    "type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}}}

_HEADER = {
    "tool": {"const": "noether-qds"},
    "version": {"type": "string"},
    "kind": {"enum": ["classical", "quantum", "verify"]},
    "seed": {"type": "integer"},
    "timing_s": _NUM,
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "noether-qds report",
    "type": "object",
    "required": ["tool", "version", "kind", "seed", "timing_s"],
    "properties": _HEADER,
    "oneOf": [
        {
            "properties": {
                "kind": {"const": "classical"},
                "d": {"type": "integer"},
                "classes": {"type": "array", "items": {"type": "array",
                                                       "items": {"type": "integer"}}},
                "constant": _BOOL,
                "consistent": _BOOL,
                "conditions": {
                    "type": "object",
                    "required": ["distribution", "moments", "measurable", "commutator"],
                    "properties": {k: _BOOL for k in
                                   ("distribution", "moments", "measurable", "commutator")},
                },
                "residuals": {"type": "object", "additionalProperties": _NUM},
            },
            "required": ["kind", "d", "classes", "constant", "consistent", "conditions",
                         "residuals"],
        },
        {
            "properties": {
                "kind": {"const": "quantum"},
                "d": {"type": "integer"},
                "fixed_points": {
                    "type": "object",
                    "required": ["dim", "closed_under_adjoint", "closed_under_product",
                                 "contains_identity"],
                    "properties": {"dim": {"type": "integer"},
                                   "closed_under_adjoint": _BOOL,
                                   "closed_under_product": _BOOL,
                                   "contains_identity": _BOOL},
                },
                "commutant": {"type": "object", "required": ["dim"],
                              "properties": {"dim": {"type": "integer"}}},
                "subspace_distance": _NUM,
                "stationary": {
                    "type": "object",
                    "required": ["postulate_p", "min_eigenvalue", "kernel_dim", "candidate"],
                    "properties": {"postulate_p": _BOOL, "min_eigenvalue": _NUM,
                                   "kernel_dim": {"type": "integer"},
                                   "candidate": _COMPLEX_MATRIX},
                },
                "observables": {"type": "array", "items": {
                    "type": "object",
                    "required": ["index", "constant", "is_fixed_point", "hat_commutes",
                                 "in_commutant", "consistent", "heisenberg_drift", "residuals"],
                    "properties": {"index": {"type": "integer"}, "constant": _BOOL,
                                   "is_fixed_point": _BOOL, "hat_commutes": _BOOL,
                                   "in_commutant": _BOOL, "consistent": _BOOL,
                                   "heisenberg_drift": _NUM,
                                   "residuals": {"type": "object",
                                                 "additionalProperties": _NUM}},
                }},
                "conditional_expectation": {"anyOf": [
                    {"type": "null"}, {"type": "array", "items": _COMPLEX_MATRIX}]},
                "assertions": {"type": "object", "additionalProperties": _BOOL},
                "messages": {"type": "array", "items": {"type": "string"}},
            },
            "required": ["kind", "d", "stationary", "observables", "assertions"],
        },
        {
            "properties": {
                "kind": {"const": "verify"},
                "ok": _BOOL,
                "total": {"type": "integer"},
                "suites": {"type": "array", "items": {
                    "type": "object",
                    "required": ["kind", "trials", "passed", "failed", "failures"],
                    "properties": {"kind": {"type": "string"},
                                   "trials": {"type": "integer"},
                                   "passed": {"type": "integer"},
                                   "failed": {"type": "integer"},
                                   "failures": {"type": "array"}},
                }},
            },
            "required": ["kind", "ok", "total", "suites"],
        },
    ],
}

"""Least-squares fit instances: bases, design matrices, normalization.

A fit problem is the overdetermined system F lambda ~ y with F_ij the
j-th basis function evaluated at the i-th abscissa.  Instances are kept
in normalized form: F is rescaled so its largest singular value is 1
(hence ||F^dag F|| = 1, the top of the allowed conditioning band) and y
is rescaled to unit norm.  Both scale factors are recorded so solutions
in the original units stay recoverable:

    lambda_orig = (c_F / c_y) * lambda_norm
    E_orig      = E_norm / c_y^2

``classical_fit`` is the Moore-Penrose reference solver; every
simulator-side result in this package is checked against it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from . import linalg
from .exceptions import DimensionError, GenerationError, SchemaError

PROBLEM_SCHEMA_VERSION = 1

BASIS_POLYNOMIAL = "polynomial"
BASIS_FOURIER = "fourier"
BASIS_CUSTOM = "custom"


@dataclass(frozen=True)
class FitBasis:
    """Family of fit functions.

    * ``polynomial``: f_j(x) = x**j for j = 0..m-1.
    * ``fourier``:    f_j(x) = exp(2*pi*i*j*x) for j = 0..m-1.
    * ``custom``:     an explicit design matrix, bypassing evaluation.
    """

    kind: str
    m: int
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.m < 1:
            raise DimensionError("a basis needs at least one fit function")
        if self.kind not in (BASIS_POLYNOMIAL, BASIS_FOURIER, BASIS_CUSTOM):
            raise DimensionError(f"unknown basis kind {self.kind!r}")
        if self.kind == BASIS_CUSTOM:
            if self.matrix is None:
                raise DimensionError("custom basis requires an explicit matrix")
            if self.matrix.shape[1] != self.m:
                raise DimensionError("custom matrix column count must equal m")


@dataclass(frozen=True)
class DataSet:
    """Abscissas and ordinates of the points being fitted."""

    x: np.ndarray
    y: np.ndarray

    @property
    def n(self) -> int:
        return len(self.y)


@dataclass(frozen=True)
class FitProblem:
    """A normalized fit instance plus the bookkeeping to undo the scaling."""

    data_set: DataSet
    basis: FitBasis
    design_matrix: np.ndarray  # normalized: sigma_max = 1
    y: np.ndarray  # normalized: unit norm
    scale_f: float  # c_F, applied to the raw design matrix
    scale_y: float  # c_y, applied to the raw y
    seed: int | None = None

    @property
    def n(self) -> int:
        return self.design_matrix.shape[0]

    @property
    def m(self) -> int:
        return self.design_matrix.shape[1]


@dataclass(frozen=True)
class FitSolution:
    lambda_: np.ndarray
    residual_energy: float
    fitted: np.ndarray


def build_design_matrix(x, basis: FitBasis) -> np.ndarray:
    """Evaluate the basis at the abscissas: entry (i, j) = f_j(x_i)."""
    if basis.kind == BASIS_CUSTOM:
        return linalg.as_complex_matrix(basis.matrix)
    xs = linalg.as_complex_vector(x)
    j = np.arange(basis.m)
    with np.errstate(over="ignore", invalid="ignore"):
        if basis.kind == BASIS_POLYNOMIAL:
            f = xs[:, None] ** j[None, :]
        else:  # fourier
            f = np.exp(2j * np.pi * np.outer(xs, j))
    if not np.all(np.isfinite(f)):
        raise DimensionError("basis evaluation produced non-finite entries")
    return f


def normalize_problem(
    f_matrix,
    y,
    basis: FitBasis | None = None,
    data_set: DataSet | None = None,
    seed: int | None = None,
) -> FitProblem:
    """Rescale (F, y) into the canonical form described in the module docstring."""
    f = linalg.as_complex_matrix(f_matrix)
    yv = linalg.as_complex_vector(y)
    if f.shape[0] != yv.size:
        raise DimensionError(
            f"F has {f.shape[0]} rows but y has {yv.size} entries"
        )
    y_norm = float(np.linalg.norm(yv))
    if y_norm <= 0:
        raise DimensionError("y must be nonzero")
    cond = linalg.condition_estimate(f)  # raises on singular F
    scale_f = 1.0 / cond.sigma_max
    scale_y = 1.0 / y_norm
    if basis is None:
        basis = FitBasis(kind=BASIS_CUSTOM, m=f.shape[1], matrix=f)
    if data_set is None:
        data_set = DataSet(x=np.arange(f.shape[0], dtype=complex), y=yv)
    return FitProblem(
        data_set=data_set,
        basis=basis,
        design_matrix=f * scale_f,
        y=yv * scale_y,
        scale_f=scale_f,
        scale_y=scale_y,
        seed=seed,
    )


def problem_from_points(x, y, basis: FitBasis, seed: int | None = None) -> FitProblem:
    xs = linalg.as_complex_vector(x)
    ys = linalg.as_complex_vector(y)
    if xs.size != ys.size:
        raise DimensionError("x and y must have the same length")
    f = build_design_matrix(xs, basis)
    return normalize_problem(f, ys, basis=basis, data_set=DataSet(x=xs, y=ys), seed=seed)


def classical_fit(problem: FitProblem) -> FitSolution:
    """Reference least-squares solution of the normalized problem."""
    pinv = linalg.pseudoinverse(problem.design_matrix)
    lam = pinv @ problem.y
    fitted = problem.design_matrix @ lam
    residual = fitted - problem.y
    return FitSolution(
        lambda_=lam,
        residual_energy=float(np.vdot(residual, residual).real),
        fitted=fitted,
    )


def denormalized_solution(problem: FitProblem, solution: FitSolution) -> FitSolution:
    """Map a solution of the normalized problem back to the original units."""
    factor = problem.scale_f / problem.scale_y
    return FitSolution(
        lambda_=solution.lambda_ * factor,
        residual_energy=solution.residual_energy / problem.scale_y**2,
        fitted=solution.fitted / problem.scale_y,
    )


# --- synthetic problem generation -------------------------------------------


@dataclass(frozen=True)
class ProblemSpec:
    """Recipe for a reproducible synthetic instance.

    ``kind`` is one of identity | poly | fourier | random.  If
    ``planted_support`` is given, y = F lambda* + noise where lambda*
    carries ``planted_mass`` of its squared norm on the support, with
    per-entry magnitudes bounded away from zero so the support is
    detectable by sampling.
    """

    n: int
    m: int
    kind: str = "random"
    planted_support: tuple[int, ...] | None = None
    planted_mass: float | None = None
    condition_target: float | None = None
    noise: float = 0.0


def _haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def _bounded_mass_vector(size: int, total: float, rng: np.random.Generator) -> np.ndarray:
    """Random complex vector with squared norm ``total`` and per-entry
    squared magnitudes within a factor 3 of each other."""
    weights = rng.uniform(0.5, 1.5, size=size)
    weights *= total / weights.sum()
    phases = np.exp(2j * np.pi * rng.uniform(size=size))
    return np.sqrt(weights) * phases


def _planted_lambda(spec: ProblemSpec, rng: np.random.Generator) -> np.ndarray:
    support = tuple(spec.planted_support)
    if any(not 0 <= j < spec.m for j in support):
        raise GenerationError(f"planted support {support} out of range for m={spec.m}")
    if len(set(support)) != len(support):
        raise GenerationError("planted support indices must be distinct")
    mass = spec.planted_mass if spec.planted_mass is not None else 1.0
    if not 0 < mass <= 1:
        raise GenerationError("planted mass must lie in (0, 1]")
    lam = np.zeros(spec.m, dtype=complex)
    lam[list(support)] = _bounded_mass_vector(len(support), mass, rng)
    rest = [j for j in range(spec.m) if j not in support]
    if rest and mass < 1:
        lam[rest] = _bounded_mass_vector(len(rest), 1.0 - mass, rng)
    return lam


def generate_problem(spec: ProblemSpec, seed: int) -> FitProblem:
    """Build a reproducible fit problem from a spec and a seed."""
    if spec.m < 1 or spec.n < spec.m:
        raise GenerationError(f"need n >= m >= 1, got n={spec.n}, m={spec.m}")
    rng = np.random.default_rng(seed)

    if spec.kind == "identity":
        if spec.n != spec.m:
            raise GenerationError("identity problems require n == m")
        f_raw = np.eye(spec.n, dtype=complex)
        xs = np.arange(spec.n, dtype=complex)
        basis = FitBasis(kind=BASIS_CUSTOM, m=spec.m, matrix=f_raw)
    elif spec.kind == "poly":
        xs = (np.arange(spec.n) / max(spec.n - 1, 1)).astype(complex)
        basis = FitBasis(kind=BASIS_POLYNOMIAL, m=spec.m)
        f_raw = build_design_matrix(xs, basis)
    elif spec.kind == "fourier":
        xs = ((np.arange(spec.n) + 0.5) / spec.n).astype(complex)
        basis = FitBasis(kind=BASIS_FOURIER, m=spec.m)
        f_raw = build_design_matrix(xs, basis)
    elif spec.kind == "random":
        kappa = spec.condition_target if spec.condition_target else 10.0
        if kappa < 1:
            raise GenerationError("condition target must be >= 1")
        sigma = np.logspace(0.0, -np.log10(kappa), spec.m)
        u = _haar_unitary(spec.n, rng)[:, : spec.m]
        v = _haar_unitary(spec.m, rng)
        f_raw = (u * sigma) @ v.conj().T
        xs = np.arange(spec.n, dtype=complex)
        basis = FitBasis(kind=BASIS_CUSTOM, m=spec.m, matrix=f_raw)
    else:
        raise GenerationError(f"unknown problem kind {spec.kind!r}")

    if spec.kind != "random" and spec.condition_target is not None:
        kappa = linalg.condition_estimate(f_raw).kappa
        if kappa > spec.condition_target:
            raise GenerationError(
                f"{spec.kind} basis on this grid has condition {kappa:.3g} "
                f"> target {spec.condition_target:.3g}"
            )

    if spec.planted_support is not None:
        lam = _planted_lambda(spec, rng)
        y_raw = f_raw @ lam
        if spec.noise > 0:
            y_raw = y_raw + spec.noise * (
                rng.normal(size=spec.n) + 1j * rng.normal(size=spec.n)
            ) / np.sqrt(2 * spec.n)
    else:
        y_raw = (rng.normal(size=spec.n) + 1j * rng.normal(size=spec.n)) / np.sqrt(2)

    return normalize_problem(
        f_raw, y_raw, basis=basis, data_set=DataSet(x=xs, y=y_raw), seed=seed
    )


# --- problem files -----------------------------------------------------------
#
# {"schemaVersion": 1, "dataSet": {"x": [[re, im], ...], "y": [[re, im], ...]},
#  "basis": {"kind": ..., "m": ...}, "designMatrix": {...normalized...},
#  "yVector": [...normalized...], "normScale": [cF, cY], "seed": ...}


def problem_to_json(problem: FitProblem) -> dict:
    basis_obj: dict = {"kind": problem.basis.kind, "m": problem.basis.m}
    return {
        "schemaVersion": PROBLEM_SCHEMA_VERSION,
        "dataSet": {
            "x": linalg.vector_to_json(problem.data_set.x),
            "y": linalg.vector_to_json(problem.data_set.y),
        },
        "basis": basis_obj,
        "designMatrix": linalg.matrix_to_json(problem.design_matrix),
        "yVector": linalg.vector_to_json(problem.y),
        "normScale": [problem.scale_f, problem.scale_y],
        "seed": problem.seed,
    }


def problem_from_json(obj: dict) -> FitProblem:
    try:
        version = obj["schemaVersion"]
        data_set = DataSet(
            x=linalg.vector_from_json(obj["dataSet"]["x"]),
            y=linalg.vector_from_json(obj["dataSet"]["y"]),
        )
        basis_obj = obj["basis"]
        f = linalg.matrix_from_json(obj["designMatrix"])
        y = linalg.vector_from_json(obj["yVector"])
        scale_f, scale_y = (float(s) for s in obj["normScale"])
        seed = obj.get("seed")
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed problem file: {exc}") from exc
    if version != PROBLEM_SCHEMA_VERSION:
        raise SchemaError(f"unsupported problem schema version {version}")
    kind = basis_obj.get("kind", BASIS_CUSTOM)
    if kind == BASIS_CUSTOM:
        # The stored normalized matrix, undone by c_F, is the raw matrix.
        basis = FitBasis(kind=kind, m=f.shape[1], matrix=f / scale_f)
    else:
        basis = FitBasis(kind=kind, m=int(basis_obj["m"]))
    problem = FitProblem(
        data_set=data_set,
        basis=basis,
        design_matrix=f,
        y=y,
        scale_f=scale_f,
        scale_y=scale_y,
        seed=seed,
    )
    if abs(np.linalg.norm(problem.y) - 1.0) > 1e-8:
        raise SchemaError("problem file y vector is not normalized")
    return problem


def save_problem(problem: FitProblem, path) -> None:
    with open(path, "w") as fh:
        json.dump(problem_to_json(problem), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_problem(path) -> FitProblem:
    with open(path) as fh:
        return problem_from_json(json.load(fh))


def restrict_columns(problem: FitProblem, support) -> FitProblem:
    """New problem keeping only the given design-matrix columns."""
    support = sorted(int(j) for j in support)
    if not support or any(not 0 <= j < problem.m for j in support):
        raise DimensionError(f"support {support} invalid for m={problem.m}")
    f_raw = problem.design_matrix[:, support] / problem.scale_f
    y_raw = problem.y / problem.scale_y
    basis = FitBasis(kind=BASIS_CUSTOM, m=len(support), matrix=f_raw)
    sub = normalize_problem(f_raw, y_raw, basis=basis, data_set=problem.data_set)
    return replace(sub, seed=problem.seed)

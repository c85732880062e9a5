"""Complex dense linear algebra for the fitting pipeline.

Conventions used throughout the package:

* The rectangular design matrix F is N x M (rows = data points, columns =
  fit functions).
* ``embed`` lifts F to the Hermitian operator H on C^(M+N) with the
  parameter sector first::

      H = [[0,   F^dag],
           [F,   0   ]]

  so H applied to a vector (0, y) yields (F^dag y, 0): the parameter
  sector receives F^dag y and the data sector is cleared.  One layout
  serves both "apply F" and "apply F^dag"; no basis reordering anywhere.
* Eigenvalues of H come in +/- sigma_i pairs (sigma_i the singular values
  of F) plus |N - M| zeros.
* Matrix norms are spectral norms; vector norms are 2-norms.

Eigenvector phases are canonicalized (largest-magnitude component made
real positive) so repeated runs produce identical decompositions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import DimensionError, SchemaError, SingularMatrixError

# Largest embedded operator the dense eigensolver path is meant for.
DEFAULT_DIM_CAP = 64

# Singular values below this are treated as exact zeros.
SINGULAR_TOL = 1e-12


def as_complex_matrix(entries) -> np.ndarray:
    """Coerce to a 2-D complex array and reject non-finite entries."""
    mat = np.atleast_2d(np.asarray(entries, dtype=complex))
    if mat.ndim != 2 or mat.shape[0] < 1 or mat.shape[1] < 1:
        raise DimensionError(f"expected a 2-D matrix, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise DimensionError("matrix entries must be finite")
    return mat


def as_complex_vector(entries) -> np.ndarray:
    vec = np.asarray(entries, dtype=complex).reshape(-1)
    if vec.size < 1:
        raise DimensionError("expected a non-empty vector")
    if not np.all(np.isfinite(vec)):
        raise DimensionError("vector entries must be finite")
    return vec


@dataclass(frozen=True)
class EmbeddedOperator:
    """Hermitian embedding of a rectangular matrix.

    ``matrix`` is (m + n) x (m + n); indices 0..m-1 form the parameter
    sector, indices m..m+n-1 the data sector.  The diagonal blocks are
    zero by construction.
    """

    m: int
    n: int
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.m + self.n

    def param_slice(self) -> slice:
        return slice(0, self.m)

    def data_slice(self) -> slice:
        return slice(self.m, self.m + self.n)


@dataclass(frozen=True)
class EigDecomposition:
    """Real spectrum and orthonormal eigenbasis of a Hermitian operator.

    ``eigenvalues`` are ascending; ``eigenvectors`` holds the matching
    eigenvectors as columns.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class SparsityProfile:
    s: int  # max nonzeros over all rows and columns
    nnz: int


@dataclass(frozen=True)
class ConditionEstimate:
    kappa: float
    sigma_max: float
    sigma_min: float


def embed(f_matrix, dim_cap: int = DEFAULT_DIM_CAP) -> EmbeddedOperator:
    """Embed the N x M matrix F into the Hermitian block operator above."""
    f = as_complex_matrix(f_matrix)
    n, m = f.shape
    if m + n > dim_cap:
        raise DimensionError(
            f"embedded dimension {m + n} exceeds the simulator cap {dim_cap}"
        )
    h = np.zeros((m + n, m + n), dtype=complex)
    h[:m, m:] = f.conj().T
    h[m:, :m] = f
    return EmbeddedOperator(m=m, n=n, matrix=h)


def singular_values(f_matrix) -> np.ndarray:
    return np.linalg.svd(as_complex_matrix(f_matrix), compute_uv=False)


def condition_estimate(f_matrix) -> ConditionEstimate:
    """Largest/smallest singular values of F and their ratio."""
    sigma = singular_values(f_matrix)
    smax = float(sigma[0])
    smin = float(sigma[-1])
    if smin < SINGULAR_TOL:
        raise SingularMatrixError(
            f"smallest singular value {smin:.3e} is below {SINGULAR_TOL:.1e}; "
            "problem is ill-posed"
        )
    return ConditionEstimate(kappa=smax / smin, sigma_max=smax, sigma_min=smin)


def sparsity_profile(f_matrix, tol: float = 0.0) -> SparsityProfile:
    """Max nonzeros per row/column and the total nonzero count."""
    f = as_complex_matrix(f_matrix)
    mask = np.abs(f) > tol
    per_row = mask.sum(axis=1)
    per_col = mask.sum(axis=0)
    return SparsityProfile(
        s=int(max(per_row.max(), per_col.max())),
        nnz=int(mask.sum()),
    )


def pseudoinverse(f_matrix) -> np.ndarray:
    """Moore-Penrose pseudoinverse (F^dag F)^-1 F^dag of a full-column-rank F."""
    f = as_complex_matrix(f_matrix)
    sigma = np.linalg.svd(f, compute_uv=False)
    if f.shape[1] > f.shape[0] or sigma[-1] < SINGULAR_TOL:
        raise SingularMatrixError(
            "F^dag F is singular (degenerate direction of the residual form); "
            "the fit parameters are not unique"
        )
    gram = f.conj().T @ f
    return np.linalg.solve(gram, f.conj().T)


def _canonical_phases(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real positive."""
    out = vectors.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        idx = int(np.argmax(np.abs(col)))
        pivot = col[idx]
        if np.abs(pivot) > 0:
            out[:, j] = col * (np.abs(pivot) / pivot)
    return out


def eig_hermitian(op: EmbeddedOperator | np.ndarray) -> EigDecomposition:
    """Full spectral decomposition with a deterministic phase convention."""
    h = op.matrix if isinstance(op, EmbeddedOperator) else as_complex_matrix(op)
    if not np.allclose(h, h.conj().T, atol=1e-12):
        raise DimensionError("operator is not Hermitian")
    try:
        values, vectors = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - numerical pathology
        raise SingularMatrixError(f"eigensolver failed to converge: {exc}") from exc
    return EigDecomposition(
        eigenvalues=values.astype(float),
        eigenvectors=_canonical_phases(vectors.astype(complex)),
    )


def input_coefficients(eig: EigDecomposition, vector) -> np.ndarray:
    """Coefficients beta_j = <mu_j|v> of a vector in the eigenbasis."""
    v = as_complex_vector(vector)
    return eig.eigenvectors.conj().T @ v


def apply_matrix_function(
    op: EmbeddedOperator | EigDecomposition | np.ndarray,
    func: Callable[[np.ndarray], np.ndarray],
    vector,
    zero_tol: float = SINGULAR_TOL,
) -> np.ndarray:
    """Apply f(H) to a vector through the spectral decomposition.

    Accepts a precomputed decomposition to avoid repeating the eigensolve.

    Eigenvalues within ``zero_tol`` of zero are snapped to exactly zero
    before evaluating ``func``; any non-finite value of ``func`` (such as
    1/0 for eigenvalue inversion) is then replaced by zero.  This gives
    1/E pseudo-inverse semantics on the kernel while leaving functions
    that are finite at zero untouched.
    """
    eig = op if isinstance(op, EigDecomposition) else eig_hermitian(op)
    v = as_complex_vector(vector)
    energies = np.where(np.abs(eig.eigenvalues) <= zero_tol, 0.0, eig.eigenvalues)
    with np.errstate(divide="ignore", invalid="ignore"):
        weights = np.asarray(func(energies), dtype=complex)
    weights = np.where(np.isfinite(weights), weights, 0.0)
    beta = eig.eigenvectors.conj().T @ v
    return eig.eigenvectors @ (weights * beta)


def spectral_norm(matrix) -> float:
    return float(np.linalg.norm(np.atleast_2d(np.asarray(matrix, dtype=complex)), 2))


# --- JSON exchange format ---------------------------------------------------
#
# Dense:  {"rows": R, "cols": C, "entries": [[re, im], ...]} row-major.
# Sparse: {"rows": R, "cols": C, "triplets": [[i, j, re, im], ...]} 0-based.


def matrix_to_json(matrix) -> dict:
    mat = as_complex_matrix(matrix)
    return {
        "rows": int(mat.shape[0]),
        "cols": int(mat.shape[1]),
        "entries": [[float(z.real), float(z.imag)] for z in mat.reshape(-1)],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    if not isinstance(obj, dict):
        raise SchemaError("matrix object must be a JSON object")
    try:
        rows = int(obj["rows"])
        cols = int(obj["cols"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError("matrix object needs integer rows/cols") from exc
    if rows < 1 or cols < 1:
        raise SchemaError("matrix dimensions must be positive")
    if "entries" in obj:
        entries = obj["entries"]
        if len(entries) != rows * cols:
            raise SchemaError(
                f"expected {rows * cols} entries, got {len(entries)}"
            )
        flat = np.array([complex(re, im) for re, im in entries])
        return as_complex_matrix(flat.reshape(rows, cols))
    if "triplets" in obj:
        mat = np.zeros((rows, cols), dtype=complex)
        for i, j, re, im in obj["triplets"]:
            i, j = int(i), int(j)
            if not (0 <= i < rows and 0 <= j < cols):
                raise SchemaError(f"triplet index ({i}, {j}) out of range")
            mat[i, j] = complex(re, im)
        return as_complex_matrix(mat)
    raise SchemaError("matrix object needs 'entries' or 'triplets'")


def vector_to_json(vector) -> list:
    vec = as_complex_vector(vector)
    return [[float(z.real), float(z.imag)] for z in vec]


def vector_from_json(obj) -> np.ndarray:
    try:
        return as_complex_vector([complex(re, im) for re, im in obj])
    except (TypeError, ValueError) as exc:
        raise SchemaError("vector must be a list of [re, im] pairs") from exc

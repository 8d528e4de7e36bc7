"""Dense complex-matrix substrate.

Operators are plain ``numpy`` complex arrays of shape ``(d, d)``; state
vectors are 1-d arrays.  Composite systems use the row-major Kronecker
convention of :func:`numpy.kron`: in ``kron(a, b)`` the entry at
``(i * db + k, j * db + l)`` is ``a[i, j] * b[k, l]``.  Every module relies on
this ordering when embedding meters or tracing out an ancilla.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidDimensionError, InvalidOperatorError

Operator = np.ndarray


@dataclass(frozen=True)
class Tolerance:
    """Numerical thresholds.

    ``eq_tol`` bounds the spectral norm of a difference for two operators to
    count as equal; ``eig_cluster_tol`` is the largest gap between sorted
    eigenvalues that is still merged into one degenerate eigenvalue.
    """

    eq_tol: float = 1e-9
    eig_cluster_tol: float = 1e-8

    def __post_init__(self):
        for name in ("eq_tol", "eig_cluster_tol"):
            value = getattr(self, name)
            if not (0.0 < value <= 1e-4):
                raise ValueError(f"{name} must lie in (0, 1e-4], got {value!r}")


DEFAULT_TOL = Tolerance()


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(vec: Sequence[complex]) -> Operator:
    """|v><v| for a (not necessarily normalized) vector."""
    v = np.asarray(vec, dtype=complex)
    return np.outer(v, v.conj())


def dag(a: Operator) -> Operator:
    return a.conj().T


def op_norm(a: Operator) -> float:
    """Spectral (largest singular value) norm."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, ord=2))


def commutator(a: Operator, b: Operator) -> Operator:
    return a @ b - b @ a


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def as_operator(x, dim: int | None = None) -> Operator:
    a = np.asarray(x, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidDimensionError(f"expected a square matrix, got shape {a.shape}")
    if dim is not None and a.shape[0] != dim:
        raise InvalidDimensionError(f"expected dimension {dim}, got {a.shape[0]}")
    return a


def is_hermitian(a: Operator, tol: Tolerance = DEFAULT_TOL) -> bool:
    return op_norm(a - dag(a)) <= tol.eq_tol


def is_unitary(u: Operator, tol: Tolerance = DEFAULT_TOL) -> bool:
    u = as_operator(u)
    return op_norm(dag(u) @ u - np.eye(u.shape[0])) <= tol.eq_tol


def density_violations(rho: Operator, tol: Tolerance = DEFAULT_TOL) -> list[str]:
    """Names of the density-operator invariants ``rho`` violates (empty if valid)."""
    problems = []
    if not is_hermitian(rho, tol):
        problems.append("not Hermitian")
        return problems
    herm = (rho + dag(rho)) / 2
    if np.linalg.eigvalsh(herm).min() < -tol.eq_tol:
        problems.append("not positive semidefinite")
    if abs(np.trace(rho) - 1.0) > tol.eq_tol:
        problems.append("trace differs from 1")
    return problems


def as_density(x, dim: int | None = None, tol: Tolerance = DEFAULT_TOL) -> Operator:
    """Validate ``x`` as a density operator and return it as a complex array."""
    rho = as_operator(x, dim)
    problems = density_violations(rho, tol)
    if problems:
        raise InvalidOperatorError("invalid density operator: " + ", ".join(problems))
    return rho


def as_state_vector(x, dim: int | None = None, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    v = np.asarray(x, dtype=complex)
    if v.ndim != 1:
        raise InvalidDimensionError(f"expected a vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise InvalidDimensionError(f"expected dimension {dim}, got {v.shape[0]}")
    if abs(np.linalg.norm(v) - 1.0) > tol.eq_tol:
        raise InvalidOperatorError("state vector is not normalized")
    return v


# ---------------------------------------------------------------------------
# tensor structure
# ---------------------------------------------------------------------------

def tensor(a: Operator, b: Operator) -> Operator:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def partial_trace_second(x: Operator, dim1: int, dim2: int) -> Operator:
    """Trace out the second factor of an operator on C^dim1 (x) C^dim2."""
    x = np.asarray(x, dtype=complex)
    if x.shape != (dim1 * dim2, dim1 * dim2):
        raise InvalidDimensionError(
            f"operator of shape {x.shape} is not on a {dim1}x{dim2} composite space"
        )
    return np.einsum("ikjk->ij", x.reshape(dim1, dim2, dim1, dim2))


def partial_trace_first(x: Operator, dim1: int, dim2: int) -> Operator:
    x = np.asarray(x, dtype=complex)
    if x.shape != (dim1 * dim2, dim1 * dim2):
        raise InvalidDimensionError(
            f"operator of shape {x.shape} is not on a {dim1}x{dim2} composite space"
        )
    return np.einsum("kikj->ij", x.reshape(dim1, dim2, dim1, dim2))


def permute_subsystems(x: Operator, dims: Sequence[int], perm: Sequence[int]) -> Operator:
    """Reorder tensor factors: factor ``perm[k]`` of the input becomes factor ``k``."""
    dims = list(dims)
    n = len(dims)
    total = int(np.prod(dims))
    x = np.asarray(x, dtype=complex)
    if x.shape != (total, total) or sorted(perm) != list(range(n)):
        raise InvalidDimensionError("permutation does not match operator dimensions")
    t = x.reshape(dims + dims)
    t = t.transpose(list(perm) + [n + p for p in perm])
    return t.reshape(total, total)


# ---------------------------------------------------------------------------
# spectral decomposition
# ---------------------------------------------------------------------------

def eig_hermitian(h: Operator, tol: Tolerance = DEFAULT_TOL) -> list[tuple[float, Operator]]:
    """Spectral decomposition ``h = sum(lam * P)`` with degenerate eigenvalues merged.

    Returns ``(eigenvalue, projector)`` pairs sorted by ascending eigenvalue.
    Consecutive eigenvalues whose gap is at most ``tol.eig_cluster_tol`` share
    a projector; the reported eigenvalue is the cluster mean.
    """
    h = as_operator(h)
    if not is_hermitian(h, tol):
        raise InvalidOperatorError("eig_hermitian requires a Hermitian operator")
    vals, vecs = np.linalg.eigh((h + dag(h)) / 2)
    groups: list[list[int]] = [[0]]
    for k in range(1, len(vals)):
        if vals[k] - vals[k - 1] <= tol.eig_cluster_tol:
            groups[-1].append(k)
        else:
            groups.append([k])
    out = []
    for g in groups:
        v = vecs[:, g]
        out.append((float(np.mean(vals[g])), v @ dag(v)))
    return out


def expm_hermitian(h: Operator, t: float) -> Operator:
    """exp(-i h t) for Hermitian ``h``."""
    vals, vecs = np.linalg.eigh((h + dag(h)) / 2)
    return (vecs * np.exp(-1j * vals * t)) @ dag(vecs)


# ---------------------------------------------------------------------------
# random ensembles
# ---------------------------------------------------------------------------

def make_rng(seed) -> np.random.Generator:
    """Counter-based (Philox) generator; ``seed`` may be an int or a SeedSequence."""
    return np.random.Generator(np.random.Philox(seed))


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def _check_dim(dim: int) -> None:
    if dim < 1:
        raise InvalidDimensionError(f"dimension must be positive, got {dim}")


def random_density(dim: int, seed) -> Operator:
    """Full-rank random state G G^dag / Tr, with G a square Ginibre matrix."""
    _check_dim(dim)
    g = _ginibre(make_rng(seed), dim, dim)
    rho = g @ dag(g)
    rho = (rho + dag(rho)) / 2
    return rho / np.trace(rho).real


def random_unitary(dim: int, seed) -> Operator:
    """Haar-distributed unitary from the QR decomposition of a Ginibre matrix."""
    _check_dim(dim)
    q, r = np.linalg.qr(_ginibre(make_rng(seed), dim, dim))
    d = np.diag(r)
    phases = np.where(np.abs(d) > 0, d / np.abs(d), 1.0)
    return q * phases


def random_hermitian(dim: int, seed) -> Operator:
    _check_dim(dim)
    g = _ginibre(make_rng(seed), dim, dim)
    return (g + dag(g)) / 2


def random_state_vector(dim: int, seed) -> np.ndarray:
    _check_dim(dim)
    v = _ginibre(make_rng(seed), dim, 1)[:, 0]
    return v / np.linalg.norm(v)


def random_operator(dim: int, seed) -> Operator:
    """A generic (non-Hermitian, non-positive) complex matrix."""
    _check_dim(dim)
    return _ginibre(make_rng(seed), dim, dim)


def spanning_states(dim: int) -> list[Operator]:
    """dim**2 pure states whose projectors span all operators on C^dim.

    Uses |i><i|, (|i>+|j>)/sqrt2 and (|i>+i|j>)/sqrt2 for i < j: a linear
    identity holding on these states holds for every operator, which turns
    "for all rho" conditions into finite checks.
    """
    _check_dim(dim)
    states = [projector(ket(i, dim)) for i in range(dim)]
    for i in range(dim):
        for j in range(i + 1, dim):
            states.append(projector((ket(i, dim) + ket(j, dim)) / np.sqrt(2)))
            states.append(projector((ket(i, dim) + 1j * ket(j, dim)) / np.sqrt(2)))
    return states


def matrix_units(dim: int) -> list[Operator]:
    out = []
    for i in range(dim):
        for j in range(dim):
            e = np.zeros((dim, dim), dtype=complex)
            e[i, j] = 1.0
            out.append(e)
    return out

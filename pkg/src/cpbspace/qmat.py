"""Small dense complex linear algebra for two qubits plus a truncated bosonic mode.

Basis convention: the two-qubit basis is ordered {|11>, |10>, |01>, |00>}, so a
single qubit is written in the order (|1>, |0>).  When a field mode is attached
its Fock index is the fast (rightmost) tensor index.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import DimensionError, NotADensityMatrix, NotSymmetric

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
POSITIVITY_TOL = -1e-8

# single-qubit operators in the (|1>, |0>) ordering
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |1><0|
SIGMA_MINUS = SIGMA_PLUS.T.copy()
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)

# True on the diagonal and anti-diagonal of a 4x4 matrix
X_MASK = np.eye(4, dtype=bool) | np.eye(4, dtype=bool)[::-1]


def kron(a, b) -> np.ndarray:
    """Tensor product with ``a`` as the slow index."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(vec) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    return np.outer(vec, vec.conj())


def partial_trace_field(rho_full, qubit_dim: int = 4, field_dim: int | None = None) -> np.ndarray:
    """Trace out the field factor of a ``(qubit_dim*field_dim)``-dimensional state."""
    rho_full = np.asarray(rho_full, dtype=complex)
    n = rho_full.shape[0]
    if rho_full.ndim != 2 or rho_full.shape[1] != n:
        raise DimensionError(f"expected a square matrix, got shape {rho_full.shape}")
    if field_dim is None:
        if n % qubit_dim:
            raise DimensionError(f"dimension {n} is not a multiple of {qubit_dim}")
        field_dim = n // qubit_dim
    if qubit_dim * field_dim != n:
        raise DimensionError(f"dimension {n} != {qubit_dim} x {field_dim}")
    return np.einsum("ikjk->ij", rho_full.reshape(qubit_dim, field_dim, qubit_dim, field_dim))


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)


def _sym2_eigvals(a: float, b: float, d: float) -> tuple[float, float]:
    mean = 0.5 * (a + d)
    radius = math.hypot(0.5 * (a - d), b)
    return mean + radius, mean - radius


def _null_vector(m: np.ndarray) -> np.ndarray | None:
    # the cross product of two rows of a rank-2 symmetric matrix spans its kernel;
    # take the best-conditioned pair
    crosses = [np.cross(m[0], m[1]), np.cross(m[0], m[2]), np.cross(m[1], m[2])]
    best = max(crosses, key=lambda c: float(c @ c))
    norm = np.linalg.norm(best)
    if not norm > 1e-150:
        return None
    return best / norm


def eigvals_sym3(m) -> tuple[float, float, float]:
    """Eigenvalues of a real symmetric 3x3 matrix, descending.

    The roots of the characteristic cubic are taken from the trigonometric
    closed form.  That form loses about half the digits on a nearly
    degenerate pair, so the best-isolated root is kept, its eigenvector built
    from a cross product, and the remaining pair recomputed exactly from the
    2x2 block on the orthogonal complement.
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3):
        raise DimensionError(f"expected 3x3, got {m.shape}")
    if np.max(np.abs(m - m.T)) > HERMITIAN_TOL * max(1.0, np.max(np.abs(m))):
        raise NotSymmetric("matrix is not symmetric")
    scale = float(np.max(np.abs(m)))
    if scale == 0.0:
        return (0.0, 0.0, 0.0)
    m = 0.5 * (m + m.T) / scale

    q = np.trace(m) / 3.0
    shifted = m - q * np.eye(3)
    p = math.sqrt(float(np.sum(shifted * shifted)) / 6.0)
    if p == 0.0:
        return (q * scale,) * 3
    r = np.linalg.det(shifted / p) / 2.0
    phi = math.acos(min(1.0, max(-1.0, r))) / 3.0
    roots = [q + 2.0 * p * math.cos(phi + 2.0 * math.pi * k / 3.0) for k in range(3)]

    gaps = [min(abs(roots[i] - roots[j]) for j in range(3) if j != i) for i in range(3)]
    iso = int(np.argmax(gaps))
    v = _null_vector(m - roots[iso] * np.eye(3))
    if v is None:
        return tuple(scale * r for r in sorted(roots, reverse=True))
    lam_iso = float(v @ m @ v)

    # orthonormal basis of the complement of v
    helper = np.eye(3)[int(np.argmin(np.abs(v)))]
    e1 = np.cross(v, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(v, e1)
    lam_a, lam_b = _sym2_eigvals(float(e1 @ m @ e1), float(e1 @ m @ e2), float(e2 @ m @ e2))
    return tuple(scale * r for r in sorted((lam_iso, lam_a, lam_b), reverse=True))


def x_blocks(rho) -> tuple[np.ndarray, np.ndarray]:
    """The outer {|11>,|00>} and inner {|10>,|01>} 2x2 blocks of a 4x4 matrix."""
    rho = np.asarray(rho)
    outer = rho[np.ix_([0, 3], [0, 3])]
    inner = rho[np.ix_([1, 2], [1, 2])]
    return outer, inner


def off_x_magnitude(rho) -> float:
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise DimensionError(f"expected 4x4, got {rho.shape}")
    return float(np.max(np.abs(rho[~X_MASK])))


def min_eigenvalue(rho) -> float:
    """Smallest eigenvalue of a Hermitian matrix.

    X-structured 4x4 input is handled exactly through its two 2x2 blocks;
    anything else falls back to LAPACK.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape == (4, 4) and off_x_magnitude(rho) == 0.0:
        vals = []
        for block in x_blocks(rho):
            vals.extend(_sym2_eigvals(block[0, 0].real, abs(block[0, 1]), block[1, 1].real))
        return min(vals)
    return float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])


def check_density_matrix(
    rho,
    herm_tol: float = HERMITIAN_TOL,
    trace_tol: float = TRACE_TOL,
    pos_tol: float = POSITIVITY_TOL,
) -> np.ndarray:
    """Return ``rho`` as a complex array, raising NotADensityMatrix on failure."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise NotADensityMatrix(f"not a square matrix: shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise NotADensityMatrix("matrix has non-finite entries")
    if not is_hermitian(rho, herm_tol):
        raise NotADensityMatrix("matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > trace_tol:
        raise NotADensityMatrix(f"trace {tr!r} differs from 1")
    lo = min_eigenvalue(rho)
    if lo < pos_tol:
        raise NotADensityMatrix(f"negative eigenvalue {lo:.3e}")
    return rho


def dm_to_dict(rho) -> dict:
    rho = np.asarray(rho, dtype=complex)
    return {"dim": int(rho.shape[0]), "re": rho.real.tolist(), "im": rho.imag.tolist()}


def dm_from_dict(obj) -> np.ndarray:
    try:
        dim = int(obj["dim"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros((dim, dim))), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise NotADensityMatrix(f"malformed density-matrix object: {exc}") from exc
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise DimensionError(f"'re'/'im' must both be {dim}x{dim}")
    return re + 1j * im


def load_density_matrix(path) -> np.ndarray:
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise NotADensityMatrix(f"{path}: invalid JSON ({exc})") from exc
    return dm_from_dict(obj)


def save_density_matrix(rho, path) -> None:
    Path(path).write_text(json.dumps(dm_to_dict(rho)))

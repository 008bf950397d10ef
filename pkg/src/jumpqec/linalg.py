"""Dense complex linear algebra for small qubit registers.

Operators are plain ``numpy.ndarray`` matrices of dtype complex128.  All
routines here are pure functions; nothing is cached or mutated, so values
can be shared freely between threads.  The register size is capped at
``MAX_QUBITS`` qubits (dimension 4096), which keeps every construction
dense, exact and desk-scale.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

__all__ = [
    "MAX_QUBITS",
    "IDENTITY",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "SIGMA_MINUS",
    "SIGMA_PLUS",
    "PAULIS",
    "max_abs",
    "is_hermitian",
    "is_unitary",
    "tensor_embed",
    "traceless_decompose",
    "bloch_decompose",
    "bloch_matrix",
    "unitary_completion",
]

#: Largest supported register; 2**12 = 4096 keeps dense algebra cheap.
MAX_QUBITS = 12

#: Max-norm tolerance for input predicates (Hermiticity, trace checks).
HERMITIAN_ATOL = 1e-12

#: Max-norm tolerance for constructed outputs (orthonormality, unitarity).
ORTHO_ATOL = 1e-10

IDENTITY = np.eye(2, dtype=np.complex128)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
#: Lowering operator |0><1| (maps the excited state to the ground state).
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=np.complex128)
SIGMA_PLUS = np.array([[0, 0], [1, 0]], dtype=np.complex128)

#: Pauli triple in (x, y, z) order, indexed by Bloch-vector component.
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

for _m in (IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z, SIGMA_MINUS, SIGMA_PLUS):
    _m.flags.writeable = False
del _m


def max_abs(m: np.ndarray) -> float:
    """Entrywise max-norm ``max |m_ij|`` (0.0 for empty input)."""
    m = np.asarray(m)
    return float(np.abs(m).max()) if m.size else 0.0


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_ATOL) -> bool:
    m = np.asarray(m, dtype=np.complex128)
    return max_abs(m - m.conj().T) <= tol


def is_unitary(m: np.ndarray, tol: float = ORTHO_ATOL) -> bool:
    m = np.asarray(m, dtype=np.complex128)
    return max_abs(m.conj().T @ m - np.eye(m.shape[0])) <= tol


def tensor_embed(op: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """Embed a single-qubit operator into an ``n``-qubit register.

    Returns ``1 x ... x op x ... x 1`` with ``op`` in tensor slot ``qubit``.
    Slot 0 is the leftmost factor, i.e. the most significant bit of the
    computational-basis index.
    """
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"register size must be in [1, {MAX_QUBITS}], got {n}")
    if not 0 <= qubit < n:
        raise ValueError(f"qubit index {qubit} out of range for {n} qubits")
    op = np.asarray(op, dtype=np.complex128)
    if op.shape != (2, 2):
        raise ValueError(f"expected a 2x2 operator, got shape {op.shape}")
    left = np.eye(2**qubit, dtype=np.complex128)
    right = np.eye(2 ** (n - 1 - qubit), dtype=np.complex128)
    return np.kron(left, np.kron(op, right))


def traceless_decompose(m: np.ndarray) -> tuple[np.ndarray, float]:
    """Split a Hermitian 2x2 matrix as ``m = d + c * 1`` with tr(d) = 0.

    Returns ``(d, c)`` where ``c = tr(m) / 2``.  Raises ``ValueError`` if
    ``m`` is not Hermitian within ``HERMITIAN_ATOL``.
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
    if not is_hermitian(m):
        raise ValueError("matrix is not Hermitian within tolerance")
    c = float(np.trace(m).real) / 2.0
    return m - c * IDENTITY, c


def bloch_decompose(m: np.ndarray) -> np.ndarray:
    """Coefficients ``(dx, dy, dz)`` of a traceless Hermitian 2x2 matrix.

    ``m = dx X + dy Y + dz Z`` with ``d_l = tr(sigma_l m) / 2``.  Raises
    ``ValueError`` if the trace exceeds ``HERMITIAN_ATOL``.
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
    if abs(np.trace(m)) > HERMITIAN_ATOL:
        raise ValueError("matrix has nonzero trace")
    return np.array([float(np.trace(p @ m).real) / 2.0 for p in PAULIS])


def bloch_matrix(bloch: np.ndarray) -> np.ndarray:
    """Inverse of :func:`bloch_decompose`: ``d . sigma`` for a coefficient triple."""
    bx, by, bz = np.asarray(bloch, dtype=float)
    return bx * SIGMA_X + by * SIGMA_Y + bz * SIGMA_Z


def _orthonormal_error(vectors: np.ndarray) -> float:
    gram = vectors.conj() @ vectors.T
    return max_abs(gram - np.eye(vectors.shape[0]))


def _complete_basis(rows: np.ndarray, dim: int) -> np.ndarray:
    """Extend orthonormal rows to a full basis of C^dim.

    Remaining directions are found by Gram-Schmidt against the canonical
    basis vectors in index order, which makes the completion deterministic.
    """
    basis = [row for row in rows]
    for k in range(dim):
        if len(basis) == dim:
            break
        v = np.zeros(dim, dtype=np.complex128)
        v[k] = 1.0
        # Orthogonalize twice; a second pass keeps the residual at machine
        # precision even when e_k is nearly inside the current span.
        for _ in range(2):
            for b in basis:
                v = v - np.vdot(b, v) * b
        norm = float(np.linalg.norm(v))
        if norm > 1e-8:
            basis.append(v / norm)
    if len(basis) != dim:
        raise ValueError("failed to complete an orthonormal basis")
    return np.array(basis)


def unitary_completion(
    sources: Sequence[np.ndarray], targets: Sequence[np.ndarray]
) -> np.ndarray:
    """Unitary ``U`` with ``U @ sources[i] = targets[i]`` for all ``i``.

    Both lists must be orthonormal within ``ORTHO_ATOL``.  The action on
    the orthogonal complement is fixed deterministically by completing both
    lists against the canonical basis in index order, so repeated calls
    yield the identical matrix.
    """
    src = np.array([np.asarray(v, dtype=np.complex128) for v in sources])
    tgt = np.array([np.asarray(v, dtype=np.complex128) for v in targets])
    if src.shape != tgt.shape:
        raise ValueError(
            f"sources and targets disagree in shape: {src.shape} vs {tgt.shape}"
        )
    if src.ndim != 2:
        raise ValueError("expected non-empty lists of vectors")
    dim = src.shape[1]
    if src.shape[0] > dim:
        raise ValueError("more vectors than the space dimension")
    for name, rows in (("sources", src), ("targets", tgt)):
        err = _orthonormal_error(rows)
        if err > ORTHO_ATOL:
            raise ValueError(f"{name} are not orthonormal (residual {err:.3e})")
    full_src = _complete_basis(src, dim)
    full_tgt = _complete_basis(tgt, dim)
    # U = sum_i |t_i><s_i| over the completed bases.
    return full_tgt.T @ full_src.conj()

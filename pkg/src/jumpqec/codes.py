"""Stabilizer-code synthesis for sets of detected error channels.

Two constructions cover every channel set:

* If, on each qubit, the backaction Bloch vectors of that qubit's channels
  span at most a plane, there is a single-qubit Hermitian involution
  anticommuting with all of them.  The tensor product of those involutions
  is one stabilizer generator whose +1 eigenspace encodes ``n - 1``
  logical qubits.
* Otherwise (some qubit carries a full rank-3 constraint set) the
  generalized erasure pair ``X^n, Z^n`` is used: each Pauli axis
  anticommutes with one of the two generators no matter what the
  backaction is.  This requires an even register and encodes ``n - 2``
  logical qubits.

Correctability of a code against a channel is the vanishing, on the
codespace, of every matrix element of the channel's traceless backaction
(a Knill-Laflamme-type condition for errors whose time and location are
known).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import ErrorChannel, jump_backaction
from .linalg import bloch_matrix, is_hermitian, max_abs, tensor_embed

__all__ = [
    "RankThreeError",
    "EvenQubitCountRequired",
    "StabilizerCode",
    "CorrectabilityReport",
    "generator_matrix",
    "null_space_involution",
    "codespace_basis",
    "build_code",
    "verify_correctability",
]

#: Relative singular-value threshold for the rank of a constraint set.
RANK_RTOL = 1e-9

#: Residual above which a codespace matrix element counts as nonzero.
CORRECTABILITY_ATOL = 1e-10


class CodeSynthesisError(Exception):
    """Base class for failures while constructing a stabilizer code."""


class RankThreeError(CodeSynthesisError):
    """Constraint Bloch vectors span all of R^3; no single involution exists."""


class EvenQubitCountRequired(CodeSynthesisError):
    """The X^n / Z^n construction only stabilizes even registers."""


@dataclass(frozen=True, eq=False)
class StabilizerCode:
    """A stabilizer codespace over ``n`` qubits.

    Attributes:
        n: physical qubit count.
        generators: tuple of generators; each is an ``(n, 3)`` array of
            unit Bloch vectors, one per qubit, and the generator matrix is
            the tensor product of the corresponding ``n_hat . sigma``
            involutions.
        codespace: ``(2**logical_count, 2**n)`` array whose rows form an
            orthonormal basis of the joint +1 eigenspace.
        logical_count: number of encoded qubits, ``n - len(generators)``.
    """

    n: int
    generators: tuple[np.ndarray, ...]
    codespace: np.ndarray
    logical_count: int

    def generator_matrices(self) -> list[np.ndarray]:
        return [generator_matrix(g) for g in self.generators]


def generator_matrix(generator: np.ndarray) -> np.ndarray:
    """Tensor product ``(n_1 . sigma) x ... x (n_n . sigma)`` of a generator row set."""
    generator = np.asarray(generator, dtype=float)
    out = np.array([[1.0 + 0j]])
    for row in generator:
        out = np.kron(out, bloch_matrix(row))
    return out


def null_space_involution(constraints: list[np.ndarray]) -> np.ndarray:
    """Unit Bloch vector orthogonal to every constraint vector.

    The corresponding involution ``n_hat . sigma`` then anticommutes with
    every constraint's ``d . sigma``.  Selection is deterministic: among
    the null directions, take the normalized projection of the earliest
    coordinate axis with a nonzero projection, sign-fixed so the first
    nonzero component is positive.

    Raises :class:`RankThreeError` when the constraints have numerical
    rank 3 (singular values below ``RANK_RTOL`` times the largest count
    as zero), in which case no such vector exists.
    """
    rows = np.array([np.asarray(c, dtype=float) for c in constraints], dtype=float)
    if rows.size == 0:
        rows = np.zeros((0, 3))
    if rows.ndim != 2 or rows.shape[1] != 3:
        raise ValueError("constraints must be 3-component Bloch vectors")

    if rows.shape[0] == 0:
        null_basis = np.eye(3)
    else:
        _, svals, vt = np.linalg.svd(rows)
        cutoff = RANK_RTOL * (svals[0] if svals.size else 0.0)
        rank = int(np.sum(svals > cutoff))
        if rank >= 3:
            raise RankThreeError(
                "constraint Bloch vectors span rank 3; no single-qubit "
                "involution anticommutes with all of them"
            )
        null_basis = vt[rank:].T  # columns: orthonormal basis of the null space

    for axis in range(3):
        # Projection of the axis unit vector onto the null space; its norm
        # is maximal among unit null vectors' |axis| components.
        proj = null_basis @ null_basis[axis, :]
        norm = float(np.linalg.norm(proj))
        if norm > 1e-9:
            vec = proj / norm
            for comp in vec:
                if abs(comp) > 1e-9:
                    if comp < 0:
                        vec = -vec
                    break
            return vec
    raise RankThreeError("null space is numerically empty")  # pragma: no cover


def codespace_basis(
    generators: tuple[np.ndarray, ...] | list[np.ndarray], n: int
) -> np.ndarray:
    """Orthonormal basis (rows) of the joint +1 eigenspace of the generators.

    Built from the projector ``prod_i (1 + G_i) / 2`` by pivoted
    Gram-Schmidt over its columns (largest remaining column first, ties by
    lowest index), so the basis is deterministic.
    """
    dim = 2**n
    mats = [generator_matrix(g) for g in generators]
    for g in mats:
        if not is_hermitian(g):
            raise ValueError("generator is not Hermitian")
        if max_abs(g @ g - np.eye(dim)) > 1e-12:
            raise ValueError("generator is not an involution")
    for i, a in enumerate(mats):
        for b in mats[i + 1 :]:
            if max_abs(a @ b - b @ a) > 1e-12:
                raise ValueError("generators do not commute")

    projector = np.eye(dim, dtype=np.complex128)
    for g in mats:
        projector = projector @ (np.eye(dim) + g) / 2.0
    size = int(round(float(np.trace(projector).real)))
    if size <= 0:
        raise ValueError("generators stabilize only the zero space")

    residual = projector.copy()
    basis = np.zeros((size, dim), dtype=np.complex128)
    for k in range(size):
        norms = np.linalg.norm(residual, axis=0)
        pivot = int(np.argmax(norms))
        v = residual[:, pivot] / norms[pivot]
        basis[k] = v
        residual -= np.outer(v, v.conj() @ residual)
    return basis


def build_code(
    channels: list[ErrorChannel] | tuple[ErrorChannel, ...], n: int
) -> StabilizerCode:
    """Synthesize a stabilizer code protecting against the given channels.

    Prefers the rate ``n - 1`` single-generator construction whenever every
    qubit's constraints fit in a plane; one rank-3 qubit forces the
    ``X^n, Z^n`` erasure pair for the whole register (rate ``n - 2``,
    raising :class:`EvenQubitCountRequired` for odd ``n``).

    Qubits with no channels contribute the z-axis involution; channels with
    vanishing traceless backaction impose no constraint.
    """
    per_qubit: dict[int, list[np.ndarray]] = {}
    for ch in channels:
        if not 0 <= ch.qubit < n:
            raise ValueError(f"channel qubit {ch.qubit} out of range for n={n}")
        bloch = jump_backaction(ch).bloch
        if max_abs(bloch) > 1e-12:
            per_qubit.setdefault(ch.qubit, []).append(bloch)
        else:
            per_qubit.setdefault(ch.qubit, [])

    axes = np.zeros((n, 3))
    rank3 = False
    for q in range(n):
        if q not in per_qubit:
            axes[q] = (0.0, 0.0, 1.0)
            continue
        try:
            axes[q] = null_space_involution(per_qubit[q])
        except RankThreeError:
            rank3 = True
            break

    if not rank3:
        generators: tuple[np.ndarray, ...] = (axes,)
        logical = n - 1
    else:
        if n % 2 != 0:
            raise EvenQubitCountRequired(
                f"rank-3 channel constraints need the X^n/Z^n construction, "
                f"which requires an even qubit count (got n={n})"
            )
        all_x = np.tile((1.0, 0.0, 0.0), (n, 1))
        all_z = np.tile((0.0, 0.0, 1.0), (n, 1))
        generators = (all_x, all_z)
        logical = n - 2

    basis = codespace_basis(generators, n)
    if basis.shape[0] != 2**logical:
        raise CodeSynthesisError(  # pragma: no cover
            f"codespace dimension {basis.shape[0]} != 2**{logical}"
        )
    frozen = []
    for g in generators:
        g = np.asarray(g, dtype=float)
        g.flags.writeable = False
        frozen.append(g)
    basis.flags.writeable = False
    return StabilizerCode(
        n=n, generators=tuple(frozen), codespace=basis, logical_count=logical
    )


@dataclass(frozen=True, eq=False)
class CorrectabilityReport:
    """Per-channel maxima of codespace backaction matrix elements."""

    residuals: tuple[float, ...]
    labels: tuple[str | int | None, ...]
    threshold: float = CORRECTABILITY_ATOL

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)

    @property
    def passed(self) -> bool:
        return all(r <= self.threshold for r in self.residuals)


def verify_correctability(
    code: StabilizerCode,
    channels: list[ErrorChannel] | tuple[ErrorChannel, ...],
) -> CorrectabilityReport:
    """Check ``<psi_i| D |psi_k> = 0`` on the codespace for every channel.

    ``D`` is the channel's traceless backaction embedded at its qubit; all
    basis pairs including ``i = k`` are checked.  For the two-generator
    erasure code each Pauli-axis term ``d_l sigma_l`` is additionally
    checked on its own, since the construction cancels the axes
    one generator at a time.
    """
    basis = code.codespace
    residuals = []
    labels = []
    for ch in channels:
        if not 0 <= ch.qubit < code.n:
            raise ValueError(f"channel qubit {ch.qubit} out of range for n={code.n}")
        ba = jump_backaction(ch)
        worst = _codespace_residual(basis, tensor_embed(ba.matrix, ch.qubit, code.n))
        if len(code.generators) == 2:
            for component, pauli in zip(ba.bloch, ("x", "y", "z")):
                axis_term = component * bloch_matrix(
                    {"x": (1, 0, 0), "y": (0, 1, 0), "z": (0, 0, 1)}[pauli]
                )
                worst = max(
                    worst,
                    _codespace_residual(
                        basis, tensor_embed(axis_term, ch.qubit, code.n)
                    ),
                )
        residuals.append(worst)
        labels.append(ch.label)
    return CorrectabilityReport(residuals=tuple(residuals), labels=tuple(labels))


def _codespace_residual(basis: np.ndarray, operator: np.ndarray) -> float:
    elements = basis.conj() @ operator @ basis.T
    return max_abs(elements)

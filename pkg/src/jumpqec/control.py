"""Driving Hamiltonian and jump-correction synthesis.

No-jump evolution drags codespace states via the traceless backaction of
each channel; the driving Hamiltonian built here adds the matching
coherent term so the two cancel on the codespace, leaving pure amplitude
decay (``nojump_invariance_check`` measures the residual, which is
machine-precision rather than O(dt^2)).  Detected jumps are undone by a
per-channel correction unitary that maps the jumped codespace isometrically
back onto itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .channels import (
    ErrorChannel,
    KrausSet,
    effective_jump_operator,
    jump_backaction,
)
from .codes import (
    CORRECTABILITY_ATOL,
    CorrectabilityReport,
    StabilizerCode,
    generator_matrix,
    verify_correctability,
)
from .linalg import (
    HERMITIAN_ATOL,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    is_hermitian,
    max_abs,
    tensor_embed,
    unitary_completion,
)

__all__ = [
    "CorrectabilityError",
    "Correction",
    "ControlPlan",
    "NoJumpInvariance",
    "sector_assignment",
    "driving_hamiltonian",
    "correction_unitary",
    "build_control_plan",
    "nojump_invariance_check",
]

#: Effective rate below which a channel never fires and has no correction.
NULL_CHANNEL_ATOL = 1e-12

_AXIS_PAULI = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


class CorrectabilityError(Exception):
    """The code does not satisfy the codespace backaction condition."""

    def __init__(self, message: str, report: CorrectabilityReport | None = None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True, eq=False)
class Correction:
    """Recovery unitary for one channel.

    ``null_channel`` marks channels with vanishing effective rate: no jump
    can ever fire, so the matrix is the identity placeholder.
    """

    matrix: np.ndarray
    null_channel: bool = False


@dataclass(frozen=True, eq=False)
class ControlPlan:
    """Synthesized feedback controls for a channel set on a code.

    Attributes:
        driving: Hermitian driving Hamiltonian (units of rate).
        corrections: map from each channel object to its :class:`Correction`.
        sector_map: axis letter -> generator index used to cancel that
            Pauli axis; the assignment is the same for every channel.
            ``None`` on the single-generator branch.
    """

    driving: np.ndarray
    corrections: dict[ErrorChannel, Correction]
    sector_map: dict[str, int] | None

    def correction_for(self, channel: ErrorChannel) -> Correction:
        return self.corrections[channel]


class NoJumpInvariance(NamedTuple):
    a: float
    residual: float


def sector_assignment(
    axis: str, generators: tuple[np.ndarray, ...] | list[np.ndarray]
) -> int:
    """Index of the generator that anticommutes with ``sigma_axis`` everywhere.

    Only defined for the generator pair ``(X^n, Z^n)`` in that order:
    the x axis maps to ``Z^n``, the z axis to ``X^n``, and the y axis
    (which anticommutes with both) is fixed to ``X^n`` for determinism.
    """
    if axis not in _AXIS_PAULI:
        raise ValueError(f"axis must be one of 'x', 'y', 'z', got {axis!r}")
    if len(generators) != 2 or not (
        np.array_equal(generators[0], np.tile((1.0, 0.0, 0.0), (len(generators[0]), 1)))
        and np.array_equal(
            generators[1], np.tile((0.0, 0.0, 1.0), (len(generators[1]), 1))
        )
    ):
        raise ValueError(
            "sector assignment applies only to the (X^n, Z^n) generator pair"
        )
    return {"x": 1, "y": 0, "z": 0}[axis]


def _offset_term(ch: ErrorChannel, n: int) -> np.ndarray:
    mu = ch.offset
    local = 0.5j * (np.conj(mu) * ch.operator - mu * ch.operator.conj().T)
    return tensor_embed(local, ch.qubit, n)


def _driving(
    channels: tuple[ErrorChannel, ...] | list[ErrorChannel], code: StabilizerCode
) -> np.ndarray:
    n = code.n
    dim = 2**n
    h = np.zeros((dim, dim), dtype=np.complex128)
    if len(code.generators) == 1:
        s_mat = generator_matrix(code.generators[0])
        for ch in channels:
            d_emb = tensor_embed(jump_backaction(ch).matrix, ch.qubit, n)
            h += 0.5j * (d_emb @ s_mat) + _offset_term(ch, n)
    else:
        s_mats = [generator_matrix(g) for g in code.generators]
        for ch in channels:
            bloch = jump_backaction(ch).bloch
            for component, axis in zip(bloch, "xyz"):
                if component == 0.0:
                    continue
                sigma_emb = tensor_embed(_AXIS_PAULI[axis], ch.qubit, n)
                h += 0.5j * component * (
                    sigma_emb @ s_mats[sector_assignment(axis, code.generators)]
                )
            h += _offset_term(ch, n)
    if not is_hermitian(h, tol=HERMITIAN_ATOL):
        raise ValueError(
            "driving Hamiltonian is not Hermitian; the code's generators do "
            "not anticommute with every channel backaction"
        )
    return h


def driving_hamiltonian(
    channels: tuple[ErrorChannel, ...] | list[ErrorChannel], code: StabilizerCode
) -> np.ndarray:
    """Hermitian Hamiltonian cancelling the no-jump backaction on the codespace.

    Each channel contributes the product of its embedded traceless
    backaction with the generator that anticommutes with it (axis by axis
    on the two-generator branch), plus an unraveling-offset term
    ``(i/2)(mu* E - mu E^dag)`` local to its qubit.

    Raises :class:`CorrectabilityError` when the code does not protect
    against the channels (the construction has no meaning then).
    """
    report = verify_correctability(code, channels)
    if not report.passed:
        raise CorrectabilityError(
            f"code does not satisfy the codespace backaction condition "
            f"(max residual {report.max_residual:.3e})",
            report,
        )
    return _driving(channels, code)


def _correction(ch: ErrorChannel, code: StabilizerCode) -> Correction:
    rate = jump_backaction(ch).rate
    dim = 2**code.n
    if rate <= NULL_CHANNEL_ATOL:
        return Correction(matrix=np.eye(dim, dtype=np.complex128), null_channel=True)
    jump = tensor_embed(effective_jump_operator(ch), ch.qubit, code.n)
    images = code.codespace @ jump.T / np.sqrt(rate)
    matrix = unitary_completion(images, code.codespace)
    matrix.flags.writeable = False
    return Correction(matrix=matrix, null_channel=False)


def correction_unitary(
    ch: ErrorChannel, code: StabilizerCode, n: int | None = None
) -> Correction:
    """Unitary undoing a detected jump of ``ch`` on the codespace.

    With ``A`` the embedded effective jump operator and ``c'`` the
    channel's rate, the images ``A|psi_i>/sqrt(c')`` of the codespace
    basis are orthonormal, and the returned unitary maps them back onto
    the basis: ``U A v = sqrt(c') v`` for every codespace vector ``v``.

    Channels with ``c' = 0`` never fire; the result is the identity with
    ``null_channel`` set.
    """
    if n is not None and n != code.n:
        raise ValueError(f"qubit count {n} does not match the code's n={code.n}")
    report = verify_correctability(code, [ch])
    if not report.passed:
        raise CorrectabilityError(
            f"channel {ch.label!r} is not correctable on this code "
            f"(residual {report.max_residual:.3e})",
            report,
        )
    return _correction(ch, code)


def build_control_plan(
    channels: tuple[ErrorChannel, ...] | list[ErrorChannel], code: StabilizerCode
) -> ControlPlan:
    """Assemble driving Hamiltonian, corrections, and sector map in one pass.

    Correctability is verified once for the whole channel set.
    """
    report = verify_correctability(code, channels)
    if not report.passed:
        raise CorrectabilityError(
            f"code does not satisfy the codespace backaction condition "
            f"(max residual {report.max_residual:.3e})",
            report,
        )
    driving = _driving(channels, code)
    driving.flags.writeable = False
    corrections = {ch: _correction(ch, code) for ch in channels}
    if len(code.generators) == 2:
        sector_map = {ax: sector_assignment(ax, code.generators) for ax in "xyz"}
    else:
        sector_map = None
    return ControlPlan(driving=driving, corrections=corrections, sector_map=sector_map)


def nojump_invariance_check(ks: KrausSet, code: StabilizerCode) -> NoJumpInvariance:
    """Measure how far no-jump evolution is from a scalar on the codespace.

    Returns ``a = 1 - (sum of channel rates) * dt / 2`` and the maximum
    over codespace basis vectors ``v`` of ``||Omega_0 v - a v||_2``.  When
    the Kraus set was built with the matching driving Hamiltonian the
    no-jump operator equals ``a`` plus terms annihilating the codespace,
    so the residual sits at machine precision.
    """
    total_rate = sum(jump_backaction(ch).rate for ch in ks.channels)
    a = 1.0 - total_rate * ks.dt / 2.0
    basis = code.codespace
    if basis.shape[1] != ks.no_jump.shape[0]:
        raise ValueError("code and Kraus set act on different register sizes")
    deviation = basis @ ks.no_jump.T - a * basis
    residual = float(np.max(np.linalg.norm(deviation, axis=1))) if basis.size else 0.0
    return NoJumpInvariance(a=a, residual=residual)

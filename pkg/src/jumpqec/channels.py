"""Detected error channels and their first-order Kraus unraveling.

A monitored decoherence channel acting on qubit ``j`` is described by a
2x2 operator ``E`` plus a complex detection offset ``mu = gamma * e^{i phi}``
that selects the unraveling (``gamma = 0`` is plain photon counting).  When
the detector fires, the register is hit by the jump operator
``(E + mu) sqrt(dt)`` embedded at the channel's qubit; between detections
the no-jump operator

    Omega_0 = 1 - dt * (i H + sum_ch (E^dag E / 2 + mu* E + |mu|^2 / 2))

applies.  This no-jump form is the unique first-order choice for which the
Kraus set is trace preserving up to O(dt^2) and the ensemble average
reproduces the offset-independent Lindblad equation.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    IDENTITY,
    bloch_decompose,
    is_hermitian,
    max_abs,
    tensor_embed,
    traceless_decompose,
)

__all__ = [
    "ErrorChannel",
    "Backaction",
    "KrausSet",
    "effective_jump_operator",
    "jump_backaction",
    "kraus_set",
    "cptp_defect",
    "lindblad_rhs",
]

#: Largest total per-step jump probability before a KrausSet is flagged.
WEAK_COUPLING_BUDGET = 0.1


def _frozen_array(value, dtype=np.complex128, shape=None) -> np.ndarray:
    arr = np.array(value, dtype=dtype)
    if shape is not None and arr.shape != shape:
        raise ValueError(f"expected array of shape {shape}, got {arr.shape}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class ErrorChannel:
    """One continuously detected decoherence channel on a single qubit.

    Attributes:
        qubit: register slot the 2x2 ``operator`` acts on.
        operator: arbitrary complex 2x2 jump operator, units sqrt(rate).
        gamma: amplitude of the unraveling offset, ``gamma >= 0``.
        phi: phase of the offset, stored in [0, 2 pi).
        label: opaque identifier used in logs and reports.
    """

    qubit: int
    operator: np.ndarray
    gamma: float = 0.0
    phi: float = 0.0
    label: str | int | None = None

    def __post_init__(self) -> None:
        if self.qubit < 0:
            raise ValueError(f"qubit index must be non-negative, got {self.qubit}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")
        object.__setattr__(
            self, "operator", _frozen_array(self.operator, shape=(2, 2))
        )
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "phi", float(self.phi) % (2.0 * math.pi))

    @property
    def offset(self) -> complex:
        """Complex unraveling offset ``mu = gamma * e^{i phi}``."""
        return self.gamma * cmath.exp(1j * self.phi)


@dataclass(frozen=True, eq=False)
class Backaction:
    """Traceless part of ``(E + mu)^dag (E + mu)`` for one channel.

    ``matrix = bloch . sigma`` is the piece whose codespace matrix elements
    must vanish for the jump to be exactly reversible; ``rate`` is the
    scalar remainder ``tr[(E + mu)^dag (E + mu)] / 2``, which equals the
    channel's jump rate on any correctable codespace.
    """

    matrix: np.ndarray
    bloch: np.ndarray
    rate: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "matrix", _frozen_array(self.matrix, shape=(2, 2)))
        object.__setattr__(
            self, "bloch", _frozen_array(self.bloch, dtype=float, shape=(3,))
        )


@dataclass(frozen=True, eq=False)
class KrausSet:
    """First-order Kraus decomposition of one time step of length ``dt``.

    ``jumps`` holds one ``(channel, operator)`` pair per channel, in input
    order; ``no_jump`` is the between-detections operator on the full
    register.  ``warnings`` is non-empty when the requested step violates
    the weak-coupling budget (the set is still usable).
    """

    dt: float
    no_jump: np.ndarray
    jumps: tuple[tuple[ErrorChannel, np.ndarray], ...]
    n: int
    warnings: tuple[str, ...] = field(default=())

    @property
    def channels(self) -> tuple[ErrorChannel, ...]:
        return tuple(ch for ch, _ in self.jumps)


def effective_jump_operator(channel: ErrorChannel) -> np.ndarray:
    """Single-qubit factor ``E + mu * 1`` of the channel's jump operator."""
    return channel.operator + channel.offset * IDENTITY


def jump_backaction(channel: ErrorChannel) -> Backaction:
    """Decompose ``(E + mu)^dag (E + mu)`` into traceless part plus rate."""
    a = effective_jump_operator(channel)
    matrix, rate = traceless_decompose(a.conj().T @ a)
    return Backaction(matrix=matrix, bloch=bloch_decompose(matrix), rate=rate)


def kraus_set(
    channels: list[ErrorChannel] | tuple[ErrorChannel, ...],
    hamiltonian: np.ndarray | None,
    n: int,
    dt: float,
) -> KrausSet:
    """Build the jump and no-jump operators for one step of length ``dt``.

    ``hamiltonian`` (``None`` means zero) must be Hermitian within 1e-12.
    A step whose worst-case total jump probability exceeds
    ``WEAK_COUPLING_BUDGET`` is flagged in ``warnings`` rather than
    rejected, since stressing the first-order scheme can be deliberate.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    dim = 2**n
    if hamiltonian is None:
        hamiltonian = np.zeros((dim, dim), dtype=np.complex128)
    hamiltonian = np.asarray(hamiltonian, dtype=np.complex128)
    if hamiltonian.shape != (dim, dim):
        raise ValueError(
            f"hamiltonian shape {hamiltonian.shape} does not match dimension {dim}"
        )
    if not is_hermitian(hamiltonian):
        raise ValueError("hamiltonian is not Hermitian within tolerance")

    sqrt_dt = math.sqrt(dt)
    jumps = []
    backaction_sum = np.zeros((dim, dim), dtype=np.complex128)
    probability_budget = 0.0
    for ch in channels:
        if ch.qubit >= n:
            raise ValueError(f"channel qubit {ch.qubit} out of range for n={n}")
        a = effective_jump_operator(ch)
        jumps.append((ch, _frozen_array(tensor_embed(a, ch.qubit, n) * sqrt_dt)))
        mu = ch.offset
        e = ch.operator
        local = 0.5 * (e.conj().T @ e) + np.conj(mu) * e + 0.5 * abs(mu) ** 2 * IDENTITY
        backaction_sum += tensor_embed(local, ch.qubit, n)
        ba = jump_backaction(ch)
        probability_budget += (ba.rate + float(np.abs(ba.bloch).sum())) * dt

    no_jump = np.eye(dim, dtype=np.complex128) - dt * (
        1j * hamiltonian + backaction_sum
    )
    warnings = ()
    if probability_budget > WEAK_COUPLING_BUDGET:
        warnings = (
            f"step size dt={dt} gives total jump probability bound "
            f"{probability_budget:.3g} > {WEAK_COUPLING_BUDGET}; "
            "first-order errors may be large",
        )
    return KrausSet(
        dt=float(dt),
        no_jump=_frozen_array(no_jump),
        jumps=tuple(jumps),
        n=n,
        warnings=warnings,
    )


def cptp_defect(ks: KrausSet) -> float:
    """Max-norm deviation of ``sum_k Omega_k^dag Omega_k`` from the identity.

    For the construction in :func:`kraus_set` the first-order terms cancel
    exactly, so the defect is quadratic in ``dt``.
    """
    dim = ks.no_jump.shape[0]
    total = ks.no_jump.conj().T @ ks.no_jump
    for _, op in ks.jumps:
        total = total + op.conj().T @ op
    return max_abs(total - np.eye(dim))


def lindblad_rhs(
    rho: np.ndarray,
    channels: list[ErrorChannel] | tuple[ErrorChannel, ...],
    hamiltonian: np.ndarray | None,
    n: int,
) -> np.ndarray:
    """Right-hand side of the register's Lindblad master equation.

    ``drho/dt = sum_ch E rho E^dag - {E^dag E, rho} / 2 - i [H, rho]`` with
    each channel operator embedded at its qubit.  The detection offsets do
    not appear: the averaged evolution is unraveling independent.
    """
    dim = 2**n
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (dim, dim):
        raise ValueError(f"density matrix shape {rho.shape} does not match n={n}")
    if max_abs(rho - rho.conj().T) > 1e-10 or abs(np.trace(rho) - 1.0) > 1e-10:
        raise ValueError("input is not a valid density matrix (Hermitian, trace 1)")
    if hamiltonian is None:
        hamiltonian = np.zeros((dim, dim), dtype=np.complex128)
    out = -1j * (hamiltonian @ rho - rho @ hamiltonian)
    for ch in channels:
        if ch.qubit >= n:
            raise ValueError(f"channel qubit {ch.qubit} out of range for n={n}")
        e = tensor_embed(ch.operator, ch.qubit, n)
        ee = e.conj().T @ e
        out = out + e @ rho @ e.conj().T - 0.5 * (ee @ rho + rho @ ee)
    return out

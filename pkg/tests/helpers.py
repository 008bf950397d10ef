"""Channel-set builders shared across the test modules."""

import numpy as np

from jumpqec import ErrorChannel, StabilizerCode, codespace_basis

SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)


def relaxation_channels(n, gamma=0.0, phi=0.0, kappa=1.0):
    """One lowering channel of strength kappa per qubit."""
    op = np.sqrt(kappa) * SIGMA_MINUS
    return tuple(
        ErrorChannel(qubit=q, operator=op, gamma=gamma, phi=phi, label=f"relax{q}")
        for q in range(n)
    )


def rank3_channels(n):
    """Three channels per qubit whose backaction axes span all of R^3.

    Each channel projects onto |0> from one Pauli eigenbasis, scaled so the
    total rate per qubit is 1 (each channel contributes 1/3).
    """
    scale = np.sqrt(2.0 / 3.0)
    zero = np.array([1.0, 0.0], dtype=complex)
    kets = {
        "x": np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0),
        "y": np.array([1.0, 1.0j], dtype=complex) / np.sqrt(2.0),
        "z": np.array([0.0, 1.0], dtype=complex),
    }
    channels = []
    for q in range(n):
        for axis, ket in kets.items():
            channels.append(
                ErrorChannel(
                    qubit=q,
                    operator=scale * np.outer(zero, ket.conj()),
                    gamma=0.0,
                    phi=0.0,
                    label=f"{axis}{q}",
                )
            )
    return tuple(channels)


def _disk_entry(rng):
    radius = np.sqrt(rng.uniform())
    angle = rng.uniform(0.0, 2.0 * np.pi)
    return radius * np.exp(1j * angle)


def random_channel_set(rng, n):
    """Random channels with entries in the unit disk, gamma in [0, 1].

    Odd registers get at most two channels per qubit so a single-generator
    code always exists; even registers may go up to three and land on the
    two-generator construction.
    """
    limit = 2 if n % 2 else 3
    channels = []
    for q in range(n):
        for c in range(rng.integers(1, limit + 1)):
            operator = np.array(
                [[_disk_entry(rng) for _ in range(2)] for _ in range(2)]
            )
            channels.append(
                ErrorChannel(
                    qubit=q,
                    operator=operator,
                    gamma=float(rng.uniform()),
                    phi=float(rng.uniform(0.0, 2.0 * np.pi)),
                    label=f"q{q}c{c}",
                )
            )
    return tuple(channels)


def random_suite(seed, count):
    """Deterministic list of (n, channels) pairs cycling small registers."""
    rng = np.random.default_rng(seed)
    sizes = [2, 3, 4, 6]
    return [
        (sizes[i % len(sizes)], random_channel_set(rng, sizes[i % len(sizes)]))
        for i in range(count)
    ]


def manual_code(generators, n):
    """StabilizerCode from explicit generator Bloch rows (bypasses synthesis)."""
    gens = tuple(np.asarray(g, dtype=float) for g in generators)
    basis = codespace_basis(gens, n)
    logical = int(round(np.log2(basis.shape[0])))
    return StabilizerCode(
        n=n, generators=gens, codespace=basis, logical_count=logical
    )

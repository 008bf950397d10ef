"""Step-loop kernels for the stochastic jump simulation.

Two implementations of the same per-step semantics: a numba-compiled
loop and a vectorized pure-numpy fallback.  Selection is via the
``JUMPQEC_BACKEND`` environment variable (``auto``, ``numba``, ``numpy``)
or an explicit ``backend=`` argument upstream.

Both consume the same pre-drawn uniform array, so a given backend is
bit-reproducible run to run.  Across backends the floating-point
reductions differ in the last bits (BLAS matvec versus gufunc matmul),
so cross-backend agreement is close but not bit-exact.

Per step: jump probabilities are the squared norms of each (possibly
correction-folded) jump operator applied to the state; one uniform
selects a jump by cumulative comparison, falling through to the no-jump
operator; the state is renormalized.  A total jump probability exceeding
1 + 1e-9 aborts with a negative status (the step size is too large).
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def wrap(func):
            return func

        if args and callable(args[0]):
            return args[0]
        return wrap


#: Total jump probability may exceed 1 by at most this before aborting.
PROBABILITY_SLACK = 1e-9


def resolve_backend(name: str | None = None) -> str:
    """Map a requested backend name (or the env default) to numba/numpy."""
    if name is None:
        name = os.environ.get("JUMPQEC_BACKEND", "auto")
    name = name.lower()
    if name == "auto":
        return "numba" if NUMBA_AVAILABLE else "numpy"
    if name == "numba":
        if not NUMBA_AVAILABLE:
            raise RuntimeError("numba backend requested but numba is not importable")
        return "numba"
    if name == "numpy":
        return "numpy"
    raise ValueError(f"unknown backend {name!r} (use auto, numba, or numpy)")


@njit(cache=True)
def _step_loop_numba(psi0, ops, no_jump, uniforms, sample_idx,
                     fid_out, cum_out, jump_steps, jump_channels, snap_out):
    steps = uniforms.shape[0]
    m = ops.shape[0]
    dim = psi0.shape[0]
    psi = psi0.copy()
    ref = psi0.copy()
    fid_out[0] = 1.0
    cum_out[0] = 0
    si = 0
    if sample_idx.shape[0] > 0 and sample_idx[0] == 0:
        snap_out[0] = psi
        si = 1
    jumps = 0
    probs = np.empty(m, dtype=np.float64)
    phis = np.empty((m, dim), dtype=np.complex128)
    for s in range(steps):
        total = 0.0
        for k in range(m):
            phi = np.dot(ops[k], psi)
            phis[k] = phi
            p = np.vdot(phi, phi).real
            probs[k] = p
            total += p
        if 1.0 - total < -PROBABILITY_SLACK:
            return -(s + 1)
        u = uniforms[s]
        chosen = -1
        acc = 0.0
        for k in range(m):
            acc += probs[k]
            if u < acc:
                chosen = k
                break
        if chosen >= 0:
            psi = phis[chosen].copy()
            jump_steps[jumps] = s
            jump_channels[jumps] = chosen
            jumps += 1
        else:
            psi = np.dot(no_jump, psi)
        nrm = np.sqrt(np.vdot(psi, psi).real)
        if nrm <= 0.0:
            return -(s + 1)
        psi = psi / nrm
        f = abs(np.vdot(ref, psi)) ** 2
        if f > 1.0:
            f = 1.0
        fid_out[s + 1] = f
        cum_out[s + 1] = jumps
        if si < sample_idx.shape[0] and sample_idx[si] == s + 1:
            snap_out[si] = psi
            si += 1
    return jumps


def _step_loop_numpy(psi0, ops, no_jump, uniforms, sample_idx,
                     fid_out, cum_out, jump_steps, jump_channels, snap_out):
    steps = uniforms.shape[0]
    m = ops.shape[0]
    psi = psi0.copy()
    ref = psi0
    fid_out[0] = 1.0
    cum_out[0] = 0
    si = 0
    if sample_idx.shape[0] > 0 and sample_idx[0] == 0:
        snap_out[0] = psi
        si = 1
    jumps = 0
    for s in range(steps):
        phis = ops @ psi
        probs = np.einsum("kd,kd->k", phis.conj(), phis).real
        acc = np.cumsum(probs)
        total = acc[-1] if m else 0.0
        if 1.0 - total < -PROBABILITY_SLACK:
            return -(s + 1)
        chosen = int(np.searchsorted(acc, uniforms[s], side="right")) if m else 0
        if chosen < m:
            psi = phis[chosen].copy()
            jump_steps[jumps] = s
            jump_channels[jumps] = chosen
            jumps += 1
        else:
            psi = no_jump @ psi
        nrm = np.sqrt(np.vdot(psi, psi).real)
        if nrm <= 0.0:
            return -(s + 1)
        psi = psi / nrm
        f = abs(np.vdot(ref, psi)) ** 2
        if f > 1.0:
            f = 1.0
        fid_out[s + 1] = f
        cum_out[s + 1] = jumps
        if si < sample_idx.shape[0] and sample_idx[si] == s + 1:
            snap_out[si] = psi
            si += 1
    return jumps


def run_steps(psi0, ops, no_jump, uniforms, sample_idx, backend: str):
    """Run the step loop on the chosen backend.

    Returns ``(status, fid, cumulative, jump_steps, jump_channels,
    snapshots)`` where ``status`` is the jump count, or ``-(step + 1)``
    when step ``step`` aborted on an invalid branch probability.
    Jump arrays are trimmed to the recorded length.
    """
    steps = uniforms.shape[0]
    dim = psi0.shape[0]
    fid = np.empty(steps + 1, dtype=np.float64)
    cum = np.zeros(steps + 1, dtype=np.int64)
    jump_steps = np.empty(steps, dtype=np.int64)
    jump_channels = np.empty(steps, dtype=np.int64)
    snapshots = np.empty((sample_idx.shape[0], dim), dtype=np.complex128)
    loop = _step_loop_numba if backend == "numba" else _step_loop_numpy
    status = loop(
        np.ascontiguousarray(psi0, dtype=np.complex128),
        np.ascontiguousarray(ops, dtype=np.complex128),
        np.ascontiguousarray(no_jump, dtype=np.complex128),
        uniforms,
        np.ascontiguousarray(sample_idx, dtype=np.int64),
        fid, cum, jump_steps, jump_channels, snapshots,
    )
    count = status if status >= 0 else 0
    return status, fid, cum, jump_steps[:count], jump_channels[:count], snapshots

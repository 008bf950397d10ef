import numpy as np
import pytest
from numpy.testing import assert_allclose

from jumpqec import SimConfig, fidelity, prepare, run_ensemble, run_trajectory, step
from jumpqec import TrajectoryState
from jumpqec._kernels import NUMBA_AVAILABLE, resolve_backend, run_steps
from jumpqec.trajectory import _trajectory_uniforms

from helpers import relaxation_channels

needs_numba = pytest.mark.skipif(not NUMBA_AVAILABLE, reason="numba not importable")


class TestResolveBackend:
    def test_auto_prefers_numba(self):
        expected = "numba" if NUMBA_AVAILABLE else "numpy"
        assert resolve_backend("auto") == expected

    def test_default_reads_environment(self, monkeypatch):
        monkeypatch.setenv("JUMPQEC_BACKEND", "numpy")
        assert resolve_backend() == "numpy"
        monkeypatch.delenv("JUMPQEC_BACKEND")
        assert resolve_backend() == ("numba" if NUMBA_AVAILABLE else "numpy")

    def test_explicit_numpy(self):
        assert resolve_backend("numpy") == "numpy"

    @needs_numba
    def test_explicit_numba(self):
        assert resolve_backend("numba") == "numba"

    def test_case_insensitive(self):
        assert resolve_backend("NumPy") == "numpy"

    def test_unknown_name_rejected(self):
        with pytest.raises(ValueError):
            resolve_backend("fortran")

    def test_unknown_env_value_rejected(self, monkeypatch):
        monkeypatch.setenv("JUMPQEC_BACKEND", "fortran")
        with pytest.raises(ValueError):
            resolve_backend()


@needs_numba
class TestCrossBackend:
    def _config(self):
        return SimConfig(
            n=2, channels=relaxation_channels(2, gamma=0.3), dt=0.02,
            duration=4.0, seed=5, trajectories=4,
        )

    def test_trajectory_agreement(self):
        cfg = self._config()
        rec_nb, log_nb = run_trajectory(cfg, 0, backend="numba")
        rec_np, log_np = run_trajectory(cfg, 0, backend="numpy")
        assert np.array_equal(rec_nb.jump_counts, rec_np.jump_counts)
        assert log_nb == log_np
        assert_allclose(rec_nb.mean_fidelity, rec_np.mean_fidelity, atol=1e-10)

    def test_ensemble_agreement(self):
        cfg = self._config()
        res_nb = run_ensemble(cfg, backend="numba")
        res_np = run_ensemble(cfg, backend="numpy")
        assert np.array_equal(res_nb.record.jump_counts, res_np.record.jump_counts)
        assert_allclose(
            res_nb.record.mean_fidelity, res_np.record.mean_fidelity, atol=1e-10
        )
        assert_allclose(res_nb.mean_density, res_np.mean_density, atol=1e-10)


class _Replay:
    """Generator stub that replays a fixed uniform array."""

    def __init__(self, values):
        self.values = iter(values)

    def random(self):
        return float(next(self.values))


@pytest.mark.parametrize(
    "backend",
    ["numpy", pytest.param("numba", marks=needs_numba)],
)
class TestKernelMatchesReference:
    def test_states_and_events(self, backend):
        cfg = SimConfig(
            n=2, channels=relaxation_channels(2, gamma=0.3), dt=0.02,
            duration=4.0, seed=13,
        )
        setup = prepare(cfg)
        uniforms = _trajectory_uniforms(cfg, 0)
        sample_idx = np.arange(cfg.steps + 1, dtype=np.int64)
        status, fid, cum, jsteps, jchans, snaps = run_steps(
            setup.initial, setup.applied_jumps, setup.kraus.no_jump,
            uniforms, sample_idx, backend,
        )
        assert status >= 0
        order = [ch for ch, _ in setup.kraus.jumps]
        ts = TrajectoryState(state=setup.initial.copy())
        rng = _Replay(uniforms)
        ref_fid = [1.0]
        ref_events = []
        for s in range(cfg.steps):
            ts, event = step(ts, setup.kraus, setup.plan, rng)
            if event is not None:
                ref_events.append((s, order.index(event)))
            ref_fid.append(fidelity(setup.initial, ts.state))
            assert_allclose(snaps[s + 1], ts.state, atol=1e-12)
        assert list(zip(jsteps, jchans)) == ref_events
        assert status == len(ref_events) == cum[-1]
        assert_allclose(fid, ref_fid, atol=1e-12)

    def test_no_channels(self, backend):
        dim = 4
        psi0 = np.zeros(dim, dtype=complex)
        psi0[0] = 1.0
        status, fid, cum, jsteps, jchans, snaps = run_steps(
            psi0,
            np.zeros((0, dim, dim), dtype=complex),
            np.eye(dim, dtype=complex),
            np.random.default_rng(1).random(50),
            np.array([0, 50], dtype=np.int64),
            backend,
        )
        assert status == 0
        assert np.all(fid == 1.0)
        assert np.all(cum == 0)
        assert_allclose(snaps[1], psi0, atol=1e-15)

    def test_overflow_status_flags_first_step(self, backend):
        psi0 = np.array([0.0, 1.0], dtype=complex)
        ops = np.array([[[0.0, 2.0], [0.0, 0.0]]], dtype=complex)
        status, *_ = run_steps(
            psi0, ops, np.eye(2, dtype=complex),
            np.full(10, 0.5), np.array([0], dtype=np.int64), backend,
        )
        assert status == -1

    def test_snapshot_grid_positions(self, backend):
        cfg = SimConfig(
            n=2, channels=relaxation_channels(2, gamma=0.3), dt=0.02,
            duration=0.2, seed=2,
        )
        setup = prepare(cfg)
        uniforms = _trajectory_uniforms(cfg, 0)
        sample_idx = np.array([0, 3, 7], dtype=np.int64)
        status, _fid, _cum, _js, _jc, snaps = run_steps(
            setup.initial, setup.applied_jumps, setup.kraus.no_jump,
            uniforms, sample_idx, backend,
        )
        assert status >= 0
        assert snaps.shape == (3, 4)
        assert_allclose(snaps[0], setup.initial, atol=1e-15)
        norms = np.linalg.norm(snaps, axis=1)
        assert_allclose(norms, 1.0, atol=1e-12)

"""Command-line frontend: JSON config in, reports and CSV out.

Subcommands:

* ``synthesize`` - build the code and driving Hamiltonian, print them,
  and write a JSON report.
* ``verify``     - check correctability, generator anticommutation, and
  no-jump codespace invariance; nonzero exit on any breach.
* ``simulate``   - run the trajectory ensemble and write the fidelity CSV.
* ``oracle-compare`` - trace distance between the ensemble mean and the
  master-equation integration, as CSV.

Exit codes: 0 success, 1 verification failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
import time as _time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .channels import ErrorChannel, jump_backaction, kraus_set
from .codes import (
    CORRECTABILITY_ATOL,
    CodeSynthesisError,
    generator_matrix,
    verify_correctability,
)
from .control import (
    CorrectabilityError,
    build_control_plan,
    nojump_invariance_check,
    sector_assignment,
)
from .linalg import ORTHO_ATOL, bloch_matrix, max_abs, tensor_embed
from .trajectory import (
    SimConfig,
    StepSizeError,
    master_equation_oracle,
    run_ensemble,
    simulation_code,
    trace_distance,
)

__all__ = [
    "ConfigError",
    "RunManifest",
    "parse_config",
    "canonical_config",
    "config_digest",
    "pauli_coefficients",
    "execute",
    "main",
]

#: Residual above which the no-jump operator fails to act as a scalar.
NOJUMP_ATOL = 1e-12

#: Pauli-product coefficients below this are dropped from listings.
PAULI_PRUNE_TOL = 1e-12

_TOP_KEYS = {
    "n",
    "dt",
    "duration",
    "seed",
    "trajectories",
    "feedback",
    "driving",
    "initial_state",
    "channels",
    "code_override",
}
_CHANNEL_KEYS = {"qubit", "label", "E", "gamma", "phi"}

_DEFAULT_OUTPUT = {
    "synthesize": "synthesize.json",
    "verify": "verify.json",
    "simulate": "fidelity.csv",
    "oracle-compare": "oracle_compare.csv",
}


class ConfigError(Exception):
    """The configuration document is malformed or violates the schema."""


@dataclass(frozen=True)
class RunManifest:
    """What a CLI invocation consumed and produced."""

    config_digest: str
    artifact_version: str
    outputs: tuple[str, ...]
    wall_time: float


def _require(doc: dict, key: str, kinds, where: str):
    if key not in doc:
        raise ConfigError(f"{where}: missing required field {key!r}")
    value = doc[key]
    if isinstance(value, bool) and bool not in (
        kinds if isinstance(kinds, tuple) else (kinds,)
    ):
        raise ConfigError(f"{where}: field {key!r} must not be a boolean")
    if not isinstance(value, kinds):
        raise ConfigError(f"{where}: field {key!r} has the wrong type")
    return value


def _optional(doc: dict, key: str, kinds, where: str, default):
    if key not in doc:
        return default
    return _require(doc, key, kinds, where)


def _complex_pair(value, where: str) -> complex:
    if (
        not isinstance(value, list)
        or len(value) != 2
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
    ):
        raise ConfigError(f"{where}: complex numbers are [re, im] pairs")
    return complex(value[0], value[1])


def _matrix_2x2(value, where: str) -> np.ndarray:
    if not isinstance(value, list) or len(value) != 2:
        raise ConfigError(f"{where}: must be a 2x2 array of [re, im] pairs")
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != 2:
            raise ConfigError(f"{where}: must be a 2x2 array of [re, im] pairs")
        rows.append([_complex_pair(v, f"{where}[{i}][{j}]") for j, v in enumerate(row)])
    return np.array(rows, dtype=np.complex128)


def _parse_channel(doc, index: int, n: int) -> ErrorChannel:
    where = f"channels[{index}]"
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: must be an object")
    unknown = set(doc) - _CHANNEL_KEYS
    if unknown:
        raise ConfigError(f"{where}: unknown field {sorted(unknown)[0]!r}")
    qubit = _require(doc, "qubit", int, where)
    if not 0 <= qubit < n:
        raise ConfigError(f"{where}.qubit: index {qubit} out of range for n={n}")
    operator = _matrix_2x2(_require(doc, "E", list, where), f"{where}.E")
    gamma = float(_optional(doc, "gamma", (int, float), where, 0.0))
    if gamma < 0:
        raise ConfigError(f"{where}.gamma: must be nonnegative")
    phi = float(_optional(doc, "phi", (int, float), where, 0.0))
    label = _optional(doc, "label", (str, int), where, index)
    try:
        return ErrorChannel(
            qubit=qubit, operator=operator, gamma=gamma, phi=phi, label=label
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def parse_config(text: str) -> SimConfig:
    """Parse and validate a JSON configuration document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise ConfigError("config: top level must be an object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"config: unknown field {sorted(unknown)[0]!r}")

    n = _require(doc, "n", int, "config")
    dt = float(_require(doc, "dt", (int, float), "config"))
    duration = float(_require(doc, "duration", (int, float), "config"))
    channels_doc = _require(doc, "channels", list, "config")
    channels = tuple(
        _parse_channel(ch, i, n) for i, ch in enumerate(channels_doc)
    )

    seed = _optional(doc, "seed", int, "config", 0)
    trajectories = _optional(doc, "trajectories", int, "config", 1)
    feedback = _optional(doc, "feedback", bool, "config", True)
    driving = _optional(doc, "driving", bool, "config", True)

    initial_doc = _optional(doc, "initial_state", (int, list), "config", 0)
    if isinstance(initial_doc, list):
        initial = tuple(
            _complex_pair(v, f"initial_state[{i}]") for i, v in enumerate(initial_doc)
        )
    else:
        initial = initial_doc

    override = None
    if "code_override" in doc:
        gens_doc = _require(doc, "code_override", list, "config")
        gens = []
        for gi, gen in enumerate(gens_doc):
            where = f"code_override[{gi}]"
            if not isinstance(gen, list) or len(gen) != n:
                raise ConfigError(f"{where}: needs one [x, y, z] triple per qubit")
            rows = []
            for qi, row in enumerate(gen):
                if (
                    not isinstance(row, list)
                    or len(row) != 3
                    or not all(
                        isinstance(v, (int, float)) and not isinstance(v, bool)
                        for v in row
                    )
                ):
                    raise ConfigError(f"{where}[{qi}]: needs an [x, y, z] triple")
                rows.append([float(v) for v in row])
            gens.append(np.array(rows))
        override = tuple(gens)

    try:
        return SimConfig(
            n=n,
            channels=channels,
            dt=dt,
            duration=duration,
            seed=seed,
            feedback_enabled=feedback,
            driving_enabled=driving,
            trajectories=trajectories,
            initial_state=initial,
            code_override=override,
        )
    except ValueError as exc:
        raise ConfigError(f"config: {exc}") from exc


def canonical_config(cfg: SimConfig) -> dict:
    """Config as a JSON-ready dict that parses back to the same SimConfig."""
    doc = {
        "n": cfg.n,
        "dt": cfg.dt,
        "duration": cfg.duration,
        "seed": cfg.seed,
        "trajectories": cfg.trajectories,
        "feedback": cfg.feedback_enabled,
        "driving": cfg.driving_enabled,
        "channels": [
            {
                "qubit": ch.qubit,
                "label": ch.label,
                "E": [
                    [[val.real, val.imag] for val in row] for row in ch.operator
                ],
                "gamma": ch.gamma,
                "phi": ch.phi,
            }
            for ch in cfg.channels
        ],
    }
    if isinstance(cfg.initial_state, int):
        doc["initial_state"] = cfg.initial_state
    else:
        doc["initial_state"] = [[c.real, c.imag] for c in cfg.initial_state]
    if cfg.code_override is not None:
        doc["code_override"] = [
            [[float(v) for v in row] for row in gen] for gen in cfg.code_override
        ]
    return doc


def config_digest(cfg: SimConfig) -> str:
    payload = json.dumps(canonical_config(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()


def pauli_coefficients(
    matrix: np.ndarray, tol: float = PAULI_PRUNE_TOL
) -> list[tuple[str, complex]]:
    """Nonzero coefficients of a matrix in the tensor-Pauli basis.

    Labels are strings over ``IXYZ`` with the leftmost letter acting on
    qubit 0.  Recursion over the leading qubit with quadrant averages;
    branches whose block is entirely below ``tol`` are pruned.
    """
    out: list[tuple[str, complex]] = []

    def descend(block: np.ndarray, label: str):
        if block.shape[0] == 1:
            value = complex(block[0, 0])
            if abs(value) > tol:
                out.append((label, value))
            return
        half = block.shape[0] // 2
        a = block[:half, :half]
        b = block[:half, half:]
        c = block[half:, :half]
        d = block[half:, half:]
        for sub, letter in (
            ((a + d) / 2.0, "I"),
            ((b + c) / 2.0, "X"),
            (1j * (b - c) / 2.0, "Y"),
            ((a - d) / 2.0, "Z"),
        ):
            if max_abs(sub) > tol:
                descend(sub, label + letter)

    descend(np.asarray(matrix, dtype=np.complex128), "")
    return out


def _format_coeff(value: complex) -> str:
    if abs(value.imag) <= PAULI_PRUNE_TOL:
        return f"{value.real:+.6g}"
    return f"({value.real:+.6g}{value.imag:+.6g}j)"


def _anticommutation_residual(code, channels) -> float:
    """Max norm of {generator, embedded backaction} over channels (and axes)."""
    worst = 0.0
    if len(code.generators) == 1:
        s_mat = generator_matrix(code.generators[0])
        for ch in channels:
            d_emb = tensor_embed(jump_backaction(ch).matrix, ch.qubit, code.n)
            worst = max(worst, max_abs(s_mat @ d_emb + d_emb @ s_mat))
    else:
        s_mats = [generator_matrix(g) for g in code.generators]
        axes = {"x": (1.0, 0, 0), "y": (0, 1.0, 0), "z": (0, 0, 1.0)}
        for ch in channels:
            bloch = jump_backaction(ch).bloch
            for component, axis in zip(bloch, "xyz"):
                term = component * tensor_embed(
                    bloch_matrix(axes[axis]), ch.qubit, code.n
                )
                s_mat = s_mats[sector_assignment(axis, code.generators)]
                worst = max(worst, max_abs(s_mat @ term + term @ s_mat))
    return worst


def _write_text(path: str, content: str, force: bool) -> str:
    import os

    if os.path.exists(path) and not force:
        raise ConfigError(
            f"output file {path!r} exists; pass --force to overwrite"
        )
    with open(path, "w") as handle:
        handle.write(content)
    return path


def _cmd_synthesize(cfg: SimConfig, output: str, force: bool) -> tuple[int, list[str]]:
    code = simulation_code(cfg)
    plan = build_control_plan(cfg.channels, code)
    print(f"qubits: {cfg.n}")
    print(f"logical qubits: {code.logical_count}")
    for gi, gen in enumerate(code.generators):
        rows = "  ".join(
            f"q{q}:({row[0]:+.6g},{row[1]:+.6g},{row[2]:+.6g})"
            for q, row in enumerate(gen)
        )
        print(f"generator {gi}: {rows}")
    terms = pauli_coefficients(plan.driving)
    if terms:
        print("driving Hamiltonian (Pauli coefficients):")
        for label, value in terms:
            print(f"  {label}: {_format_coeff(value)}")
    else:
        print("driving Hamiltonian: 0")
    report = {
        "n": cfg.n,
        "logical_count": code.logical_count,
        "generators": [np.asarray(g).tolist() for g in code.generators],
        "hamiltonian": [
            {"pauli": label, "re": value.real, "im": value.imag}
            for label, value in terms
        ],
        "sector_map": plan.sector_map,
        "config_digest": config_digest(cfg),
        "artifact_version": __version__,
    }
    path = _write_text(output, json.dumps(report, indent=2, sort_keys=True) + "\n", force)
    return 0, [path]


def _cmd_verify(cfg: SimConfig, output: str, force: bool) -> tuple[int, list[str]]:
    code = simulation_code(cfg)
    correct = verify_correctability(code, cfg.channels)
    checks = {
        "correctability": {
            "max_residual": correct.max_residual,
            "threshold": CORRECTABILITY_ATOL,
            "per_channel": [
                {"label": label, "residual": residual}
                for label, residual in zip(correct.labels, correct.residuals)
            ],
            "passed": correct.passed,
        }
    }
    anti = _anticommutation_residual(code, cfg.channels)
    checks["anticommutation"] = {
        "max_residual": anti,
        "threshold": ORTHO_ATOL,
        "passed": anti <= ORTHO_ATOL,
    }
    nojump = None
    if correct.passed:
        plan = build_control_plan(cfg.channels, code)
        hamiltonian = plan.driving if cfg.driving_enabled else None
        ks = kraus_set(cfg.channels, hamiltonian, cfg.n, cfg.dt)
        nojump = nojump_invariance_check(ks, code)
        checks["nojump_invariance"] = {
            "a": nojump.a,
            "residual": nojump.residual,
            "threshold": NOJUMP_ATOL,
            "passed": nojump.residual <= NOJUMP_ATOL,
        }
    else:
        checks["nojump_invariance"] = {
            "skipped": "correctability failed; controls not synthesized",
            "passed": False,
        }
    passed = all(entry["passed"] for entry in checks.values())
    print(f"logical qubits: {code.logical_count}")
    for name, entry in checks.items():
        verdict = "PASS" if entry["passed"] else "FAIL"
        if "max_residual" in entry:
            detail = f"max residual {entry['max_residual']:.3e} vs {entry['threshold']:.0e}"
        elif "residual" in entry:
            detail = (
                f"a={entry['a']:.12g}, residual {entry['residual']:.3e} "
                f"vs {entry['threshold']:.0e}"
            )
        else:
            detail = entry.get("skipped", "")
        print(f"{name}: {verdict} ({detail})")
    report = {
        "passed": passed,
        "logical_count": code.logical_count,
        "checks": checks,
        "config_digest": config_digest(cfg),
        "artifact_version": __version__,
    }
    path = _write_text(output, json.dumps(report, indent=2, sort_keys=True) + "\n", force)
    return (0 if passed else 1), [path]


def _cmd_simulate(cfg: SimConfig, output: str, force: bool) -> tuple[int, list[str]]:
    result = run_ensemble(cfg, collect_density=False)
    record = result.record
    lines = ["time,mean_fidelity,std_fidelity,cumulative_jumps"]
    for t, mean, std, jumps in zip(
        record.times, record.mean_fidelity, record.std_fidelity, record.jump_counts
    ):
        lines.append(f"{t:.17g},{mean:.17g},{std:.17g},{int(jumps)}")
    path = _write_text(output, "\n".join(lines) + "\n", force)
    print(
        f"{cfg.trajectories} trajectories, {cfg.steps} steps: "
        f"final mean fidelity {record.mean_fidelity[-1]:.6f}, "
        f"{int(record.jump_counts[-1])} jumps total"
    )
    return 0, [path]


def _cmd_oracle_compare(cfg: SimConfig, output: str, force: bool) -> tuple[int, list[str]]:
    result = run_ensemble(cfg, collect_density=True)
    times, oracle = master_equation_oracle(cfg)
    if result.density_times.shape != times.shape or np.any(
        result.density_times != times
    ):
        raise RuntimeError("ensemble and oracle sampled different time grids")
    distances = [
        trace_distance(result.mean_density[i], oracle[i])
        for i in range(times.shape[0])
    ]
    lines = ["time,trace_distance"]
    for t, dist in zip(times, distances):
        lines.append(f"{t:.17g},{dist:.17g}")
    path = _write_text(output, "\n".join(lines) + "\n", force)
    print(
        f"max trace distance {max(distances):.6f} over {len(distances)} sampled times"
    )
    return 0, [path]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jumpqec",
        description="Stabilizer-code synthesis and jump-trajectory simulation "
        "for continuously detected error channels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("synthesize", "build the code and driving Hamiltonian"),
        ("verify", "check correctability and codespace invariance"),
        ("simulate", "run the trajectory ensemble, write fidelity CSV"),
        ("oracle-compare", "trace distance of ensemble mean vs. master equation"),
    ):
        cmd = sub.add_parser(name, help=helptext)
        cmd.add_argument("--config", required=True, help="JSON config path")
        cmd.add_argument("--output", help="output file path")
        cmd.add_argument("--trajectories", type=int, help="override trajectory count")
        cmd.add_argument("--seed", type=int, help="override RNG seed")
        cmd.add_argument("--dt", type=float, help="override time step")
        cmd.add_argument(
            "--no-feedback", action="store_true", help="disable jump corrections"
        )
        cmd.add_argument(
            "--no-driving", action="store_true", help="disable the driving Hamiltonian"
        )
        cmd.add_argument(
            "--force", action="store_true", help="overwrite existing output files"
        )
    return parser


_COMMANDS = {
    "synthesize": _cmd_synthesize,
    "verify": _cmd_verify,
    "simulate": _cmd_simulate,
    "oracle-compare": _cmd_oracle_compare,
}


def execute(argv: list[str]) -> tuple[int, RunManifest | None]:
    """Run one CLI invocation; returns (exit code, manifest or None)."""
    started = _time.monotonic()
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return (exc.code if isinstance(exc.code, int) else 2), None

    try:
        with open(args.config) as handle:
            text = handle.read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2, None

    try:
        cfg = parse_config(text)
        overrides = {}
        if args.trajectories is not None:
            overrides["trajectories"] = args.trajectories
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.dt is not None:
            overrides["dt"] = args.dt
        if args.no_feedback:
            overrides["feedback_enabled"] = False
        if args.no_driving:
            overrides["driving_enabled"] = False
        if overrides:
            cfg = dataclasses.replace(cfg, **overrides)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2, None

    output = args.output or _DEFAULT_OUTPUT[args.command]
    try:
        exit_code, outputs = _COMMANDS[args.command](cfg, output, args.force)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2, None
    except CorrectabilityError as exc:
        print(f"error: CorrectabilityError: {exc}", file=sys.stderr)
        return 1, None
    except (CodeSynthesisError, StepSizeError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2, None

    manifest = RunManifest(
        config_digest=config_digest(cfg),
        artifact_version=__version__,
        outputs=tuple(outputs),
        wall_time=_time.monotonic() - started,
    )
    return exit_code, manifest


def main() -> None:
    sys.exit(execute(sys.argv[1:])[0])


if __name__ == "__main__":
    main()

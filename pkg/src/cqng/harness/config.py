"""Experiment configuration: JSON schema, validation and problem construction."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from importlib import resources
from pathlib import Path
from typing import Any

from ..ansatz import build_from_spec
from ..circuit import Circuit
from ..optim import OptimizerConfig
from ..pauli import Observable, example1_hamiltonian, heisenberg_hamiltonian, load_hamiltonian

EXAMPLE1_THETA0 = (-0.2, -0.2, 0.0)
_TOP_KEYS = {
    "name", "hamiltonian", "ansatz", "optimizer", "optimizers", "shots", "seeds",
    "iterations", "theta0", "init", "diagnostics", "output_dir", "description",
}
_OPT_KEYS = {f.name for f in fields(OptimizerConfig)} | {"lambda", "λ", "alpha_0", "beta_0"}


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class Diagnostics:
    conjugacy: bool = False
    fidelity: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    hamiltonian: dict
    ansatz: dict
    optimizers: tuple[OptimizerConfig, ...]
    shots: int | None = None
    seeds: tuple[int, ...] = (0,)
    iterations: int = 100
    theta0: tuple[float, ...] | None = None
    init_range: tuple[float, float] = (-math.pi / 2, math.pi / 2)
    diagnostics: Diagnostics = field(default_factory=Diagnostics)
    output_dir: str | None = None
    base_dir: str = "."

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "hamiltonian": self.hamiltonian,
            "ansatz": self.ansatz,
            "optimizers": [asdict(o) for o in self.optimizers],
            "shots": "exact" if self.shots is None else self.shots,
            "seeds": list(self.seeds),
            "iterations": self.iterations,
            "init": {"low": self.init_range[0], "high": self.init_range[1]},
            "diagnostics": asdict(self.diagnostics),
        }
        if self.theta0 is not None:
            out["theta0"] = list(self.theta0)
        if self.output_dir is not None:
            out["output_dir"] = self.output_dir
        return out

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def with_optimizers(self, optimizers) -> "ExperimentConfig":
        return replace(self, optimizers=tuple(optimizers))


def _require(d: dict, key: str, path: str):
    if key not in d:
        raise ConfigError(f"{path}.{key}" if path else key, "missing required field")
    return d[key]


def _number(value, path: str, positive=False, nonneg=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(path, "must be finite")
    if positive and value <= 0:
        raise ConfigError(path, "must be > 0")
    if nonneg and value < 0:
        raise ConfigError(path, "must be >= 0")
    return int(value) if integer else float(value)


def parse_optimizer(d: dict, path: str) -> OptimizerConfig:
    if not isinstance(d, dict):
        raise ConfigError(path, "expected an object")
    unknown = set(d) - _OPT_KEYS
    if unknown:
        raise ConfigError(path, f"unknown fields {sorted(unknown)}")
    d = dict(d)
    for alias, key in (("lambda", "lam"), ("λ", "lam"), ("alpha_0", "alpha0"), ("beta_0", "beta0")):
        if alias in d:
            d[key] = d.pop(alias)
    kind = _require(d, "kind", path)
    kw: dict[str, Any] = {"kind": kind}
    for key in ("eta", "lam", "alpha0", "beta0"):
        if key in d:
            kw[key] = _number(d[key], f"{path}.{key}")
    if "subproblem_max_evals" in d:
        kw["subproblem_max_evals"] = _number(
            d["subproblem_max_evals"], f"{path}.subproblem_max_evals", integer=True
        )
    if "alpha_min" in d:
        kw["alpha_min"] = None if d["alpha_min"] is None else _number(d["alpha_min"], f"{path}.alpha_min")
    for key in ("metric_mode", "update_rule", "subproblem_method", "label"):
        if key in d:
            kw[key] = d[key]
    try:
        return OptimizerConfig(**kw)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


def parse_config(raw: dict, base_dir: str | Path = ".") -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "expected a JSON object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError("<root>", f"unknown fields {sorted(unknown)}")
    ham = _require(raw, "hamiltonian", "")
    ans = _require(raw, "ansatz", "")
    for key, spec in (("hamiltonian", ham), ("ansatz", ans)):
        if not isinstance(spec, dict) or "type" not in spec:
            raise ConfigError(f"{key}.type", "missing required field")

    if "optimizers" in raw:
        opts_raw = raw["optimizers"]
        if not isinstance(opts_raw, list) or not opts_raw:
            raise ConfigError("optimizers", "expected a nonempty list")
        optimizers = tuple(parse_optimizer(o, f"optimizers[{k}]") for k, o in enumerate(opts_raw))
    else:
        optimizers = (parse_optimizer(_require(raw, "optimizer", ""), "optimizer"),)

    shots_raw = raw.get("shots", "exact")
    if shots_raw in ("exact", None):
        shots = None
    else:
        shots = _number(shots_raw, "shots", positive=True, integer=True)

    seeds_raw = raw.get("seeds", [0])
    if isinstance(seeds_raw, int) and not isinstance(seeds_raw, bool):
        seeds_raw = list(range(seeds_raw))
    if not isinstance(seeds_raw, list) or not seeds_raw:
        raise ConfigError("seeds", "expected a nonempty list of integers (or a count)")
    seeds = tuple(_number(s, f"seeds[{k}]", nonneg=True, integer=True) for k, s in enumerate(seeds_raw))

    iterations = _number(raw.get("iterations", 100), "iterations", nonneg=True, integer=True)

    theta0 = raw.get("theta0")
    if theta0 is not None:
        if not isinstance(theta0, list):
            raise ConfigError("theta0", "expected a list of numbers")
        theta0 = tuple(_number(x, f"theta0[{k}]") for k, x in enumerate(theta0))

    init = raw.get("init", {})
    low = _number(init.get("low", -math.pi / 2), "init.low")
    high = _number(init.get("high", math.pi / 2), "init.high")
    if not low < high:
        raise ConfigError("init", "low must be < high")

    diag_raw = raw.get("diagnostics", {})
    if not isinstance(diag_raw, dict):
        raise ConfigError("diagnostics", "expected an object")
    diagnostics = Diagnostics(
        conjugacy=bool(diag_raw.get("conjugacy", False)),
        fidelity=bool(diag_raw.get("fidelity", True)),
    )

    cfg = ExperimentConfig(
        name=str(raw.get("name", "experiment")),
        hamiltonian=dict(ham),
        ansatz=dict(ans),
        optimizers=optimizers,
        shots=shots,
        seeds=seeds,
        iterations=iterations,
        theta0=theta0,
        init_range=(low, high),
        diagnostics=diagnostics,
        output_dir=raw.get("output_dir"),
        base_dir=str(base_dir),
    )
    circuit, obs = build_problem(cfg)
    if theta0 is not None and len(theta0) != circuit.n_params:
        raise ConfigError("theta0", f"has {len(theta0)} entries, ansatz has {circuit.n_params} parameters")
    return cfg


def load_config(path) -> ExperimentConfig:
    """Load a JSON experiment file; bare names fall back to the bundled configs."""
    path = Path(path)
    if not path.exists():
        bundled = bundled_config_path(path.name)
        if bundled is None:
            raise FileNotFoundError(f"config {str(path)!r} not found")
        path = bundled
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError("<root>", f"invalid JSON: {exc}") from None
    return parse_config(raw, path.parent)


def bundled_config_path(name: str) -> Path | None:
    if not name.endswith(".json"):
        name += ".json"
    candidate = resources.files("cqng") / "configs" / name
    return Path(str(candidate)) if candidate.is_file() else None


def bundled_configs() -> list[str]:
    root = resources.files("cqng") / "configs"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".json"))


def build_hamiltonian(spec: dict, base_dir: str | Path = ".") -> Observable:
    kind = spec.get("type")
    try:
        if kind == "example1":
            return example1_hamiltonian(float(spec.get("h", 0.4)), float(spec.get("J", 0.2)))
        if kind == "heisenberg":
            return heisenberg_hamiltonian(
                int(_require(spec, "n", "hamiltonian")),
                float(spec.get("J", -1.0)),
                float(spec.get("h", -1.0)),
            )
        if kind == "file":
            path = Path(_require(spec, "path", "hamiltonian"))
            if not path.is_absolute():
                path = Path(base_dir) / path
            if not path.exists():
                raise ConfigError("hamiltonian.path", f"file {str(path)!r} not found")
            return load_hamiltonian(path)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("hamiltonian", str(exc)) from None
    raise ConfigError("hamiltonian.type", f"unknown Hamiltonian type {kind!r}")


def build_ansatz(spec: dict) -> Circuit:
    try:
        return build_from_spec(spec)
    except KeyError as exc:
        raise ConfigError(f"ansatz.{exc.args[0]}", "missing required field") from None
    except ValueError as exc:
        raise ConfigError("ansatz", str(exc)) from None


def build_problem(cfg: ExperimentConfig) -> tuple[Circuit, Observable]:
    obs = build_hamiltonian(cfg.hamiltonian, cfg.base_dir)
    circuit = build_ansatz(cfg.ansatz)
    if circuit.n_qubits != obs.n_qubits:
        raise ConfigError(
            "ansatz",
            f"ansatz has {circuit.n_qubits} qubits but the Hamiltonian has {obs.n_qubits}",
        )
    return circuit, obs

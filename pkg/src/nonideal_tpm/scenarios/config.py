"""Scenario configuration: JSON schema, validation and object builders.

Energies are in units of the system gap ``e_s`` unless given explicitly.
A config looks like::

    {
      "system":   {"e_s": 1.0, "beta_s": 0.0333, "energies": null},
      "pointer":  {"n_qubits": 3, "e_p": 0.1, "ratios": [1, 150, 300]},
      "process":  {"kind": "rabi", "thetas": [3.14159], "omega": 1.0},
      "channels": {"forward": "minimal_energy", "backward": "minimal_energy"},
      "outputs":  {"csv": "out.csv", "quantities": ["w_ideal", "w_nonid", "deviation"]},
      "mc":       {"samples": 1000000, "seed": 7}
    }

``pointer`` takes exactly one of ``beta_p``, ``ratio`` or ``ratios``
(``ratio = beta_p / beta_s``) and either ``n_qubits`` + ``e_p`` or an
explicit ``energies`` list.  ``process`` takes one of ``theta``, ``thetas``
or ``theta_grid`` (``{"start", "stop", "num"}``) for ``kind = "rabi"``;
``kind = "custom"`` reads ``unitary_file`` (JSON ``{"real": [[...]],
"imag": [[...]]}``, path relative to the config file).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import ConfigError
from ..linalg import is_unitary
from ..measurement import (
    AssignmentMatrix,
    PointerModel,
    assignment_min_invasive,
    assignment_minimal_energy,
)
from ..thermo import HermitianOperator
from ..tpm import Process, fourier_unitary
from .rabi import qubit_hamiltonian, rabi_process

PROCESS_KINDS = ("rabi", "fourier", "custom")
CHANNEL_KINDS = ("minimal_energy", "min_invasive")
QUANTITIES = (
    "w_ideal",
    "w_nonid",
    "deviation",
    "deviation_bound",
    "c_max",
    "chi",
    "jarzynski",
    "exp_minus_beta_df",
    "delta_e_nonid",
    "de_meas0",
    "de_meas_f",
    "de_tpm",
    "de_cool",
    "mean_sigma",
    "crooks_violation",
    "delta_s0",
    "fannes_bound",
)
DEFAULT_QUANTITIES = ("w_ideal", "w_nonid", "deviation")


@dataclass(frozen=True)
class SystemConfig:
    beta_s: float
    e_s: float = 1.0
    energies: Optional[tuple] = None

    @property
    def d_s(self) -> int:
        return 2 if self.energies is None else len(self.energies)


@dataclass(frozen=True)
class PointerConfig:
    ratios: tuple
    n_qubits: Optional[int] = 3
    e_p: float = 0.1
    energies: Optional[tuple] = None


@dataclass(frozen=True)
class ProcessConfig:
    kind: str
    thetas: tuple = ()
    omega: float = 1.0
    unitary: Optional[tuple] = None


@dataclass(frozen=True)
class ChannelConfig:
    forward: str = "minimal_energy"
    backward: str = "minimal_energy"


@dataclass(frozen=True)
class OutputConfig:
    csv: Optional[str] = None
    quantities: tuple = DEFAULT_QUANTITIES


@dataclass(frozen=True)
class MCConfig:
    samples: int
    seed: int


@dataclass(frozen=True)
class ScenarioConfig:
    system: SystemConfig
    pointer: PointerConfig
    process: ProcessConfig
    channels: ChannelConfig = ChannelConfig()
    outputs: OutputConfig = OutputConfig()
    mc: Optional[MCConfig] = None
    source: dict = field(default_factory=dict, compare=False, repr=False)

    def config_hash(self) -> str:
        canonical = json.dumps(self.source, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()

    def system_hamiltonian(self) -> HermitianOperator:
        if self.system.energies is None:
            return qubit_hamiltonian(self.system.e_s)
        return HermitianOperator.diagonal(self.system.energies)

    def pointer_model(self, ratio: float) -> PointerModel:
        beta_p = ratio * self.system.beta_s
        d_s = self.system.d_s
        if self.pointer.energies is not None:
            return PointerModel.from_energies(self.pointer.energies, beta_p, d_s)
        return PointerModel.qubit_register(self.pointer.n_qubits, self.pointer.e_p, beta_p, d_s)

    def assignment(self, which: str) -> AssignmentMatrix:
        kind = self.channels.forward if which == "forward" else self.channels.backward
        d = self.system.d_s
        return assignment_minimal_energy(d) if kind == "minimal_energy" else assignment_min_invasive(d)

    def build_process(self, theta: Optional[float] = None) -> Process:
        kind = self.process.kind
        if kind == "rabi":
            return rabi_process(self.system.e_s, float(theta), self.process.omega)
        h = self.system_hamiltonian()
        if kind == "fourier":
            return Process(h, h, fourier_unitary(h))
        return Process(h, h, np.array(self.process.unitary, dtype=np.complex128))


def _fail(where: str, msg: str) -> ConfigError:
    return ConfigError(f"{where}: {msg}")


def _section(data: dict, key: str, required: bool, allowed: set) -> dict:
    if key not in data:
        if required:
            raise _fail(key, "missing section")
        return {}
    sec = data[key]
    if not isinstance(sec, dict):
        raise _fail(key, "must be an object")
    unknown = set(sec) - allowed
    if unknown:
        raise _fail(key, f"unknown keys {sorted(unknown)}")
    return sec


def _number(sec: dict, where: str, key: str, default=None, positive=False, nonneg=False) -> float:
    if key not in sec or sec[key] is None:
        if default is None:
            raise _fail(where, f"'{key}' is required")
        return default
    v = sec[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise _fail(where, f"'{key}' must be a finite number")
    if positive and v <= 0:
        raise _fail(where, f"'{key}' must be > 0")
    if nonneg and v < 0:
        raise _fail(where, f"'{key}' must be >= 0")
    return float(v)


def _number_list(v, where: str, key: str) -> tuple:
    if not isinstance(v, list) or not v:
        raise _fail(where, f"'{key}' must be a non-empty list")
    for x in v:
        if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
            raise _fail(where, f"'{key}' entries must be finite numbers")
    return tuple(float(x) for x in v)


def _exactly_one(sec: dict, where: str, keys: tuple) -> str:
    present = [k for k in keys if sec.get(k) is not None]
    if len(present) != 1:
        raise _fail(where, f"give exactly one of {list(keys)}")
    return present[0]


def _load_unitary(path: Path) -> tuple:
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise _fail("process", f"unitary file {str(path)!r} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    try:
        u = np.array(raw["real"], dtype=float) + 1j * np.array(raw.get("imag", np.zeros_like(raw["real"])), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise _fail("process", f"unitary file must hold 'real' and 'imag' matrices ({exc})") from None
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise _fail("process", f"unitary must be square, got shape {u.shape}")
    if not is_unitary(u, 1e-12):
        raise _fail("process", "matrix in unitary file is not unitary within 1e-12")
    return tuple(tuple(row) for row in u.tolist())


def config_from_dict(data: dict, base_dir: Optional[Path] = None) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("top level must be a JSON object")
    unknown = set(data) - {"system", "pointer", "process", "channels", "outputs", "mc"}
    if unknown:
        raise ConfigError(f"unknown top-level keys {sorted(unknown)}")

    s = _section(data, "system", True, {"e_s", "beta_s", "energies"})
    energies = None if s.get("energies") is None else _number_list(s["energies"], "system", "energies")
    if energies is not None and (len(energies) < 2 or min(np.diff(sorted(energies))) <= 1e-9):
        raise _fail("system", "'energies' needs at least two distinct levels")
    system = SystemConfig(_number(s, "system", "beta_s", positive=True), _number(s, "system", "e_s", 1.0, positive=True), energies)

    p = _section(data, "pointer", True, {"n_qubits", "e_p", "energies", "beta_p", "ratio", "ratios"})
    which = _exactly_one(p, "pointer", ("beta_p", "ratio", "ratios"))
    if which == "ratios":
        ratios = _number_list(p["ratios"], "pointer", "ratios")
    elif which == "ratio":
        ratios = (_number(p, "pointer", "ratio"),)
    else:
        ratios = (_number(p, "pointer", "beta_p") / system.beta_s,)
    if any(r < 0 for r in ratios):
        raise _fail("pointer", "temperature ratios must be >= 0")
    p_energies = None if p.get("energies") is None else _number_list(p["energies"], "pointer", "energies")
    n_qubits = None
    if p_energies is None:
        n_qubits = p.get("n_qubits", 3)
        if isinstance(n_qubits, bool) or not isinstance(n_qubits, int) or not 1 <= n_qubits <= 8:
            raise _fail("pointer", "'n_qubits' must be an integer in 1..8")
        d_p = 2 ** n_qubits
    else:
        d_p = len(p_energies)
    if d_p % system.d_s != 0 or d_p < system.d_s:
        raise _fail("pointer", f"pointer dimension {d_p} is not a multiple of d_S={system.d_s}")
    pointer = PointerConfig(ratios, n_qubits, _number(p, "pointer", "e_p", 0.1, positive=True), p_energies)

    pr = _section(data, "process", True, {"kind", "theta", "thetas", "theta_grid", "omega", "unitary_file"})
    kind = pr.get("kind")
    if kind not in PROCESS_KINDS:
        raise _fail("process", f"'kind' must be one of {list(PROCESS_KINDS)}")
    thetas: tuple = ()
    unitary = None
    if kind == "rabi":
        if system.energies is not None and system.d_s != 2:
            raise _fail("process", "rabi processes need a qubit system")
        tw = _exactly_one(pr, "process", ("theta", "thetas", "theta_grid"))
        if tw == "theta":
            thetas = (_number(pr, "process", "theta"),)
        elif tw == "thetas":
            thetas = _number_list(pr["thetas"], "process", "thetas")
        else:
            g = pr["theta_grid"]
            if not isinstance(g, dict) or set(g) != {"start", "stop", "num"}:
                raise _fail("process", "'theta_grid' needs exactly 'start', 'stop', 'num'")
            num = g["num"]
            if isinstance(num, bool) or not isinstance(num, int) or num < 1:
                raise _fail("process", "'theta_grid.num' must be a positive integer")
            thetas = theta_grid(_number(g, "process.theta_grid", "start"), _number(g, "process.theta_grid", "stop"), num)
    else:
        if any(pr.get(k) is not None for k in ("theta", "thetas", "theta_grid")):
            raise _fail("process", f"'{kind}' processes take no theta")
        if kind == "custom":
            if not isinstance(pr.get("unitary_file"), str):
                raise _fail("process", "'custom' needs 'unitary_file'")
            path = Path(pr["unitary_file"])
            if not path.is_absolute() and base_dir is not None:
                path = base_dir / path
            unitary = _load_unitary(path)
            if len(unitary) != system.d_s:
                raise _fail("process", f"unitary is {len(unitary)}x{len(unitary)} but d_S={system.d_s}")
    process = ProcessConfig(kind, thetas, _number(pr, "process", "omega", 1.0, positive=True), unitary)

    c = _section(data, "channels", False, {"forward", "backward"})
    channels = ChannelConfig(c.get("forward", "minimal_energy"), c.get("backward", "minimal_energy"))
    for k in (channels.forward, channels.backward):
        if k not in CHANNEL_KINDS:
            raise _fail("channels", f"channel kind must be one of {list(CHANNEL_KINDS)}, got {k!r}")

    o = _section(data, "outputs", False, {"csv", "quantities"})
    quantities = tuple(o.get("quantities", DEFAULT_QUANTITIES))
    bad = [q for q in quantities if q not in QUANTITIES]
    if bad or not quantities:
        raise _fail("outputs", f"unknown quantities {bad}; choose from {list(QUANTITIES)}")
    csv_path = o.get("csv")
    if csv_path is not None and not isinstance(csv_path, str):
        raise _fail("outputs", "'csv' must be a path string")
    outputs = OutputConfig(csv_path, quantities)

    mc = None
    if "mc" in data:
        m = _section(data, "mc", False, {"samples", "seed"})
        samples, seed = m.get("samples"), m.get("seed")
        if isinstance(samples, bool) or not isinstance(samples, int) or samples < 10_000:
            raise _fail("mc", "'samples' must be an integer >= 10000")
        if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
            raise _fail("mc", "'seed' must be an unsigned 64-bit integer")
        mc = MCConfig(samples, seed)

    return ScenarioConfig(system, pointer, process, channels, outputs, mc, data)


def load_config(path) -> ScenarioConfig:
    """Parse and validate a config file; errors carry ``file:line:col`` for JSON syntax problems."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return config_from_dict(data, path.parent)


def theta_grid(start: float, stop: float, num: int) -> tuple:
    """``num`` uniform points including both ends.

    Points are ``start + (stop - start) * (k / (num - 1))`` so that on
    ``[0, 2 pi]`` with 201 points the entries for pi/2, pi and 3pi/2 are the
    correctly rounded values.
    """
    if num == 1:
        return (float(start),)
    return tuple(start + (stop - start) * (k / (num - 1)) for k in range(num))

"""Workspace configuration files (YAML).

All times are in seconds. Example::

    seed: 7
    plant: {num: [1.0], den: [0.0, 1.0]}
    controller:
      initial_state: Low
      bank:
        Low:  {num: [2.0], den: [1.0]}
        High: {num: [1.0], den: [1.0]}
    markov:
      states: [Low, High]
      transition: [[0.9, 0.1], [0.2, 0.8]]
      delays:
        - {mean: 0.002, std: 0.0005, min: 0.001, max: 0.003, family: truncnorm}
        - {min: 0.004, max: 0.008, family: uniform}
    software: {tau_s: 0.005, j_exec: 0.001}
    hardware: {alpha_c: 0.0001}
    contract: {h: 0.05, tau: 0.012, j_h: 0.004, j_tau: 0.006}
    scenario:
      duration: 5.0
      reference: {amplitude: 1.0, time: 0.0}
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

import yaml

from .contract import TolcContract
from .errors import ConfigError
from .jitter import DelayDistribution, HardwareJitter, MarkovDelayModel, SoftwareJitter
from .lti import TransferFunction
from .mealy import MealySwitchingController
from .simulator import Reference, Scenario

__all__ = ["WorkspaceConfig", "load_config", "parse_config", "build_scenario", "dump_contract"]

_TOP = {
    "seed", "output_dir", "plant", "controller", "markov", "software",
    "hardware", "contract", "scenario", "margin", "synthesis",
}
_SECTIONS = {
    "plant": {"num", "den"},
    "controller": {"initial_state", "bank"},
    "markov": {"states", "transition", "delays"},
    "software": {"tau_s", "j_exec"},
    "hardware": {"alpha_c"},
    "contract": {"h", "tau", "j_h", "j_tau"},
    "scenario": {"duration", "reference", "sampling_jitter", "clamp_latency"},
    "margin": {"omega_lo", "omega_hi", "grid_points"},
    "synthesis": {"h", "tau", "rho", "gamma"},
}
_DELAY_KEYS = {"mean", "std", "min", "max", "family"}
_REFERENCE_KEYS = {"amplitude", "time", "kind"}


@dataclass
class WorkspaceConfig:
    plant: Optional[TransferFunction] = None
    bank: dict = field(default_factory=dict)
    initial_state: Any = None
    network: Optional[MarkovDelayModel] = None
    software: SoftwareJitter = SoftwareJitter(0.0, 0.0)
    hardware: HardwareJitter = HardwareJitter(0.0)
    contract: Optional[TolcContract] = None
    scenario: dict = field(default_factory=dict)
    margin: dict = field(default_factory=dict)
    synthesis: dict = field(default_factory=dict)
    seed: int = 0
    output_dir: Optional[str] = None


def _check_keys(where: str, got: dict, allowed: set):
    if not isinstance(got, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(got).__name__}")
    unknown = sorted(set(got) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")


def _number(where: str, v) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {v!r}")
    return float(v)


def _tf(where: str, spec: dict) -> TransferFunction:
    _check_keys(where, spec, {"num", "den"})
    try:
        num = [_number(f"{where}.num", c) for c in spec["num"]]
        den = [_number(f"{where}.den", c) for c in spec["den"]]
        return TransferFunction(num, den)
    except KeyError as exc:
        raise ConfigError(f"{where}: missing {exc.args[0]!r}") from None
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _delay(where: str, spec: dict) -> DelayDistribution:
    _check_keys(where, spec, _DELAY_KEYS)
    family = spec.get("family", "truncnorm")
    try:
        lo = _number(f"{where}.min", spec["min"])
        hi = _number(f"{where}.max", spec["max"])
        if family == "uniform" and "mean" not in spec and "std" not in spec:
            return DelayDistribution.uniform(lo, hi)
        return DelayDistribution(
            mean=_number(f"{where}.mean", spec["mean"]),
            std=_number(f"{where}.std", spec.get("std", 0.0)),
            d_min=lo,
            d_max=hi,
            family=family,
        )
    except KeyError as exc:
        raise ConfigError(f"{where}: missing {exc.args[0]!r}") from None
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _markov(spec: dict) -> MarkovDelayModel:
    _check_keys("markov", spec, _SECTIONS["markov"])
    try:
        states = list(spec["states"])
        transition = spec["transition"]
        delays_spec = spec["delays"]
    except KeyError as exc:
        raise ConfigError(f"markov: missing {exc.args[0]!r}") from None
    if isinstance(delays_spec, dict):
        missing = [s for s in states if s not in delays_spec]
        if missing or set(delays_spec) - set(states):
            raise ConfigError("markov.delays: keys must match markov.states")
        delays_spec = [delays_spec[s] for s in states]
    delays = [_delay(f"markov.delays[{i}]", d) for i, d in enumerate(delays_spec)]
    try:
        return MarkovDelayModel(tuple(states), transition, tuple(delays))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"markov: {exc}") from None


def parse_config(data: dict) -> WorkspaceConfig:
    if data is None:
        data = {}
    _check_keys("config", data, _TOP)
    for name, allowed in _SECTIONS.items():
        if name in data and name not in ("plant",):
            _check_keys(name, data[name], allowed)
    cfg = WorkspaceConfig()
    if "seed" in data:
        if isinstance(data["seed"], bool) or not isinstance(data["seed"], int):
            raise ConfigError("seed must be an integer")
        cfg.seed = data["seed"]
    if "output_dir" in data:
        cfg.output_dir = str(data["output_dir"])
    if "plant" in data:
        cfg.plant = _tf("plant", data["plant"])
    if "controller" in data:
        ctrl = data["controller"]
        bank = ctrl.get("bank")
        if not isinstance(bank, dict) or not bank:
            raise ConfigError("controller.bank must be a non-empty mapping")
        cfg.bank = {label: _tf(f"controller.bank.{label}", tf) for label, tf in bank.items()}
        cfg.initial_state = ctrl.get("initial_state", next(iter(bank)))
        if cfg.initial_state not in cfg.bank:
            raise ConfigError(f"controller.initial_state {cfg.initial_state!r} not in bank")
    if "markov" in data:
        cfg.network = _markov(data["markov"])
    try:
        if "software" in data:
            sw = data["software"]
            cfg.software = SoftwareJitter(
                _number("software.tau_s", sw.get("tau_s", 0.0)),
                _number("software.j_exec", sw.get("j_exec", 0.0)),
            )
        if "hardware" in data:
            cfg.hardware = HardwareJitter(
                _number("hardware.alpha_c", data["hardware"].get("alpha_c", 0.0))
            )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None
    if "contract" in data:
        c = data["contract"]
        try:
            cfg.contract = TolcContract(
                **{k: _number(f"contract.{k}", c[k]) for k in ("h", "tau", "j_h", "j_tau")}
            )
        except KeyError as exc:
            raise ConfigError(f"contract: missing {exc.args[0]!r}") from None
    if "scenario" in data:
        sc = dict(data["scenario"])
        if "reference" in sc:
            _check_keys("scenario.reference", sc["reference"], _REFERENCE_KEYS)
        cfg.scenario = sc
    cfg.margin = dict(data.get("margin", {}))
    cfg.synthesis = dict(data.get("synthesis", {}))
    return cfg


def load_config(path) -> WorkspaceConfig:
    try:
        with open(path) as f:
            data = yaml.safe_load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    return parse_config(data)


def build_scenario(cfg: WorkspaceConfig, seed: Optional[int] = None) -> Scenario:
    for name, val in (("plant", cfg.plant), ("markov", cfg.network), ("contract", cfg.contract)):
        if val is None:
            raise ConfigError(f"simulation needs a {name} section")
    if not cfg.bank:
        raise ConfigError("simulation needs a controller section")
    sc = cfg.scenario
    if "duration" not in sc:
        raise ConfigError("scenario.duration is required")
    ref = sc.get("reference", {})
    try:
        reference = Reference(
            amplitude=_number("scenario.reference.amplitude", ref.get("amplitude", 1.0)),
            time=_number("scenario.reference.time", ref.get("time", 0.0)),
            kind=ref.get("kind", "step"),
        )
        controller = MealySwitchingController.from_continuous(
            cfg.bank, cfg.contract.h, cfg.initial_state
        )
        scenario = Scenario(
            plant=cfg.plant,
            controller=controller,
            hardware=cfg.hardware,
            software=cfg.software,
            network=cfg.network,
            contract=cfg.contract,
            reference=reference,
            duration=_number("scenario.duration", sc["duration"]),
            seed=cfg.seed if seed is None else seed,
            sampling_jitter=sc.get("sampling_jitter", "uniform"),
            clamp_latency=bool(sc.get("clamp_latency", False)),
        )
        scenario.validate()
    except ConfigError:
        raise
    except (ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from None
    return scenario


def dump_contract(c: TolcContract) -> str:
    return yaml.safe_dump({"contract": c.to_dict()}, sort_keys=False)

"""Run configuration: the experiment contract, loadable from strict YAML."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import yaml

from .energy import DEFAULT_PROFILES, InterfaceKind, PowerProfile
from .mobility import MobilityParams
from .scenario import RateProfile


class ConfigError(ValueError):
    """Invalid or unknown configuration key/value."""


class Mode(Enum):
    BENCHMARK = "benchmark"
    COOPERATIVE = "cooperative"


@dataclass(frozen=True)
class SimConfig:
    duration: float = 100.0            # seconds per run
    runs: int = 10
    beacon_period: float = 5.0         # seconds
    table_timeout: float | None = None  # default 3 * beacon_period
    cbr_rate: float = 3000.0           # packets/s per source
    packet_size: int = 1024            # bytes
    beacon_size: int = 64              # bytes
    tx_range: float = 20.0             # meters
    # carrier-sense range as a multiple of tx_range; transmissions block the
    # medium (and hold sensing radios in RX) out to this range but are only
    # decodable within tx_range
    cs_range_factor: float = 6.0
    # deterministic CSMA contention cost: every medium acquisition extends
    # the frame occupancy by one slot per node currently deferring, standing
    # in for expected backoff and collision overhead
    contention_slot: float = 9e-6
    mode: Mode = Mode.COOPERATIVE
    hop_budget: int | None = None      # default 4 * n_nodes
    uplink_queue_cap_per_node: int = 50
    sr_queue_cap: int = 50
    class_a_generates: bool = True
    beacon_energy_counted: bool = True
    mobility: MobilityParams | None = None
    master_seed: int = 1
    rates: RateProfile = field(default_factory=RateProfile)
    power_profiles: dict[InterfaceKind, PowerProfile] = field(
        default_factory=lambda: dict(DEFAULT_PROFILES)
    )

    def __post_init__(self):
        if self.duration <= 0:
            raise ConfigError("duration must be > 0")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.packet_size <= 0:
            raise ConfigError("packet_size must be > 0")
        if self.beacon_size <= 0:
            raise ConfigError("beacon_size must be > 0")
        if self.cbr_rate < 0:
            raise ConfigError("cbr_rate must be >= 0")
        if self.beacon_period <= 0:
            raise ConfigError("beacon_period must be > 0")
        if self.tx_range <= 0:
            raise ConfigError("tx_range must be > 0")
        if self.cs_range_factor < 1.0:
            raise ConfigError("cs_range_factor must be >= 1 (sensing cannot be shorter than delivery)")
        if self.contention_slot < 0:
            raise ConfigError("contention_slot must be >= 0")
        if self.table_timeout is None:
            object.__setattr__(self, "table_timeout", 3.0 * self.beacon_period)
        if self.table_timeout <= 0:
            raise ConfigError("table_timeout must be > 0")
        if self.hop_budget is not None and self.hop_budget < 1:
            raise ConfigError("hop_budget must be >= 1")
        if self.uplink_queue_cap_per_node < 1 or self.sr_queue_cap < 1:
            raise ConfigError("queue caps must be >= 1")

    def with_mode(self, mode: Mode) -> "SimConfig":
        d = self.__dict__.copy()
        d["mode"] = mode
        return SimConfig(**d)

    def resolved_hop_budget(self, n_nodes: int) -> int:
        return self.hop_budget if self.hop_budget is not None else 4 * n_nodes


_CONFIG_KEYS = {
    "duration", "runs", "beacon_period", "table_timeout", "cbr_rate",
    "packet_size", "beacon_size", "tx_range", "cs_range_factor", "contention_slot",
    "mode", "hop_budget",
    "uplink_queue_cap_per_node", "sr_queue_cap", "class_a_generates",
    "beacon_energy_counted", "mobility", "master_seed",
}

_MOBILITY_KEYS = {"alpha", "mean_speed", "speed_stddev", "direction_stddev", "update_interval"}

# "both" at the file level means: run benchmark and cooperative on the same
# scenario and seeds and report the gain.
_MODES = {"benchmark", "cooperative", "both"}


def _check_keys(data: dict, allowed: set[str], what: str) -> None:
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown {what} key(s): {', '.join(sorted(unknown))}")


def parse_mobility(data: dict | None) -> MobilityParams | None:
    if data is None:
        return None
    if not isinstance(data, dict):
        raise ConfigError("mobility must be a mapping or null")
    _check_keys(data, _MOBILITY_KEYS, "mobility")
    try:
        return MobilityParams(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid mobility parameters: {exc}") from exc


def parse_config(data: dict) -> tuple[SimConfig, bool]:
    """Build a SimConfig from a parsed mapping.

    Returns (config, run_both_modes).  Unknown keys are rejected so that a
    typo cannot silently fall back to a default.
    """
    if not isinstance(data, dict):
        raise ConfigError("config file must contain a mapping")
    _check_keys(data, _CONFIG_KEYS, "config")
    data = dict(data)
    mode_str = data.pop("mode", "cooperative")
    if mode_str not in _MODES:
        raise ConfigError(f"mode must be one of {sorted(_MODES)}, got {mode_str!r}")
    both = mode_str == "both"
    mode = Mode.COOPERATIVE if both else Mode(mode_str)
    if "mobility" in data:
        data["mobility"] = parse_mobility(data["mobility"])
    try:
        cfg = SimConfig(mode=mode, **data)
    except TypeError as exc:
        raise ConfigError(f"invalid config: {exc}") from exc
    return cfg, both


def load_config(path) -> tuple[SimConfig, bool]:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if data is None:
        data = {}
    return parse_config(data)

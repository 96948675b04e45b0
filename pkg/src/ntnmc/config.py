"""Scenario configuration: defaults, file parsing, environment overrides.

Config files are flat ``key = value`` lines with optional ``[section]``
headers (cosmetic, keys are globally unique). Unknown keys, bad types and
out-of-range values are rejected with the offending line number so a typo in
a sweep definition fails loudly instead of silently running defaults.
Environment variables ``SIM_<KEY>`` (upper-cased field name) override both
defaults and file values.
"""

import dataclasses
import os

POLICIES = ("mcs", "rsrp", "bo", "off")


class ConfigError(Exception):
    pass


@dataclasses.dataclass
class ScenarioConfig:
    # layout
    sim_duration_s: float = 5.0
    warmup_s: float = 2.5
    center_lat_deg: float = 41.59
    center_lon_deg: float = 1.74
    isd_m: float = 7500.0
    n_sites: int = 3
    n_ue_per_sector: int = 10
    ue_drop_min_m: float = 35.0
    ue_drop_max_m: float = 3750.0

    # traffic
    cbr_rate_bps: float = 3_200_000.0
    packet_bytes: int = 1500

    # phy, terrestrial
    carrier_ghz: float = 2.0
    bandwidth_mhz: float = 10.0
    n_prb: int = 52
    tn_tx_power_dbm: float = 43.0
    tn_sector_gain_dbi: float = 14.0
    tn_sector_beamwidth_deg: float = 65.0
    tn_sector_floor_db: float = 30.0
    tn_bs_height_m: float = 35.0
    ue_height_m: float = 1.5
    ue_noise_figure_db: float = 7.0
    shadow_sigma_los_db: float = 4.0
    shadow_sigma_nlos_db: float = 4.0
    min_link_distance_m: float = 35.0
    tn_latency_ms: float = 0.5

    # phy, satellite
    sat_altitude_m: float = 600_000.0
    sat_speed_ms: float = 7560.0
    sat_heading_deg: float = 0.0
    sat_epoch_lat_deg: float = 41.59
    sat_epoch_lon_deg: float = 1.74
    ntn_eirp_dbw_mhz: float = 34.0
    ntn_beam_radius_m: float = 25_000.0
    ntn_beam_floor_db: float = 24.0
    ue_ntn_gain_dbi: float = -2.0

    # radio bearers / queues
    ue_queue_bytes: int = 1_400_000
    pdcp_reorder_timer_ms: float = 100.0
    pdcp_reorder_buffer_pdus: int = 1000
    load_window_ms: float = 100.0

    # secondary-node control
    policy: str = "mcs"
    eval_period_ms: float = 10.0
    eval_jitter_ms: float = 1.0
    mcs_threshold: int = 15
    rsrp_min_dbm: float = -111.0
    meas_period_ms: float = 120.0
    meas_staleness_ms: float = 120.0
    meas_error_sigma_db: float = 0.75
    request_gate_ms: float = 100.0
    add_gate_ms: float = 100.0
    ctrl_latency_ms: float = 0.0
    load_ack_max: float = 0.975
    bo_threshold_frac: float = 0.8

    # split-bearer data requests
    split_alpha: float = 0.6
    split_delta_ms: float = 25.0
    split_toff_ms: float = 25.0

    # campaign
    base_seed: int = 1

    def validate(self):
        if self.policy not in POLICIES:
            raise ConfigError(f"policy must be one of {POLICIES}, got {self.policy!r}")
        positive = [
            "sim_duration_s", "isd_m", "n_sites", "n_ue_per_sector",
            "cbr_rate_bps", "packet_bytes", "carrier_ghz", "bandwidth_mhz",
            "n_prb", "sat_altitude_m", "ntn_beam_radius_m", "ue_queue_bytes",
            "pdcp_reorder_timer_ms", "pdcp_reorder_buffer_pdus",
            "load_window_ms", "eval_period_ms", "meas_period_ms",
            "meas_staleness_ms", "request_gate_ms", "add_gate_ms",
            "split_delta_ms", "split_toff_ms",
        ]
        for name in positive:
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        nonneg = ["warmup_s", "eval_jitter_ms", "tn_latency_ms",
                  "ue_drop_min_m", "sat_speed_ms", "meas_error_sigma_db",
                  "ctrl_latency_ms"]
        for name in nonneg:
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if self.warmup_s >= self.sim_duration_s:
            raise ConfigError("warmup_s must be below sim_duration_s")
        if self.ue_drop_max_m <= self.ue_drop_min_m:
            raise ConfigError("ue_drop_max_m must exceed ue_drop_min_m")
        if not 0.0 < self.load_ack_max <= 1.0:
            raise ConfigError("load_ack_max must be in (0, 1]")
        if not 0.0 < self.bo_threshold_frac <= 1.0:
            raise ConfigError("bo_threshold_frac must be in (0, 1]")
        if not 0.0 < self.split_alpha <= 1.0:
            raise ConfigError("split_alpha must be in (0, 1]")
        if not 0 <= self.mcs_threshold < 32:
            raise ConfigError("mcs_threshold must be in [0, 32)")
        return self


_FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}


def _coerce(field, raw, where):
    raw = raw.strip()
    try:
        if field.type in ("int", int):
            return int(raw)
        if field.type in ("float", float):
            return float(raw)
        if field.type in ("str", str):
            return raw
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {raw!r} as {field.type} for {field.name}")
    raise ConfigError(f"{where}: unsupported field type for {field.name}")


def parse_config_text(text, source="<config>"):
    """Parse flat key = value text into an override dict. Strict on unknowns."""
    overrides = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        where = f"{source}:{lineno}"
        stripped = line.strip()
        if not stripped or stripped.startswith("#") or stripped.startswith(";"):
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{where}: expected 'key = value', got {stripped!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.split("#", 1)[0]
        if key not in _FIELDS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        if key in overrides:
            raise ConfigError(f"{where}: duplicate key {key!r}")
        overrides[key] = _coerce(_FIELDS[key], value, where)
    return overrides


def env_overrides(environ=None):
    environ = os.environ if environ is None else environ
    overrides = {}
    for name, field in _FIELDS.items():
        env_key = "SIM_" + name.upper()
        if env_key in environ:
            overrides[name] = _coerce(field, environ[env_key], f"env {env_key}")
    return overrides


def load_config(path=None, environ=None, **extra):
    """Defaults, then config file, then environment, then explicit overrides."""
    values = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            values.update(parse_config_text(fh.read(), source=str(path)))
    values.update(env_overrides(environ))
    values.update(extra)
    return ScenarioConfig(**values).validate()

"""Experiment configuration files: YAML loading, schema validation, and
merging with CLI overrides (flag > env > file > built-in default)."""

from __future__ import annotations

from dataclasses import fields
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import yaml

from .sim import SimConfig

ENV_PREFIX = "RACEDUEL_"

# config file sections -> SimConfig field names
_SCHEMA: Dict[str, Dict[str, str]] = {
    "sim": {
        "sample_time": "sample_time",
        "decision_cycle": "decision_cycle",
        "episode_limit": "episode_limit",
        "y_track": "y_track",
        "footprint": "footprint",
        "ego_v_max": "ego_v_max",
        "opp_v_max": "opp_v_max",
        "omega_max": "omega_max",
        "gap_range": "gap_range",
        "opp_y_range": "opp_y_range",
        "ego_start": "ego_start",
        "initial_speed": "initial_speed",
        "accel_mode": "accel_mode",
    },
    "planning": {
        "a_set_values": "a_set_values",
        "y_targets": "y_targets",
        "horizon": "planning_horizon",
    },
    "reward": {
        "weights": "reward_weights",
        "track_width": "track_width",
    },
    "estimation": {
        "belief_increment": "belief_increment",
        "potential_limit": "potential_limit",
        "potential_hold_step": "potential_hold_step",
        "window": "estimation_window",
    },
    "tracking": {
        "horizon": "tracker_horizon",
        "state_weights": "tracker_state_weights",
        "input_weights": "tracker_input_weights",
        "iterations": "tracker_iterations",
    },
}

_TUPLE_FIELDS = {f.name for f in fields(SimConfig) if "Tuple" in str(f.type)}


class ConfigError(ValueError):
    """A config file problem, annotated with the offending location."""


def load_config_file(path: Path) -> Dict[str, Any]:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file {path} is not valid YAML: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a mapping at top level")
    return data


def sim_config_from_tree(tree: Mapping[str, Any]) -> SimConfig:
    """Validate a section/key tree and build a SimConfig from it."""
    overrides: Dict[str, Any] = {}
    for section, entries in tree.items():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section {section!r}")
        if entries is None:
            continue
        if not isinstance(entries, Mapping):
            raise ConfigError(f"config section {section!r} must be a mapping")
        for key, value in entries.items():
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown config key {section}.{key}")
            field_name = _SCHEMA[section][key]
            if field_name in _TUPLE_FIELDS:
                if not isinstance(value, (list, tuple)):
                    raise ConfigError(f"config key {section}.{key} must be a list")
                value = tuple(
                    tuple(v) if isinstance(v, (list, tuple)) else v for v in value
                )
            overrides[field_name] = value
    try:
        return SimConfig(**overrides)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def apply_overrides(tree: Dict[str, Any], assignments: Optional[list]) -> Dict[str, Any]:
    """Apply ``section.key=value`` assignments on top of a config tree."""
    merged: Dict[str, Any] = {k: dict(v) if isinstance(v, Mapping) else v for k, v in tree.items()}
    for assignment in assignments or []:
        if "=" not in assignment:
            raise ConfigError(f"override {assignment!r} must look like section.key=value")
        key_path, raw_value = assignment.split("=", 1)
        parts = key_path.strip().split(".")
        if len(parts) != 2:
            raise ConfigError(f"override key {key_path!r} must look like section.key")
        section, key = parts
        try:
            value = yaml.safe_load(raw_value)
        except yaml.YAMLError as exc:
            raise ConfigError(f"override value {raw_value!r} is not valid YAML: {exc}") from exc
        merged.setdefault(section, {})
        if not isinstance(merged[section], dict):
            raise ConfigError(f"config section {section!r} must be a mapping")
        merged[section][key] = value
    return merged


def load_sim_config(path: Optional[Path], overrides: Optional[list] = None) -> SimConfig:
    tree = load_config_file(path) if path is not None else {}
    tree = apply_overrides(tree, overrides)
    return sim_config_from_tree(tree)

"""Scenario configuration: hierarchical YAML with fixed key paths.

Recognized keys: topology.n_bs, topology.n_tx, topology.n_ue,
topology.serving_pattern, channel.rho, channel.pathloss_exp,
channel.cell_radius_m, channel.ref_loss_db, noise.snr_db, run.seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import yaml

from .errors import ConfigError
from .scenario import ChannelModel

ZF_TOTAL_POWER_W = 10.0


@dataclass(frozen=True)
class ScenarioConfig:
    n_bs: int
    n_tx: int
    n_ue: int
    serving_pattern: object
    channel: ChannelModel
    snr_db: float
    seed: int
    zf_total_power_w: float = ZF_TOTAL_POWER_W


def _get(tree, path, default=None, required=False):
    node = tree
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            if required:
                raise ConfigError(f"missing config key '{path}'")
            return default
        node = node[part]
    return node


def config_from_dict(tree) -> ScenarioConfig:
    if not isinstance(tree, dict):
        raise ConfigError("config root must be a mapping")
    try:
        channel = ChannelModel(
            rho=float(_get(tree, "channel.rho", 0.5)),
            pathloss_exp=float(_get(tree, "channel.pathloss_exp", 3.76)),
            cell_radius_m=float(_get(tree, "channel.cell_radius_m", 250.0)),
            ref_loss_db=float(_get(tree, "channel.ref_loss_db", 128.1)),
        )
        cfg = ScenarioConfig(
            n_bs=int(_get(tree, "topology.n_bs", required=True)),
            n_tx=int(_get(tree, "topology.n_tx", required=True)),
            n_ue=int(_get(tree, "topology.n_ue", required=True)),
            serving_pattern=_get(tree, "topology.serving_pattern", "overlap"),
            channel=channel,
            snr_db=float(_get(tree, "noise.snr_db", 20.0)),
            seed=int(_get(tree, "run.seed", 0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    if not 0.0 <= channel.rho < 1.0:
        raise ConfigError("channel.rho must be in [0, 1)")
    return cfg


def load_config(path) -> ScenarioConfig:
    try:
        with open(path) as f:
            tree = yaml.safe_load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file {path} is not valid YAML: {exc}") from exc
    return config_from_dict(tree)

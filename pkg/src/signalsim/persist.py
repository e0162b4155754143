"""Versioned JSON persistence for trained agent parameters.

The file records layer dims, row-major weights and biases per agent, the
feature-layout descriptor the networks were trained against, and training
metadata. Floats round-trip exactly through JSON (shortest-repr encoding),
so save followed by load is the identity on parameters.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .control import feature_names
from .nn import QNetwork
from .rl import Hyperparams

FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """Raised when a model file cannot be used with the current config."""


def save_model(
    path: Path | str,
    networks: list[QNetwork],
    training_seed: int,
    episodes: int,
    hp: Hyperparams,
    decision_frames: int,
) -> None:
    n_lights = len(networks)
    payload = {
        "format_version": FORMAT_VERSION,
        "n_lights": n_lights,
        "input_dim": networks[0].input_dim,
        "dtype": networks[0].dtype.name,
        "feature_layout": feature_names(n_lights),
        "agents": [
            {
                "layer_dims": list(net.layer_dims),
                "weights": [w.astype(np.float64).tolist() for w in net.weights],
                "biases": [b.astype(np.float64).tolist() for b in net.biases],
            }
            for net in networks
        ],
        "training": {
            "seed": training_seed,
            "episodes": episodes,
            "decision_frames": decision_frames,
            "hyperparams": asdict(hp),
        },
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_model(path: Path | str, expected_lights: int | None = None):
    """Load networks and metadata, validating version and dimensions."""
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not a model file ({exc})") from None
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(
            f"{path}: format version {version!r} is not supported (expected {FORMAT_VERSION})"
        )
    n_lights = payload["n_lights"]
    if expected_lights is not None and n_lights != expected_lights:
        raise ModelFormatError(
            f"{path}: model controls {n_lights} lights but the config has {expected_lights}"
        )
    if payload.get("feature_layout") != feature_names(n_lights):
        raise ModelFormatError(f"{path}: feature layout does not match this build")
    dtype = np.dtype(payload.get("dtype", "float64"))
    networks: list[QNetwork] = []
    for agent in payload["agents"]:
        dims = tuple(agent["layer_dims"])
        if dims[0] != n_lights * 20:
            raise ModelFormatError(f"{path}: input dim {dims[0]} != {n_lights * 20}")
        net = QNetwork(dims, rng=0, dtype=dtype)
        net.set_parameters(
            [np.array(w, dtype=dtype) for w in agent["weights"]],
            [np.array(b, dtype=dtype) for b in agent["biases"]],
        )
        networks.append(net)
    if len(networks) != n_lights:
        raise ModelFormatError(f"{path}: expected {n_lights} agents, found {len(networks)}")
    return networks, payload["training"]

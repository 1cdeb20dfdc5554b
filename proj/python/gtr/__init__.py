"""Python access to the gtr core library."""

import json

from ._gtr import (
    ConfigError,
    Env,
    EpisodeDone,
    Error,
    UnknownToken,
    correct_cards as _correct_cards,
    default_config as _default_config,
    derive_seed,
    is_solvable,
    solve,
    train as _train,
)

__all__ = [
    "ConfigError",
    "Env",
    "EpisodeDone",
    "Error",
    "UnknownToken",
    "correct_cards",
    "default_config",
    "derive_seed",
    "is_solvable",
    "solve",
    "train",
]


def default_config(task):
    return json.loads(_default_config(task))


def correct_cards(task, ranks, actions, thought):
    return json.loads(_correct_cards(task, list(ranks), list(actions), thought))


def train(config, resume=False):
    return _train(json.dumps(config), resume)

"""Python bindings for the kcagree core."""

import json as _json

from ._core import (
    BudgetError,
    Error,
    RuntimeBoundExceeded,
    ValidationError,
    __version__,
    check_dh_like,
    collision_fraction,
    decode_pair,
    encode_pair,
    execute,
    experiments,
    hash_apply,
    interactive_complexity,
    pad_pair,
    plain_complexity,
    protocol_names,
    pseudo_inverse,
    reference_verdict,
    run_interactive,
    run_single,
)
from . import _core


def defaults(name):
    """Default configuration of an experiment."""
    return _json.loads(_core._defaults(name))


def run_experiment(name, config=None, threads=1):
    """Runs an experiment; config overrides the defaults. Returns the report dict."""
    return _json.loads(_core._run_experiment(name, _json.dumps(config or {}), threads))


__all__ = [
    "BudgetError",
    "Error",
    "RuntimeBoundExceeded",
    "ValidationError",
    "__version__",
    "check_dh_like",
    "collision_fraction",
    "decode_pair",
    "defaults",
    "encode_pair",
    "execute",
    "experiments",
    "hash_apply",
    "interactive_complexity",
    "pad_pair",
    "plain_complexity",
    "protocol_names",
    "pseudo_inverse",
    "reference_verdict",
    "run_experiment",
    "run_interactive",
    "run_single",
]

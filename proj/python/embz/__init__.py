"""Embezzlement-of-entanglement numerics (C++ core)."""

import json as _json
import os as _os

from ._core import *  # noqa: F401,F403
from ._core import __version__, oracle  # noqa: F401
from ._core import _config_hash, _run_experiment


def run_experiment(config, experiment=None, out_dir="out", force=False, threads=0, plots=True):
    """Run an experiment from a config dict; returns the result record as a dict."""
    text = _json.dumps(config)
    return _json.loads(_run_experiment(text, experiment or "", _os.fspath(out_dir), force, threads, plots))


def config_hash(config, experiment=None):
    return _config_hash(_json.dumps(config), experiment or "")

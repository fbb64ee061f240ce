"""Total-variation compressed sensing toolkit."""

import json as _json

from ._core import *  # noqa: F401,F403
from ._core import Error, run_phase_transition as _run_phase_transition


def phase_transition(config):
    """Run a phase-transition experiment from a config dict; returns the diagram dict."""
    return _json.loads(_run_phase_transition(_json.dumps(config)))

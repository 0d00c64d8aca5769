"""Mixed-stationary Gaussian process regression on regular lattices."""

import json

from . import _msgp
from ._msgp import (
    ConfigError,
    DataError,
    Model,
    MsgpError,
    NumericalError,
    se_covariance,
    se_spectral_density,
    sha1_hex,
    simulate_pintore_levels,
    simulate_two_region,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Model",
    "MsgpError",
    "NumericalError",
    "compare",
    "default_settings",
    "fit",
    "load_checkpoint",
    "se_covariance",
    "se_spectral_density",
    "sha1_hex",
    "simulate_pintore_levels",
    "simulate_two_region",
    "summary",
]


def default_settings():
    return json.loads(_msgp.default_settings())


def _settings(overrides):
    s = default_settings()
    unknown = set(overrides) - set(s)
    if unknown:
        raise ConfigError("unknown settings: " + ", ".join(sorted(unknown)))
    s.update(overrides)
    if s["model"] not in ("msgp", "igp"):
        raise ConfigError("model must be msgp or igp")
    return json.dumps(s)


def fit(x, y, **settings):
    """Run the sampler. Keyword arguments override default_settings()."""
    return _msgp.fit(x, y, _settings(settings))


def summary(model):
    return json.loads(model.summary())


def load_checkpoint(data):
    return _msgp.load_checkpoint(bytes(data))


def compare(x, y, windows=((10, 30), (60, 80), (40, 60)), thin=1, **settings):
    """Held-out comparison of the shared and independent coefficient models."""
    return json.loads(_msgp.compare(x, y, [tuple(w) for w in windows], _settings(settings), thin))

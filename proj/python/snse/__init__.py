"""Python face of the spectral cascade solver.

The heavy lifting lives in the `_snse` extension; this package re-exports it
and adds small json conveniences.
"""

import json as _json

from ._snse import (  # noqa: F401
    ConfigError,
    Envelope,
    Grid,
    InfeasibleError,
    NoiseModel,
    NumericalError,
    SpectralField,
    Workspace,
    decompose,
    dissipation_functional,
    energy_flux,
    field_from_coeffs,
    lebesgue_norm,
    leray_project,
    nonlinear_term,
    norm_bundle,
    poincare_ratio,
    random_divfree_field,
    read_field,
    run_ensemble,
    run_verification,
    resolved_config,
    single_mode_field,
    sobolev_norm,
    taylor_green,
    version,
    write_field,
)

from . import _snse as _core


def verify(config, workers=0):
    """Run the verification bundle for a config dict; returns a dict."""
    return _json.loads(_core.run_verification(_json.dumps(config), workers))


def ensemble(config, workers=0):
    """Run the cascade ensemble for a config dict; returns the realized summary."""
    return _json.loads(_core.run_ensemble(_json.dumps(config), workers))


def resolve(config):
    """Materialize every default of a config dict."""
    return _json.loads(_core.resolved_config(_json.dumps(config)))


__all__ = [n for n in dir() if not n.startswith("_")]
__version__ = version()

"""Quasi-local energy, angular momentum and center of mass of 2-surfaces.

The dict-returning helpers take the same configuration layout as the
command-line tool (sections spacetime, surface, solver, output).
"""

import json

from ._core import (
    GeometryError,
    QlcqError,
    SolverError,
    ValidationError,
    catalog_names,
    komar_angular_momentum,
    quasi_local,
    run_json,
)

__all__ = [
    "GeometryError",
    "QlcqError",
    "SolverError",
    "ValidationError",
    "catalog_names",
    "komar_angular_momentum",
    "quasi_local",
    "run",
    "compute",
    "sweep",
    "embed",
    "validate",
]


def run(mode, config=None):
    """Run one pipeline and return the result document as a dict."""
    return json.loads(run_json(mode, json.dumps(config or {})))


def _config(spacetime, mass, spin, band_limit, surface):
    return {
        "spacetime": {"name": spacetime, "mass": mass, "spin": spin},
        "surface": surface,
        "solver": {"band_limit": band_limit},
    }


def compute(spacetime="schwarzschild-standard", radius=5.0, mass=1.0, spin=0.0, band_limit=16):
    return run("compute", _config(spacetime, mass, spin, band_limit, {"radius": radius}))


def sweep(radii, spacetime="schwarzschild-isotropic", mass=1.0, spin=0.0, band_limit=12):
    return run("sweep", _config(spacetime, mass, spin, band_limit, {"radii": list(radii)}))


def embed(spacetime="schwarzschild-standard", radius=5.0, mass=1.0, spin=0.0, band_limit=16):
    return run("embed", _config(spacetime, mass, spin, band_limit, {"radius": radius}))


def validate(spacetime="schwarzschild-standard", radius=5.0, mass=1.0, spin=0.0, band_limit=16):
    return run("validate", _config(spacetime, mass, spin, band_limit, {"radius": radius}))

import math

import numpy as np
import pytest

import qlcq


def test_catalog():
    names = qlcq.catalog_names()
    assert "kerr-bl" in names
    assert "minkowski" in names


def test_brown_york_energy():
    r = qlcq.quasi_local("schwarzschild-standard", 5.0, band_limit=12)
    assert r["energy"] == pytest.approx(5.0 * (1.0 - math.sqrt(0.6)), rel=1e-10)
    assert np.allclose(r["J"], 0.0, atol=1e-12)
    assert r["tau"].shape == (13 * 26,)


def test_kerr_angular_momentum():
    r = qlcq.quasi_local("kerr-bl", 10.0, spin=0.5, band_limit=16)
    assert r["J"][2] == pytest.approx(0.5, rel=1e-8)
    assert qlcq.komar_angular_momentum("kerr-bl", 10.0, spin=0.5) == pytest.approx(0.5, rel=1e-8)


def test_documents():
    doc = qlcq.compute("minkowski", radius=3.0, band_limit=12)
    assert abs(doc["surfaces"][0]["energy"]) < 1e-12
    sw = qlcq.sweep([40.0, 80.0, 160.0, 320.0], band_limit=12)
    assert len(sw["surfaces"]) == 4
    assert sw["family"]["totals"]["mass"] == pytest.approx(1.0, abs=1e-6)
    assert qlcq.validate("kerr-bl", radius=8.0, spin=0.5, band_limit=12)["failed"] == 0
    assert len(qlcq.embed(radius=6.0, band_limit=8)["embedding"]) > 0


def test_errors():
    with pytest.raises(qlcq.ValidationError):
        qlcq.quasi_local("kerr-bl", 5.0, spin=1.2)
    with pytest.raises(qlcq.ValidationError):
        qlcq.run("compute", {"solver": {"bogus": 1}})
    with pytest.raises(qlcq.ValidationError):
        qlcq.run("compute", {"spacetime": {"name": "reissner"}})
    assert issubclass(qlcq.SolverError, qlcq.QlcqError)
    with pytest.raises(qlcq.SolverError):
        qlcq.run("compute", {"spacetime": {"name": "kerr-bl", "spin": 0.9}, "surface": {"radius": 3.0},
                             "solver": {"band_limit": 12, "max_iterations": 0, "tolerance": 1e-14}})

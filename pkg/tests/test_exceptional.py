import numpy as np
import pytest
from hypothesis import given, strategies as st

from chiral_rabi import ModelParams, Truncation
from chiral_rabi.eigensolver import cluster_levels, eigvalsh
from chiral_rabi.errors import NoCrossingFound, PreconditionError
from chiral_rabi.exceptional import (
    classify_energy,
    exceptional_energy,
    find_exceptional_crossing,
    indicial_exponent,
    nearest_exceptional,
)
from chiral_rabi.hamiltonian import build_H


def test_energy_examples():
    assert exceptional_energy(2, 1.0, 0.5) == 1.75
    assert exceptional_energy(0, 1.0, 0.0) == 0
    assert exceptional_energy(1, 2.0, 1.0) == 1.5
    with pytest.raises(PreconditionError):
        exceptional_energy(-1, 1.0, 0.5)


def test_indicial_examples():
    assert indicial_exponent(0.0, 1.0, 0.0) == 0
    assert abs(indicial_exponent(0.5, 1.0, 0.3) - 0.59) < 1e-15


@given(st.integers(0, 200), st.floats(0.1, 5.0), st.floats(0.0, 3.0))
def test_indicial_inverts_formula(n, Omega, lam):
    E = exceptional_energy(n, Omega, lam)
    assert abs(indicial_exponent(E, Omega, lam) - n) < 1e-12 * max(1, n)
    assert abs(exceptional_energy(n + 1, Omega, lam) - E - Omega) < 1e-12 * max(1, E)


def test_classification():
    p = ModelParams.chiral3(1.0, 0.5, 0.3, 0.0)
    assert classify_energy(0.91, p) == "exceptional"
    assert classify_energy(0.91 + 1e-5, p) == "regular"
    assert classify_energy(-5.0, p) == "regular"
    assert nearest_exceptional(2.2, p) == (2, 1.91)


@pytest.mark.parametrize("lam", [0.2, 0.5])
def test_decoupled_levels_exhaustive(lam):
    p = ModelParams.chiral3(1.0, 0.0, lam, 0.0)
    vals = eigvalsh(build_H(p, Truncation(60)))
    clusters = cluster_levels(vals[vals < 12.0])
    for n, c in enumerate(clusters):
        assert len(c) == 3
        assert np.max(np.abs(vals[c] - exceptional_energy(n, 1.0, lam))) < 1e-8


def test_crossing_at_degenerate_endpoint():
    base = ModelParams.chiral3(1.0, 0.3, 0.4, 0.0)
    res = find_exceptional_crossing(0, base, ("Delta", 0.0, 0.2), Truncation(30), n_grid=21)
    assert res.value == 0.0
    assert res.gap < 1e-8
    assert res.degeneracy_count == 3
    assert sorted(res.sectors) == [0, 1, 2]
    assert res.polynomial_evidence < 1e-6


def test_generic_crossing_is_recorded():
    base = ModelParams.chiral3(1.0, 0.5, 0.2, 0.0)
    res = find_exceptional_crossing(1, base, ("Delta", 0.3, 0.6), Truncation(30), n_grid=31)
    assert res.gap < 1e-6
    rho = indicial_exponent(res.E_exceptional, 1.0, 0.2)
    assert abs(rho - round(rho)) < 1e-6
    doc = res.to_dict()
    for key in ("script_N", "param", "value", "E_exceptional", "degeneracy_count", "gap"):
        assert key in doc


def test_phi_sweep():
    base = ModelParams.chiral3(1.0, 0.5, 0.2, 0.0)
    res = find_exceptional_crossing(1, base, ("phi", 0.0, 3.0), Truncation(25), n_grid=61)
    assert res.gap < 1e-8 and res.param == "phi"


def test_no_crossing():
    base = ModelParams.chiral3(1.0, 0.5, 0.2, 0.0)
    with pytest.raises(NoCrossingFound):
        find_exceptional_crossing(1, base, ("Delta", 0.5, 0.52), Truncation(25), n_grid=11)


@pytest.mark.parametrize("sweep", [("Nope", 0, 1), ("Delta", 1.0, 0.5)])
def test_bad_sweep(sweep):
    with pytest.raises(PreconditionError):
        find_exceptional_crossing(1, ModelParams.chiral3(1, 0.5, 0.2, 0), sweep, Truncation(10))

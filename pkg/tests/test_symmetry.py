import math

import numpy as np
import pytest

from chiral_rabi import ModelParams, Truncation, eigvalsh
from chiral_rabi import symmetry
from chiral_rabi.clock import omega
from chiral_rabi.errors import FormulaMismatch, SymmetryBroken
from chiral_rabi.hamiltonian import build_boson_ops, build_H, fock_rotation
from chiral_rabi.symmetry import (
    block_diagonalize,
    build_U,
    offdiag_block_norm,
    pi_eigenphase_of_block,
    sector_diagonal,
    sector_formula,
)

from conftest import random_params


@pytest.mark.parametrize("N", range(2, 7))
def test_unitary(N):
    assert build_U(N, Truncation(11)).unitarity_error() < 1e-12


def test_three_state_operator_matrix():
    t = Truncation(6)
    d = 7
    w = omega(3)
    R = fock_rotation(3, t)
    U = build_U(3, t).U * math.sqrt(3)
    for r in range(3):
        for g in range(3):
            ref = w ** (r * g) * np.linalg.matrix_power(R, r)
            assert np.max(np.abs(U[r * d:(r + 1) * d, g * d:(g + 1) * d] - ref)) < 1e-14


def test_two_state_blocks():
    t = Truncation(5)
    U = build_U(2, t).U * math.sqrt(2)
    R = np.diag([(-1.0) ** n for n in range(6)])
    ref = np.block([[np.eye(6), np.eye(6)], [R, -R]])
    assert np.max(np.abs(U - ref)) < 1e-15


@pytest.mark.parametrize("N", [2, 3, 4, 5])
def test_block_diagonalises(rng, N):
    t = Truncation(20)
    p = random_params(rng, N)
    H = build_H(p, t)
    fg = build_U(N, t)
    T = fg.U.conj().T @ H @ fg.U
    assert offdiag_block_norm(T, N, t.fock_dim) < 1e-10 * np.linalg.norm(H)
    blocks = block_diagonalize(H, fg, p)
    assert [b.s for b in blocks] == list(range(N))


@pytest.mark.parametrize("phi", [0.2, 0.0, 2.5])
def test_three_state_blocks_match_formula(phi):
    t = Truncation(30)
    p = ModelParams.chiral3(1.0, 0.5, 0.3, phi)
    blocks = block_diagonalize(build_H(p, t), build_U(3, t), p)
    bdag, b, number = build_boson_ops(t)
    R = fock_rotation(3, t)
    w = omega(3)
    for s in range(3):
        ref = (number + 0.3 * (bdag + b) + 0.5 * np.exp(-1j * phi) * w ** s * R
               + 0.5 * np.exp(1j * phi) * w ** (2 * s) * R @ R)
        assert np.max(np.abs(blocks[s].matrix - ref)) < 1e-12
        assert np.max(np.abs(sector_formula(p, s, t).matrix - ref)) < 1e-12


def test_sector_zero_real_coupling():
    t = Truncation(12)
    p = ModelParams.chiral3(1.0, 0.5, 0.3, 0.0)
    bdag, b, number = build_boson_ops(t)
    R = fock_rotation(3, t)
    ref = number + 0.3 * (bdag + b) + 0.5 * (R + R @ R)
    assert np.max(np.abs(sector_formula(p, 0, t).matrix - ref)) < 1e-14


@pytest.mark.parametrize("N", [2, 4, 5, 6])
def test_general_formula_verified(rng, N):
    t = Truncation(18)
    p = random_params(rng, N)
    blocks = block_diagonalize(build_H(p, t), build_U(N, t), p)
    for s in range(N):
        assert np.max(np.abs(sector_formula(p, s, t).matrix - blocks[s].matrix)) < 1e-10


def test_formula_mismatch_detected(monkeypatch, rng):
    real = symmetry._formula_matrix
    monkeypatch.setattr(symmetry, "_formula_matrix", lambda p, s, t: real(p, s, t) + 1e-6)
    with pytest.raises(FormulaMismatch):
        sector_formula(random_params(rng, 4), 1, Truncation(8))


def test_shape_mismatch_raises():
    p = ModelParams.chiral3(1, 0.5, 0.3, 0)
    with pytest.raises(SymmetryBroken):
        block_diagonalize(build_H(p, Truncation(5)), build_U(3, Truncation(6)), p)


def test_gauge_mismatch_detected():
    from chiral_rabi.clock import Rep
    p = ModelParams.chiral3(1, 0.5, 0.3, 0.2)
    t = Truncation(8)
    with pytest.raises(SymmetryBroken):
        block_diagonalize(build_H(p, t, rep=Rep.Z_DIAGONAL), build_U(3, t), p)


@pytest.mark.parametrize("N", [2, 3, 4])
def test_partition_of_spectrum(rng, N):
    t = Truncation(40)
    p = random_params(rng, N, lam_range=(0.1, 0.5))
    H = build_H(p, t)
    blocks = block_diagonalize(H, build_U(N, t), p)
    union = np.sort(np.concatenate([eigvalsh(b.matrix) for b in blocks]))
    assert np.max(np.abs(union[:20] - eigvalsh(H)[:20])) < 1e-9


@pytest.mark.parametrize("N", range(2, 7))
def test_rotation_cycles(N):
    t = Truncation(13)
    assert np.array_equal(fock_rotation(N, t, N), np.eye(14, dtype=complex))
    R = fock_rotation(N, t)
    assert np.max(np.abs(np.linalg.matrix_power(R, N) - np.eye(14))) < 1e-14


@pytest.mark.parametrize("N", [2, 3, 4, 5])
def test_block_labels_are_pi_phases(N):
    fg = build_U(N, Truncation(9))
    for s in range(N):
        assert pi_eigenphase_of_block(fg, s) == (-s) % N


def test_sector_diagonal_is_real_cosine():
    p = ModelParams.chiral3(1.0, 0.7, 0.3, 0.4)
    for s in range(3):
        ref = [1.4 * math.cos(2 * math.pi * (k + s) / 3 - 0.4) for k in range(3)]
        assert np.max(np.abs(sector_diagonal(p, s) - ref)) < 1e-14


@pytest.mark.parametrize("phi", [0.0, 0.3, math.pi / 6])
def test_sector_relabels_phase(phi):
    # sector s at phi carries the same block as sector 0 at phi - 2 pi s / 3
    t = Truncation(25)
    p = ModelParams.chiral3(1.0, 0.5, 0.3, phi)
    for s in range(3):
        q = p.with_(phi=phi - 2 * math.pi * s / 3)
        assert np.max(np.abs(sector_formula(p, s, t).matrix - sector_formula(q, 0, t).matrix)) < 1e-14


def test_full_spectrum_mirror_at_special_phase():
    # phi -> -phi only permutes sectors when phi is a multiple of pi/3
    t = Truncation(30)
    for phi, same in ((math.pi / 3, True), (0.0, True), (math.pi / 6, False)):
        a = eigvalsh(build_H(ModelParams.chiral3(1, 0.5, 0.3, phi), t))[:12]
        b = eigvalsh(build_H(ModelParams.chiral3(1, 0.5, 0.3, -phi), t))[:12]
        assert (np.max(np.abs(a - b)) < 1e-10) == same

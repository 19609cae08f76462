"""Dense Choi-operator oracle: Schur basis, channel action, verification."""

from fractions import Fraction

import numpy as np
import pytest
from numpy.testing import assert_allclose

from superbroadcast.channels import (
    ChannelCoeffs,
    coefficients_for,
    conjectured_optimal_map,
    enumerate_extremal,
)
from superbroadcast.oracle import (
    SizeCapError,
    apply_channel,
    bloch_vector,
    build_choi,
    kron_power,
    partial_trace,
    permutation_twirl_deviation,
    product_input,
    projector_J,
    qubit_state,
    random_axis,
    random_su2,
    schur_isometry,
    single_copy_marginal,
    symmetric_marginal_deviation,
    verify_closed_form,
)
from superbroadcast.su2core import HalfInt, coupled_range, multiplicity, spin_range


def test_schur_isometry_is_unitary():
    for size in range(1, 11):
        u = schur_isometry(size).matrix()
        assert u.shape == (2**size, 2**size)
        assert np.max(np.abs(u.T @ u - np.eye(2**size))) < 1e-12


def test_schur_path_counts_match_multiplicities():
    for size in range(1, 9):
        iso = schur_isometry(size)
        assert sorted(iso.spins()) == spin_range(size)
        for j in iso.spins():
            assert len(iso.paths(j)) == multiplicity(size, j)
            for path in iso.paths(j):
                assert len(path) == size
                assert path[0] == HalfInt.of(Fraction(1, 2))
                assert path[-1] == j


def test_schur_two_qubit_columns():
    iso = schur_isometry(2)
    inv = 1.0 / np.sqrt(2.0)
    assert_allclose(iso.column(0, 0), [0.0, inv, -inv, 0.0], atol=1e-15)
    assert_allclose(iso.column(1, 1), [1.0, 0.0, 0.0, 0.0], atol=1e-15)
    assert_allclose(iso.column(1, 0), [0.0, inv, inv, 0.0], atol=1e-15)
    assert_allclose(iso.column(1, -1), [0.0, 0.0, 0.0, 1.0], atol=1e-15)


def test_schur_three_qubit_paths():
    iso = schur_isometry(3)
    half = HalfInt.of(Fraction(1, 2))
    assert iso.paths(Fraction(3, 2)) == [(half, HalfInt.of(1), HalfInt.of(Fraction(3, 2)))]
    assert iso.paths(half) == [
        (half, HalfInt.of(1), half),
        (half, HalfInt.of(0), half),
    ]
    # the two multiplicity copies are orthonormal
    a = iso.column(half, half, 0)
    b = iso.column(half, half, 1)
    assert abs(a @ a - 1.0) < 1e-12
    assert abs(b @ b - 1.0) < 1e-12
    assert abs(a @ b) < 1e-12


def test_schur_cap():
    with pytest.raises(SizeCapError):
        schur_isometry(13)
    with pytest.raises(ValueError):
        schur_isometry(0)


def test_projector_properties():
    iso_out = schur_isometry(3)
    iso_in = schur_isometry(2)
    for j in iso_out.spins():
        for l in iso_in.spins():
            out_block = iso_out.block(j)
            in_block = iso_in.block(l)
            total = np.zeros((32, 32))
            for J in coupled_range(j, l):
                proj = projector_J(j, l, J, out_block, in_block)
                assert_allclose(proj, proj.T, atol=1e-14)
                assert_allclose(proj @ proj, proj, atol=1e-12)
                assert abs(np.trace(proj) - J.dim) < 1e-12
                total += proj
            # summed over J they resolve the sector product space
            sector = np.kron(out_block.T @ out_block, in_block.T @ in_block)
            assert_allclose(total, sector, atol=1e-12)
    with pytest.raises(ValueError):
        projector_J(Fraction(3, 2), 1, 4, iso_out.block(Fraction(3, 2)), iso_in.block(1))


def test_identity_channel_reproduces_the_state():
    # N = M = 1 with J = 0 is the identity: s = 2, Choi = 2 P_singlet
    emap = conjectured_optimal_map(1, 1)
    choi = build_choi(coefficients_for(emap))
    rng = np.random.default_rng(11)
    for _ in range(4):
        rho = qubit_state(rng.uniform(0.0, 1.0), random_axis(rng))
        assert_allclose(apply_channel(choi, rho), rho, atol=1e-12)


def test_choi_trace_preserving_and_positive_small():
    # exhaustive over every extremal map on registers up to 8 qubits total
    for n in range(1, 5):
        for m in range(1, 9 - n):
            dim_in, dim_out = 2**n, 2**m
            for emap in enumerate_extremal(n, m):
                choi = build_choi(coefficients_for(emap))
                four = choi.reshape(dim_out, dim_in, dim_out, dim_in)
                reduced = np.einsum("aiaj->ij", four)
                assert np.max(np.abs(reduced - np.eye(dim_in))) < 1e-10
                assert np.linalg.eigvalsh(choi)[0] > -1e-10
                # total trace equals the input dimension
                assert abs(np.trace(choi) - dim_in) < 1e-9


def test_choi_trace_preserving_and_positive_sampled_large():
    # first, conjectured, and last maps at 9- and 10-qubit total sizes
    for n, m in [(2, 7), (4, 5), (5, 4), (3, 7), (5, 5), (7, 3)]:
        maps = enumerate_extremal(n, m)
        picks = {0, len(maps) - 1}
        sample = [maps[i] for i in sorted(picks)] + [conjectured_optimal_map(n, m)]
        dim_in, dim_out = 2**n, 2**m
        for emap in sample:
            choi = build_choi(coefficients_for(emap))
            four = choi.reshape(dim_out, dim_in, dim_out, dim_in)
            reduced = np.einsum("aiaj->ij", four)
            assert np.max(np.abs(reduced - np.eye(dim_in))) < 1e-10
            assert np.linalg.eigvalsh(choi)[0] > -1e-10


def test_build_choi_cap():
    with pytest.raises(SizeCapError):
        build_choi(coefficients_for(conjectured_optimal_map(6, 7)))
    # a tighter explicit cap rejects registers the default would admit
    with pytest.raises(SizeCapError):
        build_choi(coefficients_for(conjectured_optimal_map(2, 2)), cap=3)


def test_apply_channel_validates_shapes():
    choi = build_choi(coefficients_for(conjectured_optimal_map(1, 2)))
    with pytest.raises(ValueError):
        apply_channel(choi, np.eye(3) / 3.0)
    with pytest.raises(ValueError):
        apply_channel(choi, np.ones((2, 4)))


def test_partial_trace_on_product_states():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    a = a @ a.conj().T
    b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = b @ b.conj().T
    joint = np.kron(a, b)
    assert_allclose(partial_trace(joint, [0], 2), a * np.trace(b), atol=1e-12)
    assert_allclose(partial_trace(joint, [1], 2), b * np.trace(a), atol=1e-12)
    assert_allclose(partial_trace(joint, [0, 1], 2), joint, atol=1e-12)
    three = np.kron(joint, a)
    assert_allclose(
        partial_trace(three, [0, 2], 3), np.kron(a, a) * np.trace(b), atol=1e-12
    )
    with pytest.raises(ValueError):
        partial_trace(joint, [2], 2)
    with pytest.raises(ValueError):
        partial_trace(joint, [0, 0], 2)


def test_single_copy_marginal_positions_agree():
    emap = conjectured_optimal_map(2, 3)
    choi = build_choi(coefficients_for(emap))
    rho_out = apply_channel(choi, product_input(2, 0.8, [0.0, 0.0, 1.0]))
    marginals = [single_copy_marginal(rho_out, which) for which in range(3)]
    for other in marginals[1:]:
        assert_allclose(marginals[0], other, atol=1e-12)
    with pytest.raises(ValueError):
        single_copy_marginal(rho_out, 3)


def test_bloch_vector_round_trip():
    rng = np.random.default_rng(5)
    for _ in range(3):
        axis = random_axis(rng)
        r = rng.uniform(0.0, 1.0)
        assert_allclose(bloch_vector(qubit_state(r, axis)), r * axis, atol=1e-12)


def test_random_su2_is_special_unitary():
    rng = np.random.default_rng(9)
    for _ in range(5):
        u = random_su2(rng)
        assert_allclose(u @ u.conj().T, np.eye(2), atol=1e-12)
        assert abs(np.linalg.det(u) - 1.0) < 1e-12


def test_kron_power():
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert_allclose(kron_power(x, 1), x)
    assert kron_power(x, 3).shape == (8, 8)
    assert_allclose(kron_power(np.eye(2), 4), np.eye(16))


def test_verify_closed_form_passes_on_valid_maps():
    for n, m in [(1, 2), (2, 2), (2, 3), (3, 4)]:
        report = verify_closed_form(n, m, conjectured_optimal_map(n, m))
        assert report.ok, report.failures()
        assert report.deviation("closed_form_parallel") < 1e-9
        assert report.deviation("covariance") < 1e-9
    with pytest.raises(ValueError):
        verify_closed_form(2, 3, conjectured_optimal_map(2, 2))
    with pytest.raises(KeyError):
        report.deviation("not_a_check")


def test_verify_closed_form_catches_corruption():
    emap = conjectured_optimal_map(2, 3)
    coeffs = coefficients_for(emap)
    key = next(iter(coeffs.weights))
    bad = dict(coeffs.weights)
    bad[key] = bad[key] * Fraction(11, 10)
    report = verify_closed_form(2, 3, emap, coefficients=ChannelCoeffs(2, 3, bad))
    assert not report.ok
    assert "choi_trace_preserving" in [c.name for c in report.failures()]


def test_symmetric_state_marginal_identity():
    # one-qubit marginal of |j m> on 2j qubits is I/2 + (m/2j) sigma_z
    assert symmetric_marginal_deviation(3) < 1e-12


def test_permutation_twirl_identity():
    # permutation-averaging one multiplicity copy spreads it evenly over all
    for size in range(2, 6):
        assert permutation_twirl_deviation(size) < 1e-12
    with pytest.raises(SizeCapError):
        permutation_twirl_deviation(9)

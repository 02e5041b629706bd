import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from cpbspace import qmat
from cpbspace.errors import DimensionError, NotADensityMatrix, NotSymmetric

from conftest import random_density


def test_kron_identities():
    np.testing.assert_array_equal(qmat.kron(np.eye(2), np.eye(2)), np.eye(4))
    np.testing.assert_array_equal(qmat.kron(np.diag([1, 0]), np.diag([1, 0])), np.diag([1, 0, 0, 0]))


def test_kron_sigma_plus_on_first_qubit():
    # basis {11, 10, 01, 00}: |01> is position 2, |11> position 0
    raised = qmat.kron(qmat.SIGMA_PLUS, np.eye(2)) @ qmat.ket(2, 4)
    np.testing.assert_array_equal(raised, qmat.ket(0, 4))
    # |10> already has qubit A up
    np.testing.assert_array_equal(qmat.kron(qmat.SIGMA_PLUS, np.eye(2)) @ qmat.ket(1, 4), np.zeros(4))


def test_kron_bilinear_and_associative(rng):
    for _ in range(20):
        a, a2, b, c = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(4))
        x, y = rng.normal(size=2)
        np.testing.assert_allclose(qmat.kron(x * a + y * a2, b), x * qmat.kron(a, b) + y * qmat.kron(a2, b), atol=1e-13)
        np.testing.assert_allclose(qmat.kron(qmat.kron(a, b), c), qmat.kron(a, qmat.kron(b, c)), atol=1e-13)


def test_partial_trace_product_and_mixed():
    psi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    vac = np.diag([1.0, 0, 0])
    full = qmat.kron(qmat.projector(psi), vac)
    np.testing.assert_allclose(qmat.partial_trace_field(full, 4, 3), qmat.projector(psi), atol=1e-15)
    full = qmat.kron(np.eye(4) / 4, np.eye(3) / 3)
    np.testing.assert_allclose(qmat.partial_trace_field(full, 4, 3), np.eye(4) / 4, atol=1e-15)


def test_partial_trace_entangled_with_field():
    # (|11,0> + |00,2>)/sqrt2 with field index fastest: 11->0, 00->3
    vec = np.zeros(12, dtype=complex)
    vec[0 * 3 + 0] = vec[3 * 3 + 2] = 1 / np.sqrt(2)
    red = qmat.partial_trace_field(qmat.projector(vec), 4, 3)
    np.testing.assert_allclose(red, np.diag([0.5, 0, 0, 0.5]), atol=1e-15)


def test_partial_trace_random_products(rng):
    for n in (2, 3, 4):
        rq, rf = random_density(rng, 4), random_density(rng, n)
        red = qmat.partial_trace_field(qmat.kron(rq, rf), 4, n)
        np.testing.assert_allclose(red, rq, atol=1e-12)
        assert abs(np.trace(red) - 1) < 1e-12
        assert qmat.is_hermitian(red)


def test_partial_trace_dimension_mismatch():
    with pytest.raises(DimensionError):
        qmat.partial_trace_field(np.eye(10) / 10, 4)
    with pytest.raises(DimensionError):
        qmat.partial_trace_field(np.eye(12) / 12, 4, 4)


def test_eigvals_sym3_simple():
    assert qmat.eigvals_sym3(np.diag([3.0, 1.0, 2.0])) == pytest.approx((3, 2, 1), abs=1e-14)
    assert qmat.eigvals_sym3(np.zeros((3, 3))) == (0.0, 0.0, 0.0)


def _rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    return q * np.sign(np.diag(r))


@pytest.mark.parametrize("spectrum", [(5.0, -1.0, 0.3), (2.0, 2.0, -4.0), (1.0, 1.0 + 1e-9, 0.2), (1e-3, 0, 0)])
def test_eigvals_sym3_recovers_constructed_spectrum(rng, spectrum):
    for _ in range(10):
        q = _rotation(rng)
        m = q.T @ np.diag(spectrum) @ q
        m = 0.5 * (m + m.T)
        np.testing.assert_allclose(qmat.eigvals_sym3(m), sorted(spectrum, reverse=True), atol=1e-10)


def test_eigvals_sym3_rejects_nonsymmetric():
    with pytest.raises(NotSymmetric):
        qmat.eigvals_sym3(np.array([[1.0, 2.0, 0], [0, 1.0, 0], [0, 0, 1.0]]))


@settings(max_examples=300, deadline=None)
@given(arrays(np.float64, (3, 3), elements=st.floats(-1e3, 1e3)))
def test_eigvals_sym3_trace_and_determinant(a):
    m = a + a.T
    ev = qmat.eigvals_sym3(m)
    scale = max(1.0, np.max(np.abs(m)))
    assert ev[0] >= ev[1] >= ev[2]
    assert abs(sum(ev) - np.trace(m)) <= 1e-10 * scale
    assert abs(np.prod(ev) - np.linalg.det(m)) <= 1e-10 * scale ** 3
    np.testing.assert_allclose(ev, np.linalg.eigvalsh(m)[::-1], atol=1e-10 * scale)


def test_min_eigenvalue_x_blocks_match_lapack(rng):
    from cpbspace.quantifiers import random_x_state

    for _ in range(50):
        rho = random_x_state(rng).to_matrix()
        assert qmat.min_eigenvalue(rho) == pytest.approx(np.linalg.eigvalsh(rho)[0], abs=1e-14)


def test_check_density_matrix_rejects():
    with pytest.raises(NotADensityMatrix):
        qmat.check_density_matrix(np.eye(4) / 2)  # trace 2
    bad = np.eye(4) / 4
    bad[0, 1] = 0.1
    with pytest.raises(NotADensityMatrix):
        qmat.check_density_matrix(bad)  # not Hermitian
    with pytest.raises(NotADensityMatrix):
        qmat.check_density_matrix(np.diag([1.2, -0.2, 0, 0]))


def test_density_matrix_json_round_trip(tmp_path, rng):
    rho = random_density(rng, 4)
    path = tmp_path / "rho.json"
    qmat.save_density_matrix(rho, path)
    obj = json.loads(path.read_text())
    assert set(obj) == {"dim", "re", "im"} and obj["dim"] == 4
    np.testing.assert_array_equal(qmat.load_density_matrix(path), rho)


def test_density_matrix_json_malformed(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"dim": 2, "re": [[1, 0, 0]]}')
    with pytest.raises(DimensionError):
        qmat.load_density_matrix(path)
    path.write_text("{not json")
    with pytest.raises(NotADensityMatrix):
        qmat.load_density_matrix(path)

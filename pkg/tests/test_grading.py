import numpy as np
import pytest
import scipy.sparse as sp

from index_lab.errors import DimensionMismatch, SpectrumTouchesZero
from index_lab.grading import (
    Grading,
    Signature,
    SpectralProjection,
    Symmetry,
    check_oddness,
    clifford_defect_check,
    op_norm,
    positive_spectral_projection,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)


@pytest.mark.parametrize("p,q,graded", [(0, 0, True), (1, 1, True), (1, 0, False), (0, 1, False)])
def test_signature_parity(p, q, graded):
    assert Signature(p, q).graded is graded
    assert str(Signature(p, q)) == f"({p},{q})"


def test_signature_rejects_other_values():
    with pytest.raises(ValueError):
        Signature(2, 0)


def test_standard_grading():
    g = Grading.standard(3, 2)
    assert g.dim == 5 and g.plus_rank == 3
    plus, minus = g.eigenbasis()
    assert plus.shape == (5, 3) and minus.shape == (5, 2)
    np.testing.assert_allclose(g.expectation(np.eye(5)), [1, 1, 1, -1, -1])


def test_grading_from_dense_matrix():
    g = Grading.from_matrix(SX)
    assert g.plus_rank == 1
    plus, minus = g.eigenbasis()
    np.testing.assert_allclose(SX @ plus, plus, atol=1e-12)
    np.testing.assert_allclose(SX @ minus, -minus, atol=1e-12)


def test_grading_must_be_involution():
    with pytest.raises(ValueError):
        Grading.from_matrix(2 * np.eye(2))
    with pytest.raises(ValueError):
        Grading.diagonal([1.0, 0.5])


def test_oddness():
    g = Grading.diagonal([1.0, -1.0])
    assert check_oddness(SX, g) == 0.0
    assert check_oddness(SZ, g) == pytest.approx(2.0)
    with pytest.raises(DimensionMismatch):
        check_oddness(np.eye(3), g)


def test_clifford_verdicts():
    g = Grading.diagonal([1.0, -1.0])
    assert clifford_defect_check(SX, g)[1] is Symmetry.EXACT
    assert clifford_defect_check(SX + 0.01 * SZ, g)[1] is Symmetry.APPROXIMATE
    assert clifford_defect_check(SZ, g)[1] is Symmetry.NONE


def test_positive_projection_rank_and_gap():
    p = positive_spectral_projection(np.diag([-2.0, 0.5, 3.0]), 0.1)
    assert p.rank == 2
    assert p.gap == pytest.approx(0.5)
    np.testing.assert_allclose(p.matrix, np.diag([0, 1, 1]), atol=1e-14)


def test_positive_projection_refuses_small_eigenvalue():
    with pytest.raises(SpectrumTouchesZero):
        positive_spectral_projection(np.diag([-1.0, 1e-4]), 1e-3)


def test_projection_from_matrix_checks_idempotency():
    with pytest.raises(ValueError):
        SpectralProjection.from_matrix(0.5 * np.eye(2))
    p = SpectralProjection.from_matrix(0.5 * (np.eye(2) + SX))
    assert p.rank == 1
    np.testing.assert_allclose(np.abs(p.range_basis().ravel()), [2 ** -0.5] * 2)


def test_op_norm_dense_and_sparse():
    m = np.diag([1.0, -3.0])
    assert op_norm(m) == pytest.approx(3.0)
    assert op_norm(sp.csr_matrix(m)) >= 3.0
    assert op_norm(np.zeros((0, 0))) == 0.0

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from index_lab.errors import ChernOracleMismatch, InconclusiveIndex, NormExceeded
from index_lab.geometry import TorusSpec
from index_lab.pairlab import (
    EVEN_SIGN,
    KProjectionField,
    UnitarySymbol,
    bott_field,
    chern_oracle,
    circle_dirac_commutes,
    commutator_rank,
    constant_field,
    diagonal_symbol,
    even_pairing,
    even_pairing_report,
    exp_class,
    hardy_projection,
    monomial,
    odd_pairing,
    odd_pairing_report,
    rotated_symbol,
)

TORUS = TorusSpec(6)


@pytest.mark.parametrize("k", [-3, -2, -1, 0, 1, 2, 3])
def test_odd_pairing_of_monomials(k):
    rep = odd_pairing_report(monomial(k), hardy_projection(16))
    assert rep.value == rep.flow == rep.kernel_count == rep.winding == k


@given(st.lists(st.integers(-2, 2), min_size=1, max_size=3), st.floats(0.0, 1.5))
def test_odd_pairing_is_determinant_winding(degrees, mixing):
    u = rotated_symbol(degrees, mixing)
    assert odd_pairing(u, hardy_projection(12)) == sum(degrees)


@given(st.integers(-2, 2), st.integers(-2, 2))
def test_odd_pairing_additive_under_products(a, b):
    p = hardy_projection(16)
    prod = UnitarySymbol(lambda th: np.exp(1j * (a + b) * np.asarray(th)), abs(a) + abs(b))
    assert odd_pairing(prod, p) == odd_pairing(monomial(a), p) + odd_pairing(monomial(b), p)


@pytest.mark.parametrize("degrees", [[1], [2, -1, 1], [-2, 0]])
def test_odd_pairing_stable_under_truncation_doubling(degrees):
    u = rotated_symbol(degrees, 0.4)
    assert odd_pairing(u, hardy_projection(12)) == odd_pairing(u, hardy_projection(24))


def test_odd_pairing_needs_enough_modes():
    with pytest.raises(ValueError):
        odd_pairing(monomial(3), hardy_projection(8))
    with pytest.raises(ValueError):
        hardy_projection(3)


def test_unitarity_is_checked():
    with pytest.raises(ValueError):
        UnitarySymbol(lambda th: 2 * np.exp(1j * np.asarray(th)), 1)


def test_hardy_projection_commutes_with_circle_operator():
    p = hardy_projection(8)
    assert p.rank == 9
    assert circle_dirac_commutes(p) == 0.0


@pytest.mark.parametrize("k", [1, -2, 3])
def test_commutator_with_hardy_projection_has_rank_degree(k):
    assert commutator_rank(hardy_projection(16), monomial(k)) == abs(k)


def test_exp_class():
    np.testing.assert_allclose(exp_class(np.diag([1.0, -1.0, 0.0])), np.diag([1, 1, -1]), atol=1e-14)
    with pytest.raises(NormExceeded):
        exp_class(np.diag([1.5]))


@given(st.integers(0, 2**31 - 1))
def test_exp_class_is_unitary(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    h = a + a.conj().T
    h = h / (np.linalg.norm(h, 2) + 1e-9)
    u = exp_class(h)
    np.testing.assert_allclose(u @ u.conj().T, np.eye(4), atol=1e-12)


def test_projection_field_validation():
    with pytest.raises(ValueError):
        KProjectionField(np.ones((4, 2, 2)), 2)
    with pytest.raises(ValueError):
        KProjectionField(np.zeros((5, 2, 2)), 2)
    with pytest.raises(ValueError):
        bott_field(TorusSpec(4), mu=-2.0)


@pytest.mark.parametrize("mu,chern", [(1.0, -1), (-1.0, 1), (3.0, 0), (-3.0, 0)])
def test_chern_oracle_bott(mu, chern):
    assert chern_oracle(bott_field(TORUS, mu)) == chern


def test_chern_oracle_additive_and_conjugation():
    b = bott_field(TORUS)
    assert chern_oracle(b.conjugate()) == -chern_oracle(b)
    assert chern_oracle(b.direct_sum(b)) == 2 * chern_oracle(b)
    assert chern_oracle(b.direct_sum(b.conjugate())) == 0
    assert chern_oracle(constant_field(TORUS)) == 0


def test_even_pairing_calibration():
    rep = even_pairing_report(bott_field(TORUS), TORUS)
    assert rep.value == 1
    assert rep.calibrated == EVEN_SIGN * rep.oracle == 1
    assert rep.gap_ratio >= 10


@pytest.mark.parametrize("build,expected", [
    (lambda s: bott_field(s), 1),
    (lambda s: bott_field(s).conjugate(), -1),
    (lambda s: bott_field(s, -1.0), -1),
    (lambda s: bott_field(s, 3.0), 0),
    (lambda s: constant_field(s), 0),
    (lambda s: bott_field(s).direct_sum(bott_field(s)), 2),
    (lambda s: bott_field(s).direct_sum(bott_field(s).conjugate()), 0),
    (lambda s: bott_field(s).direct_sum(constant_field(s)), 1),
])
def test_even_pairing_values(build, expected):
    assert even_pairing(build(TORUS), TORUS) == expected


def test_even_pairing_stable_under_truncation_doubling():
    small, large = TorusSpec(4), TorusSpec(8)
    assert even_pairing(bott_field(small), small) == even_pairing(bott_field(large), large) == 1


def test_even_pairing_rejects_wrong_side():
    with pytest.raises(ValueError):
        even_pairing(bott_field(TorusSpec(4)), TORUS)


def test_coarse_field_fails_oracle():
    # a projection that jumps by a half turn between neighbours has no lattice curvature
    side = 5
    vals = np.zeros((side * side, 2, 2), dtype=complex)
    for s in range(side * side):
        v = np.array([1.0, 0.0]) if s % 2 == 0 else np.array([0.0, 1.0])
        vals[s] = np.outer(v, v)
    with pytest.raises(ChernOracleMismatch):
        chern_oracle(KProjectionField(vals, side))


def test_even_pairing_inconclusive_is_raised():
    assert issubclass(InconclusiveIndex, Exception)


def test_diagonal_symbol_det_winding():
    assert diagonal_symbol([2, -1, 3]).det_winding() == 4

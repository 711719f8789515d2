import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from index_lab.errors import DimensionMismatch, NotOdd, RefinementExhausted
from index_lab.grading import Grading, SpectralProjection, positive_spectral_projection
from index_lab.projflow import (
    OperatorPath,
    ProjectionLoop,
    loop_from_function,
    projection_to_unitary_block,
    relind0,
    relind1,
    spectral_flow0,
    stack_paths,
    suspension_index_oracle,
)

from conftest import random_hermitian

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
G2 = Grading.diagonal([1.0, -1.0])


def diag_projection(bits):
    return SpectralProjection.from_matrix(np.diag(np.asarray(bits, dtype=float)))


def random_projection(rng, n, rank):
    q, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return SpectralProjection.from_basis(q[:, :rank])


def test_relind0_is_rank_difference():
    assert relind0(diag_projection([1, 1, 0]), diag_projection([1, 0, 0])) == 1
    assert relind0(diag_projection([0, 0, 0]), diag_projection([1, 1, 0])) == -2
    assert relind0(diag_projection([1, 0, 0]), diag_projection([0, 1, 0])) == 0


def test_relind0_dimension_check():
    with pytest.raises(DimensionMismatch):
        relind0(diag_projection([1, 0]), diag_projection([1, 0, 0]))


@given(st.integers(2, 7), st.data())
def test_relind0_additive_over_direct_sums(n, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 2**31 - 1)))
    r = [data.draw(st.integers(0, n)) for _ in range(4)]
    p1, q1 = random_projection(rng, n, r[0]), random_projection(rng, n, r[1])
    p2, q2 = random_projection(rng, n, r[2]), random_projection(rng, n, r[3])

    def dsum(a, b):
        z = np.zeros((2 * n, 2 * n), dtype=complex)
        z[:n, :n], z[n:, n:] = a.matrix, b.matrix
        return SpectralProjection.from_matrix(z)

    assert relind0(dsum(p1, p2), dsum(q1, q2)) == relind0(p1, q1) + relind0(p2, q2)


@given(st.integers(2, 7), st.data())
def test_relind0_additive_over_triples(n, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 2**31 - 1)))
    p, q, r = (random_projection(rng, n, data.draw(st.integers(0, n))) for _ in range(3))
    assert relind0(p, r) == relind0(p, q) + relind0(q, r)


@given(st.integers(2, 6), st.data())
def test_relind0_homotopy_invariant(n, data):
    # conjugating P by a path of unitaries exp(itA) keeps the relative index fixed
    rng = np.random.default_rng(data.draw(st.integers(0, 2**31 - 1)))
    p = random_projection(rng, n, data.draw(st.integers(0, n)))
    q = random_projection(rng, n, data.draw(st.integers(0, n)))
    w, v = np.linalg.eigh(random_hermitian(rng, n))
    values = set()
    for t in np.linspace(0.0, 1.0, 8):
        u = (v * np.exp(1j * t * w)) @ v.conj().T
        values.add(relind0(SpectralProjection.from_matrix(u @ p.matrix @ u.conj().T), q))
    assert len(values) == 1


def near_commuting_unitary(rng, p, eps):
    # exp(i(A + eps B)) with A block diagonal for P
    n = p.dim
    a = random_hermitian(rng, n)
    a = p.matrix @ a @ p.matrix + (np.eye(n) - p.matrix) @ a @ (np.eye(n) - p.matrix)
    w, v = np.linalg.eigh(a + eps * random_hermitian(rng, n))
    return (v * np.exp(1j * w)) @ v.conj().T


@given(st.integers(2, 6), st.floats(0.0, 0.3), st.data())
def test_relind0_of_conjugate_is_compressed_index(n, eps, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 2**31 - 1)))
    p = random_projection(rng, n, data.draw(st.integers(0, n)))
    u = near_commuting_unitary(rng, p, eps)
    conj = SpectralProjection.from_matrix(u.conj().T @ p.matrix @ u)
    basis = p.range_basis()
    compressed = basis.conj().T @ u @ basis
    s = np.linalg.svd(compressed, compute_uv=False) if compressed.size else np.zeros(0)
    kernel = cokernel = int(np.sum(s < 1e-9))
    assert relind0(p, conj) == kernel - cokernel


def test_unitary_block_of_sigma_x_projection():
    p = SpectralProjection.from_matrix(0.5 * (np.eye(2) + SX))
    np.testing.assert_allclose(projection_to_unitary_block(p, G2), [[1.0]])
    with pytest.raises(NotOdd):
        projection_to_unitary_block(diag_projection([1, 0]), G2)


def winding_loop(k, samples=32):
    def proj(t):
        h = np.cos(k * t) * SX + np.sin(k * t) * SY
        return positive_spectral_projection(h, 0.5)

    return loop_from_function(proj, samples, G2)


@pytest.mark.parametrize("k", [-2, -1, 1, 3])
def test_relind1_counts_relative_winding(k):
    assert relind1(winding_loop(k), winding_loop(0)) == k
    assert relind1(winding_loop(0), winding_loop(k)) == -k


def test_relind1_additive_in_first_argument():
    a = relind1(winding_loop(2), winding_loop(1))
    b = relind1(winding_loop(1), winding_loop(0))
    assert a + b == relind1(winding_loop(2), winding_loop(0))


def test_projection_loop_validation():
    with pytest.raises(ValueError):
        ProjectionLoop([diag_projection([1, 0]), diag_projection([1, 1])], G2)
    with pytest.raises(ValueError):
        ProjectionLoop([diag_projection([1, 0]), diag_projection([0, 1])], G2)


def linear_path(h0, h1, samples=9):
    return OperatorPath.from_function(lambda t: (1 - t) * h0 + t * h1, 0.0, 1.0, samples)


def test_flow_of_a_single_crossing():
    assert spectral_flow0(linear_path(np.diag([-1.0, 2.0]), np.diag([1.0, 2.0]))) == 1
    assert spectral_flow0(linear_path(np.diag([1.0, 2.0]), np.diag([-1.0, -2.0]))) == -2


def test_flow_zero_eigenvalue_counts_as_nonnegative():
    assert spectral_flow0(linear_path(np.diag([-1.0]), np.diag([0.0]))) == 1


def test_flow_report_records_crossings():
    rep = spectral_flow0(linear_path(np.diag([-1.0, 3.0]), np.diag([1.0, -3.0]), 5), report=True)
    assert rep.value == 0
    assert sorted(c[2] for c in rep.crossings) == [-1, 1]


def test_flow_without_builder_cannot_refine():
    hs = [np.diag([-1.0]), np.diag([1.0])]
    with pytest.raises(RefinementExhausted):
        spectral_flow0(OperatorPath(np.array([0.0, 1.0]), hs), window=0.5, max_refine=0)


@given(st.integers(1, 5), st.data())
def test_flow_equals_endpoint_relative_index(n, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 2**31 - 1)))
    h0 = random_hermitian(rng, n)
    h1 = random_hermitian(rng, n)
    for h in (h0, h1):
        if np.min(np.abs(np.linalg.eigvalsh(h))) < 1e-2:
            return
    flow = spectral_flow0(linear_path(h0, h1))
    rel = relind0(positive_spectral_projection(h1, 1e-3), positive_spectral_projection(h0, 1e-3))
    assert flow == rel


@given(st.integers(1, 4), st.data())
def test_flow_concatenates_and_reverses(n, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 2**31 - 1)))
    hs = [random_hermitian(rng, n) for _ in range(3)]
    if min(np.min(np.abs(np.linalg.eigvalsh(h))) for h in hs) < 1e-2:
        return
    a, b = linear_path(hs[0], hs[1]), linear_path(hs[1], hs[2])
    joined = stack_paths([a, b])
    assert spectral_flow0(joined) == spectral_flow0(a) + spectral_flow0(b)
    assert spectral_flow0(a.reversed()) == -spectral_flow0(a)


def test_flow_on_a_loop_with_bulk_mask():
    # one mode rises through zero on site 0, is rotated onto site 1 and falls back there
    def h(t):
        c, s = np.cos(np.pi * t), np.sin(np.pi * t)
        r = np.array([[c, -s], [s, c]])
        return r @ np.diag([np.sin(2 * np.pi * (t - 0.1)), 2.0]) @ r.T

    path = OperatorPath.from_function(h, 0.0, 1.0, 33, circle=True)
    assert spectral_flow0(path, bulk_mask=np.array([1.0, 0.0])) == 1
    assert spectral_flow0(path, bulk_mask=np.array([0.0, 1.0])) == -1
    assert spectral_flow0(path) == 0


def test_circle_path_must_close():
    with pytest.raises(ValueError):
        OperatorPath(np.array([0.0, 1.0]), [np.eye(1), -np.eye(1)], circle=True)


@pytest.mark.parametrize("sign", [1, -1])
def test_suspension_oracle_matches_flow(sign):
    path = linear_path(np.diag([-sign * 1.0]), np.diag([sign * 1.0]))
    assert suspension_index_oracle(path, grid_points=200) == spectral_flow0(path) == sign

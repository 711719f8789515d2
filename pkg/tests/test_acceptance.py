"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``[n] ... PASS|FAIL`` line before asserting, so
the summary survives in a plain ``pytest -v`` log.
"""

import time

import numpy as np
import pytest

from index_lab.callias import callias_verify, cobordism_check, hedgehog_scenario
from index_lab.geometry import CylinderSpec, LandauSpec, LineSpec, TorusSpec
from index_lab.grading import Symmetry
from index_lab.pairlab import (
    EVEN_SIGN,
    bott_field,
    chern_oracle,
    diagonal_symbol,
    even_pairing,
    even_pairing_report,
    hardy_projection,
    monomial,
    odd_pairing,
    odd_pairing_report,
    rotated_symbol,
)
from index_lab.product import gapped_vanishing, index_by_chirality, line_index_triple, line_product, random_kink
from index_lab.projflow import OperatorPath, relind0, spectral_flow0
from index_lab.grading import SpectralProjection
from index_lab.toeplitz import (
    even_even_toeplitz_index,
    hardy_toeplitz_index,
    hedgehog_family,
    landau_kernel,
    landau_multiplication,
    q1_vanishing_certificate,
    toeplitz_compress,
    toeplitz_family_flow,
)

CYLINDER = CylinderSpec(12.0, 160, 12)
KS = [-2, -1, 0, 1, 2]


@pytest.fixture
def verdict(capsys):
    def emit(number, title, ok, detail=""):
        with capsys.disabled():
            tail = f" ({detail})" if detail else ""
            print(f"\n[{number:>2}] {title}: {'PASS' if ok else 'FAIL'}{tail}")
        assert ok, f"{title}: {detail}"

    return emit


def is_linear(ks, values):
    if any(not isinstance(v, (int, np.integer)) for v in values):
        return False
    slope = (values[-1] - values[0]) / (ks[-1] - ks[0])
    return all(v == values[0] + slope * (k - ks[0]) for k, v in zip(ks, values))


def test_line_index_equals_flow_and_relative_index(verdict):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    bad = []
    seen = set()
    for trial in range(20):
        fiber = int(rng.integers(1, 5))
        fn, _, _ = random_kink(rng, fiber)
        out = line_index_triple(fn, LineSpec(20.0, 400))
        seen.add(out["index"])
        if not (out["index"] == out["sf"] == out["relind"]):
            bad.append((trial, fiber, out["index"], out["sf"], out["relind"]))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 60.0
    verdict(1, "line index = spectral flow = relative index on 20 random paths", ok,
            f"{elapsed:.1f} s, indices seen {sorted(seen, key=str)}, mismatches {bad}")


def test_odd_odd_cylinder_index_against_boundary_pairing(verdict):
    start = time.perf_counter()
    lhs, rhs = [], []
    for k in KS:
        rep = callias_verify(hedgehog_scenario(CYLINDER, k, (1, 1)))
        lhs.append(rep.lhs.value)
        rhs.append(rep.rhs)
    elapsed = time.perf_counter() - start
    ok = lhs == rhs and is_linear(KS, lhs) and elapsed < 120.0
    verdict(2, "(1,1) cylinder index = boundary pairing, linear in k", ok,
            f"index {lhs}, pairing {rhs}, {elapsed:.1f} s")


def test_even_even_cylinder_index_against_boundary_flow(verdict):
    lhs, flow = [], []
    for k in KS:
        rep = callias_verify(hedgehog_scenario(CYLINDER, k, (0, 0)), sign=-1)
        lhs.append(rep.lhs.value)
        flow.append(rep.rhs)
    ok = lhs == [-f for f in flow] and is_linear(KS, lhs) and lhs != [0] * 5
    verdict(3, "(0,0) cylinder index = oriented boundary spectral flow", ok,
            f"index {lhs}, raw flow {flow}, orientation sign -1")


def test_hardy_toeplitz_odd_pairing(verdict):
    rows = []
    for k in range(-3, 4):
        rep = odd_pairing_report(monomial(k), hardy_projection(16))
        rows.append((k, rep.value, rep.flow, rep.kernel_count))
    ok = all(k == v == f == c for k, v, f, c in rows)
    verdict(4, "odd pairing of z^k = k by flow and by filtered kernel count", ok, f"{rows}")


def test_even_even_toeplitz_identity(verdict):
    spec = LandauSpec(96, 3)
    rows = []
    for k in KS:
        rep = even_even_toeplitz_index(spec, {k: 1.0})
        rows.append((k, rep.lhs, rep.product_index, rep.agree))
    ok = all(a and lhs == prod for _, lhs, prod, a in rows)
    verdict(5, "Index(T+) - Index(T-) = product index on the Landau model", ok,
            f"(k, toeplitz, product) {[r[:3] for r in rows]}")


def test_toeplitz_family_flow(verdict):
    spec = LandauSpec(48, 3)
    one = toeplitz_family_flow(hedgehog_family(1), spec)
    two = toeplitz_family_flow(hedgehog_family(2), spec)
    ok = (one.agree and two.agree and abs(one.toeplitz_flow) == 1
          and two.toeplitz_flow == 2 * one.toeplitz_flow)
    verdict(6, "Toeplitz family flow = product family flow, doubling with speed", ok,
            f"speed 1: {one.toeplitz_flow}/{one.product_flow}, speed 2: {two.toeplitz_flow}/{two.product_flow}")


def test_gapped_and_clifford_vanishing(verdict):
    v11, _ = gapped_vanishing((1, 1))
    v01, _ = gapped_vanishing((0, 1))
    spec = LandauSpec(32, 3)
    kp = landau_kernel(spec)
    f = landau_multiplication({1: 1.0}, spec)
    n = f.shape[0]
    odd = np.zeros((2 * n, 2 * n), dtype=complex)
    odd[n:, :n], odd[:n, n:] = f, f.conj().T
    certs = []
    with pytest.warns(UserWarning):
        certs.append(q1_vanishing_certificate(toeplitz_compress(odd, kp, (0, 1)))[1])
    with pytest.warns(UserWarning):
        certs.append(q1_vanishing_certificate(toeplitz_compress(0.5 * (f + f.conj().T), kp, (1, 1)))[1])
    ok = v11 == 0 and v01 == 0 and all(c is Symmetry.EXACT for c in certs)
    verdict(7, "q = 1 vanishing by gap and by exact Clifford symmetry", ok,
            f"gapped (1,1) {v11}, (0,1) {v01}, certificates {[c.value for c in certs]}")


def test_torus_even_pairing(verdict):
    spec = TorusSpec(8)
    b = even_pairing_report(bott_field(spec), spec)
    c = even_pairing_report(bott_field(spec).conjugate(), spec)
    ok = (b.value == b.calibrated and c.value == c.calibrated and abs(b.value) == 1
          and c.value == -b.value)
    verdict(8, "even pairing = calibrated lattice Chern number, conjugate negates", ok,
            f"Bott {b.value} (Chern {b.oracle}), conjugate {c.value} (Chern {c.oracle}), sign {EVEN_SIGN}")


def test_cobordism_invariance(verdict):
    rng = np.random.default_rng(5)
    line_values = []
    for fiber in (1, 2, 3):
        a = rng.normal(size=(fiber, fiber)) + 1j * rng.normal(size=(fiber, fiber))
        s = a + a.conj().T + 6 * np.eye(fiber) * rng.choice([-1, 1])
        vals = np.broadcast_to(s, (400, fiber, fiber))
        line_values.append(index_by_chirality(line_product(vals)).value)
    cyl = callias_verify(hedgehog_scenario(CylinderSpec(8.0, 80, 8), 0, (0, 0)), sign=-1)
    zero = cobordism_check(diagonal_symbol([1, -1]).samples, modes=12)
    control = cobordism_check(lambda th: np.exp(1j * np.asarray(th)), modes=12)
    ok = line_values == [0, 0, 0] and cyl.lhs.value == 0 and cyl.agree and zero == 0 and control != 0
    verdict(9, "invertible potentials and extendable boundaries give zero", ok,
            f"line {line_values}, cylinder {cyl.lhs.value}, winding-0 flow {zero}, winding-1 control {control}")


def _projection(rng, n, rank):
    q, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return SpectralProjection.from_basis(q[:, :rank])


def _relind_suite():
    rng = np.random.default_rng(10)
    for _ in range(60):
        n = int(rng.integers(2, 8))
        p, q, r = (_projection(rng, n, int(rng.integers(0, n + 1))) for _ in range(3))
        if relind0(p, r) != relind0(p, q) + relind0(q, r):
            return False
        w, v = np.linalg.eigh(rng.normal(size=(n, n)))
        vals = set()
        for t in np.linspace(0, 1, 8):
            u = (v * np.exp(1j * t * w)) @ v.conj().T
            vals.add(relind0(SpectralProjection.from_matrix(u @ p.matrix @ u.conj().T), q))
        if len(vals) != 1:
            return False
    return True


def _compression_suite():
    rng = np.random.default_rng(11)
    for _ in range(60):
        n = int(rng.integers(2, 8))
        p = _projection(rng, n, int(rng.integers(0, n + 1)))
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
        u = (v * np.exp(1j * rng.uniform(0, 3) * w)) @ v.conj().T
        conj = SpectralProjection.from_matrix(u.conj().T @ p.matrix @ u)
        basis = p.range_basis()
        if basis.shape[1] == 0:
            continue
        block = basis.conj().T @ u @ basis
        kernel = int(np.sum(np.linalg.svd(block, compute_uv=False) < 1e-9))
        cokernel = int(np.sum(np.linalg.svd(block.conj().T, compute_uv=False) < 1e-9))
        if relind0(p, conj) != kernel - cokernel:
            return False
    # on the Hardy space the compressed index is no longer forced to vanish
    return all(hardy_toeplitz_index({k: 1.0}) == -k for k in (-2, -1, 1, 2))


def _flow_suite():
    rng = np.random.default_rng(12)
    checked = 0
    while checked < 40:
        n = int(rng.integers(1, 5))
        hs = []
        for _ in range(3):
            a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            hs.append(0.5 * (a + a.conj().T))
        if min(np.min(np.abs(np.linalg.eigvalsh(h))) for h in hs) < 1e-2:
            continue
        paths = [OperatorPath.from_function(lambda t, a=a, b=b: (1 - t) * a + t * b, 0, 1, 9)
                 for a, b in ((hs[0], hs[1]), (hs[1], hs[2]))]
        f1, f2 = spectral_flow0(paths[0]), spectral_flow0(paths[1])
        if spectral_flow0(paths[0].concat(paths[1])) != f1 + f2:
            return False
        if spectral_flow0(paths[0].reversed()) != -f1:
            return False
        checked += 1
    return True


def _doubling_suite():
    checks = []
    for degrees in ([1], [-3], [2, -1, 1]):
        u = rotated_symbol(degrees, 0.4)
        checks.append(odd_pairing(u, hardy_projection(12)) == odd_pairing(u, hardy_projection(24)))
    checks.append(hardy_toeplitz_index({2: 1.0}, 8) == hardy_toeplitz_index({2: 1.0}, 16))
    small, large = TorusSpec(4), TorusSpec(8)
    checks.append(even_pairing(bott_field(small), small) == even_pairing(bott_field(large), large))
    checks.append(chern_oracle(bott_field(small)) == chern_oracle(bott_field(large)))
    for k in (-1, 2):
        a = even_even_toeplitz_index(LandauSpec(48, 3), {k: 1.0})
        b = even_even_toeplitz_index(LandauSpec(96, 3), {k: 1.0})
        checks.append(a.lhs == b.lhs and a.product_index == b.product_index)
    k = 1
    a = callias_verify(hedgehog_scenario(CylinderSpec(8.0, 80, 6), k, (0, 0)), sign=-1)
    b = callias_verify(hedgehog_scenario(CylinderSpec(8.0, 160, 12), k, (0, 0)), sign=-1)
    checks.append(a.lhs.value == b.lhs.value and a.rhs == b.rhs)
    return all(checks)


def test_structural_suites(verdict):
    timings = {}
    results = {}
    for name, suite in (("relative index", _relind_suite), ("compression identity", _compression_suite),
                        ("flow concatenation and reversal", _flow_suite),
                        ("truncation doubling", _doubling_suite)):
        start = time.perf_counter()
        results[name] = suite()
        timings[name] = time.perf_counter() - start
    ok = all(results.values()) and all(t < 30.0 for t in timings.values())
    detail = ", ".join(f"{k} {'ok' if results[k] else 'broken'} {timings[k]:.1f} s" for k in results)
    verdict(10, "structural property suites", ok, detail)

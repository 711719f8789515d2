"""Index pairings of unitaries and projections with circle and torus Dirac operators.

Odd pairing: ``-Index(P u P + 1 - P)`` on the Hardy space of the circle.
Even pairing: ``Index(p_- D_+ p_+)`` for a projection field on the 2-torus,
compared against an independent plaquette (lattice curvature) Chern number.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numlin
from .callias import unitary_flow
from .errors import ChernOracleMismatch, InconclusiveIndex, MethodDisagreement, NormExceeded
from .geometry import (
    SIGMA1,
    SIGMA2,
    SIGMA3,
    TorusSpec,
    circle_dirac,
    dft_matrix,
    torus_momenta,
    toeplitz_multiplication,
)
from .grading import SpectralProjection
from .product import INCONCLUSIVE, block_index
from .numlin import phase_winding

UNITARITY_TOL = 1e-8
PROJECTION_TOL = 1e-8
RETAINED_FRACTION = 0.75

# Chern numbers from the plaquette sum come out with the opposite sign to the
# chirality count of p D_+ p with the D_+ = i(k1 + i k2) convention used here.
# Fixed once from the Bott projection with mu = 1.
EVEN_SIGN = -1


# ----------------------------------------------------------------- unitaries


@dataclass
class UnitarySymbol:
    """A unitary matrix function on the circle with a known bandwidth."""

    fn: object
    degree: int
    size: int = 1

    def __post_init__(self):
        theta = 2 * np.pi * np.arange(64) / 64
        u = self.samples(theta)
        eye = np.eye(self.size)
        defect = max(float(np.max(np.abs(x.conj().T @ x - eye))) for x in u)
        if defect > UNITARITY_TOL:
            raise ValueError(f"symbol is not unitary (defect {defect:.2e})")

    def samples(self, theta) -> np.ndarray:
        vals = np.asarray(self.fn(np.asarray(theta, dtype=float)), dtype=complex)
        if self.size == 1 and vals.ndim == 1:
            return vals[:, None, None]
        return vals

    def __call__(self, theta):
        return self.fn(theta)

    def det_winding(self, samples: int = 256) -> int:
        theta = 2 * np.pi * np.arange(samples) / samples
        dets = np.linalg.det(self.samples(theta))
        return phase_winding(dets)


def monomial(k: int) -> UnitarySymbol:
    return UnitarySymbol(lambda th: np.exp(1j * k * np.asarray(th)), abs(k))


def diagonal_symbol(degrees) -> UnitarySymbol:
    degrees = [int(d) for d in degrees]

    def fn(th):
        th = np.asarray(th, dtype=float)
        out = np.zeros(th.shape + (len(degrees),) * 2, dtype=complex)
        for i, d in enumerate(degrees):
            out[..., i, i] = np.exp(1j * d * th)
        return out

    return UnitarySymbol(fn, max(map(abs, degrees), default=0), len(degrees))


def rotated_symbol(degrees, mixing: float) -> UnitarySymbol:
    """``R diag(z^d) R^H`` with a fixed real rotation in the first two entries."""
    base = diagonal_symbol(degrees)
    n = base.size
    r = np.eye(n, dtype=complex)
    if n >= 2:
        c, s = np.cos(mixing), np.sin(mixing)
        r[:2, :2] = [[c, -s], [s, c]]

    def fn(th):
        return r @ base.samples(th) @ r.conj().T

    return UnitarySymbol(fn, base.degree, n)


def hardy_projection(modes: int) -> SpectralProjection:
    """Projection onto Fourier modes ``n >= 0`` of ``n = -modes..modes``."""
    if modes < 4:
        raise ValueError("hardy projection needs at least 4 modes")
    n = np.arange(-modes, modes + 1)
    eye = np.eye(n.size, dtype=complex)
    return SpectralProjection.from_basis(eye[:, n >= 0], gap=0.5)


def _hardy_modes(p: SpectralProjection) -> int:
    return (p.dim - 1) // 2


def _symbol_callable(u: UnitarySymbol):
    def fn(th):
        vals = u.samples(np.atleast_1d(th))
        return vals[:, 0, 0] if u.size == 1 else vals

    return fn


@dataclass
class OddPairingReport:
    value: int
    flow: int
    kernel_count: int | str
    winding: int


def odd_pairing_report(u: UnitarySymbol, p: SpectralProjection) -> OddPairingReport:
    """``-Index(P u P + 1 - P)`` by boundary spectral flow and by filtered kernel counting.

    Raises :class:`MethodDisagreement` when the two disagree and asserts the
    result equals the winding of ``det u``.
    """
    modes = _hardy_modes(p)
    if modes < 4 * max(1, u.degree):
        raise ValueError(f"{modes} modes are too few for a symbol of degree {u.degree}")

    fn = _symbol_callable(u)
    flow = int(unitary_flow(fn, modes, offset=0.5))
    mult = toeplitz_multiplication(fn, modes)
    big_p = np.kron(np.eye(u.size), p.matrix)
    a = big_p @ mult @ big_p + np.eye(big_p.shape[0]) - big_p
    n = np.arange(-modes, modes + 1)
    interior = np.kron(np.ones(u.size), (np.abs(n) <= RETAINED_FRACTION * modes).astype(float))
    counted = block_index(a, interior, interior)
    kernel = counted.value if counted.value == INCONCLUSIVE else -counted.value
    if kernel != INCONCLUSIVE and kernel != flow:
        raise MethodDisagreement(f"spectral flow {flow} against kernel count {kernel}")
    winding = u.det_winding()
    assert flow == winding, f"odd pairing {flow} differs from det winding {winding}"
    return OddPairingReport(flow, flow, kernel, winding)


def odd_pairing(u: UnitarySymbol, p: SpectralProjection) -> int:
    return odd_pairing_report(u, p).value


def commutator_rank(p: SpectralProjection, u: UnitarySymbol, tol: float = 1e-8) -> int:
    modes = _hardy_modes(p)
    mult = toeplitz_multiplication(_symbol_callable(u), modes)
    big_p = np.kron(np.eye(u.size), p.matrix)
    s = np.linalg.svd(big_p @ mult - mult @ big_p, compute_uv=False)
    return int(np.count_nonzero(s > tol))


def exp_class(t) -> np.ndarray:
    """``exp(i pi (T + 1))`` by spectral calculus for Hermitian ``T`` with norm at most one."""
    t = numlin.as_matrix(t)
    numlin.check_hermitian(t, "T")
    vals, vecs = numlin.eigh(t)
    if vals.size and np.max(np.abs(vals)) > 1 + 1e-8:
        raise NormExceeded(f"norm {np.max(np.abs(vals)):.6g} exceeds 1")
    return (vecs * np.exp(1j * np.pi * (vals + 1.0))) @ vecs.conj().T


# ------------------------------------------------------------ torus fields


@dataclass
class KProjectionField:
    """Projection-valued samples ``p(x)`` on the ``(2K+1)^2`` torus grid, site-major."""

    values: np.ndarray
    side: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 3 or v.shape[0] != self.side ** 2 or v.shape[1] != v.shape[2]:
            raise ValueError("expected values of shape (side^2, N, N)")
        herm = np.max(np.abs(v - np.conj(np.swapaxes(v, 1, 2))))
        idem = np.max(np.abs(v @ v - v))
        if max(herm, idem) > PROJECTION_TOL:
            raise ValueError(f"samples are not projections (defect {max(herm, idem):.2e})")
        ranks = np.rint(np.real(np.trace(v, axis1=1, axis2=2))).astype(int)
        if np.any(ranks != ranks[0]):
            raise ValueError("projection rank varies over the torus")
        self.values = v

    @property
    def rank(self) -> int:
        return int(round(np.real(np.trace(self.values[0]))))

    @property
    def fiber(self) -> int:
        return self.values.shape[1]

    def frames(self) -> np.ndarray:
        """Orthonormal frame of ``Ran p(x)`` at every site, shape ``(sites, N, rank)``."""
        vals, vecs = np.linalg.eigh(self.values)
        return vecs[:, :, vals[0] > 0.5] if self.rank else vecs[:, :, :0]

    def conjugate(self) -> "KProjectionField":
        return KProjectionField(self.values.conj(), self.side)

    def direct_sum(self, other: "KProjectionField") -> "KProjectionField":
        n1, n2 = self.fiber, other.fiber
        out = np.zeros((self.values.shape[0], n1 + n2, n1 + n2), dtype=complex)
        out[:, :n1, :n1] = self.values
        out[:, n1:, n1:] = other.values
        return KProjectionField(out, self.side)

    def difference_quotient(self) -> float:
        grid = self.values.reshape(self.side, self.side, self.fiber, self.fiber)
        step = 2 * np.pi / self.side
        d1 = np.abs(np.roll(grid, -1, 0) - grid).max()
        d2 = np.abs(np.roll(grid, -1, 1) - grid).max()
        return float(max(d1, d2) / step)


def _grid(spec: TorusSpec):
    side = spec.side
    x = 2 * np.pi * np.arange(side) / side
    x1, x2 = np.meshgrid(x, x, indexing="ij")
    return x1.ravel(), x2.ravel()


def bott_field(spec: TorusSpec, mu: float = 1.0) -> KProjectionField:
    """``(1 + n.sigma)/2`` for ``n`` the normalized ``(sin x1, sin x2, mu + cos x1 + cos x2)``."""
    x1, x2 = _grid(spec)
    n = np.stack([np.sin(x1), np.sin(x2), mu + np.cos(x1) + np.cos(x2)], axis=-1)
    norms = np.linalg.norm(n, axis=-1, keepdims=True)
    if np.min(norms) < 1e-6:
        raise ValueError(f"mu = {mu} makes the field vanish on the grid")
    n = n / norms
    sig = np.array([SIGMA1, SIGMA2, SIGMA3])
    return KProjectionField(0.5 * (np.eye(2) + np.einsum("si,iab->sab", n, sig)), spec.side)


def constant_field(spec: TorusSpec, vector=(1.0, 0.0)) -> KProjectionField:
    v = np.asarray(vector, dtype=complex)
    v = v / np.linalg.norm(v)
    p = np.outer(v, v.conj())
    return KProjectionField(np.broadcast_to(p, (spec.side ** 2,) + p.shape).copy(), spec.side)


def chern_oracle(field: KProjectionField) -> int:
    """Lattice Chern number from plaquette products of frame overlaps."""
    side = field.side
    frames = field.frames().reshape(side, side, field.fiber, field.rank)
    if field.rank == 0:
        return 0

    def link(axis):
        nxt = np.roll(frames, -1, axis)
        ov = np.einsum("abir,abis->abrs", frames.conj(), nxt)
        det = np.linalg.det(ov)
        if np.min(np.abs(det)) < 1e-8:
            raise ChernOracleMismatch("frame overlap degenerate: grid too coarse")
        return det / np.abs(det)

    u1, u2 = link(0), link(1)
    flux = np.angle(u1 * np.roll(u2, -1, 0) / (np.roll(u1, -1, 1) * u2))
    total = flux.sum() / (2 * np.pi)
    value = int(np.rint(total))
    if abs(total - value) > 1e-6:
        raise ChernOracleMismatch(f"plaquette sum {total:.6f} is not an integer")
    return value


@dataclass
class EvenPairingReport:
    value: int | str
    oracle: int
    calibrated: int
    gap_ratio: float
    notes: list


def even_pairing_report(field: KProjectionField, spec: TorusSpec) -> EvenPairingReport:
    """``Index(p_- D_+ p_+)`` by chirality counting on the compression to ``Ran p``.

    ``D_+`` is diagonal in momentum and conjugated to position by the DFT;
    modes are kept when they live on momenta with ``max |k_i| <= 0.75 K``.
    """
    spec.validate()
    side = spec.side
    if field.side != side:
        raise ValueError(f"field sampled on side {field.side}, torus side {side}")
    if not np.isfinite(field.difference_quotient()):
        raise ValueError("field is not sampled smoothly")
    f1 = dft_matrix(side)
    f2 = np.kron(f1, f1)
    k1, k2 = torus_momenta(spec)
    d_pos = f2.conj().T @ ((1j * (k1 + 1j * k2))[:, None] * f2)
    keep = (np.maximum(np.abs(k1), np.abs(k2)) <= RETAINED_FRACTION * spec.modes_per_axis).astype(float)
    m_pos = f2.conj().T @ (keep[:, None] * f2)
    sites = side * side
    frames = field.frames()
    n, r = field.fiber, field.rank
    # V maps rank-r sections to fiber (x) position
    v = np.zeros((n * sites, r * sites), dtype=complex)
    idx = np.arange(sites)
    for a in range(n):
        for j in range(r):
            v[a * sites + idx, j * sites + idx] = frames[:, a, j]
    a_op = v.conj().T @ np.kron(np.eye(n), d_pos) @ v
    w = v.conj().T @ np.kron(np.eye(n), m_pos) @ v
    counted = block_index(a_op, w, w, method="evenPairing")
    oracle = chern_oracle(field)
    calibrated = EVEN_SIGN * oracle
    return EvenPairingReport(counted.value, oracle, calibrated, counted.gap_ratio, counted.notes)


def even_pairing(field: KProjectionField, spec: TorusSpec) -> int:
    rep = even_pairing_report(field, spec)
    if rep.value == INCONCLUSIVE:
        raise InconclusiveIndex("; ".join(rep.notes) or "no certified zero cluster")
    if rep.value != rep.calibrated:
        raise ChernOracleMismatch(f"pairing {rep.value} against calibrated oracle {rep.calibrated}")
    return rep.value


def circle_dirac_commutes(p: SpectralProjection) -> float:
    d = circle_dirac(_hardy_modes(p))
    return float(np.max(np.abs(d @ p.matrix - p.matrix @ d)))

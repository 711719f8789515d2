"""Kernel projections, Toeplitz compressions and their index identities.

The even-even and family identities are checked on the lowest-Landau-level
model: the Dirac operator of a constant magnetic field on the plane has an
infinite-dimensional kernel in positive chirality, which is what makes a
compressed multiplication operator Fredholm with a nonzero index.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
import scipy.linalg as sl

from . import numlin
from .callias import unitary_flow
from .errors import GapViolated, MethodDisagreement, SignatureTrivial
from .geometry import (
    SIGMA1,
    SIGMA2,
    SIGMA3,
    LandauSpec,
    landau_dirac,
    landau_interior_mask,
    landau_symbol_matrix,
)
from .grading import (
    Grading,
    Signature,
    SpectralProjection,
    Symmetry,
    clifford_defect_check,
    op_norm,
)
from .product import (
    INCONCLUSIVE,
    IndexResult,
    block_index,
    build_product_operator,
    family_index_over_circle,
    index_by_chirality,
)
from .projflow import OperatorPath, spectral_flow0

GAMMA_S = Grading.diagonal([1.0, -1.0])
RETAINED_FRACTION = 0.75


@dataclass
class KernelProjection:
    projection: SpectralProjection
    gap: float
    kernel_dim: int
    plus: np.ndarray | None = None
    minus: np.ndarray | None = None

    @property
    def basis(self) -> np.ndarray:
        return self.projection.range_basis()


def kernel_projection(d, min_gap: float, grading: Grading | None = None) -> KernelProjection:
    """Projection onto the kernel of ``d`` with the distance to the rest of the spectrum.

    With a grading the kernel basis is rotated into chirality eigenvectors,
    giving the two components ``plus`` and ``minus``.
    """
    d = numlin.as_matrix(d)
    vals, vecs = numlin.eigh(d)
    scale = max(1.0, float(np.max(np.abs(vals), initial=0.0)))
    zero = np.abs(vals) <= 1e-8 * scale
    rest = np.abs(vals[~zero])
    gap = float(rest.min()) if rest.size else np.inf
    if gap < min_gap:
        raise GapViolated(f"nonzero eigenvalue {gap:.3e} inside the required gap {min_gap:g}")
    basis = vecs[:, zero]
    plus = minus = None
    if grading is not None:
        c = basis.conj().T @ (grading.involution @ basis)
        cv, cw = np.linalg.eigh(0.5 * (c + c.conj().T))
        basis = basis @ cw
        if np.any(np.abs(np.abs(cv) - 1.0) > 1e-6):
            raise GapViolated("kernel is not spanned by chirality eigenvectors")
        plus, minus = basis[:, cv > 0], basis[:, cv < 0]
    proj = SpectralProjection.from_basis(basis, gap=gap)
    return KernelProjection(proj, gap, basis.shape[1], plus, minus)


@dataclass
class ToeplitzOperator:
    matrix: np.ndarray
    signature: Signature
    blocks: tuple | None = None
    notes: list = field(default_factory=list)


def _lift(basis: np.ndarray, fiber: int) -> np.ndarray:
    return np.kron(np.eye(fiber), basis)


def toeplitz_compress(f_op, kp: KernelProjection, sig, gamma_d: Grading | None = None,
                      gamma_s: Grading = GAMMA_S) -> ToeplitzOperator:
    """Compress a potential on ``fiber (x) H`` to ``fiber (x) ker D``.

    ``(0,0)`` gives ``P F P`` together with the chirality blocks of its
    lower-left entry ``f``; ``(1,0)`` gives ``P Gamma_D F P``.  For ``q = 1``
    the compression is still returned but a :class:`SignatureTrivial`
    warning records that its class is zero.
    """
    sig = sig if isinstance(sig, Signature) else Signature(*sig)
    f_op = numlin.as_matrix(f_op)
    h_dim = kp.projection.dim
    if f_op.shape[0] % h_dim:
        raise ValueError(f"operator of size {f_op.shape[0]} is not a multiple of {h_dim}")
    fiber = f_op.shape[0] // h_dim
    v = _lift(kp.basis, fiber)
    notes = []
    if sig.q == 1:
        msg = f"signature {sig}: the compressed class is zero"
        warnings.warn(msg, SignatureTrivial, stacklevel=2)
        notes.append(msg)
        return ToeplitzOperator(v.conj().T @ f_op @ v, sig, None, notes)
    if sig.p == 1:
        if gamma_d is None:
            raise ValueError("signature (1,0) needs the grading of D")
        g = np.kron(np.eye(fiber), gamma_d.dense())
        return ToeplitzOperator(v.conj().T @ g @ f_op @ v, sig, None, notes)
    blocks = None
    if kp.plus is not None and fiber == gamma_s.dim:
        splus, sminus = gamma_s.eigenbasis()
        e_plus = np.kron(splus, np.eye(h_dim))
        e_minus = np.kron(sminus, np.eye(h_dim))
        lower = e_minus.conj().T @ f_op @ e_plus
        blocks = (kp.plus.conj().T @ lower @ kp.plus, kp.minus.conj().T @ lower @ kp.minus)
    return ToeplitzOperator(v.conj().T @ f_op @ v, sig, blocks, notes)


def q1_vanishing_certificate(t: ToeplitzOperator, gamma_s: Grading = GAMMA_S):
    """Exact Clifford symmetry of a ``q = 1`` compression.

    ``(0,1)``: the fibre grading survives compression and anticommutes with
    ``T``.  ``(1,1)``: the doubled operator ``[[0, -iT], [iT, 0]]``
    anticommutes with the swap.  Returns ``(defect, Symmetry)``.
    """
    if t.signature.q != 1:
        raise ValueError("certificate applies to q = 1 compressions")
    m = t.matrix
    if t.signature.p == 0:
        k = m.shape[0] // gamma_s.dim
        g = Grading.from_matrix(np.kron(gamma_s.dense(), np.eye(k)))
        return clifford_defect_check(m, g)
    z = np.zeros_like(m)
    doubled = np.block([[z, -1j * m], [1j * m, z]])
    n = m.shape[0]
    swap = np.block([[np.zeros((n, n)), np.eye(n)], [np.eye(n), np.zeros((n, n))]])
    return clifford_defect_check(doubled, Grading.from_matrix(swap))


class DecayProfile(NamedTuple):
    singular_values: np.ndarray
    tail_ratio: float


def commutator_decay_profile(kp: KernelProjection, f_op) -> DecayProfile:
    """Singular values of ``[P, F]`` and the ratio ``sigma_k / sigma_1`` at ``k = dim/4``."""
    f_op = numlin.as_matrix(f_op)
    fiber = f_op.shape[0] // kp.projection.dim
    p = np.kron(np.eye(fiber), kp.projection.matrix)
    s = np.linalg.svd(p @ f_op - f_op @ p, compute_uv=False)
    if s.size == 0 or s[0] <= 1e-12:
        return DecayProfile(np.zeros_like(s), 0.0)
    return DecayProfile(s, float(s[len(s) // 4] / s[0]))


# ------------------------------------------------------------- Landau model


def _symbol_fn(symbol: dict):
    def fn(theta):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(theta.shape, dtype=complex)
        for k, c in symbol.items():
            out = out + c * np.exp(1j * k * theta)
        return out

    return fn


def _bandwidth(symbol: dict) -> int:
    return max((abs(int(k)) for k, c in symbol.items() if c != 0), default=0)


def landau_multiplication(symbol: dict, spec: LandauSpec) -> np.ndarray:
    """Multiplication by an angular symbol on ``F_+ (+) F_-``.

    The two chirality components carry levels ``0..L-1`` and ``0..L-2``.
    """
    fp = landau_symbol_matrix(symbol, spec.fock_modes, levels=range(spec.levels))
    fm = landau_symbol_matrix(symbol, spec.fock_modes, levels=range(spec.levels - 1))
    return sl.block_diag(fp, fm)


def landau_position_mask(spec: LandauSpec) -> np.ndarray:
    return np.concatenate([
        landau_interior_mask(spec, spec.levels, RETAINED_FRACTION),
        landau_interior_mask(spec, spec.levels - 1, RETAINED_FRACTION),
    ])


def hardy_toeplitz_index(symbol: dict, modes: int | None = None) -> int:
    """``Index(P u P) = -SF(D -> u^H D u)`` on the Hardy model of the boundary circle."""
    modes = modes or max(8, 4 * _bandwidth(symbol))
    flow = unitary_flow(_symbol_fn(symbol), modes, offset=0.5)
    return -int(flow)


@dataclass
class EvenEvenReport:
    index_t_plus: int | str
    index_t_minus: int | str
    product_index: int | str
    agree: bool
    cross_check: IndexResult | None = None
    product: IndexResult | None = None

    @property
    def lhs(self):
        if INCONCLUSIVE in (self.index_t_plus, self.index_t_minus):
            return INCONCLUSIVE
        return self.index_t_plus - self.index_t_minus


def even_even_toeplitz_index(spec: LandauSpec, symbol: dict, lam: float = 1.0) -> EvenEvenReport:
    """Compare ``Index(T_f^+) - Index(T_f^-)`` with the index of the graded product operator.

    ``symbol`` maps angular frequencies to coefficients of ``f``.  The
    Toeplitz side uses the boundary spectral flow as the primary value and
    a localization-filtered kernel count of ``T_f^+`` as a cross-check.
    """
    spec.validate()
    d, gamma_d = landau_dirac(spec)
    kp = kernel_projection(d, 0.5, gamma_d)
    f = landau_multiplication(symbol, spec)
    n = f.shape[0]
    big = np.zeros((2 * n, 2 * n), dtype=complex)
    big[n:, :n] = f
    big[:n, n:] = f.conj().T
    t = toeplitz_compress(big, kp, (0, 0))
    t_plus, t_minus = t.blocks
    mask = landau_position_mask(spec)
    w_plus = kp.plus.conj().T @ (mask[:, None] * kp.plus)
    cross = block_index(t_plus, w_plus, w_plus)
    primary = hardy_toeplitz_index(symbol)
    if cross.value != INCONCLUSIVE and cross.value != primary:
        raise MethodDisagreement(f"boundary flow gives {primary}, kernel count gives {cross.value}")
    if t_minus.size == 0:
        minus = 0
    else:
        w_minus = kp.minus.conj().T @ (mask[:, None] * kp.minus)
        minus = block_index(t_minus, w_minus, w_minus).value
    op = build_product_operator(big, d, Signature(0, 0), lam, gamma_s=GAMMA_S, gamma_d=gamma_d,
                                fiber_dim=2, position_interior=mask)
    prod = index_by_chirality(op)
    lhs = INCONCLUSIVE if minus == INCONCLUSIVE else primary - minus
    agree = prod.value != INCONCLUSIVE and lhs == prod.value
    return EvenEvenReport(primary, minus, prod.value, agree, cross, prod)


# ---------------------------------------------------------- family over S^1


MatrixSymbol = Callable[[float], dict]


def hedgehog_family(speed: int = 1) -> MatrixSymbol:
    """Degree-one map ``(t, theta) -> n / |n|`` direction with ``n`` a trig polynomial.

    ``F_t(theta) = sin(2 pi t) s1 + sin(theta) s2 + (1 + cos(2 pi t) + cos(theta)) s3``,
    invertible for every ``(t, theta)``.  Values map frequencies to 2x2
    coefficients.
    """

    def fam(t):
        a = 2 * np.pi * speed * t
        return {
            0: np.sin(a) * SIGMA1 + (1 + np.cos(a)) * SIGMA3,
            1: SIGMA2 / 2j + SIGMA3 / 2,
            -1: -SIGMA2 / 2j + SIGMA3 / 2,
        }

    return fam


def rotating_family(speed: int = 1) -> MatrixSymbol:
    """``cos(2 pi t) s3 + sin(2 pi t)(cos(theta) s1 + sin(theta) s2)``."""

    def fam(t):
        a = 2 * np.pi * speed * t
        return {
            0: np.cos(a) * SIGMA3,
            1: np.sin(a) * (SIGMA1 + 1j * SIGMA2) / 2,
            -1: np.sin(a) * (SIGMA1 - 1j * SIGMA2) / 2,
        }

    return fam


def constant_family(value=SIGMA3) -> MatrixSymbol:
    return lambda t: {0: np.asarray(value, dtype=complex)}


@dataclass
class FamilyFlowReport:
    toeplitz_flow: int
    product_flow: int
    agree: bool


class _LandauFamily:
    # frequency blocks are computed once and reused for every t
    def __init__(self, family: MatrixSymbol, spec: LandauSpec):
        self.family = family
        self.spec = spec
        freqs = family(0.0).keys()
        self.blocks = {k: landau_multiplication({k: 1.0}, spec) for k in freqs}

    def potential(self, t: float) -> np.ndarray:
        coeffs = self.family(t)
        return sum(np.kron(np.asarray(c, dtype=complex), self.blocks[k]) for k, c in coeffs.items())


def toeplitz_family_flow(family: MatrixSymbol, spec: LandauSpec, lam: float = 1.0,
                         samples: int = 48, window: float | None = None) -> FamilyFlowReport:
    """Bulk spectral flow of the compressed loop against the product-operator loop.

    Signature ``(1,0)``: the fibre is ungraded, ``D`` is the graded Landau
    operator.  Both flows count only crossings of modes localized on the
    retained band of angular momenta.
    """
    spec.validate()
    d, gamma_d = landau_dirac(spec)
    kp = kernel_projection(d, 0.5, gamma_d)
    lf = _LandauFamily(family, spec)
    fiber = np.asarray(family(0.0)[0]).shape[0]
    mask = landau_position_mask(spec)
    sig = Signature(1, 0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SignatureTrivial)

        def compressed(t):
            return toeplitz_compress(lf.potential(t % 1.0), kp, sig, gamma_d).matrix

    v = _lift(kp.basis, fiber)
    bulk = np.real(np.diag(v.conj().T @ (np.kron(np.ones(fiber), mask)[:, None] * v)))
    path = OperatorPath.from_function(compressed, 0.0, 1.0, samples, circle=True)
    t_flow = spectral_flow0(path, window=window, bulk_mask=bulk)

    def product(t):
        return build_product_operator(lf.potential(t), d, sig, lam, gamma_d=gamma_d,
                                      fiber_dim=fiber, position_interior=mask)

    p_flow = family_index_over_circle(product, samples=samples, window=window)
    return FamilyFlowReport(int(t_flow), int(p_flow), int(t_flow) == int(p_flow))


def landau_kernel(spec: LandauSpec) -> KernelProjection:
    d, gamma_d = landau_dirac(spec)
    return kernel_projection(d, 0.5, gamma_d)


def finite_kernel_triviality(t: np.ndarray) -> int:
    """Index of a square matrix, always zero: ``dim ker - dim coker``."""
    t = np.asarray(t)
    if t.shape[0] != t.shape[1]:
        raise ValueError("expected a square compression")
    tol = 1e-10 * max(1.0, op_norm(t))
    kernel = numlin.numerical_kernel(t, tol)[1] if t.size else 0
    cokernel = numlin.numerical_kernel(t.conj().T, tol)[1] if t.size else 0
    return kernel - cokernel


def symmetry_verdict(t: ToeplitzOperator) -> int | str:
    """Zero when an exact Clifford symmetry is certified, otherwise ``INCONCLUSIVE``."""
    _, verdict = q1_vanishing_certificate(t)
    return 0 if verdict is Symmetry.EXACT else INCONCLUSIVE

"""Z2-gradings, oddness checks and positive spectral projections."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import numlin
from .errors import DimensionMismatch, SpectrumTouchesZero

ODD_TOL = 1e-8


def op_norm(m) -> float:
    """Spectral norm for dense input, a cheap upper bound for sparse input."""
    if sp.issparse(m):
        a = abs(m)
        return float(np.sqrt(a.sum(axis=0).max() * a.sum(axis=1).max())) if m.nnz else 0.0
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


@dataclass(frozen=True)
class Signature:
    """Parities ``(p, q)`` of the potential and of the Dirac operator."""

    p: int
    q: int

    def __post_init__(self):
        if self.p not in (0, 1) or self.q not in (0, 1):
            raise ValueError(f"signature entries must be 0 or 1, got ({self.p}, {self.q})")

    @property
    def degree(self) -> int:
        return (self.p + self.q) % 2

    @property
    def graded(self) -> bool:
        return self.degree == 0

    def __str__(self):
        return f"({self.p},{self.q})"


@dataclass(frozen=True)
class Grading:
    """A self-adjoint unitary involution with its +1 multiplicity."""

    involution: object
    plus_rank: int

    @classmethod
    def from_matrix(cls, m) -> "Grading":
        dense = numlin.as_matrix(m) if not sp.issparse(m) else None
        if dense is not None:
            numlin.check_hermitian(dense, "grading")
            n = dense.shape[0]
            if np.max(np.abs(dense @ dense - np.eye(n)), initial=0.0) > 1e-10:
                raise ValueError("grading does not square to the identity")
            plus = int(round((np.trace(dense).real + n) / 2))
            return cls(dense, plus)
        numlin.check_hermitian(m, "grading")
        n = m.shape[0]
        sq = (m @ m - sp.identity(n)).tocoo()
        if np.max(np.abs(sq.data), initial=0.0) > 1e-10:
            raise ValueError("grading does not square to the identity")
        plus = int(round((m.diagonal().sum().real + n) / 2))
        return cls(sp.csr_matrix(m), plus)

    @classmethod
    def diagonal(cls, signs) -> "Grading":
        signs = np.asarray(signs, dtype=float)
        if not np.all(np.isin(signs, (-1.0, 1.0))):
            raise ValueError("diagonal grading entries must be +1 or -1")
        return cls(sp.diags(signs.astype(complex)).tocsr(), int(np.sum(signs > 0)))

    @classmethod
    def standard(cls, plus: int, minus: int) -> "Grading":
        return cls.diagonal(np.concatenate([np.ones(plus), -np.ones(minus)]))

    @property
    def dim(self) -> int:
        return self.involution.shape[0]

    def dense(self) -> np.ndarray:
        g = self.involution
        return g.toarray() if sp.issparse(g) else np.asarray(g)

    def sparse(self):
        return sp.csr_matrix(self.involution)

    def eigenbasis(self):
        """Orthonormal bases ``(plus, minus)`` of the two eigenspaces."""
        g = self.involution
        if sp.issparse(g):
            d = g.diagonal()
            off = (g - sp.diags(d)).tocoo()
            if off.nnz == 0 or np.max(np.abs(off.data)) == 0:
                eye = np.eye(self.dim, dtype=complex)
                return eye[:, d.real > 0], eye[:, d.real < 0]
            g = g.toarray()
        vals, vecs = numlin.eigh(g)
        return vecs[:, vals > 0], vecs[:, vals < 0]

    def expectation(self, vecs: np.ndarray) -> np.ndarray:
        """Diagonal of ``V^H Gamma V`` for column vectors ``V``."""
        gv = self.involution @ vecs
        return np.real(np.sum(vecs.conj() * gv, axis=0))


@dataclass
class SpectralProjection:
    matrix: np.ndarray
    rank: int
    idempotency_defect: float
    gap: float = field(default=np.inf)
    basis: np.ndarray | None = None

    @classmethod
    def from_basis(cls, basis: np.ndarray, gap: float = np.inf) -> "SpectralProjection":
        """Projection onto the span of orthonormal columns."""
        basis = np.asarray(basis, dtype=complex)
        p = basis @ basis.conj().T
        return cls(p, basis.shape[1], float(np.max(np.abs(p @ p - p), initial=0.0)), gap, basis)

    @classmethod
    def from_matrix(cls, m) -> "SpectralProjection":
        p = numlin.as_matrix(m)
        numlin.check_hermitian(p, "projection")
        defect = float(np.max(np.abs(p @ p - p), initial=0.0))
        if defect > 1e-8:
            raise ValueError(f"matrix is not idempotent (defect {defect:.2e})")
        tr = np.trace(p).real
        rank = int(round(tr))
        if abs(tr - rank) > 1e-6:
            raise ValueError("projection trace is not an integer")
        return cls(p, rank, defect)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def range_basis(self) -> np.ndarray:
        if self.basis is None:
            vals, vecs = numlin.eigh(self.matrix)
            self.basis = vecs[:, vals > 0.5]
        return self.basis


def positive_spectral_projection(h, min_gap: float) -> SpectralProjection:
    """Projection onto the eigenvectors of ``h`` with eigenvalue at least ``min_gap``.

    Raises :class:`SpectrumTouchesZero` if an eigenvalue falls strictly
    inside ``(-min_gap, min_gap)``.
    """
    vals, vecs = numlin.eigh(h)
    inside = np.abs(vals) < min_gap
    if np.any(inside):
        worst = float(np.min(np.abs(vals)))
        raise SpectrumTouchesZero(f"eigenvalue {worst:.3e} lies inside the band of half-width {min_gap:g}")
    gap = float(np.min(np.abs(vals))) if vals.size else np.inf
    return SpectralProjection.from_basis(vecs[:, vals >= min_gap], gap=gap)


def check_oddness(h, gamma: Grading) -> float:
    """Operator norm of the anticommutator of ``h`` with the grading."""
    if h.shape != (gamma.dim, gamma.dim):
        raise DimensionMismatch(f"operator {h.shape} against grading of dimension {gamma.dim}")
    g = gamma.involution
    anti = g @ h + h @ g
    return op_norm(anti) if sp.issparse(anti) else op_norm(np.asarray(anti))


class Symmetry(enum.Enum):
    EXACT = "exactSymmetry"
    APPROXIMATE = "approximateSymmetry"
    NONE = "none"


def clifford_defect_check(h, gamma: Grading):
    """Return ``(anticommutator_norm, Symmetry)`` for a candidate Clifford symmetry.

    ``EXACT`` certifies that every graded index extracted from ``h`` is zero.
    ``APPROXIMATE`` is only a diagnostic.
    """
    defect = check_oddness(h, gamma)
    if defect <= 1e-8:
        verdict = Symmetry.EXACT
    elif defect <= 0.1 * op_norm(h):
        verdict = Symmetry.APPROXIMATE
    else:
        verdict = Symmetry.NONE
    return defect, verdict

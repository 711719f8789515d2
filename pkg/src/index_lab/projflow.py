"""Relative indices of projections and spectral flow along operator paths."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from . import numlin
from .errors import (
    DimensionMismatch,
    NotOdd,
    RefinementExhausted,
    SpectrumTouchesZero,
)
from .grading import Grading, SpectralProjection, check_oddness, op_norm

KERNEL_TOL = 1e-6


def _as_projection(p) -> SpectralProjection:
    return p if isinstance(p, SpectralProjection) else SpectralProjection.from_matrix(p)


def relind0(p, q, tol: float = KERNEL_TOL) -> int:
    """Even relative index: the index of ``Q`` as a map from ``Ran P`` to ``Ran Q``.

    The kernel and cokernel of the compressed map are counted from its
    singular values.  In finite dimension the result must equal
    ``rank P - rank Q``; a mismatch raises ``AssertionError``.
    """
    p = _as_projection(p)
    q = _as_projection(q)
    if p.dim != q.dim:
        raise DimensionMismatch(f"projections of dimension {p.dim} and {q.dim}")
    vp = p.range_basis()
    vq = q.range_basis()
    m = vq.conj().T @ vp
    _, ker, _ = numlin.numerical_kernel(m, tol)
    _, coker, _ = numlin.numerical_kernel(m.conj().T, tol)
    value = ker - coker
    assert value == vp.shape[1] - vq.shape[1], "compressed index differs from rank difference"
    return value


def projection_to_unitary_block(p, gamma: Grading) -> np.ndarray:
    """Block of ``2P - 1`` mapping the +1 eigenspace of the grading to the -1 one."""
    p = _as_projection(p)
    if p.dim != gamma.dim:
        raise DimensionMismatch(f"projection of dimension {p.dim} against grading {gamma.dim}")
    refl = 2.0 * p.matrix - np.eye(p.dim)
    defect = check_oddness(refl, gamma)
    if defect > 1e-8:
        raise NotOdd(f"2P-1 has oddness defect {defect:.2e}")
    plus, minus = gamma.eigenbasis()
    if plus.shape[1] != minus.shape[1]:
        raise NotOdd("graded halves have different dimension, so 2P-1 cannot be odd")
    return minus.conj().T @ refl @ plus


@dataclass
class ProjectionLoop:
    """Projections sampled around a circle, all odd for one grading.

    ``samples`` are taken at equally spaced parameters on the circle.  With
    ``closed=True`` the final sample repeats the first and is dropped.
    """

    samples: list
    grading: Grading
    closed: bool = False

    def __post_init__(self):
        samples = [_as_projection(s) for s in self.samples]
        if self.closed:
            if np.max(np.abs(samples[-1].matrix - samples[0].matrix)) > 1e-10:
                raise ValueError("closed loop does not return to its first sample")
            samples = samples[:-1]
            self.closed = False
        ranks = {s.rank for s in samples}
        if len(ranks) > 1:
            raise ValueError(f"rank varies along the loop: {sorted(ranks)}")
        for a, b in zip(samples, samples[1:] + samples[:1]):
            if np.linalg.norm(b.matrix - a.matrix, 2) >= 1.0:
                raise ValueError("consecutive projections are too far apart")
        self.samples = samples

    def unitary_blocks(self) -> list:
        return [projection_to_unitary_block(s, self.grading) for s in self.samples]


def relind1(p_loop: ProjectionLoop, q_loop: ProjectionLoop) -> int:
    """Odd relative index of two loops: winding of ``det(U_P U_Q^H)``."""
    if len(p_loop.samples) != len(q_loop.samples):
        raise DimensionMismatch("loops are sampled at different parameters")
    dets = [
        np.linalg.det(up @ uq.conj().T) if up.size else 1.0
        for up, uq in zip(p_loop.unitary_blocks(), q_loop.unitary_blocks())
    ]
    return numlin.phase_winding(np.array(dets))


@dataclass
class OperatorPath:
    """Hermitian operators sampled at increasing parameters.

    A ``builder`` callable, when given, lets spectral flow insert extra
    samples where a step cannot be certified.  On a circle the last sample
    must equal the first.
    """

    params: np.ndarray
    samples: list
    circle: bool = False
    builder: Callable[[float], object] | None = None
    grading: Grading | None = None

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=float)
        if self.params.ndim != 1 or len(self.samples) != self.params.size:
            raise ValueError("one sample is needed per parameter")
        if self.params.size < 2 or np.any(np.diff(self.params) <= 0):
            raise ValueError("parameters must be strictly increasing")
        shapes = {s.shape for s in self.samples}
        if len(shapes) != 1:
            raise DimensionMismatch(f"samples have differing shapes {sorted(shapes)}")
        if self.circle:
            diff = self.samples[-1] - self.samples[0]
            gap = np.max(np.abs(diff.toarray() if sp.issparse(diff) else diff))
            if gap > 1e-10:
                raise ValueError("circle path does not close up")
        if self.grading is not None:
            for s in self.samples:
                if check_oddness(s, self.grading) > 1e-8:
                    raise NotOdd("path sample is not odd for the declared grading")

    @classmethod
    def from_function(cls, f, t0: float, t1: float, samples: int, circle: bool = False, **kw):
        ts = np.linspace(t0, t1, samples)
        hs = [f(t) for t in ts]
        if circle:
            hs[-1] = hs[0]
        return cls(ts, hs, circle=circle, builder=f, **kw)

    @property
    def dim(self) -> int:
        return self.samples[0].shape[0]

    def reversed(self) -> "OperatorPath":
        t0, t1 = self.params[0], self.params[-1]
        b = self.builder
        return OperatorPath(
            (t0 + t1) - self.params[::-1],
            list(self.samples[::-1]),
            circle=self.circle,
            builder=None if b is None else (lambda t: b(t0 + t1 - t)),
            grading=self.grading,
        )

    def concat(self, other: "OperatorPath") -> "OperatorPath":
        """Join ``other`` after ``self``; its parameters are shifted to follow on."""
        shift = self.params[-1] - other.params[0]
        end = self.params[-1]
        b1, b2 = self.builder, other.builder
        builder = None
        if b1 is not None and b2 is not None:
            builder = lambda t: b1(t) if t <= end else b2(t - shift)  # noqa: E731
        return OperatorPath(
            np.concatenate([self.params, other.params[1:] + shift]),
            list(self.samples) + list(other.samples[1:]),
            builder=builder,
        )


@dataclass
class _Snapshot:
    values: np.ndarray
    vectors: np.ndarray
    bulk: np.ndarray | None = None


@dataclass
class FlowReport:
    value: int
    window: float
    steps: int
    refinements: int
    crossings: list = field(default_factory=list)


def _snapshot(h, mask) -> _Snapshot:
    vals, vecs = numlin.eigh(h)
    bulk = None
    if mask is not None:
        bulk = np.real(np.sum(vecs.conj() * (mask[:, None] * vecs), axis=0))
    return _Snapshot(vals, vecs, bulk)


def _count(snap: _Snapshot, a: float, mask) -> tuple[int, bool]:
    """Eigenvalues in ``[0, a)``, restricted to bulk modes when a mask is given.

    The second entry is False when the bulk split inside the window is
    ambiguous.
    """
    sel = (snap.values >= 0) & (snap.values < a)
    if mask is None:
        return int(np.count_nonzero(sel)), True
    v = snap.vectors[:, sel]
    if v.shape[1] == 0:
        return 0, True
    scores = np.linalg.eigvalsh(v.conj().T @ (mask[:, None] * v))
    ok = not np.any((scores > 0.25) & (scores < 0.75))
    return int(np.count_nonzero(scores >= 0.5)), ok


def _distance(values: np.ndarray, a: float) -> float:
    if values.size == 0:
        return np.inf
    return float(min(np.min(np.abs(values - a)), np.min(np.abs(values + a))))


def default_window(path: OperatorPath) -> float:
    ends = np.concatenate([numlin.eigvalsh(path.samples[0]), numlin.eigvalsh(path.samples[-1])])
    med = float(np.median(np.abs(ends)))
    return 0.25 * med if med > 0 else 1.0


def _step(s0: _Snapshot, s1: _Snapshot, move: float, window: float, mask):
    """Certified count change across one step, or None if it cannot be certified."""
    candidates = window * np.array([1.0, 0.8, 1.25, 0.65, 1.5, 0.5, 1.8, 0.4, 2.0])
    best = None
    for a in candidates:
        margin = _distance(s0.values, a) + _distance(s1.values, a)
        if margin <= move:
            continue
        w0 = np.abs(s0.values) < a
        w1 = np.abs(s1.values) < a
        if np.count_nonzero(w0) != np.count_nonzero(w1):
            continue
        if np.any(w0):
            ov = np.linalg.svd(s0.vectors[:, w0].conj().T @ s1.vectors[:, w1], compute_uv=False)
            if ov.min() < 0.5:
                continue
        n0, ok0 = _count(s0, a, mask)
        n1, ok1 = _count(s1, a, mask)
        if not (ok0 and ok1):
            continue
        best = n1 - n0
        break
    return best


def _move(h0, h1, exact: bool = False) -> float:
    """Norm of the step ``h1 - h0``: a cheap upper bound, or the exact value."""
    diff = h1 - h0
    if sp.issparse(diff) or not exact:
        return op_norm(diff) if sp.issparse(diff) else _schur_bound(np.asarray(diff))
    return float(np.max(np.abs(numlin.eigvalsh(diff)), initial=0.0))


def _schur_bound(m: np.ndarray) -> float:
    if m.size == 0:
        return 0.0
    a = np.abs(m)
    return float(min(np.sqrt(a.sum(axis=0).max() * a.sum(axis=1).max()), np.sqrt((a * a).sum())))


def spectral_flow0(
    path: OperatorPath,
    window: float | None = None,
    max_refine: int = 10,
    bulk_mask: np.ndarray | None = None,
    report: bool = False,
):
    """Net number of eigenvalues crossing zero upward along the path.

    Each step between samples is certified by choosing a level ``a`` near
    ``window`` that the spectrum provably avoids on the linear interpolant
    between the two samples, and then comparing eigenvalue counts in
    ``[0, a)``.  A zero eigenvalue counts as nonnegative.  Uncertified steps
    are bisected through ``path.builder`` up to ``max_refine`` levels.

    With ``bulk_mask`` (a 0/1 weight per basis vector) only modes living on
    the masked region are counted; this is how flow along a loop of
    truncated operators is read off, since the unfiltered count over a
    finite-dimensional loop is always zero.
    """
    if window is None:
        window = default_window(path)
    if window <= 0:
        raise ValueError("window must be positive")
    mask = None if bulk_mask is None else np.asarray(bulk_mask, dtype=float)
    total = 0
    refinements = 0
    crossings = []
    snaps = [_snapshot(h, mask) for h in path.samples]
    steps = 0
    for k in range(len(path.samples) - 1):
        stack = [(path.params[k], path.samples[k], snaps[k], path.params[k + 1], path.samples[k + 1], snaps[k + 1], 0)]
        while stack:
            t0, h0, s0, t1, h1, s1, depth = stack.pop()
            bound = _move(h0, h1)
            d = _step(s0, s1, bound, window, mask)
            if d is None and not sp.issparse(h1):
                exact = _move(h0, h1, exact=True)
                if exact < bound:
                    d = _step(s0, s1, exact, window, mask)
            if d is not None:
                steps += 1
                total += d
                if d:
                    crossings.append((float(t0), float(t1), int(d)))
                continue
            if path.builder is None or depth >= max_refine:
                raise RefinementExhausted(
                    f"cannot certify the step [{t0:.6g}, {t1:.6g}]"
                    + ("" if path.builder else " and the path has no builder to refine with")
                )
            refinements += 1
            tm = 0.5 * (t0 + t1)
            hm = path.builder(tm)
            sm = _snapshot(hm, mask)
            # right half is pushed first so the left half is processed first
            stack.append((tm, hm, sm, t1, h1, s1, depth + 1))
            stack.append((t0, h0, s0, tm, hm, sm, depth + 1))
    if mask is None and not path.circle:
        try:
            end = _positive_projection_if_gapped(path.samples[-1], window)
            start = _positive_projection_if_gapped(path.samples[0], window)
        except SpectrumTouchesZero:
            end = start = None
        if end is not None:
            assert total == relind0(end, start), "spectral flow differs from the endpoint relative index"
    if report:
        return FlowReport(total, window, steps, refinements, crossings)
    return total


def _positive_projection_if_gapped(h, window: float) -> SpectralProjection:
    vals, vecs = numlin.eigh(h)
    if np.any(np.abs(vals) < window / 10):
        raise SpectrumTouchesZero("endpoint is not invertible at the window scale")
    return SpectralProjection.from_basis(vecs[:, vals > 0])


def suspension_index_oracle(
    path: OperatorPath,
    grid_points: int = 400,
    half_length: float = 20.0,
):
    """Index of the suspension operator built from an interval path.

    The path parameter is stretched over a line by a tanh reparametrisation
    and the operator ``-i d/dx`` is combined with ``H(x)`` as the (1,1)
    product; the graded index of the result is returned.
    """
    if path.circle:
        raise ValueError("the suspension oracle needs an interval path")
    from .geometry import LineSpec, line_operator
    from .product import build_product_operator, index_by_chirality

    spec = LineSpec(half_length=half_length, points=grid_points)
    deriv, x = line_operator(spec)
    t0, t1 = path.params[0], path.params[-1]
    s = 0.5 * (1.0 + np.tanh(x / 2.0))
    ts = t0 + (t1 - t0) * s
    if path.builder is not None:
        fibers = [path.builder(t) for t in ts]
    else:
        fibers = [_interpolate(path, t) for t in ts]
    fibers = [f.toarray() if sp.issparse(f) else np.asarray(f) for f in fibers]
    op = build_product_operator(
        np.array(fibers), -1j * deriv, (1, 1), 1.0, line=spec,
        position_interior=spec.interior_mask(),
    )
    return index_by_chirality(op).value


def _interpolate(path: OperatorPath, t: float):
    k = int(np.clip(np.searchsorted(path.params, t) - 1, 0, path.params.size - 2))
    t0, t1 = path.params[k], path.params[k + 1]
    w = (t - t0) / (t1 - t0)
    return (1 - w) * path.samples[k] + w * path.samples[k + 1]


def loop_from_function(f: Callable[[float], np.ndarray], samples: int, grading: Grading) -> ProjectionLoop:
    """Sample ``f`` at ``samples`` equally spaced points of one period."""
    ts = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
    return ProjectionLoop([f(t) for t in ts], grading)


def stack_paths(paths: Sequence[OperatorPath]) -> OperatorPath:
    out = paths[0]
    for p in paths[1:]:
        out = out.concat(p)
    return out

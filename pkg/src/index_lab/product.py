"""Signature-dependent Dirac-Schrodinger product operators and their indices.

Every product operator acts on ``fiber (x) X`` where ``X`` is the space of
the Dirac operator.  A potential given on ``fiber (x) position`` is
extended by the identity on any spin factor of ``X``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from . import numlin
from .errors import (
    DimensionMismatch,
    EmptyExterior,
    GradingAbsent,
    GradingHypothesisViolated,
    IndexLabError,
    InconclusiveIndex,
    NoAdmissibleLambda,
)
from .geometry import SIGMA1, SIGMA2, LineSpec, Potential, gapped_line_dirac, line_operator, wilson_term
from .grading import Grading, Signature, check_oddness, op_norm, positive_spectral_projection
from .projflow import OperatorPath, relind0, spectral_flow0, suspension_index_oracle

INCONCLUSIVE = "INCONCLUSIVE"
CHIRALITY_MIN = 0.9
LOCALIZATION_KEEP = 0.6
LOCALIZATION_DROP = 0.4
GAP_RATIO_MIN = 10.0
DENSE_LIMIT = 1200


@dataclass
class ProductOperator:
    matrix: object
    signature: Signature
    grading: Grading | None
    lam: float
    interior: np.ndarray | None = None
    provenance: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass
class FredholmEstimate:
    c_hat: float
    delta_hat: float

    @property
    def satisfied(self) -> bool:
        c = self.c_hat
        return c > 0 and self.delta_hat < c * c / (c + 1.0)


@dataclass
class IndexResult:
    value: object
    zero_cluster: list
    gap_ratio: float
    chirality: list
    localization: list
    method: str = "chirality"
    notes: list = field(default_factory=list)

    @property
    def conclusive(self) -> bool:
        return self.value != INCONCLUSIVE

    def require(self) -> int:
        if not self.conclusive:
            raise InconclusiveIndex("; ".join(self.notes) or "index extraction inconclusive")
        return int(self.value)


def _sig(sig) -> Signature:
    return sig if isinstance(sig, Signature) else Signature(*sig)


def _as_sparse(m):
    return sp.csr_matrix(m, dtype=complex)


def _embed_potential(s, fiber: int, x_dim: int):
    """Lift a potential on ``fiber (x) position`` to ``fiber (x) spin (x) position``."""
    if isinstance(s, Potential):
        spin = x_dim // s.position_dim
        if spin * s.position_dim != x_dim:
            raise DimensionMismatch(f"position dimension {s.position_dim} does not divide {x_dim}")
        return s.operator(spin)
    s = _as_sparse(s)
    if s.shape[0] == fiber * x_dim:
        return s
    pos = s.shape[0] // fiber
    spin = x_dim // pos
    if spin * pos != x_dim or pos * fiber != s.shape[0]:
        raise DimensionMismatch(f"potential of dimension {s.shape[0]} against fiber {fiber} and X of {x_dim}")
    # reorder fiber (x) pos -> fiber (x) spin (x) pos
    blocks = [[None] * fiber for _ in range(fiber)]
    for a in range(fiber):
        for b in range(fiber):
            blk = s[a * pos:(a + 1) * pos, b * pos:(b + 1) * pos]
            blocks[a][b] = sp.kron(sp.identity(spin), blk)
    return sp.bmat(blocks, format="csr")


def _line_sites(values) -> tuple[np.ndarray, int]:
    values = np.asarray(values, dtype=complex)
    if values.ndim == 1:
        values = values[:, None, None]
    return values, values.shape[1]


def build_product_operator(
    s,
    d,
    sig,
    lam: float,
    gamma_s: Grading | None = None,
    gamma_d: Grading | None = None,
    fiber_dim: int | None = None,
    line: LineSpec | None = None,
    wilson: float | None = None,
    position_interior: np.ndarray | None = None,
    provenance: dict | None = None,
) -> ProductOperator:
    """Assemble ``S x_{p,q} D`` with the potential scaled by ``lam``.

    Parameters
    ----------
    s : Potential, array of shape (sites, f, f), or matrix on fiber (x) position
        The potential.  A bare array of per-site fibre matrices is read as a
        line potential.
    d : matrix
        The Dirac operator on ``X``.
    sig : Signature or (p, q)
        ``(1,1)``: ``[[0, D + i S], [D - i S, 0]]`` graded by ``diag(1, -1)``.
        ``(0,0)``: ``Gamma_S (x) D + S (x) 1`` graded by ``Gamma_S (x) Gamma_D``.
        ``(1,0)``: ``1 (x) D + (1 (x) Gamma_D) S``, ungraded.
        ``(0,1)``: ``Gamma_S (x) D + S``, ungraded.
    line : LineSpec, optional
        When given with ``p = 1``, a Wilson term of strength ``wilson``
        (default 1) is added next to the potential to remove the spurious
        zero modes of the central difference at momentum pi.
    position_interior : array, optional
        0/1 weights on position sites used for localization scores.
    """
    sig = _sig(sig)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if not isinstance(s, Potential) and not sp.issparse(s) and np.ndim(s) in (1, 3):
        vals, fiber = _line_sites(s)
        s = Potential(fiber, np.arange(vals.shape[0], dtype=float), [(vals, 0)], None)
    fiber = s.fiber_dim if isinstance(s, Potential) else fiber_dim
    if fiber is None:
        raise ValueError("fiber_dim is required for a matrix potential")
    d = _as_sparse(d)
    x_dim = d.shape[0]
    if d.shape[1] != x_dim:
        raise DimensionMismatch("Dirac operator is not square")
    s_op = _embed_potential(s, fiber, x_dim)
    if s_op.shape[0] != fiber * x_dim:
        raise DimensionMismatch(f"potential of dimension {s_op.shape[0]} against {fiber * x_dim}")
    ef = sp.identity(fiber, format="csr")
    potential = lam * s_op
    if sig.p == 1 and line is not None:
        w = wilson_term(line, 1.0 if wilson is None else wilson)
        spin = x_dim // line.points
        potential = potential + sp.kron(ef, sp.kron(sp.identity(spin), w))
    if sig.p == 0:
        if gamma_s is None:
            raise GradingHypothesisViolated("p = 0 needs a grading on the fibre")
        gs = gamma_s.sparse()
        anti = check_oddness(s_op, Grading(sp.kron(gs, sp.identity(x_dim)).tocsr(), 0))
        if anti > 1e-8 * (1 + op_norm(s_op)):
            raise GradingHypothesisViolated(f"potential does not anticommute with Gamma_S (defect {anti:.2e})")
    if sig.q == 0:
        if gamma_d is None:
            raise GradingHypothesisViolated("q = 0 needs a grading on the Dirac operator")
        anti = check_oddness(d, gamma_d)
        if anti > 1e-8 * (1 + op_norm(d)):
            raise GradingHypothesisViolated(f"Dirac operator does not anticommute with Gamma_D (defect {anti:.2e})")

    grading = None
    if (sig.p, sig.q) == (1, 1):
        a = sp.kron(ef, d) - 1j * potential
        matrix = sp.bmat([[None, a.conj().T], [a, None]], format="csr")
        n = fiber * x_dim
        grading = Grading.standard(n, n)
    elif (sig.p, sig.q) == (0, 0):
        matrix = sp.kron(gamma_s.sparse(), d) + potential
        grading = Grading(sp.kron(gamma_s.sparse(), gamma_d.sparse()).tocsr(),
                          gamma_s.plus_rank * gamma_d.plus_rank
                          + (fiber - gamma_s.plus_rank) * (x_dim - gamma_d.plus_rank))
    elif (sig.p, sig.q) == (1, 0):
        matrix = sp.kron(ef, d) + sp.kron(ef, gamma_d.sparse()) @ potential
    else:
        matrix = sp.kron(gamma_s.sparse(), d) + potential
    matrix = matrix.tocsr()
    numlin.check_hermitian(matrix, "product operator")
    if grading is not None and check_oddness(matrix, grading) > 1e-8 * (1 + op_norm(matrix)):
        raise GradingHypothesisViolated("assembled operator is not odd for the output grading")

    interior = None
    if position_interior is not None:
        pm = np.asarray(position_interior, dtype=float)
        spin = x_dim // pm.size
        interior = np.kron(np.ones(fiber), np.kron(np.ones(spin), pm))
        if (sig.p, sig.q) == (1, 1):
            interior = np.kron(np.ones(2), interior)
    return ProductOperator(matrix, sig, grading, float(lam), interior, dict(provenance or {}))


def line_product(
    values,
    sig=(1, 1),
    lam: float = 1.0,
    spec: LineSpec | None = None,
    wilson: float = 1.0,
) -> ProductOperator:
    """(1,1) product of per-site fibre matrices with ``-i d/dx`` on a line."""
    spec = spec or LineSpec()
    deriv, _ = line_operator(spec)
    vals, fiber = _line_sites(values)
    return build_product_operator(
        vals, -1j * deriv, sig, lam, line=spec, wilson=wilson,
        position_interior=spec.interior_mask(), fiber_dim=fiber,
    )


# ---------------------------------------------------------------- spectra


def near_zero_modes(h, count: int = 24):
    """Eigenpairs of smallest magnitude: dense below ``DENSE_LIMIT``, shift-invert above."""
    n = h.shape[0]
    if n <= DENSE_LIMIT:
        dense = h.toarray() if sp.issparse(h) else np.asarray(h)
        vals, vecs = numlin.eigh(dense)
        order = np.argsort(np.abs(vals), kind="stable")
        return vals[order], vecs[:, order]
    vals, vecs = numlin.near_zero_eigs(sp.csr_matrix(h), count)
    order = np.argsort(np.abs(vals), kind="stable")
    return vals[order], vecs[:, order]


def _auto_window(mags: np.ndarray, floor: float):
    """Split ``mags`` (ascending) at a pronounced multiplicative gap.

    Returns ``(cluster_size, gap_ratio, window)``.  The widest cluster whose
    separation from the rest is at least 100 is taken, so weakly split
    topological pairs are kept together with exact truncation zero modes.
    Without such a gap the cluster is empty if the smallest value clears
    the numerical floor.
    """
    if mags.size == 0:
        return 0, np.inf, floor
    safe = np.maximum(mags, floor)
    ratios = safe[1:] / safe[:-1]
    strong = np.flatnonzero(ratios >= 100.0)
    if strong.size:
        i = int(strong[-1])
        return i + 1, float(ratios[i]), float(np.sqrt(safe[i] * safe[i + 1]))
    if mags[0] > 10.0 * floor:
        return 0, np.inf, float(np.sqrt(floor * mags[0]))
    best = int(np.argmax(ratios)) if ratios.size else 0
    return best + 1, float(ratios[best]) if ratios.size else 0.0, float(safe[best] * 1.0000001)


def classify_cluster(vecs, grading: Grading, interior):
    """Split a near-zero subspace by chirality and by interior localization.

    Returns ``(value_or_None, chirality, localization, notes)``.
    """
    notes = []
    if vecs.shape[1] == 0:
        return 0, [], [], notes
    # iterative solvers may return a skewed basis inside a degenerate cluster
    u, sv, _ = np.linalg.svd(vecs, full_matrices=False)
    vecs = u[:, sv > 1e-8 * sv.max()]
    gv = grading.involution @ vecs
    c = vecs.conj().T @ gv
    c = 0.5 * (c + c.conj().T)
    cvals, cvecs = np.linalg.eigh(c)
    chir = [float(x) for x in cvals]
    locs = []
    value = 0
    ok = True
    if np.any(np.abs(cvals) < CHIRALITY_MIN):
        notes.append("mode with chirality below 0.9")
        ok = False
    for sign in (1, -1):
        sector = vecs @ cvecs[:, sign * cvals > 0]
        if sector.shape[1] == 0:
            continue
        if interior is None:
            scores = np.ones(sector.shape[1])
        else:
            weighted = interior @ sector if np.ndim(interior) == 2 else interior[:, None] * sector
            m = sector.conj().T @ weighted
            scores = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
        locs.extend(float(x) for x in scores)
        if np.any((scores > LOCALIZATION_DROP) & (scores < LOCALIZATION_KEEP)):
            notes.append("mode with ambiguous localization")
            ok = False
        value += sign * int(np.count_nonzero(scores >= LOCALIZATION_KEEP))
    return (value if ok else None), chir, locs, notes


def index_by_chirality(op: ProductOperator, window: float | None = None, count: int = 24) -> IndexResult:
    """Signed count of interior near-zero modes of a graded operator.

    The near-zero cluster is either everything below ``window`` or, by
    default, the set cut off by the largest multiplicative gap in the
    spectrum near zero.  The cluster is diagonalised against the grading
    and each chirality sector against the interior mask; modes with
    localization at least 0.6 are counted and those at most 0.4 are
    discarded as truncation artifacts.
    """
    if op.grading is None:
        raise GradingAbsent(f"signature {op.signature} carries no grading")
    h = op.matrix
    scale = max(op_norm(h) if not sp.issparse(h) or h.shape[0] <= DENSE_LIMIT else float(np.max(np.abs(h.data))), 1e-300)
    floor = 1e-10 * scale
    count = min(count, h.shape[0])
    while True:
        vals, vecs = near_zero_modes(h, count)
        mags = np.abs(vals)
        if window is None:
            size, ratio, win = _auto_window(mags, floor)
        else:
            win = window
            size = int(np.count_nonzero(mags < window))
            inside = mags[mags < window]
            outside = mags[mags >= window]
            below = inside.max() if inside.size else 0.0
            ratio = (outside.min() / below if below > 0 else np.inf) if outside.size else np.inf
        if size < vals.size - 1 or vals.size >= h.shape[0]:
            break
        count *= 2
    cluster = vecs[:, :size]
    value, chir, locs, notes = classify_cluster(cluster, op.grading, op.interior)
    if ratio < GAP_RATIO_MIN:
        notes.append(f"zero-cluster gap ratio {ratio:.3g} below {GAP_RATIO_MIN:g}")
        value = None
    return IndexResult(
        INCONCLUSIVE if value is None else int(value),
        [float(x) for x in vals[:size]],
        float(ratio),
        chir,
        locs,
        "chirality",
        notes + [f"window {win:.3g}"],
    )


# ---------------------------------------------------------------- Fredholm data


def block_index(a, interior_right, interior_left, method: str = "kernelCount") -> IndexResult:
    """Filtered index of a dense block ``a`` by chirality counting.

    ``a`` is embedded as the odd part of ``[[0, a^H], [a, 0]]``; the two
    interior arguments are weight matrices (or vectors) on the domain and
    codomain of ``a`` deciding which near-zero modes are localized.
    """
    a = np.asarray(a, dtype=complex)
    rows, cols = a.shape
    h = np.zeros((rows + cols, rows + cols), dtype=complex)
    h[cols:, :cols] = a
    h[:cols, cols:] = a.conj().T

    def _mat(w):
        w = np.asarray(w)
        return np.diag(w.astype(float)) if w.ndim == 1 else w

    interior = np.zeros_like(h)
    interior[:cols, :cols] = _mat(interior_right)
    interior[cols:, cols:] = _mat(interior_left)
    grading = Grading.standard(cols, rows)
    if h.shape[0] == 0:
        return IndexResult(0, [], np.inf, [], [], method, ["empty block"])
    hv, hvec = numlin.eigh(h)
    order = np.argsort(np.abs(hv), kind="stable")
    mags = np.abs(hv[order])
    size, ratio, _ = _auto_window(mags, 1e-10 * max(1.0, float(mags.max())))
    cluster = hvec[:, order[:size]]
    value, chir, locs, notes = classify_cluster(cluster, grading, interior)
    if size and ratio < GAP_RATIO_MIN:
        notes.append(f"gap ratio {ratio:.3g} below {GAP_RATIO_MIN:g}")
        value = None
    return IndexResult(INCONCLUSIVE if value is None else value, list(hv[order[:size]]), ratio,
                       chir, locs, method, notes)


def _site_values(s):
    if isinstance(s, Potential):
        th = np.linspace(0, 2 * np.pi, 64, endpoint=False) if s.circle_modes is not None else np.zeros(1)
        return s.at(th), s.radial, (th if s.circle_modes is not None else None)
    vals, _ = _line_sites(s)
    return vals[:, None], None, None


def fredholm_estimate(s, sig, exterior_mask, lam: float = 1.0, spacing: float | None = None) -> FredholmEstimate:
    """Invertibility margin and commutator bound of ``lam S`` on the exterior.

    ``c_hat`` is the smallest singular value of ``lam S(x)`` over exterior
    sites; ``delta_hat`` bounds ``||[D, lam S](lam S +- i)^{-1}||`` by
    difference quotients of ``S`` along the grid (and around the circle
    for cylinder potentials).
    """
    vals, radial, theta = _site_values(s)
    ext = np.asarray(exterior_mask, dtype=bool)
    if not np.any(ext):
        raise EmptyExterior("no exterior sites declared")
    if spacing is None:
        spacing = float(radial[1] - radial[0]) if radial is not None and radial.size > 1 else 1.0
    v = lam * vals
    f = v.shape[-1]
    sv = np.linalg.svd(v[ext].reshape(-1, f, f), compute_uv=False)
    c_hat = float(sv.min())
    # centred difference quotient in r, one-sided at the ends
    dr = np.gradient(v, spacing, axis=0)
    comm = [dr]
    if theta is not None and theta.size > 1:
        comm.append(np.gradient(v, theta[1] - theta[0], axis=1))
    eye = np.eye(f)
    delta = 0.0
    for c in comm:
        for sgn in (1j, -1j):
            inv = np.linalg.inv(v[ext] + sgn * eye)
            prod = c[ext] @ inv
            delta = max(delta, float(np.max(np.linalg.norm(prod.reshape(-1, f, f), ord=2, axis=(1, 2)))))
    return FredholmEstimate(c_hat, delta)


def lambda_search(
    builder: Callable[[float], ProductOperator],
    potential,
    exterior_mask,
    lambda_grid: Sequence[float] = (1.0, 2.0, 4.0),
    sig=(1, 1),
    require_invertible: bool = False,
):
    """Smallest ``lam`` whose Fredholm estimate holds and whose zero cluster is clean.

    With ``require_invertible`` the assembled operator must also have an
    empty zero cluster.  Returns ``(lam, estimate, index_result)``.
    """
    grid = list(lambda_grid)
    if any(b <= a for a, b in zip(grid, grid[1:])) or any(x <= 0 for x in grid):
        raise ValueError("lambda grid must be increasing and positive")
    for lam in grid:
        est = fredholm_estimate(potential, sig, exterior_mask, lam)
        if not est.satisfied:
            continue
        op = builder(lam)
        if op.grading is None:
            return lam, est, None
        res = index_by_chirality(op)
        if res.gap_ratio < GAP_RATIO_MIN or not res.conclusive:
            continue
        if require_invertible and res.zero_cluster:
            continue
        return lam, est, res
    raise NoAdmissibleLambda(f"no admissible lambda in {grid}")


# ---------------------------------------------------------------- families


def family_index_over_circle(
    family: Callable[[float], ProductOperator],
    samples: int = 48,
    window: float | None = None,
    max_refine: int = 10,
) -> int:
    """Spectral flow of a loop ``t -> S_t x D`` for ``t`` in ``[0, 1]``.

    Only modes on the interior of the truncation are counted, so flow
    through truncation edges does not cancel the bulk flow.
    """
    first = family(0.0)
    if first.signature.degree != 1:
        raise ValueError("family flow is defined for odd total degree")

    def build(t):
        return family(t % 1.0).matrix.toarray()

    path = OperatorPath.from_function(build, 0.0, 1.0, samples, circle=True)
    mask = first.interior
    return spectral_flow0(path, window=window, max_refine=max_refine, bulk_mask=mask)


def clifford_vanishing_note(sig) -> str:
    sig = _sig(sig)
    if sig.degree == 1:
        msg = f"signature {sig} over the complex numbers carries only the zero class"
        warnings.warn(msg, stacklevel=2)
        return msg
    return ""


def safe_index(op: ProductOperator) -> IndexResult:
    try:
        return index_by_chirality(op)
    except IndexLabError as exc:
        return IndexResult(INCONCLUSIVE, [], 0.0, [], [], "chirality", [str(exc)])


def gapped_vanishing(sig, spec: LineSpec | None = None, mass: float = 1.0, lam: float = 1.0,
                     samples: int = 24):
    """Index data of ``S x D`` on a line when ``D`` itself has a spectral gap.

    ``(1,1)``: a tanh kink against the massive ungraded line operator,
    extracted by chirality counting.  ``(0,1)``: the loop of odd kinks
    ``tanh(x)(cos(2 pi t) s1 + sin(2 pi t) s2)``, extracted as a family
    spectral flow.  Both vanish.  Returns ``(value, IndexResult or None)``.
    """
    sig = _sig(sig)
    if sig.q != 1:
        raise ValueError("gapped vanishing applies to q = 1")
    spec = spec or LineSpec(20.0, 200)
    d = gapped_line_dirac(spec, mass)
    x = spec.grid
    mask = spec.interior_mask()
    if sig.p == 1:
        op = build_product_operator(np.tanh(x), d, sig, lam, fiber_dim=1, position_interior=mask)
        res = index_by_chirality(op)
        return res.value, res
    gamma_s = Grading.diagonal([1.0, -1.0])

    def family(t):
        c, s_ = np.cos(2 * np.pi * t), np.sin(2 * np.pi * t)
        vals = np.tanh(x)[:, None, None] * (c * SIGMA1 + s_ * SIGMA2)[None]
        return build_product_operator(vals, d, sig, lam, gamma_s=gamma_s, position_interior=mask)

    return family_index_over_circle(family, samples=samples), None


def _random_hermitian(rng, f: int, lo: float = 0.5, hi: float = 1.5) -> np.ndarray:
    q, _ = np.linalg.qr(rng.normal(size=(f, f)) + 1j * rng.normal(size=(f, f)))
    e = rng.uniform(lo, hi, f) * rng.choice([-1.0, 1.0], f)
    return (q * e) @ q.conj().T


def random_kink(rng, fiber: int):
    """Random Hermitian path ``x -> S(x)`` with invertible ends ``A`` and ``B``.

    ``S(x) = (1 - tanh x)/2 A + (1 + tanh x)/2 B + sech(x)^2 C / 2`` with
    ``A, B`` having spectrum in ``+-[0.5, 1.5]`` and ``C`` an arbitrary
    Hermitian bump.  Returns ``(S, A, B)``.
    """
    a, b = _random_hermitian(rng, fiber), _random_hermitian(rng, fiber)
    c = rng.normal(size=(fiber, fiber)) + 1j * rng.normal(size=(fiber, fiber))
    c = 0.5 * (c + c.conj().T)

    def fn(x):
        t = np.tanh(x)
        return 0.5 * (1 - t) * a + 0.5 * (1 + t) * b + 0.5 / np.cosh(x) ** 2 * c

    return fn, a, b


def line_index_triple(fn, spec: LineSpec | None = None, lam: float = 1.0, samples: int = 41,
                      suspension: bool = False) -> dict:
    """Index of ``fn x D`` on a line against the flow and relative index of ``fn``.

    ``fn`` maps a position to a Hermitian fibre matrix.  Returns a dict with
    keys ``index``, ``sf``, ``relind`` (and ``suspension`` on request) plus
    ``result``, the :class:`IndexResult` of the product operator.
    """
    spec = spec or LineSpec()
    x = spec.grid
    vals = np.array([np.atleast_2d(fn(v)) for v in x])
    res = index_by_chirality(line_product(vals, (1, 1), lam, spec))
    length = 2 * spec.half_length
    jump = max(float(np.linalg.norm(vals[i + 1] - vals[i], 2)) for i in range(len(vals) - 1))
    end_gap = min(float(np.min(np.abs(np.linalg.eigvalsh(vals[i])))) for i in (0, -1))
    if jump > end_gap:
        res.notes.append(f"grid does not resolve the potential: step {jump:.3g} against end gap {end_gap:.3g}")
        res.value = INCONCLUSIVE

    def along(t):
        return np.atleast_2d(fn(length * t - spec.half_length))

    path = OperatorPath.from_function(along, 0.0, 1.0, samples)
    out = {"index": res.value, "sf": int(spectral_flow0(path))}
    ends = (along(1.0), along(0.0))
    gap = min(float(np.min(np.abs(np.linalg.eigvalsh(e)))) for e in ends)
    out["relind"] = relind0(positive_spectral_projection(ends[0], 0.5 * gap),
                            positive_spectral_projection(ends[1], 0.5 * gap)) if gap > 1e-8 else INCONCLUSIVE
    if suspension:
        out["suspension"] = suspension_index_oracle(path, spec.points, spec.half_length)
    out["result"] = res
    return out

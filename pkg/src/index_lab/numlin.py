"""Dense complex linear algebra used by every other module.

Small Hermitian problems go through a cyclic Jacobi sweep written here;
larger ones are handed to LAPACK.  A hand-written Householder + implicit QL
solver is kept as an independent reference path.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    ConvergenceFailure,
    IllConditionedSplit,
    NonHermitianInput,
    UndersampledLoop,
)

HERMITICITY_RTOL = 1e-10
JACOBI_MAX_DIM = 64


class EigenSystem(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


def as_matrix(m) -> np.ndarray:
    """Return a finite complex 2-D array copy of ``m``."""
    if sp.issparse(m):
        m = m.toarray()
    a = np.array(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def hermiticity_defect(m) -> float:
    if sp.issparse(m):
        d = (m - m.conj().T).tocoo()
        return float(np.max(np.abs(d.data), initial=0.0))
    a = np.asarray(m)
    return float(np.max(np.abs(a - a.conj().T), initial=0.0))


def check_hermitian(m, what: str = "operator"):
    """Raise :class:`NonHermitianInput` unless ``m`` is Hermitian to tolerance.

    Works on dense arrays and scipy sparse matrices; returns the input unchanged.
    """
    shape = m.shape
    if len(shape) != 2 or shape[0] != shape[1]:
        raise NonHermitianInput(f"{what} is not square: {shape}")
    if sp.issparse(m):
        scale = float(np.max(np.abs(m.tocoo().data), initial=0.0))
    else:
        scale = float(np.max(np.abs(m), initial=0.0))
    defect = hermiticity_defect(m)
    if defect > HERMITICITY_RTOL * (1.0 + scale):
        raise NonHermitianInput(f"{what} has hermiticity defect {defect:.3e}")
    return m


def fix_phases(vectors: np.ndarray, rel: float = 1e-6) -> np.ndarray:
    """Make the first significant entry of every column real and positive."""
    v = np.array(vectors, dtype=complex)
    if v.size == 0:
        return v
    mags = np.abs(v)
    thresh = rel * mags.max(axis=0)
    first = np.argmax(mags > thresh[None, :], axis=0)
    lead = v[first, np.arange(v.shape[1])]
    phase = np.where(np.abs(lead) > 0, lead / np.where(lead == 0, 1, np.abs(lead)), 1.0)
    return v * phase.conj()[None, :]


def _round_robin(n: int):
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p < n and q < n]
        if pairs:
            rounds.append((np.array([p for p, _ in pairs]), np.array([q for _, q in pairs])))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_eigh(h, tol: float | None = None, max_sweeps: int = 80) -> EigenSystem:
    """Cyclic Jacobi diagonalisation of a complex Hermitian matrix.

    Rotations are applied in round-robin order so that each round touches
    disjoint index pairs and can be vectorised.
    """
    a = as_matrix(h)
    n = a.shape[0]
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=complex)
    if n <= 1:
        return EigenSystem(a.real.diagonal().copy(), v)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return EigenSystem(np.zeros(n), v)
    if tol is None:
        tol = 4.0 * n * np.finfo(float).eps
    rounds = _round_robin(n)
    off_mask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(a[off_mask]) ** 2))
        if off <= tol * scale:
            break
        for p, q in rounds:
            apq = a[p, q]
            mag = np.abs(apq)
            live = mag > 1e-150
            w = np.where(live, apq / np.where(live, mag, 1.0), 1.0)
            mag = np.where(live, mag, 0.0)
            theta = 0.5 * np.arctan2(2.0 * mag, (a[p, p] - a[q, q]).real)
            c = np.cos(theta)
            s = np.sin(theta)
            wb = w.conj()
            cp = a[:, p].copy()
            cq = a[:, q].copy()
            a[:, p] = cp * c + cq * (wb * s)
            a[:, q] = -cp * s + cq * (wb * c)
            rp = a[p, :].copy()
            rq = a[q, :].copy()
            a[p, :] = c[:, None] * rp + (w * s)[:, None] * rq
            a[q, :] = -s[:, None] * rp + (w * c)[:, None] * rq
            vp = v[:, p].copy()
            vq = v[:, q].copy()
            v[:, p] = vp * c + vq * (wb * s)
            v[:, q] = -vp * s + vq * (wb * c)
    else:
        raise ConvergenceFailure(f"Jacobi did not converge in {max_sweeps} sweeps")
    vals = a.diagonal().real
    order = np.argsort(vals, kind="stable")
    return EigenSystem(vals[order], v[:, order])


def _householder_tridiagonal(a: np.ndarray):
    n = a.shape[0]
    a = a.copy()
    q = np.eye(n, dtype=complex)
    for k in range(n - 2):
        x = a[k + 1:, k].copy()
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        x[0] += phase * alpha
        vnorm = np.linalg.norm(x)
        if vnorm == 0.0:
            continue
        u = x / vnorm
        blk = a[k + 1:, :]
        blk -= 2.0 * np.outer(u, u.conj() @ blk)
        blk = a[:, k + 1:]
        blk -= 2.0 * np.outer(blk @ u, u.conj())
        qb = q[:, k + 1:]
        qb -= 2.0 * np.outer(qb @ u, u.conj())
    d = a.diagonal().real.copy()
    e = np.diagonal(a, -1).copy()
    return d, e, q


def _tqli(d: np.ndarray, e: np.ndarray, z: np.ndarray, max_iter: int = 60):
    n = d.size
    e = np.append(e, 0.0)
    eps = np.finfo(float).eps
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_iter:
                raise ConvergenceFailure("implicit QL exceeded its iteration budget")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = np.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + np.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            early = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = np.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    early = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi = z[:, i].copy()
                z[:, i] = c * zi - s * z[:, i + 1]
                z[:, i + 1] = s * zi + c * z[:, i + 1]
                i -= 1
            if early:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return d, z


def ql_eigh(h) -> EigenSystem:
    """Householder tridiagonalisation followed by implicit QL iterations."""
    a = as_matrix(h)
    a = 0.5 * (a + a.conj().T)
    n = a.shape[0]
    if n <= 1:
        return EigenSystem(a.real.diagonal().copy(), np.eye(n, dtype=complex))
    d, e, q = _householder_tridiagonal(a)
    # diagonal phase change makes the off-diagonal real and non-negative
    ph = np.ones(n, dtype=complex)
    for i in range(n - 1):
        mag = abs(e[i])
        ph[i + 1] = ph[i] * (e[i] / mag if mag > 0 else 1.0)
    q = q * ph[None, :]
    d, z = _tqli(d, np.abs(e).astype(float), np.eye(n))
    vecs = q @ z
    order = np.argsort(d, kind="stable")
    return EigenSystem(d[order], vecs[:, order])


def eigh(h, method: str = "auto") -> EigenSystem:
    """Ascending eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    h : array_like or sparse matrix
        Hermitian input, checked against the hermiticity tolerance.
    method : {"auto", "jacobi", "ql", "lapack"}
        ``auto`` uses Jacobi up to dimension 64 and LAPACK above.

    Returns
    -------
    EigenSystem
        Values ascending; each eigenvector has its first significant entry
        real and positive.
    """
    check_hermitian(h)
    a = as_matrix(h)
    n = a.shape[0]
    if method == "auto":
        method = "jacobi" if n <= JACOBI_MAX_DIM else "lapack"
    if method == "jacobi":
        vals, vecs = jacobi_eigh(a)
    elif method == "ql":
        vals, vecs = ql_eigh(a)
    elif method == "lapack":
        try:
            vals, vecs = scipy.linalg.eigh(0.5 * (a + a.conj().T), driver="evr")
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
            raise ConvergenceFailure(str(exc)) from exc
    else:
        raise ValueError(f"unknown method {method!r}")
    return EigenSystem(np.asarray(vals, dtype=float), fix_phases(vecs))


def eigvalsh(h) -> np.ndarray:
    check_hermitian(h)
    a = as_matrix(h)
    if a.shape[0] <= JACOBI_MAX_DIM:
        return jacobi_eigh(a).values
    return np.linalg.eigvalsh(0.5 * (a + a.conj().T))


def near_zero_eigs(h, count: int, sigma: float | None = None) -> EigenSystem:
    """The ``count`` eigenpairs of a Hermitian matrix closest to zero.

    Dense inputs of moderate size are fully diagonalised.  Large sparse
    inputs use shift-invert Lanczos around a small offset from zero with a
    fixed start vector, so repeated calls give identical output.
    """
    n = h.shape[0]
    count = min(count, n)
    if not sp.issparse(h) or n <= 600 or count >= n - 1:
        vals, vecs = eigh(h)
        order = np.argsort(np.abs(vals), kind="stable")[:count]
        order = order[np.argsort(vals[order], kind="stable")]
        return EigenSystem(vals[order], vecs[:, order])
    check_hermitian(h)
    hc = sp.csc_matrix(h, dtype=complex)
    if sigma is None:
        scale = float(np.max(np.abs(hc.data), initial=1.0))
        sigma = -1e-7 * scale
    v0 = np.cos(0.37 * np.arange(n)) + 1j * np.sin(0.11 * np.arange(n)) + 1.0
    try:
        vals, vecs = spla.eigsh(hc, k=count, sigma=sigma, which="LM", v0=v0, tol=1e-12)
    except (spla.ArpackNoConvergence, RuntimeError) as exc:
        raise ConvergenceFailure(f"shift-invert Lanczos failed: {exc}") from exc
    order = np.argsort(vals, kind="stable")
    return EigenSystem(np.asarray(vals[order], dtype=float), fix_phases(vecs[:, order]))


def eigh_window(h, lo: float, hi: float) -> EigenSystem:
    """Eigenpairs with eigenvalue in ``[lo, hi]`` via LAPACK's subset driver."""
    check_hermitian(h)
    a = as_matrix(h)
    if a.shape[0] <= JACOBI_MAX_DIM:
        vals, vecs = eigh(a)
        keep = (vals >= lo) & (vals <= hi)
        return EigenSystem(vals[keep], vecs[:, keep])
    vals, vecs = scipy.linalg.eigh(0.5 * (a + a.conj().T), subset_by_value=(lo, hi), driver="evr")
    return EigenSystem(np.asarray(vals, dtype=float), fix_phases(vecs))


def svd_triple(m):
    """Return ``(U, s, V)`` with ``m = U @ diag(s) @ V^H`` and ``s`` descending."""
    a = as_matrix(m)
    if a.size == 0:
        return (np.eye(a.shape[0], dtype=complex), np.zeros(0), np.eye(a.shape[1], dtype=complex))
    try:
        u, s, vh = np.linalg.svd(a, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return u, s, vh.conj().T


def numerical_kernel(m, tol: float):
    """Right singular subspace below ``tol``.

    Returns ``(basis, dim, gap_ratio)``.  The gap ratio compares the smallest
    singular value at or above ``tol`` with the largest one below it and is
    infinite when nothing lies below.  A ratio under 10 raises
    :class:`IllConditionedSplit` with the result attached.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = as_matrix(m)
    rows, cols = a.shape
    _, s, v = svd_triple(a)
    full = np.zeros(cols)
    full[: s.size] = s
    small = full < tol
    dim = int(np.count_nonzero(small))
    basis = v[:, small]
    if dim == 0:
        gap = np.inf
    else:
        below = full[small].max()
        above = full[~small]
        top = above.min() if above.size else np.inf
        gap = np.inf if below == 0.0 else top / below
    if gap < 10.0:
        raise IllConditionedSplit(
            f"kernel split at tol={tol:g} has gap ratio {gap:.3g}",
            basis=basis, dim=dim, gap_ratio=gap,
        )
    return basis, dim, gap


def phase_winding(loop) -> int:
    """Winding number of a closed loop of nonzero complex samples.

    The loop is closed by the step from the last sample back to the first.
    Every step must turn by less than a quarter turn.
    """
    z = np.asarray(loop, dtype=complex).ravel()
    if z.size == 0:
        return 0
    if np.any(np.abs(z) < 1e-12):
        raise UndersampledLoop("loop passes through zero")
    z = z / np.abs(z)
    steps = np.angle(np.roll(z, -1) / z)
    if np.any(np.abs(steps) >= np.pi / 2):
        worst = float(np.max(np.abs(steps)))
        raise UndersampledLoop(f"argument increment {worst:.3f} reaches a quarter turn")
    total = steps.sum() / (2 * np.pi)
    w = int(np.rint(total))
    if abs(total - w) > 1e-6:
        raise UndersampledLoop(f"accumulated winding {total:.6f} is not an integer")
    return w

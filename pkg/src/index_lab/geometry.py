"""Discretised model geometries and the operators and potentials living on them.

Conventions
-----------
Position spaces are ordered as ``line (x) circle`` for the cylinder, with the
circle in the Fourier basis ``e^{i n theta}``, ``n = -modes..modes``.  A
potential acts on ``fiber (x) position``; operators that carry an extra spin
factor are ordered ``fiber (x) spin (x) position``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy import integrate, special

from .errors import (
    DimensionOverflow,
    NotInvertibleOutsideCompact,
    QuadratureFailure,
    ValidationError,
)
from .grading import Grading

DIMENSION_CAP = 20000

SIGMA0 = np.eye(2, dtype=complex)
SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)


def _check_min(name: str, value: int, minimum: int):
    if value < minimum:
        raise ValidationError(f"{name} must be at least {minimum}, got {value}")


@dataclass(frozen=True)
class CircleSpec:
    modes: int = 12

    def validate(self):
        _check_min("modes", self.modes, 4)
        return self

    @property
    def dim(self) -> int:
        return 2 * self.modes + 1

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(-self.modes, self.modes + 1)


@dataclass(frozen=True)
class LineSpec:
    half_length: float = 20.0
    points: int = 400
    scheme: str = "centralDifference"

    def validate(self):
        _check_min("points", self.points, 16)
        if self.half_length <= 0:
            raise ValidationError("halfLength must be positive")
        if self.scheme != "centralDifference":
            raise ValidationError(f"unknown scheme {self.scheme!r}")
        return self

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_length / (self.points - 1)

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(-self.half_length, self.half_length, self.points)

    def interior_mask(self, fraction: float = 0.8) -> np.ndarray:
        return np.abs(self.grid) <= fraction * self.half_length


@dataclass(frozen=True)
class CylinderSpec:
    half_length: float = 12.0
    line_points: int = 160
    circle_modes: int = 12

    def validate(self):
        self.line.validate()
        self.circle.validate()
        return self

    @property
    def line(self) -> LineSpec:
        return LineSpec(self.half_length, self.line_points)

    @property
    def circle(self) -> CircleSpec:
        return CircleSpec(self.circle_modes)

    @property
    def dim(self) -> int:
        return self.line_points * self.circle.dim


@dataclass(frozen=True)
class TorusSpec:
    modes_per_axis: int = 8

    def validate(self):
        _check_min("modesPerAxis", self.modes_per_axis, 4)
        return self

    @property
    def side(self) -> int:
        return 2 * self.modes_per_axis + 1


@dataclass(frozen=True)
class LandauSpec:
    fock_modes: int = 96
    levels: int = 3

    def validate(self):
        _check_min("fockModes", self.fock_modes, 8)
        _check_min("levels", self.levels, 2)
        return self


# ---------------------------------------------------------------- circle


def circle_dirac(modes: int) -> np.ndarray:
    """``-i d/dtheta`` on the Fourier modes ``|n| <= modes``: ``diag(n)``."""
    _check_min("modes", modes, 1)
    return np.diag(np.arange(-modes, modes + 1).astype(complex))


def graded_circle_dirac(modes: int):
    """Doubled circle operator ``sigma_1 (x) diag(n)`` with grading ``sigma_3 (x) 1``."""
    d = circle_dirac(modes)
    n = d.shape[0]
    return np.kron(SIGMA1, d), Grading.diagonal(np.concatenate([np.ones(n), -np.ones(n)]))


def fourier_shift(modes: int, j: int):
    """Multiplication by ``e^{i j theta}`` truncated to ``|n| <= modes``."""
    n = 2 * modes + 1
    return sp.eye(n, n, k=-j, dtype=complex, format="csr")


def fourier_coefficients(fn, modes: int, samples: int | None = None) -> dict:
    """Fourier coefficients of a circle function sampled on a uniform grid.

    ``fn`` maps an array of angles to values of shape ``(len(theta), ...)``.
    Coefficients smaller than ``1e-13`` relative to the largest are dropped.
    """
    samples = samples or max(8 * modes + 8, 64)
    theta = 2 * np.pi * np.arange(samples) / samples
    vals = np.asarray(fn(theta), dtype=complex)
    coef = np.fft.fft(vals, axis=0) / samples
    out = {}
    scale = np.max(np.abs(coef))
    for j in range(-2 * modes, 2 * modes + 1):
        c = coef[j % samples]
        if np.max(np.abs(c)) > 1e-13 * max(scale, 1.0):
            out[j] = c
    return out


def toeplitz_multiplication(fn, modes: int) -> np.ndarray:
    """Matrix of multiplication by ``fn(theta)`` on the truncated Fourier space.

    ``fn`` may be matrix valued, in which case the result acts on
    ``fiber (x) modes``.
    """
    coef = fourier_coefficients(fn, modes)
    # fibre size from a sample, since a zero symbol has no coefficients
    fshape = np.shape(np.asarray(fn(np.zeros(1))))[1:]
    f = fshape[0] if fshape else 1
    out = sp.csr_matrix((f * (2 * modes + 1),) * 2, dtype=complex)
    for j, c in coef.items():
        c = np.atleast_2d(c)
        out = out + sp.kron(c, fourier_shift(modes, j))
    return out.toarray()


# ---------------------------------------------------------------- line


def line_operator(spec: LineSpec):
    """Central-difference ``d/dx`` with zero values assumed beyond both ends.

    Returns ``(derivative, grid)``.  The derivative is real antisymmetric;
    its end rows only see the single interior neighbour.
    """
    _check_min("points", spec.points, 4)
    n = spec.points
    h = spec.spacing
    off = np.full(n - 1, 1.0 / (2.0 * h))
    deriv = sp.diags([off, -off], [1, -1], shape=(n, n), format="csr")
    return deriv, spec.grid


def wilson_term(spec: LineSpec, r: float = 1.0):
    """``r h/2 (-Laplacian)``: lifts the spurious momentum-pi branch to ``2r/h``."""
    n = spec.points
    h = spec.spacing
    main = np.full(n, 2.0)
    side = np.full(n - 1, -1.0)
    lap = sp.diags([side, main, side], [-1, 0, 1], shape=(n, n), format="csr")
    return (r / (2.0 * h)) * lap


def cylinder_dirac(spec: CylinderSpec, q: int, wilson: float | None = None, cap: int = DIMENSION_CAP):
    """Dirac operator on the truncated cylinder.

    ``q = 0``: ``[[0, d_r + D_N], [-d_r + D_N, 0]]`` on ``spin (x) r (x) theta``
    with grading ``diag(1, -1)``.  ``q = 1``: ``-i d_r (x) Gamma_N + D_N`` with
    the doubled circle operator, ungraded.

    A Wilson term (default strength 1.5) is added to the channel that
    anticommutes with ``d_r``: the ``D_N`` slot for ``q = 0`` and the third
    Pauli direction for ``q = 1``.
    """
    if q not in (0, 1):
        raise ValueError("q must be 0 or 1")
    wilson = 1.5 if wilson is None else wilson
    nr = spec.line_points
    nc = spec.circle.dim
    total = 2 * nr * nc
    if total > cap:
        raise DimensionOverflow(f"cylinder operator of dimension {total} exceeds cap {cap}")
    deriv, _ = line_operator(spec.line)
    w = wilson_term(spec.line, wilson)
    ic = sp.identity(nc, format="csr")
    ir = sp.identity(nr, format="csr")
    dn = sp.diags(spec.circle.frequencies.astype(complex))
    dr = sp.kron(deriv, ic)
    mass = sp.kron(ir, dn) + sp.kron(w, ic)
    if q == 0:
        plus_to_minus = -dr + mass
        d = sp.bmat([[None, plus_to_minus.conj().T], [plus_to_minus, None]], format="csr")
        return d, Grading.standard(nr * nc, nr * nc)
    d = (
        sp.kron(SIGMA3, -1j * dr)
        + sp.kron(SIGMA1, sp.kron(ir, dn))
        + sp.kron(SIGMA2, sp.kron(w, ic))
    )
    return d.tocsr(), None


def gapped_line_dirac(spec: LineSpec, mass: float = 1.0, wilson: float = 1.0):
    """``-i d/dx sigma_1 + (m + W) sigma_3`` on ``spin (x) line``; gapped with gap ``m``."""
    deriv, _ = line_operator(spec)
    n = spec.points
    m = mass * sp.identity(n) + wilson_term(spec, wilson)
    return (sp.kron(SIGMA1, -1j * deriv) + sp.kron(SIGMA3, m)).tocsr()


# ---------------------------------------------------------------- torus


def dft_matrix(n: int) -> np.ndarray:
    """Unitary DFT taking site values to centred momenta ``-(n//2)..n//2``."""
    k = np.arange(n) - n // 2
    x = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, x) / n) / np.sqrt(n)


def torus_momenta(spec_or_k) -> tuple[np.ndarray, np.ndarray]:
    k = spec_or_k.modes_per_axis if isinstance(spec_or_k, TorusSpec) else int(spec_or_k)
    ks = np.arange(-k, k + 1)
    k1, k2 = np.meshgrid(ks, ks, indexing="ij")
    return k1.ravel(), k2.ravel()


def torus_dirac_plus(modes_per_axis: int):
    """Momentum-diagonal ``D_+`` with symbol ``i(k1 + i k2)`` and the full grading.

    Returns ``(D_plus, Gamma_D)`` where ``Gamma_D`` grades
    ``D = [[0, D_+^H], [D_+, 0]]``.
    """
    _check_min("modesPerAxis", modes_per_axis, 1)
    k1, k2 = torus_momenta(modes_per_axis)
    dplus = np.diag(1j * (k1 + 1j * k2))
    n = k1.size
    return dplus, Grading.standard(n, n)


def torus_full_dirac(modes_per_axis: int) -> np.ndarray:
    dplus, _ = torus_dirac_plus(modes_per_axis)
    z = np.zeros_like(dplus)
    return np.block([[z, dplus.conj().T], [dplus, z]])


# ---------------------------------------------------------------- cutoff


def _smootherstep(u):
    u = np.clip(u, 0.0, 1.0)
    return u * u * u * (u * (6.0 * u - 15.0) + 10.0)


@dataclass(frozen=True)
class CutoffRho:
    """Collar cutoff: 1 left of ``start``, 0 right of ``end``, quintic in between."""

    start: float
    end: float

    def __post_init__(self):
        if not self.start < self.end:
            raise ValueError("transition start must precede its end")

    def __call__(self, r):
        u = (np.asarray(r, dtype=float) - self.start) / (self.end - self.start)
        return np.clip(1.0 - _smootherstep(u), 0.0, 1.0)


def cutoff_rho(transition_start: float, transition_end: float) -> CutoffRho:
    return CutoffRho(transition_start, transition_end)


# ---------------------------------------------------------------- potentials


@dataclass
class Potential:
    """Multiplication operator on ``fiber (x) position``.

    Each term ``(values, j)`` contributes ``sum_r |r><r| (x) values[r] (x) e^{i j theta}``;
    ``values`` has shape ``(line_points, fiber, fiber)``.  Line-only potentials
    use ``circle_modes = None`` and a single ``j = 0`` term.
    """

    fiber_dim: int
    radial: np.ndarray
    terms: list = field(default_factory=list)
    circle_modes: int | None = None
    label: str = ""

    @property
    def position_dim(self) -> int:
        nc = 1 if self.circle_modes is None else 2 * self.circle_modes + 1
        return self.radial.size * nc

    def operator(self, spin_dim: int = 1):
        """Sparse matrix on ``fiber (x) spin (x) position``."""
        f = self.fiber_dim
        out = sp.csr_matrix((f * spin_dim * self.position_dim,) * 2, dtype=complex)
        ispin = sp.identity(spin_dim, format="csr")
        for values, j in self.terms:
            shift = None if self.circle_modes is None else fourier_shift(self.circle_modes, j)
            for a in range(f):
                for b in range(f):
                    col = values[:, a, b]
                    if not np.any(np.abs(col) > 0):
                        continue
                    e = sp.csr_matrix(([1.0], ([a], [b])), shape=(f, f))
                    pos = sp.diags(col, format="csr")
                    if shift is not None:
                        pos = sp.kron(pos, shift, format="csr")
                    out = out + sp.kron(e, sp.kron(ispin, pos), format="csr")
        return out.tocsr()

    def at(self, theta) -> np.ndarray:
        """Fibre matrices on the radial grid at the given angles: ``(R, T, f, f)``."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        out = np.zeros((self.radial.size, theta.size, self.fiber_dim, self.fiber_dim), dtype=complex)
        for values, j in self.terms:
            phase = np.exp(1j * j * theta)
            out += values[:, None, :, :] * phase[None, :, None, None]
        return out

    def invertibility_margin(self, site_mask, theta_samples: int = 64) -> float:
        """Smallest singular value of the sampled potential over the masked radii."""
        theta = 2 * np.pi * np.arange(theta_samples) / theta_samples
        if self.circle_modes is None:
            theta = np.zeros(1)
        vals = self.at(theta)[np.asarray(site_mask, dtype=bool)]
        if vals.size == 0:
            return np.inf
        return float(np.min(np.linalg.svd(vals.reshape(-1, self.fiber_dim, self.fiber_dim), compute_uv=False)))

    def scaled(self, factor: float) -> "Potential":
        return Potential(self.fiber_dim, self.radial,
                         [(factor * v, j) for v, j in self.terms], self.circle_modes, self.label)


def line_potential(values, spec: LineSpec, label: str = "") -> Potential:
    values = np.asarray(values, dtype=complex)
    if values.ndim == 1:
        values = values[:, None, None]
    if values.shape[0] != spec.points:
        raise ValueError("one fibre matrix is needed per grid point")
    return Potential(values.shape[1], spec.grid, [(values, 0)], None, label)


def scalar_profile(spec: LineSpec, shape: str = "tanh", level: float = 1.0, width: float = 1.0) -> Potential:
    """``level * tanh(x / width)`` or the constant ``level`` on a line."""
    x = spec.grid
    if shape == "tanh":
        v = level * np.tanh(x / width)
    elif shape == "constant":
        v = np.full_like(x, level)
    else:
        raise ValueError(f"unknown profile shape {shape!r}")
    return line_potential(v, spec, label=f"{shape}:{level}")


def circle_family_terms(fn, modes: int) -> dict:
    """Fourier coefficients of a matrix family ``theta -> F(theta)``."""
    return fourier_coefficients(fn, modes)


def boundary_hedgehog(k: int):
    """``theta -> [[0, e^{-ik theta}], [e^{ik theta}, 0]]``."""

    def fn(theta):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(theta.shape + (2, 2), dtype=complex)
        out[..., 0, 1] = np.exp(-1j * k * theta)
        out[..., 1, 0] = np.exp(1j * k * theta)
        return out

    return fn


def collar_potential(
    spec: CylinderSpec,
    boundary_family,
    reference: np.ndarray,
    rho: CutoffRho | None = None,
    label: str = "",
) -> Potential:
    """``rho(r) T + (1 - rho(r)) F(theta)`` on the cylinder.

    ``boundary_family`` maps angles to fibre matrices and must be a finite
    trigonometric polynomial in ``theta``.
    """
    rho = rho or CutoffRho(-3.0, -1.0)
    r = spec.line.grid
    w = rho(r)
    reference = np.asarray(reference, dtype=complex)
    f = reference.shape[0]
    coef = fourier_coefficients(boundary_family, spec.circle_modes)
    terms = []
    for j, c in coef.items():
        c = np.asarray(c).reshape(f, f)
        vals = (1.0 - w)[:, None, None] * c[None]
        if j == 0:
            vals = vals + w[:, None, None] * reference[None]
        terms.append((vals, j))
    if 0 not in coef:
        terms.append((w[:, None, None] * reference[None], 0))
    return Potential(f, r, terms, spec.circle_modes, label)


def hedgehog_potential(
    spec: CylinderSpec,
    k: int,
    cap: str = "sigma3",
    rho: CutoffRho | None = None,
) -> Potential:
    """Winding off-diagonal potential ``(1-rho) F_k + rho C`` on the cylinder.

    ``cap`` selects the interior matrix ``C``: ``"sigma3"`` (a mass term),
    ``"sigma1"`` (an odd reference, making the lower-left entry a function
    with ``k`` vortices) or ``"minus_one"``.
    """
    caps = {"sigma3": SIGMA3, "sigma1": SIGMA1, "minus_one": -SIGMA0}
    if cap not in caps:
        raise ValueError(f"unknown cap {cap!r}")
    return collar_potential(spec, boundary_hedgehog(k), caps[cap], rho, label=f"hedgehog:{k}:{cap}")


def sample_potential(kind: str, geometry, **params) -> Potential:
    """Build a named potential on a geometry and check its exterior invertibility.

    ``kind`` is ``scalarProfile`` (line), ``windingUnitaryHedgehog`` or
    ``interpolatedCollar`` (cylinder).  The exterior is ``|r| >= band``
    with ``band`` defaulting to ``4``; :class:`NotInvertibleOutsideCompact`
    is raised if the potential degenerates there.
    """
    band = params.pop("band", None)
    if kind == "scalarProfile":
        pot = scalar_profile(geometry, params.get("shape", "tanh"), params.get("level", 1.0))
        grid = geometry.grid
        band = 1.0 if band is None else band
    elif kind == "windingUnitaryHedgehog":
        pot = hedgehog_potential(geometry, int(params["k"]), params.get("cap", "sigma3"), params.get("rho"))
        grid = geometry.line.grid
        band = 4.0 if band is None else band
    elif kind == "interpolatedCollar":
        pot = collar_potential(geometry, params["boundaryFamily"], params["referenceT"], params.get("rho"))
        grid = geometry.line.grid
        band = 4.0 if band is None else band
    else:
        raise ValueError(f"unknown potential kind {kind!r}")
    exterior = np.abs(grid) >= band
    if params.get("shape") != "constant" or kind != "scalarProfile":
        margin = pot.invertibility_margin(exterior)
        if margin < 1e-6:
            raise NotInvertibleOutsideCompact(f"potential has margin {margin:.2e} outside |r| < {band}")
    return pot


def difference_quotient_bound(pot: Potential) -> float:
    """Largest ``||S(x_{k+1}) - S(x_k)|| / h`` along the radial grid."""
    vals = pot.at(np.linspace(0, 2 * np.pi, 32, endpoint=False))
    h = pot.radial[1] - pot.radial[0]
    diffs = np.diff(vals, axis=0).reshape(-1, pot.fiber_dim, pot.fiber_dim)
    return float(np.max(np.linalg.norm(diffs, ord=2, axis=(1, 2)))) / h


# ---------------------------------------------------------------- Landau plane


@functools.lru_cache(maxsize=None)
def _log_norm(n: int, m: int) -> float:
    lo, hi = min(n, m), max(n, m)
    return 0.5 * (math.lgamma(lo + 1) - math.lgamma(hi + 1)) - 0.5 * math.log(math.pi)


def landau_radial(n: int, m: int, r):
    """Real radial factor of the Landau state ``|n, m>`` (angular part ``e^{i(m-n)theta}``)."""
    l = m - n
    lo = min(n, m)
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        logr = np.where(r > 0, np.log(np.where(r > 0, r, 1.0)), -np.inf)
    expo = _log_norm(n, m) + abs(l) * logr - 0.5 * r * r
    if abs(l) == 0:
        expo = np.where(r > 0, expo, _log_norm(n, m))
    lag = special.eval_genlaguerre(lo, abs(l), r * r)
    return (-1) ** lo * np.exp(expo) * lag


def landau_wavefunction(n: int, m: int, x, y):
    """Closed-form Landau state ``|n, m>`` sampled at points of the plane."""
    r = np.hypot(x, y)
    theta = np.arctan2(y, x)
    return landau_radial(n, m, r) * np.exp(1j * (m - n) * theta)


def landau_matrix_element(n: int, m: int, n2: int, m2: int, k: int, profile=None) -> float:
    """``<n, m| chi(r) e^{ik theta} |n2, m2>`` by adaptive radial quadrature.

    ``profile`` is an optional radial function ``chi``; the angular integral
    selects ``m - n = m2 - n2 + k``.
    """
    if (m - n) != (m2 - n2) + k:
        return 0.0
    centre = math.sqrt(max(m, m2) + 0.5)
    lo = max(0.0, centre - 14.0)
    hi = centre + 14.0
    chi = profile if profile is not None else (lambda r: 1.0)

    def integrand(r):
        return landau_radial(n, m, r) * landau_radial(n2, m2, r) * chi(r) * r

    val, err = integrate.quad(integrand, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=400)
    if err > 1e-10:
        raise QuadratureFailure(f"radial quadrature error {err:.2e} for <{n},{m}|{k}|{n2},{m2}>")
    return 2.0 * math.pi * val


@functools.lru_cache(maxsize=None)
def _cached_element(n, m, n2, m2, k):
    return landau_matrix_element(n, m, n2, m2, k)


def _radial_batch(n: int, m: np.ndarray, r: np.ndarray) -> np.ndarray:
    # landau_radial for a column of m values against rows of radii
    lo = np.minimum(n, m)
    hi = np.maximum(n, m)
    l = np.abs(m - n)
    lognorm = 0.5 * (special.gammaln(lo + 1) - special.gammaln(hi + 1)) - 0.5 * math.log(math.pi)
    expo = lognorm + l * np.log(r) - 0.5 * r * r
    return (-1.0) ** lo * np.exp(expo) * special.eval_genlaguerre(lo, l, r * r)


@functools.lru_cache(maxsize=8)
def _legendre(order: int):
    return np.polynomial.legendre.leggauss(order)


@functools.lru_cache(maxsize=None)
def _element_column(n: int, n2: int, k: int, fock_modes: int) -> tuple:
    """``<n, m| e^{ik theta} |n2, m2>`` for every admissible ``m2 < fock_modes``.

    Fixed Gauss-Legendre rules of two orders on the same windows as the
    adaptive routine; their disagreement is the error estimate.
    """
    m2 = np.arange(fock_modes)
    m = m2 - n2 + k + n
    keep = (m >= 0) & (m < fock_modes)
    m2, m = m2[keep], m[keep]
    if m2.size == 0:
        return (), ()
    centre = np.sqrt(np.maximum(m, m2) + 0.5)
    lo = np.maximum(0.0, centre - 14.0)
    hi = centre + 14.0
    vals = []
    for order in (160, 240):
        x, w = _legendre(order)
        r = 0.5 * (hi - lo)[:, None] * (x[None, :] + 1.0) + lo[:, None]
        f = _radial_batch(n, m[:, None], r) * _radial_batch(n2, m2[:, None], r) * r
        vals.append(2.0 * math.pi * 0.5 * (hi - lo) * (f @ w))
    err = float(np.max(np.abs(vals[1] - vals[0])))
    if err > 1e-10:
        raise QuadratureFailure(f"fixed-rule disagreement {err:.2e} for levels ({n}, {n2}), frequency {k}")
    return tuple(zip(m.tolist(), m2.tolist())), tuple(vals[1].tolist())


def lll_shift_weight(m: int) -> float:
    """Closed form of ``<m+1| e^{i theta} |m>`` in the lowest level."""
    return math.exp(math.lgamma(m + 1.5) - 0.5 * (math.lgamma(m + 1) + math.lgamma(m + 2)))


def landau_symbol_matrix(symbol: dict, fock_modes: int, levels=(0,), levels_right=None) -> np.ndarray:
    """Matrix of an angular trigonometric polynomial between Landau states.

    ``symbol`` maps angular frequency ``k`` to its coefficient.  Rows index
    ``(level, m)`` over ``levels`` and columns over ``levels_right``
    (defaulting to the same), each with ``m = 0..fock_modes-1``.  With the
    default single level this is the compression to the lowest level.
    """
    levels = tuple(levels)
    levels_right = levels if levels_right is None else tuple(levels_right)
    mm = fock_modes
    out = np.zeros((len(levels) * mm, len(levels_right) * mm), dtype=complex)
    for a, n in enumerate(levels):
        for b, n2 in enumerate(levels_right):
            for k, c in symbol.items():
                if c == 0:
                    continue
                pairs, vals = _element_column(int(n), int(n2), int(k), mm)
                for (m, m2), v in zip(pairs, vals):
                    out[a * mm + m, b * mm + m2] += c * v
    return out


def landau_dirac_plus(spec: LandauSpec) -> np.ndarray:
    """``D_+ |n, m> = sqrt(2n) |n-1, m>`` from levels ``0..L-1`` to ``0..L-2``."""
    mm = spec.fock_modes
    nl = spec.levels
    out = np.zeros(((nl - 1) * mm, nl * mm), dtype=complex)
    for n in range(1, nl):
        for m in range(mm):
            out[(n - 1) * mm + m, n * mm + m] = math.sqrt(2.0 * n)
    return out


def landau_dirac(spec: LandauSpec):
    """Full graded Landau Dirac operator ``[[0, D_-], [D_+, 0]]`` and its grading."""
    dp = landau_dirac_plus(spec)
    a, b = dp.shape
    d = np.block([[np.zeros((b, b)), dp.conj().T], [dp, np.zeros((a, a))]])
    return d, Grading.standard(b, a)


def landau_interior_mask(spec: LandauSpec, levels: int, fraction: float = 0.75) -> np.ndarray:
    m = np.tile(np.arange(spec.fock_modes), levels)
    return (m < fraction * spec.fock_modes).astype(float)

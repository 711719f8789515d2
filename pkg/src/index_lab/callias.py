"""Hypersurface reduction for Callias-type operators on a truncated cylinder.

The cylinder ``R x S^1`` carries a potential that equals an invertible
reference ``T`` on the left, a circle family ``F(theta)`` on the right and
interpolates across a collar.  The index of the product operator is compared
with data computed on the circle ``r = 0`` alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import numlin
from .errors import HypersurfaceNotInGrid, MethodDisagreement, UndersampledLoop
from .geometry import (
    SIGMA1,
    SIGMA3,
    CutoffRho,
    CylinderSpec,
    Potential,
    circle_dirac,
    collar_potential,
    cylinder_dirac,
    fourier_coefficients,
    graded_circle_dirac,
    toeplitz_multiplication,
    boundary_hedgehog,
)
from .grading import Grading, Signature, positive_spectral_projection
from .product import (
    IndexResult,
    block_index,
    build_product_operator,
    index_by_chirality,
    lambda_search,
)
from .projflow import OperatorPath, ProjectionLoop, relind0, relind1, spectral_flow0

GAMMA_S = Grading.diagonal([1.0, -1.0])


@dataclass
class CalliasScenario:
    """A cylinder, a boundary family, a reference and a signature.

    ``boundary_family`` maps angles to fibre matrices.  The reference
    defaults to ``-1`` for ``p = 1`` and ``sigma_1`` for ``p = 0``.
    """

    geometry: CylinderSpec
    boundary_family: object
    signature: Signature
    reference: np.ndarray | None = None
    rho: CutoffRho = field(default_factory=lambda: CutoffRho(-3.0, -1.0))
    lambda_grid: tuple = (1.0, 2.0, 4.0)
    label: str = ""

    def __post_init__(self):
        if not isinstance(self.signature, Signature):
            self.signature = Signature(*self.signature)
        if self.reference is None:
            self.reference = -np.eye(2, dtype=complex) if self.signature.p == 1 else SIGMA1.copy()
        self.reference = np.asarray(self.reference, dtype=complex)
        if np.min(np.abs(np.linalg.eigvalsh(self.reference))) < 1e-3:
            raise ValueError("reference operator is not invertible")
        if self.signature.p == 0:
            g = GAMMA_S.dense()
            if np.linalg.norm(g @ self.reference + self.reference @ g) > 1e-8:
                raise ValueError("for p = 0 the reference must anticommute with the fibre grading")

    def potential(self) -> Potential:
        return collar_potential(self.geometry, self.boundary_family, self.reference, self.rho, self.label)

    def exterior_mask(self) -> np.ndarray:
        r = self.geometry.line.grid
        return (r <= self.rho.start - 0.5) | (r >= self.rho.end + 0.5)

    def position_interior(self) -> np.ndarray:
        g = self.geometry
        r = g.line.grid
        n = g.circle.frequencies
        return np.kron(np.abs(r) <= 0.8 * g.half_length, np.abs(n) <= 0.75 * g.circle_modes).astype(float)

    def build(self, lam: float, potential: Potential | None = None):
        pot = potential if potential is not None else self.potential()
        sig = self.signature
        d, gamma_d = cylinder_dirac(self.geometry, sig.q)
        return build_product_operator(
            pot, d, sig, lam,
            gamma_s=GAMMA_S if sig.p == 0 else None,
            gamma_d=gamma_d,
            position_interior=self.position_interior(),
            provenance={"label": self.label, "lambda": lam},
        )


def hedgehog_scenario(spec: CylinderSpec, k: int, signature, **kw) -> CalliasScenario:
    return CalliasScenario(spec, boundary_hedgehog(k), Signature(*signature) if not isinstance(signature, Signature) else signature,
                           label=f"hedgehog k={k}", **kw)


@dataclass
class BoundaryData:
    thetas: np.ndarray
    s_n: np.ndarray
    d_n: np.ndarray
    gamma_n: Grading | None
    u_n: np.ndarray | None
    modes: int
    family: object = None


def hypersurface_index(spec: CylinderSpec) -> int:
    r = spec.line.grid
    idx = int(np.searchsorted(r, 0.0))
    if idx >= r.size or r[idx] - 0.0 > spec.line.spacing:
        raise HypersurfaceNotInGrid("no grid point at or just right of r = 0")
    return idx


def restrict_to_hypersurface(scenario: CalliasScenario, samples: int = 128) -> BoundaryData:
    """Restrict the potential to the first grid circle with ``r >= 0``.

    The collar cutoff vanishes there, so the restriction is the boundary
    family itself.  When the restriction is off-diagonal its lower-left
    block is returned as the boundary unitary.
    """
    spec = scenario.geometry
    idx = hypersurface_index(spec)
    thetas = 2 * np.pi * np.arange(samples) / samples
    pot = scenario.potential()
    s_n = pot.at(thetas)[idx]
    if scenario.signature.q == 1:
        d_n, gamma_n = graded_circle_dirac(spec.circle_modes)
    else:
        d_n, gamma_n = circle_dirac(spec.circle_modes), None
    u_n = None
    f = s_n.shape[-1]
    if f % 2 == 0:
        h = f // 2
        diag = np.max(np.abs(s_n[:, :h, :h])) + np.max(np.abs(s_n[:, h:, h:]))
        if diag < 1e-12:
            u_n = s_n[:, h:, :h]
    return BoundaryData(thetas, s_n, d_n, gamma_n, u_n, spec.circle_modes, scenario.boundary_family)


def boundary_relative_class(bd: BoundaryData, reference: np.ndarray, p: int) -> int:
    """Relative class of the boundary restriction against the constant reference.

    ``p = 1``: the fibrewise even relative index, checked constant around
    the circle.  ``p = 0``: the odd relative index of the two projection
    loops, a winding number.
    """
    ref = np.asarray(reference, dtype=complex)
    q = positive_spectral_projection(ref, 1e-3)
    if p == 1:
        values = {relind0(positive_spectral_projection(s, 1e-6), q) for s in bd.s_n}
        if len(values) != 1:
            raise ValueError(f"fibrewise relative index varies around the circle: {sorted(values)}")
        return values.pop()
    ploop = ProjectionLoop([positive_spectral_projection(s, 1e-6) for s in bd.s_n], GAMMA_S)
    qloop = ProjectionLoop([q] * len(bd.s_n), GAMMA_S)
    return relind1(ploop, qloop)


def _flow_perturbation(u_fn, modes: int) -> np.ndarray:
    """Truncated multiplication by ``-i u^H u'`` for a trigonometric polynomial ``u``."""
    coef = fourier_coefficients(u_fn, modes)

    def deriv(theta):
        theta = np.asarray(theta, dtype=float)
        out = 0
        for j, c in coef.items():
            out = out + 1j * j * np.multiply.outer(np.exp(1j * j * theta), np.asarray(c))
        return out

    def integrand(theta):
        u = np.asarray(u_fn(theta), dtype=complex)
        du = np.asarray(deriv(theta), dtype=complex)
        if u.ndim == 1:
            return -1j * np.conj(u) * du
        return -1j * np.einsum("tji,tjk->tik", u.conj(), du)

    return toeplitz_multiplication(integrand, modes)


def unitary_flow(u_fn, modes: int, report: bool = False, offset: float = 0.0):
    """Spectral flow from ``D_N`` to ``u^H D_N u`` on the truncated circle.

    The path is ``D_N + t (-i u^H u')``; ``u_fn`` maps angles to unitary
    matrices (or scalars).  ``offset`` shifts ``D_N`` by a multiple of the
    identity, e.g. ``1/2`` for the Hardy convention.
    """
    sample = np.asarray(u_fn(np.zeros(1)))
    f = 1 if sample.ndim == 1 else sample.shape[-1]
    dn = np.kron(np.eye(f), circle_dirac(modes) + offset * np.eye(2 * modes + 1))
    v = _flow_perturbation(u_fn, modes)
    path = OperatorPath.from_function(lambda t: dn + t * v, 0.0, 1.0, 17)
    return spectral_flow0(path, report=report)


def _compressed_pairing(bd: BoundaryData) -> IndexResult:
    """Chirality count for the compression of the graded circle operator onto ``Ran P_+(F_N)``."""
    m = bd.modes
    f_op = toeplitz_multiplication(bd.family, m)
    vals, vecs = numlin.eigh(0.5 * (np.eye(f_op.shape[0]) + f_op))
    v = vecs[:, vals > 0.5]
    f = f_op.shape[0] // (2 * m + 1)
    dplus = np.kron(np.eye(f), circle_dirac(m))
    a = v.conj().T @ dplus @ v
    n = np.arange(-m, m + 1)
    interior_pos = np.kron(np.ones(f), (np.abs(n) <= 0.75 * m).astype(float))
    mask = v.conj().T @ (interior_pos[:, None] * v)
    return block_index(a, mask, mask)


def boundary_pairing(bd: BoundaryData, p: int) -> int:
    """Pair the boundary class with the circle Dirac operator.

    ``p = 1`` (graded circle operator): the index of ``P_+(F_N) D_N P_+(F_N)``
    by chirality counting, checked against the rank of ``P_+(F_N)`` times the
    index of the graded circle operator.  ``p = 0``: the spectral flow from
    ``D_N`` to ``U_N^H D_N U_N``.
    """
    if p == 1:
        if bd.gamma_n is None:
            raise ValueError("p = 1 pairing needs the graded circle operator")
        direct = _compressed_pairing(bd)
        rank = positive_spectral_projection(bd.s_n[0], 1e-6).rank
        dplus = circle_dirac(bd.modes)
        _, ker, _ = numlin.numerical_kernel(dplus, 1e-6)
        _, coker, _ = numlin.numerical_kernel(dplus.conj().T, 1e-6)
        factored = rank * (ker - coker)
        if not direct.conclusive or direct.value != factored:
            raise MethodDisagreement(f"compressed count {direct.value} against factorised value {factored}")
        return factored
    if bd.u_n is None:
        raise ValueError("p = 0 pairing needs an off-diagonal boundary restriction")
    fam = bd.family
    h = bd.s_n.shape[-1] // 2

    def u_fn(theta):
        vals = np.asarray(fam(theta))[..., h:, :h]
        return vals[..., 0, 0] if h == 1 else vals

    return unitary_flow(u_fn, bd.modes)


@dataclass
class CalliasReport:
    lhs: IndexResult
    rhs: int
    relative_class: int
    lam: float
    sign: int = 1

    @property
    def agree(self) -> bool:
        return self.lhs.conclusive and self.lhs.value == self.sign * self.rhs


def callias_verify(scenario: CalliasScenario, sign: int = 1) -> CalliasReport:
    """Product-operator index against the boundary pairing.

    ``sign`` is the global orientation sign fixed once by a calibration
    scenario; the report records it alongside the raw values.
    """
    pot = scenario.potential()
    lam, _, lhs = lambda_search(scenario.build, pot, scenario.exterior_mask(), scenario.lambda_grid,
                                scenario.signature)
    bd = restrict_to_hypersurface(scenario)
    rel = boundary_relative_class(bd, scenario.reference, scenario.signature.p)
    rhs = boundary_pairing(bd, scenario.signature.p)
    return CalliasReport(lhs, rhs, rel, lam, sign)


def cylinder_reduction_check(scenario: CalliasScenario, alternate: Potential, lam: float | None = None) -> bool:
    """Do two potentials with the same boundary data give the same index?"""
    lam = lam if lam is not None else scenario.lambda_grid[-1]
    a = index_by_chirality(scenario.build(lam))
    b = index_by_chirality(scenario.build(lam, potential=alternate))
    return a.conclusive and b.conclusive and a.value == b.value


def cobordism_check(u_fn, modes: int = 12, samples: int = 256) -> int:
    """Spectral flow ``SF(D_N, u^H D_N u)`` for a boundary unitary.

    When the determinant of ``u`` has winding zero (so ``u`` extends over
    the disk up to homotopy) the flow must vanish, and this is asserted.
    """
    thetas = 2 * np.pi * np.arange(samples) / samples
    u = np.asarray(u_fn(thetas), dtype=complex)
    det = u if u.ndim == 1 else np.linalg.det(u)
    try:
        winding = numlin.phase_winding(det)
    except UndersampledLoop:
        raise
    value = unitary_flow(u_fn, modes)
    if winding == 0:
        assert value == 0, "winding-zero boundary unitary has nonzero spectral flow"
    return value


def sigma3_cap(spec: CylinderSpec, k: int, rho: CutoffRho | None = None) -> Potential:
    """Alternate interior: the same boundary family capped by ``sigma_3``."""
    return collar_potential(spec, boundary_hedgehog(k), SIGMA3, rho, label=f"hedgehog k={k} sigma3 cap")

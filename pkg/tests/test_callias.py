import numpy as np
import pytest

from index_lab.callias import (
    CalliasScenario,
    boundary_pairing,
    boundary_relative_class,
    callias_verify,
    cobordism_check,
    cylinder_reduction_check,
    hedgehog_scenario,
    hypersurface_index,
    restrict_to_hypersurface,
    sigma3_cap,
    unitary_flow,
)
from index_lab.errors import HypersurfaceNotInGrid
from index_lab.geometry import SIGMA1, SIGMA3, CylinderSpec, LineSpec, boundary_hedgehog

SPEC = CylinderSpec(8.0, 80, 8)


@pytest.mark.parametrize("k", [-2, 0, 1, 3])
def test_unitary_flow_is_winding(k):
    assert unitary_flow(lambda th: np.exp(1j * k * th), 10) == k


def test_unitary_flow_of_matrix_symbol():
    def u(th):
        th = np.asarray(th)
        out = np.zeros(th.shape + (2, 2), dtype=complex)
        out[..., 0, 0] = np.exp(2j * th)
        out[..., 1, 1] = np.exp(-1j * th)
        return out

    assert unitary_flow(u, 10) == 1


def test_unitary_flow_report():
    rep = unitary_flow(lambda th: np.exp(1j * th), 8, report=True)
    assert rep.value == 1 and rep.crossings


def test_cobordism_winding_zero_has_no_flow():
    def u(th):
        th = np.asarray(th)
        out = np.zeros(th.shape + (2, 2), dtype=complex)
        out[..., 0, 0] = np.exp(1j * th)
        out[..., 1, 1] = np.exp(-1j * th)
        return out

    assert cobordism_check(u, modes=8) == 0
    assert cobordism_check(lambda th: np.exp(1j * np.asarray(th)), modes=8) == 1


def test_hypersurface_index_on_grid():
    idx = hypersurface_index(SPEC)
    r = SPEC.line.grid
    assert r[idx] >= 0 and r[idx - 1] < 0


class _LeftLine(LineSpec):
    @property
    def grid(self):
        return np.linspace(-8.0, -1.0, self.points)


class _LeftCylinder(CylinderSpec):
    # a truncation that never reaches r = 0
    @property
    def line(self):
        return _LeftLine(8.0, self.line_points)


def test_hypersurface_missing():
    with pytest.raises(HypersurfaceNotInGrid):
        hypersurface_index(_LeftCylinder(8.0, 40, 4))


def test_reference_checks():
    with pytest.raises(ValueError):
        CalliasScenario(SPEC, boundary_hedgehog(1), (0, 0), reference=SIGMA3)
    with pytest.raises(ValueError):
        CalliasScenario(SPEC, boundary_hedgehog(1), (1, 1), reference=np.diag([1.0, 0.0]))


@pytest.mark.parametrize("k", [-1, 2])
def test_restriction_recovers_boundary_family(k):
    bd = restrict_to_hypersurface(hedgehog_scenario(SPEC, k, (0, 0)))
    np.testing.assert_allclose(bd.s_n, boundary_hedgehog(k)(bd.thetas), atol=1e-12)
    np.testing.assert_allclose(bd.u_n[:, 0, 0], np.exp(1j * k * bd.thetas), atol=1e-12)
    assert boundary_relative_class(bd, SIGMA1, 0) == k
    assert boundary_pairing(bd, 0) == k


@pytest.mark.parametrize("k", [-1, 2])
def test_even_even_cylinder_index_against_boundary_flow(k):
    rep = callias_verify(hedgehog_scenario(SPEC, k, (0, 0)), sign=-1)
    assert rep.lhs.value == -k
    assert rep.rhs == k
    assert rep.agree


def test_odd_odd_cylinder_index_vanishes():
    rep = callias_verify(hedgehog_scenario(SPEC, 1, (1, 1)))
    assert rep.lhs.value == 0 and rep.rhs == 0 and rep.agree
    assert rep.relative_class == 1


def test_interior_cap_does_not_change_index():
    sc = hedgehog_scenario(SPEC, 1, (1, 1))
    assert cylinder_reduction_check(sc, sigma3_cap(SPEC, 1))

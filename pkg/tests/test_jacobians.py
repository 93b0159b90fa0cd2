import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lapsewick import diffeos
from lapsewick.errors import BlockInversionError, CompositionError, OrientationError
from lapsewick.jacobians import (
    DiffeoMap,
    JacobianBlocks,
    chain_blocks,
    compose_diffeos,
    identity_blocks,
    invert_jacobian_blocks,
    jacobian_blocks,
)

PTS_T = np.array([0.1, 1.3, 4.0])
PTS_X = np.array([[0.2], [2.5], [5.9]])


def blocks_1d(tt, tx, xt, xx):
    return JacobianBlocks(np.array([tt]), np.array([[tx]]), np.array([[xt]]), np.array([[[xx]]]))


def test_identity_blocks():
    b = jacobian_blocks(diffeos.identity(1), PTS_T, PTS_X)
    assert b.max_difference(identity_blocks((3,), 1)) == 0.0


def test_scaling_blocks():
    b = diffeos.scaling(2.0, 3.0).blocks(PTS_T, PTS_X)
    assert np.allclose(b.matrix(), [[2.0, 0.0], [0.0, 3.0]])


def test_boost_blocks():
    gamma = 2 / np.sqrt(3)
    b = diffeos.boost(0.5).blocks(PTS_T, PTS_X)
    expect = [[gamma, -gamma * 0.5], [-gamma * 0.5, gamma]]
    assert np.max(np.abs(b.matrix() - expect)) < 1e-15


def test_inverse_examples():
    assert invert_jacobian_blocks(identity_blocks((2,), 2)).max_difference(identity_blocks((2,), 2)) == 0.0
    inv = invert_jacobian_blocks(blocks_1d(2.0, 0.0, 0.0, 3.0))
    assert np.allclose(inv.matrix()[0], np.diag([0.5, 1 / 3]), atol=0)


@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4))
def test_inverse_matches_dense(vals):
    a, b, c, e = vals
    if abs(a) < 0.1 or abs(e) < 0.1 or abs(a * e - b * c) < 0.1:
        return
    blocks = blocks_1d(a, b, c, e)
    inv = invert_jacobian_blocks(blocks)
    assert np.max(np.abs(inv.matrix()[0] - np.linalg.inv([[a, b], [c, e]]))) < 1e-13 * max(1.0, np.max(np.abs(inv.matrix())))


def test_inverse_rejects_singular_block():
    with pytest.raises(BlockInversionError, match="index"):
        invert_jacobian_blocks(blocks_1d(1.0, 1.0, 1.0, 1.0))


@pytest.mark.parametrize("name", ["boost:0.5", "shear:0.2,1", "flow:0.1,1", "warp:0.1,1", "shearflow"])
def test_forward_times_inverse_is_identity(name):
    m = diffeos.map_from_string(name)
    b = m.blocks(PTS_T, PTS_X)
    prod = np.einsum("...ij,...jk->...ik", b.matrix(), b.inverse().matrix())
    assert np.max(np.abs(prod - np.eye(2))) < 1e-11
    fd = m.with_mode("fd").blocks(PTS_T, PTS_X)
    prod = np.einsum("...ij,...jk->...ik", fd.matrix(), fd.inverse().matrix())
    assert np.max(np.abs(prod - np.eye(2))) < 1e-6


def test_fd_matches_analytic():
    m = diffeos.shear_flow(0.2, 1.0, 0.15, 1.0)
    a = m.blocks(PTS_T, PTS_X)
    assert a.max_difference(m.with_mode("fd").blocks(PTS_T, PTS_X)) < 1e-6
    assert a.max_difference(m.with_mode("fd", richardson=True).blocks(PTS_T, PTS_X)) < 1e-9


def test_compose_with_identity():
    f = diffeos.shear(0.2, 1.0)
    c = compose_diffeos(diffeos.identity(1), f)
    assert c.blocks(PTS_T, PTS_X).max_difference(f.blocks(PTS_T, PTS_X)) < 1e-15


def test_compose_worked_example():
    first = DiffeoMap(lambda t, x: (t + x[..., 0], x), 1)
    second = diffeos.scaling(2.0, 1.0)
    b = compose_diffeos(first, second).blocks(PTS_T, PTS_X)
    assert np.allclose(b.matrix(), [[2.0, 2.0], [0.0, 1.0]], atol=1e-9)


def test_compose_boosts_is_identity():
    c = compose_diffeos(diffeos.boost(0.5), diffeos.boost(-0.5))
    assert c.blocks(PTS_T, PTS_X).max_difference(identity_blocks((3,), 1)) < 1e-12


def test_chain_rule_blocks():
    f, g = diffeos.shear(0.2, 1.0), diffeos.flow(0.1, 1.0)
    tp, xp = f(PTS_T, PTS_X)
    direct = chain_blocks(g.blocks(tp, xp), f.blocks(PTS_T, PTS_X))
    dense = np.einsum("...ij,...jk->...ik", g.blocks(tp, xp).matrix(), f.blocks(PTS_T, PTS_X).matrix())
    assert np.max(np.abs(direct.matrix() - dense)) < 1e-11


def test_compose_dimension_mismatch():
    with pytest.raises(CompositionError):
        compose_diffeos(diffeos.identity(1), diffeos.identity(2))


def test_compose_domain_violation():
    guarded = DiffeoMap(lambda t, x: (t, x), 1, domain=lambda t, x: t < 1.0, name="guarded")
    with pytest.raises(CompositionError, match="domain"):
        compose_diffeos(diffeos.identity(1), guarded)(PTS_T, PTS_X)


def test_orientation_check():
    flip = diffeos.scaling(1.0, 1.0)
    rev = DiffeoMap(lambda t, x: (-t, x), 1, name="reverse")
    flip.check_orientation(PTS_T, PTS_X)
    with pytest.raises(OrientationError):
        rev.check_orientation(PTS_T, PTS_X)

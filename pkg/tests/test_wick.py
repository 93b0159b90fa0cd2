import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lapsewick import diffeos, wick
from lapsewick.errors import BranchError, DegenerateLeafError, DomainError, DoubleRotationError
from lapsewick.geometry import Grid, random_spec, reconstruct_metric
from lapsewick.jacobians import compose_diffeos

THETAS = [0.3, np.pi / 2, 2.5]
MAPS = ["boost:0.5", "shear:0.1,1", "shearflow:0.1,1,0.1,1"]


def test_rotation_at_zero_is_identity(random_triple1):
    rot = wick.wick_rotate_fiducial(random_triple1, 0.0)
    assert np.max(np.abs(rot.lapse - random_triple1.lapse)) == 0.0


def test_rotation_at_half_pi_gives_euclidean(random_triple1):
    rot = wick.wick_rotate_fiducial(random_triple1, np.pi / 2)
    assert np.max(np.abs(rot.lapse - (-1j) * random_triple1.lapse)) < 1e-15
    euclid = reconstruct_metric(random_triple1.with_signature(1)).metric
    assert np.max(np.abs(reconstruct_metric(rot).metric - euclid)) < 1e-14


def test_euclidean_input_unchanged_at_half_pi(random_triple1):
    plus = random_triple1.with_signature(1)
    rot = wick.wick_rotate_fiducial(plus, np.pi / 2)
    assert np.max(np.abs(reconstruct_metric(rot).metric - reconstruct_metric(plus).metric)) < 1e-14


def test_rotation_errors(random_triple1):
    rot = wick.wick_rotate_fiducial(random_triple1, 0.4)
    with pytest.raises(DoubleRotationError):
        wick.wick_rotate_fiducial(rot, 0.4)
    with pytest.raises(DomainError):
        wick.wick_rotate_fiducial(random_triple1, np.pi)


def test_flip_algebra(random_triple1):
    lor = random_triple1
    assert wick.wick_flip(wick.wick_flip(lor, 1), -1).max_difference(lor) == 0.0
    assert wick.wick_flip(wick.wick_flip(lor, -1), 1).signature == 1
    once = wick.wick_flip(lor, 1)
    assert wick.wick_flip(once, 1).max_difference(once) == 0.0


def test_transform_identity(random_triple2):
    out = wick.transform_triple(random_triple2, diffeos.identity(2))
    assert out.max_difference(random_triple2) < 1e-15


def test_time_rescaling(random_triple1):
    out = wick.transform_triple(random_triple1, diffeos.scaling(2.0, 1.0))
    assert np.max(np.abs(out.lapse - random_triple1.lapse / 2)) < 1e-15
    assert np.max(np.abs(out.spatial_metric - random_triple1.spatial_metric)) < 1e-15


def test_boost_preserves_minkowski(flat_triple1):
    out = wick.transform_triple(flat_triple1, diffeos.boost(0.5))
    assert np.max(np.abs(out.lapse - 1)) < 1e-12
    assert np.max(np.abs(out.shift)) < 1e-12
    assert np.max(np.abs(out.spatial_metric - 1)) < 1e-12


@pytest.mark.parametrize("d", [1, 2])
@pytest.mark.parametrize("theta", THETAS)
@pytest.mark.parametrize("name", MAPS)
def test_line_element_invariance(d, theta, name):
    tr = random_spec(d, seed=4).on(Grid(d, 6, 6))
    m = diffeos.map_from_string(name, d)
    assert wick.line_element_residual(tr, m, theta) < 1e-10
    assert wick.inverse_metric_residual(tr, m, theta) < 1e-10


def test_line_element_fd_jacobians(random_triple1):
    m = diffeos.shear_flow(0.1, 1.0, 0.1, 1.0).with_mode("fd")
    assert wick.line_element_residual(random_triple1, m, 1.0) < 1e-5


@given(theta=st.floats(0.0, np.pi - 1e-3), v=st.floats(-0.7, 0.7), seed=st.integers(0, 50))
def test_line_element_invariance_property(theta, v, seed):
    tr = random_spec(1, seed=seed).on(Grid(1, 4, 4))
    assert wick.line_element_residual(tr, diffeos.boost(v), theta) < 1e-10


def test_foliation_preserving_map_keeps_phase(random_triple1):
    theta = 0.8
    m = diffeos.scaling(2.0, 1.5)
    rot = wick.transform_triple(wick.wick_rotate_fiducial(random_triple1, theta), m)
    real = wick.transform_triple(random_triple1, m)
    assert np.max(np.abs(rot.lapse - np.exp(-1j * theta) * real.lapse)) < 1e-15


def test_group_property(random_triple1):
    a, b = diffeos.shear(0.1, 1.0), diffeos.boost(0.3)
    rot = wick.wick_rotate_fiducial(random_triple1, 1.1)
    two_step = wick.transform_triple(wick.transform_triple(rot, a), b)
    direct = wick.transform_triple(rot, compose_diffeos(a, b))
    assert two_step.max_difference(direct) < 1e-10


def test_degenerate_leaf_and_branch(flat_triple1):
    with pytest.raises(DegenerateLeafError):
        wick.transform_triple(flat_triple1, diffeos.shear(1.0, 1.0))
    with pytest.raises(BranchError):
        wick.transform_triple(wick.wick_rotate_fiducial(flat_triple1, 0.0), diffeos.shear(2.0, 1.0))


def test_nonfiducial_flip_identity_map(random_triple1):
    out = wick.wick_flip_nonfiducial(random_triple1, diffeos.identity(1), 1)
    assert out.signature == 1
    assert out.max_difference(random_triple1.with_signature(1)) < 1e-14


def test_nonfiducial_flip_idempotent_and_roundtrip(flat_triple1):
    m = diffeos.boost(0.5)
    image = wick.transform_triple(flat_triple1.with_signature(1), m)
    once = wick.wick_flip_nonfiducial(image, m, 1)
    assert wick.wick_flip_nonfiducial(once, m, 1).max_difference(once) < 1e-11
    lor = wick.wick_flip_nonfiducial(image, m, -1)
    back = wick.wick_flip_nonfiducial(lor, m, 1)
    assert back.max_difference(image) < 1e-11


def test_covector_examples(random_triple1):
    m = diffeos.shear(0.2, 1.0)
    n = random_triple1.shape
    unit = wick.CovectorComponents(np.ones(n), np.zeros(n + (1,)))
    same = wick.transform_covector(unit, random_triple1, diffeos.identity(1))
    assert np.max(np.abs(same.v - 1)) < 1e-15 and np.max(np.abs(same.va)) < 1e-15
    out = wick.transform_covector(unit, random_triple1, m)
    ld = wick.leaf_data(random_triple1, m.blocks(random_triple1.t, random_triple1.x))
    assert np.max(np.abs(out.v - ld.C / ld.D)) < 1e-14
    assert np.max(np.abs(out.va - random_triple1.lapse[..., None] * ld.inverse_blocks.tx)) < 1e-14


def _pairing_residuals(triple, m, seed=0):
    rng = np.random.default_rng(seed)
    n = triple.shape
    co = wick.CovectorComponents(rng.standard_normal(n), rng.standard_normal(n + (1,)))
    ve = wick.VectorComponents(rng.standard_normal(n), rng.standard_normal(n + (1,)))
    blocks = m.blocks(triple.t, triple.x)
    image = wick.transform_triple(triple, m, blocks=blocks)
    co2 = wick.transform_covector(co, triple, m, blocks)
    ve2 = wick.transform_vector(ve, triple, m, blocks)
    V = wick.covector_coordinates(co, triple)
    V2 = wick.covector_coordinates(co2, image)
    U = wick.vector_coordinates(ve, triple)
    U2 = wick.vector_coordinates(ve2, image)
    J = blocks.matrix()
    # the 1-form evaluated on pushed-forward tangent vectors
    form = np.max(np.abs(np.einsum("...m,...mn->...n", V2, J) - V))
    vec = np.max(np.abs(np.einsum("...mn,...n->...m", J, U) - U2))
    pair = np.max(np.abs(np.einsum("...m,...m->...", V, U) - np.einsum("...m,...m->...", V2, U2)))
    return form, vec, pair


@pytest.mark.parametrize("name", MAPS)
def test_covector_vector_invariance(random_triple1, name):
    form, vec, pair = _pairing_residuals(random_triple1, diffeos.map_from_string(name))
    assert form < 1e-11 and vec < 1e-11 and pair < 1e-11


def test_vector_example(random_triple1):
    m = diffeos.boost(0.4)
    n = random_triple1.shape
    blocks = m.blocks(random_triple1.t, random_triple1.x)
    out = wick.transform_vector(wick.VectorComponents(np.ones(n), np.zeros(n + (1,))), random_triple1, m, blocks)
    ld = wick.leaf_data(random_triple1, blocks)
    N = random_triple1.lapse
    gv = np.einsum("...bc,...c->...b", ld.ginv, blocks.tx)
    expect = -(N * ld.C / ld.D**2)[..., None] * np.einsum("...ab,...b->...a", ld.X, gv)
    assert np.max(np.abs(out.v - ld.C / ld.D)) < 1e-14
    assert np.max(np.abs(out.va - expect)) < 1e-14


def test_rank_one_identity_map(random_triple1):
    form = wick.rank_one_decompose(random_triple1, diffeos.identity(1), 0.7)
    assert np.max(np.abs(form.components[0] - 1)) < 1e-15
    assert np.max(np.abs(form.components[1])) < 1e-15


def test_rank_one_coefficients():
    assert wick.rank_one_coefficient(-1, 0.0) == 0
    assert abs(wick.rank_one_coefficient(1, np.pi / 2)) < 1e-15
    assert abs(wick.rank_one_coefficient(1, np.pi / 2, "inverse")) < 1e-15


@pytest.mark.parametrize("variant", ["metric", "inverse"])
@pytest.mark.parametrize("theta", [np.pi / 3, 0.3, 2.5])
def test_rank_one_reassembly(random_triple1, variant, theta):
    for name in MAPS:
        assert wick.rank_one_residual(random_triple1, diffeos.map_from_string(name), theta, variant) < 1e-11


def test_vielbein_gram_examples():
    e0 = np.array([1.0, 0.0, 0.0])
    assert np.allclose(wick.vielbein_gram(np.pi / 2, 1, e0), np.eye(3), atol=1e-15)
    assert np.allclose(wick.vielbein_gram(0.0, 1, e0), np.diag([-1.0, 1.0, 1.0]), atol=1e-15)
    ev = np.linalg.eigvals(wick.vielbein_gram(np.pi / 4, 1, e0))
    assert np.sum(np.abs(ev - 1j) < 1e-12) == 1


@given(theta=st.floats(0.0, np.pi - 1e-3), sig=st.sampled_from([-1, 1]), a=st.floats(0, 2 * np.pi))
def test_vielbein_eigenvalues(theta, sig, a):
    e = np.array([np.cos(a), np.sin(a)])
    ev = np.sort_complex(np.linalg.eigvals(wick.vielbein_gram(theta, sig, e)))
    expect = np.sort_complex(np.array([-np.exp(-2j * theta), 1.0]))
    assert np.max(np.abs(ev - expect)) < 1e-12


def test_vielbein_from_triple(random_triple2):
    theta = 0.9
    gram = wick.vielbein_gram_from_triple(random_triple2, theta)
    expect = wick.vielbein_gram(theta, 1, np.array([1.0, 0.0, 0.0]))
    assert np.max(np.abs(gram - expect)) < 1e-12

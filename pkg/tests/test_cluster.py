import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from liecluster.algebra import sample_group_params
from liecluster.cluster import (
    LinearConfig, LinearModel, PointCloud, RadialHarmonic, TraceBasis, lorentz_vectors,
    mix_channels, o3_vectors, pool_atomic_basis, product_basis, su2_spinors, sun_vectors,
    symmetrize_basis,
)
from liecluster.cluster.io import cloud_to_json, parse_cloud
from liecluster.coupling import CouplingTensor
from liecluster.errors import ConfigurationError, InvalidArgumentError
from liecluster.irreps import IrrepLabel, irrep

from conftest import rel_residual

O3_0 = IrrepLabel("O3", (0, 1))
O3_1 = IrrepLabel("O3", (1, -1))


def random_cloud(rng, n, arity=3, scale=0.7):
    return PointCloud(rng.normal(size=(n, arity)) * scale)


def embedded(emb, cloud):
    return emb.embed(cloud.permuted(cloud.canonical_order()))


# --- embeddings -----------------------------------------------------------------

def test_rep_coordinates_copies_vector():
    emb = lorentz_vectors(powers=(1,))
    phi = emb.embed(PointCloud([[1.0, 0.0, 0.0, 0.0]]))
    assert phi.shape == (1, 1, 4)
    assert np.array_equal(phi[0, 0], [1, 0, 0, 0])


def test_radial_l0_isotropic():
    emb = RadialHarmonic(l_max=0, n_max=4, r_cut=2.0)
    r = 0.83
    dirs = np.array([[1, 0, 0], [0, 0, -1], [0.6, 0.8, 0], [1, 1, 1] / np.sqrt(3)])
    phi = emb.embed(PointCloud(r * dirs))
    assert np.abs(phi - phi[:1]).max() < 1e-14
    assert np.abs(phi[0, :, 0] - emb.radial_basis(np.array(r))).max() < 1e-15


def test_radial_vanishes_at_cutoff():
    emb = RadialHarmonic(l_max=2, n_max=3, r_cut=1.5)
    phi = emb.embed(PointCloud([[1.5, 0, 0], [0, 3.0, 0]]))
    assert np.all(phi == 0)


def test_harmonics_unit_norm():
    emb = RadialHarmonic(l_max=3, n_max=1)
    Y = emb.harmonics(np.array([[0.3, -0.4, 0.5], [1.0, 2.0, -0.5]]))
    for l in range(4):
        assert np.abs(np.linalg.norm(Y[:, emb.layout.slice(l)], axis=1) - 1).max() < 1e-12


def test_species_channels():
    emb = RadialHarmonic(l_max=1, n_max=2, n_species=2)
    phi = emb.embed(PointCloud([[0.5, 0, 0, 1]]))
    assert np.all(phi[0, :2] == 0) and np.any(phi[0, 2:] != 0)
    with pytest.raises(InvalidArgumentError, match="species"):
        emb.embed(PointCloud([[0.5, 0, 0, 2]]))
    with pytest.raises(InvalidArgumentError):
        emb.embed(PointCloud([[0.5, 0, 0, 0.5]]))


def test_arity_mismatch():
    with pytest.raises(InvalidArgumentError):
        lorentz_vectors().embed(PointCloud([[1.0, 2.0, 3.0]]))
    with pytest.raises(InvalidArgumentError):
        RadialHarmonic().embed(PointCloud([[1.0, 2.0]]))


EMBEDDINGS = {
    "radial": lambda: RadialHarmonic(l_max=2, n_max=2, r_cut=3.0),
    "lorentz": lambda: lorentz_vectors((0, 1, 2)),
    "o3vec": lambda: o3_vectors((0, 1, 2)),
    "su2": lambda: su2_spinors((0, 1, 2)),
    "su3": lambda: sun_vectors(3, (0, 1, 2)),
}


def arity(emb):
    return getattr(emb, "raw_arity", 3)


@pytest.mark.parametrize("name", sorted(EMBEDDINGS))
def test_embedding_equivariance(name):
    emb = EMBEDDINGS[name]()
    rng = np.random.default_rng(1)
    cloud = random_cloud(rng, 5, arity(emb))
    phi = emb.embed(cloud)
    rep = emb.layout.rep
    for s in range(50):
        scale = 1.5 if name == "lorentz" else 2.0
        c, d = sample_group_params(rep.algebra.num_generators, rep.num_discrete, [7, s], scale)
        R = rep.element(c, d).matrix
        got = emb.embed(emb.transform(cloud, c, d))
        for i in range(len(emb.layout)):
            sl = emb.layout.slice(i)
            assert rel_residual(got[..., sl], (phi @ R.T)[..., sl]) < 1e-8


# --- pooling, mixing, products ---------------------------------------------------------

def test_pool_empty():
    emb = RadialHarmonic(l_max=1, n_max=2)
    A = pool_atomic_basis(emb.embed(PointCloud(np.zeros((0, 3)))))
    assert A.shape == (2, 4) and np.all(A == 0)


def test_pool_single_and_double():
    emb = RadialHarmonic(l_max=1, n_max=2)
    x = [[0.3, -0.2, 0.9]]
    one = emb.embed(PointCloud(x))
    assert np.array_equal(pool_atomic_basis(one), one[0])
    assert np.array_equal(pool_atomic_basis(emb.embed(PointCloud(x * 2))), 2 * one[0])


def test_pool_permutation_exact(rng):
    emb = RadialHarmonic(l_max=2, n_max=3, r_cut=3.0)
    cloud = random_cloud(rng, 7)
    A = pool_atomic_basis(embedded(emb, cloud))
    for _ in range(10):
        B = pool_atomic_basis(embedded(emb, cloud.permuted(rng.permutation(7))))
        assert np.array_equal(A, B)


def test_mix_channels():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(3, 5)) + 1j * rng.normal(size=(3, 5))
    assert np.array_equal(mix_channels(A, np.eye(3)), A)
    assert np.array_equal(mix_channels(A[:1], [[2.0]]), 2 * A[:1])
    with pytest.raises(InvalidArgumentError):
        mix_channels(A, np.eye(2))


def test_product_basis_small():
    A = np.array([[2.0, 3.0]])
    assert np.array_equal(product_basis(A, 1), A)
    assert np.array_equal(product_basis(A, 2), [[4.0, 6.0, 9.0]])
    with pytest.raises(InvalidArgumentError):
        product_basis(A, 0)


@given(st.integers(0, 4), st.integers(1, 3), st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_product_basis_equals_nested_sum(n_particles, nu, seed):
    """Pooled products match the explicit sum over particle tuples."""
    rng = np.random.default_rng(seed)
    emb = RadialHarmonic(l_max=1, n_max=2, r_cut=3.0)
    phi = embedded(emb, random_cloud(rng, n_particles))
    prods = product_basis(pool_atomic_basis(phi), nu)
    tuples = list(itertools.combinations_with_replacement(range(emb.layout.dim), nu))
    for c in range(emb.channels):
        for t, k in enumerate(tuples):
            ref = 0j
            for js in itertools.product(range(n_particles), repeat=nu):
                term = 1 + 0j
                for s in range(nu):
                    term *= phi[js[s], c, k[s]]
                ref += term
            assert abs(prods[c, t] - ref) < 1e-10


# --- symmetrized basis -------------------------------------------------------------------

def test_symmetrize_identity_coupling():
    layout_rep = irrep(O3_1)
    ct = CouplingTensor((layout_rep,), layout_rep, 1, True, np.eye(3)[None].astype(complex))
    A = np.array([[0.3 + 0.1j, -1.2, 0.5j]])
    B = symmetrize_basis({1: product_basis(A, 1)}, {(1, O3_1): ct}, [(1, O3_1)])
    assert np.array_equal(B.blocks[(1, O3_1)][:, 0, :], A)


def test_symmetrize_missing_table():
    with pytest.raises(ConfigurationError, match=r"nu=2, K=O3\(0,1\)"):
        symmetrize_basis({2: np.zeros((1, 6))}, {}, [(2, O3_0)])


def test_scalar_is_dot_product(rng):
    emb = o3_vectors(powers=(1,))
    tb = TraceBasis(emb.layout, 2, [O3_0])
    for _ in range(5):
        A = pool_atomic_basis(emb.embed(random_cloud(rng, 4)))
        B = tb(A).blocks[(2, O3_0)][0, 0, 0]
        ref = np.dot(A[0], A[0])
        ratio = B / ref
        if _ == 0:
            first = ratio
        assert abs(ratio - first) < 1e-12 and abs(ratio) > 0.1


@pytest.mark.parametrize("name,outputs", [
    ("radial", ["O3(0,1)", "O3(1,-1)", "O3(2,1)", "O3(1,1)"]),
    ("lorentz", ["SO13(0,0)", "SO13(1,1)", "SO13(2,2)"]),
    ("su2", ["SU2(0)", "SU2(1)", "SU2(2)"]),
    ("su3", ["SU(3)[0,0,0]", "SU(3)[1,0,0]", "SU(3)[2,1,0]"]),
])
def test_symmetrized_equivariance(name, outputs):
    small = {"radial": lambda: RadialHarmonic(l_max=1, n_max=2, r_cut=3.0),
             "lorentz": lambda: lorentz_vectors((0, 1)),
             "su2": lambda: su2_spinors((0, 1)),
             "su3": lambda: sun_vectors(3, (1,))}
    emb = small[name]()
    rng = np.random.default_rng(3)
    mix = rng.normal(size=(2, emb.channels))
    tb = TraceBasis(emb.layout, 2 if name == "su3" else 3, outputs, mix)
    cloud = random_cloud(rng, 4, arity(emb))
    F = tb(pool_atomic_basis(embedded(emb, cloud)))
    rep = emb.layout.rep
    for s in range(100):
        c, d = sample_group_params(rep.algebra.num_generators, rep.num_discrete, [11, s],
                                   1.5 if name == "lorentz" else 2.0)
        Fg = tb(pool_atomic_basis(embedded(emb, emb.transform(cloud, c, d))))
        for key, blk in F.blocks.items():
            R = irrep(key[1]).element(c, d).matrix
            assert rel_residual(Fg.blocks[key], blk @ R.T) < 1e-8


# --- linear model structure ---------------------------------------------------------------

def test_trace_with_unit_mix_equals_ace(rng):
    emb = o3_vectors((0, 1))
    ace = LinearModel(LinearConfig(emb, 3, mode="ace"))
    trace = LinearModel(LinearConfig(emb, 3, mode="trace"), mix=np.array([[1.0]]))
    for _ in range(5):
        cloud = random_cloud(rng, 5)
        fa, ft = ace.features(cloud), trace.features(cloud)
        for key in fa.blocks:
            assert np.array_equal(fa.blocks[key], ft.blocks[key])


def test_zero_particle_leaves_features_unchanged(rng):
    emb = RadialHarmonic(l_max=1, n_max=2, r_cut=1.0)
    model = LinearModel(LinearConfig(emb, 3, mode="trace", outputs=[O3_0, O3_1]))
    cloud = PointCloud(rng.uniform(-0.4, 0.4, size=(4, 3)))
    bigger = PointCloud(np.vstack([cloud.raw, [[0.0, 5.0, 0.0]], [[-0.1, -0.1, -9.0]]]))
    assert np.all(emb.embed(PointCloud([[0.0, 5.0, 0.0]])) == 0)
    fa, fb = model.features(cloud), model.features(bigger)
    for key in fa.blocks:
        assert np.array_equal(fa.blocks[key], fb.blocks[key])


def test_features_permutation_exact(rng):
    model = LinearModel(LinearConfig(lorentz_vectors((0, 1)), 3, mode="trace", channels=2))
    cloud = random_cloud(rng, 6, 4)
    a = model.design_row(cloud)
    for _ in range(5):
        assert np.array_equal(a, model.design_row(cloud.permuted(rng.permutation(6))))


# --- cloud files -------------------------------------------------------------------------

def test_cloud_formats_round_trip():
    cloud = PointCloud([[0.1, -2.5, 3e-17], [1.0, 2.0, 3.0]])
    assert np.array_equal(parse_cloud(cloud_to_json(cloud)).raw, cloud.raw)
    text = "# x y z\n0.1 -2.5 3e-17\n1 2 3\n"
    assert np.array_equal(parse_cloud(text).raw, cloud.raw)
    assert len(parse_cloud('{"particles": []}')) == 0
    assert len(parse_cloud("")) == 0


@pytest.mark.parametrize("text", ["1 2\n3", '{"particles": [{"x": 1}]}', "a b c", "1 nan 2"])
def test_cloud_malformed(text):
    with pytest.raises(InvalidArgumentError):
        parse_cloud(text)

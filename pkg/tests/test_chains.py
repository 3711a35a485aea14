import numpy as np
import pytest
from hypothesis import given, strategies as st

from bottchain import algebra as alg
from bottchain import chains as ch


# -- Clifford system -----------------------------------------------------------

def test_clifford_shapes_and_residuals(cliff1):
    assert len(cliff1.structures) == 8
    for s in cliff1.structures:
        assert s.matrix.shape == (16, 16)
        assert set(np.unique(s.matrix)) <= {-1.0, 0.0, 1.0}
        assert s.residual() == 0.0
    assert cliff1.max_residual() < 1e-12


def test_j1_is_signed_permutation_squaring_to_minus_identity(cliff1):
    J1 = cliff1.J(1)
    assert np.array_equal(J1 @ J1, -np.eye(16))
    assert np.all(np.count_nonzero(J1, axis=0) == 1)


@pytest.mark.parametrize("n", [1, 2])
def test_j1j2j3_flips_last_half_of_quaternionic_coordinates(n):
    cl = ch.make_clifford_system(n)
    D = cl.J(1) @ cl.J(2) @ cl.J(3)
    half = np.r_[np.ones(2 * n), -np.ones(2 * n)]
    assert np.array_equal(D, np.kron(np.eye(4), np.diag(half)))


def test_first_two_structures_are_right_multiplications(cliff1):
    assert np.array_equal(cliff1.J(1), alg.right_mult_operator(alg.QI, 4))
    assert np.array_equal(cliff1.J(2), alg.right_mult_operator(alg.QJ, 4))


@pytest.mark.parametrize("n", [2, 3])
def test_clifford_larger_n(n):
    assert ch.make_clifford_system(n).max_residual() < 1e-12


def test_clifford_rejects_bad_n():
    with pytest.raises(ValueError):
        ch.make_clifford_system(0)


# -- symmetries and poles ---------------------------------------------------------

def test_geodesic_symmetry_examples(rng):
    x, g = alg.haar_unitary(rng, 4), alg.haar_unitary(rng, 4)
    I = np.eye(4)
    assert np.allclose(ch.geodesic_symmetry(I, x), np.linalg.inv(x))
    assert np.allclose(ch.geodesic_symmetry(g, g), g)
    assert np.allclose(ch.geodesic_symmetry(-I, x), ch.geodesic_symmetry(I, x))
    with pytest.raises(ValueError):
        ch.geodesic_symmetry(I, np.eye(3))


def test_is_pole_examples():
    I4 = np.eye(4, dtype=complex)
    assert ch.is_pole(-I4, I4, "U")
    assert not ch.is_pole(1j * I4, I4, "U")
    assert not ch.is_pole(-np.eye(3), np.eye(3), "SO")
    assert not ch.is_pole(I4, I4, "U")


def test_pole_uniqueness_in_u(chains1):
    node = chains1["U"][1]
    passing = [z for z in (1, -1, 1j, -1j) if ch.is_pole(z * node.base, node.base, "U")]
    assert passing == [-1]


# -- chains ------------------------------------------------------------------------------

@pytest.mark.parametrize("kind", ["SO", "U", "Sp"])
def test_chain_node_invariants(kind, chains1):
    nodes = chains1[kind]
    assert [nd.k for nd in nodes] == list(range(9))
    for nd in nodes:
        assert np.array_equal(nd.pole, -nd.base)
        assert nd.membership(nd.base)
        assert ch.is_pole(nd.pole, nd.base, nd.ambient)
        assert nd.to_json()["chain"] == kind


def test_so_node1_contains_both_j1_and_minus_j1(chains1):
    node = chains1["SO"][1]
    assert node.membership(node.base) and node.membership(-node.base)


def test_u_node1_base_has_trace_zero_and_is_conjugate_to_a(chains1):
    J = chains1["U"][1].base
    assert abs(np.trace(J)) < 1e-12
    w = np.sort(np.linalg.eigvals(J).imag)
    assert np.allclose(w, np.r_[-np.ones(8), np.ones(8)])


@pytest.mark.parametrize("kind", ["SO", "U", "Sp"])
@pytest.mark.parametrize("k", range(2, 8))
def test_product_of_consecutive_structures_is_not_a_member(kind, k, chains1):
    nodes = chains1[kind]
    J = nodes[k + 1].base @ nodes[k].base
    assert not nodes[k].membership(J)


def test_product_squares_to_minus_identity_for_small_k(chains1):
    # J_1 and J_2 J_1 are complex structures, so the membership test
    # only fails from k = 2 on
    nodes = chains1["SO"]
    for k in (0, 1):
        J = nodes[k + 1].base @ nodes[k].base
        assert np.max(np.abs(J @ J + np.eye(16))) < 1e-12


def test_build_chain_rejects(cliff1):
    with pytest.raises(ValueError):
        ch.build_chain("GL", 1)
    broken = list(cliff1.structures)
    broken[1] = broken[0]
    with pytest.raises(ValueError):
        ch.build_chain("SO", 1, ch.CliffordSystem(1, tuple(broken)))


def test_membership_rejects_wrong_shape(chains1):
    assert not chains1["SO"][2].membership(np.eye(4))


def test_u_node1_trace_zero_is_top_dimensional():
    # orbit of diag(i I_a, -i I_b) under U_16 has dimension 2ab
    rng = np.random.default_rng(0)
    dims = {}
    for a in range(1, 16):
        J = np.diag(np.r_[np.full(a, 1j), np.full(16 - a, -1j)])
        X = [alg.random_skew(rng, 16, "complex") for _ in range(300)]
        M = np.array([(x @ J - J @ x).ravel() for x in X])
        dims[a] = np.linalg.matrix_rank(np.hstack([M.real, M.imag]), tol=1e-8)
    assert max(dims, key=dims.get) == 8
    assert dims[8] == 2 * 8 * 8


# -- centrosomes and geodesics -----------------------------------------------------

def test_centrosome_examples():
    q = 4
    I = np.eye(2 * q, dtype=complex)
    A = alg.standard_complex_structure(q)
    assert ch.centrosome_membership(A, I, -I, "U") == "member_shortest"
    assert ch.centrosome_membership(I, I, -I, "U") == "not_member"
    eps = 0.1
    J = np.diag(np.r_[np.full(q, 1j * np.exp(1j * eps)), np.full(q, -1j)])
    assert ch.centrosome_membership(J, I, -I, "U") in ("member_nonshortest", "not_member")
    with pytest.raises(ValueError):
        ch.centrosome_membership(A, I, 1j * I, "U")


def test_random_complex_structures_are_members(rng):
    I = np.eye(8, dtype=complex)
    for _ in range(100):
        g = alg.haar_unitary(rng, 8)
        a = rng.integers(0, 9)
        J = g @ np.diag(np.r_[np.full(a, 1j), np.full(8 - a, -1j)]) @ g.conj().T
        assert np.max(np.abs(J @ J + I)) < 1e-11
        assert ch.centrosome_membership(J, I, -I, "U") == "member_shortest"


def test_midpoint_to_geodesic_endpoints():
    q = 3
    I = np.eye(2 * q, dtype=complex)
    A = alg.standard_complex_structure(q)
    seg = ch.midpoint_to_geodesic(A, I)
    assert np.array_equal(seg.at(0.0), I)
    assert np.max(np.abs(seg.at(1.0) + I)) < 1e-11
    assert np.max(np.abs(seg.at(0.5) - A)) < 1e-11
    assert np.isclose(seg.length(), np.pi * np.sqrt(2 * q))
    with pytest.raises(ValueError):
        ch.midpoint_to_geodesic(I, I)


@given(st.integers(0, 10_000))
def test_geodesic_round_trip_in_u_node(seed):
    nodes = ch.build_chain("U", 1)
    k = 3
    m = ch.sample_node_points(nodes[k + 1], 1, seed)[0]
    seg = ch.midpoint_to_geodesic(m, nodes[k].base, group="U")
    assert np.max(np.abs(seg.at(0.5) - m)) < 1e-11
    assert np.max(np.abs(seg.at(1.0) + nodes[k].base)) < 1e-10


def test_grassmannian_geodesic_midpoint():
    q = 8
    g = ch.grassmannian_geodesic(q)
    Z, I = np.zeros((q, q)), np.eye(q)
    assert np.max(np.abs(g(0.5) - np.block([[Z, I], [-I, Z]]))) < 1e-11
    assert np.max(np.abs(g(0.0) - alg.standard_complex_structure(q))) < 1e-12
    assert np.max(np.abs(g(1.0) + alg.standard_complex_structure(q))) < 1e-11


# -- sampling -----------------------------------------------------------------------

@pytest.mark.parametrize("kind", ["SO", "U", "Sp"])
def test_sampled_points_are_members(kind, chains1):
    for node in chains1[kind]:
        for J in ch.sample_node_points(node, 5, 7) + ch.sample_node_geodesic_points(node, 5, 7):
            assert node.membership(J, 1e-10)


def test_sampling_is_deterministic(chains1):
    node = chains1["Sp"][3]
    a = ch.sample_node_points(node, 3, 11)
    b = ch.sample_node_points(node, 3, 11)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


def test_pfaffian_constant_on_so_node1(chains1):
    node = chains1["SO"][1]
    signs = {alg.pfaffian_sign(J) for J in ch.sample_node_points(node, 100, 3)}
    assert signs == {node.tag_value}


@pytest.mark.parametrize("kind", ["SO", "U", "Sp"])
def test_negation_preserves_nodes(kind, chains1):
    for node in chains1[kind][:8]:
        for J in ch.sample_node_points(node, 3, 5):
            assert node.membership(-J)


def test_so_node8_is_a_point_at_n1(chains1):
    node = chains1["SO"][8]
    assert not node.membership(node.pole)
    for J in ch.sample_node_points(node, 3, 5):
        assert np.allclose(J, node.base)


def test_midpoints_anticommute_and_are_shortest(chains1):
    nodes = chains1["U"]
    for k in range(8):
        Jk = nodes[k].base
        for J in ch.sample_node_points(nodes[k + 1], 5, k):
            if k > 0:
                assert np.max(np.abs(J @ Jk + Jk @ J)) < 1e-10
            assert ch.centrosome_membership(J, Jk, -Jk, "U") == "member_shortest"


# -- distances -------------------------------------------------------------------------

@pytest.mark.parametrize("kind", ["SO", "U", "Sp"])
def test_distance_profile(kind, chains1):
    prof = ch.chain_distance_profile(chains1[kind])
    assert len(prof) == 9
    assert max(abs(p - 4 * np.pi) for p in prof) < 1e-9


def test_distance_profile_n2():
    prof = ch.chain_distance_profile(ch.build_chain("U", 2))
    assert max(abs(p - 4 * np.pi * np.sqrt(2)) for p in prof) < 1e-9


def test_distance_profile_rejects_malformed(chains1):
    with pytest.raises(ValueError):
        ch.chain_distance_profile(chains1["SO"][:5])

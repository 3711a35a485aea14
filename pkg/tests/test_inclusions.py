import numpy as np
import pytest

from bottchain import algebra as alg
from bottchain import chains as ch
from bottchain import inclusions as inc
from bottchain.algebra import QuatMatrix

R = 3


def _proj(g, r):
    D = np.diag(np.r_[np.ones(r), np.zeros(r)])
    return g @ D @ g.conj().T


def _antisym_unitary(rng, m):
    U = alg.haar_unitary(rng, m)
    return U @ alg.symplectic_form(m // 2) @ U.T


def sample_domain(tag, rng, r=R):
    """A valid random input for each registered inclusion."""
    if tag == "O_in_U":
        return alg.haar_orthogonal(rng, r, special=False)
    if tag == "OU_in_GrC":
        Q = alg.haar_orthogonal(rng, 2 * r)
        return Q @ alg.realify_complex(1j * np.eye(r)) @ Q.T
    if tag == "USp_in_U":
        m = 2 * r
        J0 = alg.realify_complex(1j * np.eye(m))
        # realify(N) composed with conjugation is the antilinear map x -> N conj(x)
        J = alg.realify_complex(_antisym_unitary(rng, m)) @ inc._conjugation_real(m)
        return (J, J0)
    if tag == "GrH_in_GrC":
        g = alg.complex_to_quat(alg.random_group_element(rng, "Sp", 4 * r), 1e-9)
        D = QuatMatrix(np.diag(np.r_[np.ones(r), np.zeros(r)]))
        return g @ D @ g.adjoint()
    if tag == "Sp_in_U":
        return alg.complex_to_quat(alg.random_group_element(rng, "Sp", 2 * r), 1e-9)
    if tag == "SpU_in_GrC":
        return _proj(alg.random_group_element(rng, "Sp", 2 * r), r)
    if tag == "UO_in_U":
        U = alg.haar_unitary(rng, r)
        return inc._conjugation_real(r) @ alg.realify_complex(U @ U.T)
    if tag == "GrR_in_GrC":
        return _proj(alg.haar_orthogonal(rng, 2 * r), r)
    if tag in ("U_in_Sp", "U_in_UO", "U_in_SO", "U_in_USp"):
        return alg.haar_unitary(rng, r)
    if tag in ("GrC_in_SpU", "GrC_in_GrR", "GrC_in_GrH"):
        return _proj(alg.haar_unitary(rng, 2 * r), r)
    if tag == "GrC_in_OU":
        U = alg.haar_unitary(rng, 2 * r)
        return U @ alg.standard_complex_structure(r) @ U.conj().T
    raise KeyError(tag)


def _flat(x):
    if isinstance(x, QuatMatrix):
        return alg.quat_to_complex(x).ravel()
    return np.asarray(x).ravel()


def test_registry_has_sixteen_tags():
    assert len(inc.REGISTRY) == 16
    assert set(inc.TABLE_SO_U[:8]) | set(inc.TABLE_U_SP[:8]) == set(inc.REGISTRY)
    assert len(inc.TABLE_SO_U) == len(inc.TABLE_U_SP) == 9


@pytest.mark.parametrize("tag", sorted(inc.REGISTRY))
def test_inclusion_preserves_predicates_and_is_injective(tag, rng):
    xs = [sample_domain(tag, rng) for _ in range(5)]
    ys = [inc.apply_inclusion(tag, x) for x in xs]
    imap = inc.get_inclusion(tag)
    for y in ys:
        assert imap.codomain_residual(y) < 1e-10
    for a in range(len(xs)):
        for b in range(a):
            if np.max(np.abs(_flat(xs[a]) - _flat(xs[b]))) > 1e-6:
                assert np.max(np.abs(_flat(ys[a]) - _flat(ys[b]))) > 1e-10


def test_u_in_usp_of_identity():
    r = 3
    Y = inc.apply_inclusion("U_in_USp", np.eye(r))
    Z = np.zeros((r, r))
    assert np.allclose(Y, np.block([[Z, -np.eye(r)], [np.eye(r), Z]]))
    A = alg.standard_complex_structure(r)
    assert np.allclose(Y @ Y, -np.eye(2 * r))
    assert np.allclose(A @ Y, -Y @ A)


def test_sp_in_u_of_j():
    Y = inc.apply_inclusion("Sp_in_U", QuatMatrix([[0]], [[1]]))
    assert np.allclose(Y, [[0, -1], [1, 0]])


def test_grr_in_grc_of_coordinate_line():
    Y = inc.apply_inclusion("GrR_in_GrC", np.diag([1.0, 0.0]))
    assert np.iscomplexobj(Y) and np.allclose(Y, np.diag([1, 0]))


def test_apply_inclusion_errors():
    with pytest.raises(ValueError):
        inc.apply_inclusion("O_in_U", 2 * np.eye(3))
    with pytest.raises(ValueError):
        inc.apply_inclusion("O_in_U", 1j * np.eye(3))
    with pytest.raises(ValueError):
        inc.apply_inclusion("OU_in_GrC", np.eye(4, dtype=complex))
    with pytest.raises(ValueError):
        inc.get_inclusion("nope")


def test_sp_in_u_after_u_in_sp_is_doubling(rng):
    for _ in range(50):
        A = alg.haar_unitary(rng, 3)
        Y = inc.apply_inclusion("Sp_in_U", inc.apply_inclusion("U_in_Sp", A))
        Z = np.zeros((3, 3))
        assert np.max(np.abs(Y - np.block([[A, Z], [Z, A.conj()]]))) < 1e-11


def test_ou_in_grc_matches_eigenspace(rng):
    for _ in range(10):
        J = sample_domain("OU_in_GrC", rng)
        w, V = np.linalg.eig(J.astype(complex))
        E = V[:, np.isclose(w, 1j)]
        Q, _ = np.linalg.qr(E)
        assert np.max(np.abs(inc.apply_inclusion("OU_in_GrC", J) - Q @ Q.conj().T)) < 1e-10


def test_grc_in_ou_lands_in_recorded_component(rng):
    s = inc.grc_in_ou_component(R)
    for _ in range(10):
        Y = inc.apply_inclusion("GrC_in_OU", sample_domain("GrC_in_OU", rng))
        assert alg.pfaffian_sign(Y) == s


# -- involutions -------------------------------------------------------------------

@pytest.mark.parametrize("inv", [inc.TAU, inc.TAU_BAR])
def test_involutions_are_involutive(inv, rng):
    for _ in range(100):
        X = alg.haar_unitary(rng, 6)
        assert np.max(np.abs(inc.apply_involution(inv, inc.apply_involution(inv, X)) - X)) < 1e-12


def test_custom_involution(rng):
    A = alg.symplectic_form(2)
    c = inc.Involution("custom_c", A)
    X = alg.random_group_element(rng, "Sp", 4)
    assert np.allclose(inc.apply_involution(c, X), A @ X.conj() @ np.linalg.inv(A))
    with pytest.raises(ValueError):
        inc.apply_involution(inc.Involution("bogus"), X)


def test_involution_examples(rng):
    Q = alg.haar_orthogonal(rng, 4)
    assert np.array_equal(inc.apply_involution(inc.TAU, Q), Q)
    a = alg.haar_unitary(rng, 3)
    D = np.block([[a, np.zeros((3, 3))], [np.zeros((3, 3)), a.conj()]])
    assert np.allclose(inc.apply_involution(inc.TAU_BAR, D), D)
    A = alg.standard_complex_structure(3)
    assert np.array_equal(inc.apply_involution(inc.TAU, A), -A)


def test_tau_preserves_u_chain_nodes(chains1):
    for node in chains1["U"]:
        for J in ch.sample_node_points(node, 3, 1):
            assert node.membership(inc.apply_involution(inc.TAU, J))


# -- fixed points and squares -----------------------------------------------------

@pytest.mark.parametrize("pair", [("SO", "U"), ("U", "Sp")])
@pytest.mark.parametrize("k", range(9))
def test_fixed_point_node(pair, k):
    rep = inc.verify_fixed_point_node(k, pair, samples=10, seed=k)
    assert rep["status"] == "pass", rep
    assert rep["inclusion_tag"] == inc._table(pair)[k]


def test_fixed_point_k0_real_samples_are_exactly_fixed(chains1):
    for x in ch.sample_node_points(chains1["SO"][0], 10, 1):
        y = x.astype(complex)
        assert np.array_equal(inc.apply_involution(inc.TAU, y), y)
    rep = inc.verify_fixed_point_node(0, ("SO", "U"), samples=10, seed=1)
    assert rep["residual_forward"] < 1e-14


def test_fixed_point_rejects_k():
    with pytest.raises(ValueError):
        inc.verify_fixed_point_node(9, ("SO", "U"), samples=1)
    with pytest.raises(ValueError):
        inc.verify_fixed_point_node(1, ("SO", "Sp"), samples=1)


def test_fixed_point_detects_wrong_involution():
    # conjugation does not fix the symplectic images of U
    setup = inc._pair_setup(("U", "Sp"), 1)
    rep = inc.verify_fixed_point_node(2, ("U", "Sp"), samples=5,
                                      _chains=(setup[0], setup[1], inc.TAU) + setup[3:])
    assert rep["status"] == "fail" and rep["witness"] is not None


@pytest.mark.parametrize("pair", [("SO", "U"), ("U", "Sp")])
@pytest.mark.parametrize("k", range(8))
def test_square_commutes(pair, k):
    rep = inc.verify_square_commutes(k, pair, samples=3, seed=k)
    assert rep["status"] == "pass", rep
    assert rep["max_residual"] < 1e-9


def test_square_k0_with_j1(chains1):
    small, big = chains1["SO"], chains1["U"]
    m = small[1].base
    g_s = ch.midpoint_to_geodesic(m, small[0].base, group="SO")
    g_b = ch.midpoint_to_geodesic(m.astype(complex), big[0].base, group="U")
    for t in inc.TIMES:
        assert np.max(np.abs(g_s.at(t) - g_b.at(t))) < 1e-10
    assert np.max(np.abs(g_b.at(0.5) - m)) < 1e-12


def test_square_rejects_k():
    with pytest.raises(ValueError):
        inc.verify_square_commutes(8, ("SO", "U"))


# -- metric scales -------------------------------------------------------------------

def test_grassmann_ratio():
    assert abs(inc.metric_pullback_scale(inc.grassmann_embedding(4)) - 2) < 1e-6


@pytest.mark.parametrize("tag,ratio", [("O_in_U", 1), ("Sp_in_U", 2), ("U_in_Sp", 1), ("U_in_SO", 2)])
def test_registry_ratios(tag, ratio):
    assert abs(inc.metric_pullback_scale(inc.inclusion_embedding(tag, 4)) - ratio) < 1e-9


def test_group_embedding_rejects_non_group_maps():
    with pytest.raises(ValueError):
        inc.inclusion_embedding("UO_in_U", 3)
    with pytest.raises(ValueError):
        inc.inclusion_embedding("GrC_in_GrR", 3)


def test_non_homothety_detected():
    def fn(A):
        return np.block([[A, np.zeros((2, 1))], [np.zeros((1, 2)), np.linalg.det(A) * np.eye(1)]])
    emb = inc.Embedding("twisted", fn, "U", 2, alg.STANDARD, alg.STANDARD)
    with pytest.raises(ValueError):
        inc.metric_pullback_scale(emb)


@pytest.mark.parametrize("which,n", [("P4", 1), ("P4", 2), ("P8", 2), ("P8_tilde", 1), ("P4_pair", 1)])
def test_normal_form_ratios(which, n):
    emb = {"P4": lambda: inc.p4_embedding(n),
           "P8": lambda: inc.p8_embedding(n)[0],
           "P8_tilde": lambda: inc.p8_tilde_embedding(n)[0],
           "P4_pair": lambda: inc.p4_pair_embedding(n)}[which]()
    ratio = inc.metric_pullback_scale(emb, tangents=20)
    assert abs(ratio - inc.EXPECTED_RATIO[which]) / inc.EXPECTED_RATIO[which] < 1e-4


# -- normal forms ------------------------------------------------------------------

@pytest.mark.parametrize("which", inc.NORMAL_FORMS)
@pytest.mark.parametrize("n", [1, 2])
def test_normal_forms(which, n):
    rep = inc.verify_isometry_normal_form(which, n=n, samples=10, seed=3)
    assert rep["status"] == "pass", rep


def test_p4_embedding_lands_in_node4(rng, chains1):
    emb = inc.p4_embedding(1)
    node = chains1["SO"][4]
    for _ in range(5):
        J = emb.fn(alg.random_group_element(rng, "Sp", 4))
        assert node.membership(J)


def test_p8_identity_block_is_base():
    chain = inc.make_sp2n_chain(2)
    _, to_sp = inc.p8_embedding(2)
    assert np.allclose(to_sp(np.eye(2)), chain.J8)
    res, D = inc.p8_block_residual(chain.J8, chain)
    assert res < 1e-12 and np.allclose(D, np.eye(2))


def test_sp2n_structures_anticommute():
    chain = inc.make_sp2n_chain(2)
    S = chain.structures() + [chain.J8]
    for a in range(4):
        assert np.allclose(S[a] @ S[a], -np.eye(8))
        for b in range(a):
            assert np.allclose(S[a] @ S[b] + S[b] @ S[a], 0)


def test_p8_tilde_real_points_give_special_orthogonal_blocks():
    cl = ch.make_clifford_system(2)
    _, frame = inc.p8_tilde_embedding(2, cl)
    node = ch.build_chain("SO", 2, cl)[8]
    for J in ch.sample_node_points(node, 5, 2):
        res, D = inc.p8_tilde_residual(J.astype(complex), frame)
        assert res < 1e-10
        assert np.max(np.abs(D.imag)) < 1e-10 and abs(np.linalg.det(D) - 1) < 1e-10


def test_p8_tilde_image_in_u_node8(rng, chains1):
    emb, _ = inc.p8_tilde_embedding(1)
    node = chains1["U"][8]
    J = emb.fn(alg.haar_unitary(rng, 1))
    assert node.membership(J)


def test_normal_form_rejects_unknown():
    with pytest.raises(ValueError):
        inc.verify_isometry_normal_form("P2")


def test_report_keys():
    rep = inc.verify_isometry_normal_form("P4", samples=2)
    for key in ("check", "inclusion_tag", "n", "samples", "max_residual", "metric_ratio",
                "status", "paper_ref"):
        assert key in rep

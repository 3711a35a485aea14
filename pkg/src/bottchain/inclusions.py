"""Standard inclusions between the chains, involutions and normal forms.

Three groups of tools live here:

* a registry of the sixteen standard inclusions between classical
  symmetric spaces, each acting on an explicit matrix representation;
* the involutions ``tau(X) = conj(X)`` on ``U_{16n}`` and
  ``tau_bar(X) = A X A^{-1}`` on ``Sp_{16n}`` together with sampled
  checks that node ``k`` of the smaller chain is the base component of
  the fixed set of the involution on node ``k`` of the bigger chain;
* block normal forms identifying ``P_4`` with ``Sp_{2n}``, ``P_8`` with
  ``SO_n`` and the U-chain node 8 with ``U_n``, and the metric scale
  factors of these identifications.

Grassmannians are carried as Hermitian projections, orthogonal complex
structures as real matrices with ``J^2 = -I`` and real forms ``U_r/O_r``
as real ``2r x 2r`` matrices of the antilinear involutions
``x -> conj(N x)`` (complex conjugation ``B_0`` composed with a unitary).
"""
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .algebra import (
    DEFAULT_TOL, MetricSpec, QuatMatrix, STANDARD, SYMPLECTIC_HALF, complex_to_quat,
    complexify_real, exp_skew, group_residual, left_quat_rep, matrix_to_json,
    pfaffian_sign, project_sp, quat_to_complex, quat_to_real, real_to_quat,
    realify_complex, random_skew, standard_complex_structure, structure_to_projection,
    symplectic_form,
)
from .chains import (
    build_chain, centrosome_membership, make_clifford_system, midpoint_to_geodesic,
    sample_node_geodesic_points, sample_node_points, sp_embed,
    _joint_plus_space, _product,
)


def _maxabs(M):
    return float(np.max(np.abs(M), initial=0.0))


# ---------------------------------------------------------------------------
# involutions


@dataclass(frozen=True)
class Involution:
    """``tau_conjugation``: ``X -> conj(X)``; ``tau_bar_Ar``: ``X -> A_r X A_r^{-1}``;
    ``custom_c``: ``X -> A conj(X) A^{-1}`` for a given unitary ``A``.
    """

    kind: str
    param: np.ndarray = None

    def matrix_for(self, N):
        if self.param is not None:
            return self.param
        return standard_complex_structure(N // 2)


TAU = Involution("tau_conjugation")
TAU_BAR = Involution("tau_bar_Ar")


def apply_involution(inv, x):
    x = np.asarray(x)
    if inv.kind == "tau_conjugation":
        return x.conj()
    A = inv.matrix_for(x.shape[0])
    if inv.kind == "tau_bar_Ar":
        return A @ x @ A.conj().T
    if inv.kind == "custom_c":
        return A @ x.conj() @ np.linalg.inv(A)
    raise ValueError(f"unknown involution {inv.kind!r}")


def _lie_fixed_projection(inv):
    """Projection of Lie algebra elements onto the fixed vectors of ``inv``."""
    return lambda X: (X + apply_involution(inv, X)) / 2


# ---------------------------------------------------------------------------
# representation predicates (each returns a residual)


def _projection_residual(P, rank):
    P = np.asarray(P)
    return max(_maxabs(P - P.conj().T), _maxabs(P @ P - P), abs(np.trace(P).real - rank))


def _orth_structure_residual(J):
    J = np.asarray(J)
    if np.iscomplexobj(J):
        raise ValueError("orthogonal complex structure must be real")
    N = J.shape[0]
    return max(group_residual(J, "O"), _maxabs(J @ J + np.eye(N)))


def _unitary_structure_residual(J, trace=None):
    J = np.asarray(J, dtype=complex)
    N = J.shape[0]
    res = max(group_residual(J, "U"), _maxabs(J @ J + np.eye(N)))
    if trace is not None:
        res = max(res, abs(np.trace(J) - trace))
    return res


def _quat_structure(r):
    """``R_j`` on ``C^{2r} = H^r`` is ``x -> Omega conj(x)``; returns ``Omega``."""
    return quat_to_complex(QuatMatrix(np.zeros((r, r)), np.eye(r)))


def _complex_form_residual(P):
    """Projection onto a complex form ``V`` of ``H^r``: ``R_j V = V^perp``."""
    P = np.asarray(P, dtype=complex)
    N = P.shape[0]
    Om = _quat_structure(N // 2)
    return max(_projection_residual(P, N // 2), _maxabs(Om @ P.conj() @ Om.conj().T - (np.eye(N) - P)))


def _real_form_residual(M):
    """Real matrix of an antilinear orthogonal involution of ``C^r = R^{2r}``."""
    M = np.asarray(M)
    if np.iscomplexobj(M):
        raise ValueError("real form must be given as a real matrix")
    N = M.shape[0]
    Ji = realify_complex(1j * np.eye(N // 2))
    return max(group_residual(M, "O"), _maxabs(M @ M - np.eye(N)), _maxabs(M @ Ji + Ji @ M))


def _conjugation_real(r):
    """Real matrix of complex conjugation ``B_0`` on ``C^r``."""
    return np.diag(np.r_[np.ones(r), -np.ones(r)])


def complex_basis(J0):
    """Real ``X`` with ``[X, J0 X]`` an orthonormal basis, built greedily.

    Then ``F = (X - i J0 X)/sqrt(2)`` is an orthonormal basis of the
    ``+i`` eigenspace of ``J0``.
    """
    N = J0.shape[0]
    cols = []
    for m in range(N):
        e = np.zeros(N)
        e[m] = 1.0
        for c in cols:
            e = e - c * (c @ e) - (J0 @ c) * ((J0 @ c) @ e)
        nrm = np.linalg.norm(e)
        if nrm > 1e-8:
            cols.append(e / nrm)
        if len(cols) == N // 2:
            break
    return np.array(cols).T


# ---------------------------------------------------------------------------
# the sixteen maps


def _o_in_u(A):
    return complexify_real(np.asarray(A, dtype=float))


def _ou_in_grc(J):
    return structure_to_projection(complexify_real(np.asarray(J, dtype=float)))


def _usp_in_u(pair):
    J, J0 = pair
    X = complex_basis(J0)
    F = (X - 1j * J0 @ X) / np.sqrt(2)
    # conj(F) is an orthonormal basis of V-, and J maps V+ onto V-
    return F.T @ complexify_real(J) @ F


def _grh_in_grc(P):
    return quat_to_complex(P)


def _sp_in_u(A):
    return quat_to_complex(A)


def _spu_in_grc(P):
    return np.asarray(P, dtype=complex).copy()


def _uo_in_u(M):
    r = M.shape[0] // 2
    R = _conjugation_real(r) @ M
    return R[:r, :r] + 1j * R[r:, :r]


def _grr_in_grc(P):
    return complexify_real(np.asarray(P, dtype=float))


def _u_in_sp(A):
    return left_quat_rep(A)


def _grc_in_spu(P):
    P = np.asarray(P, dtype=complex)
    N = P.shape[0]
    Z = np.zeros((N, N))
    return np.block([[P, Z], [Z, (np.eye(N) - P).conj()]])


def _u_in_uo(A):
    A = np.asarray(A, dtype=complex)
    r = A.shape[0]
    Z = np.zeros((r, r))
    N = np.block([[Z, A.T], [A, Z]])
    return _conjugation_real(2 * r) @ realify_complex(N)


def _grc_in_grr(P):
    return realify_complex(P)


def _u_in_so(A):
    return realify_complex(A)


def _grc_in_ou(J):
    return realify_complex(J)


def _u_in_usp(X):
    X = np.asarray(X, dtype=complex)
    r = X.shape[0]
    return np.block([[np.zeros((r, r)), -X.conj().T], [X, np.zeros((r, r))]])


def _grc_in_grh(P):
    return QuatMatrix(np.asarray(P, dtype=complex))


@dataclass(frozen=True)
class InclusionMap:
    """A registered inclusion with its representation predicates.

    ``domain_residual`` and ``codomain_residual`` return the defect of the
    respective representation predicate; ``apply`` is the map itself.
    """

    tag: str
    domain: str
    codomain: str
    apply: object
    domain_residual: object
    codomain_residual: object
    description: str = ""


def _usp_domain(pair):
    J, J0 = pair
    return max(_orth_structure_residual(J), _orth_structure_residual(J0), _maxabs(J @ J0 + J0 @ J))


def _grh_domain(P):
    r2 = P.shape[0]
    return _projection_residual(quat_to_complex(P), r2)


def _grc_rank_half(P):
    return _projection_residual(P, P.shape[0] // 2)


REGISTRY = {
    "O_in_U": InclusionMap(
        "O_in_U", "O_r", "U_r", _o_in_u,
        lambda A: group_residual(A, "O"), lambda A: group_residual(A, "U"),
        "complex-linear extension of an orthogonal map"),
    "OU_in_GrC": InclusionMap(
        "OU_in_GrC", "O_2r/U_r", "G_r(C^2r)", _ou_in_grc,
        _orth_structure_residual, _grc_rank_half,
        "orthogonal complex structure to its +i eigenspace"),
    "USp_in_U": InclusionMap(
        "USp_in_U", "U_2r/Sp_r", "U_2r", _usp_in_u,
        _usp_domain, lambda A: group_residual(A, "U"),
        "structure anticommuting with J0 restricted to V+ -> V-"),
    "GrH_in_GrC": InclusionMap(
        "GrH_in_GrC", "G_r(H^2r)", "G_2r(C^4r)", _grh_in_grc,
        _grh_domain, _grc_rank_half,
        "quaternionic subspace regarded as a complex subspace"),
    "Sp_in_U": InclusionMap(
        "Sp_in_U", "Sp_r", "U_2r", _sp_in_u,
        lambda A: group_residual(A, "Sp"), lambda A: group_residual(A, "U"),
        "quaternion-linear isometry regarded as complex-linear"),
    "SpU_in_GrC": InclusionMap(
        "SpU_in_GrC", "Sp_r/U_r", "G_r(C^2r)", _spu_in_grc,
        _complex_form_residual, _grc_rank_half,
        "complex form of H^r regarded as a complex subspace"),
    "UO_in_U": InclusionMap(
        "UO_in_U", "U_r/O_r", "U_r", _uo_in_u,
        _real_form_residual, lambda A: group_residual(A, "U"),
        "real form B_0 A to A"),
    "GrR_in_GrC": InclusionMap(
        "GrR_in_GrC", "G_r(R^2r)", "G_r(C^2r)", _grr_in_grc,
        lambda P: _projection_residual(P, P.shape[0] // 2) if not np.iscomplexobj(P) else np.inf,
        _grc_rank_half, "V to V (x) C"),
    "U_in_Sp": InclusionMap(
        "U_in_Sp", "U_r", "Sp_r", _u_in_sp,
        lambda A: group_residual(A, "U"), lambda A: group_residual(A, "Sp"),
        "A to A^h(v + jw) = Av + j conj(A) w"),
    "GrC_in_SpU": InclusionMap(
        "GrC_in_SpU", "G_r(C^2r)", "Sp_2r/U_2r", _grc_in_spu,
        _grc_rank_half, _complex_form_residual, "V to V + R_j V^perp"),
    "U_in_UO": InclusionMap(
        "U_in_UO", "U_r", "U_2r/O_2r", _u_in_uo,
        lambda A: group_residual(A, "U"), _real_form_residual, "A to {v + R_j A v}"),
    "GrC_in_GrR": InclusionMap(
        "GrC_in_GrR", "G_r(C^2r)", "G_2r(R^4r)", _grc_in_grr,
        _grc_rank_half, lambda P: _projection_residual(P, P.shape[0] // 2),
        "complex subspace viewed as a real subspace"),
    "U_in_SO": InclusionMap(
        "U_in_SO", "U_r", "SO_2r", _u_in_so,
        lambda A: group_residual(A, "U"), lambda A: group_residual(A, "SO"),
        "realification"),
    "GrC_in_OU": InclusionMap(
        "GrC_in_OU", "G_r(C^2r)", "SO_4r/U_2r", _grc_in_ou,
        lambda J: _unitary_structure_residual(J, 0.0),
        lambda J: max(_orth_structure_residual(J), group_residual(J, "SO")),
        "unitary complex structure realified"),
    "U_in_USp": InclusionMap(
        "U_in_USp", "U_r", "U_2r/Sp_r", _u_in_usp,
        lambda A: group_residual(A, "U"),
        lambda A: max(_unitary_structure_residual(A),
                      _maxabs(standard_complex_structure(A.shape[0] // 2) @ A
                              + A @ standard_complex_structure(A.shape[0] // 2))),
        "X to [[0, -X^-1], [X, 0]]"),
    "GrC_in_GrH": InclusionMap(
        "GrC_in_GrH", "G_r(C^2r)", "G_r(H^2r)", _grc_in_grh,
        _grc_rank_half, _grh_domain, "V to V (x)_C H"),
}

# node k of the smaller chain sits in node k of the bigger one via these maps
TABLE_SO_U = ["O_in_U", "OU_in_GrC", "USp_in_U", "GrH_in_GrC", "Sp_in_U",
              "SpU_in_GrC", "UO_in_U", "GrR_in_GrC", "O_in_U"]
TABLE_U_SP = ["U_in_Sp", "GrC_in_SpU", "U_in_UO", "GrC_in_GrR", "U_in_SO",
              "GrC_in_OU", "U_in_USp", "GrC_in_GrH", "U_in_Sp"]


def _table(pair):
    return TABLE_SO_U if tuple(pair) == ("SO", "U") else TABLE_U_SP


def get_inclusion(tag):
    try:
        return REGISTRY[tag]
    except KeyError:
        raise ValueError(f"unknown inclusion {tag!r}") from None


def grc_in_ou_component(r):
    """Pfaffian sign of the image of ``A_r`` under ``GrC_in_OU``.

    The image of the connected Grassmannian lies in one of the two
    components of orthogonal complex structures on ``R^{4r}``; only this
    recorded sign is used, and images of sampled points must agree with it.
    """
    return pfaffian_sign(_grc_in_ou(standard_complex_structure(r)))


def apply_inclusion(imap, x, tol=DEFAULT_TOL):
    """Apply a registered inclusion, checking both representation predicates."""
    if isinstance(imap, str):
        imap = get_inclusion(imap)
    try:
        dres = imap.domain_residual(x)
    except (ValueError, AttributeError) as exc:
        raise ValueError(f"{imap.tag}: representation mismatch ({exc})") from None
    if dres > tol:
        raise ValueError(f"{imap.tag}: input violates the {imap.domain} predicate (residual {dres:.3g})")
    y = imap.apply(x)
    cres = imap.codomain_residual(y)
    if cres > tol:
        raise ValueError(f"{imap.tag}: output violates the {imap.codomain} predicate (residual {cres:.3g})")
    return y


# ---------------------------------------------------------------------------
# reports


PAPER_REF = {
    "fixed_point_node": "fixed point set of the involution on the bigger chain node",
    "square_commutes": "commuting squares of chain inclusions",
    "normal_form": "block normal forms and metric scale of chain nodes",
}


def _report(check, status, max_residual, witness=None, **extra):
    rep = {"check": check, "status": status, "max_residual": float(max_residual),
           "metric_ratio": None, "paper_ref": PAPER_REF[check]}
    if witness is not None:
        rep["witness"] = witness
    rep.update(extra)
    return rep


def _pair_setup(pair, n):
    cliff = make_clifford_system(n)
    if pair == ("SO", "U"):
        small, big = build_chain("SO", n, cliff), build_chain("U", n, cliff)
        return small, big, TAU, lambda x: np.asarray(x, dtype=complex), _restrict_tau
    if pair == ("U", "Sp"):
        small, big = build_chain("U", n, cliff), build_chain("Sp", n, cliff)
        return small, big, TAU_BAR, sp_embed, _restrict_tau_bar
    raise ValueError(f"unknown chain pair {pair!r}")


def _restrict_tau(x):
    """Real matrix underlying a tau-fixed point, and the defect of being real."""
    return x.real, _maxabs(x.imag)


def _restrict_tau_bar(x):
    """Block ``X`` of a tau_bar-fixed ``diag(X, conj(X))`` and the defect."""
    N = x.shape[0] // 2
    X = x[:N, :N]
    res = max(_maxabs(x[:N, N:]), _maxabs(x[N:, :N]), _maxabs(x[N:, N:] - X.conj()))
    return X, res


def _normalize_pair(pair):
    if isinstance(pair, str):
        pair = tuple(pair.replace("(", "").replace(")", "").replace(" ", "").split(","))
    return tuple(pair)


def verify_fixed_point_node(k, pair, samples=100, seed=0, tol=DEFAULT_TOL, n=1, _chains=None):
    """Sampled check that the small node ``k`` is the base component of the
    involution's fixed set in the big node ``k``.

    Forward: included samples of the small node are fixed and lie in the big
    node. Backward: points ``J_k exp(X)`` of the big node, with ``X`` a
    random fixed tangent vector, lie in the small node after restriction.
    """
    pair = _normalize_pair(pair)
    small, big, inv, include, restrict = _chains or _pair_setup(pair, n)
    if not 0 <= k <= 8:
        raise ValueError("k must be in 0..8")
    s_node, b_node = small[k], big[k]
    worst, witness = 0.0, None
    ok = True

    fwd = 0.0
    for x in sample_node_points(s_node, samples, seed):
        y = include(x)
        res = max(_maxabs(apply_involution(inv, y) - y), max(b_node.residuals(y).values()))
        member = b_node.membership(y, tol)
        fwd = max(fwd, res)
        if not member or res > tol:
            ok = False
            witness = witness or matrix_to_json(x)

    bwd = 0.0
    proj = _lie_fixed_projection(inv)
    for y in sample_node_geodesic_points(b_node, samples, seed, project=proj):
        x, rres = restrict(y)
        res = max(_maxabs(apply_involution(inv, y) - y), rres, max(s_node.residuals(x).values()))
        member = s_node.membership(x, tol)
        bwd = max(bwd, res)
        if not member or res > tol:
            ok = False
            witness = witness or matrix_to_json(y)
    worst = max(fwd, bwd)
    return _report("fixed_point_node", "pass" if ok else "fail", worst, witness,
                   inclusion_tag=_table(pair)[k], k=k, pair=list(pair), n=n, samples=samples,
                   residual_forward=fwd, residual_backward=bwd)


TIMES = (0.0, 0.25, 0.5, 0.75, 1.0)


def verify_square_commutes(k, pair, samples=25, seed=0, tol=1e-9, n=1, _chains=None):
    """Geodesics ``J_k -> -J_k`` through sampled midpoints agree in both chains.

    For each sampled ``m`` in small node ``k+1`` the geodesic with midpoint
    ``m`` is computed in the small ambient group and, independently, for the
    included data in the big ambient group; they are compared at
    ``t = 0, 1/4, 1/2, 3/4, 1``. The big geodesic must also stay in big
    node ``k``. A sample that is not a shortest midpoint in the big group
    is a counterexample and fails the check.
    """
    pair = _normalize_pair(pair)
    small, big, inv, include, restrict = _chains or _pair_setup(pair, n)
    if not 0 <= k <= 7:
        raise ValueError("k must be in 0..7")
    o_s = small[k].base
    o_b = include(o_s)
    worst, witness, ok, counter = 0.0, None, True, 0
    for m in sample_node_points(small[k + 1], samples, seed):
        mb = include(m)
        cls = centrosome_membership(mb, o_b, -o_b, big[k].ambient, tol=tol)
        if cls != "member_shortest":
            ok = False
            counter += 1
            witness = witness or matrix_to_json(m)
            continue
        g_s = midpoint_to_geodesic(m, o_s, tol, group=small[k].ambient)
        g_b = midpoint_to_geodesic(mb, o_b, tol, group=big[k].ambient)
        for t in TIMES:
            yb = g_b.at(t)
            dev = _maxabs(include(g_s.at(t)) - yb)
            if not big[k].membership(yb, tol):
                dev = max(dev, max(big[k].residuals(yb).values()), 1.0)
            worst = max(worst, dev)
            if dev > tol:
                ok = False
                witness = witness or matrix_to_json(m)
    return _report("square_commutes", "pass" if ok else "fail", worst, witness,
                   inclusion_tag=_table(pair)[k], k=k, pair=list(pair), n=n, samples=samples, counterexamples=counter)


# ---------------------------------------------------------------------------
# metric pullback


@dataclass(frozen=True)
class Embedding:
    """A map from a matrix group into an ambient matrix group.

    ``fn`` takes domain matrices in their working picture (real for SO,
    complex for U, complex ``2r x 2r`` for Sp) and returns ambient
    matrices. Both groups carry bi-invariant metrics.
    """

    name: str
    fn: object
    domain_group: str
    domain_dim: int
    domain_metric: MetricSpec
    codomain_metric: MetricSpec
    linear: bool = False


def _domain_tangent(rng, group, N):
    if group in ("SO", "O"):
        return random_skew(rng, N, "real")
    X = random_skew(rng, N, "complex")
    return project_sp(X) if group == "Sp" else X


def metric_pullback_scale(emb, base=None, tangents=20, seed=0, spread_tol=1e-4, h=1e-3,
                          return_ratios=False):
    """Ratio ``|d iota(X)|^2 / |X|^2`` over random unit tangents at ``base``.

    Linear maps use the exact differential ``iota(base X)``; otherwise a
    fourth-order central difference of ``t -> iota(base exp(tX))``.
    Raises ``ValueError`` if the ratios spread by more than ``spread_tol``
    (relative), i.e. the map is not a homothety.
    """
    N = emb.domain_dim
    if base is None:
        base = np.eye(N) if emb.domain_group == "SO" else np.eye(N, dtype=complex)
    y0 = emb.fn(base)
    y0inv = np.linalg.inv(y0)
    ratios = []
    for i in range(tangents):
        rng = np.random.default_rng([int(seed), i, 7])
        X = _domain_tangent(rng, emb.domain_group, N)
        X = X / np.sqrt(emb.domain_metric.inner(X, X))
        if emb.linear:
            dY = emb.fn(base @ X)
        else:
            def f(t):
                return emb.fn(base @ exp_skew(t * X))
            dY = (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h)
        V = y0inv @ dY
        ratios.append(emb.codomain_metric.inner(V, V))
    ratios = np.array(ratios)
    mean = float(np.mean(ratios))
    spread = float((ratios.max() - ratios.min()) / mean)
    if spread > spread_tol:
        raise ValueError(f"{emb.name}: not a homothety (relative spread {spread:.3g})")
    return (mean, ratios) if return_ratios else mean


def inclusion_embedding(tag, r):
    """Group-valued registry maps as :class:`Embedding` objects."""
    std = {"SO": STANDARD, "U": STANDARD, "Sp": SYMPLECTIC_HALF}
    if tag == "O_in_U":
        return Embedding(tag, _o_in_u, "SO", r, STANDARD, STANDARD, True)
    if tag == "Sp_in_U":
        return Embedding(tag, lambda C: C, "Sp", 2 * r, SYMPLECTIC_HALF, STANDARD, True)
    if tag == "U_in_Sp":
        return Embedding(tag, sp_embed, "U", r, STANDARD, std["Sp"], True)
    if tag == "U_in_SO":
        return Embedding(tag, realify_complex, "U", r, STANDARD, STANDARD, True)
    if tag == "UO_in_U":
        # U_r -> U_r/O_r ⊂ U_r, A -> A A^T is the usual model; not a subgroup map
        raise ValueError("UO_in_U is not a group embedding")
    raise ValueError(f"{tag} is not a group embedding")


# ---------------------------------------------------------------------------
# normal forms


def block_swap(r, field=float):
    """``B_r = [[0, I_r], [-I_r, 0]]``."""
    return symplectic_form(r).real.astype(field)


def _quat_block_diag(C, Dq):
    r1, r2 = C.shape[0], Dq.shape[0]
    Z = np.zeros((r1, r2))
    return QuatMatrix(np.block([[C.A, Z], [Z.T, Dq.A]]), np.block([[C.B, Z], [Z.T, Dq.B]]))


def _quat_blocks(M, r):
    A, B = M.A, M.B
    return [[QuatMatrix(A[:r, :r], B[:r, :r]), QuatMatrix(A[:r, r:], B[:r, r:])],
            [QuatMatrix(A[r:, :r], B[r:, :r]), QuatMatrix(A[r:, r:], B[r:, r:])]]


def _qmax(M):
    return max(_maxabs(M.A), _maxabs(M.B))


def p4_normal_form(J, cliff):
    """Quaternionic ``B_{2n} J_3 J`` split into 2x2 blocks of size ``2n``."""
    n = cliff.n
    M = real_to_quat(cliff.J(3) @ J, tol=1e-8)
    N = QuatMatrix(block_swap(2 * n)) @ M
    return _quat_blocks(N, 2 * n)


def p4_block_residual(J, cliff):
    (C, X12), (X21, C2) = p4_normal_form(J, cliff)
    r = C.shape[0]
    ident = C @ C2
    res = max(_qmax(X12), _qmax(X21), _maxabs(ident.A - np.eye(r)), _maxabs(ident.B),
              group_residual(C, "Sp"))
    return res, C


def p4_embedding(n, cliff=None):
    """``C in Sp_{2n} -> J_3^{-1} B_{2n}^{-1} diag(C, C^{-1})`` in ``SO_{16n}``."""
    cliff = cliff or make_clifford_system(n)
    J3inv = cliff.J(3).T
    Binv = quat_to_real(QuatMatrix(block_swap(2 * n).T))

    def fn(Cc):
        C = complex_to_quat(Cc, tol=1e-6)
        M = _quat_block_diag(C, C.adjoint())
        return J3inv @ Binv @ quat_to_real(M)

    return Embedding("P4", fn, "Sp", 4 * n, SYMPLECTIC_HALF, STANDARD)


@dataclass(frozen=True)
class Sp2nChain:
    """The structures ``J'_5, J'_6, J'_7`` and a base ``J'_8`` inside ``Sp_{2n}``.

    Matrices are in the complex ``4n x 4n`` picture.
    """

    n: int
    J5: np.ndarray
    J6: np.ndarray
    J7: np.ndarray
    J8: np.ndarray

    def structures(self):
        return [self.J5, self.J6, self.J7]

    def residuals(self, J):
        N = 4 * self.n
        return {"group": group_residual(J, "Sp"),
                "square": _maxabs(J @ J + np.eye(N)),
                "anticommute": max(_maxabs(J @ S + S @ J) for S in self.structures())}

    def membership(self, J, tol=DEFAULT_TOL):
        return max(self.residuals(J).values()) <= tol


def make_sp2n_chain(n):
    """``J'_5 = L_{-i}``, ``J'_6 = L_{-j}``, ``J'_7 = -k diag(I_n, -I_n)`` on ``H^{2n}``.

    The base point of the last node is ``J'_8 = [[0, -k I_n], [-k I_n, 0]]``,
    for which ``J'_7 J'_8 = [[0, -I_n], [I_n, 0]]`` (the block ``D = I``).
    """
    r = 2 * n
    I = np.eye(r)
    s = np.diag(np.r_[np.ones(n), -np.ones(n)])
    J5 = QuatMatrix(-1j * I)
    J6 = QuatMatrix(np.zeros((r, r)), -I)
    # -k = j(-i)... written as A + jB with B = c - di for c = 0, d = -1
    J7 = QuatMatrix(np.zeros((r, r)), 1j * s)
    Z = np.zeros((n, n))
    J8 = QuatMatrix(np.zeros((r, r)), np.block([[Z, 1j * np.eye(n)], [1j * np.eye(n), Z]]))
    return Sp2nChain(n, *(quat_to_complex(M) for M in (J5, J6, J7, J8)))


def sample_sp2n_p8(chain, count, seed):
    """Conjugates of ``J'_8`` by the identity component of its centralizer."""
    out = []
    N = 4 * chain.n
    for i in range(count):
        rng = np.random.default_rng([int(seed), i, 8])
        Y = project_sp(random_skew(rng, N, "complex"))
        for S in chain.structures():
            Y = (Y - S @ Y @ S) / 2
        g = exp_skew(Y)
        out.append(g @ chain.J8 @ g.conj().T)
    return out


def p8_block_residual(J, chain):
    """Residual of ``B_n J'_7 J' = diag(D, D^{-1})`` with ``D in SO_n``."""
    n = chain.n
    Nq = complex_to_quat(quat_to_complex(QuatMatrix(block_swap(n))) @ chain.J7 @ J, tol=1e-8)
    (D, X12), (X21, D2) = _quat_blocks(Nq, n)
    Dr = D.A.real
    res = max(_qmax(X12), _qmax(X21), _maxabs(D.A.imag), _maxabs(D.B),
              _maxabs(Dr @ D2.A - np.eye(n)), _maxabs(D2.B),
              group_residual(Dr, "SO"))
    return res, Dr


def p8_embedding(n, cliff=None):
    """``D in SO_n -> diag(D, D^{-1})`` in ``Sp_{2n}``, carried into ``SO_{16n}``.

    The point of the ``Sp_{2n}`` chain is ``J' = J'_7^{-1} B_n^{-1} diag(D, D^{-1})``
    and it is mapped into ``P_4`` with :func:`p4_embedding`.
    """
    chain = make_sp2n_chain(n)
    p4 = p4_embedding(n, cliff)
    J7inv = chain.J7.conj().T
    Binv = quat_to_complex(QuatMatrix(block_swap(n).T))

    def to_sp(D):
        Z = np.zeros((n, n))
        M = np.block([[D, Z], [Z, D.T]])
        return J7inv @ Binv @ quat_to_complex(QuatMatrix(M))

    return Embedding("P8", lambda D: p4.fn(to_sp(D)), "SO", n, STANDARD, STANDARD), to_sp


def _monomial(structs, S, N):
    return _product([structs[a] for a in S], N) if S else np.eye(N)


@dataclass(frozen=True)
class MultiplicityFrame:
    """Frame identifying the centralizer of ``J_1..J_7`` with ``U_n x U_n``.

    ``V`` is a real orthonormal basis of the common +1 eigenspace of
    ``J_1J_2J_3J_4``, ``J_1J_2J_5J_6``, ``J_1J_3J_5J_7`` and ``J_1...J_7``;
    ``monomials`` are eight even products ``m`` with the ``mV`` mutually
    orthogonal, and ``J8`` swaps the two isotypic halves.
    """

    V: np.ndarray
    monomials: tuple
    J8: np.ndarray

    def block_operator(self, Dp, Dm):
        """Operator acting as ``Dp`` on ``S+ (x) C^n`` and ``Dm`` on ``S- (x) C^n``."""
        V, J8 = self.V, self.J8
        G = 0
        for m in self.monomials:
            A = m @ V
            Bm = J8 @ m @ V
            G = G + A @ Dp @ A.T + Bm @ Dm @ Bm.T
        return G

    def blocks(self, g):
        V, J8 = self.V, self.J8
        return V.T @ g @ V, (J8 @ V).T @ g @ (J8 @ V)


def multiplicity_frame(cliff):
    Js = [cliff.J(a) for a in range(1, 9)]
    N = Js[0].shape[0]
    invs = [_monomial(Js, S, N) for S in ((0, 1, 2, 3), (0, 1, 4, 5), (0, 2, 4, 6))]
    invs.append(_monomial(Js, tuple(range(7)), N))
    for H in invs:
        assert np.allclose(H, H.T) and np.allclose(H @ H, np.eye(N))
    V = _joint_plus_space([H.astype(complex) for H in invs], N).real
    # eigh returns a complex basis; rebuild a real orthonormal one
    P = V @ V.T
    w, U = np.linalg.eigh((P + P.T) / 2)
    V = U[:, w > 0.5]
    chosen, images = [], []
    for size in range(0, 8, 2):
        for S in combinations(range(7), size):
            m = _monomial(Js, S, N).real
            img = m @ V
            if all(_maxabs(img.T @ other) < 1e-9 for other in images):
                chosen.append(m)
                images.append(img)
            if len(chosen) == 8:
                return MultiplicityFrame(V, tuple(chosen), Js[7])
    raise ValueError("could not complete the multiplicity frame")


def p8_tilde_embedding(n, cliff=None):
    """``D in U_n -> J_8 G(D, D^{-1})`` in ``U_{16n}``."""
    cliff = cliff or make_clifford_system(n)
    frame = multiplicity_frame(cliff)

    def fn(D):
        D = np.asarray(D, dtype=complex)
        return frame.J8 @ frame.block_operator(D, D.conj().T)

    return Embedding("P8_tilde", fn, "U", n, STANDARD, STANDARD), frame


def p8_tilde_residual(J, frame):
    """Defect of ``-J_8 J = G(D, D^{-1})`` with ``D`` unitary; returns ``D``."""
    g = -frame.J8 @ J
    Dp, Dm = frame.blocks(g)
    n = Dp.shape[0]
    res = max(_maxabs(g - frame.block_operator(Dp, Dm)), _maxabs(Dp @ Dm - np.eye(n)),
              group_residual(Dp.astype(complex), "U"))
    return res, Dp


def grassmann_embedding(q):
    """``C in U_q -> [[0, -C^{-1}], [C, 0]]``, the centriole of ``G_q(C^{2q})``."""
    def fn(C):
        C = np.asarray(C, dtype=complex)
        Z = np.zeros((q, q))
        return np.block([[Z, -np.linalg.inv(C)], [C, Z]])

    return Embedding("grassmann", fn, "U", q, STANDARD, STANDARD)


def _full_quat_basis(n):
    """Unitary ``[F, R_j F]`` splitting ``C^{16n}`` for the centralizer of ``R_i, R_j``.

    ``F`` is the basis of the ``+i`` eigenspace of ``R_i`` matching the
    complex coordinates ``(v, w)`` of ``q = v + jw``, so a quaternionic
    matrix ``M`` acts on ``F`` through ``quat_to_complex(M)``.
    """
    from .algebra import QI, QJ, right_mult_operator
    r = 4 * n
    Ri = right_mult_operator(QI, r)
    Rj = right_mult_operator(QJ, r)
    X = np.zeros((4 * r, 2 * r))
    for l in range(r):
        X[l, l] = 1.0                # q = e_l, the v coordinates
        X[2 * r + l, r + l] = 1.0    # q = j e_l, the w coordinates
    F = (X - 1j * Ri @ X) / np.sqrt(2)
    return np.hstack([F, Rj @ F])


def _p4_pair_perm(n):
    """Reorder ``(v, w)`` so the first ``2n`` quaternionic coordinates come first."""
    r = 4 * n
    h = 2 * n
    idx = list(range(h)) + list(range(r, r + h)) + list(range(h, r)) + list(range(r + h, 2 * r))
    return np.array(idx)


def p4_pair_residual(J, cliff):
    """Complex normal form of the U-chain node 4: ``B J_3 J = diag(C, C^{-1})``, ``C in U_{4n}``."""
    n = cliff.n
    W = _full_quat_basis(n)
    M = W.conj().T @ (cliff.J(3) @ J) @ W
    h = 8 * n
    X = M[:h, :h]
    res = max(_maxabs(M[:h, h:]), _maxabs(M[h:, :h]), _maxabs(M[h:, h:] - X))
    p = _p4_pair_perm(n)
    Xp = X[np.ix_(p, p)]
    B = block_swap(4 * n)
    N = B @ Xp
    q = 4 * n
    C = N[:q, :q]
    res = max(res, _maxabs(N[:q, q:]), _maxabs(N[q:, :q]), _maxabs(C @ N[q:, q:] - np.eye(q)),
              group_residual(C, "U"))
    return res, C


def p4_pair_embedding(n, cliff=None):
    """``C in U_{4n}`` to the U-chain node 4 by inverting :func:`p4_pair_residual`."""
    cliff = cliff or make_clifford_system(n)
    W = _full_quat_basis(n)
    p = _p4_pair_perm(n)
    inv_p = np.argsort(p)
    B = block_swap(4 * n)
    J3inv = cliff.J(3).T
    q = 4 * n

    def fn(C):
        C = np.asarray(C, dtype=complex)
        Z = np.zeros((q, q))
        Np = B.T @ np.block([[C, Z], [Z, C.conj().T]])
        X = Np[np.ix_(inv_p, inv_p)]
        Zx = np.zeros_like(X)
        M = np.block([[X, Zx], [Zx, X]])
        return J3inv @ W @ M @ W.conj().T

    return Embedding("P4_pair", fn, "U", q, STANDARD, STANDARD)


NORMAL_FORMS = ("P4", "P8", "P8_tilde", "P4_pair")
EXPECTED_RATIO = {"grassmann": 2.0, "P4": 8.0, "P8": 16.0, "P8_tilde": 16.0, "P4_pair": 4.0}


def verify_isometry_normal_form(which, n=1, samples=50, seed=0, tol=DEFAULT_TOL,
                                ratio_tol=1e-4, tangents=20):
    """Block normal form and metric scale of one chain-node identification.

    ``P4``: ``B_{2n} J_3 J = diag(C, C^{-1})`` with ``C in Sp_{2n}`` for ``J`` in
    SO-node 4, and ratio 8. ``P8``: ``B_n J'_7 J' = diag(D, D^{-1})`` with
    ``D in SO_n`` inside ``Sp_{2n}``, and ratio 16. ``P8_tilde``: U-node 8 as
    ``J_8 G(D, D^{-1})`` with ``D in U_n``, ratio 16, and SO-node 8 samples
    landing in real ``D`` of determinant 1. ``P4_pair``: U-node 4 as
    ``diag(C, C^{-1})`` with ``C in U_{4n}``, ratio 4, and SO-node 4 samples
    giving ``C = quat_to_complex`` of their quaternionic block.
    """
    if which not in NORMAL_FORMS:
        raise ValueError(f"unknown normal form {which!r}")
    cliff = make_clifford_system(n)
    worst, witness = 0.0, None

    def note(res, M):
        nonlocal worst, witness
        worst = max(worst, res)
        if res > tol and witness is None:
            witness = matrix_to_json(M)

    extra = {}
    if which == "P4":
        node = build_chain("SO", n, cliff)[4]
        for J in sample_node_points(node, samples, seed):
            note(p4_block_residual(J, cliff)[0], J)
        emb = p4_embedding(n, cliff)
        for J in [emb.fn(quat_to_complex(QuatMatrix.identity(2 * n)))]:
            note(max(node.residuals(J).values()), J)
    elif which == "P8":
        chain = make_sp2n_chain(n)
        for S in chain.structures() + [chain.J8]:
            note(max(group_residual(S, "Sp"), _maxabs(S @ S + np.eye(4 * n))), S)
        note(max(chain.residuals(chain.J8).values()), chain.J8)
        for J in sample_sp2n_p8(chain, samples, seed):
            res = max(p8_block_residual(J, chain)[0], max(chain.residuals(J).values()))
            note(res, J)
        emb, to_sp = p8_embedding(n, cliff)
        note(max(chain.residuals(to_sp(np.eye(n))).values()), to_sp(np.eye(n)))
        if n == 1:
            # SO_1 is a point; the scale is measured on the n = 2 normal form
            emb, _ = p8_embedding(2)
            extra["ratio_n"] = 2
    elif which == "P8_tilde":
        emb, frame = p8_tilde_embedding(n, cliff)
        unode = build_chain("U", n, cliff)[8]
        for J in sample_node_points(unode, samples, seed):
            note(p8_tilde_residual(J, frame)[0], J)
        so_node = build_chain("SO", n, cliff)[8]
        real_dev = 0.0
        for J in sample_node_points(so_node, samples, seed):
            res, D = p8_tilde_residual(J.astype(complex), frame)
            dev = max(_maxabs(D.imag), abs(np.linalg.det(D) - 1.0))
            real_dev = max(real_dev, dev)
            note(max(res, dev), J)
        extra["so_n_image_residual"] = real_dev
        rng = np.random.default_rng([int(seed), 99])
        from .algebra import haar_unitary
        for _ in range(5):
            J = emb.fn(haar_unitary(rng, n))
            note(max(unode.residuals(J).values()), J)
    else:
        unode = build_chain("U", n, cliff)[4]
        for J in sample_node_points(unode, samples, seed):
            note(p4_pair_residual(J, cliff)[0], J)
        so_node = build_chain("SO", n, cliff)[4]
        p = _p4_pair_perm(n)
        cons = 0.0
        for J in sample_node_points(so_node, samples, seed):
            res, C = p4_pair_residual(J.astype(complex), cliff)
            _, Cq = p4_block_residual(J, cliff)
            dev = _maxabs(C - quat_to_complex(Cq)) if p is not None else 0.0
            cons = max(cons, dev)
            note(max(res, dev), J)
        extra["sp_in_u_consistency"] = cons
        emb = p4_pair_embedding(n, cliff)
    ratio = metric_pullback_scale(emb, tangents=tangents, seed=seed)
    expected = EXPECTED_RATIO[which]
    rel = abs(ratio - expected) / expected
    ok = worst <= tol and rel <= ratio_tol
    if rel > ratio_tol and witness is None:
        witness = {"metric_ratio": ratio}
    return _report("normal_form", "pass" if ok else "fail", worst, witness,
                   inclusion_tag=which, which=which, n=n, samples=samples, metric_ratio=ratio,
                   expected_ratio=expected, **extra)

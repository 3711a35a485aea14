"""Clifford systems and the SO-, U- and Sp-Bott chains.

Every chain is built from one Clifford system ``J_1, ..., J_8`` of real
orthogonal complex structures on ``R^{16n}``. Node ``k`` of a chain is the
connected component through ``J_k`` of

    {J in G : J^2 = -I, J J_a = -J_a J for a < k}

with ``G = SO_{16n}``, ``U_{16n}`` or ``Sp_{16n}`` and node 0 the group
itself. The U-chain uses the complexified ``J_a``; the Sp-chain works in
the complex ``32n x 32n`` picture and uses ``diag(J_a, J_a)``, the image
of ``J_a`` under ``U_{16n} -> Sp_{16n}``.
"""
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .algebra import (
    DEFAULT_TOL, MetricSpec, QuatMatrix, QI, QJ, QK, STANDARD, SYMPLECTIC_HALF,
    exp_skew, geodesic_distance, group_residual, log_unitary_principal,
    pfaffian_sign, principal_angles, project_sp, quat_left_matrix,
    quat_right_matrix, quat_to_complex, random_group_element, random_skew,
    standard_complex_structure,
)

CHAINS = ("SO", "U", "Sp")
AMBIENT = {"SO": "SO", "U": "U", "Sp": "Sp"}
CHAIN_METRIC = {"SO": STANDARD, "U": STANDARD, "Sp": SYMPLECTIC_HALF}

# spaces at k = 0..8, used for reports
NODE_NAMES = {
    "SO": ["SO(16n)", "SO(16n)/U(8n)", "U(8n)/Sp(4n)", "G_2n(H^4n)", "Sp(2n)",
           "Sp(2n)/U(2n)", "U(2n)/O(2n)", "G_n(R^2n)", "SO(n)"],
    "U": ["U(16n)", "G_8n(C^16n)", "U(8n)", "G_4n(C^8n)", "U(4n)", "G_2n(C^4n)",
          "U(2n)", "G_n(C^2n)", "U(n)"],
    "Sp": ["Sp(16n)", "Sp(16n)/U(16n)", "U(16n)/O(16n)", "G_8n(R^16n)", "SO(8n)",
           "SO(8n)/U(4n)", "U(4n)/Sp(2n)", "G_n(H^2n)", "Sp(n)"],
}


def _pauli():
    X = np.array([[0.0, 1.0], [1.0, 0.0]])
    Z = np.diag([1.0, -1.0])
    E = np.array([[0.0, -1.0], [1.0, 0.0]])
    return X, Z, E


# ---------------------------------------------------------------------------
# complex structures and Clifford systems


@dataclass(frozen=True)
class ComplexStructure:
    """Matrix ``J`` with ``J^2 = -I`` inside a named ambient group."""

    matrix: np.ndarray
    ambient: str
    component_tag: int = None

    def residual(self):
        J = self.matrix
        sq = float(np.max(np.abs(J @ J + np.eye(J.shape[0]))))
        return max(sq, group_residual(J, self.ambient))


@dataclass(frozen=True)
class CliffordSystem:
    """Eight pairwise anticommuting orthogonal complex structures on ``R^{16n}``."""

    n: int
    structures: tuple

    def J(self, k):
        """``J_k`` for ``k = 1..8``; ``J_0`` is the identity."""
        if k == 0:
            return np.eye(16 * self.n)
        return self.structures[k - 1].matrix

    def residuals(self):
        """Max defects of ``J_a^2 = -I``, ``J_a^T J_a = I`` and anticommutation."""
        Js = [s.matrix for s in self.structures]
        I = np.eye(Js[0].shape[0])
        sq = max(np.max(np.abs(J @ J + I)) for J in Js)
        orth = max(np.max(np.abs(J.T @ J - I)) for J in Js)
        anti = max(np.max(np.abs(A @ B + B @ A))
                   for a, A in enumerate(Js) for b, B in enumerate(Js) if a < b)
        return {"square": float(sq), "orthogonal": float(orth), "anticommute": float(anti)}

    def max_residual(self):
        return max(self.residuals().values())


def make_clifford_system(n):
    """Clifford system ``J_1..J_8`` on ``H^{4n} = R^{16n}``.

    Coordinates are ordered ``R^{4n} + R^{4n} i + R^{4n} j + R^{4n} k``,
    so operators are Kronecker products ``P (x) T`` with ``P`` acting on
    the quaternion components and ``T`` on ``R^{4n} = R^2 (x) R^2 (x) R^n``.

    ``J_1 = R_i`` and ``J_2 = R_j`` are right multiplications, and
    ``J_3 = R_k (x) D`` with ``D = diag(I_{2n}, -I_{2n})`` so that
    ``J_1 J_2 J_3 = D``. The remaining five are::

        J_4 = R_k (x) X (x) I        J_5 = R_k (x) E (x) E
        J_{5+a} = R_k L_u (x) E (x) X    for u = i, j, k

    where ``X, E`` are the real 2x2 reflection and rotation and ``L_u`` is
    left multiplication by ``u``.
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    n = int(n)
    X, Z, E = _pauli()
    I2 = np.eye(2)
    In = np.eye(n)
    Ri, Rj, Rk = (quat_right_matrix(u) for u in (QI, QJ, QK))

    def T(a, b):
        return np.kron(np.kron(a, b), In)

    mats = [
        np.kron(Ri, np.eye(4 * n)),
        np.kron(Rj, np.eye(4 * n)),
        np.kron(Rk, T(Z, I2)),
        np.kron(Rk, T(X, I2)),
        np.kron(Rk, T(E, E)),
    ]
    for u in (QI, QJ, QK):
        mats.append(np.kron(Rk @ quat_left_matrix(u), T(E, X)))
    structures = tuple(ComplexStructure(M, "SO", pfaffian_sign(M)) for M in mats)
    return CliffordSystem(n, structures)


# ---------------------------------------------------------------------------
# symmetric-space predicates


def geodesic_symmetry(g, x):
    """Geodesic symmetry of a group at ``g``: ``s_g(x) = g x^{-1} g``."""
    g = np.asarray(g)
    x = np.asarray(x)
    if g.shape != x.shape:
        raise ValueError("dimension mismatch")
    return g @ np.linalg.inv(x) @ g


@lru_cache(maxsize=None)
def _probe_elements(group, N, count=200):
    rng = np.random.default_rng([0x9E37, N, len(group)])
    return tuple(random_group_element(rng, group, N) for _ in range(count))


def is_pole(p, o, group, tol=DEFAULT_TOL, probes=200):
    """Whether ``p`` is a pole of ``(G, o)``, i.e. ``s_p = s_o`` and ``p != o``.

    For a compact group this means ``c = p o^{-1}`` is central with
    ``c^2 = I``. The centre is known exactly (scalars), so the decisive
    test is ``c = zI``; commutation with seeded random group elements is a
    cross-check.
    """
    p = np.asarray(p)
    o = np.asarray(o)
    try:
        if group_residual(p, group) > tol or group_residual(o, group) > tol:
            return False
    except ValueError:
        return False
    if np.max(np.abs(p - o)) <= tol:
        return False
    c = p @ np.linalg.inv(o)
    N = c.shape[0]
    if np.max(np.abs(c @ c - np.eye(N))) > tol:
        return False
    z = np.trace(c) / N
    if np.max(np.abs(c - z * np.eye(N))) > tol:
        return False
    for g in _probe_elements(group, N, probes):
        if np.max(np.abs(g @ c - c @ g)) > tol:
            return False
    return True


def centrosome_membership(J, o, p, group, metric=STANDARD, tol=DEFAULT_TOL):
    """Classify ``J`` against the midpoints of geodesics from ``o`` to ``p``.

    Returns ``'not_member'``, ``'member_shortest'`` or ``'member_nonshortest'``.
    ``J`` is a midpoint iff ``(o^{-1}J)^2 = o^{-1}p``; the geodesic is
    shortest iff all eigenangles of ``o^{-1}J`` are ``+-pi/2``. The metric
    only rescales lengths and does not enter the classification.
    """
    if not is_pole(p, o, group, tol):
        raise ValueError("p is not a pole of (group, o)")
    J = np.asarray(J)
    try:
        if group_residual(J, group) > tol:
            return "not_member"
    except ValueError:
        return "not_member"
    oi = np.linalg.inv(o)
    M = oi @ J
    if np.max(np.abs(M @ M - oi @ p)) > tol:
        return "not_member"
    theta = principal_angles(M)
    if np.all(np.abs(np.abs(theta) - np.pi / 2) <= max(tol, 1e-8)):
        return "member_shortest"
    return "member_nonshortest"


# ---------------------------------------------------------------------------
# geodesics


@dataclass(frozen=True)
class GeodesicSegment:
    """``gamma(t) = start @ exp(t * velocity)``."""

    start: np.ndarray
    velocity: np.ndarray

    def at(self, t):
        real = not np.iscomplexobj(self.start) and not np.iscomplexobj(self.velocity)
        E = exp_skew(t * np.asarray(self.velocity, dtype=complex), "complex")
        out = self.start @ E
        return out.real if real else out

    def length(self, metric=STANDARD):
        return float(np.sqrt(metric.inner(self.velocity, self.velocity)))


def midpoint_to_geodesic(J, o, tol=DEFAULT_TOL, group=None):
    """Geodesic ``o -> -o`` whose midpoint is ``J``.

    The velocity is ``2 log(o^{-1} J)`` on the principal branch.
    """
    Jm = J.matrix if isinstance(J, ComplexStructure) else np.asarray(J)
    group = group or (J.ambient if isinstance(J, ComplexStructure) else _guess_group(Jm))
    o = np.asarray(o)
    if centrosome_membership(Jm, o, -o, group, tol=tol) != "member_shortest":
        raise ValueError("J is not the midpoint of a shortest geodesic from o to -o")
    M = np.linalg.inv(o) @ Jm
    V = 2.0 * log_unitary_principal(M.astype(complex), tol=tol)
    if not np.iscomplexobj(o) and not np.iscomplexobj(Jm):
        V = V.real
    seg = GeodesicSegment(o, V)
    if np.max(np.abs(seg.at(1.0) + o)) > 1e3 * tol:
        raise ValueError("geodesic does not reach -o")
    return seg


def _guess_group(M):
    return "U" if np.iscomplexobj(M) else "SO"


def grassmannian_geodesic(q):
    """Geodesic of ``G_q(C^{2q})`` from ``A_q`` to ``-A_q`` in conjugation form.

    Returns ``t -> exp(tX) A_q exp(-tX)`` with
    ``X = (pi i / 2) [[0, I_q], [I_q, 0]]``.
    """
    S = np.block([[np.zeros((q, q)), np.eye(q)], [np.eye(q), np.zeros((q, q))]])
    X = 0.5j * np.pi * S
    A = standard_complex_structure(q)

    def gamma(t):
        E = exp_skew(t * X, "complex")
        return E @ A @ E.conj().T

    return gamma


# ---------------------------------------------------------------------------
# chain nodes


def sp_embed(X):
    """``U_r -> Sp_r`` in the complex picture: ``X -> diag(X, conj(X))``."""
    return quat_to_complex(QuatMatrix(np.asarray(X, dtype=complex)))


def _lift(chain, J):
    if chain == "SO":
        return np.asarray(J, dtype=float)
    if chain == "U":
        return np.asarray(J, dtype=complex)
    return sp_embed(J)


def _product(mats, N):
    P = np.eye(N, dtype=complex)
    for M in mats:
        P = P @ M
    return P


def _involution_phase(W):
    """Scalar ``c`` in ``{1, i}`` making ``cW`` an involution (``W^2 = +-I``)."""
    N = W.shape[0]
    return 1.0 if np.max(np.abs(W @ W - np.eye(N))) < 1e-6 else 1j


def _joint_plus_space(involutions, N):
    """Orthonormal basis of the common +1 eigenspace of commuting involutions."""
    P = np.eye(N, dtype=complex)
    for H in involutions:
        P = P @ (np.eye(N) + H) / 2
    P = (P + P.conj().T) / 2
    w, V = np.linalg.eigh(P)
    return V[:, w > 0.5]


def multiplicity_space(structures):
    """Common +1 eigenspace of ``iJ_1J_2, iJ_3J_4, ...`` and ``c J_1...J_m``.

    For an odd number ``m`` of anticommuting structures these operators
    commute with each other and with the centralizer of the ``J_a``; the
    centralizer acts faithfully on this space.
    """
    N = structures[0].shape[0]
    invs = [1j * structures[a] @ structures[a + 1] for a in range(0, len(structures) - 1, 2)]
    W = _product(structures, N)
    invs.append(_involution_phase(W) * W)
    return _joint_plus_space(invs, N)


# component tag kinds for each (chain, k) with more than one component
# around the base point; 'trace' is used for every odd k
_DET_TAGGED = {("SO", 8), ("Sp", 4)}


@dataclass(frozen=True)
class ChainNode:
    """One node ``P_k`` of a Bott chain in its ambient matrix group.

    Attributes
    ----------
    chain : {'SO', 'U', 'Sp'}
    k : int
    n : int
    ambient : str
        Group name passed to :func:`group_residual`.
    base : ndarray
        ``J_k`` in the ambient picture (identity for ``k = 0``).
    structures : tuple of ndarray
        ``J_1, ..., J_{k-1}`` in the ambient picture.
    metric : MetricSpec
    tag_kind : str or None
        ``'pfaffian'``, ``'trace'``, ``'det'`` or ``None``.
    tag_value : int or None
        Value of the tag at the base point.
    """

    chain: str
    k: int
    n: int
    ambient: str
    base: np.ndarray
    structures: tuple
    metric: MetricSpec
    tag_kind: str = None
    tag_value: int = None
    _omega_phase: complex = field(default=1.0, repr=False)

    @property
    def pole(self):
        return -self.base

    @property
    def name(self):
        return NODE_NAMES[self.chain][self.k]

    @property
    def dim(self):
        return self.base.shape[0]

    # -- component tags -----------------------------------------------------

    def component_tag(self, J):
        if self.tag_kind is None:
            return None
        if self.tag_kind == "pfaffian":
            return pfaffian_sign(np.asarray(J).real)
        if self.tag_kind == "trace":
            W = self._omega_phase * _product(list(self.structures) + [J], self.dim)
            return int(np.rint(np.trace(W).real))
        if self.tag_kind == "det":
            V = multiplicity_space(list(self.structures))
            g = -self.base @ J
            d = np.linalg.det(V.conj().T @ g @ V)
            return int(np.sign(d.real))
        raise ValueError(f"unknown tag kind {self.tag_kind!r}")

    # -- membership -----------------------------------------------------------

    def residuals(self, J):
        """Defects of the defining conditions of the node at ``J``."""
        J = np.asarray(J)
        if J.shape != self.base.shape:
            raise ValueError("dimension mismatch")
        out = {"group": group_residual(J, self.ambient)}
        if self.k == 0:
            return out
        out["square"] = float(np.max(np.abs(J @ J + np.eye(self.dim))))
        out["anticommute"] = max(
            [float(np.max(np.abs(J @ S + S @ J))) for S in self.structures], default=0.0)
        return out

    def membership(self, J, tol=DEFAULT_TOL):
        try:
            res = self.residuals(J)
        except ValueError:
            return False
        if max(res.values()) > tol:
            return False
        if self.tag_kind is not None:
            try:
                return self.component_tag(J) == self.tag_value
            except ValueError:
                return False
        return True

    # -- Lie algebra projections ---------------------------------------------

    def random_lie(self, rng, scale=1.0):
        """Gaussian element of the ambient Lie algebra."""
        if self.ambient == "SO":
            return random_skew(rng, self.dim, "real", scale)
        X = random_skew(rng, self.dim, "complex", scale)
        return project_sp(X) if self.ambient == "Sp" else X

    def centralizer_projection(self, X):
        """Orthogonal projection onto matrices commuting with ``J_1..J_{k-1}``."""
        for S in self.structures:
            X = (X - S @ X @ S) / 2
        return X

    def tangent_projection(self, X):
        """Projection of a Lie algebra element onto the tangent space at the base.

        The tangent directions are the ``X`` commuting with ``J_1..J_{k-1}``
        and anticommuting with ``J_k``; then ``J_k exp(X)`` stays in the node.
        """
        X = self.centralizer_projection(X)
        if self.k > 0:
            X = (X + self.base @ X @ self.base) / 2
        return X

    def to_json(self):
        return {"chain": self.chain, "k": self.k, "n": self.n, "ambient": self.ambient,
                "space": self.name, "base_trace": [float(np.trace(self.base).real),
                                                   float(np.trace(self.base).imag)],
                "component_tag": self.tag_value, "tag_kind": self.tag_kind}


def build_chain(kind, n, cliff=None, tol=DEFAULT_TOL):
    """Nodes ``k = 0..8`` of the SO-, U- or Sp-Bott chain."""
    if kind not in CHAINS:
        raise ValueError(f"unknown chain {kind!r}")
    cliff = cliff or make_clifford_system(n)
    if cliff.n != n or cliff.max_residual() > tol:
        raise ValueError("invalid Clifford system")
    Js = [_lift(kind, cliff.J(a)) for a in range(1, 9)]
    N = Js[0].shape[0]
    nodes = []
    for k in range(9):
        base = np.eye(N) if kind == "SO" else np.eye(N, dtype=complex)
        if k > 0:
            base = Js[k - 1]
        structs = tuple(Js[:max(k - 1, 0)])
        tag_kind, phase = None, 1.0
        if kind == "SO" and k == 1:
            tag_kind = "pfaffian"
        elif k % 2 == 1:
            tag_kind = "trace"
            phase = _involution_phase(_product(list(structs) + [base], N))
        elif (kind, k) in _DET_TAGGED:
            tag_kind = "det"
        node = ChainNode(kind, k, n, AMBIENT[kind], base, structs, CHAIN_METRIC[kind],
                         tag_kind, None, phase)
        if tag_kind is not None:
            node = ChainNode(kind, k, n, AMBIENT[kind], base, structs, CHAIN_METRIC[kind],
                             tag_kind, node.component_tag(base), phase)
        if not node.membership(base, tol):
            raise ValueError(f"base point of {kind} node {k} fails membership")
        if not is_pole(node.pole, base, node.ambient, tol):
            raise ValueError(f"-J_{k} is not a pole in the ambient group")
        nodes.append(node)
    return nodes


# ---------------------------------------------------------------------------
# sampling


def sample_node_points(node, count, seed, scale=1.0):
    """Points of a node obtained by conjugating its base point.

    For ``k = 0`` these are random group elements (Haar for SO and U). For
    ``k >= 1`` the conjugating element is ``exp(Y)`` with ``Y`` a Gaussian
    element of the Lie algebra of the centralizer of ``J_1..J_{k-1}``, so
    the sample stays in the connected component of ``J_k``.
    Sample ``i`` depends only on ``(seed, i)``.
    """
    if count < 1:
        raise ValueError("count must be positive")
    out = []
    for i in range(count):
        rng = np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, i])
        if node.k == 0:
            out.append(random_group_element(rng, node.ambient, node.dim))
            continue
        Y = node.centralizer_projection(node.random_lie(rng, scale))
        g = exp_skew(Y)
        out.append(g @ node.base @ g.conj().T if np.iscomplexobj(g) else g @ node.base @ g.T)
    return out


def sample_node_geodesic_points(node, count, seed, scale=1.0, project=None):
    """Points ``J_k exp(X)`` for random tangent vectors ``X`` at the base.

    ``project`` optionally maps the tangent vector before exponentiation,
    e.g. onto the fixed vectors of an involution.
    """
    out = []
    for i in range(count):
        rng = np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, i, 1])
        X = node.tangent_projection(node.random_lie(rng, scale))
        if project is not None:
            X = project(X)
        E = exp_skew(X)
        out.append(node.base @ E)
    return out


def chain_distance_profile(nodes, tol=DEFAULT_TOL):
    """Length of a shortest geodesic from ``J_k`` to ``-J_k`` inside each node.

    For ``k < 8`` the geodesic is ``t -> cos(pi t) J_k + sin(pi t) J_{k+1}``,
    the one with midpoint ``J_{k+1}``; it is checked to stay in node ``k``
    and its length is measured in the ambient metric. Eight structures are
    the most ``R^{16}`` carries, so for ``k = 8`` there is no midpoint in the
    system and the entry is the ambient distance from ``J_8`` to ``-J_8``.
    """
    if len(nodes) != 9 or [nd.k for nd in nodes] != list(range(9)):
        raise ValueError("chain malformed")
    prof = []
    for k in range(9):
        node = nodes[k]
        if k == 8:
            prof.append(geodesic_distance(node.base, node.pole, node.metric))
            continue
        seg = midpoint_to_geodesic(nodes[k + 1].base, node.base, tol, group=node.ambient)
        for t in (0.25, 0.5, 0.75):
            if not node.membership(seg.at(t), 1e3 * tol):
                raise ValueError(f"geodesic leaves node {k} at t={t}")
        if np.max(np.abs(seg.at(0.5) - nodes[k + 1].base)) > 1e3 * tol:
            raise ValueError(f"midpoint of node {k} geodesic is not J_{k + 1}")
        prof.append(seg.length(node.metric))
    return prof

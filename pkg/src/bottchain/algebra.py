"""Dense matrix algebra over the reals, complexes and quaternions.

Quaternionic matrices are stored as a pair of complex matrices ``(A, B)``
with ``M = A + jB``. Vectors of ``H^r`` are written ``v + jw`` with
``v, w`` in ``C^r`` and scalars act from the right, so every quaternionic
matrix is a complex-linear map of ``C^{2r}`` given by

    [[A, -conj(B)],
     [B,  conj(A)]]

All eigenvalue work happens in that complex picture.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg

DEFAULT_TOL = 1e-10
DIST_TOL = 1e-9

GROUPS = ("O", "SO", "U", "SU", "Sp")


# ---------------------------------------------------------------------------
# quaternion scalars


@dataclass(frozen=True)
class Quaternion:
    """Quaternion ``a + bi + cj + dk``."""

    a: float
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return quat_mul(self, other)
        return Quaternion(self.a * other, self.b * other, self.c * other, self.d * other)

    __rmul__ = __mul__

    def __add__(self, other):
        return Quaternion(self.a + other.a, self.b + other.b, self.c + other.c, self.d + other.d)

    def __neg__(self):
        return Quaternion(-self.a, -self.b, -self.c, -self.d)

    def conj(self):
        return Quaternion(self.a, -self.b, -self.c, -self.d)

    def norm(self):
        return float(np.sqrt(self.a ** 2 + self.b ** 2 + self.c ** 2 + self.d ** 2))

    def as_tuple(self):
        return (self.a, self.b, self.c, self.d)

    def isclose(self, other, tol=1e-12):
        return max(abs(x - y) for x, y in zip(self.as_tuple(), other.as_tuple())) <= tol


QI = Quaternion(0.0, 1.0, 0.0, 0.0)
QJ = Quaternion(0.0, 0.0, 1.0, 0.0)
QK = Quaternion(0.0, 0.0, 0.0, 1.0)


def quat_mul(p, q):
    """Hamilton product ``p q``."""
    a1, b1, c1, d1 = p.as_tuple()
    a2, b2, c2, d2 = q.as_tuple()
    return Quaternion(
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    )


# ---------------------------------------------------------------------------
# quaternionic matrices


class QuatMatrix:
    """Quaternionic matrix ``A + jB`` with complex ``A`` and ``B``.

    Parameters
    ----------
    A, B : array_like
        Complex matrices of equal shape. ``B`` defaults to zero.
    """

    field = "quaternion"

    def __init__(self, A, B=None):
        A = np.array(A, dtype=complex)
        if A.ndim != 2:
            raise ValueError("quaternionic matrix must be 2-dimensional")
        B = np.zeros_like(A) if B is None else np.array(B, dtype=complex)
        if B.shape != A.shape:
            raise ValueError("A and B parts must have the same shape")
        self.A = A
        self.B = B

    @classmethod
    def from_components(cls, a, b, c, d):
        """Build ``a + bi + cj + dk`` entrywise from four real arrays.

        Since ``cj + dk = j(c - di)`` the ``B`` part is ``c - di``.
        """
        a, b, c, d = (np.asarray(x, dtype=float) for x in (a, b, c, d))
        return cls(a + 1j * b, c - 1j * d)

    @classmethod
    def from_scalars(cls, rows):
        """Build from a nested list of :class:`Quaternion` entries."""
        comps = np.array([[q.as_tuple() for q in row] for row in rows], dtype=float)
        return cls.from_components(*np.moveaxis(comps, -1, 0))

    @classmethod
    def identity(cls, r):
        return cls(np.eye(r))

    def components(self):
        """Real arrays ``(a, b, c, d)`` with ``M = a + bi + cj + dk``."""
        return self.A.real, self.A.imag, self.B.real, -self.B.imag

    def entry(self, i, k):
        a, b, c, d = self.components()
        return Quaternion(a[i, k], b[i, k], c[i, k], d[i, k])

    @property
    def shape(self):
        return self.A.shape

    def __matmul__(self, other):
        # (A1 + jB1)(A2 + jB2) = (A1 A2 - conj(B1) B2) + j(conj(A1) B2 + B1 A2)
        A1, B1, A2, B2 = self.A, self.B, other.A, other.B
        return QuatMatrix(A1 @ A2 - B1.conj() @ B2, A1.conj() @ B2 + B1 @ A2)

    def __add__(self, other):
        return QuatMatrix(self.A + other.A, self.B + other.B)

    def __sub__(self, other):
        return QuatMatrix(self.A - other.A, self.B - other.B)

    def __neg__(self):
        return QuatMatrix(-self.A, -self.B)

    def adjoint(self):
        """Quaternionic conjugate transpose."""
        # conj(a + jb) = conj(a) - j b for complex a, b
        return QuatMatrix(self.A.conj().T, -self.B.T)

    def allclose(self, other, tol=1e-12):
        return (np.max(np.abs(self.A - other.A), initial=0.0) <= tol
                and np.max(np.abs(self.B - other.B), initial=0.0) <= tol)

    def to_json(self):
        return {"field": "quaternion",
                "rows": [[list(self.entry(i, k).as_tuple()) for k in range(self.shape[1])]
                         for i in range(self.shape[0])]}

    def __repr__(self):
        return f"QuatMatrix(A={self.A!r}, B={self.B!r})"


def field_of(M):
    """Field tag of a matrix: ``'real'``, ``'complex'`` or ``'quaternion'``."""
    if isinstance(M, QuatMatrix):
        return "quaternion"
    return "complex" if np.iscomplexobj(M) else "real"


def adjoint(M):
    if isinstance(M, QuatMatrix):
        return M.adjoint()
    M = np.asarray(M)
    return M.conj().T


def matrix_to_json(M):
    """Array-of-rows serialization with a field tag."""
    if isinstance(M, QuatMatrix):
        return M.to_json()
    M = np.asarray(M)
    if np.iscomplexobj(M):
        return {"field": "complex", "rows": [[[z.real, z.imag] for z in row] for row in M.tolist()]}
    return {"field": "real", "rows": M.tolist()}


def quat_to_complex(M):
    """Complex ``2r x 2r`` picture ``[[A, -conj(B)], [B, conj(A)]]`` of ``M = A + jB``."""
    A, B = M.A, M.B
    return np.block([[A, -B.conj()], [B, A.conj()]])


def complex_to_quat(X, tol=DEFAULT_TOL):
    """Inverse of :func:`quat_to_complex` on matrices of the right block form."""
    X = np.asarray(X, dtype=complex)
    n = X.shape[0]
    if X.shape[0] != X.shape[1] or n % 2:
        raise ValueError("complex picture must be square of even size")
    r = n // 2
    A, B = X[:r, :r], X[r:, :r]
    if (np.max(np.abs(X[:r, r:] + B.conj())) > tol
            or np.max(np.abs(X[r:, r:] - A.conj())) > tol):
        raise ValueError("matrix does not commute with the quaternionic structure")
    return QuatMatrix(A, B)


def complexify_real(M):
    """Entrywise cast of a real matrix to the complex field."""
    M = np.asarray(M)
    if np.iscomplexobj(M):
        raise ValueError("complexify_real expects a real matrix")
    return M.astype(complex)


def realify_complex(M):
    """Real ``2r x 2r`` form of a complex ``r x r`` matrix.

    Basis order is ``(e_1, ..., e_r, ie_1, ..., ie_r)``, giving
    ``[[Re M, -Im M], [Im M, Re M]]``.
    """
    M = np.asarray(M, dtype=complex)
    return np.block([[M.real, -M.imag], [M.imag, M.real]])


def left_quat_rep(A, tol=DEFAULT_TOL):
    """Quaternionic matrix acting by ``v + jw -> Av + j conj(A) w``.

    A complex matrix multiplying quaternionic vectors from the left is
    exactly this map, so the result is ``A + j0``.
    """
    A = np.asarray(A, dtype=complex)
    if not is_in_group(A, "U", tol):
        raise ValueError("left_quat_rep expects a unitary matrix")
    return QuatMatrix(A.copy())


def quat_left_matrix(q):
    """Real 4x4 matrix of ``x -> q x`` on components ``(a, b, c, d)``."""
    cols = [quat_mul(q, e).as_tuple() for e in _UNITS]
    return np.array(cols, dtype=float).T


def quat_right_matrix(q):
    """Real 4x4 matrix of ``x -> x q`` on components ``(a, b, c, d)``."""
    cols = [quat_mul(e, q).as_tuple() for e in _UNITS]
    return np.array(cols, dtype=float).T


_UNITS = (Quaternion(1.0), QI, QJ, QK)


def quat_to_real(M):
    """Real ``4r x 4r`` matrix of a quaternionic matrix acting on ``H^r``.

    ``H^r`` is identified with ``R^r + R^r i + R^r j + R^r k``, i.e. the
    coordinates are ordered component-major.
    """
    return sum(np.kron(quat_left_matrix(u), c) for u, c in zip(_UNITS, M.components()))


def real_to_quat(R, tol=DEFAULT_TOL):
    """Inverse of :func:`quat_to_real` for maps commuting with ``R_i`` and ``R_j``."""
    R = np.asarray(R, dtype=float)
    if R.shape[0] != R.shape[1] or R.shape[0] % 4:
        raise ValueError("real matrix must be square of size divisible by 4")
    r = R.shape[0] // 4
    M = QuatMatrix.from_components(*(R[c * r:(c + 1) * r, :r] for c in range(4)))
    if np.max(np.abs(quat_to_real(M) - R)) > tol:
        raise ValueError("matrix is not quaternion-linear (does not commute with R_i, R_j)")
    return M


def right_mult_operator(q, r):
    """``R_q`` on ``H^r``: multiplication of every coordinate by ``q`` from the right."""
    return np.kron(quat_right_matrix(q), np.eye(r))


# ---------------------------------------------------------------------------
# group predicates


def symplectic_form(r):
    """``K_r = [[0, I_r], [-I_r, 0]]``."""
    I = np.eye(r)
    Z = np.zeros((r, r))
    return np.block([[Z, I], [-I, Z]]).astype(complex)


def standard_complex_structure(r):
    """``A_r = diag(i I_r, -i I_r)``."""
    return np.diag(np.r_[np.full(r, 1j), np.full(r, -1j)])


def _unitarity_residual(M):
    return float(np.max(np.abs(M @ M.conj().T - np.eye(M.shape[0]))))


def group_residual(M, group):
    """Largest defect of ``M`` from membership in ``group``.

    Quaternionic input is tested in its complex picture. Real-only groups
    reject matrices with a nonzero imaginary part.
    """
    if group not in GROUPS:
        raise ValueError(f"unknown group {group!r}")
    if isinstance(M, QuatMatrix):
        if group != "Sp":
            raise ValueError("quaternionic matrices can only be tested against Sp")
        M = quat_to_complex(M)
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("group membership needs a square matrix")
    if group in ("O", "SO") and np.iscomplexobj(M):
        if np.max(np.abs(M.imag), initial=0.0) > 0:
            raise ValueError(f"{group} test on a matrix with complex entries")
        M = M.real
    if group == "Sp" and not np.iscomplexobj(M):
        raise ValueError("Sp test needs the complex picture, got a real matrix")
    res = _unitarity_residual(M)
    if group in ("SO", "SU"):
        res = max(res, abs(np.linalg.det(M) - 1.0))
    if group == "Sp":
        if M.shape[0] % 2:
            raise ValueError("Sp test needs even size")
        K = symplectic_form(M.shape[0] // 2)
        res = max(res, float(np.max(np.abs(K @ M.conj() @ K.T - M))))
    return float(res)


def is_in_group(M, group, tol=DEFAULT_TOL):
    """Membership test for O, SO, U, SU and Sp (complex picture)."""
    return group_residual(M, group) <= tol


# ---------------------------------------------------------------------------
# exponential, logarithm, distance


def _as_complex_square(M):
    if isinstance(M, QuatMatrix):
        return quat_to_complex(M)
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square matrix")
    return M.astype(complex)


def exp_skew(X, field=None, tol=DEFAULT_TOL):
    """Exponential of a skew-symmetric or skew-Hermitian matrix.

    The Hermitian matrix ``X / i`` is diagonalized and the eigenvalues are
    exponentiated, which keeps the result unitary to working precision.

    Parameters
    ----------
    X : ndarray or QuatMatrix
    field : {'real', 'complex', 'quaternion'}, optional
        Defaults to the field of ``X``. Real output is returned for real
        input, a :class:`QuatMatrix` for quaternionic input.
    """
    field = field or field_of(X)
    Xc = _as_complex_square(X)
    scale = max(1.0, float(np.max(np.abs(Xc), initial=0.0)))
    if np.max(np.abs(Xc + Xc.conj().T), initial=0.0) > tol * scale:
        raise ValueError("exp_skew expects a skew-Hermitian matrix")
    if field == "real" and np.max(np.abs(Xc.imag), initial=0.0) > tol * scale:
        raise ValueError("real field requested for a matrix with complex entries")
    H = -1j * Xc
    H = (H + H.conj().T) / 2
    w, V = np.linalg.eigh(H)
    E = (V * np.exp(1j * w)) @ V.conj().T
    if field == "real":
        return E.real
    if field == "quaternion":
        return complex_to_quat(E, tol=1e-8)
    return E


def unitary_eigh(M):
    """Eigenangles and unitary eigenvectors of a normal matrix.

    Uses the complex Schur form, which is diagonal for normal input.
    Angles lie in ``(-pi, pi]``.
    """
    T, Z = scipy.linalg.schur(np.asarray(M, dtype=complex), output="complex")
    theta = np.angle(np.diag(T))
    return theta, Z


def principal_angles(M, branch_tol=1e-8):
    """Eigenangles of a unitary matrix in ``(-pi, pi]``, eigenvalue -1 sent to +pi."""
    M = _as_complex_square(M)
    theta = np.angle(np.linalg.eigvals(M))
    theta[np.abs(np.abs(theta) - np.pi) <= branch_tol] = np.pi
    return np.sort(theta)


def log_unitary_principal(M, tol=DEFAULT_TOL, branch_tol=1e-8):
    """Principal logarithm of a unitary matrix.

    Eigenangles lie in ``(-pi, pi]``; any angle within ``branch_tol`` of
    ``-pi`` is moved to ``+pi``. The result depends only on the spectral
    projections, so no choice of basis inside a repeated eigenspace leaks
    into it.
    """
    Mc = _as_complex_square(M)
    if _unitarity_residual(Mc) > tol:
        raise ValueError("log_unitary_principal expects a unitary matrix")
    theta, Z = unitary_eigh(Mc)
    theta = np.where(np.abs(np.abs(theta) - np.pi) <= branch_tol, np.pi, theta)
    X = (Z * (1j * theta)) @ Z.conj().T
    X = (X - X.conj().T) / 2
    if isinstance(M, QuatMatrix):
        return complex_to_quat(X, tol=1e-8)
    return X


@dataclass(frozen=True)
class MetricSpec:
    """Bi-invariant metric ``<X, Y> = -scale * tr(XY)``.

    The trace is taken in whatever picture the matrices are given in; for
    quaternionic groups that is the complex picture, where the usual
    normalization is ``scale = 1/2``.
    """

    scale: float = 1.0
    name: str = ""

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("metric scale must be positive")

    def inner(self, X, Y):
        return float(np.real(-self.scale * np.trace(np.asarray(X) @ np.asarray(Y))))


STANDARD = MetricSpec(1.0, "-tr")
SYMPLECTIC_HALF = MetricSpec(0.5, "-1/2 tr")


def geodesic_distance(A, B, metric=STANDARD):
    """Distance ``sqrt(s * sum theta_j^2)`` for the eigenangles of ``A^{-1} B``."""
    Ac, Bc = _as_complex_square(A), _as_complex_square(B)
    if Ac.shape != Bc.shape:
        raise ValueError("matrices come from different groups")
    theta = principal_angles(Ac.conj().T @ Bc)
    return float(np.sqrt(metric.scale * np.sum(theta ** 2)))


# ---------------------------------------------------------------------------
# Pfaffian sign and projections


def pfaffian_sign(J, tol=DEFAULT_TOL):
    """Sign of the Pfaffian of a real skew-symmetric matrix.

    Householder reflections bring ``J`` to tridiagonal skew form
    ``T = Q^T J Q``; then ``Pf(J) = det(Q) * prod T[2m, 2m+1]`` and each
    nontrivial reflection contributes ``-1`` to ``det(Q)``.
    """
    J = np.asarray(J)
    if np.iscomplexobj(J):
        if np.max(np.abs(J.imag), initial=0.0) > tol:
            raise ValueError("pfaffian_sign expects a real matrix")
        J = J.real
    n = J.shape[0]
    if J.ndim != 2 or J.shape[1] != n:
        raise ValueError("pfaffian_sign expects a square matrix")
    if n % 2:
        raise ValueError("Pfaffian of an odd-dimensional matrix")
    scale = max(1.0, float(np.max(np.abs(J), initial=0.0)))
    if np.max(np.abs(J + J.T), initial=0.0) > tol * scale:
        raise ValueError("pfaffian_sign expects a skew-symmetric matrix")
    T = np.array((J - J.T) / 2, dtype=float)
    sign = 1
    for k in range(n - 2):
        x = T[k + 1:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0 or np.all(x[1:] == 0.0):
            continue
        v = x.copy()
        v[0] += np.copysign(alpha, x[0]) if x[0] != 0 else alpha
        v /= np.linalg.norm(v)
        T[k + 1:, :] -= 2.0 * np.outer(v, v @ T[k + 1:, :])
        T[:, k + 1:] -= 2.0 * np.outer(T[:, k + 1:] @ v, v)
        sign = -sign
    pivots = T[np.arange(0, n, 2), np.arange(1, n, 2)]
    if np.min(np.abs(pivots)) <= tol * scale:
        raise ValueError("Pfaffian of a singular matrix")
    return int(sign * np.prod(np.sign(pivots)))


def structure_to_projection(J, tol=DEFAULT_TOL):
    """Hermitian projection ``(I - iJ)/2`` onto the ``+i`` eigenspace of ``J``."""
    J = np.asarray(J, dtype=complex)
    n = J.shape[0]
    if np.max(np.abs(J @ J + np.eye(n))) > tol:
        raise ValueError("J is not a complex structure (J^2 != -I)")
    if _unitarity_residual(J) > tol:
        raise ValueError("J is not unitary")
    return (np.eye(n) - 1j * J) / 2


# ---------------------------------------------------------------------------
# random elements


def random_skew(rng, N, field="complex", scale=1.0):
    """Gaussian skew-symmetric (real) or skew-Hermitian (complex) matrix."""
    if field == "real":
        A = rng.normal(size=(N, N))
        return scale * (A - A.T) / 2
    A = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
    return scale * (A - A.conj().T) / 2


def project_sp(X):
    """Project a complex ``2r x 2r`` matrix onto the quaternionic matrices."""
    K = symplectic_form(X.shape[0] // 2)
    return (X + K @ X.conj() @ K.T) / 2


def haar_orthogonal(rng, N, special=True):
    """Haar-distributed orthogonal matrix via QR with sign correction."""
    Q, R = np.linalg.qr(rng.normal(size=(N, N)))
    Q = Q * np.sign(np.diag(R))
    if special and np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def haar_unitary(rng, N):
    """Haar-distributed unitary matrix via QR with phase correction."""
    Z = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_group_element(rng, group, N):
    """Random element of O, SO, U, SU or Sp (complex picture, ``N`` even).

    Sp elements are exponentials of Gaussian Lie algebra elements, which
    reach the whole connected group.
    """
    if group in ("O", "SO"):
        return haar_orthogonal(rng, N, special=(group == "SO"))
    if group == "U":
        return haar_unitary(rng, N)
    if group == "SU":
        Q = haar_unitary(rng, N)
        return Q / np.linalg.det(Q) ** (1.0 / N)
    if group == "Sp":
        return exp_skew(project_sp(random_skew(rng, N, "complex", scale=2.0)), "complex")
    raise ValueError(f"unknown group {group!r}")

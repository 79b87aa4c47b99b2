"""Dense complex linear algebra shared by every other module.

Fixed conventions, written down once and used everywhere:

* Inner products are linear in the FIRST argument and conjugate-linear in
  the second: ``ip(u, v) = sum_i u[i] * conj(v[i])``.
* Vectorization stacks columns: ``vec(X) = X.flatten(order="F")``, so the
  map ``X -> A @ X @ B`` has superoperator matrix ``kron(B.T, A)``.
* A vector of ``h (x) C^k`` is stored noise-major: ``v (x) f`` has component
  ``f[i] * v[a]`` at index ``i*d + a``.  Operators from ``h`` into
  ``h (x) C^k`` are ``(k*d, d)`` matrices made of ``k`` stacked ``d x d``
  row blocks ``(R_1; ...; R_k)``.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

__all__ = [
    "ip",
    "dagger",
    "kron",
    "expm",
    "Norms",
    "norms",
    "operator_norm",
    "trace_norm",
    "hs_norm",
    "normalized_trace",
    "contract_channel",
    "vec",
    "unvec",
    "Superoperator",
    "choi_matrix",
    "eigmin_hermitian",
    "polar_unitary",
    "ginibre",
    "hermitian_ginibre",
    "haar_unitary",
]


def ip(u: np.ndarray, v: np.ndarray) -> complex:
    """<u, v>, linear in u and conjugate-linear in v."""
    return complex(np.vdot(v, u))


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; (A kron B)[i*p+k, j*q+l] = A[i,j] B[k,l] for p x q B."""
    return np.kron(a, b)


# [13/13] Pade coefficients and the double-precision scaling threshold.
_PADE13_B = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
_PADE13_THETA = 5.371920351148152
_MAX_SQUARINGS = 60


def expm(a: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling-and-squaring with a degree-13 Pade core.

    The degree (13) and scaling threshold (theta = 5.3719...) are fixed
    constants so results are reproducible across platforms.  Accurate to
    roughly unit round-off in the backward sense for ``norm(a) <= 50``.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expm needs a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("expm: non-finite entries")
    n = a.shape[0]
    if n == 0:
        return np.zeros((0, 0), dtype=complex)

    norm1 = float(np.linalg.norm(a, 1))
    if norm1 == 0.0:
        return np.eye(n, dtype=complex)
    s = 0
    if norm1 > _PADE13_THETA:
        s = int(np.ceil(np.log2(norm1 / _PADE13_THETA)))
        if s > _MAX_SQUARINGS:
            raise OverflowError(
                f"expm: norm {norm1:.3g} needs {s} squarings (> {_MAX_SQUARINGS})"
            )
        a = a / (2.0**s)

    b = _PADE13_B
    ident = np.eye(n, dtype=complex)
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a2 @ a4
    u = a @ (
        a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
        + b[7] * a6
        + b[5] * a4
        + b[3] * a2
        + b[1] * ident
    )
    v = (
        a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
        + b[6] * a6
        + b[4] * a4
        + b[2] * a2
        + b[0] * ident
    )
    r = np.linalg.solve(v - u, v + u)
    for _ in range(s):
        r = r @ r
    return r


class Norms(NamedTuple):
    operator_norm: float
    trace_norm: float
    hs_norm: float


def norms(a: np.ndarray) -> Norms:
    """Largest singular value, sum of singular values, Frobenius norm."""
    sv = np.linalg.svd(np.asarray(a, dtype=complex), compute_uv=False)
    top = float(sv[0]) if sv.size else 0.0
    return Norms(top, float(np.sum(sv)), float(np.linalg.norm(a)))


def operator_norm(a: np.ndarray) -> float:
    return norms(a).operator_norm


def trace_norm(a: np.ndarray) -> float:
    return norms(a).trace_norm


def hs_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def normalized_trace(a: np.ndarray) -> complex:
    """tau(a) = Tr(a) / dim, the tracial state of a matrix algebra."""
    return complex(np.trace(a)) / a.shape[0]


def contract_channel(a: np.ndarray, f: np.ndarray) -> np.ndarray:
    """<f, A> for A: h -> h (x) C^k, defined by <<f,A>u, v> = <Au, v (x) f>.

    With the stacked-block layout A = (A_1; ...; A_k) this is
    ``sum_i conj(f[i]) A_i``; conjugate-linear in f, linear in A.
    """
    a = np.asarray(a, dtype=complex)
    f = np.asarray(f, dtype=complex).ravel()
    k = f.size
    if a.ndim != 2 or k == 0 or a.shape[0] % k != 0:
        raise ValueError(f"contract_channel: shape mismatch {a.shape} vs k={k}")
    d = a.shape[0] // k
    blocks = a.reshape(k, d, a.shape[1])
    return np.tensordot(f.conj(), blocks, axes=(0, 0))


def vec(x: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(x, dtype=complex).flatten(order="F")


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape((d, d), order="F")


class Superoperator:
    """A linear map on M_d stored as its d^2 x d^2 matrix on vec(X)."""

    __slots__ = ("dim", "matrix")

    def __init__(self, dim: int, matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.shape != (dim * dim, dim * dim):
            raise ValueError(
                f"superoperator on M_{dim} needs a {dim**2} x {dim**2} matrix, "
                f"got {matrix.shape}"
            )
        self.dim = dim
        self.matrix = matrix

    @classmethod
    def from_map(cls, dim: int, fn: Callable[[np.ndarray], np.ndarray]) -> "Superoperator":
        """Build the matrix by evaluating fn on the matrix-unit basis."""
        m = np.zeros((dim * dim, dim * dim), dtype=complex)
        basis = np.zeros((dim, dim), dtype=complex)
        col = 0
        for j in range(dim):  # column-stacking order: (i, j) with j outer
            for i in range(dim):
                basis[i, j] = 1.0
                m[:, col] = vec(fn(basis))
                basis[i, j] = 0.0
                col += 1
        return cls(dim, m)

    @classmethod
    def from_left_right(cls, a: np.ndarray, b: np.ndarray) -> "Superoperator":
        """The map X -> A X B."""
        if a.shape[0] != a.shape[1] or a.shape != b.shape:
            raise ValueError("from_left_right needs square A, B of equal size")
        return cls(a.shape[0], np.kron(b.T, a))

    @classmethod
    def identity(cls, dim: int) -> "Superoperator":
        return cls(dim, np.eye(dim * dim, dtype=complex))

    @classmethod
    def zero(cls, dim: int) -> "Superoperator":
        return cls(dim, np.zeros((dim * dim, dim * dim), dtype=complex))

    def apply(self, x: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(x), self.dim)

    def __matmul__(self, other: "Superoperator") -> "Superoperator":
        return Superoperator(self.dim, self.matrix @ other.matrix)

    def __add__(self, other: "Superoperator") -> "Superoperator":
        return Superoperator(self.dim, self.matrix + other.matrix)

    def __sub__(self, other: "Superoperator") -> "Superoperator":
        return Superoperator(self.dim, self.matrix - other.matrix)

    def __mul__(self, scalar: complex) -> "Superoperator":
        return Superoperator(self.dim, self.matrix * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "Superoperator":
        return Superoperator(self.dim, -self.matrix)

    def is_hermiticity_preserving(self, rng=None, trials: int = 100, tol: float = 1e-10) -> bool:
        """Check apply(X*)* == apply(X) on random X."""
        rng = np.random.default_rng(0) if rng is None else rng
        for _ in range(trials):
            x = ginibre(rng, self.dim)
            if operator_norm(dagger(self.apply(dagger(x))) - self.apply(x)) > tol:
                return False
        return True


def choi_matrix(s: Superoperator) -> np.ndarray:
    """sum_ij E_ij (x) S(E_ij); positive semidefinite iff S is CP."""
    d = s.dim
    out = np.zeros((d * d, d * d), dtype=complex)
    e = np.zeros((d, d), dtype=complex)
    for i in range(d):
        for j in range(d):
            e[i, j] = 1.0
            out += np.kron(e, s.apply(e))
            e[i, j] = 0.0
    return out


def eigmin_hermitian(a: np.ndarray) -> float:
    """Smallest eigenvalue of the Hermitian part of a."""
    return float(np.linalg.eigvalsh((a + dagger(a)) / 2.0)[0])


def polar_unitary(g: np.ndarray) -> np.ndarray:
    """The unitary polar factor G (G*G)^(-1/2), computed from an SVD.

    One Newton-Schulz sweep polishes the factor to unitarity at working
    precision; long products of these factors then stay unitary to a few
    ulp per factor.
    """
    u, sv, vh = np.linalg.svd(g)
    if sv[-1] <= 1e-13 * max(1.0, sv[0]):
        raise ValueError("polar_unitary: matrix is (numerically) singular")
    q = u @ vh
    return 1.5 * q - 0.5 * (q @ dagger(q) @ q)


def ginibre(rng, n: int, m: int | None = None) -> np.ndarray:
    """Complex Gaussian matrix with i.i.d. CN(0,1) entries."""
    m = n if m is None else m
    return (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) / np.sqrt(2.0)


def hermitian_ginibre(rng, n: int) -> np.ndarray:
    g = ginibre(rng, n)
    return (g + dagger(g)) / 2.0


def haar_unitary(rng, n: int) -> np.ndarray:
    """Haar-distributed unitary (QR of a Ginibre matrix with phase fix)."""
    q, r = np.linalg.qr(ginibre(rng, n))
    ph = np.diagonal(r).copy()
    ph /= np.abs(ph)
    return q * ph

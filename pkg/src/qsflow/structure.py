"""Structure matrices for quantum stochastic flows on M_d.

A structure is generated by a triple (H, W, R): H = H* on C^d, W unitary on
C^d (x) C^k, and R mapping C^d into C^d (x) C^k.  With the inner endomorphism
pi(x) = W* (x (x) 1_k) W the structure maps are

    L(x)      = i[H, x] + R* pi(x) R - (1/2)(R*R x + x R*R)
    delta(x)  = pi(x) R - R x              (k stacked d x d component blocks)
    sigma(x)  = pi(x) - x (x) 1_k          (k x k blocks)
    ddag_i(x) = delta_i(x*)*

collected in the table theta(mu, nu), mu, nu in {0, 1, .., k}, with
theta(0,0) = L, theta(i,0) = delta_i, theta(0,i) = ddag_i and
theta(i,j) = sigma_ij.  This parametrization satisfies the multiplicative
structure relation

    theta(mu,nu)(xy) = theta(mu,nu)(x) y + x theta(mu,nu)(y)
                       + sum_i theta(mu,i)(x) theta(i,nu)(y),

the adjoint symmetry theta(mu,nu)(x)* = theta(nu,mu)(x*) and the second-order
relation delta(x)*delta(y) = L(x*y) - L(x*)y - x*L(y) identically, so it is
a safe generator of test instances at any finite dimension.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .linalg import (
    Superoperator,
    dagger,
    ginibre,
    haar_unitary,
    hermitian_ginibre,
    normalized_trace,
    operator_norm,
    vec,
)

__all__ = [
    "EHStructure",
    "build_inner_structure",
    "trivial_structure",
    "random_inner_structure",
    "verify_structure_relations",
    "verify_cocycle",
    "verify_weak_dissipativity",
    "combined_structure",
    "perturbed_generator",
    "perturb_theta",
    "structure_to_json",
    "structure_from_json",
    "RelationReport",
    "CocycleReport",
    "DissipativityReport",
]

_HERMITICITY_TOL = 1e-12
_UNITARITY_TOL = 1e-8


class EHStructure:
    """Immutable structure data on M_d with k noise channels.

    Attributes
    ----------
    d, k : int
    H, W, R : ndarray
        Generating data; shapes (d,d), (k*d,k*d), (k*d,d).
    theta : dict[(int,int), Superoperator]
        The full table of structure maps, indices 0..k.
    """

    __slots__ = ("d", "k", "H", "W", "R", "theta")

    def __init__(self, H: np.ndarray, W: np.ndarray, R: np.ndarray):
        H = np.asarray(H, dtype=complex)
        W = np.asarray(W, dtype=complex)
        R = np.asarray(R, dtype=complex)
        d = H.shape[0]
        if H.shape != (d, d):
            raise ValueError("H must be square")
        if R.ndim != 2 or R.shape[1] != d or R.shape[0] % d != 0 or R.shape[0] == 0:
            raise ValueError(f"R must be (k*d, d), got {R.shape}")
        k = R.shape[0] // d
        if W.shape != (k * d, k * d):
            raise ValueError(f"W must be ({k*d}, {k*d}), got {W.shape}")
        if operator_norm(H - dagger(H)) > _HERMITICITY_TOL * max(1.0, operator_norm(H)):
            raise ValueError("H is not self-adjoint")
        if operator_norm(dagger(W) @ W - np.eye(k * d)) > _UNITARITY_TOL:
            raise ValueError("W is not unitary")
        self.d = d
        self.k = k
        self.H = H
        self.W = W
        self.R = R
        self.theta = self._build_theta()

    def pi(self, x: np.ndarray) -> np.ndarray:
        """pi(x) = W* (x (x) 1_k) W on C^d (x) C^k (noise-major layout)."""
        return dagger(self.W) @ np.kron(np.eye(self.k), x) @ self.W

    def _build_theta(self) -> dict:
        d, k = self.d, self.k
        mats = {
            (mu, nu): np.zeros((d * d, d * d), dtype=complex)
            for mu in range(k + 1)
            for nu in range(k + 1)
        }
        half_rsr = 0.5 * (dagger(self.R) @ self.R)
        basis = np.zeros((d, d), dtype=complex)
        col = 0
        for j in range(d):  # column-stacking order
            for i in range(d):
                basis[i, j] = 1.0
                x = basis
                pix = self.pi(x)
                lx = (
                    1j * (self.H @ x - x @ self.H)
                    + dagger(self.R) @ pix @ self.R
                    - half_rsr @ x
                    - x @ half_rsr
                )
                dx = pix @ self.R - self.R @ x  # (k*d, d)
                xadj = x.conj().T
                ddagx = dagger(self.pi(xadj) @ self.R - self.R @ xadj)  # (d, k*d)
                mats[(0, 0)][:, col] = vec(lx)
                for a in range(k):
                    mats[(a + 1, 0)][:, col] = vec(dx[a * d : (a + 1) * d, :])
                    mats[(0, a + 1)][:, col] = vec(ddagx[:, a * d : (a + 1) * d])
                    for b in range(k):
                        blk = pix[a * d : (a + 1) * d, b * d : (b + 1) * d]
                        if a == b:
                            blk = blk - x
                        mats[(a + 1, b + 1)][:, col] = vec(blk)
                basis[i, j] = 0.0
                col += 1
        return {key: Superoperator(d, m) for key, m in mats.items()}

    @property
    def L(self) -> Superoperator:
        """Vacuum generator theta(0,0)."""
        return self.theta[(0, 0)]

    def delta(self, i: int) -> Superoperator:
        """Component i (1-based) of the pi-derivation, theta(i,0)."""
        return self.theta[(i, 0)]

    def delta_dag(self, i: int) -> Superoperator:
        return self.theta[(0, i)]

    def sigma(self, i: int, j: int) -> Superoperator:
        return self.theta[(i, j)]


def build_inner_structure(H: np.ndarray, W: np.ndarray, R: np.ndarray) -> EHStructure:
    """Construct the structure generated by (H, W, R); see module docstring."""
    return EHStructure(H, W, R)


def trivial_structure(d: int, k: int = 1) -> EHStructure:
    """H = 0, R = 0, W = 1: every structure map vanishes."""
    return EHStructure(
        np.zeros((d, d)), np.eye(k * d), np.zeros((k * d, d))
    )


def random_inner_structure(d: int, k: int, rng, scale: float = 1.0) -> EHStructure:
    """Generic structure with Ginibre H and R and a Haar-random W."""
    return EHStructure(
        scale * hermitian_ginibre(rng, d),
        haar_unitary(rng, k * d),
        scale * ginibre(rng, k * d, d),
    )


@dataclass(frozen=True)
class RelationReport:
    max_residual: float
    adjoint_residual: float
    worst_pair: tuple
    tolerance: float
    passed: bool


@dataclass(frozen=True)
class CocycleReport:
    max_residual: float
    tolerance: float
    passed: bool


@dataclass(frozen=True)
class DissipativityReport:
    max_value: float
    tolerance: float
    passed: bool


def verify_structure_relations(
    s: EHStructure, trials: int, rng=None, tol: float = 1e-10
) -> RelationReport:
    """Residuals of the multiplicative relation and adjoint symmetry.

    For random x, y reports the worst operator-norm residual of
    theta(mu,nu)(xy) - theta(mu,nu)(x)y - x theta(mu,nu)(y)
    - sum_i theta(mu,i)(x) theta(i,nu)(y) over all (mu, nu), together with
    the worst adjoint-symmetry residual, and which pair attained it.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(0) if rng is None else rng
    k = s.k
    worst = 0.0
    worst_adj = 0.0
    worst_pair = (0, 0)
    for _ in range(trials):
        x, y = ginibre(rng, s.d), ginibre(rng, s.d)
        xy = x @ y
        tx = {key: op.apply(x) for key, op in s.theta.items()}
        ty = {key: op.apply(y) for key, op in s.theta.items()}
        for mu in range(k + 1):
            for nu in range(k + 1):
                res = s.theta[(mu, nu)].apply(xy) - tx[(mu, nu)] @ y - x @ ty[(mu, nu)]
                for i in range(1, k + 1):
                    res -= tx[(mu, i)] @ ty[(i, nu)]
                r = operator_norm(res)
                if r > worst:
                    worst, worst_pair = r, (mu, nu)
                adj = operator_norm(
                    dagger(tx[(mu, nu)]) - s.theta[(nu, mu)].apply(dagger(x))
                )
                worst_adj = max(worst_adj, adj)
    return RelationReport(
        max_residual=worst,
        adjoint_residual=worst_adj,
        worst_pair=worst_pair,
        tolerance=tol,
        passed=(worst <= tol and worst_adj <= tol),
    )


def verify_cocycle(s: EHStructure, trials: int, rng=None, tol: float = 1e-10) -> CocycleReport:
    """Residual of delta(x)*delta(y) = L(x*y) - L(x*)y - x*L(y)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(0) if rng is None else rng
    worst = 0.0
    for _ in range(trials):
        x, y = ginibre(rng, s.d), ginibre(rng, s.d)
        lhs = np.zeros((s.d, s.d), dtype=complex)
        for i in range(1, s.k + 1):
            lhs += dagger(s.delta(i).apply(x)) @ s.delta(i).apply(y)
        xadj = dagger(x)
        rhs = s.L.apply(xadj @ y) - s.L.apply(xadj) @ y - xadj @ s.L.apply(y)
        worst = max(worst, operator_norm(lhs - rhs))
    return CocycleReport(max_residual=worst, tolerance=tol, passed=worst <= tol)


def verify_weak_dissipativity(
    s: EHStructure, trials: int, rng=None, tol: float = 1e-10
) -> DissipativityReport:
    """max over random x of tau(L(x*x)) with tau the normalized trace."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(0) if rng is None else rng
    worst = -np.inf
    for _ in range(trials):
        x = ginibre(rng, s.d)
        val = normalized_trace(s.L.apply(dagger(x) @ x)).real
        worst = max(worst, val)
    return DissipativityReport(max_value=worst, tolerance=tol, passed=worst <= tol)


def combined_structure(s1: EHStructure, s2: EHStructure) -> EHStructure:
    """Structure of the composed flow: L1 + L2, stacked delta, block sigma.

    Channels of s1 come first.  Realized on the generating data as
    H = H1 + H2, R = (R1; R2), W = blockdiag(W1, W2), so the combination is
    associative up to the identity relabeling of channels.
    """
    if s1.d != s2.d:
        raise ValueError(f"algebra dimensions differ: {s1.d} vs {s2.d}")
    d = s1.d
    k = s1.k + s2.k
    w = np.zeros((k * d, k * d), dtype=complex)
    w[: s1.k * d, : s1.k * d] = s1.W
    w[s1.k * d :, s1.k * d :] = s2.W
    r = np.vstack([s1.R, s2.R])
    return EHStructure(s1.H + s2.H, w, r)


def perturbed_generator(s: EHStructure, c: np.ndarray, d: np.ndarray) -> Superoperator:
    """The semigroup generator twisted by noise vectors c and d:

        x -> L(x) + sum_i conj(c_i) theta(i,0)(x) + sum_i theta(0,i)(x) d_i
             + sum_ij conj(c_i) theta(i,j)(x) d_j + (sum_i conj(c_i) d_i) x.

    c enters conjugated, d linearly; the scalar term is vdot(c, d).
    """
    c = np.asarray(c, dtype=complex).ravel()
    dd = np.asarray(d, dtype=complex).ravel()
    if c.size != s.k or dd.size != s.k:
        raise ValueError(f"noise vectors must have length k={s.k}")
    if not (np.all(np.isfinite(c)) and np.all(np.isfinite(dd))):
        raise ValueError("noise vectors must be finite")
    m = s.L.matrix.copy()
    for i in range(1, s.k + 1):
        m += np.conj(c[i - 1]) * s.theta[(i, 0)].matrix
        m += dd[i - 1] * s.theta[(0, i)].matrix
        for j in range(1, s.k + 1):
            m += np.conj(c[i - 1]) * dd[j - 1] * s.theta[(i, j)].matrix
    m += np.vdot(c, dd) * np.eye(s.d * s.d)
    return Superoperator(s.d, m)


def perturb_theta(s: EHStructure, mu: int, nu: int, eps: float) -> EHStructure:
    """Copy of s with eps * identity added to theta(mu, nu).

    The generating data no longer reproduces the table; intended for
    detector tests of the verifiers.
    """
    out = EHStructure.__new__(EHStructure)
    out.d, out.k, out.H, out.W, out.R = s.d, s.k, s.H, s.W, s.R
    table = dict(s.theta)
    table[(mu, nu)] = Superoperator(
        s.d, s.theta[(mu, nu)].matrix + eps * np.eye(s.d * s.d)
    )
    out.theta = table
    return out


def _mat_to_pairs(a: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def _pairs_to_mat(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def structure_to_json(s: EHStructure) -> str:
    """Serialize the generating data {d, k, H, W, R}; derived maps are
    always recomputed on load."""
    doc = {
        "d": s.d,
        "k": s.k,
        "H": _mat_to_pairs(s.H),
        "W": _mat_to_pairs(s.W),
        "R": _mat_to_pairs(s.R),
    }
    return json.dumps(doc, sort_keys=True)


def structure_from_json(text: str) -> EHStructure:
    doc = json.loads(text)
    s = EHStructure(_pairs_to_mat(doc["H"]), _pairs_to_mat(doc["W"]), _pairs_to_mat(doc["R"]))
    if s.d != doc["d"] or s.k != doc["k"]:
        raise ValueError("declared dimensions do not match matrix shapes")
    return s

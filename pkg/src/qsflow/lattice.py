"""Clock-shift matrix algebras on a finite periodic lattice window.

The infinite lattice of on-site M_N(C) factors is truncated to a finite box
with periodic boundary; all computed quantities are stable in the window
size once it exceeds twice the support diameter of the local operators,
because translated copies with disjoint support commute.  The window
algebra dimension N^(sites) is capped (default 64, superoperators
4096 x 4096) to keep everything desk-scale.
"""

from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .linalg import Superoperator, dagger, operator_norm
from .structure import EHStructure, combined_structure

__all__ = [
    "LatticeWindow",
    "LocalOperator",
    "clock_shift",
    "embed",
    "translate",
    "local_lindbladian",
    "matsui_seminorm",
    "check_commutator_condition",
    "build_uhf_flow_structures",
    "CommutatorReport",
    "window_to_json",
    "window_from_json",
]


@dataclass(frozen=True)
class LatticeWindow:
    """A periodic box of lattice sites, each carrying M_N(C)."""

    site_dim: int
    shape: tuple
    dim_cap: int = 64

    def __post_init__(self):
        object.__setattr__(self, "shape", tuple(int(s) for s in self.shape))
        if self.site_dim < 2 or any(s < 1 for s in self.shape):
            raise ValueError("need site_dim >= 2 and positive box sizes")
        if self.algebra_dim > self.dim_cap:
            raise ValueError(
                f"window algebra dimension {self.algebra_dim} exceeds cap {self.dim_cap}"
            )

    @property
    def n_sites(self) -> int:
        return int(np.prod(self.shape))

    @property
    def algebra_dim(self) -> int:
        return self.site_dim**self.n_sites

    def sites(self):
        """All sites in lexicographic order."""
        return list(itertools.product(*(range(s) for s in self.shape)))

    def site_index(self, site) -> int:
        site = tuple(site)
        idx = 0
        for coord, size in zip(site, self.shape):
            idx = idx * size + (coord % size)
        return idx

    def wrap(self, site):
        return tuple(c % s for c, s in zip(site, self.shape))


@dataclass(frozen=True)
class LocalOperator:
    """An operator on the window algebra with its declared support."""

    matrix: np.ndarray
    support: frozenset = field(default_factory=frozenset)


def clock_shift(n: int):
    """Clock U = diag(1, w, .., w^(N-1)) and shift V e_j = e_{j+1 mod N};
    both order N and UV = w VU with w = exp(2 pi i / N)."""
    if n < 2:
        raise ValueError("need N >= 2")
    omega = np.exp(2j * np.pi / n)
    u = np.diag(omega ** np.arange(n))
    v = np.zeros((n, n), dtype=complex)
    for j in range(n):
        v[(j + 1) % n, j] = 1.0
    return u, v


def embed(a: np.ndarray, site, window: LatticeWindow) -> LocalOperator:
    """identity (x) .. (x) a (x) .. (x) identity at the given site."""
    a = np.asarray(a, dtype=complex)
    n = window.site_dim
    if a.shape != (n, n):
        raise ValueError(f"on-site matrix must be {n} x {n}")
    site = window.wrap(tuple(site))
    if len(site) != len(window.shape):
        raise ValueError("site arity does not match the lattice dimension")
    idx = window.site_index(site)
    before, after = n**idx, n ** (window.n_sites - idx - 1)
    mat = np.kron(np.kron(np.eye(before), a), np.eye(after))
    support = frozenset() if np.allclose(a, np.eye(n), atol=1e-14) else frozenset([site])
    return LocalOperator(mat, support)


def translate(x: LocalOperator, k, window: LatticeWindow) -> LocalOperator:
    """The lattice translation automorphism: site j -> j + k periodically."""
    k = tuple(k)
    n = window.n_sites
    sd = window.site_dim
    sites = window.sites()
    perm = [window.site_index(window.wrap(tuple(c - kc for c, kc in zip(s, k)))) for s in sites]
    # permute tensor factors of rows and columns
    t = x.matrix.reshape([sd] * (2 * n))
    axes = perm + [n + p for p in perm]
    moved = np.transpose(t, axes=axes)
    support = frozenset(window.wrap(tuple(c + kc for c, kc in zip(s, k))) for s in x.support)
    return LocalOperator(moved.reshape(x.matrix.shape), support)


def _site_lindblad_terms(r_ops) -> Superoperator:
    """sum_l ( r* x r - (1/2){r*r, x} ) as a superoperator."""
    dim = r_ops[0].shape[0]
    ident = np.eye(dim)
    m = np.zeros((dim * dim, dim * dim), dtype=complex)
    for r in r_ops:
        rd = dagger(r)
        rr = rd @ r
        m += np.kron(r.T, rd)  # x -> r* x r  has matrix kron(r.T, r*)
        m -= 0.5 * np.kron(ident, rr)
        m -= 0.5 * np.kron(rr.T, ident)
    return Superoperator(dim, m)


def local_lindbladian(r_list, window: LatticeWindow) -> Superoperator:
    """sum over window sites k of tau_k L_0 tau_{-k}, where
    L_0(x) = sum_l (r_l* x r_l) - (1/2){sum_l r_l* r_l, x}."""
    ops = []
    for k in window.sites():
        for r in r_list:
            ops.append(translate(r, k, window).matrix)
    return _site_lindblad_terms(ops)


def matsui_seminorm(x: LocalOperator, window: LatticeWindow) -> float:
    """sum over sites j and (a, b) in Z_N x Z_N of
    || U_j^a V_j^b x (U_j^a V_j^b)* - x || in operator norm."""
    n = window.site_dim
    u, v = clock_shift(n)
    total = 0.0
    for site in window.sites():
        for a in range(n):
            for b in range(n):
                w = embed(np.linalg.matrix_power(u, a) @ np.linalg.matrix_power(v, b), site, window)
                total += operator_norm(w.matrix @ x.matrix @ dagger(w.matrix) - x.matrix)
    return total


@dataclass(frozen=True)
class CommutatorReport:
    max_eigenvalue: float
    tolerance: float
    passed: bool


def check_commutator_condition(r: LocalOperator, tol: float = 1e-10) -> CommutatorReport:
    """Largest eigenvalue of r r* - r* r; the dissipativity hypothesis asks
    for it to be nonpositive."""
    m = r.matrix
    comm = m @ dagger(m) - dagger(m) @ m
    top = float(np.linalg.eigvalsh((comm + dagger(comm)) / 2)[-1])
    return CommutatorReport(max_eigenvalue=top, tolerance=tol, passed=top <= tol)


def build_uhf_flow_structures(r_list, window: LatticeWindow):
    """One single-channel structure per (operator, site) with H = 0, W = 1
    and R = tau_j(r_m), so delta(x) = [x, tau_j(r_m)]; plus their fold into
    one combined structure (channels ordered operator-major, then site
    lexicographic).  Returns (structures, combined)."""
    for m, r in enumerate(r_list):
        rep = check_commutator_condition(r)
        if not rep.passed:
            warnings.warn(
                f"operator {m}: [r, r*] has positive eigenvalue {rep.max_eigenvalue:.3e}; "
                "the dissipativity hypothesis fails",
                stacklevel=2,
            )
    dim = window.algebra_dim
    h0 = np.zeros((dim, dim))
    eye = np.eye(dim)
    structures = []
    for r in r_list:
        for site in window.sites():
            rk = translate(r, site, window).matrix
            structures.append(EHStructure(h0, eye, rk))
    combined = structures[0]
    for s in structures[1:]:
        combined = combined_structure(combined, s)
    return structures, combined


def _mat_pairs(a):
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def _pairs_mat(rows):
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def window_to_json(window: LatticeWindow, r_list) -> str:
    doc = {
        "N": window.site_dim,
        "d_lat": len(window.shape),
        "window": list(window.shape),
        "r_list": [
            {"matrix": _mat_pairs(r.matrix), "support": sorted(list(s) for s in r.support)}
            for r in r_list
        ],
    }
    return json.dumps(doc, sort_keys=True)


def window_from_json(text: str):
    doc = json.loads(text)
    window = LatticeWindow(doc["N"], tuple(doc["window"]))
    if len(window.shape) != doc["d_lat"]:
        raise ValueError("lattice dimension mismatch")
    r_list = [
        LocalOperator(_pairs_mat(entry["matrix"]), frozenset(tuple(s) for s in entry["support"]))
        for entry in doc["r_list"]
    ]
    for r in r_list:
        if r.matrix.shape != (window.algebra_dim, window.algebra_dim):
            raise ValueError("operator does not live on the window algebra")
    return window, r_list

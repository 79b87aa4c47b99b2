"""Monte-Carlo construction of group-valued processes as dyadic products.

Brownian motion on a compact matrix group is built from one-parameter
marginals: per dyadic slot of width 2^-n, independent Gaussian increments
feed one exponential factor per Lie-algebra direction (channel-major inside
each slot, slot-major overall).  Random walks on finitely generated
discrete groups are built the same way from paired Poisson increments.
Exact samplers of the limit laws (the heat expectation and a continuous
time jump chain) serve as oracles, and a bounded metric built from
separating matrix-entry functions measures Cauchy decay between coupled
consecutive dyadic levels.

Determinism: every sampler takes an explicit numpy Generator; batched
front-ends derive per-chunk Philox streams from (seed, chunk index) with a
fixed chunk size, so results are reproducible and chunks could run in
parallel without changing output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import dagger, expm, operator_norm
from .results import ResultTable

__all__ = [
    "LieGroupModel",
    "torus",
    "su2",
    "so3",
    "heat_expectation_oracle",
    "sample_lie_bm_trotter",
    "lie_bm_product",
    "lie_bm_batch",
    "rho_metric",
    "rho_metric_batch",
    "rho_convergence_diagnostic",
    "slot_widths",
    "coupled_gaussian_increments",
    "DiscreteGroupModel",
    "integer_lattice",
    "free_group",
    "heisenberg_group",
    "sample_group_walk_trotter",
    "walk_product",
    "group_walk_batch",
    "ctmc_walk_oracle",
    "ctmc_walk_batch",
    "matrix_samples_to_table",
    "word_samples_to_table",
    "philox_stream",
]

_CHUNK = 20000  # fixed batching unit for derived rng streams


def philox_stream(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream #index derived from a master seed (Philox4x64)."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))
    )


# ---------------------------------------------------------------------------
# Compact matrix groups
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LieGroupModel:
    """A matrix group given by anti-self-adjoint generators of its algebra."""

    name: str
    dim: int
    basis: tuple

    def __post_init__(self):
        for chi in self.basis:
            if chi.shape != (self.dim, self.dim):
                raise ValueError("generator shape mismatch")
            if operator_norm(chi + dagger(chi)) > 1e-12 * max(1.0, operator_norm(chi)):
                raise ValueError("generators must be anti-self-adjoint")

    @property
    def channels(self) -> int:
        return len(self.basis)


def torus() -> LieGroupModel:
    """U(1) in its defining representation; exp(w chi) = e^{iw}."""
    return LieGroupModel("torus", 1, (np.array([[1j]]),))


def su2() -> LieGroupModel:
    """SU(2) with generators (i/2) sigma_ell, so sum chi^2 = -(3/4) 1."""
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    return LieGroupModel("su2", 2, tuple(0.5j * s for s in (sx, sy, sz)))


def so3() -> LieGroupModel:
    """SO(3) with the standard real antisymmetric rotation generators."""
    l1 = np.array([[0, 0, 0], [0, 0, -1], [0, 1, 0]], dtype=complex)
    l2 = np.array([[0, 0, 1], [0, 0, 0], [-1, 0, 0]], dtype=complex)
    l3 = np.array([[0, -1, 0], [1, 0, 0], [0, 0, 0]], dtype=complex)
    return LieGroupModel("so3", 3, (l1, l2, l3))


def heat_expectation_oracle(g: LieGroupModel, t: float) -> np.ndarray:
    """E[pi(g_t)] = exp((t/2) sum_ell chi_ell^2) for the limiting process."""
    acc = np.zeros((g.dim, g.dim), dtype=complex)
    for chi in g.basis:
        acc += chi @ chi
    return expm(0.5 * t * acc)


def slot_widths(t: float, level: int) -> np.ndarray:
    """Widths of the dyadic slots covering [0, t]; last slot may be partial."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    width = 2.0 ** (-level)
    full = int(np.floor(t / width + 1e-12))
    rem = t - full * width
    if rem > 1e-12 * max(1.0, t):
        return np.array([width] * full + [rem])
    return np.full(full, width)


def _basis_eig(g: LieGroupModel):
    """Eigendecompositions i*lambda, Q of each generator, for batched exp."""
    out = []
    for chi in g.basis:
        lam, q = np.linalg.eigh(-1j * chi)  # chi = i (q lam q*)
        out.append((lam, q))
    return out


def lie_bm_product(g: LieGroupModel, dw: np.ndarray, order: str = "interleaved") -> np.ndarray:
    """Ordered product of exp(dw[l, i] chi_i) from given increments.

    order="interleaved": slot-major outer loop, channel-major inside each
    slot.  order="channel-blocks": one full channel path at a time, which
    telescopes to exp(W_t chi_i) factors.
    """
    if order not in ("interleaved", "channel-blocks"):
        raise ValueError(f"unknown order {order!r}")
    x = np.eye(g.dim, dtype=complex)
    if order == "interleaved":
        for l in range(dw.shape[0]):
            for i, chi in enumerate(g.basis):
                x = x @ expm(dw[l, i] * chi)
    else:
        for i, chi in enumerate(g.basis):
            for l in range(dw.shape[0]):
                x = x @ expm(dw[l, i] * chi)
    return x


def sample_lie_bm_trotter(
    g: LieGroupModel, t: float, level: int, rng, order: str = "interleaved"
) -> np.ndarray:
    """One sample of the level-n product with N(0, slot width) increments."""
    widths = slot_widths(t, level)
    if widths.size == 0:
        return np.eye(g.dim, dtype=complex)
    dw = rng.standard_normal((widths.size, g.channels)) * np.sqrt(widths)[:, None]
    return lie_bm_product(g, dw, order=order)


def lie_bm_batch(g: LieGroupModel, dw: np.ndarray) -> np.ndarray:
    """Interleaved products for a whole batch of increment arrays.

    dw has shape (samples, slots, channels); returns (samples, dim, dim).
    Uses the spectral form of each generator so a slot factor for the whole
    batch is three small matmuls.
    """
    samples = dw.shape[0]
    eig = _basis_eig(g)
    x = np.broadcast_to(np.eye(g.dim, dtype=complex), (samples, g.dim, g.dim)).copy()
    for l in range(dw.shape[1]):
        for i, (lam, q) in enumerate(eig):
            phases = np.exp(1j * np.outer(dw[:, l, i], lam))
            factor = np.einsum("jk,nk,lk->njl", q, phases, q.conj(), optimize=True)
            x = x @ factor
    return x


def coupled_gaussian_increments(rng, samples: int, channels: int, t: float, top_level: int) -> np.ndarray:
    """Level-`top_level` Gaussian increments; coarser levels follow by
    pairwise summation, which is exactly the common-noise coupling."""
    widths = slot_widths(t, top_level)
    return rng.standard_normal((samples, widths.size, channels)) * np.sqrt(widths)[None, :, None]


def aggregate_increments(dw: np.ndarray) -> np.ndarray:
    """Sum adjacent slot pairs: increments one dyadic level down."""
    if dw.shape[1] % 2 != 0:
        raise ValueError("slot count must be even to aggregate")
    return dw[:, 0::2, :] + dw[:, 1::2, :]


def rho_metric(g: LieGroupModel, a: np.ndarray, b: np.ndarray) -> float:
    """Bounded metric from the separating entry functions of the
    representation: sum_m 2^-m |phi_m(a)-phi_m(b)| / (1+|phi_m(a)-phi_m(b)|),
    phi_m running over Re and Im of matrix entries in row-major order."""
    return float(rho_metric_batch(g, a[None], b[None])[0])


def rho_metric_batch(g: LieGroupModel, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = (a - b).reshape(a.shape[0], -1)
    parts = np.concatenate([diff.real, diff.imag], axis=1)
    m = parts.shape[1]
    weights = 0.5 ** np.arange(1, m + 1)
    absd = np.abs(parts)
    return (weights[None, :] * absd / (1.0 + absd)).sum(axis=1)


def rho_convergence_diagnostic(
    g: LieGroupModel, t: float, levels, samples: int, rng
) -> ResultTable:
    """Rows (n, E[rho(X^(n), X^(n+1))], std_error) on coupled paths.

    The level-(n+1) increments refine the level-n ones (pairwise sums), so
    the column measures the Cauchy decay of the dyadic product scheme.
    """
    levels = list(levels)
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError("levels must be strictly increasing")
    top = max(levels) + 1
    if abs(t * 2 ** min(levels) - round(t * 2 ** min(levels))) > 1e-9:
        raise ValueError("t must be dyadic at the coarsest level")
    dw = coupled_gaussian_increments(rng, samples, g.channels, t, top)
    per_level = {top: dw}
    for n in range(top - 1, min(levels) - 1, -1):
        per_level[n] = aggregate_increments(per_level[n + 1])
    rows = []
    for n in levels:
        xa = lie_bm_batch(g, per_level[n])
        xb = lie_bm_batch(g, per_level[n + 1])
        dist = rho_metric_batch(g, xa, xb)
        mean = float(np.mean(dist))
        stderr = float(np.std(dist, ddof=1) / np.sqrt(samples))
        rows.append((int(n), mean, stderr))
    return ResultTable(
        columns=["level", "mean_rho", "std_error"],
        rows=rows,
        metadata={"t": t, "samples": samples, "group": g.name},
    )


# ---------------------------------------------------------------------------
# Discrete groups
# ---------------------------------------------------------------------------


class DiscreteGroupModel:
    """A finitely generated group with a symmetric torsion-free generator
    set g_1 .. g_k, g_1^{-1} .. g_k^{-1} and per-generator jump
    intensities (positive, length 2k; the i-th and (k+i)-th entries drive
    g_i and its inverse)."""

    name = "abstract"
    abelian = False

    def __init__(self, n_gen: int, intensities):
        lam = np.asarray(intensities, dtype=float).ravel()
        if lam.size != 2 * n_gen or np.any(lam <= 0):
            raise ValueError(f"need {2 * n_gen} positive intensities")
        self.n_gen = n_gen
        self.intensities = lam

    # element interface -----------------------------------------------------
    def identity(self):
        raise NotImplementedError

    def multiply(self, a, b):
        raise NotImplementedError

    def inverse(self, a):
        raise NotImplementedError

    def generator_power(self, i: int, z: int):
        """g_i^z for the i-th (0-based) generator pair."""
        raise NotImplementedError


class IntegerLatticeGroup(DiscreteGroupModel):
    abelian = True

    def __init__(self, dim: int, intensities):
        super().__init__(dim, intensities)
        self.name = f"Z^{dim}"
        self.dim = dim

    def identity(self):
        return (0,) * self.dim

    def multiply(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inverse(self, a):
        return tuple(-x for x in a)

    def generator_power(self, i, z):
        out = [0] * self.dim
        out[i] = z
        return tuple(out)


class FreeGroup(DiscreteGroupModel):
    """Elements are reduced words: tuples of nonzero signed generator
    labels, +-(i+1) for g_i^{+-1}."""

    def __init__(self, n_gen: int, intensities):
        super().__init__(n_gen, intensities)
        self.name = f"F_{n_gen}"

    def identity(self):
        return ()

    def multiply(self, a, b):
        word = list(a)
        for s in b:
            if word and word[-1] == -s:
                word.pop()
            else:
                word.append(s)
        return tuple(word)

    def inverse(self, a):
        return tuple(-s for s in reversed(a))

    def generator_power(self, i, z):
        if z == 0:
            return ()
        label = (i + 1) if z > 0 else -(i + 1)
        return (label,) * abs(z)


class HeisenbergGroup(DiscreteGroupModel):
    """Discrete Heisenberg group on triples (a, b, c) with
    (a,b,c)(a',b',c') = (a+a', b+b', c+c'+a*b')."""

    def __init__(self, intensities):
        super().__init__(2, intensities)
        self.name = "heisenberg"

    def identity(self):
        return (0, 0, 0)

    def multiply(self, x, y):
        return (x[0] + y[0], x[1] + y[1], x[2] + y[2] + x[0] * y[1])

    def inverse(self, x):
        return (-x[0], -x[1], -x[2] + x[0] * x[1])

    def generator_power(self, i, z):
        return (z, 0, 0) if i == 0 else (0, z, 0)


def integer_lattice(dim: int, intensities) -> IntegerLatticeGroup:
    return IntegerLatticeGroup(dim, intensities)


def free_group(n_gen: int, intensities) -> FreeGroup:
    return FreeGroup(n_gen, intensities)


def heisenberg_group(intensities) -> HeisenbergGroup:
    return HeisenbergGroup(intensities)


def walk_product(g: DiscreteGroupModel, dz: np.ndarray):
    """prod_slots prod_i g_i^{dz[l, i]} in slot-major, channel-minor order."""
    x = g.identity()
    for l in range(dz.shape[0]):
        for i in range(g.n_gen):
            z = int(dz[l, i])
            if z:
                x = g.multiply(x, g.generator_power(i, z))
    return x


def sample_group_walk_trotter(g: DiscreteGroupModel, t: float, level: int, rng):
    """One level-n sample: per slot and channel the exponent increment is
    the difference of two Poisson draws with the paired intensities."""
    widths = slot_widths(t, level)
    if widths.size == 0:
        return g.identity()
    lam = g.intensities
    up = rng.poisson(np.outer(widths, lam[: g.n_gen]))
    down = rng.poisson(np.outer(widths, lam[g.n_gen :]))
    return walk_product(g, up - down)


def _binned_jump_walks(g: DiscreteGroupModel, counts, slots, channels, samples: int):
    """Assemble per-sample words from sparse jump records binned to slots.

    counts[s] jumps belong to sample s; jump j sits in slot slots[j] on
    signed channel channels[j] (in [0, 2k)).  Net exponents are accumulated
    per (sample, slot, channel) before multiplying, which is exactly the
    slot-discretized product.
    """
    k = g.n_gen
    order = np.lexsort((channels % k, slots, np.repeat(np.arange(samples), counts)))
    slots_s = slots[order]
    chan_s = channels[order]
    signs = np.where(chan_s < k, 1, -1)
    pairs = chan_s % k
    bounds = np.concatenate([[0], np.cumsum(counts)])
    out = []
    for s in range(samples):
        lo, hi = bounds[s], bounds[s + 1]
        x = g.identity()
        j = lo
        while j < hi:
            slot, chan = slots_s[j], pairs[j]
            z = 0
            while j < hi and slots_s[j] == slot and pairs[j] == chan:
                z += int(signs[j])
                j += 1
            if z:
                x = g.multiply(x, g.generator_power(int(chan), z))
        out.append(x)
    return out


def group_walk_batch(g: DiscreteGroupModel, t: float, level: int, rng, samples: int):
    """Batch of level-n walk samples.

    Law-equivalent sparse construction: total jump counts per channel are
    Poisson(lambda * t), jump times are uniform, and jumps are binned to
    dyadic slots with net exponents per slot and channel (Poisson thinning
    makes this the same law as dense per-slot increments).  Requires
    t * 2^level to be an integer so slots have equal width.
    """
    n_slots_f = t * 2**level
    n_slots = int(round(n_slots_f))
    if abs(n_slots_f - n_slots) > 1e-9 or n_slots < 1:
        raise ValueError("t * 2^level must be a positive integer")
    lam = g.intensities
    counts_per_channel = rng.poisson(lam * t, size=(samples, lam.size))
    counts = counts_per_channel.sum(axis=1)
    total = int(counts.sum())
    channels = np.repeat(
        np.tile(np.arange(lam.size), samples), counts_per_channel.ravel()
    )
    slots = rng.integers(0, n_slots, size=total)
    return _binned_jump_walks(g, counts, slots, channels, samples)


def ctmc_walk_oracle(g: DiscreteGroupModel, t: float, rng):
    """Exact sampler of the limit: exponential holding times with total
    rate sum(lambda), jump generator chosen proportionally."""
    lam = g.intensities
    total = float(lam.sum())
    probs = lam / total
    x = g.identity()
    clock = rng.exponential(1.0 / total)
    while clock <= t:
        c = int(rng.choice(lam.size, p=probs))
        z = 1 if c < g.n_gen else -1
        x = g.multiply(x, g.generator_power(c % g.n_gen, z))
        clock += rng.exponential(1.0 / total)
    return x


def matrix_samples_to_table(xs: np.ndarray, metadata: dict | None = None) -> ResultTable:
    """One row per trajectory: flattened Re/Im of the group element."""
    dim = xs.shape[1]
    cols = ["trajectory"]
    for i in range(dim):
        for j in range(dim):
            cols += [f"re_{i}{j}", f"im_{i}{j}"]
    rows = []
    for n, x in enumerate(xs):
        row = [n]
        for i in range(dim):
            for j in range(dim):
                row += [float(x[i, j].real), float(x[i, j].imag)]
        rows.append(tuple(row))
    return ResultTable(columns=cols, rows=rows, metadata=metadata or {})


def word_samples_to_table(elements, metadata: dict | None = None) -> ResultTable:
    """One row per trajectory: the element flattened to a string key."""
    rows = [(n, repr(e)) for n, e in enumerate(elements)]
    return ResultTable(columns=["trajectory", "element"], rows=rows, metadata=metadata or {})


def ctmc_walk_batch(g: DiscreteGroupModel, t: float, rng, samples: int):
    """Batch sampler of the limit law (Poisson number of uniform jump
    times, i.i.d. channels), equivalent to the holding-time chain."""
    lam = g.intensities
    total_rate = float(lam.sum())
    counts = rng.poisson(total_rate * t, size=samples)
    total = int(counts.sum())
    channels = rng.choice(lam.size, p=lam / total_rate, size=total)
    times = rng.random(total)
    # order jumps within each sample by time
    order = np.lexsort((times, np.repeat(np.arange(samples), counts)))
    chan_s = channels[order]
    bounds = np.concatenate([[0], np.cumsum(counts)])
    k = g.n_gen
    out = []
    for s in range(samples):
        x = g.identity()
        for j in range(bounds[s], bounds[s + 1]):
            c = int(chan_s[j])
            x = g.multiply(x, g.generator_power(c % k, 1 if c < k else -1))
        out.append(x)
    return out

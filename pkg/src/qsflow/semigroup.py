"""Quantum dynamical semigroups e^{tL} and Trotter-Kato splitting experiments.

The error norm of the Trotter tables is, by default, the operator norm of
the superoperator-matrix difference: the worst case over unit
(Hilbert-Schmidt norm) algebra elements.  Trace and Frobenius variants of
the same matrix difference are selectable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    Superoperator,
    expm,
    ginibre,
    hs_norm,
    operator_norm,
    trace_norm,
)
from .results import ResultTable
from .structure import EHStructure, perturbed_generator, verify_weak_dissipativity

__all__ = [
    "SemigroupExperiment",
    "semigroup",
    "trotter_product_semigroup",
    "trotter_error_table",
    "trace_norm_growth_check",
    "l2_contraction_check",
    "estimate_order",
    "GrowthReport",
    "ContractionReport",
]

_NORM_FNS = {"operator": operator_norm, "trace": trace_norm, "hs": hs_norm}

# Errors below this are treated as exact and excluded from order estimation.
_ORDER_FLOOR = 1e-12


@dataclass
class SemigroupExperiment:
    generators: list
    t: float
    n_values: list
    norm: str = "operator"

    def __post_init__(self):
        if self.t <= 0:
            raise ValueError("t must be positive")
        if any(b <= a for a, b in zip(self.n_values, self.n_values[1:])):
            raise ValueError("n_values must be strictly increasing")
        if self.norm not in _NORM_FNS:
            raise ValueError(f"unknown norm {self.norm!r}")


def semigroup(l: Superoperator, t: float) -> Superoperator:
    """e^{tL} as a superoperator.

    For generators of structure type the result is unital and completely
    positive.  Raises OverflowError once ``t * norm(L)`` exceeds the
    scaling budget of expm (about 2^60 * 5.37 in 1-norm).
    """
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    return Superoperator(l.dim, expm(t * l.matrix))


def trotter_product_semigroup(a: Superoperator, b: Superoperator, t: float, n: int) -> Superoperator:
    """(e^{tA/n} e^{tB/n})^n; within each slot B acts first, then A."""
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    if n < 1:
        raise ValueError("n must be >= 1")
    slot = expm(t * a.matrix / n) @ expm(t * b.matrix / n)
    return Superoperator(a.dim, np.linalg.matrix_power(slot, n))


def estimate_order(ns, errors) -> list:
    """Per-row convergence order from consecutive error ratios.

    Row i compares against row i-1; the first row and rows whose errors sit
    at round-off get nan.
    """
    out = [float("nan")]
    for i in range(1, len(ns)):
        e0, e1 = errors[i - 1], errors[i]
        if e0 <= _ORDER_FLOOR or e1 <= _ORDER_FLOOR:
            out.append(float("nan"))
        else:
            out.append(float(np.log(e0 / e1) / np.log(ns[i] / ns[i - 1])))
    return out


def trotter_error_table(exp: SemigroupExperiment) -> ResultTable:
    """Rows (n, error, estimated_order) against the exact e^{t(A+B)}."""
    if len(exp.generators) != 2:
        raise ValueError("exactly two generators required")
    a, b = exp.generators
    exact = semigroup(a + b, exp.t)
    norm_fn = _NORM_FNS[exp.norm]
    errors = []
    for n in exp.n_values:
        approx = trotter_product_semigroup(a, b, exp.t, n)
        errors.append(norm_fn(approx.matrix - exact.matrix))
    orders = estimate_order(exp.n_values, errors)
    rows = [(int(n), float(e), o) for n, e, o in zip(exp.n_values, errors, orders)]
    return ResultTable(
        columns=["n", "error", "estimated_order"],
        rows=rows,
        metadata={"t": exp.t, "norm": exp.norm},
    )


@dataclass
class GrowthReport:
    max_ratio: float
    growth_rate: float  # smallest M with max_ratio <= exp(t*M) at the probed t
    fitted_rate: float  # least-squares fit of log ratio over the t grid
    t: float
    contractive_case: bool
    passed: bool
    details: dict = field(default_factory=dict)


def trace_norm_growth_check(
    s: EHStructure,
    c: np.ndarray,
    d: np.ndarray,
    t: float,
    trials: int,
    rng=None,
    tol: float = 1e-9,
) -> GrowthReport:
    """Growth of ||e^{t L^{c,d}}(x)||_1 / ||x||_1 over random x.

    Reports the worst ratio at time t, the implied exponential rate, and a
    least-squares rate fitted on a small grid of times.  For c = d = 0 with
    a dissipative structure the map must be a trace-norm contraction and
    the check asserts ratio <= 1 + tol.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    c = np.asarray(c, dtype=complex).ravel()
    d = np.asarray(d, dtype=complex).ravel()
    if t <= 0:
        raise ValueError("t must be positive")
    gen = perturbed_generator(s, c, d)
    xs = [ginibre(rng, s.d) for _ in range(trials)]
    ts = [t * frac for frac in (0.25, 0.5, 0.75, 1.0)]
    max_log_ratio = []
    for ti in ts:
        prop = semigroup(gen, ti)
        worst = max(trace_norm(prop.apply(x)) / trace_norm(x) for x in xs)
        max_log_ratio.append(np.log(worst))
    max_ratio = float(np.exp(max_log_ratio[-1]))
    rate = float(max_log_ratio[-1] / t)
    # log ratio ~ M * t through the origin
    tarr = np.asarray(ts)
    fitted = float(np.dot(tarr, max_log_ratio) / np.dot(tarr, tarr))
    contractive_case = bool(
        np.allclose(c, 0) and np.allclose(d, 0)
        and verify_weak_dissipativity(s, trials=max(trials, 20), rng=rng).passed
    )
    passed = max_ratio <= 1.0 + tol if contractive_case else np.isfinite(rate)
    return GrowthReport(
        max_ratio=max_ratio,
        growth_rate=rate,
        fitted_rate=fitted,
        t=t,
        contractive_case=contractive_case,
        passed=bool(passed),
        details={"t_grid": ts, "log_ratios": [float(v) for v in max_log_ratio]},
    )


@dataclass
class ContractionReport:
    max_ratio: float
    dissipative: bool
    tolerance: float
    passed: bool


def l2_contraction_check(
    s: EHStructure, t: float, trials: int, rng=None, tol: float = 1e-9
) -> ContractionReport:
    """max ||T_t(y)||_2 / ||y||_2 over random y; a contraction whenever the
    weak dissipativity hypothesis holds.  The ratio is reported either way."""
    rng = np.random.default_rng(0) if rng is None else rng
    dissipative = verify_weak_dissipativity(s, trials=max(trials, 20), rng=rng).passed
    prop = semigroup(s.L, t)
    worst = 0.0
    for _ in range(trials):
        y = ginibre(rng, s.d)
        worst = max(worst, hs_norm(prop.apply(y)) / hs_norm(y))
    passed = (worst <= 1.0 + tol) if dissipative else True
    return ContractionReport(
        max_ratio=float(worst), dissipative=dissipative, tolerance=tol, passed=bool(passed)
    )

import numpy as np
import pytest

from qsflow.linalg import dagger, ginibre, haar_unitary, hermitian_ginibre, ip, operator_norm
from qsflow.flow import (
    FlowDiscretization,
    StepFunction,
    combined_flow_reference,
    exp_vector_overlap,
    flow_matrix_element,
    homomorphism_defect,
    hp_step_raw,
    hp_step_unitary,
    matrix_element_generator,
    trotter_flow_matrix_element,
)
from qsflow.semigroup import semigroup
from qsflow.structure import (
    build_inner_structure,
    combined_structure,
    random_inner_structure,
    trivial_structure,
)


def fixed_structure(seed=0, d=2, k=1, scale=0.6):
    return random_inner_structure(d, k, np.random.default_rng(seed), scale=scale)


# ---------------------------------------------------------------------------
# Dense reference: propagate full state vectors on h (x) slot_0 ... slot_{N-1}
# ---------------------------------------------------------------------------


def dense_state(u, xis):
    state = np.asarray(u, dtype=complex)
    for xi in xis:
        state = np.multiply.outer(xi, state)
    return state  # axes (slot_{N-1}, ..., slot_0, h)


def dense_apply_step(state, step, slot, d, nk, adjoint=False):
    n_slots = state.ndim - 1
    u4 = (dagger(step) if adjoint else step).reshape(nk, d, nk, d)
    moved = np.moveaxis(state, n_slots - 1 - slot, 0)
    tmp = np.tensordot(u4, moved, axes=([2, 3], [0, moved.ndim - 1]))
    tmp = np.moveaxis(tmp, 1, tmp.ndim - 1)
    return np.moveaxis(tmp, 0, n_slots - 1 - slot)


def dense_chain(state, step, d, nk, adjoint=False):
    n_slots = state.ndim - 1
    slots = range(n_slots - 1, -1, -1) if adjoint else range(n_slots)
    for j in slots:
        state = dense_apply_step(state, step, j, d, nk, adjoint=adjoint)
    return state


def dense_apply_x(state, x):
    return np.tensordot(state, x, axes=(state.ndim - 1, 1))


def slot_vectors(f, steps, k, h):
    out = []
    for j in range(steps):
        xi = np.zeros(1 + k, dtype=complex)
        xi[0] = 1.0
        if f is not None:
            xi[1:] = np.sqrt(h) * f.values[j]
        out.append(xi)
    return out


def dense_element(disc, x, u, v, f=None, g=None):
    d, k = disc.structure.d, disc.structure.k
    a = dense_state(u, slot_vectors(f, disc.steps, k, disc.h))
    b = dense_state(v, slot_vectors(g, disc.steps, k, disc.h))
    ua = dense_chain(a, disc.step_unitary, d, 1 + k)
    ub = dense_chain(b, disc.step_unitary, d, 1 + k)
    return ip(dense_apply_x(ua, x).ravel(), ub.ravel())


def dense_defect(disc, x, y, u, v, f=None, g=None):
    d, k = disc.structure.d, disc.structure.k
    step = disc.step_unitary

    def flow_apply(w, state):
        out = dense_chain(state, step, d, 1 + k)
        out = dense_apply_x(out, w)
        return dense_chain(out, step, d, 1 + k, adjoint=True)

    a = dense_state(u, slot_vectors(f, disc.steps, k, disc.h))
    b = dense_state(v, slot_vectors(g, disc.steps, k, disc.h))
    term1 = ip(flow_apply(x, a).ravel(), flow_apply(y, b).ravel())
    term2 = ip(flow_apply(dagger(y) @ x, a).ravel(), b.ravel())
    return abs(term1 - term2)


# ---------------------------------------------------------------------------


class TestStepFunction:
    def test_validation(self):
        with pytest.raises(ValueError):
            StepFunction(2, 1.0, np.zeros((3, 1)))
        with pytest.raises(ValueError):
            StepFunction(1, 1.0, np.array([[np.inf]]))

    def test_refine_preserves_values(self):
        f = StepFunction(1, 1.0, np.array([[1.0], [2.0]], dtype=complex))
        f2 = f.refine(3)
        assert f2.steps == 6
        assert np.array_equal(f2.values[:3], np.ones((3, 1)))

    def test_json_roundtrip(self):
        rng = np.random.default_rng(0)
        f = StepFunction(2, 0.5, ginibre(rng, 4, 2))
        f2 = StepFunction.from_json(f.to_json())
        assert f2.k == f.k and f2.horizon == f.horizon
        np.testing.assert_allclose(f2.values, f.values, atol=1e-16)


class TestStepUnitary:
    def test_free_case_exact(self):
        rng = np.random.default_rng(1)
        d, k = 2, 2
        w = haar_unitary(rng, k * d)
        s = build_inner_structure(np.zeros((d, d)), w, np.zeros((k * d, d)))
        step = hp_step_unitary(s, 0.1)
        expected = np.zeros(((1 + k) * d, (1 + k) * d), dtype=complex)
        expected[:d, :d] = np.eye(d)
        expected[d:, d:] = w
        assert np.array_equal(step, expected)

    def test_raw_defect_scales_three_halves(self):
        s = fixed_structure(seed=2, scale=1.0)
        defects = []
        hs = [2.0**-e for e in range(4, 11)]
        for h in hs:
            g = hp_step_raw(s, h)
            defects.append(operator_norm(dagger(g) @ g - np.eye(g.shape[0])))
        ratios = [defects[i] / defects[i + 2] for i in range(len(hs) - 2)]  # h vs h/4
        for r in ratios[2:]:
            assert r == pytest.approx(8.0, rel=0.25)

    def test_corrected_step_unitary(self):
        s = fixed_structure(seed=3)
        for h in (2.0**-4, 2.0**-7, 2.0**-10):
            step = hp_step_unitary(s, h)
            assert operator_norm(dagger(step) @ step - np.eye(step.shape[0])) <= 1e-12

    def test_nonpositive_h_rejected(self):
        s = fixed_structure(seed=4, scale=1.0)
        with pytest.raises(ValueError):
            hp_step_unitary(s, 0.0)

    def test_wide_h_range_stays_correctable(self):
        # G*G has diagonal blocks 1 + h^2 K*K and 1 + (h^2/4)(RR*)^2, so the
        # raw step never degenerates; the polar factor exists for any h.
        s = fixed_structure(seed=4, scale=1.0)
        for h in (1e-6, 0.1, 4.0, 100.0):
            step = hp_step_unitary(s, h)
            assert operator_norm(dagger(step) @ step - np.eye(step.shape[0])) <= 1e-12


class TestFlowMatrixElement:
    def test_identity_gives_discrete_overlap(self):
        s = fixed_structure(seed=5)
        disc = FlowDiscretization(s, 1.0, 16)
        rng = np.random.default_rng(6)
        u = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        f = StepFunction(1, 1.0, ginibre(rng, 16, 1))
        g = StepFunction(1, 1.0, ginibre(rng, 16, 1))
        got = flow_matrix_element(disc, np.eye(2), u, v, f, g)
        expected = ip(u, v) * exp_vector_overlap(f, g)
        assert abs(got - expected) <= 1e-12 * max(1.0, abs(expected))

    def test_dense_oracle_generic(self):
        s = fixed_structure(seed=7)
        disc = FlowDiscretization(s, 0.5, 3)
        rng = np.random.default_rng(8)
        x = ginibre(rng, 2)
        u = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        f = StepFunction(1, 0.5, ginibre(rng, 3, 1))
        g = StepFunction(1, 0.5, ginibre(rng, 3, 1))
        got = flow_matrix_element(disc, x, u, v, f, g)
        want = dense_element(disc, x, u, v, f, g)
        assert abs(got - want) <= 1e-12 * max(1.0, abs(want))

    def test_vacuum_converges_to_semigroup(self):
        s = fixed_structure(seed=9)
        rng = np.random.default_rng(10)
        x = ginibre(rng, 2)
        u = np.array([1.0, 0.5 - 0.5j])
        v = np.array([0.25j, 1.0])
        t = 1.0
        oracle = ip(semigroup(s.L, t).apply(x) @ u, v)
        errs = []
        steps_list = [2**e for e in range(5, 10)]
        for steps in steps_list:
            disc = FlowDiscretization(s, t, steps)
            errs.append(abs(flow_matrix_element(disc, x, u, v) - oracle))
        slope = np.polyfit(np.log(steps_list), np.log(errs), 1)[0]
        assert -slope >= 0.9

    def test_constant_functions_converge_to_twisted_semigroup(self):
        s = fixed_structure(seed=11)
        rng = np.random.default_rng(12)
        x = ginibre(rng, 2)
        u = np.array([0.3, 1.0 + 0.2j])
        v = np.array([1.0, -0.4j])
        c = np.array([0.4 - 0.3j])
        d_vec = np.array([-0.2 + 0.5j])
        t = 1.0
        gen = matrix_element_generator(s, c, d_vec)
        oracle = ip(semigroup(gen, t).apply(x) @ u, v)
        errs = []
        steps_list = [2**e for e in range(5, 10)]
        for steps in steps_list:
            disc = FlowDiscretization(s, t, steps)
            f = StepFunction.constant(c, t, steps)
            g = StepFunction.constant(d_vec, t, steps)
            errs.append(abs(flow_matrix_element(disc, x, u, v, f, g) - oracle))
        slope = np.polyfit(np.log(steps_list), np.log(errs), 1)[0]
        assert -slope >= 0.9
        assert errs[-1] <= 1e-2

    def test_time_orientation_against_ordered_twisted_semigroups(self):
        # piecewise-constant f, g with different halves: the limit element is
        # the composition of the two twisted semigroups with the LATER
        # interval acting first on x (innermost), i.e. the superoperator
        # product expm(h G_first) @ expm(h G_second).
        s = fixed_structure(seed=50)
        rng = np.random.default_rng(51)
        x = ginibre(rng, 2)
        u = np.array([1.0, -0.2 + 0.1j])
        v = np.array([0.4j, 1.0])
        c1, c2 = np.array([0.5 - 0.1j]), np.array([-0.3 + 0.4j])
        d1, d2 = np.array([0.2 + 0.3j]), np.array([0.6j])
        t = 1.0
        g1 = matrix_element_generator(s, c1, d1).matrix
        g2 = matrix_element_generator(s, c2, d2).matrix
        from qsflow.linalg import expm as mexp

        prod = mexp(0.5 * t * g1) @ mexp(0.5 * t * g2)
        oracle = ip((prod @ x.flatten(order="F")).reshape(2, 2, order="F") @ u, v)
        wrong = mexp(0.5 * t * g2) @ mexp(0.5 * t * g1)
        anti_oracle = ip((wrong @ x.flatten(order="F")).reshape(2, 2, order="F") @ u, v)
        assert abs(oracle - anti_oracle) > 1e-3  # orientation actually matters here
        errs = []
        for steps in (64, 128, 256, 512):
            half = steps // 2
            fvals = np.vstack([np.tile(c1, (half, 1)), np.tile(c2, (half, 1))])
            gvals = np.vstack([np.tile(d1, (half, 1)), np.tile(d2, (half, 1))])
            disc = FlowDiscretization(s, t, steps)
            got = flow_matrix_element(
                disc, x, u, v, StepFunction(1, t, fvals), StepFunction(1, t, gvals)
            )
            errs.append(abs(got - oracle))
        slope = np.polyfit(np.log([64, 128, 256, 512]), np.log(errs), 1)[0]
        assert -slope >= 0.9
        assert errs[-1] <= 1e-2

    def test_split_composition_with_nonconstant_f(self):
        s = fixed_structure(seed=52)
        rng = np.random.default_rng(53)
        x = ginibre(rng, 2)
        from qsflow.flow import _heisenberg_chain

        f = StepFunction(1, 1.0, ginibre(rng, 8, 1))
        g = StepFunction(1, 1.0, ginibre(rng, 8, 1))
        disc = FlowDiscretization(s, 1.0, 8)
        full = _heisenberg_chain(disc, x, f, g)
        half = FlowDiscretization(s, 0.5, 4)

        def restrict(sf, lo, hi):
            return StepFunction(1, 0.5, sf.values[lo:hi])

        part = _heisenberg_chain(half, x, restrict(f, 4, 8), restrict(g, 4, 8))
        part = _heisenberg_chain(half, part, restrict(f, 0, 4), restrict(g, 0, 4))
        assert np.array_equal(full, part)

    def test_adjointness(self):
        s = fixed_structure(seed=13)
        disc = FlowDiscretization(s, 0.5, 8)
        rng = np.random.default_rng(14)
        x = ginibre(rng, 2)
        u = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        f = StepFunction(1, 0.5, ginibre(rng, 8, 1))
        g = StepFunction(1, 0.5, ginibre(rng, 8, 1))
        lhs = flow_matrix_element(disc, dagger(x), u, v, f, g)
        rhs = np.conj(flow_matrix_element(disc, x, v, u, g, f))
        assert abs(lhs - rhs) <= 1e-10

    def test_discrete_cocycle_exact_composition(self):
        # Contract over [0, s+t] in one pass vs two passes over the same slots.
        s = fixed_structure(seed=15)
        disc = FlowDiscretization(s, 1.0, 8)
        rng = np.random.default_rng(16)
        x = ginibre(rng, 2)
        from qsflow.flow import _heisenberg_chain

        full = _heisenberg_chain(disc, x, None, None)
        # same slots split into [4:8] then [0:4]: identical op sequence
        half = FlowDiscretization(s, 0.5, 4)
        part = _heisenberg_chain(half, x, None, None)
        part = _heisenberg_chain(half, part, None, None)
        assert np.array_equal(full, part)

    def test_flow_level_complete_positivity(self):
        s = fixed_structure(seed=17)
        disc = FlowDiscretization(s, 0.5, 16)
        rng = np.random.default_rng(18)
        u = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        f = StepFunction(1, 0.5, 0.5 * ginibre(rng, 16, 1))
        xs = [np.eye(2), ginibre(rng, 2), ginibre(rng, 2), hermitian_ginibre(rng, 2)]
        gram = np.array(
            [
                [flow_matrix_element(disc, dagger(xb) @ xa, u, u, f, f) for xb in xs]
                for xa in xs
            ]
        ).T  # gram[a, b] = <j(x_b* x_a) u e(f), u e(f)>
        w = np.linalg.eigvalsh((gram + dagger(gram)) / 2)
        assert w[0] >= -1e-8

    def test_grid_mismatch_rejected(self):
        s = fixed_structure(seed=19)
        disc = FlowDiscretization(s, 1.0, 8)
        with pytest.raises(ValueError):
            flow_matrix_element(disc, np.eye(2), np.ones(2), np.ones(2), StepFunction.zero(1, 1.0, 4))


class TestExpVectorSurrogate:
    def test_overlap_formula_and_limit(self):
        rng = np.random.default_rng(20)
        c = np.array([0.7 - 0.1j])
        d_vec = np.array([0.2 + 0.4j])
        exact = np.exp(np.vdot(d_vec, c))  # <f, g> = sum f conj(g)
        errs = []
        for steps in (8, 16, 32, 64, 128):
            f = StepFunction.constant(c, 1.0, steps)
            g = StepFunction.constant(d_vec, 1.0, steps)
            errs.append(abs(exp_vector_overlap(f, g) - exact))
        ratios = [errs[i] / errs[i + 1] for i in range(len(errs) - 1)]
        for r in ratios:
            assert r == pytest.approx(2.0, rel=0.3)  # O(h) deficit


class TestHomomorphismDefect:
    def test_identity_inputs_exact(self):
        s = fixed_structure(seed=21)
        rng = np.random.default_rng(22)
        u = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        u /= np.linalg.norm(u)
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        v /= np.linalg.norm(v)
        y = ginibre(rng, 2)
        y /= np.linalg.norm(y, 2)
        for steps in (8, 64, 256, 1024):
            disc = FlowDiscretization(s, 1.0, steps)
            assert homomorphism_defect(disc, np.eye(2), y, u, v) <= 1e-12
            assert homomorphism_defect(disc, y, np.eye(2), u, v) <= 1e-12

    def test_corrected_chain_defect_at_rounding(self):
        s = fixed_structure(seed=23)
        rng = np.random.default_rng(24)
        x, y = ginibre(rng, 2), ginibre(rng, 2)
        u = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        disc = FlowDiscretization(s, 1.0, 128)
        assert homomorphism_defect(disc, x, y, u, v) <= 1e-12

    def test_identity_inputs_with_step_functions(self):
        s = fixed_structure(seed=44)
        rng = np.random.default_rng(45)
        u = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        u /= np.linalg.norm(u)
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        v /= np.linalg.norm(v)
        y = ginibre(rng, 2)
        y /= np.linalg.norm(y, 2)
        for steps in (16, 128):
            disc = FlowDiscretization(s, 1.0, steps)
            f = StepFunction(1, 1.0, 0.5 * ginibre(rng, steps, 1))
            g = StepFunction(1, 1.0, 0.5 * ginibre(rng, steps, 1))
            assert homomorphism_defect(disc, np.eye(2), y, u, v, f, g) <= 1e-12
            assert homomorphism_defect(disc, y, np.eye(2), u, v, f, g) <= 1e-12

    def test_dense_oracle_corrected_chain_with_step_functions(self):
        s = fixed_structure(seed=46)
        rng = np.random.default_rng(47)
        x, y = ginibre(rng, 2), ginibre(rng, 2)
        u = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        f = StepFunction(1, 0.4, ginibre(rng, 4, 1))
        g = StepFunction(1, 0.4, ginibre(rng, 4, 1))
        disc = FlowDiscretization(s, 0.4, 4)
        got = homomorphism_defect(disc, x, y, u, v, f, g)
        want = dense_defect(disc, x, y, u, v, f, g)
        assert abs(got - want) <= 1e-12

    def test_dense_oracle_raw_chain(self):
        s = fixed_structure(seed=25)
        rng = np.random.default_rng(26)
        x, y = ginibre(rng, 2), ginibre(rng, 2)
        u = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        f = StepFunction(1, 0.4, ginibre(rng, 3, 1))
        g = StepFunction(1, 0.4, ginibre(rng, 3, 1))
        disc = FlowDiscretization(s, 0.4, 3, unitarize=False)
        got = homomorphism_defect(disc, x, y, u, v, f, g)
        want = dense_defect(disc, x, y, u, v, f, g)
        assert got == pytest.approx(want, rel=1e-9, abs=1e-13)
        assert want > 1e-6  # genuinely nonzero for the raw chain

    def test_raw_chain_defect_refines_at_first_order(self):
        s = fixed_structure(seed=27)
        rng = np.random.default_rng(28)
        x, y = ginibre(rng, 2), ginibre(rng, 2)
        u = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        steps_list = [2**e for e in range(5, 10)]
        defects = [
            homomorphism_defect(FlowDiscretization(s, 1.0, n, unitarize=False), x, y, u, v)
            for n in steps_list
        ]
        slope = np.polyfit(np.log(steps_list), np.log(defects), 1)[0]
        assert -slope >= 0.9

    def test_broken_step_exceeds_corrected(self):
        s = fixed_structure(seed=29, scale=1.0)
        rng = np.random.default_rng(30)
        x, y = ginibre(rng, 2), ginibre(rng, 2)
        u = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        broken = homomorphism_defect(
            FlowDiscretization(s, 1.0, 8, unitarize=False), x, y, u, v
        )
        corrected = homomorphism_defect(FlowDiscretization(s, 1.0, 8), x, y, u, v)
        assert broken > 100 * corrected


class TestTrotterFlow:
    def test_trivial_second_flow_reduces_to_first(self):
        s1 = fixed_structure(seed=31)
        s2 = trivial_structure(2, 1)
        rng = np.random.default_rng(32)
        x = ginibre(rng, 2)
        u = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        level, m, t = 3, 4, 1.0
        vals = np.zeros((t and int(t * 2**level), 2), dtype=complex)
        vals[:, 0] = 0.3 - 0.2j  # only flow-1 channels active
        f = StepFunction(2, t, vals)
        got = trotter_flow_matrix_element(s1, s2, t, level, x, u, v, f, f, substeps=m)
        disc = FlowDiscretization(s1, t, int(t * 2**level) * m)
        f1 = f.channel_slice(0, 1).refine(m)
        want = flow_matrix_element(disc, x, u, v, f1, f1)
        assert abs(got - want) <= 1e-12 * max(1.0, abs(want))

    def test_vacuum_converges_to_summed_generator(self):
        s1 = fixed_structure(seed=33)
        s2 = fixed_structure(seed=34)
        rng = np.random.default_rng(35)
        x = ginibre(rng, 2)
        u = np.array([1.0, -0.3j])
        v = np.array([0.5, 1.0 + 0.1j])
        t = 1.0
        oracle = ip(semigroup(s1.L + s2.L, t).apply(x) @ u, v)
        errs = []
        for level in (2, 3, 4, 5, 6):
            got = trotter_flow_matrix_element(s1, s2, t, level, x, u, v, substeps=4)
            errs.append(abs(got - oracle))
        assert errs[-1] < errs[0]
        slope = np.polyfit(np.log([2**l for l in (2, 3, 4, 5, 6)]), np.log(errs), 1)[0]
        assert -slope >= 0.8

    def test_levels_cauchy_and_match_combined_reference(self):
        s1 = fixed_structure(seed=36)
        s2 = fixed_structure(seed=37)
        rng = np.random.default_rng(38)
        x = ginibre(rng, 2)
        u = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        t, m = 1.0, 4
        # alternating one-channel-at-a-time values on the level-2 grid
        base = np.zeros((4, 2), dtype=complex)
        base[0, 0] = 0.5
        base[1, 1] = -0.4 + 0.2j
        base[2, 0] = 0.3j
        base[3, 1] = 0.25
        levels = [2, 3, 4, 5, 6]
        vals = {}
        for n in levels:
            f = StepFunction(2, t, base).refine(2 ** (n - 2))
            vals[n] = trotter_flow_matrix_element(s1, s2, t, n, x, u, v, f, f, substeps=m)
        diffs = [abs(vals[n] - vals[n + 1]) for n in levels[:-1]]
        assert all(d1 > d2 for d1, d2 in zip(diffs, diffs[1:]))
        # first-order Richardson across levels removes the splitting error;
        # the remainder is on the scale of the reference's own error
        extrapolated = 2 * vals[levels[-1]] - vals[levels[-2]]
        f_ref = StepFunction(2, t, base)
        ref_fine = combined_flow_reference(s1, s2, t, 1024, x, u, v, f_ref, f_ref)
        ref_coarse = combined_flow_reference(s1, s2, t, 512, x, u, v, f_ref, f_ref)
        ref_err = abs(ref_fine - ref_coarse)
        assert abs(extrapolated - ref_fine) <= 3 * ref_err + 1e-9

    def test_order_flag_changes_finite_level_value(self):
        s1 = fixed_structure(seed=39)
        s2 = fixed_structure(seed=40)
        rng = np.random.default_rng(41)
        x = ginibre(rng, 2)
        u, v = np.array([1.0, 0.0]), np.array([0.0, 1.0])
        a = trotter_flow_matrix_element(s1, s2, 1.0, 2, x, u, v, order="two-then-one")
        b = trotter_flow_matrix_element(s1, s2, 1.0, 2, x, u, v, order="one-then-two")
        assert a != b

    def test_non_dyadic_rejected(self):
        s1 = fixed_structure(seed=42)
        s2 = fixed_structure(seed=43)
        with pytest.raises(ValueError):
            trotter_flow_matrix_element(
                s1, s2, 0.3, 2, np.eye(2), np.ones(2), np.ones(2)
            )
        with pytest.raises(ValueError):
            trotter_flow_matrix_element(
                s1,
                s2,
                1.0,
                2,
                np.eye(2),
                np.ones(2),
                np.ones(2),
                f=StepFunction.zero(2, 1.0, 3),
            )

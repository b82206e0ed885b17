import math

import numpy as np
import pytest

from chemlab.model import (
    Constant,
    CosineBump,
    DomainKind,
    DomainSpec,
    FieldState,
    ModelParams,
    build_grid,
    cell_volumes,
    evaluate_initial,
    make_initial_data,
)
from chemlab.solver import (
    AdvectionScheme,
    SolverConfig,
    StepStatus,
    advance_to,
    cfl_dt,
    chemotaxis_divergence,
    gradient_magnitude_term,
    laplacian,
    max_face_gradient,
    rhs,
    simulate,
    step,
)

INTERVAL = DomainSpec(DomainKind.INTERVAL, (1.0,))
BOX2 = DomainSpec(DomainKind.BOX2, (1.0, 2.0))
BALL3 = DomainSpec(DomainKind.RADIAL_BALL, (1.0,), radial_n=3)

HEAT = ModelParams(chi=0.0, lam=0.0, mu=0.0, c=0.0, gamma=2.0, n=1)


def random_fields(dom, res, seed=0):
    grid = build_grid(dom, res)
    rng = np.random.default_rng(seed)
    u = rng.uniform(0.5, 2.0, grid.shape)
    v = rng.uniform(0.5, 2.0, grid.shape)
    return grid, u, v


def telescoping_defect(field_rate, grid, dom):
    w = cell_volumes(grid, dom)
    total = abs(float(np.sum(field_rate * w)))
    scale = float(np.sum(np.abs(field_rate) * w))
    return total / max(scale, 1e-300)


class TestLaplacian:
    def test_constant_field_gives_zero(self):
        for dom, res in ((INTERVAL, [16]), (BOX2, [8, 12]), (BALL3, [16])):
            grid = build_grid(dom, res)
            assert np.all(laplacian(np.full(grid.shape, 3.7), grid, dom) == 0.0)

    def test_cosine_second_order(self):
        errors = {}
        for res in (128, 256):
            grid = build_grid(INTERVAL, [res])
            x = grid.axis_centers(0)
            f = np.cos(np.pi * x)
            err = np.abs(laplacian(f, grid, INTERVAL) + np.pi**2 * f).max()
            errors[res] = err
        assert errors[128] / errors[256] == pytest.approx(4.0, rel=0.05)

    def test_radial_quadratic_exact_discrete_value(self):
        # f = r^2 on the 3-ball: the scheme returns exactly 6 + h^2/(2 r^2)
        grid = build_grid(BALL3, [64])
        r = grid.axis_centers(0)
        h = grid.spacing[0]
        lap = laplacian(r**2, grid, BALL3)
        interior = slice(1, -1)
        expected = 6.0 + h * h / (2.0 * r[interior] ** 2)
        assert np.allclose(lap[interior], expected, rtol=1e-12)

    def test_flux_sum_telescopes(self):
        for dom, res in ((INTERVAL, [32]), (BOX2, [16, 24]), (BALL3, [40])):
            grid, u, _ = random_fields(dom, res, seed=3)
            assert telescoping_defect(laplacian(u, grid, dom), grid, dom) < 1e-12

    def test_shape_mismatch(self):
        grid = build_grid(INTERVAL, [16])
        with pytest.raises(ValueError):
            laplacian(np.ones(17), grid, INTERVAL)


class TestChemotaxisDivergence:
    def test_constant_v_gives_zero(self):
        grid, u, _ = random_fields(INTERVAL, [32])
        out = chemotaxis_divergence(u, np.full(grid.shape, 2.0), grid, INTERVAL)
        assert np.all(out == 0.0)

    def test_constant_u_reduces_to_scaled_laplacian(self):
        for dom, res in ((INTERVAL, [64]), (BALL3, [64])):
            grid = build_grid(dom, res)
            x = grid.axis_centers(0)
            v = np.cos(np.pi * x)
            u = np.full(grid.shape, 1.7)
            for scheme in AdvectionScheme:
                out = chemotaxis_divergence(u, v, grid, dom, scheme)
                assert np.allclose(out, 1.7 * laplacian(v, grid, dom), rtol=1e-12)

    def test_flux_sum_telescopes_both_schemes(self):
        for dom, res in ((INTERVAL, [32]), (BOX2, [16, 24]), (BALL3, [40])):
            grid, u, v = random_fields(dom, res, seed=9)
            for scheme in AdvectionScheme:
                out = chemotaxis_divergence(u, v, grid, dom, scheme)
                assert telescoping_defect(out, grid, dom) < 1e-12


class TestGradientMagnitudeTerm:
    def test_constant_gives_zero(self):
        grid = build_grid(BOX2, [8, 8])
        out = gradient_magnitude_term(np.full(grid.shape, 2.0), grid, BOX2, 1.5)
        assert np.all(out == 0.0)

    def test_linear_field_interior_slope_one(self):
        grid = build_grid(INTERVAL, [64])
        u = grid.axis_centers(0).copy()
        out = gradient_magnitude_term(u, grid, INTERVAL, 2.0)
        assert np.allclose(out[1:-1], 1.0, rtol=1e-12)

    def test_gamma_two_below_gamma_one_for_small_gradients(self):
        grid = build_grid(INTERVAL, [64])
        x = grid.axis_centers(0)
        u = 0.1 * np.sin(2 * np.pi * x) + 1.0  # |grad u| <= 0.2 pi < 1
        g1 = gradient_magnitude_term(u, grid, INTERVAL, 1.0)
        g2 = gradient_magnitude_term(u, grid, INTERVAL, 2.0)
        assert np.all(g2 <= g1)

    def test_gamma_out_of_range(self):
        grid = build_grid(INTERVAL, [8])
        with pytest.raises(ValueError):
            gradient_magnitude_term(np.ones(8), grid, INTERVAL, 2.5)


class TestRhs:
    def test_homogeneous_steady_state(self):
        params = ModelParams(chi=0.7, lam=2.0, mu=0.5, c=0.3, gamma=1.5, n=1)
        grid = build_grid(INTERVAL, [32])
        state = FieldState(
            u=np.full(grid.shape, params.lam / params.mu),
            v=np.zeros(grid.shape),
            t=0.0,
        )
        du, dv = rhs(state, params, grid, INTERVAL)
        assert np.abs(du).max() == 0.0 and np.abs(dv).max() == 0.0

    def test_pure_heat_decouples(self):
        grid, u, v = random_fields(INTERVAL, [32], seed=1)
        state = FieldState(u=u, v=v, t=0.0)
        du, _ = rhs(state, HEAT, grid, INTERVAL)
        assert np.array_equal(du, laplacian(u, grid, INTERVAL))

    def test_conservation_identity(self):
        params = ModelParams(chi=0.4, lam=1.0, mu=0.8, c=0.2, gamma=1.7, n=3)
        for dom, res in ((INTERVAL, [48]), (BOX2, [12, 20]), (BALL3, [48])):
            grid, u, v = random_fields(dom, res, seed=21)
            w = cell_volumes(grid, dom)
            state = FieldState(u=u, v=v, t=0.0)
            du, _ = rhs(state, params, grid, dom)
            source = (
                params.lam * u - params.mu * u**2
                - params.c * gradient_magnitude_term(u, grid, dom, params.gamma)
            )
            lhs = float(np.sum(du * w))
            rhs_sum = float(np.sum(source * w))
            scale = max(float(np.sum(np.abs(du) * w)),
                        float(np.sum(np.abs(source) * w)))
            assert abs(lhs - rhs_sum) <= 1e-12 * scale


class TestStep:
    def test_steady_state_unchanged(self):
        params = ModelParams(chi=0.7, lam=2.0, mu=0.5, c=0.3, gamma=1.5, n=1)
        grid = build_grid(INTERVAL, [32])
        state = FieldState(
            u=np.full(grid.shape, 4.0), v=np.zeros(grid.shape), t=0.0
        )
        out = step(state, params, grid, INTERVAL, SolverConfig(t_end=1.0))
        assert out.status is StepStatus.OK
        assert np.abs(out.state.u - 4.0).max() <= 1e-14
        assert np.abs(out.state.v).max() <= 1e-14

    def test_dt_respects_cfl_and_limit(self):
        grid = build_grid(INTERVAL, [64])
        state = FieldState(u=np.ones(64), v=np.ones(64), t=0.0)
        cfg = SolverConfig(t_end=1.0, cfl_safety=0.4)
        out = step(state, HEAT, grid, INTERVAL, cfg)
        h = grid.spacing[0]
        assert out.dt_used == pytest.approx(0.4 * h * h / 2.0, rel=1e-12)
        capped = step(state, HEAT, grid, INTERVAL, cfg, dt_limit=1e-7)
        assert capped.dt_used == 1e-7

    def test_dt_floor_hit(self):
        grid = build_grid(INTERVAL, [256])
        state = FieldState(u=np.ones(256), v=np.ones(256), t=0.0)
        cfg = SolverConfig(t_end=1.0, dt_init=1e-2, dt_min=1e-3)
        out = step(state, HEAT, grid, INTERVAL, cfg)
        assert out.status is StepStatus.DT_FLOOR_HIT
        assert out.state.t == 0.0

    def test_blowup_detected_not_silent_nan(self):
        params = ModelParams(chi=0.0, lam=5.0, mu=1.0, c=0.0, gamma=2.0, n=1)
        grid = build_grid(INTERVAL, [16])
        state = FieldState(u=np.full(16, 1.2), v=np.full(16, 0.5), t=0.0)
        cfg = SolverConfig(t_end=10.0, blowup_threshold=1.3)
        outcome, _ = simulate(state, params, grid, INTERVAL, cfg)
        assert outcome.status is StepStatus.BLOWUP_DETECTED
        assert np.isfinite(outcome.state.u).all()

    def test_large_chi_run_never_silently_nan(self):
        params = ModelParams(chi=40.0, lam=5.0, mu=1.0, c=0.0, gamma=2.0, n=1)
        grid = build_grid(INTERVAL, [24])
        x = grid.axis_centers(0)
        state = FieldState(
            u=1.0 + 0.5 * np.cos(np.pi * x),
            v=0.5 + 0.4 * np.cos(np.pi * x),
            t=0.0,
        )
        cfg = SolverConfig(t_end=1.0, blowup_threshold=50.0)
        outcome, _ = simulate(state, params, grid, INTERVAL, cfg)
        assert outcome.status in (StepStatus.OK, StepStatus.BLOWUP_DETECTED)
        assert np.isfinite(outcome.state.u).all()
        assert np.isfinite(outcome.state.v).all()

    def ramp_setup(self):
        # V-shaped profile whose gradient damping pulls the near-zero valley
        # negative at the full CFL step
        grid = build_grid(INTERVAL, [64])
        x = grid.axis_centers(0)
        state = FieldState(
            u=0.001 + 2.0 * np.abs(x - 0.5), v=np.full(64, 0.5), t=0.0
        )
        params = ModelParams(chi=0.0, lam=0.0, mu=0.0, c=500.0, gamma=1.0, n=1)
        return grid, state, params

    def test_negativity_triggers_dt_halving_not_clipping(self):
        grid, state, params = self.ramp_setup()
        cfg = SolverConfig(t_end=1.0)
        full_dt = cfl_dt(state, params, grid, cfg)
        out = step(state, params, grid, INTERVAL, cfg)
        assert out.status is StepStatus.OK
        assert out.dt_used == full_dt / 2.0
        assert float(out.state.u.min()) >= -1e-12

    def test_negativity_fault_when_floor_blocks_halving(self):
        grid, state, params = self.ramp_setup()
        full_dt = cfl_dt(state, params, grid, SolverConfig(t_end=1.0))
        cfg = SolverConfig(t_end=1.0, dt_min=full_dt * 0.6)
        out = step(state, params, grid, INTERVAL, cfg)
        assert out.status is StepStatus.NEGATIVITY_FAULT
        assert out.dt_used == 0.0
        assert out.state is state

    def test_fast_path_matches_numpy_on_retry_and_fault(self):
        grid, state, params = self.ramp_setup()
        cfg = SolverConfig(t_end=1.0)
        full_dt = cfl_dt(state, params, grid, cfg)
        fast = advance_to(state, 2 * full_dt, params, grid, INTERVAL, cfg,
                          use_fast_path=True)
        slow = advance_to(state, 2 * full_dt, params, grid, INTERVAL, cfg,
                          use_fast_path=False)
        assert fast.status is slow.status is StepStatus.OK
        assert np.array_equal(fast.state.u, slow.state.u)
        cfg_fault = SolverConfig(t_end=1.0, dt_min=full_dt * 0.6)
        fast = advance_to(state, 2 * full_dt, params, grid, INTERVAL,
                          cfg_fault, use_fast_path=True)
        slow = advance_to(state, 2 * full_dt, params, grid, INTERVAL,
                          cfg_fault, use_fast_path=False)
        assert fast.status is slow.status is StepStatus.NEGATIVITY_FAULT


class TestSimulate:
    def heat_setup(self, res):
        grid = build_grid(INTERVAL, [res])
        data = make_initial_data(CosineBump(0.5, 1.0), Constant(1.0), INTERVAL, grid)
        return grid, evaluate_initial(data, grid)

    def test_zero_horizon_is_noop(self):
        grid, state = self.heat_setup(16)
        outcome, recs = simulate(state, HEAT, grid, INTERVAL, SolverConfig(t_end=0.0))
        assert outcome.state is state
        assert recs == []

    def test_heat_regression(self):
        grid, state = self.heat_setup(128)
        cfg = SolverConfig(t_end=0.1, record_every=0.05)
        outcome, recs = simulate(state, HEAT, grid, INTERVAL, cfg)
        assert outcome.status is StepStatus.OK
        assert outcome.state.t == 0.1
        x = grid.axis_centers(0)
        exact = 1.0 + 0.5 * math.exp(-math.pi**2 * 0.1) * np.cos(np.pi * x)
        assert np.abs(outcome.state.u - exact).max() <= 5e-4

    def test_fast_and_numpy_paths_agree_bitwise(self):
        for dom, gamma, c in (
            (INTERVAL, 2.0, 0.5),
            (BALL3, 1.8, 0.1),
            (BALL3, 1.0, 0.3),
        ):
            grid = build_grid(dom, [40])
            params = ModelParams(chi=0.5, lam=1.0, mu=1.0, c=c, gamma=gamma, n=3)
            x = grid.axis_centers(0)
            state = FieldState(
                u=0.9 + 0.2 * np.cos(np.pi * x), v=np.full(40, 0.5), t=0.0
            )
            cfg = SolverConfig(t_end=0.02, record_every=1.0)
            fast = advance_to(state, 0.02, params, grid, dom, cfg, use_fast_path=True)
            slow = advance_to(state, 0.02, params, grid, dom, cfg, use_fast_path=False)
            assert fast.status is slow.status is StepStatus.OK
            assert np.array_equal(fast.state.u, slow.state.u)
            assert np.array_equal(fast.state.v, slow.state.v)
            assert fast.state.t == slow.state.t

    def test_deterministic_across_runs(self):
        grid = build_grid(BALL3, [40])
        params = ModelParams(chi=0.5, lam=1.0, mu=1.0, c=0.1, gamma=1.8, n=3)
        x = grid.axis_centers(0)
        state = FieldState(u=0.9 + 0.2 * np.cos(np.pi * x), v=np.full(40, 0.5), t=0.0)
        cfg = SolverConfig(t_end=0.05, record_every=0.01)
        obs = lambda s: (s.t, float(s.u.sum()), float(s.v.sum()))  # noqa: E731
        out1, recs1 = simulate(state, params, grid, BALL3, cfg, observer=obs)
        out2, recs2 = simulate(state, params, grid, BALL3, cfg, observer=obs)
        assert recs1 == recs2
        assert np.array_equal(out1.state.u, out2.state.u)

    def test_record_cadence_and_final_sample(self):
        grid, state = self.heat_setup(32)
        cfg = SolverConfig(t_end=0.123, record_every=0.05)
        _, recs = simulate(state, HEAT, grid, INTERVAL, cfg, observer=lambda s: s.t)
        assert recs == pytest.approx([0.0, 0.05, 0.10, 0.123])

    def test_positivity_and_vmax_through_coupled_run(self):
        grid = build_grid(BALL3, [60])
        params = ModelParams(chi=0.8, lam=1.0, mu=1.0, c=0.1, gamma=1.5, n=3)
        r = grid.axis_centers(0)
        state = FieldState(u=1.0 + 0.3 * np.cos(np.pi * r), v=np.full(60, 0.5), t=0.0)
        cfg = SolverConfig(t_end=0.5, record_every=0.01)
        vmaxes = []
        outcome, _ = simulate(
            state, params, grid, BALL3, cfg,
            observer=lambda s: vmaxes.append(float(s.v.max())),
        )
        assert outcome.status is StepStatus.OK
        assert float(outcome.state.u.min()) >= -1e-12
        assert float(outcome.state.v.min()) >= -1e-12
        for a, b in zip(vmaxes, vmaxes[1:]):
            assert b <= a * (1.0 + 1e-12)

    def test_spatial_order_two_on_heat(self):
        errors = []
        for res in (64, 128, 256):
            grid, state = self.heat_setup(res)
            cfg = SolverConfig(t_end=0.1, record_every=0.1)
            outcome, _ = simulate(state, HEAT, grid, INTERVAL, cfg)
            x = grid.axis_centers(0)
            exact = 1.0 + 0.5 * math.exp(-math.pi**2 * 0.1) * np.cos(np.pi * x)
            errors.append(float(np.abs(outcome.state.u - exact).max()))
        orders = [math.log2(a / b) for a, b in zip(errors, errors[1:])]
        for order in orders:
            assert 1.7 <= order <= 2.3

    def test_radial_diffusion_against_spherical_eigenmode(self):
        # u = 1 + a sin(kr)/(kr) e^{-k^2 t} solves the radial heat equation
        # on the unit 3-ball with u_r(1) = 0 when tan(k) = k
        k = 4.493409457909064
        heat3 = ModelParams(chi=0.0, lam=0.0, mu=0.0, c=0.0, gamma=2.0, n=3)
        errors = []
        for res in (100, 200):
            grid = build_grid(BALL3, [res])
            r = grid.axis_centers(0)
            mode = np.sin(k * r) / (k * r)
            state = FieldState(u=1.0 + 0.5 * mode, v=np.ones(res), t=0.0)
            cfg = SolverConfig(t_end=0.05, record_every=0.05)
            outcome, _ = simulate(state, heat3, grid, BALL3, cfg)
            assert outcome.status is StepStatus.OK
            exact = 1.0 + 0.5 * mode * math.exp(-k * k * 0.05)
            errors.append(float(np.abs(outcome.state.u - exact).max()))
        assert errors[1] <= 5e-5
        # boundary-cell truncation drags the pre-asymptotic order a bit
        # below the interior's clean 2
        order = math.log2(errors[0] / errors[1])
        assert 1.6 <= order <= 2.4

    def test_box2_coupled_run_keeps_bounds(self):
        dom = BOX2
        grid = build_grid(dom, [16, 20])
        params = ModelParams(chi=0.5, lam=1.0, mu=1.0, c=0.2, gamma=1.5, n=2)
        xx, yy = grid.meshgrid()
        state = FieldState(
            u=1.0 + 0.3 * np.cos(np.pi * xx) * np.cos(np.pi * yy / 2.0),
            v=np.full(grid.shape, 0.5),
            t=0.0,
        )
        cfg = SolverConfig(t_end=0.05, record_every=0.01)
        vmaxes = []
        outcome, _ = simulate(
            state, params, grid, dom, cfg,
            observer=lambda s: vmaxes.append(float(s.v.max())),
        )
        assert outcome.status is StepStatus.OK
        assert float(outcome.state.u.min()) >= -1e-12
        for a, b in zip(vmaxes, vmaxes[1:]):
            assert b <= a * (1.0 + 1e-12)


def test_max_face_gradient_simple():
    grid = build_grid(INTERVAL, [4])
    v = np.array([0.0, 1.0, 1.0, 3.0])
    assert max_face_gradient(v, grid) == pytest.approx(8.0)


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(t_end=1.0, cfl_safety=1.5)
    with pytest.raises(ValueError):
        SolverConfig(t_end=1.0, dt_init=1e-12, dt_min=1e-10)
    with pytest.raises(ValueError):
        SolverConfig(t_end=1.0, record_every=0.0)

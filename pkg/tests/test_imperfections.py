"""Tolerance factors, leakage, and white noise."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dmmsat import (
    DmmParams,
    DmmState,
    ImperfectionModel,
    SolverConfig,
    generate_planted,
    init_state,
    solve,
)
from dmmsat import _kernels
from dmmsat.cnf import Clause, CnfFormula
from dmmsat.dynamics import derivatives
from dmmsat.imperfections import (
    leakage_only,
    perturb_params,
    perturbed_derivatives,
    tolerance_sites,
)


def _rand_state(f, seed):
    rng = np.random.default_rng(seed)
    m = f.n_clauses
    return DmmState(rng.random(f.n_vars), rng.random(m), rng.random(m) * 2.0)


class TestModelValidation:
    def test_defaults(self):
        m = ImperfectionModel()
        assert m.kappa == 1e-3 and m.eta_tol == 0.0
        assert not m.is_clean  # leakage alone is an imperfection

    def test_is_clean(self):
        assert ImperfectionModel(eta_tol=0, kappa=0, white_noise_level=0).is_clean

    def test_bounds(self):
        with pytest.raises(ValueError):
            ImperfectionModel(eta_tol=1.0)
        with pytest.raises(ValueError):
            ImperfectionModel(eta_tol=-0.1)
        with pytest.raises(ValueError):
            ImperfectionModel(kappa=1.0)
        with pytest.raises(ValueError):
            ImperfectionModel(white_noise_level=-1e-9)
        with pytest.raises(ValueError):
            ImperfectionModel(tol_mode="per_run")

    def test_leakage_only(self):
        m = leakage_only(5e-4)
        assert m.kappa == 5e-4 and m.eta_tol == 0 and m.white_noise_level == 0


class TestToleranceSites:
    def test_shapes_and_bounds(self):
        f, _ = generate_planted(10, 4.3, seed=0)
        model = ImperfectionModel(eta_tol=0.01, seed=3)
        sites = tolerance_sites(model, f)
        m = f.n_clauses
        assert sites.clause_factors.shape == (m, _kernels.N_CLAUSE_SITES)
        assert sites.slot_factors.shape == (m, 3, _kernels.N_SLOT_SITES)
        for arr in (sites.clause_factors, sites.slot_factors):
            assert np.all(arr >= 0.99) and np.all(arr <= 1.01)
            assert not np.all(arr == 1.0)

    def test_static_across_calls(self):
        f, _ = generate_planted(10, 4.3, seed=0)
        model = ImperfectionModel(eta_tol=0.05, seed=11)
        a = tolerance_sites(model, f)
        b = tolerance_sites(model, f)
        assert np.array_equal(a.clause_factors, b.clause_factors)
        assert np.array_equal(a.slot_factors, b.slot_factors)

    def test_seed_sensitivity(self):
        f, _ = generate_planted(10, 4.3, seed=0)
        a = tolerance_sites(ImperfectionModel(eta_tol=0.05, seed=1), f)
        b = tolerance_sites(ImperfectionModel(eta_tol=0.05, seed=2), f)
        assert not np.array_equal(a.clause_factors, b.clause_factors)

    def test_unit_factors_when_disabled(self):
        f, _ = generate_planted(6, 4.3, seed=0)
        sites = tolerance_sites(ImperfectionModel(eta_tol=0.0), f)
        assert np.all(sites.clause_factors == 1.0)
        sites = tolerance_sites(
            ImperfectionModel(eta_tol=0.1, tol_mode="resample_per_step"), f)
        assert np.all(sites.slot_factors == 1.0)


class TestCleanLimit:
    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000))
    def test_null_model_matches_clean_field(self, seed):
        f, _ = generate_planted(8, 4.3, seed=seed % 50)
        s = _rand_state(f, seed)
        p = DmmParams()
        clean = derivatives(f, s, p)
        model = ImperfectionModel(eta_tol=0.0, kappa=0.0, white_noise_level=0.0)
        pert = perturbed_derivatives(f, s, p, model)
        assert np.array_equal(clean.dv, pert.dv)
        assert np.array_equal(clean.dxs, pert.dxs)
        assert np.array_equal(clean.dxl, pert.dxl)

    def test_shape_mismatch_rejected(self):
        f, _ = generate_planted(8, 4.3, seed=0)
        g, _ = generate_planted(9, 4.3, seed=0)
        s = _rand_state(g, 0)
        with pytest.raises(ValueError):
            perturbed_derivatives(f, s, DmmParams(), ImperfectionModel())


class TestLeakage:
    def test_satisfied_corner_discharges(self):
        # at a satisfying corner the clean field on v vanishes, so what
        # remains is exactly the parasitic -kappa*v
        f, plant = generate_planted(10, 4.3, seed=5)
        v = plant.as_array().astype(float)
        rng = np.random.default_rng(2)
        m = f.n_clauses
        s = DmmState(v, rng.random(m), rng.random(m))
        model = leakage_only(1e-3)
        d = perturbed_derivatives(f, s, DmmParams(), model)
        assert np.array_equal(d.dv, -1e-3 * v)
        assert d.dv[np.argmax(v)] == -1e-3

    def test_leakage_shifts_all_channels(self):
        f, _ = generate_planted(8, 4.3, seed=1)
        s = _rand_state(f, 3)
        p = DmmParams()
        clean = derivatives(f, s, p)
        d = perturbed_derivatives(f, s, p, leakage_only(1e-3))
        assert np.allclose(d.dv, clean.dv - 1e-3 * s.v, rtol=0, atol=1e-15)
        assert np.allclose(d.dxs, clean.dxs - 1e-3 * s.xs, rtol=0, atol=1e-15)
        assert np.allclose(d.dxl, clean.dxl - 1e-3 * s.xl, rtol=0, atol=1e-15)


class TestToleranceMagnitude:
    def test_one_percent_tolerance_stays_small(self):
        # dxs is a short chain of factored operations; at v = 0 the clause
        # term sits far from the gamma threshold, so the relative deviation
        # is a product of ~5 near-unit factors: a few percent, not more
        p = DmmParams()
        devs = []
        for seed in range(200):
            f, _ = generate_planted(8, 4.3, seed=seed % 20)
            m = f.n_clauses
            s = DmmState(np.zeros(8), np.full(m, 0.5), np.zeros(m))
            clean = derivatives(f, s, p)
            model = ImperfectionModel(eta_tol=0.01, kappa=0.0, seed=seed)
            pert = perturbed_derivatives(f, s, p, model)
            devs.extend(np.abs(pert.dxs / clean.dxs - 1.0))
        q95 = np.quantile(devs, 0.95)
        assert 0.005 < q95 < 0.06

    def test_larger_tolerance_larger_deviation(self):
        f, _ = generate_planted(8, 4.3, seed=4)
        m = f.n_clauses
        s = DmmState(np.zeros(8), np.full(m, 0.5), np.zeros(m))
        p = DmmParams()
        clean = derivatives(f, s, p)

        def spread(tol):
            acc = []
            for seed in range(50):
                d = perturbed_derivatives(
                    f, s, p, ImperfectionModel(eta_tol=tol, kappa=0.0, seed=seed))
                acc.extend(np.abs(d.dxs / clean.dxs - 1.0))
            return float(np.median(acc))

        assert spread(0.2) > 5 * spread(0.01)


class TestResampleMode:
    def test_deterministic_per_step(self):
        f, _ = generate_planted(8, 4.3, seed=2)
        s = _rand_state(f, 7)
        p = DmmParams()
        model = ImperfectionModel(eta_tol=0.05, tol_mode="resample_per_step",
                                  kappa=0.0, seed=9)
        a = perturbed_derivatives(f, s, p, model, step_index=123)
        b = perturbed_derivatives(f, s, p, model, step_index=123)
        assert np.array_equal(a.dv, b.dv)
        assert np.array_equal(a.dxs, b.dxs)

    def test_varies_with_step(self):
        f, _ = generate_planted(8, 4.3, seed=2)
        s = _rand_state(f, 7)
        p = DmmParams()
        model = ImperfectionModel(eta_tol=0.05, tol_mode="resample_per_step",
                                  kappa=0.0, seed=9)
        a = perturbed_derivatives(f, s, p, model, step_index=1)
        b = perturbed_derivatives(f, s, p, model, step_index=2)
        assert not np.array_equal(a.dxs, b.dxs)

    def test_varies_with_model_seed(self):
        f, _ = generate_planted(8, 4.3, seed=2)
        s = _rand_state(f, 7)
        p = DmmParams()
        a = perturbed_derivatives(
            f, s, p, ImperfectionModel(eta_tol=0.05, tol_mode="resample_per_step",
                                       kappa=0.0, seed=1), step_index=5)
        b = perturbed_derivatives(
            f, s, p, ImperfectionModel(eta_tol=0.05, tol_mode="resample_per_step",
                                       kappa=0.0, seed=2), step_index=5)
        assert not np.array_equal(a.dxs, b.dxs)


class TestWhiteNoise:
    def test_perturb_params_moments(self):
        p = DmmParams()
        rng = np.random.default_rng(0)
        draws = np.array([perturb_params(p, 0.1, rng).gamma for _ in range(10_000)])
        assert draws.mean() == pytest.approx(p.gamma, rel=0.01)
        assert draws.std() == pytest.approx(0.1 * p.gamma, rel=0.05)

    def test_floor(self):
        # level 0.5: ~2% of draws push delta negative and must be floored,
        # while the parameter validity bounds stay out of reach
        p = DmmParams()
        rng = np.random.default_rng(1)
        lows = [perturb_params(p, 0.5, rng) for _ in range(500)]
        assert min(q.delta for q in lows) == 1e-6

    def test_zero_level_identity(self):
        p = DmmParams()
        assert perturb_params(p, 0.0, np.random.default_rng(0)) == p

    def test_negative_level_rejected(self):
        with pytest.raises(ValueError):
            perturb_params(DmmParams(), -0.1, np.random.default_rng(0))

    def test_noisy_solve_still_sound(self):
        f, _ = generate_planted(10, 4.3, seed=3)
        model = ImperfectionModel(eta_tol=0.0, kappa=0.0,
                                  white_noise_level=0.1, seed=4)
        res = solve(f, SolverConfig(max_steps=100_000, zeta_override=3e-3,
                                    seed=3, imperfections=model))
        assert res.solved
        from dmmsat import evaluate
        assert evaluate(f, res.assignment)[0]


class TestSolverIntegration:
    def test_static_tolerance_seed_changes_path(self):
        f, _ = generate_planted(12, 4.3, seed=6)
        base = SolverConfig(max_steps=300_000, zeta_override=3e-3, seed=2)
        runs = set()
        for mseed in range(3):
            model = ImperfectionModel(eta_tol=0.1, kappa=0.0, seed=mseed)
            from dataclasses import replace
            r = solve(f, replace(base, imperfections=model))
            assert r.solved
            runs.add(r.steps)
        assert len(runs) > 1

    def test_perturbed_run_deterministic(self):
        f, _ = generate_planted(12, 4.3, seed=6)
        model = ImperfectionModel(eta_tol=0.05, kappa=1e-3,
                                  white_noise_level=0.05, seed=8)
        cfg = SolverConfig(max_steps=300_000, zeta_override=3e-3, seed=2,
                           imperfections=model)
        assert solve(f, cfg) == solve(f, cfg)

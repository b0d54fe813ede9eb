import logging
import math

import numpy as np
import pytest
from scipy import linalg

from simulation import phase
from simulation.exceptions import DegenerateRetractionError, DimensionMismatchError, SimulationError
from simulation.metrics import RisState, default_feed, effective_gain, identity_ris, unitarity_error
from simulation.phase import (
    dris_baseline,
    euclidean_gradient,
    lagrangian_value,
    retract_svd,
    riemannian_ascend,
    tangent_project,
)
from simulation.schemas import Architecture, GainMode, LinkBudget, ManifoldStepConfig

from .factories import complex_normal, random_unitary

BUDGET = LinkBudget(P_max=1.0, Q_p=1.0, sigma2=1e-9, I_th=0.5)


def _bd(Phi, M):
    return RisState(Architecture.BD, Phi, default_feed(M))


class TestManifold:
    @pytest.mark.parametrize("M", [2, 4, 8, 32])
    def test_projection_is_tangent(self, rng, M):
        for _ in range(25):
            Phi = random_unitary(rng, M)
            P = tangent_project(Phi, complex_normal(rng, (M, M)))
            residual = Phi.conj().T @ P + P.conj().T @ Phi
            assert np.linalg.norm(residual) < 1e-10 * max(1.0, np.linalg.norm(P))

    def test_retraction_is_unitary(self, rng):
        for M in (2, 5, 16):
            X = complex_normal(rng, (M, M))
            assert unitarity_error(retract_svd(X)) < 1e-12

    def test_retraction_fixes_unitaries(self, rng):
        Phi = random_unitary(rng, 6)
        np.testing.assert_allclose(retract_svd(Phi), Phi, atol=1e-12)

    def test_projection_annihilates_normal_directions(self, rng):
        Phi = random_unitary(rng, 5)
        X = complex_normal(rng, (5, 5))
        hermitian = X + X.conj().T
        assert np.linalg.norm(tangent_project(Phi, Phi @ hermitian)) < 1e-12

    def test_projection_keeps_tangent_directions(self, rng):
        Phi = random_unitary(rng, 5)
        X = complex_normal(rng, (5, 5))
        tangent = Phi @ (X - X.conj().T)
        np.testing.assert_allclose(tangent_project(Phi, tangent), tangent, atol=1e-12)

    def test_retraction_of_positive_diagonal(self):
        np.testing.assert_allclose(retract_svd(np.diag([2.0, 0.5])), np.eye(2), atol=1e-15)

    def test_retraction_is_nearest_unitary(self, rng):
        X = complex_normal(rng, (3, 3))
        nearest = np.linalg.norm(X - retract_svd(X))
        for _ in range(500):
            assert nearest <= np.linalg.norm(X - random_unitary(rng, 3)) + 1e-12

    def test_retraction_rejects_non_finite_input(self):
        with pytest.raises(DegenerateRetractionError):
            retract_svd(np.array([[1.0, np.nan], [0.0, 1.0]]))

    def test_retraction_falls_back_to_gesvd(self, rng, monkeypatch):
        svd = linalg.svd
        drivers = []

        def gesdd_fails(X, lapack_driver="gesdd", **kwargs):
            drivers.append(lapack_driver)
            if lapack_driver == "gesdd":
                raise np.linalg.LinAlgError("SVD did not converge")
            return svd(X, lapack_driver=lapack_driver, **kwargs)

        monkeypatch.setattr(linalg, "svd", gesdd_fails)
        Phi = random_unitary(rng, 32)
        X = Phi + 0.1 * tangent_project(Phi, complex_normal(rng, (32, 32)))
        assert unitarity_error(retract_svd(X)) < 1e-12
        assert drivers == ["gesdd", "gesvd"]

        ris, _ = riemannian_ascend(
            complex_normal(rng, 32), complex_normal(rng, 32), 0.1, identity_ris(32), GainMode.FEED_VECTOR, 1.0,
            BUDGET, ManifoldStepConfig(max_inner=5),
        )
        assert unitarity_error(ris.Phi) < 1e-8

    def test_retraction_reports_unconverged_svd(self, rng, monkeypatch):
        def never_converges(X, lapack_driver="gesdd", **kwargs):
            raise np.linalg.LinAlgError("SVD did not converge")

        monkeypatch.setattr(linalg, "svd", never_converges)
        with pytest.raises(SimulationError):
            retract_svd(random_unitary(rng, 4))

    def test_retraction_of_rank_deficient_input(self):
        v = np.array([1.0, 2.0, 3.0], dtype=complex)
        with pytest.raises(DegenerateRetractionError):
            retract_svd(np.outer(v, v))
        with pytest.raises(DegenerateRetractionError):
            retract_svd(np.zeros((3, 3), dtype=complex))


class TestGradient:
    @staticmethod
    def _finite_difference(h, g, f, Phi, M, P_s, mu):
        # step small enough that perturbed matrices still pass the unitarity check
        step = 1e-9
        grad = np.zeros((M, M), dtype=complex)
        for i in range(M):
            for j in range(M):
                for direction in (1.0, 1j):
                    E = np.zeros((M, M), dtype=complex)
                    E[i, j] = direction * step
                    up = lagrangian_value(h, g, f, _bd(Phi + E, M), GainMode.FEED_VECTOR, P_s, mu, BUDGET)
                    down = lagrangian_value(h, g, f, _bd(Phi - E, M), GainMode.FEED_VECTOR, P_s, mu, BUDGET)
                    grad[i, j] += direction * (up - down) / (2 * step)
        return grad

    @pytest.mark.parametrize("M", [2, 4, 8])
    def test_matches_finite_differences(self, rng, M):
        for _ in range(7):
            h, g = complex_normal(rng, M), complex_normal(rng, M)
            f = complex(complex_normal(rng, ()))
            Phi = random_unitary(rng, M)
            P_s, mu = float(rng.uniform(0.5, 2.0)), float(rng.uniform(0.0, 1.0))
            analytic = euclidean_gradient(h, g, f, _bd(Phi, M), GainMode.FEED_VECTOR, P_s, mu, BUDGET)
            numeric = self._finite_difference(h, g, f, Phi, M, P_s, mu)
            assert np.linalg.norm(analytic - numeric) < 1e-4 * np.linalg.norm(analytic)

    def test_literal_norm_gradient(self):
        h = np.array([1.0, 0.0], dtype=complex)
        ris = identity_ris(2)
        G = euclidean_gradient(h, np.zeros(2), 0j, ris, GainMode.PAPER_LITERAL_NORM, math.log(2) / 2, 0.0, BUDGET)
        np.testing.assert_allclose(G, np.diag([1.0, 0.0]), atol=1e-15)
        # its tangent component vanishes: the literal objective is flat on the manifold
        assert np.linalg.norm(tangent_project(ris.Phi, G)) < 1e-15

    def test_lagrangian_value(self):
        ris = identity_ris(2)
        budget = LinkBudget(P_max=1.0, Q_p=1.0, sigma2=0.5, I_th=0.25)
        h = np.array([1.0, 1.0], dtype=complex)  # feed gain 2
        g = np.array([1.0, 0.0], dtype=complex)  # feed gain 1/2
        value = lagrangian_value(h, g, 0j, ris, GainMode.FEED_VECTOR, 1.0, 2.0, budget)
        assert value == pytest.approx(2.0 / 0.5 - 2.0 * (0.5 - 0.25))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            lagrangian_value(np.ones(3), np.ones(2), 0j, identity_ris(2), GainMode.FEED_VECTOR, 1.0, 0.0, BUDGET)


class TestAscent:
    def test_trace_is_monotone_and_unitary(self, rng):
        cfg = ManifoldStepConfig()
        for _ in range(20):
            h, g = complex_normal(rng, 32), complex_normal(rng, 32)
            ris, trace = riemannian_ascend(h, g, 0.5, identity_ris(32), GainMode.FEED_VECTOR, 1.0, BUDGET, cfg)
            values = trace.objective_values
            assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))
            assert unitarity_error(ris.Phi) < 1e-8
            assert ris.mode is Architecture.BD

    def test_every_retraction_is_unitary(self, rng, monkeypatch):
        retract = phase.retract_svd
        errors = []

        def recording_retract(X):
            Phi = retract(X)
            errors.append(unitarity_error(Phi))
            return Phi

        monkeypatch.setattr(phase, "retract_svd", recording_retract)
        cfg = ManifoldStepConfig(max_inner=100)
        for _ in range(20):
            h, g = complex_normal(rng, 32), complex_normal(rng, 32)
            riemannian_ascend(h, g, 0.5, identity_ris(32), GainMode.FEED_VECTOR, 1.0, BUDGET, cfg)
        assert len(errors) >= 1000
        assert max(errors) < 1e-8

    def test_bd_never_loses_to_diagonal(self, rng):
        # started from the co-phased diagonal, ascent can only raise the gain
        cfg = ManifoldStepConfig(max_inner=50)
        for _ in range(100):
            h, g = complex_normal(rng, 8), complex_normal(rng, 8)
            baseline = dris_baseline(h, default_feed(8))
            start = RisState(Architecture.BD, baseline.Phi, baseline.a)
            ris, _ = riemannian_ascend(h, g, 0.3, start, GainMode.FEED_VECTOR, 1.0, BUDGET, cfg)
            d_gain = effective_gain(h, baseline, GainMode.FEED_VECTOR)
            assert effective_gain(h, ris, GainMode.FEED_VECTOR) >= d_gain - 1e-9 * max(1.0, d_gain)

    def test_reaches_channel_norm(self, rng):
        # max over unitary Φ of |hᴴΦa|² is ‖h‖², attained once Φa ∥ h
        cfg = ManifoldStepConfig(max_inner=2000)
        for _ in range(5):
            h = complex_normal(rng, 8)
            ris, trace = riemannian_ascend(h, complex_normal(rng, 8), 0.3, identity_ris(8), GainMode.FEED_VECTOR, 1.0, BUDGET, cfg)
            gain = effective_gain(h, ris, GainMode.FEED_VECTOR)
            assert trace.converged
            assert gain >= 0.99 * np.linalg.norm(h) ** 2
            assert gain >= effective_gain(h, dris_baseline(h, ris.a), GainMode.FEED_VECTOR) - 1e-9

    def test_path_does_not_depend_on_power(self, rng):
        h, g = complex_normal(rng, 4), complex_normal(rng, 4)
        cfg = ManifoldStepConfig(max_inner=30)
        low, _ = riemannian_ascend(h, g, 0.2, identity_ris(4), GainMode.FEED_VECTOR, 0.1, BUDGET, cfg)
        high, _ = riemannian_ascend(h, g, 0.2, identity_ris(4), GainMode.FEED_VECTOR, 10.0, BUDGET, cfg)
        np.testing.assert_allclose(low.Phi, high.Phi, atol=1e-10)

    def test_zero_power_still_moves_toward_h(self, rng):
        h = complex_normal(rng, 4)
        start = identity_ris(4)
        ris, _ = riemannian_ascend(h, complex_normal(rng, 4), 0.2, start, GainMode.FEED_VECTOR, 0.0, BUDGET, ManifoldStepConfig())
        assert effective_gain(h, ris, GainMode.FEED_VECTOR) > effective_gain(h, start, GainMode.FEED_VECTOR)

    def test_huge_epsilon_returns_start(self, rng):
        start = RisState(Architecture.BD, random_unitary(rng, 4), default_feed(4))
        ris, trace = riemannian_ascend(
            complex_normal(rng, 4), complex_normal(rng, 4), 0.1, start, GainMode.FEED_VECTOR, 1.0, BUDGET,
            ManifoldStepConfig(epsilon=1e6),
        )
        np.testing.assert_array_equal(ris.Phi, start.Phi)
        assert trace.converged
        assert len(trace.iterates) == 1

    def test_literal_norm_is_stationary(self, rng):
        start = identity_ris(4)
        ris, trace = riemannian_ascend(
            complex_normal(rng, 4), complex_normal(rng, 4), 0.1, start, GainMode.PAPER_LITERAL_NORM, 1.0, BUDGET,
            ManifoldStepConfig(),
        )
        assert trace.converged
        np.testing.assert_allclose(ris.Phi, start.Phi, atol=1e-12)

    def test_iteration_cap_warns(self, rng, caplog):
        with caplog.at_level(logging.WARNING, logger="simulation.phase"):
            _, trace = riemannian_ascend(
                complex_normal(rng, 6), complex_normal(rng, 6), 0.1, identity_ris(6), GainMode.FEED_VECTOR, 1.0,
                BUDGET, ManifoldStepConfig(max_inner=1, epsilon=1e-12),
            )
        assert not trace.converged
        assert "without convergence" in caplog.text

    def test_multiplier_update(self, rng):
        # threshold 0 makes every iterate violate C1, so μ can only grow
        budget = LinkBudget(P_max=1.0, Q_p=1.0, sigma2=1e-9, I_th=0.0)
        _, trace = riemannian_ascend(
            complex_normal(rng, 4), complex_normal(rng, 4), 0.1, identity_ris(4), GainMode.FEED_VECTOR, 1.0,
            budget, ManifoldStepConfig(max_inner=20, rho=0.1),
        )
        assert trace.mu_final > 0.0


class TestDiagonalBaseline:
    def test_cophases_every_element(self, rng):
        h = complex_normal(rng, 16)
        a = default_feed(16)
        ris = dris_baseline(h, a)
        assert ris.mode is Architecture.D
        expected = np.sum(np.abs(h) * np.abs(a)) ** 2
        assert effective_gain(h, ris, GainMode.FEED_VECTOR) == pytest.approx(expected, rel=1e-12)

    def test_beats_every_diagonal_on_a_phase_grid(self, rng):
        a = default_feed(2)
        phases = np.exp(1j * np.linspace(0.0, 2 * np.pi, 360, endpoint=False))
        for _ in range(5):
            h = complex_normal(rng, 2)
            best = effective_gain(h, dris_baseline(h, a), GainMode.FEED_VECTOR)
            # |hᴴ diag(e^{jα}, e^{jβ}) a|² over the 360x360 grid
            terms = h.conj() * a
            grid = np.abs(terms[0] * phases[:, None] + terms[1] * phases[None, :]) ** 2
            assert best >= grid.max() - 1e-12 * max(1.0, best)

    def test_zero_entry_gets_zero_phase(self):
        ris = dris_baseline(np.array([0.0, 1j]), default_feed(2))
        assert ris.Phi[0, 0] == 1.0

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            dris_baseline(np.ones(3), default_feed(2))

import math

import numpy as np
import pytest

from rattleback import analysis as A
from rattleback import integrate as I
from rattleback._validation import DomainError, InsufficientDataError, ParameterError
from rattleback.model import casimir_C
from rattleback.transforms import x_to_z

FIG1B = [0.01, 0.01, 0.5]


def prs_run(lam, ic=FIG1B, t_end=100.0):
    return I.integrate_adaptive(I.prs(lam), ic, (0.0, t_end))


def sine_traj(t_end=6 * math.pi, n=2001):
    t = np.linspace(0, t_end, n)
    S = np.sin(t)
    return I.Trajectory(t, np.column_stack([0 * t, 0 * t, S]),
                        derivs=np.column_stack([0 * t, 0 * t, np.cos(t)]))


class TestReversalStats:
    def test_sine(self):
        st = A.reversal_stats(sine_traj())
        assert len(st.crossing_times) == 5
        np.testing.assert_allclose(st.positive_spin_durations + st.negative_spin_durations,
                                   math.pi, atol=1e-8)
        assert st.mean_ratio == pytest.approx(1.0, abs=1e-9)

    def test_partition(self):
        st = A.reversal_stats(prs_run(4.0))
        total = sum(st.positive_spin_durations) + sum(st.negative_spin_durations)
        assert total == pytest.approx(st.crossing_times[-1] - st.crossing_times[0], abs=1e-12)
        assert all(d > 0 for d in st.positive_spin_durations + st.negative_spin_durations)

    def test_insufficient(self):
        t = np.linspace(0, 1, 10)
        tr = I.Trajectory(t, np.column_stack([t, t, 1 + t]))
        with pytest.raises(InsufficientDataError):
            A.reversal_stats(tr)

    def test_single_sense_only(self):
        # two crossings bound a single complete episode
        t = np.linspace(0, 2 * math.pi - 0.5, 500)
        tr = I.Trajectory(t, np.column_stack([t, t, -np.sin(t + 0.3)]))
        with pytest.raises(InsufficientDataError):
            A.reversal_stats(tr)

    def test_hysteresis_suppresses_chatter(self):
        t = np.linspace(0, 4 * math.pi, 4001)
        S = np.sin(t)
        S[1000:1003] = [1e-9, -1e-9, 1e-9]  # chatter around an actual maximum region
        S = np.where(np.abs(t - t[1001]) < 1e-2, S, np.sin(t))
        noisy = I.Trajectory(t, np.column_stack([0 * t, 0 * t, S]))
        clean = I.Trajectory(t, np.column_stack([0 * t, 0 * t, np.sin(t)]))
        assert len(A.reversal_stats(noisy).crossing_times) == len(A.reversal_stats(clean).crossing_times)

    def test_duration_ratio_is_one_by_reversibility(self):
        # the flow commutes with (S, t) -> (-S, -t), so both spin senses last equally long
        for lam in (0.25, 2.0, 4.0):
            st = A.reversal_stats(prs_run(lam, t_end=100 if lam > 1 else 1000))
            assert st.mean_ratio == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("lam", [2.0, 4.0, 7.0])
    def test_transition_ratio_above_one(self, lam):
        assert A.reversal_stats(prs_run(lam)).transition_ratio > 1.5

    def test_transition_ratio_symmetric_at_one(self):
        assert A.reversal_stats(prs_run(1.0)).transition_ratio == pytest.approx(1.0, rel=0.05)

    def test_transition_ratio_mirrored(self):
        assert A.reversal_stats(prs_run(0.25, t_end=1000)).transition_ratio < 0.7

    @pytest.mark.parametrize("C", [1.0, 0.1, 0.01])
    def test_transition_ratio_independent_of_casimir_value(self, C):
        # P0 R0**4 = C with R0 = 1
        st = A.reversal_stats(prs_run(4.0, ic=[C, 1.0, 0.5]))
        assert st.transition_ratio > 1

    def test_to_dict(self):
        d = A.reversal_stats(sine_traj()).to_dict()
        assert set(d) >= {"crossing_times", "mean_ratio", "transition_ratio"}


class TestDrift:
    def test_constant(self):
        t = np.linspace(0, 1, 5)
        tr = I.Trajectory(t, np.tile([1.0, 2.0, 0.0], (5, 1)))
        d = A.conservation_drift(tr)
        assert (d.max_rel_drift_H, d.max_rel_drift_C) == (0.0, 0.0)

    def test_fig1b(self):
        d = A.conservation_drift(prs_run(4.0))
        assert d.max_rel_drift_H <= 1e-8 and d.max_rel_drift_C <= 1e-8
        assert d.max_rel_drift_H >= 0 and d.max_rel_drift_C >= 0

    def test_grows_with_tolerance(self):
        drifts = []
        for rtol in (1e-4, 1e-6, 1e-8, 1e-10):
            tr = I.integrate_adaptive(I.prs(4.0), FIG1B, (0, 100), I.IntegratorConfig(rel_tol=rtol))
            d = A.conservation_drift(tr)
            drifts.append(max(d.max_rel_drift_H, d.max_rel_drift_C))
        assert all(a > b for a, b in zip(drifts, drifts[1:]))

    def test_darboux_coords(self):
        tr = I.integrate_adaptive(I.darboux(4.0), x_to_z(FIG1B), (0, 100))
        d = A.conservation_drift(tr, coords="z")
        assert d.max_rel_drift_C == 0.0 and d.max_rel_drift_H <= 1e-8

    def test_non_integer_lambda_negative_roll(self):
        tr = I.Trajectory([0, 1], [[1.0, -1.0, 0.0], [1.0, -1.0, 0.0]])
        with pytest.raises(DomainError):
            A.conservation_drift(tr, 1.5)

    def test_bad_coords(self):
        tr = I.Trajectory([0, 1], [[1.0, 1.0, 0.0], [1.0, 1.0, 0.0]])
        with pytest.raises(ParameterError):
            A.conservation_drift(tr, coords="q")


class TestWandering:
    def test_zero_coupling(self):
        z0 = np.append(x_to_z([0.2, 0.2, 0.2]), 0.0)
        tr = I.integrate_adaptive(I.extended(4.0, 0.0), z0, (0, 100), I.IntegratorConfig(dense=False))
        w = A.casimir_wandering(tr)
        assert w.width == 0.0 and not w.sign_change

    def test_coupled_run_moves(self):
        z0 = np.append(x_to_z([0.2, 0.2, 0.2]), 0.0)
        cfg = I.IntegratorConfig(rel_tol=1e-12, dense=False)
        tr = I.integrate_adaptive(I.extended(4.0, 2e-7), z0, (0, 2000), cfg)
        assert A.casimir_wandering(tr).width > 0
        assert A.extended_energy_drift(tr, 2e-7) <= 1e-7


class TestMeshes:
    def test_leaf_row_at_unit_roll(self):
        pts = A.leaf_mesh(1.0, 4.0, r_range=(0.5, 1.0), resolution=(2, 5))
        row = pts[pts[:, 1] == 1.0]
        np.testing.assert_array_equal(row[:, 0], 1.0)

    def test_leaf_value(self):
        pts = A.leaf_mesh(0.01, 4.0, r_range=(0.5, 2.0), resolution=(4, 3))
        assert pts[pts[:, 1] == 0.5][0, 0] == pytest.approx(0.16)

    @pytest.mark.parametrize("C", [-1.0, -0.01, 0.01, 1.0])
    def test_leaf_on_casimir(self, C):
        for x in A.leaf_mesh(C, 4.0):
            assert abs(casimir_C(x, 4.0) - C) <= 1e-12 * max(1, abs(C))

    def test_leaf_errors(self):
        with pytest.raises(ParameterError):
            A.leaf_mesh(1.0, 4.0, r_range=(-1.0, 1.0))
        with pytest.raises(ParameterError):
            A.leaf_mesh(1.0, 4.0, resolution=1)
        with pytest.raises(DomainError):
            A.leaf_mesh(1.0, 1.5, r_range=(-2.0, -1.0))

    def test_negative_roll_integer_lambda(self):
        pts = A.leaf_mesh(1.0, 4.0, r_range=(-2.0, -0.5), resolution=3)
        assert np.all(pts[:, 0] > 0)

    def test_sphere(self):
        pts = A.sphere_mesh(1.0, 10)
        np.testing.assert_allclose(0.5 * np.sum(pts**2, axis=1), 1.0)


class TestPotentialProfile:
    def test_unit_casimir_at_origin(self):
        prof = A.potential_profile([1.0], (-1, 1), 3, 4.0)
        assert prof.U[1, 0] == 1.0

    def test_sampled_minima_within_one_cell(self):
        Cs = [1.0, 0.1, 0.01, 0.001]
        prof = A.potential_profile(Cs, (-2, 2), 401, 4.0)
        cell = prof.z1[1] - prof.z1[0]
        for (z, _), zs in zip(prof.minima, prof.sampled_minima()):
            assert abs(z - zs) <= cell

    @pytest.mark.parametrize("C", [1.0, 0.1, 0.01, 0.001])
    def test_cliff_on_positive_side(self, C):
        assert A.potential_asymmetry(C, 4.0) > 0

    def test_zero_casimir_has_no_minimum(self):
        assert A.potential_profile([0.0], (-1, 1), 5).minima == [None]

    def test_resolution(self):
        with pytest.raises(ParameterError):
            A.potential_profile([1.0], (-1, 1), 1)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

import satprecode as sp
from satprecode import geometry
from satprecode.channel import ChannelMatrix, pattern_gain
from satprecode.exceptions import ConfigError, GeometryError

from conftest import random_channel


class TestLinkBudget:
    def test_noise_temperature_derived_from_g_over_t(self):
        b = sp.LinkBudget()
        expected = 10 ** ((41.7 - 17.68) / 10)
        assert b.receiver_noise_temp_k == pytest.approx(expected, rel=1e-12)

    def test_consistent_explicit_temperature_accepted(self):
        t = 10 ** ((41.7 - 17.68) / 10)
        b = sp.LinkBudget(receiver_noise_temp_k=t)
        assert b.receiver_noise_temp_k == t

    def test_inconsistent_temperature_rejected(self):
        with pytest.raises(ConfigError, match="inconsistent"):
            sp.LinkBudget(receiver_noise_temp_k=100.0)

    @pytest.mark.parametrize("field,value", [
        ("bandwidth_hz", 0.0),
        ("carrier_freq_hz", -1.0),
        ("rolloff", 1.0),
        ("rolloff", -0.1),
        ("total_power_w", 0.0),
    ])
    def test_invalid_values_rejected(self, field, value):
        with pytest.raises(ConfigError):
            sp.LinkBudget(**{field: value})


class TestLayout:
    def test_hex_layout_shapes_and_colors(self, desk_layout):
        assert desk_layout.beams == 7
        assert desk_layout.feeds == 7
        assert set(desk_layout.color_of_beam) <= {0, 1, 2, 3}

    def test_adjacent_beams_never_share_color(self, desk_layout, budget):
        sat = budget.satellite_position()
        centers = desk_layout.beam_centers
        for i in range(desk_layout.beams):
            ang = geometry.off_axis_angle_deg(
                sat, centers[i, 0], centers[i, 1], centers[:, 0], centers[:, 1],
                budget.earth_radius_m,
            )
            for j in range(desk_layout.beams):
                if i != j and ang[j] < 2 * desk_layout.beam_radius_3db_deg:
                    assert (
                        desk_layout.color_of_beam[i] != desk_layout.color_of_beam[j]
                    )

    def test_multiple_feeds_per_beam(self, budget):
        lay = sp.hex_layout(3, 47.0, 10.0, 0.25, 4.0, feeds_per_beam=3,
                            budget=budget)
        assert lay.feeds == 9
        assert lay.feed_slice(1) == slice(3, 6)

    def test_full_scale_layout_valid(self, budget):
        lay = sp.hex_layout(245, 47.0, 10.0, 0.09, 1.1, budget=budget)
        assert lay.beams == 245
        assert np.bincount(lay.color_of_beam, minlength=4).min() > 0

    def test_zero_radius_rejected(self):
        with pytest.raises(ConfigError):
            sp.BeamLayout(
                beam_centers=np.array([[47.0, 10.0]]),
                feed_boresights=np.array([[47.0, 10.0]]),
                feeds_per_beam=1,
                beam_radius_3db_deg=0.0,
                color_of_beam=np.array([0]),
            )

    def test_invisible_beam_rejected(self, budget):
        lay = sp.BeamLayout(
            beam_centers=np.array([[0.0, 180.0]]),  # opposite side of Earth
            feed_boresights=np.array([[0.0, 180.0]]),
            feeds_per_beam=1,
            beam_radius_3db_deg=0.25,
            color_of_beam=np.array([0]),
        )
        with pytest.raises(GeometryError, match="horizon"):
            lay.validate_geometry(budget)


class TestPlaceUsers:
    def test_pool_of_200_users_per_beam_inside_contours(self, desk_layout, budget):
        users = sp.place_users(desk_layout, 200, 11, budget=budget)
        assert users.positions.shape == (7, 200, 2)
        sat = budget.satellite_position()
        for k in range(7):
            lat0, lon0 = desk_layout.beam_centers[k]
            ang = geometry.off_axis_angle_deg(
                sat, lat0, lon0,
                users.positions[k, :, 0], users.positions[k, :, 1],
                budget.earth_radius_m,
            )
            assert np.all(ang <= desk_layout.beam_radius_3db_deg)

    def test_single_user_pool(self, desk_layout, budget):
        users = sp.place_users(desk_layout, 1, 5, budget=budget)
        assert users.positions.shape == (7, 1, 2)

    def test_same_seed_reproduces_positions(self, desk_layout, budget):
        a = sp.place_users(desk_layout, 13, 99, budget=budget)
        b = sp.place_users(desk_layout, 13, 99, budget=budget)
        assert np.array_equal(a.positions, b.positions)

    def test_invalid_pool_size_rejected(self, desk_layout, budget):
        with pytest.raises(ConfigError):
            sp.place_users(desk_layout, 0, 1, budget=budget)


class TestFeedPattern:
    def test_peak_gain_at_boresight(self, desk_layout, budget):
        bore = desk_layout.feed_boresights[0]
        gain = sp.feed_gain(bore, bore, desk_layout, budget)
        assert gain == pytest.approx(pattern_gain(0.0, 0.25), rel=1e-12)

    def test_three_db_point_matches_beam_radius(self, desk_layout, budget):
        # Oracle: root-find the angle where the pattern is 3 dB below peak,
        # then evaluate the gain for a user placed at that off-axis angle.
        radius = desk_layout.beam_radius_3db_deg
        peak = pattern_gain(0.0, radius)
        theta_3db = brentq(
            lambda t: pattern_gain(t, radius) / peak - 10 ** (-0.3),
            1e-6, 2.0 * radius,
        )
        assert theta_3db == pytest.approx(radius, rel=1e-9)

        sat = budget.satellite_position()
        lat0, lon0 = desk_layout.beam_centers[0]
        offset = brentq(
            lambda d: float(
                geometry.off_axis_angle_deg(
                    sat, lat0, lon0, lat0 + d, lon0, budget.earth_radius_m
                )
            ) - theta_3db,
            1e-9, 10.0,
        )
        gain = sp.feed_gain(
            (lat0, lon0), (lat0 + offset, lon0), desk_layout, budget
        )
        delta_db = 10 * math.log10(peak / gain)
        assert abs(delta_db - 3.0) < 0.05

    def test_far_sidelobes_at_least_20_db_down(self):
        peak = pattern_gain(0.0, 0.25)
        tail = pattern_gain(10 * 0.25, 0.25)
        assert 10 * math.log10(peak / tail) >= 20.0

    def test_mainlobe_monotone_to_first_null(self):
        from satprecode.channel import _U_HALF
        radius = 0.25
        k_a = _U_HALF / math.sin(math.radians(radius))
        theta_null = math.degrees(math.asin(3.8317 / k_a))
        theta = np.linspace(0.0, theta_null, 400)
        gains = pattern_gain(theta, radius)
        assert np.all(np.diff(gains) <= 1e-9 * gains[0])


class TestGainMatrix:
    def test_subsatellite_slant_range_is_orbit_height(self, budget):
        sat = budget.satellite_position()
        d = geometry.slant_range_m(sat, 0.0, 10.0, budget.earth_radius_m)
        assert float(d) == pytest.approx(35_786_000.0, rel=1e-9)

    def test_clear_sky_fading_is_identity(self, desk_layout, budget):
        users = sp.place_users(desk_layout, 2, 3, budget=budget)
        f_default = sp.build_gain_matrix(desk_layout, users, budget)
        f_ones = sp.build_gain_matrix(
            desk_layout, users, budget, fading=np.ones(14)
        )
        assert np.array_equal(f_default, f_ones)

    def test_doubling_bandwidth_scales_entries_by_inverse_sqrt2(
        self, desk_layout, budget
    ):
        users = sp.place_users(desk_layout, 2, 3, budget=budget)
        f1 = sp.build_gain_matrix(desk_layout, users, budget)
        b2 = sp.LinkBudget(bandwidth_hz=2 * budget.bandwidth_hz)
        f2 = sp.build_gain_matrix(desk_layout, users, b2)
        assert np.allclose(f2, f1 / math.sqrt(2.0), rtol=1e-14)

    def test_noise_temperature_scaling_is_exact(self, desk_layout):
        users_budget = sp.LinkBudget()
        users = sp.place_users(desk_layout, 2, 3, budget=users_budget)
        t1 = 250.0
        budgets = []
        for t in (t1, 4 * t1):
            g_over_t = 41.7 - 10 * math.log10(t)
            budgets.append(
                sp.LinkBudget(receiver_noise_temp_k=t, g_over_t_db=g_over_t)
            )
        f1 = sp.build_gain_matrix(desk_layout, users, budgets[0])
        f4 = sp.build_gain_matrix(desk_layout, users, budgets[1])
        assert np.array_equal(f1, 2.0 * f4)

    def test_wrong_fading_length_rejected(self, desk_layout, budget):
        users = sp.place_users(desk_layout, 2, 3, budget=budget)
        with pytest.raises(ConfigError):
            sp.build_gain_matrix(desk_layout, users, budget, fading=np.ones(3))


class TestPhaseMatrix:
    def test_entries_unit_modulus(self):
        phi = sp.build_phase_matrix(sp.PhaseModel(variant="uniform", rng_seed=0),
                                    40, 9)
        assert np.allclose(np.abs(phi), 1.0, atol=1e-12)

    def test_ultra_stable_zero_spread_gives_constant_rows(self):
        phi = sp.build_phase_matrix(
            sp.PhaseModel(variant="ultra_stable", chi_deg=0.0, rng_seed=2), 10, 6
        )
        assert np.allclose(phi, phi[:, :1], atol=1e-12)

    def test_uniform_rows_not_constant(self):
        phi = sp.build_phase_matrix(sp.PhaseModel(variant="uniform", rng_seed=2),
                                    10, 6)
        assert not np.allclose(phi, phi[:, :1], atol=1e-3)

    def test_ten_degree_spread_has_matching_circular_std(self):
        rows, feeds = 100, 1000
        phi = sp.build_phase_matrix(
            sp.PhaseModel(variant="ultra_stable", chi_deg=10.0, rng_seed=7),
            rows, feeds,
        )
        # Remove each row's common phase via the circular row mean, then
        # measure the circular standard deviation of the residuals.
        row_mean = np.mean(phi, axis=1, keepdims=True)
        residual = phi * np.conj(row_mean / np.abs(row_mean))
        r = np.abs(np.mean(residual))
        circ_std_deg = math.degrees(math.sqrt(-2.0 * math.log(r)))
        assert abs(circ_std_deg - 10.0) < 0.3

    def test_unknown_variant_rejected(self):
        with pytest.raises(ConfigError):
            sp.PhaseModel(variant="laser")


class TestAssemble:
    def test_all_ones_phase_returns_gain(self):
        gain = np.arange(12.0).reshape(4, 3) + 1.0
        ch = sp.assemble_channel(gain, np.ones((4, 3)), 2, 2)
        assert np.array_equal(ch.h, gain.astype(complex))

    def test_magnitude_equals_gain(self, desk_layout, budget):
        users = sp.place_users(desk_layout, 2, 8, budget=budget)
        gain = sp.build_gain_matrix(desk_layout, users, budget)
        phase = sp.build_phase_matrix(sp.PhaseModel(rng_seed=1), 14, 7)
        ch = sp.assemble_channel(gain, phase, 7, 2)
        assert np.allclose(np.abs(ch.h), gain, rtol=1e-12)

    def test_two_by_two_hand_case(self):
        gain = np.array([[1.0, 2.0], [3.0, 4.0]])
        phase = np.array([[1.0, -1.0], [1j, -1j]])
        ch = sp.assemble_channel(gain, phase, 1, 2)
        assert np.array_equal(ch.h, np.array([[1.0, -2.0], [3j, -4j]]))

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ConfigError):
            sp.assemble_channel(np.ones((2, 3)), np.ones((3, 2)), 1, 2)


class TestChannelMatrixViews:
    def test_beam_and_user_views(self):
        ch = random_channel(3, 2, 5, seed=0)
        assert ch.beam(1).shape == (2, 5)
        assert np.array_equal(ch.beam(1)[0], ch.user_row(1, 0))
        assert np.array_equal(ch.user_vector(1, 0), ch.user_row(1, 0).conj())

    def test_excluding_removes_exactly_one_beam(self):
        ch = random_channel(4, 3, 6, seed=1)
        other = ch.excluding(2)
        assert other.shape == (9, 6)
        expected = np.vstack([ch.beam(0), ch.beam(1), ch.beam(3)])
        assert np.array_equal(other, expected)

    @settings(deadline=None, max_examples=25)
    @given(st.integers(1, 5), st.integers(1, 4), st.integers(1, 8),
           st.integers(0, 10_000))
    def test_remove_reinsert_round_trip(self, beams, q, feeds, seed):
        ch = random_channel(beams, q, feeds, seed=seed)
        for k in range(beams):
            other = ch.excluding(k)
            rebuilt = np.insert(other, k * q, ch.beam(k), axis=0)
            assert np.array_equal(rebuilt, ch.h)

    def test_channel_is_read_only(self):
        ch = random_channel(2, 2, 3, seed=3)
        with pytest.raises(ValueError):
            ch.h[0, 0] = 0.0

    def test_non_finite_entries_rejected(self):
        h = np.ones((4, 3), dtype=complex)
        h[1, 1] = np.nan
        with pytest.raises(ConfigError):
            ChannelMatrix(h=h, beams=2, users_per_beam=2)


class TestPerturbation:
    def test_zero_ratio_returns_same_channel(self):
        ch = random_channel(3, 2, 4, seed=5)
        perturbed, delta, bounds = sp.perturb_channel(ch, 0.0, 1)
        assert perturbed is ch
        assert not np.any(delta)
        assert bounds.gamma_total == 0.0
        assert np.all(bounds.gamma_k == 0.0)

    def test_frobenius_ratio_exact(self):
        ch = random_channel(4, 2, 6, seed=6)
        _, delta, _ = sp.perturb_channel(ch, 0.37, 2)
        realized = np.linalg.norm(delta) / np.linalg.norm(ch.h)
        assert abs(realized - 0.37) <= 1e-12

    def test_complement_sum_identity(self):
        ch = random_channel(5, 2, 7, seed=7)
        _, _, bounds = sp.perturb_channel(ch, 0.2, 3)
        for k in range(5):
            assert bounds.gamma_tilde_k[k] == np.sum(np.delete(bounds.gamma_k, k))

    def test_total_energy_matches_beam_split(self):
        ch = random_channel(5, 3, 6, seed=8)
        _, delta, bounds = sp.perturb_channel(ch, 0.1, 4)
        assert np.sum(bounds.gamma_k) == pytest.approx(
            np.linalg.norm(delta) ** 2, rel=1e-12
        )

    def test_lower_bound_clipped_to_realized_energy(self):
        ch = random_channel(3, 2, 4, seed=9)
        _, _, bounds = sp.perturb_channel(ch, 1e-9, 5)
        capped = bounds.with_lower(1.0)
        assert np.all(capped.gamma_lower_k <= bounds.gamma_k)

    def test_negative_ratio_rejected(self):
        ch = random_channel(2, 2, 3, seed=10)
        with pytest.raises(ConfigError):
            sp.perturb_channel(ch, -0.1, 0)

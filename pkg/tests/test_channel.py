import json

import numpy as np
import pytest

from ma_aircomp import channel


def make_user(rng, n_paths=3):
    return channel.UserChannel(
        rng.uniform(0, np.pi, n_paths),
        rng.uniform(0, np.pi, n_paths),
        rng.standard_normal(n_paths) + 1j * rng.standard_normal(n_paths),
    )


class TestRegionSpec:
    def test_rejects_bad_lengths(self):
        with pytest.raises(ValueError):
            channel.RegionSpec(-1.0, 0.5)
        with pytest.raises(ValueError):
            channel.RegionSpec(3.0, 0.0)
        # min separation so large that no two antennas fit
        with pytest.raises(ValueError):
            channel.RegionSpec(3.0, 3.0 * np.sqrt(2) + 0.1)

    def test_half(self):
        assert channel.RegionSpec(3.0, 0.5).half == 1.5


class TestPropagationDistanceDiff:
    def test_origin_is_zero(self):
        assert channel.propagation_distance_diff([0.0, 0.0], 1.1, 2.2) == 0.0

    def test_theta_zero_projects_onto_y(self):
        # sin 0 = 0 kills the x part, cos 0 = 1 keeps y
        assert channel.propagation_distance_diff([0.5, 0.3], 0.0, 1.234) == pytest.approx(0.3)

    def test_broadside_projects_onto_x(self):
        assert channel.propagation_distance_diff([0.5, 0.3], np.pi / 2, 0.0) == pytest.approx(0.5)


class TestFieldResponseVector:
    def test_origin_gives_all_ones(self):
        rng = np.random.default_rng(1)
        user = make_user(rng, 4)
        frv = channel.field_response_vector([0.0, 0.0], user)
        assert np.allclose(frv, 1.0)

    def test_half_wavelength_broadside_flips_sign(self):
        user = channel.UserChannel([np.pi / 2], [0.0], [1.0])
        frv = channel.field_response_vector([0.5, 0.0], user)
        assert frv[0] == pytest.approx(-1.0, abs=1e-12)

    def test_unit_modulus(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            user = make_user(rng, 5)
            pos = rng.uniform(-2, 2, 2)
            frv = channel.field_response_vector(pos, user)
            assert np.max(np.abs(np.abs(frv) - 1.0)) < 1e-12


class TestChannelVector:
    def test_all_antennas_at_origin(self):
        rng = np.random.default_rng(3)
        user = make_user(rng, 4)
        h = channel.channel_vector(np.zeros((3, 2)), user)
        assert np.allclose(h, np.sum(user.prv))

    def test_single_path_magnitude(self):
        c = 0.7 - 0.2j
        user = channel.UserChannel([1.0], [0.5], [c])
        apv = np.array([[0.3, -0.4], [1.2, 0.9]])
        h = channel.channel_vector(apv, user)
        rho = channel.propagation_distance_diff(apv, 1.0, 0.5)
        assert np.allclose(h, c * np.exp(-2j * np.pi * rho))
        assert np.allclose(np.abs(h), abs(c))

    def test_matches_scalar_loop_oracle(self):
        # independent per-entry summation of the conjugated field response
        rng = np.random.default_rng(4)
        user = make_user(rng, 3)
        apv = rng.uniform(-1.5, 1.5, (2, 2))
        h = channel.channel_vector(apv, user)
        for m in range(2):
            acc = 0.0 + 0.0j
            for p in range(3):
                rho = (
                    apv[m, 0] * np.sin(user.theta[p]) * np.cos(user.phi[p])
                    + apv[m, 1] * np.cos(user.theta[p])
                )
                acc += np.conj(np.exp(2j * np.pi * rho)) * user.prv[p]
            assert abs(h[m] - acc) < 1e-12

    def test_factorization_order_invariance(self):
        # full FRM^H g equals the per-antenna assembly
        rng = np.random.default_rng(5)
        user = make_user(rng, 5)
        apv = rng.uniform(-1.5, 1.5, (4, 2))
        frm = np.stack(
            [channel.field_response_vector(apv[m], user) for m in range(4)], axis=1
        )  # (L, M)
        assert np.allclose(frm.conj().T @ user.prv, channel.channel_vector(apv, user), atol=1e-12)

    def test_single_path_translation_invariant_magnitude(self):
        user = channel.UserChannel([0.8], [2.1], [1.5 + 0.5j])
        rng = np.random.default_rng(6)
        for _ in range(5):
            apv = rng.uniform(-1.5, 1.5, (3, 2))
            assert np.allclose(np.abs(channel.channel_vector(apv, user)), np.abs(1.5 + 0.5j))


class TestSampleChannel:
    def test_sample_statistics(self):
        # mean ~ 0 within 3 standard errors, per-entry variance = d^-alpha / L within 5%
        rng = np.random.default_rng(7)
        alpha, n_paths = 3.9, 5
        real = channel.sample_channel(20000, n_paths, alpha, (250.0, 250.0), rng)
        g = np.concatenate([u.prv for u in real.users])
        var_target = 250.0 ** (-alpha) / n_paths
        se = np.sqrt(var_target / g.size)
        assert abs(np.mean(g.real)) < 3 * se and abs(np.mean(g.imag)) < 3 * se
        assert np.mean(np.abs(g) ** 2) == pytest.approx(var_target, rel=0.05)

    def test_shapes_and_ranges(self):
        rng = np.random.default_rng(8)
        real = channel.sample_channel(6, 4, 3.9, (250.0, 300.0), rng)
        assert real.n_users == 6
        assert np.all((real.distances >= 250) & (real.distances <= 300))
        for u in real.users:
            assert u.n_paths == 4
            assert np.all((u.theta >= 0) & (u.theta <= np.pi))
            assert np.all((u.phi >= 0) & (u.phi <= np.pi))


class TestPerturbAoas:
    def test_zero_mu_is_identity(self):
        rng = np.random.default_rng(9)
        real = channel.sample_channel(3, 4, 3.9, (250.0, 300.0), rng)
        out = channel.perturb_aoas(real, 0.0, np.random.default_rng(1))
        for u, v in zip(real.users, out.users):
            assert np.array_equal(u.theta, v.theta)
            assert np.array_equal(u.phi, v.phi)
            assert np.array_equal(u.prv, v.prv)

    def test_support_bound_and_clamping(self):
        rng = np.random.default_rng(10)
        real = channel.sample_channel(5, 6, 3.9, (250.0, 300.0), rng)
        out = channel.perturb_aoas(real, 0.2, np.random.default_rng(2))
        for u, v in zip(real.users, out.users):
            assert np.all(np.abs(v.theta - u.theta) <= 0.1 + 1e-15)
            assert np.all(np.abs(v.phi - u.phi) <= 0.1 + 1e-15)
            assert np.all((v.theta >= 0) & (v.theta <= np.pi))
            assert np.all((v.phi >= 0) & (v.phi <= np.pi))


class TestGainMap:
    def test_single_path_map_is_flat(self):
        user = channel.UserChannel([0.7], [1.9], [0.4 + 0.3j])
        real = channel.ChannelRealization(users=[user], distances=np.array([250.0]))
        _, _, gain = channel.channel_gain_map(real, channel.RegionSpec(3.0, 0.5), 0.5)
        assert np.allclose(gain, abs(0.4 + 0.3j))

    def test_nonnegative_and_matches_pointwise_oracle(self):
        rng = np.random.default_rng(11)
        real = channel.ChannelRealization(
            users=[make_user(rng, 2), make_user(rng, 2)],
            distances=np.array([250.0, 260.0]),
        )
        region = channel.RegionSpec(2.0, 0.5)
        xs, ys, gain = channel.channel_gain_map(real, region, 1.0)
        assert np.all(gain >= 0)
        for iy, y in enumerate(ys):
            for ix, x in enumerate(xs):
                acc = 0.0
                for u in real.users:
                    frv = channel.field_response_vector([x, y], u)
                    acc += abs(np.vdot(u.prv, frv))
                assert gain[iy, ix] == pytest.approx(acc / 2, abs=1e-12)

    def test_csv_export(self, tmp_path):
        user = channel.UserChannel([0.7], [1.9], [1.0])
        real = channel.ChannelRealization(users=[user], distances=np.array([250.0]))
        xs, ys, gain = channel.channel_gain_map(real, channel.RegionSpec(2.0, 0.5), 1.0)
        path = tmp_path / "map.csv"
        channel.write_gain_map_csv(path, xs, ys, gain)
        lines = path.read_text().splitlines()
        assert lines[0] == "x,y,avg_gain"
        assert len(lines) == 1 + len(xs) * len(ys)


class TestSerialization:
    def test_json_round_trip(self):
        rng = np.random.default_rng(12)
        real = channel.sample_channel(4, 3, 3.9, (250.0, 300.0), rng)
        text = real.to_json()
        back = channel.ChannelRealization.from_json(text)
        assert np.array_equal(back.distances, real.distances)
        for u, v in zip(real.users, back.users):
            assert np.array_equal(u.theta, v.theta)
            assert np.array_equal(u.phi, v.phi)
            assert np.array_equal(u.prv, v.prv)
        # prv stored as [re, im] pairs
        doc = json.loads(text)
        assert isinstance(doc["users"][0]["prv"][0], list)

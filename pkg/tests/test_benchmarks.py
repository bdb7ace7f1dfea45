import numpy as np
import pytest

from ma_aircomp import aircomp, benchmarks, channel


REGION = channel.RegionSpec(3.0, 0.5)


class TestFpaLayout:
    def test_single_antenna_at_center(self):
        assert np.allclose(benchmarks.fpa_layout(1, REGION), [[0.0, 0.0]])

    def test_four_antennas_square(self):
        apv = benchmarks.fpa_layout(4, REGION)
        expected = {(-0.25, -0.25), (0.25, -0.25), (-0.25, 0.25), (0.25, 0.25)}
        assert {tuple(p) for p in apv} == expected

    def test_twelve_antennas_spacing(self):
        apv = benchmarks.fpa_layout(12, REGION)
        assert apv.shape == (12, 2)
        # 4x3 arrangement with exact half-wavelength pairwise spacing floor
        dists = np.linalg.norm(apv[:, None] - apv[None, :], axis=2)
        iu = np.triu_indices(12, k=1)
        assert np.min(dists[iu]) >= 0.5 - 1e-12
        assert len(np.unique(apv[:, 0])) * len(np.unique(apv[:, 1])) == 12

    def test_deterministic(self):
        assert np.array_equal(benchmarks.fpa_layout(6, REGION), benchmarks.fpa_layout(6, REGION))

    def test_too_large_layout_rejected(self):
        small = channel.RegionSpec(1.0, 0.4)
        with pytest.raises(ValueError):
            benchmarks.fpa_layout(100, small)


@pytest.fixture(scope="module")
def realization():
    rng = np.random.default_rng(77)
    return channel.sample_channel(6, 5, 3.9, (250.0, 300.0), rng)


class TestApsOptimize:

    def test_improves_on_init(self, realization):
        init = benchmarks.fpa_layout(4, REGION)
        base = aircomp.inner_loop(channel.channel_matrix(init, realization), 1e-8, 10.0)
        apv, sol = benchmarks.aps_optimize(
            realization, REGION, benchmarks.GridSpec(0.25), 1e-8, 10.0, init
        )
        assert sol.cmse <= base.cmse + 1e-9

    def test_output_feasible(self, realization):
        from ma_aircomp.pso import violation_set

        init = benchmarks.fpa_layout(4, REGION)
        apv, _ = benchmarks.aps_optimize(
            realization, REGION, benchmarks.GridSpec(0.25), 1e-8, 10.0, init
        )
        assert np.all(np.abs(apv) <= 1.5 + 1e-12)
        assert violation_set(apv, 0.5 - 1e-9) == 0

    def test_single_antenna_matches_exhaustive_grid(self, realization):
        single = channel.ChannelRealization(
            users=[realization.users[0]], distances=realization.distances[:1]
        )
        grid = benchmarks.GridSpec(0.5)
        apv, sol = benchmarks.aps_optimize(
            single, REGION, grid, 1e-8, 10.0, np.zeros((1, 2))
        )
        # exhaustive oracle: best inner-loop CMSE over every grid point
        best = np.inf
        for point in grid.points(REGION):
            h = channel.channel_matrix(point.reshape(1, 2), single)
            best = min(best, aircomp.inner_loop(h, 1e-8, 10.0).cmse)
        assert sol.cmse <= best + 1e-9

    def test_degenerate_grid_keeps_positions(self, realization):
        init = benchmarks.fpa_layout(4, REGION)
        # a grid so coarse no point clears the separation check near others
        apv, _ = benchmarks.aps_optimize(
            realization, channel.RegionSpec(0.6, 0.5), benchmarks.GridSpec(0.3),
            1e-8, 10.0, np.zeros((1, 2)) * 0.0,
        )
        assert apv.shape == (1, 2)

    def test_grid_spec_validation(self):
        with pytest.raises(ValueError):
            benchmarks.GridSpec(0.0)
        pts = benchmarks.GridSpec(0.75).points(REGION)
        assert np.all(np.abs(pts) <= 1.5)

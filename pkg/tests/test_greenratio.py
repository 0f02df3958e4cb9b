import math

import numpy as np
import pytest

from martinlevels import geometry as geo
from martinlevels import greenratio as gr
from martinlevels import levelset as ls


@pytest.fixture(scope="module")
def strip_grid():
    window = geo.WindowBox((0.0, -np.pi / 2), (8.0, np.pi / 2))
    return gr.build_grid(geo.Strip(), window, np.pi / 100)


@pytest.fixture(scope="module")
def ring_solution():
    ring = geo.ConvexRing(geo.square_body(2.0), geo.square_body(0.5))
    grid = gr.build_grid(ring, geo.WindowBox((-2.0, -2.0), (2.0, 2.0)), 0.05)
    data = gr.ring_dirichlet_data(grid)
    return grid, gr.solve_dirichlet(grid, boundary_values=data)


class TestBuildGrid:
    def test_strip_mask_walls(self):
        grid = gr.build_grid(geo.Strip(), geo.WindowBox((0.0, -np.pi / 2), (10.0, np.pi / 2)),
                             np.pi / 100)
        # every wall node adjacent to the interior is Dirichlet
        assert np.all(grid.mask[1:-1, 0] == gr.BOUNDARY)
        assert np.all(grid.mask[1:-1, -1] == gr.BOUNDARY)
        assert np.all(grid.mask[0, 1:-1] == gr.BOUNDARY)
        assert np.all(grid.mask[-1, 1:-1] == gr.BOUNDARY)
        assert np.all(grid.mask[1:-1, 1:-1] == gr.INTERIOR)
        assert grid.interior_count() == (grid.shape[0] - 2) * (grid.shape[1] - 2)

    def test_ring_mask_is_annular(self, ring_solution):
        grid, _ = ring_solution
        i0, j0 = grid.node_index((0.0, 0.0))
        assert grid.mask[i0, j0] == gr.EXTERIOR
        assert grid.mask[grid.node_index((1.2, 0.0))] == gr.INTERIOR

    def test_disk_hole_masked(self):
        grid = gr.build_grid(geo.HalfplaneMinusDisk(),
                             geo.WindowBox((0.0, -3.0), (6.0, 3.0)), 0.05)
        assert grid.mask[grid.node_index((0.5, 0.0))] == gr.EXTERIOR
        assert grid.mask[grid.node_index((2.0, 0.0))] == gr.INTERIOR

    def test_coarse_spacing_rejected(self):
        with pytest.raises(geo.GeometryError):
            gr.build_grid(geo.Strip(), geo.WindowBox((0.0, -np.pi / 2), (8.0, np.pi / 2)), 1.0)

    def test_no_interior_rejected(self):
        window = geo.WindowBox((-5.0, -0.4), (-1.0, 0.4))
        with pytest.raises(geo.GeometryError):
            gr.build_grid(geo.Strip(), window, 0.02)

    def test_disconnected_interior_rejected(self):
        ring = geo.ConvexRing(geo.square_body(2.0), geo.square_body(0.5))
        with pytest.raises(geo.GeometryError):
            gr.build_grid(ring, geo.WindowBox((-2.0, -0.45), (2.0, 0.45)), 0.02)

    def test_interior_neighbors_never_exterior(self):
        # mask consistency: each interior node touches only interior or
        # Dirichlet nodes, even along the curved disk wall
        grid = gr.build_grid(geo.HalfplaneMinusDisk(),
                             geo.WindowBox((0.0, -3.0), (6.0, 3.0)), 0.05)
        interior = grid.mask == gr.INTERIOR
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            shifted = np.roll(grid.mask, (di, dj), axis=(0, 1))
            assert not np.any(interior & (shifted == gr.EXTERIOR))


class TestSolveDirichlet:
    def test_discrete_harmonic_polynomial_exact(self):
        # x^2 - y^2 is in the kernel of the 5-point stencil, so the solve
        # reproduces the boundary polynomial at interior nodes exactly
        window = geo.WindowBox((0.0, -0.5), (1.0, 0.5))
        grid = gr.build_grid(geo.RightHalfplane(), window, 1 / 32)
        g = lambda p: p[0] ** 2 - p[1] ** 2
        sol = gr.solve_dirichlet(grid, boundary_values=g)
        X, Y = np.meshgrid(grid.xs, grid.ys, indexing="ij")
        exact = X ** 2 - Y ** 2
        interior = grid.mask == gr.INTERIOR
        assert np.abs(sol.values - exact)[interior].max() <= 1e-7

    def test_zero_data_zero_solution(self, strip_grid):
        sol = gr.solve_dirichlet(strip_grid, boundary_values=None)
        assert np.abs(sol.values).max() == 0.0

    def test_maximum_principle_random_data(self, strip_grid):
        rng = np.random.default_rng(21)
        data = np.zeros(strip_grid.shape)
        boundary = strip_grid.mask == gr.BOUNDARY
        data[boundary] = rng.uniform(-1.0, 2.0, int(boundary.sum()))
        sol = gr.solve_dirichlet(strip_grid, boundary_values=data)
        interior = strip_grid.mask == gr.INTERIOR
        assert sol.values[interior].max() <= data[boundary].max()
        assert sol.values[interior].min() >= data[boundary].min()

    def test_iteration_cap_raises(self, strip_grid):
        src = np.ones(strip_grid.shape)
        with pytest.raises(gr.SolverError):
            gr.solve_dirichlet(strip_grid, source=src, tol=1e-13, maxiter=3)


class TestGreenFunction:
    def test_pole_is_maximum(self, strip_grid):
        G = gr.green_function(strip_grid, (2.0, 0.0))
        i, j = strip_grid.node_index((2.0, 0.0))
        assert G.values[i, j] == G.values.max()

    def test_positive_on_interior(self, strip_grid):
        G = gr.green_function(strip_grid, (2.0, 0.0))
        assert G.values[strip_grid.mask == gr.INTERIOR].min() > 0.0

    def test_symmetry(self, strip_grid):
        Ga = gr.green_function(strip_grid, (2.0, 0.0))
        Gb = gr.green_function(strip_grid, (4.0, 0.0))
        gab = Ga.values[strip_grid.node_index((4.0, 0.0))]
        gba = Gb.values[strip_grid.node_index((2.0, 0.0))]
        assert abs(gab - gba) / abs(gab) <= 1e-9

    def test_far_field_decay(self, strip_grid):
        G = gr.green_function(strip_grid, (2.0, 0.0))
        assert G.value((7.9, 0.0)) <= G.value((3.0, 0.0))

    def test_pole_outside_interior_raises(self, strip_grid):
        with pytest.raises(geo.GeometryError):
            gr.green_function(strip_grid, (0.0, 0.0))


@pytest.fixture(scope="module")
def strip_ratio():
    cfg = gr.MartinApproxConfig(x0=(0.5, 0.0), poles=(3.0, 4.0, 5.0),
                                probe_window=geo.WindowBox((0.5, -1.0), (2.0, 1.0)))
    return cfg, gr.martin_ratio(geo.Strip(), cfg, np.pi / 100)


class TestMartinRatio:
    def test_normalization_exact(self, strip_ratio):
        cfg, res = strip_ratio
        for it in res.iterates:
            assert it.ratio.value(np.asarray(cfg.x0)) == pytest.approx(1.0, abs=1e-10)

    def test_cauchy_decreasing(self, strip_ratio):
        _, res = strip_ratio
        assert all(b < a for a, b in zip(res.cauchy, res.cauchy[1:]))

    def test_matches_closed_form(self, strip_ratio):
        _, res = strip_ratio
        target = math.sinh(1.0) / math.sinh(0.5)
        assert res.final.value((1.0, 0.0)) == pytest.approx(target, rel=2e-2)

    def test_probe_outside_truncation_raises(self):
        cfg = gr.MartinApproxConfig(x0=(0.5, 0.0), poles=(1.0, 2.0),
                                    probe_window=geo.WindowBox((0.5, -1.0), (3.0, 1.0)))
        with pytest.raises(geo.GeometryError):
            gr.martin_ratio(geo.Strip(), cfg, np.pi / 100)

    def test_poles_must_increase(self):
        with pytest.raises(geo.GeometryError):
            gr.MartinApproxConfig(x0=(0.5, 0.0), poles=(4.0, 3.0),
                                  probe_window=geo.WindowBox((0.5, -1.0), (2.0, 1.0)))

    def test_reference_point_must_be_interior(self):
        cfg = gr.MartinApproxConfig(x0=(-1.0, 0.0), poles=(3.0, 4.0),
                                    probe_window=geo.WindowBox((0.5, -1.0), (2.0, 1.0)))
        with pytest.raises(geo.GeometryError):
            gr.martin_ratio(geo.Strip(), cfg, np.pi / 100)

    def test_truncation_enlargement_within_cauchy(self, strip_ratio):
        # widening the cap at a fixed pole moves the probe ratio by less
        # than the reported inter-iterate diagnostic
        cfg, res = strip_ratio
        pole = 3.0
        h = np.pi / 100
        big = gr.build_grid(geo.Strip(), geo.WindowBox((0.0, -np.pi / 2), (8.0, np.pi / 2)), h)
        G = gr.green_function(big, (pole, 0.0))
        ratio_big = G.values / G.value(np.asarray(cfg.x0))
        fld_big = gr.GridField(big, ratio_big)
        base = res.iterates[0].ratio
        moved = max(abs(fld_big.value(p) - base.value(p)) for p in res.probe_points)
        assert moved <= res.cauchy[0]


class TestHalfplaneRatio:
    def test_exterior_closed_form_within_3pct(self):
        cfg = gr.MartinApproxConfig(x0=(2.0, 0.0), poles=(8.0, 12.0, 16.0),
                                    probe_window=geo.WindowBox((2.0, -1.0), (4.0, 1.0)))
        res = gr.martin_ratio(geo.HalfplaneMinusDisk(), cfg, 0.05)
        target = (3.0 - 1.0 / 3.0) / (2.0 - 1.0 / 2.0)   # = 16/9
        got = res.final.value((3.0, 0.0))
        assert got == pytest.approx(target, rel=3e-2)
        assert all(b < a for a, b in zip(res.cauchy, res.cauchy[1:]))


class TestSuperlevelClouds:
    def test_strip_iterate_superlevel_convex(self, strip_ratio):
        _, res = strip_ratio
        h = res.final.grid.h
        window = geo.WindowBox((0.1, -1.5), (5.0, 1.5))
        cloud = gr.superlevel_boundary_nodes(res.final, 1.0, window=window)
        rep = ls.convexity_test(cloud, tol=2 * h)
        assert rep.verdict == "convex"

    def test_level_above_max_empty(self, strip_ratio):
        _, res = strip_ratio
        big = float(res.final.values.max()) + 1.0
        assert len(gr.superlevel_of_iterate(res.iterates[-1], big)) == 0

    def test_iterate_superlevel_threshold_positive(self, strip_ratio):
        _, res = strip_ratio
        with pytest.raises(geo.GeometryError):
            gr.superlevel_of_iterate(res.iterates[-1], 0.0)

    def test_halfplane_low_level_nonconvex(self):
        # the unit-disk hole dents the low superlevel sets of the ratio
        grid = gr.build_grid(geo.HalfplaneMinusDisk(), geo.WindowBox((0.0, -8.0), (16.0, 8.0)), 0.05)
        G = gr.green_function(grid, (8.0, 0.0))
        fld = gr.GridField(grid, G.values / G.value((2.0, 0.0)))
        window = geo.WindowBox((0.05, -4.0), (6.0, 4.0))
        cloud = gr.superlevel_boundary_nodes(fld, 0.1, window=window)
        rep = ls.convexity_test(cloud, tol=2 * grid.h)
        assert rep.verdict == "non_convex"


class TestRingHarness:
    def test_interior_strictly_between_data(self, ring_solution):
        grid, sol = ring_solution
        interior = grid.mask == gr.INTERIOR
        assert sol.values[interior].min() > 0.0
        assert sol.values[interior].max() < 1.0

    def test_superlevel_union_inner_convex(self, ring_solution):
        grid, sol = ring_solution
        inner = gr.inner_body_nodes(grid)
        for c in (0.25, 0.5, 0.75):
            cloud = gr.superlevel_boundary_nodes(sol, c, extra_member=inner)
            rep = ls.convexity_test(cloud, tol=2 * grid.h)
            assert rep.verdict == "convex", f"c={c}: deviation {rep.hull_deviation}"

    def test_annulus_alone_nonconvex(self, ring_solution):
        # without the inner body the superlevel cloud is an annulus
        grid, sol = ring_solution
        cloud = gr.superlevel_boundary_nodes(sol, 0.5)
        rep = ls.convexity_test(cloud, tol=2 * grid.h)
        assert rep.verdict == "non_convex"


class TestGridConvergenceOrder:
    def test_strip_order_at_least_1p7(self):
        # probe lattice aligned with the coarsest grid so interpolation does
        # not pollute the solver's O(h^2) signal
        h0 = np.pi / 50
        x0 = (16 * h0, 0.0)
        xs = np.arange(10, 33, 4) * h0
        ys = np.arange(-12, 13, 4) * h0
        exact = np.array([[math.sinh(x) * math.cos(y) / math.sinh(x0[0]) for y in ys] for x in xs])
        errs = []
        for h in (np.pi / 50, np.pi / 100, np.pi / 200):
            grid = gr.build_grid(geo.Strip(), geo.WindowBox((0.0, -np.pi / 2), (16.0, np.pi / 2)), h)
            G = gr.green_function(grid, (8.0, 0.0))
            fld = gr.GridField(grid, G.values / G.value(np.asarray(x0)))
            got = np.array([[fld.value((x, y)) for y in ys] for x in xs])
            errs.append(np.max(np.abs(got - exact) / np.abs(exact)))
        order = np.polyfit(np.log([np.pi / 50, np.pi / 100, np.pi / 200]), np.log(errs), 1)[0]
        assert order >= 1.7, f"errors {errs}, fitted order {order}"

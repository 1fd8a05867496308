"""Tests for the ready-made experiment helpers: disk setup, noise, masks,
field export, and the benchmark driver's plumbing."""

import numpy as np
import pytest

from curvelift import GridSpec, SolverConfig, face_average
from curvelift.energy import diagnostics
from curvelift.experiments import (
    DiskResult,
    add_noise,
    export_field,
    facet_pins_from_pixels,
    make_disk_problem,
    make_line_mask,
    make_pixel_mask,
    read_field,
    run_disk,
)


class TestMakeDiskProblem:
    def test_default_geometry(self):
        n, r, band = 40, 10.0, 10.0
        u0, free = make_disk_problem(n, r, band)
        assert u0.shape == (n, n) and free.shape == (n, n)
        assert free.dtype == bool
        x = np.arange(n) + 0.5
        d = np.hypot(x[None, :] - n / 2, x[:, None] - n / 2)
        np.testing.assert_array_equal(free, (d >= r - band / 2) & (d <= r + band / 2))
        np.testing.assert_array_equal(u0[d < r - band / 2], 1.0)
        np.testing.assert_array_equal(u0[d > r + band / 2], 0.0)
        np.testing.assert_array_equal(u0[free], 0.5)

    def test_free_band_is_annulus(self):
        u0, free = make_disk_problem(40, 10.0, 10.0)
        # the annulus 5 <= d <= 15 covers roughly pi*(15^2-5^2) = 628 pixels
        assert 550 < free.sum() < 700

    def test_zero_band_pins_everything(self):
        u0, free = make_disk_problem(20, 6.0, 0.0)
        assert not free.any()
        assert set(np.unique(u0)) <= {0.0, 1.0}

    def test_band_wider_than_disk_rejected(self):
        with pytest.raises(ValueError):
            make_disk_problem(40, 10.0, 20.0)

    def test_negative_band_rejected(self):
        with pytest.raises(ValueError):
            make_disk_problem(40, 10.0, -1.0)

    def test_annulus_must_fit_in_grid(self):
        with pytest.raises(ValueError):
            make_disk_problem(30, 10.0, 10.0)


class TestAddNoise:
    def test_gaussian_seed_determinism(self):
        img = np.linspace(0.0, 1.0, 64).reshape(8, 8)
        a = add_noise(img, "gaussian", 0.1, seed=3)
        b = add_noise(img, "gaussian", 0.1, seed=3)
        np.testing.assert_array_equal(a, b)
        c = add_noise(img, "gaussian", 0.1, seed=4)
        assert not np.array_equal(a, c)

    def test_gaussian_zero_level_is_identity(self):
        img = np.linspace(0.0, 1.0, 64).reshape(8, 8)
        np.testing.assert_array_equal(add_noise(img, "gaussian", 0.0), img)

    def test_gaussian_clipped_to_unit_range(self):
        img = np.full((16, 16), 0.5)
        out = add_noise(img, "gaussian", 10.0, seed=0)
        assert out.min() >= 0.0 and out.max() <= 1.0
        assert (out == 0.0).any() and (out == 1.0).any()

    def test_gaussian_does_not_mutate_input(self):
        img = np.full((8, 8), 0.5)
        keep = img.copy()
        add_noise(img, "gaussian", 0.2, seed=1)
        np.testing.assert_array_equal(img, keep)

    def test_salt_pepper_hits_exact_fraction(self):
        img = np.full((20, 20), 0.5)
        out = add_noise(img, "salt-pepper", 0.25, seed=7)
        changed = out != img
        assert changed.sum() == round(0.25 * img.size)
        assert set(np.unique(out[changed])) <= {0.0, 1.0}
        np.testing.assert_array_equal(out[~changed], 0.5)

    def test_salt_pepper_full_fraction(self):
        img = np.full((10, 10), 0.5)
        out = add_noise(img, "salt-pepper", 1.0, seed=2)
        assert set(np.unique(out)) <= {0.0, 1.0}

    def test_salt_pepper_fraction_validated(self):
        img = np.zeros((4, 4))
        with pytest.raises(ValueError):
            add_noise(img, "salt-pepper", 1.5)
        with pytest.raises(ValueError):
            add_noise(img, "salt-pepper", -0.1)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            add_noise(np.zeros((4, 4)), "speckle", 0.1)


class TestMasks:
    def test_pixel_mask_count_and_determinism(self):
        m = make_pixel_mask((12, 9), 0.3, seed=5)
        assert m.shape == (12, 9) and m.dtype == bool
        assert m.sum() == round(0.3 * 12 * 9)
        np.testing.assert_array_equal(m, make_pixel_mask((12, 9), 0.3, seed=5))
        assert not np.array_equal(m, make_pixel_mask((12, 9), 0.3, seed=6))

    def test_line_mask_removes_whole_rows(self):
        m = make_line_mask((10, 7), 0.4, seed=1)
        assert m.shape == (10, 7)
        row_states = m.all(axis=1) | ~m.any(axis=1)
        assert row_states.all()  # every row is entirely free or entirely kept
        assert m.all(axis=1).sum() == round(0.4 * 10)

    def test_facet_pins_hand_example(self):
        region = np.array([[1, 1, 0], [1, 1, 0], [0, 0, 0]], dtype=bool)
        pin1, pin2 = facet_pins_from_pixels(region)
        np.testing.assert_array_equal(
            pin1, np.array([[1, 1, 0], [0, 0, 0]], dtype=bool)
        )
        np.testing.assert_array_equal(
            pin2, np.array([[1, 0], [1, 0], [0, 0]], dtype=bool)
        )


class TestFieldExport:
    def test_roundtrip_bit_exact(self, tmp_path, random_flux):
        grid = GridSpec(n1=5, n2=4, ntheta=3)
        sigma = random_flux(grid)
        path = tmp_path / "field.csv"
        export_field(sigma, grid, path)
        rows = read_field(path)
        K, J, I = grid.shape_volumes
        assert rows.shape == (K * J * I, 7)
        hat = face_average(sigma, grid)
        np.testing.assert_array_equal(rows[:, 4].reshape(K, J, I), hat[0])
        np.testing.assert_array_equal(rows[:, 5].reshape(K, J, I), hat[1])
        np.testing.assert_array_equal(rows[:, 6].reshape(K, J, I), hat[2])

    def test_header_and_indices(self, tmp_path, random_flux):
        grid = GridSpec(n1=4, n2=4, ntheta=2)
        path = tmp_path / "field.csv"
        export_field(random_flux(grid), grid, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "i,j,k,theta,sigma1,sigma2,sigma_theta"
        K, J, I = grid.shape_volumes
        assert len(lines) == 1 + K * J * I
        rows = read_field(path)
        assert rows[:, 0].min() == 1 and rows[:, 0].max() == I
        assert rows[:, 1].min() == 1 and rows[:, 1].max() == J
        assert rows[:, 2].min() == 1 and rows[:, 2].max() == K
        np.testing.assert_allclose(
            rows[:, 3].reshape(K, J, I)[:, 0, 0],
            (np.arange(1, K + 1)) * grid.delta_theta,
            rtol=0, atol=0,
        )

    def test_diagnostics_recomputable_from_export(self, tmp_path, random_flux):
        grid = GridSpec(n1=6, n2=5, ntheta=4)
        sigma = random_flux(grid)
        path = tmp_path / "field.csv"
        export_field(sigma, grid, path)
        rows = read_field(path)
        K, J, I = grid.shape_volumes
        hat_file = np.stack([rows[:, 4 + c].reshape(K, J, I) for c in range(3)])
        d_file = diagnostics(hat_file, grid)
        d_mem = diagnostics(face_average(sigma, grid), grid)
        assert abs(d_file.h_tv - d_mem.h_tv) <= 1e-9
        assert abs(d_file.h_ac - d_mem.h_ac) <= 1e-9
        assert abs(d_file.h_sc - d_mem.h_sc) <= 1e-9

    def test_export_is_deterministic(self, tmp_path, random_flux):
        grid = GridSpec(n1=4, n2=4, ntheta=2)
        sigma = random_flux(grid)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        export_field(sigma, grid, p1)
        export_field(sigma, grid, p2)
        assert p1.read_bytes() == p2.read_bytes()


class TestRunDisk:
    def test_explicit_config_runs_directly(self):
        cfg = SolverConfig(max_iters=200, check_every=100)
        res = run_disk(n=12, r=3.5, band=3.0, alpha=2.0, ntheta=4,
                       kind="tsc", config=cfg)
        assert isinstance(res, DiskResult)
        assert res.u.shape == (12, 12)
        assert res.grid.ntheta == 4
        assert res.report.iterations <= 200
        assert np.isfinite(res.diag.h_tv)

    def test_explicit_config_is_reproducible(self):
        cfg = SolverConfig(max_iters=150, check_every=50)
        a = run_disk(n=12, r=3.5, band=3.0, alpha=2.0, ntheta=4, config=cfg)
        b = run_disk(n=12, r=3.5, band=3.0, alpha=2.0, ntheta=4, config=cfg)
        np.testing.assert_array_equal(a.u, b.u)
        np.testing.assert_array_equal(a.sigma.st, b.sigma.st)

    def test_zero_band_returns_input_immediately(self):
        res = run_disk(n=16, r=5.0, band=0.0, ntheta=4)
        u0, _ = make_disk_problem(16, 5.0, 0.0)
        np.testing.assert_array_equal(res.u, u0)
        assert res.report.converged
        assert res.report.iterations == 0
        np.testing.assert_array_equal(res.sigma.st, 0.0)

import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from mirrorqsd.model import DomainError
from mirrorqsd.scan import (
    CSV_COLUMNS,
    ConfigError,
    RegionRow,
    ScanConfig,
    emulate_point,
    equality_locus,
    figure_data,
    gap,
    locus_report,
    printed_mcd_locus,
    region_row,
    rows_to_csv,
    rows_to_json,
    scan,
    write_rows,
)
from mirrorqsd.strategies import Strategy, mcd_nu

PI = math.pi


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestScanConfig:
    def test_defaults_valid(self):
        cfg = ScanConfig()
        assert cfg.strategy is Strategy.MED
        assert len(cfg.p_values()) == 50

    def test_degenerate_grid(self):
        cfg = ScanConfig(theta_grid=(PI / 4, PI / 4, 1))
        np.testing.assert_array_equal(cfg.theta_values(), [PI / 4])

    @pytest.mark.parametrize(
        "kwargs, field",
        [
            ({"p_grid": (0.0, 0.5, 10)}, "p_grid"),
            ({"p_grid": (0.1, 0.6, 10)}, "p_grid"),
            ({"p_grid": (0.4, 0.1, 10)}, "p_grid"),
            ({"p_grid": (0.1, 0.4, 1)}, "p_grid"),
            ({"theta_grid": (0.1, PI / 2, 10)}, "theta_grid"),
            ({"n_photons": -1}, "n_photons"),
            ({"runs": 0}, "runs"),
            ({"format": "xml"}, "format"),
        ],
    )
    def test_errors_name_field(self, kwargs, field):
        with pytest.raises(ConfigError, match=field):
            ScanConfig(**kwargs)

    def test_string_enums(self):
        cfg = ScanConfig(strategy="mcd", mu_convention="printed")
        assert cfg.strategy is Strategy.MCD


class TestScan:
    def test_med_quarter_pi_no_advantage(self):
        rows = scan(ScanConfig(p_grid=(0.05, 0.5, 10), theta_grid=(PI / 4, PI / 4, 1)))
        assert len(rows) == 10
        assert not any(r.advantage for r in rows)

    def test_med_row_advantage(self):
        row = region_row(0.45, 5 * PI / 12, Strategy.MED)
        assert row.advantage
        assert row.quantum_value == pytest.approx(0.675, abs=1e-12)
        assert row.noncontextual_value == pytest.approx(0.65580, abs=1e-5)

    def test_mcd_row_gap(self):
        assert region_row(0.1, PI / 3, Strategy.MCD).gap == pytest.approx(0.2217195, abs=1e-7)

    def test_order_theta_major(self):
        rows = scan(ScanConfig(p_grid=(0.1, 0.2, 2), theta_grid=(0.3, 0.6, 2)))
        assert [(r.theta, r.p) for r in rows] == [(0.3, 0.1), (0.3, 0.2), (0.6, 0.1), (0.6, 0.2)]

    def test_row_algebra(self):
        rows = scan(ScanConfig(strategy="mcd", p_grid=(0.01, 0.5, 15), theta_grid=(0.01, 1.56, 15)))
        for r in rows:
            assert r.gap == pytest.approx(r.quantum_value - r.noncontextual_value, abs=1e-12)
            assert r.mc_mean is None

    def test_monte_carlo_columns(self):
        rows = scan(ScanConfig(p_grid=(0.2, 0.4, 2), theta_grid=(0.5, 0.5, 1), n_photons=2000, runs=5, seed=4))
        for r in rows:
            assert (r.n_photons, r.runs, r.seed) == (2000, 5, 4)
            assert abs(r.mc_mean - r.quantum_value) < 0.05
            assert r.mc_std > 0

    def test_byte_identical_csv(self):
        cfg = ScanConfig(strategy="mcd", p_grid=(0.05, 0.5, 4), theta_grid=(0.2, 1.3, 3),
                         n_photons=1000, runs=3, seed=7)
        assert rows_to_csv(scan(cfg)) == rows_to_csv(scan(cfg))


class TestEmulate:
    def test_mcd_large_nu_falls_back_to_povm(self):
        assert mcd_nu(0.45, PI / 3) > 1
        est, recs = emulate_point(0.45, PI / 3, Strategy.MCD, 5000, 4, 0)
        assert recs[0].positions == {}
        assert est.runs == 4

    def test_walk_records_carry_positions(self):
        _, recs = emulate_point(0.3, PI / 12, Strategy.MED, 100, 1, 0)
        assert sorted(recs[0].positions.values()) == [0, 2, 4]


class TestSerialization:
    def test_csv_schema(self):
        row = RegionRow(0.1, 0.2, 0.5, 0.25, 0.25, True)
        text = rows_to_csv([row])
        header, line = text.splitlines()
        assert tuple(header.split(",")) == CSV_COLUMNS
        assert line == "0.1,0.2,0.5,0.25,0.25,true,,,,,"

    def test_csv_round_trips_floats(self):
        rows = scan(ScanConfig(p_grid=(0.1, 0.5, 3), theta_grid=(0.3, 0.3, 1)))
        parsed = list(csv.DictReader(io.StringIO(rows_to_csv(rows))))
        for r, d in zip(rows, parsed):
            assert float(d["quantum"]) == r.quantum_value
            assert float(d["gap"]) == r.gap

    def test_json(self):
        payload = json.loads(rows_to_json([RegionRow(0.1, 0.2, 0.5, 0.25, 0.25, False)]))
        assert payload == [dict(zip(CSV_COLUMNS, (0.1, 0.2, 0.5, 0.25, 0.25, False) + (None,) * 5))]

    def test_write_rows(self, tmp_path):
        path = write_rows([RegionRow(0.1, 0.2, 0.5, 0.25, 0.25, False)], tmp_path / "a" / "b.json", "json")
        assert json.loads(path.read_text())[0]["p"] == 0.1


class TestLocus:
    def test_med_pi_over_twelve(self):
        assert gap(0.30, PI / 12, "med") == pytest.approx(-0.028, abs=1e-3)
        assert gap(0.35, PI / 12, "med") == pytest.approx(0.067, abs=1e-3)
        root = equality_locus("med", PI / 12)
        assert 0.30 < root < 0.35
        assert root == pytest.approx(0.3141678, abs=1e-7)

    def test_med_quarter_pi_none(self):
        assert equality_locus("med", PI / 4) is None

    def test_mcd_quarter_pi_boundary(self):
        assert equality_locus("mcd", PI / 4) == pytest.approx(0.5, abs=1e-12)

    def test_mcd_interior_tangent(self):
        assert equality_locus("mcd", PI / 3) == pytest.approx(1 / 3, abs=1e-6)

    def test_mcd_out_of_range_none(self):
        assert equality_locus("mcd", PI / 6) is None

    @settings(max_examples=30)
    @given(hst.floats(min_value=0.05, max_value=1.5), hst.sampled_from(["med", "mcd"]))
    def test_root_is_a_zero(self, theta, strategy):
        root = equality_locus(strategy, theta)
        if root is not None:
            assert abs(gap(root, theta, strategy)) <= 1e-9

    @settings(max_examples=30)
    @given(hst.floats(min_value=math.asin(math.sqrt(0.5)) + 1e-3, max_value=1.5))
    def test_mcd_closed_form_locus(self, theta):
        # the MCD gap is non-negative and vanishes on p = 1/(4 sin^2 theta)
        root = equality_locus("mcd", theta)
        assert root == pytest.approx(1 / (4 * math.sin(theta) ** 2), abs=1e-5)

    @pytest.mark.parametrize("bracket", [(0.0, 0.5), (0.2, 0.1), (0.1, 0.6)])
    def test_bad_bracket(self, bracket):
        with pytest.raises(DomainError):
            equality_locus("med", 0.5, bracket)

    def test_bad_theta(self):
        with pytest.raises(DomainError):
            equality_locus("med", PI / 2)

    @pytest.mark.parametrize("theta, expected", [(PI / 6, 1.5), (PI / 3, 7 / 6), (PI / 4, -1.0)])
    def test_printed_curve(self, theta, expected):
        assert printed_mcd_locus(theta) == pytest.approx(expected, abs=1e-4)

    def test_report(self):
        rep = locus_report("mcd", PI / 3)
        assert rep["printed_in_range"] is False
        assert rep["discrepancy"] == pytest.approx(7 / 6 - 1 / 3, abs=1e-6)
        assert abs(rep["gap_at_root"]) < 1e-9
        assert "printed_curve" not in locus_report("med", PI / 12)


class TestFigureData:
    def test_fig3a_curves(self, tmp_path):
        (path,) = figure_data("fig3a", ScanConfig(p_grid=(0.01, 0.5, 50)), tmp_path)
        rows = _read_csv(path)
        assert len(rows) == 150
        quarter = [r for r in rows if float(r["theta"]) == PI / 4]
        assert all(float(r["quantum"]) <= float(r["noncontextual"]) + 1e-9 for r in quarter)

    def test_fig4a_point(self, tmp_path):
        (path,) = figure_data("fig4a", ScanConfig(p_grid=(0.1, 0.5, 5)), tmp_path)
        row = next(r for r in _read_csv(path) if float(r["theta"]) == PI / 3 and float(r["p"]) == 0.1)
        assert float(row["quantum"]) == pytest.approx(0.52941, abs=1e-5)
        assert float(row["noncontextual"]) == pytest.approx(0.30769, abs=1e-5)

    def test_fig3a_points(self, tmp_path):
        cfg = ScanConfig(p_grid=(0.1, 0.5, 3), n_photons=1000, runs=3)
        paths = figure_data("fig3a", cfg, tmp_path)
        assert [p.name for p in paths] == ["fig3a_curves.csv", "fig3a_points.csv"]
        points = _read_csv(paths[1])
        assert len(points) == 15
        assert {float(r["p"]) for r in points} == {0.1, 0.2, 0.3, 0.4, 0.5}

    def test_fig3b_two_sided_advantage(self, tmp_path):
        cfg = ScanConfig(p_grid=(0.45, 0.45, 1), theta_grid=(0.01, PI / 2 - 0.01, 201))
        (path,) = figure_data("fig3b", cfg, tmp_path)
        rows = _read_csv(path)
        below = [r for r in rows if float(r["theta"]) < PI / 4 and r["advantage"] == "true"]
        above = [r for r in rows if float(r["theta"]) > PI / 4 and r["advantage"] == "true"]
        assert below and above
        mid = min(rows, key=lambda r: abs(float(r["theta"]) - PI / 4))
        assert float(mid["theta"]) == pytest.approx(PI / 4)
        assert mid["advantage"] == "false"

    def test_fig4b_surface_is_mcd(self, tmp_path):
        cfg = ScanConfig(p_grid=(0.1, 0.5, 3), theta_grid=(0.2, 1.2, 3), n_photons=100)
        (path,) = figure_data("fig4b", cfg, tmp_path)
        rows = _read_csv(path)
        assert len(rows) == 9
        assert all(r["mc_mean"] == "" for r in rows)

    def test_unknown_figure(self, tmp_path):
        with pytest.raises(ValueError, match="fig5"):
            figure_data("fig5", ScanConfig(), tmp_path)

import json

import numpy as np
import pytest

from regbreaks.core import PreconditionError, TimeSeries
from regbreaks.io import (
    FormatError,
    average_series,
    dump_report,
    impute_temporal_average,
    load_csv,
    model_to_dict,
    read_plot_tsv,
    write_csv,
    write_plot_tsv,
)
from regbreaks.regdecomp import regularized_decompose
from regbreaks.synth import fig2_spec, gen_series


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadCsv:
    def test_missing_middle_cell(self, tmp_path):
        ds = load_csv(write(tmp_path, "t,y\n1,1.0\n2,\n3,3.0\n"))
        (s,) = ds.series
        assert s.label == "y"
        np.testing.assert_array_equal(s.mask, [False, True, False])
        assert s.values[0] == 1.0 and s.values[2] == 3.0 and np.isnan(s.values[1])

    def test_custom_sentinel_and_delimiter(self, tmp_path):
        ds = load_csv(write(tmp_path, "a;b\n1;-999\n2;4\n"), delimiter=";", na_values=("-999",))
        np.testing.assert_array_equal(ds.series[1].mask, [True, False])
        np.testing.assert_array_equal(ds.series[0].values, [1.0, 2.0])

    def test_column_selection(self, tmp_path):
        ds = load_csv(write(tmp_path, "time,a,b\n1,1,2\n2,3,4\n"), columns=["b"])
        assert ds.names() == ["b"]
        np.testing.assert_array_equal(ds.series[0].values, [2.0, 4.0])

    def test_row_average(self, tmp_path, rng):
        data = rng.normal(size=(15, 20))
        data[3, 4] = data[7, 0] = data[7, 19] = np.nan
        lines = [",".join(f"c{k}" for k in range(20))]
        lines += [",".join("" if np.isnan(v) else repr(float(v)) for v in row) for row in data]
        ds = load_csv(write(tmp_path, "\n".join(lines) + "\n"), average=True)
        (s,) = ds.series
        np.testing.assert_allclose(s.values, np.nanmean(data, axis=1), rtol=1e-14)
        assert not s.has_missing

    def test_round_trip_bit_exact(self, tmp_path, rng):
        vals = rng.normal(size=30) * 1e3
        vals[5] = 0.1 + 0.2
        mask = np.zeros(30, dtype=bool)
        mask[[2, 17]] = True
        path = tmp_path / "rt.csv"
        write_csv(path, [TimeSeries(vals, mask, label="x"), TimeSeries(-vals, label="z")])
        ds = load_csv(path)
        assert ds.names() == ["x", "z"]
        x, z = ds.series
        np.testing.assert_array_equal(x.mask, mask)
        assert x.values[~mask].tobytes() == vals[~mask].tobytes()
        assert z.values.tobytes() == (-vals).tobytes()

    def test_unparsable_cell_location(self, tmp_path):
        with pytest.raises(FormatError, match=r":3: column 'y'.*'abc'"):
            load_csv(write(tmp_path, "t,y\n1,1.0\n2,abc\n"))

    def test_ragged_row(self, tmp_path):
        with pytest.raises(FormatError, match=r":3: expected 2 fields"):
            load_csv(write(tmp_path, "t,y\n1,1.0\n2,2.0,9\n"))

    def test_unknown_column(self, tmp_path):
        with pytest.raises(FormatError):
            load_csv(write(tmp_path, "t,y\n1,1\n"), columns=["q"])

    def test_empty(self, tmp_path):
        with pytest.raises(FormatError):
            load_csv(write(tmp_path, ""))


class TestImputation:
    def test_mean_fill(self, tmp_path):
        ds = impute_temporal_average(load_csv(write(tmp_path, "t,y\n1,1.0\n2,\n3,3.0\n")))
        np.testing.assert_array_equal(ds.series[0].values, [1.0, 2.0, 3.0])
        assert ds.imputation_log == (("y", 2, 2.0),)
        assert not ds.series[0].has_missing

    def test_identity_without_missing(self, tmp_path):
        ds = load_csv(write(tmp_path, "y\n1\n2\n"))
        out = impute_temporal_average(ds)
        assert out.imputation_log == ()
        np.testing.assert_array_equal(out.series[0].values, [1.0, 2.0])

    def test_single_observation(self, tmp_path):
        ds = impute_temporal_average(load_csv(write(tmp_path, "y\n5.0\nNA\n")))
        np.testing.assert_array_equal(ds.series[0].values, [5.0, 5.0])

    def test_fully_missing(self, tmp_path):
        with pytest.raises(PreconditionError, match="'b'"):
            impute_temporal_average(load_csv(write(tmp_path, "a,b\n1,\n2,NA\n")))

    def test_observed_cells_untouched(self, tmp_path, rng):
        vals = rng.normal(size=40)
        mask = rng.random(40) < 0.3
        mask[0] = False
        path = tmp_path / "m.csv"
        write_csv(path, [TimeSeries(vals, mask, label="y")])
        out = impute_temporal_average(load_csv(path)).series[0].values
        assert out[~mask].tobytes() == vals[~mask].tobytes()
        np.testing.assert_allclose(out[mask], vals[~mask].mean())

    def test_average_after_impute(self, tmp_path):
        ds = impute_temporal_average(load_csv(write(tmp_path, "a,b\n1,\n3,4\n")))
        np.testing.assert_array_equal(average_series(ds).series[0].values, [2.5, 3.5])


class TestOutputs:
    def test_plot_file_reparses_exactly(self, tmp_path):
        y = gen_series(fig2_spec(seed=3))
        _, model = regularized_decompose(y, 0.1)
        path = tmp_path / "plot.tsv"
        write_plot_tsv(path, y.values, model)
        cols = read_plot_tsv(path)
        np.testing.assert_array_equal(cols["t"], np.arange(1, 101))
        np.testing.assert_array_equal(cols["observed"], y.values)
        np.testing.assert_array_equal(cols["trend"], model.trend_values())
        np.testing.assert_array_equal(cols["seasonal"], model.seasonal_values())
        np.testing.assert_array_equal(cols["residual"], model.residuals)
        np.testing.assert_array_equal(cols["adjusted"], y.values - model.seasonal_values())

    def test_report_is_strict_json(self):
        text = dump_report({"b": 1, "a": [1.5]})
        assert text == '{\n  "a": [\n    1.5\n  ],\n  "b": 1\n}\n'
        with pytest.raises(ValueError):
            dump_report({"x": float("nan")})

    def test_model_dict(self):
        _, model = regularized_decompose(gen_series(fig2_spec(seed=0)), 0.1)
        d = json.loads(dump_report(model_to_dict(model)))
        assert d["T"] == 100 and d["seasonal"][0]["d"] == 10
        assert d["residuals"]["norm"] == pytest.approx(np.linalg.norm(model.residuals))

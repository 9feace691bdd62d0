"""Tests for CSV/JSON formats, digests, and artifact round trips."""

import json

import pytest

from learncurve import (
    DataError,
    MeasurementSet,
    ThreePhaseModel,
    build_nested_subsets,
    fit_loglog,
    inject_label_noise,
    synth_curve,
)
from learncurve.artifacts import (
    FitArtifact,
    dumps_canonical,
    load_fit_artifact,
    manifest_from_dict,
    manifest_to_dict,
    read_images,
    read_manifest,
    read_measurements,
    sha256_path,
    write_json,
    write_manifest,
    write_measurements,
)

MODEL = ThreePhaseModel(alpha=-0.62, c=0.5 * 900**0.62, plateau=1.0, floor=0.0)


def synth_set(sigma=0.05, seed=3):
    return synth_curve(MODEL, [900, 1800, 3600, 9000], 5, sigma, seed, metric="top1_error")


class TestMeasurementCsv:
    def test_round_trip_is_byte_identical(self, tmp_path):
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        write_measurements(synth_set(), first)
        write_measurements(read_measurements(first), second)
        assert first.read_bytes() == second.read_bytes()

    def test_parse_values(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("metric,n,replicate,value\ntop1_error,900,0,0.35\ntop1_error,900,1,0.33\n")
        ms = read_measurements(path)
        assert len(ms) == 2
        assert ms.distinct_n() == [900]

    def test_header_only_parses_to_empty_set(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("metric,n,replicate,value\n")
        ms = read_measurements(path)
        assert len(ms) == 0

    def test_wrong_header_rejected_with_line_number(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("metric,n,rep,value\n")
        with pytest.raises(DataError, match=":1:"):
            read_measurements(path)

    def test_extra_column_rejected(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("metric,n,replicate,value\ntop1_error,900,0,0.35,surprise\n")
        with pytest.raises(DataError, match=":2:"):
            read_measurements(path)

    def test_malformed_number_names_the_line(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("metric,n,replicate,value\na,900,0,0.1\na,901,zero,0.2\n")
        with pytest.raises(DataError, match=":3:"):
            read_measurements(path)

    def test_duplicate_key_names_the_line(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("metric,n,replicate,value\na,900,0,0.1\na,900,0,0.2\n")
        with pytest.raises(DataError, match=":3: duplicate"):
            read_measurements(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="no such file"):
            read_measurements(tmp_path / "nope.csv")

    def test_full_precision_survives(self, tmp_path):
        ms = MeasurementSet.from_rows([("m", 10, 0, 0.1 + 0.2), ("m", 20, 0, 1e-12)])
        path = tmp_path / "m.csv"
        write_measurements(ms, path)
        assert read_measurements(path) == ms


class TestImagesCsv:
    def test_parse(self, tmp_path):
        path = tmp_path / "img.csv"
        path.write_text("image_id,class,capture_group\nx1,barley,\nx2,oat,g7\n")
        rows = read_images(path)
        assert rows == [("x1", "barley", None), ("x2", "oat", "g7")]

    def test_wrong_header(self, tmp_path):
        path = tmp_path / "img.csv"
        path.write_text("id,class,group\n")
        with pytest.raises(DataError, match=":1:"):
            read_images(path)


class TestFitArtifact:
    def test_round_trip(self, tmp_path):
        csv_path = tmp_path / "m.csv"
        write_measurements(synth_set(), csv_path)
        fit = fit_loglog(read_measurements(csv_path).only("top1_error"))
        art = FitArtifact.from_fit(
            fit, "top1_error", sha256_path(csv_path), {"n_min": None, "method": "loglog"}
        )
        out = tmp_path / "fit.json"
        write_json(art.to_dict(), out)
        loaded = load_fit_artifact(out)
        assert loaded.fit() == fit
        assert loaded.input_digest == sha256_path(csv_path)
        assert loaded.params["method"] == "loglog"

    def test_rerun_identical_except_timestamp(self, tmp_path):
        csv_path = tmp_path / "m.csv"
        write_measurements(synth_set(), csv_path)

        def make():
            fit = fit_loglog(read_measurements(csv_path).only("top1_error"))
            return FitArtifact.from_fit(fit, "top1_error", sha256_path(csv_path), {}).to_dict()

        a, b = make(), make()
        a.pop("created_at"), b.pop("created_at")
        assert dumps_canonical(a) == dumps_canonical(b)

    def test_loading_a_pair_file_points_at_the_problem(self, tmp_path):
        out = tmp_path / "pair.json"
        write_json({"kind": "fit_pair", "loglog": {}, "nonlinear": {}}, out)
        with pytest.raises(DataError, match="both"):
            load_fit_artifact(out)

    def test_not_json(self, tmp_path):
        path = tmp_path / "fit.json"
        path.write_text("{broken")
        with pytest.raises(DataError, match="not valid JSON"):
            load_fit_artifact(path)


class TestCanonicalJson:
    def test_key_order_fixed(self):
        assert dumps_canonical({"b": 1, "a": 2}) == dumps_canonical({"a": 2, "b": 1})

    def test_floats_round_trip(self):
        text = dumps_canonical({"x": 0.1 + 0.2})
        assert json.loads(text)["x"] == 0.1 + 0.2


class TestManifestJson:
    def test_round_trip(self, tmp_path):
        pool = [(f"img{i:03d}", f"c{i % 3}", f"g{i % 5}") for i in range(60)]
        m = inject_label_noise(build_nested_subsets(pool, [6, 30], seed=2), 0.2, seed=7)
        path = tmp_path / "m.json"
        write_manifest(m, path)
        assert read_manifest(path) == m

    def test_dict_round_trip_preserves_diagnostics(self):
        pool = [(f"img{i:03d}", f"c{i % 2}", f"g{i % 4}") for i in range(40)]
        m = build_nested_subsets(pool, [10, 20], seed=2)
        assert manifest_from_dict(manifest_to_dict(m)) == m

    def test_wrong_kind_rejected(self, tmp_path):
        path = tmp_path / "m.json"
        write_json({"kind": "fit"}, path)
        with pytest.raises(DataError, match="manifest"):
            read_manifest(path)

import json

import numpy as np
import pandas as pd
import pytest

from indunilm import cli, fileio
from indunilm.augment import relative_contributions
from indunilm.pipeline import WindowedDataset, WindowSpec, write_windows
from indunilm.sim_core import APPLIANCES


@pytest.fixture(scope="module")
def sim_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("sim")
    assert cli.main(["simulate", "--preset", "office-offenbach", "--seed", "7", "--out", str(out)]) == 0
    return out


@pytest.fixture(scope="module")
def office_csv(sim_dir):
    return sim_dir / "office-offenbach-seed7.csv"


def _hourly_csv(hourly, path):
    return fileio.write_facility_csv(hourly, path)


@pytest.mark.parametrize("name", fileio.preset_names())
def test_config_round_trip(name):
    cfg = fileio.load_preset(name)
    assert fileio.parse_config(fileio.format_config(cfg)) == cfg


def test_nine_presets():
    assert len(fileio.preset_names()) == 9


def test_unknown_preset():
    with pytest.raises(fileio.SchemaError):
        fileio.load_preset("office-atlantis")


def test_csv_round_trip(hourly, tmp_path):
    path = _hourly_csv(hourly, tmp_path / "h.csv")
    back = fileio.read_facility_csv(path, config=hourly.config)
    assert back.sample_period == hourly.sample_period
    assert np.array_equal(back.aggregate, hourly.aggregate)
    assert np.array_equal(back.timestamps, hourly.timestamps)
    for k in APPLIANCES:
        assert np.array_equal(back.column(k), hourly.column(k))
    for name in ("temperature", "diffuse_radiation", "direct_radiation"):
        assert np.array_equal(getattr(back.weather, name), getattr(hourly.weather, name))


def test_csv_header_is_fixed(hourly, tmp_path):
    path = _hourly_csv(hourly, tmp_path / "h.csv")
    assert path.read_text().splitlines()[0] == ",".join(fileio.CSV_COLUMNS)


def test_aggregate_mismatch_rejected_in_strict_mode(hourly, tmp_path, caplog):
    path = _hourly_csv(hourly, tmp_path / "h.csv")
    frame = pd.read_csv(path)
    frame["aggregate_W"] *= 1.1
    frame.to_csv(path, index=False)
    with pytest.raises(fileio.DataError, match="aggregate"):
        fileio.read_facility_csv(path)
    fileio.read_facility_csv(path, strict=False)
    assert "aggregate" in caplog.text


def test_sign_violation_rejected(hourly, tmp_path):
    path = _hourly_csv(hourly, tmp_path / "h.csv")
    frame = pd.read_csv(path)
    frame.loc[5, "pv_W"] = 10.0
    frame["aggregate_W"] = frame[[fileio.APPLIANCE_COLUMNS[k] for k in APPLIANCES]].sum(axis=1)
    frame.to_csv(path, index=False)
    with pytest.raises(fileio.DataError, match="PV"):
        fileio.read_facility_csv(path)


def test_missing_column_named(hourly, tmp_path):
    path = _hourly_csv(hourly, tmp_path / "h.csv")
    pd.read_csv(path).drop(columns=["chp_W"]).to_csv(path, index=False)
    with pytest.raises(fileio.SchemaError, match="chp_W"):
        fileio.read_facility_csv(path)


def test_non_uniform_grid_rejected(hourly, tmp_path):
    path = _hourly_csv(hourly, tmp_path / "h.csv")
    frame = pd.read_csv(path).drop(index=[3])
    frame.to_csv(path, index=False)
    with pytest.raises(fileio.DataError, match="uniform"):
        fileio.read_facility_csv(path)


def test_manifest_round_trip(tmp_path):
    f = tmp_path / "x.txt"
    f.write_text("hello")
    m = fileio.RunManifest(["indunilm", "x"], fileio.sha256_text("cfg"), [1, 2])
    m.add_output(f)
    m.wall_clock_s = 1.5
    path = m.write(tmp_path / "m.json")
    assert "wall_clock_s" not in json.loads(path.read_text())
    back = fileio.RunManifest.read(path)
    assert back.outputs == {"x.txt": fileio.sha256_file(f)}


def test_simulate_writes_csv_and_manifest(sim_dir, office_csv):
    manifest = json.loads((sim_dir / "office-offenbach-seed7.manifest.json").read_text())
    assert manifest["seeds"] == [7]
    assert manifest["outputs"]["office-offenbach-seed7.csv"] == fileio.sha256_file(office_csv)
    assert len(fileio.read_facility_csv(office_csv)) == 525_600


def test_simulate_rerun_is_byte_identical(sim_dir, tmp_path):
    assert cli.main(["simulate", "--preset", "office-offenbach", "--seed", "7", "--out", str(tmp_path)]) == 0
    for name in ("office-offenbach-seed7.csv", "office-offenbach-seed7.cfg"):
        assert (tmp_path / name).read_bytes() == (sim_dir / name).read_bytes()
    # the command line differs in --out, everything else is identical
    a = json.loads((tmp_path / "office-offenbach-seed7.manifest.json").read_text())
    b = json.loads((sim_dir / "office-offenbach-seed7.manifest.json").read_text())
    assert a["outputs"] == b["outputs"] and a["config_digest"] == b["config_digest"]


@pytest.mark.parametrize("s", [1.5, 1.73])
def test_augment_cli_scales_ba(office_csv, tmp_path, s):
    assert cli.main(["augment", "--input", str(office_csv), "--method", "amda", "--s", str(s), "--out", str(tmp_path)]) == 0
    src = fileio.read_facility_csv(office_csv)
    aug = fileio.read_facility_csv(tmp_path / f"office-offenbach-seed7.amda-s{s:g}.csv")
    p_ba = relative_contributions(src).p["BA"]
    assert p_ba == pytest.approx(0.601, abs=0.01)
    factor = s * (1 - p_ba)
    assert np.allclose(aug.column("BA"), factor * src.column("BA"), rtol=1e-12, atol=0)
    if s == 1.5:
        assert factor == pytest.approx(0.598, abs=0.015)
    plan = json.loads((tmp_path / f"office-offenbach-seed7.amda-s{s:g}.plan.json").read_text())
    assert plan["factors"]["BA"] == pytest.approx(factor, rel=1e-12)


def test_augment_rdm_writes_fourteen_copies(hourly, tmp_path):
    src = _hourly_csv(hourly, tmp_path / "in" / "h.csv")
    assert cli.main(["augment", "--input", str(src), "--method", "rdm", "--out", str(tmp_path / "o")]) == 0
    assert len(list((tmp_path / "o").glob("h.rdm-*.csv"))) == 14
    manifest = json.loads((tmp_path / "o" / "h.rdm.manifest.json").read_text())
    assert len(manifest["outputs"]) == 28


def test_invalid_flag_exits_2_without_files(tmp_path):
    out = tmp_path / "never"
    assert cli.main(["simulate", "--preset", "office-offenbach", "--bogus", "--out", str(out)]) == 2
    assert not out.exists()


def test_unknown_subcommand_exits_2():
    assert cli.main(["teleport"]) == 2


def test_usage_error_exits_2(office_csv, tmp_path):
    assert cli.main(["augment", "--input", str(office_csv), "--method", "amda", "--out", str(tmp_path)]) == 2


def test_data_error_exits_3(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("timestamp,aggregate_W\n")
    assert cli.main(["augment", "--input", str(bad), "--method", "amda", "--s", "1.5", "--out", str(tmp_path)]) == 2
    assert cli.main(["augment", "--input", str(tmp_path / "missing.csv"), "--method", "amda", "--s", "1.5", "--out", str(tmp_path)]) == 3


def test_numeric_failure_exits_4(tmp_path):
    x = np.random.default_rng(0).normal(size=(50, 16)).astype(np.float32)
    good = WindowedDataset(x, np.zeros(50, np.float32), np.arange(50), WindowSpec(16, 1))
    bad = WindowedDataset(x, np.full(50, np.nan, np.float32), np.arange(50), WindowSpec(16, 1))
    write_windows(bad, tmp_path / "bad.windows")
    write_windows(good, tmp_path / "good.windows")
    code = cli.main(["train", "--train", str(tmp_path / "bad.windows"), "--val", str(tmp_path / "good.windows"),
                     "--arch", "Linear", "--max-epochs", "3", "--patience", "1", "--out", str(tmp_path)])
    assert code == 4


def test_output_dir_from_environment(hourly, tmp_path, monkeypatch):
    src = _hourly_csv(hourly, tmp_path / "h.csv")
    monkeypatch.setenv(fileio.OUTPUT_DIR_ENV, str(tmp_path / "env"))
    assert cli.main(["augment", "--input", str(src), "--method", "amda", "--s", "2", "--seed", "1"]) == 0
    assert (tmp_path / "env" / "h.amda.manifest.json").exists()


def test_preprocess_train_predict_evaluate(hourly, tmp_path):
    src = _hourly_csv(hourly, tmp_path / "h.csv")
    out = tmp_path / "o"
    args = ["preprocess", "--input", str(src), "--sample-period", "3600", "--window", "48", "--stride", "1", "--out", str(out)]
    assert cli.main(args) == 0
    w = {n: out / f"h.{n}.windows" for n in ("train", "val", "test")}
    scalers = out / "h.scalers.json"
    assert cli.main(["train", "--train", str(w["train"]), "--val", str(w["val"]), "--arch", "MLP",
                     "--max-epochs", "3", "--patience", "2", "--out", str(out)]) == 0
    assert cli.main(["predict", "--model", str(out / "model.s2pm"), "--windows", str(w["test"]),
                     "--scalers", str(scalers), "--out", str(out)]) == 0
    assert cli.main(["evaluate", "--model", str(out / "model.s2pm"), "--windows", str(w["test"]),
                     "--scalers", str(scalers), "--out", str(out)]) == 0
    metrics = json.loads((out / "h.test.metrics.json").read_text())
    assert metrics["unit"] == "MW" and np.isfinite(metrics["nde"])
    lines = (out / "h.test.predictions.tsv").read_text().splitlines()
    assert lines[0].split("\t") == ["center_index", "prediction_scaled", "prediction_W"]
    for m in out.glob("*.manifest.json"):
        doc = json.loads(m.read_text())
        for name, digest in doc["outputs"].items():
            assert fileio.sha256_file(out / name) == digest


def test_alignment_cli(hourly, tmp_path):
    a = _hourly_csv(hourly, tmp_path / "a.csv")
    assert cli.main(["alignment", "--train", str(a), "--test", str(a), "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "a.alignment.json").read_text())
    assert doc["kl_train_test"] == pytest.approx(0.0, abs=1e-12) and doc["js"] == pytest.approx(0.0, abs=1e-12)


def test_experiment_cli(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("[scenario]\nseeds = 0, 1\nmonths = 1\narch = Linear\nmax_epochs = 3\npatience = 2\nrecipes = Base, Base*\n")
    for run in ("r1", "r2"):
        assert cli.main(["experiment", "alignment", "--config", str(cfg), "--out", str(tmp_path / run)]) == 0
    a = (tmp_path / "r1" / "manifest.json").read_text()
    b = (tmp_path / "r2" / "manifest.json").read_text()
    assert a.replace("r1", "r2") == b
    assert json.loads(a)["inputs"] == {"s.cfg": fileio.sha256_file(cfg)}

import json

import numpy as np
import pytest

from surrobench.cli import main

from conftest import make_csv, median_mass_columns


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    (root / "data.csv").write_bytes(make_csv(median_mass_columns()))
    # the median of x0 in that construction is exactly 0
    model = {"kind": "rule", "classes": ["above", "below"],
             "rules": [{"feature": "x0", "op": ">", "value": 0.0,
                        "class": "above"}],
             "default": "below"}
    (root / "model.json").write_text(json.dumps(model))
    (root / "config.json").write_text(json.dumps(
        {"sampler": {"n_samples": 200}}))
    (root / "bad_config.json").write_text(json.dumps(
        {"kernel": {"width": -1}}))
    labels = ["above" if float(line.split(",")[0]) > 0 else "below"
              for line in (root / "data.csv").read_text().splitlines()[1:]]
    (root / "labels.txt").write_text("\n".join(labels) + "\n")
    return root


def _explain_args(workdir, out, extra=()):
    return ["explain", "--data", str(workdir / "data.csv"),
            "--model", str(workdir / "model.json"),
            "--config", str(workdir / "config.json"),
            "--instance", "5", "--seed", "11",
            "--out", str(out), *extra]


def test_explain_happy_path(workdir, capsys):
    out = workdir / "report.json"
    code = main(_explain_args(workdir, out))
    assert code == 0
    assert out.exists()
    report = json.loads(out.read_text())
    assert report["config_fingerprint"]
    assert report["explanation"]["items"]
    printed = capsys.readouterr().out
    assert "attribution" in printed
    assert report["explanation"]["items"][0]["description"] in printed


def test_explain_deterministic_bytes(workdir):
    out1 = workdir / "r1.json"
    out2 = workdir / "r2.json"
    assert main(_explain_args(workdir, out1, ["--full-report"])) == 0
    assert main(_explain_args(workdir, out2, ["--full-report"])) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_explain_bad_config_exit_1(workdir, capsys):
    out = workdir / "never.json"
    code = main(["explain", "--data", str(workdir / "data.csv"),
                 "--model", str(workdir / "model.json"),
                 "--config", str(workdir / "bad_config.json"),
                 "--instance", "0", "--out", str(out)])
    assert code == 1
    assert "kernel.width" in capsys.readouterr().err
    assert not out.exists()


def test_missing_data_flag_exit_1(capsys):
    with pytest.raises(SystemExit) as err:
        main(["explain", "--model", "m.json", "--instance", "0",
              "--out", "x.json"])
    assert err.value.code == 1
    assert "usage" in capsys.readouterr().err


def test_inline_instance(workdir):
    out = workdir / "inline.json"
    code = main(["explain", "--data", str(workdir / "data.csv"),
                 "--model", str(workdir / "model.json"),
                 "--instance", "0.5,2.0,red", "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text())
    assert report["anchor"]["values"] == [0.5, 2.0, "red"]
    assert report["anchor"]["row_ref"] is None


def test_verify_full_report(workdir, capsys):
    out = workdir / "full.json"
    assert main(_explain_args(workdir, out, ["--full-report"])) == 0
    assert main(["verify", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "fingerprint: ok" in printed
    assert "fidelity: ok" in printed

    tampered = json.loads(out.read_text())
    tampered["fidelity"]["weighted_accuracy"] = 0.0
    bad = workdir / "tampered.json"
    bad.write_text(json.dumps(tampered))
    assert main(["verify", str(bad)]) == 2


def test_verify_slim_report_skips_fidelity(workdir, capsys):
    out = workdir / "slim.json"
    assert main(_explain_args(workdir, out)) == 0
    assert main(["verify", str(out)]) == 0
    assert "skipped" in capsys.readouterr().out


def test_evaluate_jaccard_one(workdir, capsys):
    out = workdir / "stability.json"
    code = main(["evaluate", "--data", str(workdir / "data.csv"),
                 "--model", str(workdir / "model.json"),
                 "--config", str(workdir / "config.json"),
                 "--instance", "5", "--seeds", "5", "--out", str(out)])
    assert code == 0
    printed = capsys.readouterr().out
    assert "Jaccard similarity: 1.0000" in printed  # top-3 of 3 features
    doc = json.loads(out.read_text())
    assert doc["stability"]["jaccard_mean"] == 1.0
    assert doc["stability"]["n_runs"] == 5


def test_evaluate_repeated_seed_zero_std(workdir, capsys):
    out = workdir / "stability_rep.json"
    code = main(["evaluate", "--data", str(workdir / "data.csv"),
                 "--model", str(workdir / "model.json"),
                 "--instance", "5", "--seeds", "9,9,9", "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["stability"]["attribution_std"] == [0.0, 0.0, 0.0]
    assert "± 0.000000" in capsys.readouterr().out


def test_evaluate_single_seed_exit_1(workdir, capsys):
    code = main(["evaluate", "--data", str(workdir / "data.csv"),
                 "--model", str(workdir / "model.json"),
                 "--instance", "5", "--seeds", "1",
                 "--out", str(workdir / "x.json")])
    assert code == 1
    assert "2 seeds" in capsys.readouterr().err


def test_evaluate_top_k_clamp_warns(workdir, capsys):
    out = workdir / "stability_k.json"
    code = main(["evaluate", "--data", str(workdir / "data.csv"),
                 "--model", str(workdir / "model.json"),
                 "--instance", "5", "--seeds", "3", "--top-k", "99",
                 "--out", str(out)])
    assert code == 0
    captured = capsys.readouterr()
    assert "warning" in captured.err
    assert json.loads(out.read_text())["stability"]["jaccard_mean"] == 1.0


def test_global_pd_embeds_ice_and_matches_mean(workdir):
    out = workdir / "pd.json"
    code = main(["global", "pd", "--data", str(workdir / "data.csv"),
                 "--model", str(workdir / "model.json"),
                 "--feature", "x0", "--grid-points", "15",
                 "--target-class", "above", "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    ice = np.asarray(doc["ice"]["curves"])
    pd = np.asarray(doc["pd"]["values"])
    assert np.abs(pd - ice.mean(axis=0)).max() <= 1e-12


def test_global_ice_grid(workdir):
    out = workdir / "ice.json"
    code = main(["global", "ice", "--data", str(workdir / "data.csv"),
                 "--model", str(workdir / "model.json"),
                 "--feature", "x1", "--grid-points", "20",
                 "--out", str(out)])
    assert code == 0
    grid = json.loads(out.read_text())["grid"]
    assert len(grid) == 20
    assert all(a < b for a, b in zip(grid, grid[1:]))


def test_global_ice_categorical_exit_1(workdir, capsys):
    code = main(["global", "ice", "--data", str(workdir / "data.csv"),
                 "--model", str(workdir / "model.json"),
                 "--feature", "color", "--out", str(workdir / "x.json")])
    assert code == 1
    assert "categorical" in capsys.readouterr().err


def test_global_perm_importance(workdir, capsys):
    out = workdir / "perm.json"
    code = main(["global", "perm-importance",
                 "--data", str(workdir / "data.csv"),
                 "--model", str(workdir / "model.json"),
                 "--labels", str(workdir / "labels.txt"),
                 "--repeats", "5", "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    names = [f["name"] for f in doc["features"]]
    assert names == ["x0", "x1", "color"]
    # the rule model ignores x1 and color entirely
    assert doc["features"][1]["mean_drop"] == 0.0
    assert doc["features"][2]["mean_drop"] == 0.0
    assert doc["features"][0]["mean_drop"] > 0.0


def test_cmd_model_requires_classes(workdir, capsys):
    code = main(["explain", "--data", str(workdir / "data.csv"),
                 "--model", "cmd:/bin/true",
                 "--instance", "0", "--out", str(workdir / "x.json")])
    assert code == 1
    assert "--classes" in capsys.readouterr().err


def test_toml_config_accepted(workdir):
    toml = workdir / "config.toml"
    toml.write_text('[sampler]\nkind = "gaussian"\nn_samples = 150\n'
                    '[kernel]\nwidth = 0.3\n')
    out = workdir / "toml_report.json"
    code = main(["explain", "--data", str(workdir / "data.csv"),
                 "--model", str(workdir / "model.json"),
                 "--config", str(toml),
                 "--instance", "2", "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text())
    assert report["config"]["kernel"]["width"] == 0.3
    assert report["config"]["sampler"]["n_samples"] == 150


def test_external_model_through_cli(workdir):
    import sys
    out = workdir / "ext_report.json"
    command = f"cmd:{sys.executable} -m surrobench model-serve --model " \
              f"{workdir / 'model.json'}"
    code = main(["explain", "--data", str(workdir / "data.csv"),
                 "--model", command, "--classes", "above,below",
                 "--instance", "5", "--seed", "11", "--out", str(out)])
    assert code == 0
    external = json.loads(out.read_text())
    assert external["blackbox"]["kind"] == "external_process"
    # identical explanation as the in-process builtin on the same seed
    builtin_out = workdir / "builtin_report.json"
    assert main(["explain", "--data", str(workdir / "data.csv"),
                 "--model", str(workdir / "model.json"),
                 "--config", str(workdir / "config.json"),
                 "--instance", "5", "--seed", "11",
                 "--out", str(builtin_out)]) == 0
    # (config differs between the two runs, so compare the explanation only)
    ext2 = workdir / "ext_report2.json"
    assert main(["explain", "--data", str(workdir / "data.csv"),
                 "--model", command, "--classes", "above,below",
                 "--config", str(workdir / "config.json"),
                 "--instance", "5", "--seed", "11", "--out", str(ext2)]) == 0
    a = json.loads(ext2.read_text())
    b = json.loads(builtin_out.read_text())
    assert a["explanation"] == b["explanation"]
    assert a["fidelity"] == b["fidelity"]


def test_schema_override_through_cli(workdir):
    schema_doc = workdir / "schema.json"
    schema_doc.write_text(json.dumps(
        {"features": [{"name": "x1", "kind": "categorical"}]}))
    out = workdir / "override_report.json"
    code = main(["explain", "--data", str(workdir / "data.csv"),
                 "--model", str(workdir / "model.json"),
                 "--schema", str(schema_doc),
                 "--instance", "5", "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text())
    kinds = {f["name"]: f["kind"] for f in report["schema"]}
    assert kinds["x1"] == "categorical"

"""End-to-end CLI runs: artifacts, exit codes, cache determinism."""
import json
import os

import pytest

from diraclab.cli import main


def _cfg(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture
def free_doc():
    return {"n_range": [0, 6], "K": 48,
            "bc": {"a": 1, "b": 0, "d": 1}}


def test_spectrum_run_writes_artifacts(tmp_path, free_doc, capsys):
    cfg = _cfg(tmp_path, free_doc)
    out = tmp_path / "out"
    rc = main(["spectrum", "--config", cfg, "--out", str(out)])
    assert rc == 0
    for name in ("spectrum.json", "spectrum.csv", "config.effective.json",
                 "spectrum.svg"):
        assert (out / name).exists(), name
    doc = json.loads((out / "spectrum.json").read_text())
    meta = doc["meta"]
    assert meta["command"] == "spectrum"
    assert len(meta["config_digest"]) == 16
    assert doc["rows"] and doc["rows"][0]["n"] == 0
    header = (out / "spectrum.csv").read_text().splitlines()[0]
    assert header.split(",")[0] == "n"
    eff = json.loads((out / "config.effective.json").read_text())
    assert eff["command"] == "spectrum" and eff["K"] == 48
    assert "wrote" in capsys.readouterr().out


def test_general_only_commands_reject_periodic(tmp_path, capsys):
    cfg = _cfg(tmp_path, {"n_range": [2, 5], "K": 48, "bc": "per+"})
    rc = main(["theorem3", "--config", cfg, "--out", str(tmp_path / "o")])
    assert rc == 1
    assert "config error" in capsys.readouterr().err


def test_bad_config_paths_exit_1(tmp_path, capsys):
    rc = main(["spectrum", "--config", str(tmp_path / "none.json"),
               "--out", str(tmp_path / "o")])
    assert rc == 1
    cfg = _cfg(tmp_path, {"n_range": [0, 60], "K": 64})  # trust violation
    rc = main(["spectrum", "--config", cfg, "--out", str(tmp_path / "o2")])
    assert rc == 1
    err = capsys.readouterr().err
    assert "trust window" in err


def test_reruns_are_byte_identical(tmp_path, free_doc):
    cfg = _cfg(tmp_path, free_doc)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["spectrum", "--config", cfg, "--out", str(out1)]) == 0
    first = {n: (out1 / n).read_bytes()
             for n in ("spectrum.json", "spectrum.csv", "spectrum.svg")}
    # cached rerun into the same dir, then a cold run with the cache off
    assert main(["spectrum", "--config", cfg, "--out", str(out1)]) == 0
    assert main(["spectrum", "--config", cfg, "--out", str(out2),
                 "--no-cache"]) == 0
    for name, blob in first.items():
        assert (out1 / name).read_bytes() == blob, name
        assert (out2 / name).read_bytes() == blob, name
    assert (out1 / ".cache").is_dir()
    assert not (out2 / ".cache").exists()


def test_failed_rows_exit_2_and_land_in_failures_json(tmp_path, capsys):
    doc = {"n_range": [2, 4], "K": 48, "bc": "per+",
           "potential": {"p": {"0": 3.0}, "q": {"0": 3.0}}}
    cfg = _cfg(tmp_path, doc)
    out = tmp_path / "out"
    rc = main(["spectrum", "--config", cfg, "--out", str(out)])
    assert rc == 2
    fail = json.loads((out / "failures.json").read_text())
    assert fail["count"] >= 1
    assert any("root" in r["error"].lower() or "radius" in r["error"].lower()
               for r in fail["rows"])
    assert "failures.json" in capsys.readouterr().err


def test_smoothness_reports_decay_class(tmp_path):
    doc = {"n_range": [8, 22], "K": 48,
           "bc": {"a": 1, "b": 0, "d": 1},
           "potential": {"family": "analytic", "c": 0.3, "r": 0.5, "K": 16}}
    cfg = _cfg(tmp_path, doc)
    out = tmp_path / "out"
    assert main(["smoothness", "--config", cfg, "--out", str(out)]) == 0
    doc = json.loads((out / "smoothness.json").read_text())
    assert doc["decay_fit"]["class"] == "exponential"
    assert (out / "smoothness.svg").exists()


def test_feshbach_command_has_no_plot(tmp_path):
    cfg = _cfg(tmp_path, {"n_range": [4, 6], "K": 48,
                          "bc": {"a": 1, "b": 0, "d": 1},
                          "potential": {"p": {"1": 0.2}, "q": {"1": 0.1}}})
    out = tmp_path / "out"
    assert main(["feshbach", "--config", cfg, "--out", str(out)]) == 0
    assert (out / "feshbach.json").exists()
    assert not (out / "feshbach.svg").exists()

import json
from pathlib import Path

import pytest

from fracpot.cli import EXPERIMENTS, load_config, main, run
from fracpot.errors import ConfigError

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

SMALL = {
    "wright-identities": {"n_recurrence": 5, "n_moment": 2, "n_rl_shift": 1, "rl_tol": 1e-5},
    "kernel-eval": {"spec": {"orders": [0.5], "weights": [1.0]}, "kernels": ["E", "Z_x"],
                    "xs": [0.3, -1.0], "ts": [0.5], "mass_ts": [0.5],
                    "laplacian": {"mu": 0.4, "points": [[0.5, 0.5]]}},
    "solve": {"spec": {"orders": [0.5], "weights": [1.0]}, "T": 1.0,
              "problem": {"u0": {"kind": "const", "c": 1.0}}, "xs": [0.0, 1.0], "ts": [0.5],
              "tol": 1e-5},
}


def write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


@pytest.mark.parametrize("sub", sorted(SMALL))
def test_runs_pass_and_write_outputs(tmp_path, sub):
    cfg = write(tmp_path, SMALL[sub])
    assert main([sub, "--config", cfg, "--out", str(tmp_path / "out"), "--seed", "3"]) == 0
    doc = json.loads((tmp_path / "out" / f"{sub}.json").read_text())
    assert doc["pass"] is True and doc["experiment"] == sub and doc["seed"] == 3
    csv = (tmp_path / "out" / f"{sub}.csv").read_text().splitlines()
    assert csv[0].startswith("#")
    assert len([ln for ln in csv if not ln.startswith("#")]) >= 2


def test_byte_identical_reruns(tmp_path):
    cfg = write(tmp_path, SMALL["wright-identities"])
    for d in ("a", "b"):
        assert main(["wright-identities", "--config", cfg, "--out", str(tmp_path / d)]) == 0
    a = (tmp_path / "a" / "wright-identities.csv").read_bytes()
    b = (tmp_path / "b" / "wright-identities.csv").read_bytes()
    assert a == b


def test_seed_changes_samples(tmp_path):
    cfg = write(tmp_path, SMALL["wright-identities"])
    main(["wright-identities", "--config", cfg, "--out", str(tmp_path / "a"), "--seed", "1"])
    main(["wright-identities", "--config", cfg, "--out", str(tmp_path / "b"), "--seed", "2"])
    assert ((tmp_path / "a" / "wright-identities.csv").read_bytes()
            != (tmp_path / "b" / "wright-identities.csv").read_bytes())


def test_config_errors_exit_2(tmp_path):
    empty = tmp_path / "empty.json"
    empty.write_text("")
    assert main(["solve", "--config", str(empty)]) == 2
    assert main(["solve", "--config", str(tmp_path / "missing.json")]) == 2
    wrong = write(tmp_path, {"experiment": "residual", "T": 1.0})
    assert main(["solve", "--config", wrong, "--out", str(tmp_path)]) == 2
    bad_spec = write(tmp_path, {"spec": {"orders": [0.7, 0.3], "weights": [1, 1]},
                                "kernels": ["E"], "xs": [1.0], "ts": [1.0]})
    assert main(["kernel-eval", "--config", bad_spec, "--out", str(tmp_path)]) == 2


def test_failed_check_exits_1(tmp_path):
    cfg = dict(SMALL["solve"], problem={"u0": {"kind": "const", "c": 1.0}}, tol=0.0)
    assert main(["solve", "--config", write(tmp_path, cfg), "--out", str(tmp_path)]) == 1


def test_load_config_rejects_non_objects(tmp_path):
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, [1, 2]))
    with pytest.raises(ConfigError):
        run("nonsense", {"a": 1}, tmp_path)


def test_every_subcommand_registered():
    assert set(EXPERIMENTS) == {"wright-identities", "kernel-eval", "estimate-sweep",
                                "window-identity", "jump-table", "continuity-table", "solve",
                                "residual"}


def test_flat_jump_table_example(tmp_path):
    cfg = {"spec": {"orders": [0.5], "weights": [1.0]}, "boundary": {"kind": "const"},
           "density": {"kind": "const", "c": 1.0}, "t": 1.0, "tol": 1e-3}
    assert main(["jump-table", "--config", write(tmp_path, cfg), "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "jump-table.json").read_text())
    assert doc["metrics"]["left"]["limit"] == pytest.approx(0.5, abs=1e-3)
    assert doc["metrics"]["right"]["limit"] == pytest.approx(-0.5, abs=1e-3)


def test_json_identical_apart_from_timestamp(tmp_path):
    cfg = write(tmp_path, SMALL["kernel-eval"])
    docs = []
    for d in ("a", "b"):
        main(["kernel-eval", "--config", cfg, "--out", str(tmp_path / d)])
        doc = json.loads((tmp_path / d / "kernel-eval.json").read_text())
        doc.pop("timestamp")
        docs.append(doc)
    assert docs[0] == docs[1]


@pytest.mark.slow
def test_shipped_wright_config_with_seed_one():
    assert main(["wright-identities", "--config", str(CONFIGS / "wright_identities.json"),
                 "--out", "/tmp/fracpot_wright", "--seed", "1"]) == 0

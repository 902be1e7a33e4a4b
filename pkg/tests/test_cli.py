import json

import numpy as np
import pytest

from tentlab import cli
from tentlab.errors import ConvergenceError
from tentlab.fieldfile import read_field, write_field


def run(tmp_path, *argv):
    return cli.main([*argv, "--out", str(tmp_path)])


def test_ops_and_apply(tmp_path):
    assert run(tmp_path, "ops", "--N", "32", "--apply", "heat", "--t", "0.05") == 0
    payload = json.loads((tmp_path / "ops.json").read_text())
    assert payload["kernel_dim"] == 1 and payload["hermitian"]
    g = read_field(tmp_path / "heat.tlab")
    assert g.shape == (32,) and abs(g.mean()) < 1e-12


def test_decompose_and_norms(tmp_path):
    assert run(tmp_path, "decompose", "--N", "32") == 0
    d = json.loads((tmp_path / "decompose.json").read_text())
    assert d["failed"] == 0 and d["count"] > 0
    assert run(tmp_path, "norms", "--N", "32", "--omega", "power_log:0.8") == 0
    assert (tmp_path / "norms.csv").read_text().startswith("cell,s_l")


def test_tent_decompose_from_file(tmp_path):
    rng = np.random.default_rng(0)
    write_field(tmp_path / "F.tlab", rng.standard_normal((16, 32)))
    assert run(tmp_path, "decompose", "--N", "32", "--J", "16", "--kind", "tent",
               "--input", str(tmp_path / "F.tlab")) == 0
    assert run(tmp_path, "decompose", "--N", "32", "--J", "8", "--kind", "tent",
               "--input", str(tmp_path / "F.tlab")) == 1


def test_bmo_command(tmp_path):
    assert run(tmp_path, "bmo", "--N", "32", "--fixture", "bump0") == 0
    d = json.loads((tmp_path / "bmo.json").read_text())
    assert d["jn_max_ratio"] < 1.75


@pytest.mark.parametrize("argv", [["ops", "--M", "0"], ["ops", "--eps", "0"], ["norms", "--fixture", "nope"],
                                  ["probe", "--omega", "power:0.4", "--probe", "embed"]])
def test_guard_exit(tmp_path, argv):
    assert run(tmp_path, *argv) == 1


def test_numerical_exit(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise ConvergenceError("no convergence")

    monkeypatch.setattr(cli, "molecular_decompose", boom)
    assert run(tmp_path, "decompose", "--N", "32") == 2


def test_io_exits(tmp_path):
    assert run(tmp_path, "norms", "--input", str(tmp_path / "missing.tlab")) == 3
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run(tmp_path, "ops", "--config", str(bad)) == 3
    (tmp_path / "garbage.tlab").write_bytes(b"not a field")
    assert run(tmp_path, "bmo", "--input", str(tmp_path / "garbage.tlab")) == 3


def test_probe_csv_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["probe", "--N", "32", "--seed", "3", "--probe", "riesz", "--probe", "jn"]
    assert cli.main([*args, "--out", str(a)]) == 0
    assert cli.main([*args, "--out", str(b)]) == 0
    assert (a / "report.csv").read_bytes() == (b / "report.csv").read_bytes()
    ja, jb = (json.loads((d / "report.json").read_text()) for d in (a, b))
    ja["config"].pop("output"), jb["config"].pop("output")
    assert ja == jb


def test_empty_probe_list_gives_metadata_only(tmp_path):
    assert run(tmp_path, "probe") == 0
    bundle = json.loads((tmp_path / "report.json").read_text())
    assert bundle["probes"] == [] and bundle["corpus_hash"] is None
    assert bundle["config"]["seed"] == 0 and bundle["passed"]


def test_selftest(tmp_path, capsys):
    assert run(tmp_path, "selftest") == 0
    assert capsys.readouterr().out.count("[PASS]") == 4


def test_report_subset(tmp_path):
    assert run(tmp_path, "report", "--criterion", "1", "--criterion", "9") == 0
    rows = json.loads((tmp_path / "acceptance.json").read_text())
    assert [r["number"] for r in rows] == [1, 9]

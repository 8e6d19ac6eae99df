import json

import pytest

from lcsam.cli import main

GAUSS = "{form: gaussian, dim: 1}"
BOX = "{form: indicator, body: {type: interval, lo: -1, hi: 1}}"


def test_delta_passes(capsys):
    assert main(["--format", "csv", "delta", "--f", GAUSS, "--g", BOX]) == 0
    assert "main-theorem" in capsys.readouterr().out


def test_bad_form_exit_code(capsys):
    assert main(["delta", "--f", "{form: banana}", "--g", BOX]) == 2
    assert "form" in capsys.readouterr().err


def test_zero_function_exit_code(capsys):
    assert main(["delta", "--f", "{form: zero, dim: 1}", "--g", BOX]) == 2


def test_failing_tolerance_exit_code(capsys):
    assert main(["--tol", "0", "delta", "--f", GAUSS, "--g", BOX]) == 1


def test_tv_and_quermass(capsys):
    main(["tv", "--f", "{form: laplace, dim: 1}", "--L", "{type: interval, lo: -1, hi: 2}"])
    assert json.loads(capsys.readouterr().out)["tv"]["total"] == pytest.approx(3)
    code = main(["quermass", "--K", "{type: box, lo: [-1, -1], hi: [1, 1]}",
                 "--L", "{type: ball, center: [0, 0], radius: 1}"])
    assert code == 0


def test_catalog_lists_forms(capsys):
    assert main(["catalog"]) == 0
    assert "gaussian" in json.loads(capsys.readouterr().out)["functions"]


def test_spec_from_file(tmp_path, capsys):
    p = tmp_path / "f.yaml"
    p.write_text(GAUSS)
    assert main(["measures", "--f", f"@{p}"]) == 0
    assert json.loads(capsys.readouterr().out)["nu"]["atoms"] == 0


def test_verify_writes_report(tmp_path):
    from lcsam.harness import corpus_paths
    path = [p for p in corpus_paths() if "q2_square_disk" in str(p)]
    assert main(["--out", str(tmp_path), "verify", *map(str, path)]) == 0
    assert (tmp_path / "report.json").exists()

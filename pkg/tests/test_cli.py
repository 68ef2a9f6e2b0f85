import json
import subprocess
import sys

import pytest

from hafvf.cli import main


def _lines(path):
    return [json.loads(s) for s in path.read_text().splitlines()]


@pytest.fixture
def binary(tmp_path):
    out = tmp_path / "bin.csv"
    assert main(["generate", "binary-switch", "--seed", "1", "--param", "n=60", "-o", str(out)]) == 0
    return out


def test_generate_writes_sidecar(binary):
    side = json.loads((binary.parent / "bin.csv.changes.json").read_text())
    assert side["changes"] == [40]
    assert len(binary.read_text().splitlines()) == 60


def test_filter_records(binary, tmp_path):
    out = tmp_path / "f.jsonl"
    code = main(["filter", str(binary), "--preset", "three-level", "-o", str(out),
                 "--changes", str(binary) + ".changes.json"])
    assert code == 0
    recs = _lines(out)
    assert len(recs) == 60
    assert recs[40]["change"] is True and recs[0]["change"] is False
    assert {"e_w", "e_b", "eta_eff", "elbo", "posterior"} <= set(recs[0])


def test_filter_stdin_matches_file(binary, tmp_path):
    out = tmp_path / "f.jsonl"
    main(["filter", str(binary), "--preset", "fixed-decay", "-o", str(out)])
    proc = subprocess.run(
        [sys.executable, "-m", "hafvf", "filter", "-", "--preset", "fixed-decay"],
        input=binary.read_text(), capture_output=True, text=True, check=True,
    )
    assert proc.stdout == out.read_text()


def test_smooth_and_figures(tmp_path):
    data = tmp_path / "walk.csv"
    main(["generate", "gaussian-2d-walk", "--param", "n=30", "-o", str(data)])
    out = tmp_path / "s.jsonl"
    figs = tmp_path / "figs"
    assert main(["smooth", str(data), "--preset", "track-weak", "-o", str(out), "--figures", str(figs)]) == 0
    recs = _lines(out)
    assert len(recs) == 60
    assert all(r["eta_eff"] >= r["forward"]["eta_eff"] - 1e-9 for r in recs)
    assert (figs / "smooth.png").stat().st_size > 0


def test_ar_command(tmp_path):
    data = tmp_path / "sig.csv"
    main(["generate", "impulse-artifacts", "--param", "n=60", "--param", "impulses=10,50", "-o", str(data)])
    out = tmp_path / "ar.jsonl"
    figs = tmp_path / "figs"
    assert main(["ar", str(data), "--order", "3", "-o", str(out), "--figures", str(figs)]) == 0
    recs = _lines(out)
    assert len(recs) == 57 and recs[0]["t"] == 3
    assert len(recs[0]["coef_mean"]) == 3 and recs[0]["pred_var"] > 0
    assert (figs / "ar.png").exists()


def test_optdemo(tmp_path, capsys):
    code = main(["optdemo", "--iterations", "20", "--output-dir", str(tmp_path), "--figures", str(tmp_path)])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["iterations"] == 20
    assert len(_lines(tmp_path / "loss.jsonl")) == 20
    assert (tmp_path / "optdemo.png").exists()


def test_filter_figure(binary, tmp_path):
    figs = tmp_path / "figs"
    assert main(["filter", str(binary), "-o", str(tmp_path / "o.jsonl"), "--figures", str(figs)]) == 0
    assert (figs / "filter.png").exists()


def test_empty_input(tmp_path):
    empty = tmp_path / "e.csv"
    empty.write_text("")
    out = tmp_path / "o.jsonl"
    assert main(["filter", str(empty), "-o", str(out)]) == 0
    assert out.read_text() == ""
    assert main(["smooth", str(empty), "-o", str(out)]) == 0


def test_exit_codes(tmp_path, binary, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("1\n0.5\n")
    assert main(["filter", str(bad)]) == 1
    assert "line 2" in capsys.readouterr().err
    wrong = tmp_path / "wrong.csv"
    wrong.write_text("1,2\n3\n")
    assert main(["filter", str(wrong), "--family", "nig"]) == 1
    assert main(["filter", str(tmp_path / "missing.csv")]) == 1
    assert main(["filter", str(binary), "--set", "bogus=1"]) == 2
    assert "bogus" in capsys.readouterr().err
    assert main(["filter", str(binary), "--preset", "nope"]) == 2
    cfg = tmp_path / "c.cfg"
    cfg.write_text("gamma = 2\n")
    assert main(["filter", str(binary), "-c", str(cfg)]) == 2
    assert main(["generate", "nope"]) == 2
    assert main(["ar", str(binary), "--order", "0"]) == 2
    assert main(["optdemo", "--phi1", "1"]) == 2
    with pytest.raises(SystemExit):
        main(["filter", "--no-such-flag"])


def test_broken_pipe_is_quiet(binary):
    proc = subprocess.run(
        f"{sys.executable} -m hafvf filter {binary} --preset three-level | head -n 1",
        shell=True, capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert len(proc.stdout.splitlines()) == 1
    assert "Traceback" not in proc.stderr

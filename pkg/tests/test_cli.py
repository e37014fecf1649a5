import json

from cubic_lab.cli import EXIT_CHECK, EXIT_CONFIG, EXIT_OK, main, tail_rates_ok


def test_unknown_subcommand():
    assert main(["bogus"]) == EXIT_CONFIG


def test_dist_csv(tmp_path, capsys):
    out = tmp_path / "d.csv"
    assert main(["dist", "--Q", "500", "--vgrid", "0.5:3.0:0.1", "--format", "csv", "--output", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# ") and "polya_convention=conj" in lines[0]
    assert lines[1] == "V,count,proportion"
    assert len(lines) == 2 + 26


def test_structure_json(tmp_path):
    out = tmp_path / "s.json"
    assert main(["structure", "--Q", "1000", "--top", "0.05", "--format", "json", "--output", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text())
    assert set(doc) == {"meta", "rows"} and doc["rows"]
    assert {"character", "a", "b", "xi", "ratio"} <= set(doc["rows"][0])


def test_oracles_check():
    assert main(["oracles", "--check", "--output", "/dev/null"]) == EXIT_OK


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("Q=200\nformat=json\n")
    out = tmp_path / "e.json"
    assert main(["enumerate", "--config", str(cfg), "--output", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["meta"]["Q"] == 200 and all(r["modulus"] <= 200 for r in doc["rows"])


def test_config_errors(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("nonsense_key=1\n")
    assert main(["enumerate", "--config", str(cfg)]) == EXIT_CONFIG
    assert main(["dist", "--vgrid", "1:0:1"]) == EXIT_CONFIG
    assert main(["enumerate", "--config", str(tmp_path / "missing.cfg")]) == EXIT_CONFIG


def test_threads_env(monkeypatch, tmp_path):
    monkeypatch.setenv("CUBIC_LAB_THREADS", "3")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["msum", "--Q", "300", "--output", str(a)]) == EXIT_OK
    assert main(["msum", "--Q", "300", "--threads", "1", "--output", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_check_passes_and_bad_psi(tmp_path):
    # threshold 0 puts every character over it at every y, which is still nonincreasing
    assert main(["tails", "--Q", "300", "--y", "5,11", "--threshold", "0", "--check", "--output", str(tmp_path / "t")]) == EXIT_OK
    assert main(["random-moments", "--psi", "bad", "--output", str(tmp_path / "r")]) == EXIT_CONFIG


def test_tail_rule():
    assert tail_rates_ok([0.3, 0.2, 0.1], 100)
    assert tail_rates_ok([0.3, 0.31, 0.1], 100)
    assert not tail_rates_ok([0.3, 0.4, 0.1], 100)
    assert not tail_rates_ok([0.1, 0.11, 0.12], 100)


def test_exit_code_three(monkeypatch, tmp_path):
    import cubic_lab.cli as cli

    monkeypatch.setattr(cli, "tail_rates_ok", lambda rates, n: False)
    assert main(["tails", "--Q", "200", "--y", "5", "--check", "--output", str(tmp_path / "t")]) == EXIT_CHECK

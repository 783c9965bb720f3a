import json

import numpy as np
import pytest

from polarkit.cli import main



@pytest.fixture
def code8(tmp_path):
    path = tmp_path / "code.json"
    assert main(["construct", "--channel", "bec:0.5", "--n", "3", "--k", "4", "--out", str(path)]) == 0
    return path


def test_construct_example(code8, capsys):
    obj = json.loads(code8.read_text())
    assert obj["info_set"] == [4, 6, 7, 8]
    assert obj["method"] == "exact-bec"


def test_config_echo_is_one_json_line(tmp_path, capsys):
    main(["polarize", "--channel", "bec:0.5", "--n", "2", "--out", str(tmp_path / "p.csv")])
    first = capsys.readouterr().err.splitlines()[0]
    assert json.loads(first)["command"] == "polarize"


def test_polarize_rows(tmp_path):
    out = tmp_path / "fig.csv"
    assert main(["polarize", "--channel", "bec:0.5", "--n", "10", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "index,z,i" and len(lines) == 1025


@pytest.mark.parametrize("fmt", ["text", "binary"])
def test_encode_decode_round_trip(tmp_path, code8, fmt):
    msgs = ["1011", "0000", "0110"]
    msg = tmp_path / "msg.txt"
    msg.write_text("\n".join(msgs) + "\n")
    if fmt == "binary":
        from polarkit.gf2 import BitVector, bits_to_bytes

        msg = tmp_path / "msg.bin"
        msg.write_bytes(bits_to_bytes([BitVector(m) for m in msgs]))
    cw = tmp_path / "cw"
    assert main(["encode", "--code", str(code8), "--in", str(msg), "--out", str(cw), "--format", fmt]) == 0
    cw_text = tmp_path / "cw.txt"
    main(["encode", "--code", str(code8), "--in", str(tmp_path / "msg.txt"), "--out", str(cw_text)])
    syms = tmp_path / "rx.syms"
    syms.write_text("".join(" ".join(line) + "\n" for line in cw_text.read_text().split()))
    back = tmp_path / "back"
    assert main(["decode", "--code", str(code8), "--in", str(syms), "--out", str(back), "--format", fmt]) == 0
    assert back.read_bytes() == msg.read_bytes()


def test_decode_maps_file_erasures(tmp_path, code8):
    # codeword of 1011 is 10100101 (see encode); erase position 1 with symbol 2
    syms = tmp_path / "rx.syms"
    syms.write_text("2 0 1 0 0 1 0 1\n")
    out = tmp_path / "m.bits"
    assert main(["decode", "--code", str(code8), "--in", str(syms), "--out", str(out)]) == 0
    assert out.read_text() == "1011\n"


def test_exit_codes(tmp_path, code8):
    out = tmp_path / "x"
    assert main(["construct", "--channel", "bec:0.5", "--n", "3"]) == 1
    assert main(["construct", "--channel", "bec:0.5", "--n", "3", "--k", "4", "--out", str(out), "--bogus"]) == 1
    assert main(["frobnicate"]) == 1
    assert main(["construct", "--channel", "bsc:1.5", "--n", "3", "--k", "4", "--out", str(out)]) == 2
    assert main(["construct", "--channel", "bsc:0.1", "--n", "5", "--k", "4",
                 "--method", "exact-table", "--out", str(out)]) == 2
    assert main(["simulate", "--code", str(tmp_path / "missing.json"), "--trials", "5",
                 "--seed", "1", "--out", str(out)]) == 2
    bad = tmp_path / "bad.syms"
    bad.write_text("0 1 3 0 0 0 0 0\n")
    assert main(["decode", "--code", str(code8), "--in", str(bad), "--out", str(out)]) == 2
    assert not out.exists()


def test_failed_write_leaves_no_partial_file(tmp_path, code8):
    target = tmp_path / "nodir" / "bler.csv"
    assert main(["simulate", "--code", str(code8), "--trials", "5", "--seed", "1", "--out", str(target)]) == 2
    assert not list(tmp_path.glob("**/.bler.csv*"))


def test_construct_simulate_curve_compose(tmp_path, code8):
    bler = tmp_path / "bler.csv"
    curve = tmp_path / "curve.csv"
    hist = tmp_path / "hist.csv"
    assert main(["simulate", "--code", str(code8), "--trials", "200", "--seed", "3",
                 "--out", str(bler), "--hist", str(hist)]) == 0
    assert bler.read_text().splitlines()[0] == "trials,errors,bler,stderr,bound_sum"
    assert len(hist.read_text().splitlines()) == 9
    assert main(["curve", "--code", str(code8), "--eta-grid", "0:1:11", "--out", str(curve)]) == 0
    lines = curve.read_text().splitlines()
    assert lines[0] == "eta,R,B,L" and len(lines) == 12


def test_compare_rm_and_bench(tmp_path):
    out = tmp_path / "cmp.csv"
    assert main(["compare-rm", "--channel", "bec:0.5", "--n", "4", "--k", "8", "--trials", "100",
                 "--seed", "2", "--out", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[0].startswith("code,") and rows[1].startswith("polar,") and rows[2].startswith("rm,")
    bench = tmp_path / "bench.csv"
    assert main(["bench", "--channel", "bsc:0.1", "--n-list", "3,5", "--trials", "2", "--out", str(bench)]) == 0
    assert len(bench.read_text().splitlines()) == 3


def test_monte_carlo_construct_needs_seed(tmp_path):
    out = tmp_path / "c.json"
    assert main(["construct", "--channel", "bsc:0.1", "--n", "3", "--k", "4", "--out", str(out)]) == 1
    assert main(["construct", "--channel", "bsc:0.1", "--n", "3", "--k", "4", "--seed", "5",
                 "--samples", "500", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["samples"] == 500


def test_help_documents_formats(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["decode", "--help"])
    assert exc.value.code == 0
    assert "2 is an erasure" in capsys.readouterr().out


def test_table_channel(tmp_path):
    table = tmp_path / "w.json"
    table.write_text(json.dumps({"p0": [0.7, 0.2, 0.1], "p1": [0.1, 0.2, 0.7]}))
    out = tmp_path / "c.json"
    assert main(["construct", "--channel", f"table:{table}", "--n", "2", "--k", "2",
                 "--method", "exact-table", "--out", str(out)]) == 0
    z = json.loads(out.read_text())["z_hat"]
    assert np.all(np.diff([z[0], z[3]]) < 0)

import csv
import io
import json
import subprocess
import sys

import pytest

from divcorr.arith import divisor_k_window, sieve_window
from divcorr.cli import ExperimentConfig, main
from divcorr.correlation import CorrelationReport
from divcorr.majorarc import dissect
from divcorr.singular import SingularSeriesValue


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_sieve_csv(capsys):
    code, out, _ = run(capsys, "sieve", "--start", "1000000", "--len", "1000", "--k", "3", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["n", "d_k"]
    expect = divisor_k_window(sieve_window(10**6, 1000), 3).values.tolist()
    assert [int(r[1]) for r in rows[1:]] == expect
    assert "\r" not in out


def test_sieve_unit_k(capsys):
    code, out, _ = run(capsys, "sieve", "--start", "50", "--len", "20", "--k", "1", "--format", "csv")
    assert code == 0 and [r.split(",")[1] for r in out.split()[1:]] == ["1"] * 20


def test_sieve_restricted_column(capsys):
    code, out, _ = run(capsys, "sieve", "--start", "1000000", "--len", "50", "--restricted", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "n,d_k,f_k"


def test_sieve_zero_length(capsys):
    code, _, err = run(capsys, "sieve", "--start", "10", "--len", "0")
    assert code == 2 and err


def test_missing_required_flag(capsys):
    code, _, err = run(capsys, "correlate", "--X", "100000", "--H1", "100")
    assert code == 2 and "H2" in err


def test_correlate_deterministic_files(tmp_path, capsys):
    args = ["correlate", "--X", "100000", "--H1", "300", "--H2", "5", "--samples", "6", "--seed", "3",
            "--qtrunc", "100"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(args + ["--output", str(a)]) == 0
    assert main(args + ["--output", str(b), "--threads", "4"]) == 0
    assert a.read_bytes() == b.read_bytes()
    rep = CorrelationReport.from_json(a.read_text())
    assert rep.to_json() == a.read_text()


def test_correlate_matches_oracle(capsys):
    code, out, _ = run(capsys, "correlate", "--X", "100000", "--H1", "100", "--H2", "2", "--samples", "1",
                       "--qtrunc", "50")
    rep = json.loads(out)
    x = rep["sampled_x"][0]
    code, out, _ = run(capsys, "oracle", "--X", "100000", "--H1", "100", "--H2", "2", "--x", str(x),
                       "--format", "csv")
    sums = [float(r.split(",")[1]) for r in out.split()[1:]]
    assert code == 0 and sums == rep["per_h"]


def test_correlate_csv_header(capsys):
    code, out, _ = run(capsys, "correlate", "--X", "100000", "--H1", "100", "--H2", "2", "--samples", "2",
                       "--qtrunc", "50", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "h,avg_sum,main_term,ratio"


def test_config_round_trip(tmp_path, capsys):
    code, cfg_text, _ = run(capsys, "correlate", "--X", "100000", "--H1", "120", "--H2", "3", "--samples", "2",
                            "--qtrunc", "60", "--seed", "5", "--dump-config")
    assert code == 0
    cfg = ExperimentConfig.from_json(cfg_text)
    assert ExperimentConfig.from_json(cfg.to_json()) == cfg
    path = tmp_path / "cfg.json"
    path.write_text(cfg_text)
    code, again, _ = run(capsys, "correlate", "--config", str(path), "--dump-config")
    assert again == cfg_text
    _, from_cfg, _ = run(capsys, "correlate", "--config", str(path))
    _, direct, _ = run(capsys, "correlate", "--X", "100000", "--H1", "120", "--H2", "3", "--samples", "2",
                       "--qtrunc", "60", "--seed", "5")
    assert from_cfg == direct
    # flags override the file
    _, override, _ = run(capsys, "correlate", "--config", str(path), "--H2", "1")
    assert json.loads(override)["H2"] == 1


def test_config_unknown_key(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"bogus": 1}))
    code, _, err = run(capsys, "sieve", "--config", str(path), "--start", "5", "--len", "3")
    assert code == 2 and "bogus" in err


def test_output_dir_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("DIVCORR_OUTPUT_DIR", str(tmp_path))
    assert main(["sieve", "--start", "10", "--len", "5", "--format", "csv"]) == 0
    assert (tmp_path / "sieve.csv").read_text().startswith("n,d_k\n10,4\n")


def test_verify_list_and_corrupt(capsys):
    code, out, _ = run(capsys, "verify", "--list")
    assert code == 0 and "ramanujan" in out and "b_decomposition" in out
    code, out, _ = run(capsys, "verify", "--only", "ramanujan", "orthogonality")
    assert code == 0 and out.count("PASS") == 2
    code, out, _ = run(capsys, "verify", "--only", "ramanujan", "--corrupt", "ramanujan")
    assert code == 1 and out.startswith("FAIL")


def test_singular(capsys):
    code, out, _ = run(capsys, "singular", "--h", "1", "--k", "2", "--l", "2", "--qtrunc", "10000")
    v = SingularSeriesValue.from_dict(json.loads(out))
    assert code == 0 and v.tail_bound > 0 and v.value == pytest.approx(0.6079271, rel=1e-5)
    code, _, err = run(capsys, "singular", "--h", "0")
    assert code == 2 and err


def test_majorarc_dissect(capsys):
    code, out, _ = run(capsys, "majorarc", "dissect", "--Q", "3", "--H1", "1000000", "--format", "csv")
    assert code == 0 and out == dissect(3, 10**6).to_csv()


def test_majorarc_other_sweeps(capsys):
    code, out, _ = run(capsys, "majorarc", "decomp", "--x", "10000", "--m", "100", "--qmax", "5")
    assert code == 0 and out.splitlines()[0] == "q,a,lhs_re,lhs_im,rhs_re,rhs_im,delta"
    code, out, _ = run(capsys, "majorarc", "decay", "--P", "100", "--Q", "1000", "--q", "5", "--tnum", "3",
                       "--format", "csv")
    assert code == 0 and len(out.splitlines()) == 1 + 3 * 3
    code, out, _ = run(capsys, "majorarc", "iq", "--q", "1", "--H1", "50", "--h", "7", "--Q", "100")
    assert code == 0 and json.loads(out)["I_q"] == pytest.approx(43, rel=1e-6)


def test_resource_exit_code(capsys):
    code, _, err = run(capsys, "majorarc", "decay", "--P", "100", "--Q", "1e14", "--tnum", "1")
    assert code == 3 and err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "divcorr", "sieve", "--start", "2", "--len", "4",
                           "--format", "csv"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "n,d_k\n2,2\n3,2\n4,3\n5,2\n"

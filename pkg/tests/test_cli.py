import csv
import io
import json
import subprocess
import sys

import pytest

from cyclemetrics.cli import dispatch


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = dispatch(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def parse_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    return [dict(zip(rows[0], r)) for r in rows[1:]]


def parse_json(text):
    return json.loads(text)["rows"]


def same_values(csv_rows, json_rows):
    assert len(csv_rows) == len(json_rows)
    for c, j in zip(csv_rows, json_rows):
        assert set(c) == set(j)
        for key, val in j.items():
            text = c[key]
            if isinstance(val, bool):
                assert text == ("true" if val else "false")
            elif isinstance(val, (int, float)):
                assert float(text) == float(val)
            elif isinstance(val, list):
                assert text == ",".join(str(v) for v in val)
            else:
                assert text == val


# --- documented examples -----------------------------------------------------


def test_constants():
    code, out, _ = run("constants")
    assert code == 0
    lines = dict(line.split() for line in out.splitlines())
    assert set(lines) >= {"I", "beta0", "k0"}
    assert 3.35 <= float(lines["k0"]) <= 3.37
    assert lines["k0"] == "3.36071317218"  # 12 significant digits


def test_dist_z_exact():
    code, out, _ = run("dist-z", "--n", "4", "--k", "2", "--all", "--exact")
    assert code == 0
    assert out.splitlines() == ["1 1/3", "2 2/3"]


def test_analyze(tmp_path):
    path = tmp_path / "map.txt"
    path.write_text("5 0\n2 1 4 3 5\n")
    code, out, _ = run("analyze", "--in", str(path))
    assert code == 0
    assert "Z=5 C=3 T=2 B=4" in out


def test_analyze_reports_format_error(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("4 2\n2 1 2 2\n")
    code, _, err = run("analyze", "--in", str(path))
    assert code == 1
    assert "line 2" in err and "indegree 3" in err
    code, _, err = run("analyze", "--in", str(tmp_path / "missing.txt"))
    assert code == 1 and "cannot read" in err


# --- exit codes and messages -----------------------------------------------------


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus"],
        [],
        ["dist-z", "--n", "4"],
        ["dist-z", "--n", "4", "--k", "2"],
        ["mode", "--n", "5", "--k", "2"],
        ["constants", "--flag"],
        ["sample", "--r", "0"],
        ["poly", "--p", "8", "--d", "2"],
    ],
)
def test_usage_errors_exit_1(argv):
    code, out, err = run(*argv)
    assert code == 1
    assert out == ""
    assert len(err.strip().splitlines()) == 1


@pytest.mark.parametrize(
    "argv,flag",
    [
        (["expected", "--n", "100", "--k", "2"], "--max-r 50"),
        (["m-perm", "--m", "50"], "--max-m 50"),
        (["sample", "--r", "5", "--k", "4", "--all"], "--max-count"),
        (["table1", "--classes", "{0,2}", "--max-work", "1000"], "--max-work"),
    ],
)
def test_guard_errors_exit_2_and_name_override(argv, flag):
    code, _, err = run(*argv)
    assert code == 2
    assert flag in err
    assert len(err.strip().splitlines()) == 1


def test_guard_override_is_honoured():
    code, out, _ = run("m-perm", "--m", "46", "--max-m", "46")
    assert code == 0 and "M_m=" in out


def test_help_exits_zero():
    assert run("--help")[0] == 0
    assert run("table1", "--help")[0] == 0


# --- formats ---------------------------------------------------------------------


@pytest.mark.parametrize(
    "argv",
    [
        ["constants"],
        ["dist-z", "--n", "12", "--k", "3", "--all"],
        ["dist-z", "--n", "12", "--k", "3", "--all", "--exact"],
        ["mode", "--n", "10000", "--k", "2"],
        ["expected", "--n", "12", "--k", "2"],
        ["mu-perm", "--m", "30"],
        ["poly", "--p", "13", "--d", "4", "--a", "3"],
        ["primes", "--k", "3", "--count", "4"],
        ["table1", "--classes", "{0,2}", "x^2+a", "--prime-start", "100", "--num-primes", "2", "--samples", "30"],
        ["lognormal", "--n", "256", "--samples", "100"],
        ["first-hit", "--n", "4", "--xi", "2", "--trials", "50"],
        ["concentration", "--n", "1000", "--samples", "100"],
    ],
)
def test_json_and_csv_encode_same_values(argv):
    c1, csv_text, _ = run(*argv, "--format", "csv", "--seed", "3")
    c2, json_text, _ = run(*argv, "--format", "json", "--seed", "3")
    assert c1 == c2 == 0
    same_values(parse_csv(csv_text), parse_json(json_text))


def test_json_carries_manifest():
    _, text, _ = run("--seed", "5", "mode", "--n", "100", "--k", "2", "--format", "json")
    meta = json.loads(text)["metadata"]
    assert meta["manifest"]["subcommand"] == "mode"
    assert meta["manifest"]["parameters"] == {"n": 100, "k": 2}
    assert meta["manifest"]["seed"] == 5
    assert {"version", "wall_time_s", "threads"} <= set(meta)


def test_numbers_use_twelve_significant_digits():
    _, out, _ = run("mode", "--n", "10000", "--k", "2")
    fields = dict(item.split("=") for item in out.split())
    assert fields["m_sharp"] == "99.5012499922"
    assert fields["xi1"] == "23.0311833931"


def test_table1_csv_header_and_full_precision():
    _, text, _ = run("table1", "--classes", "{0,2}", "--prime-start", "100", "--num-primes", "1", "--samples", "20", "--format", "csv")
    header = text.splitlines()[0]
    assert header == "class,p,n,lambda,samples,mean_log_T,mean_log_B,R_T,R_B,seed"
    from cyclemetrics.experiments import read_csv

    (rec,) = read_csv(text)
    assert rec.samples == 20 and rec.n == rec.p - 1


# --- reproducibility -----------------------------------------------------------------


@pytest.mark.parametrize(
    "argv",
    [
        ["sample", "--r", "4", "--k", "3", "--count", "5"],
        ["sample", "--unrestricted", "--n", "7", "--count", "3"],
        ["table1", "--classes", "unrestricted", "{0,3}", "--prime-start", "100", "--num-primes", "2", "--samples", "25"],
        ["lognormal", "--n", "512", "--samples", "150"],
        ["first-hit", "--n", "8", "--k", "2", "--xi", "3", "--trials", "40"],
        ["concentration", "--n", "2000", "--samples", "200"],
    ],
)
def test_seeded_output_independent_of_threads(argv):
    a = run(*argv, "--seed", "11", "--threads", "1")[1]
    b = run(*argv, "--seed", "11", "--threads", "3")[1]
    c = run(*argv, "--seed", "12", "--threads", "1")[1]
    assert a == b
    assert a != c


def test_threads_env_fallback(monkeypatch):
    monkeypatch.setenv("CYCLEMETRICS_THREADS", "2")
    _, text, _ = run("constants", "--format", "json")
    assert json.loads(text)["metadata"]["threads"] == 2
    monkeypatch.setenv("CYCLEMETRICS_THREADS", "zero")
    assert run("constants")[0] == 1


def test_global_flags_before_or_after_subcommand():
    assert run("--format", "csv", "constants")[1] == run("constants", "--format", "csv")[1]


def test_sample_output_round_trips(tmp_path):
    path = tmp_path / "maps.txt"
    code, out, _ = run("sample", "--r", "3", "--k", "2", "--count", "4", "--seed", "1", "--out", str(path))
    assert code == 0 and out == ""
    code, out, _ = run("analyze", "--in", str(path))
    assert code == 0 and len(out.splitlines()) == 4
    assert all("coalescence=1" in line for line in out.splitlines())


def test_sample_all_enumerates():
    code, out, _ = run("sample", "--r", "2", "--k", "2", "--all")
    assert code == 0
    assert out.count("--\n") == 35


def test_first_hit_never_hits():
    code, out, _ = run("first-hit", "--n", "4", "--xi", "3", "--max-draws", "100", "--trials", "3")
    assert code == 0
    fields = dict(item.split("=") for item in out.split())
    assert fields["hits"] == "0" and fields["mean_draws"] == "100"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cyclemetrics", "constants"], capture_output=True, text=True)
    assert proc.returncode == 0 and "k0" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "cyclemetrics", "nope"], capture_output=True, text=True)
    assert proc.returncode == 1

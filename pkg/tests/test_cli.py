import json

import pytest

from waring_gaps import cli
from waring_gaps.repcount import WaringParams, read_table_binary, sieve_rep, write_table_binary


def run_cli(*args: str) -> int:
    return cli.main(list(args))


def no_floats(obj) -> bool:
    if isinstance(obj, float):
        return False
    if isinstance(obj, dict):
        return all(no_floats(v) for v in obj.values())
    if isinstance(obj, list):
        return all(no_floats(v) for v in obj)
    return True


@pytest.fixture()
def table_file(tmp_path):
    path = tmp_path / "r33.bin"
    write_table_binary(sieve_rep(WaringParams(3, 3), 760), path)
    return path


class TestPlumbingCommands:
    def test_sieve_writes_binary_and_csv(self, tmp_path):
        bin_path = tmp_path / "t.bin"
        assert run_cli("sieve", "--ell", "3", "--s", "2", "--limit", "100",
                       "--out", str(bin_path)) == 0
        table = read_table_binary(bin_path)
        assert table.params == WaringParams(3, 2)
        csv_path = tmp_path / "t.csv"
        assert run_cli("sieve", "--ell", "3", "--s", "2", "--limit", "100",
                       "--out", str(csv_path)) == 0
        assert csv_path.read_text().splitlines()[0] == "n,count"

    def test_gaps_csv_rows(self, table_file, tmp_path, capsys):
        out = tmp_path / "runs.csv"
        assert run_cli("gaps", "--table", str(table_file), "--min-len", "4",
                       "--out", str(out)) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "start,length,truncated"
        assert lines[1] == "4,4,0"
        assert lines[2] == "11,5,0"

    def test_gaps_accepts_csv_table_with_params(self, tmp_path):
        csv_table = tmp_path / "t.csv"
        assert run_cli("sieve", "--ell", "3", "--s", "3", "--limit", "40",
                       "--out", str(csv_table)) == 0
        out = tmp_path / "runs.csv"
        assert run_cli("gaps", "--table", str(csv_table), "--ell", "3", "--s", "3",
                       "--min-len", "4", "--out", str(out)) == 0
        assert out.read_text().splitlines()[1] == "4,4,0"
        assert run_cli("gaps", "--table", str(csv_table), "--min-len", "4") == 3

    def test_greedy_report(self, tmp_path):
        report_path = tmp_path / "g.json"
        assert run_cli("greedy", "--ell", "3", "--b", "100",
                       "--json", str(report_path)) == 0
        obj = json.loads(report_path.read_text())
        assert obj["result"] == {"parts": [4, 3, 2], "n": 99, "remainder": 1}

    def test_modcount_and_crt(self, tmp_path):
        p_csv = tmp_path / "p.csv"
        j = tmp_path / "m.json"
        assert run_cli("modcount", "--ell", "3", "--modulus", "9",
                       "--out", str(p_csv), "--json", str(j)) == 0
        assert json.loads(j.read_text())["summary"]["zero_residues"] == [4, 5]
        j2 = tmp_path / "c.json"
        assert run_cli("crt", "--ell", "3", "--moduli", "2,9", "--json", str(j2)) == 0
        assert json.loads(j2.read_text())["summary"]["mass"] == 18**3

    def test_crt_rejects_non_coprime(self, tmp_path, capsys):
        assert run_cli("crt", "--ell", "3", "--moduli", "6,9") == 3
        assert "not coprime" in capsys.readouterr().err

    def test_modsearch_found_and_not(self, tmp_path):
        j = tmp_path / "s.json"
        assert run_cli("modsearch", "--ell", "3", "--k1", "2", "--pool", "9,63",
                       "--json", str(j)) == 0
        obj = json.loads(j.read_text())
        assert obj["found"] and obj["result"]["M"] == 9 and obj["result"]["m"] == 4
        assert run_cli("modsearch", "--ell", "3", "--k1", "1", "--pool", "2") == 1

    def test_mild_scan(self, table_file, tmp_path):
        j = tmp_path / "scan.json"
        assert run_cli("mild-scan", "--table", str(table_file), "--lo", "0",
                       "--hi", "30", "--k", "4", "--e", "8", "--json", str(j)) == 0
        obj = json.loads(j.read_text())
        assert [w["n"] for w in obj["witnesses"]] == [4, 11, 12, 18, 19, 20]

    def test_theta_enclosure(self, tmp_path):
        j = tmp_path / "theta.json"
        assert run_cli("theta", "--ell", "3", "--q", "2", "--terms", "64",
                       "--json", str(j)) == 0
        obj = json.loads(j.read_text())
        assert obj["enclosure"]["lo"] == "201850881/134217728"
        assert "decimal_display_only" in obj

    def test_exceptional(self, tmp_path):
        j = tmp_path / "exc.json"
        csv_path = tmp_path / "exc.csv"
        assert run_cli("exceptional", "--limit", "100", "--epsilon", "0",
                       "--json", str(j), "--out", str(csv_path)) == 0
        obj = json.loads(j.read_text())
        assert obj["result"]["limit"] == 100
        assert csv_path.read_text().splitlines()[0] == "a"


CERT_JSON = {
    "q": 2, "H": "100", "K1": 9, "K2": 9, "K_prime": 39,
    "n1": 1, "n2": 11, "n_prime": 1, "E": "2", "E_prime": "1",
    "f": {"kind": "coefficients", "entries": [[0, 1], [10, 1], [20, 1]]},
    "g": {"kind": "coefficients", "entries": [[40, 1]]},
}


class TestVerdictCommands:
    def test_maier_pass(self, table_file, tmp_path):
        cert = tmp_path / "maier.json"
        cert.write_text(json.dumps({
            "ell": 3, "K": 1, "M": 9, "m": 4,
            "eps": ["1/100", "1/100"], "caps": [0, 0], "N": 729,
        }))
        j = tmp_path / "rep.json"
        assert run_cli("maier", "--cert", str(cert), "--table", str(table_file),
                       "--json", str(j)) == 0
        obj = json.loads(j.read_text())["report"]
        assert obj["verdict"] == "pass"
        assert obj["summary"]["count"] == 81

    def test_nested_pass_and_fail(self, tmp_path):
        cert = tmp_path / "nested.json"
        cert.write_text(json.dumps(CERT_JSON))
        assert run_cli("nested", "--cert", str(cert)) == 0
        bad = dict(CERT_JSON, H="300")
        cert.write_text(json.dumps(bad))
        assert run_cli("nested", "--cert", str(cert)) == 1

    def test_measure_pass(self, tmp_path):
        cert = tmp_path / "nested.json"
        cert.write_text(json.dumps(CERT_JSON))
        j = tmp_path / "m.json"
        assert run_cli("measure", "--cert", str(cert), "--json", str(j)) == 0
        assert json.loads(j.read_text())["report"]["summary"]["pairs"] == 20000

    def test_invalid_certificate_file(self, tmp_path, capsys):
        cert = tmp_path / "broken.json"
        cert.write_text("{\"q\": 2}")
        assert run_cli("nested", "--cert", str(cert)) == 3
        assert "error" in capsys.readouterr().err

    def test_linforms(self, tmp_path):
        j = tmp_path / "lin.json"
        assert run_cli("linforms", "--ell", "3", "--q", "2", "--height", "1",
                       "--terms", "48", "--json", str(j)) == 0
        obj = json.loads(j.read_text())["report"]
        assert obj["summary"]["forms_checked"] == 54  # 3^3 * 2 leading signs

    def test_pipeline(self, tmp_path):
        j = tmp_path / "pipe.json"
        assert run_cli("pipeline", "--ell", "3", "--q", "2", "--json", str(j)) == 1
        obj = json.loads(j.read_text())
        assert obj["report"]["summary"]["M"] == 9
        assert no_floats(obj)


class TestErrorsAndConfig:
    def test_unknown_subcommand(self, capsys):
        with pytest.raises(SystemExit):
            run_cli("frobnicate")

    def test_missing_required_parameter(self, capsys):
        assert run_cli("sieve", "--ell", "3", "--s", "2") == 3
        assert "missing required parameter --limit" in capsys.readouterr().err

    def test_malformed_parameter(self, capsys):
        assert run_cli("sieve", "--ell", "x", "--s", "2", "--limit", "10") == 3

    def test_bound_violation_diagnostic(self, capsys):
        assert run_cli("sieve", "--ell", "5", "--s", "2", "--limit", "10") == 3
        assert "ell" in capsys.readouterr().err

    def test_config_file_defaults_and_flag_precedence(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# sieve defaults\nell = 3\ns = 2\nlimit = 50\n")
        j1 = tmp_path / "a.json"
        assert run_cli("sieve", "--config", str(cfg), "--json", str(j1)) == 0
        assert json.loads(j1.read_text())["summary"]["limit"] == 50
        j2 = tmp_path / "b.json"
        assert run_cli("sieve", "--config", str(cfg), "--limit", "60",
                       "--json", str(j2)) == 0
        assert json.loads(j2.read_text())["summary"]["limit"] == 60

    def test_threads_env_and_flag(self, tmp_path, monkeypatch):
        j = tmp_path / "t.json"
        monkeypatch.setenv(cli.THREADS_ENV, "5")
        assert run_cli("greedy", "--ell", "3", "--b", "10", "--json", str(j)) == 0
        assert json.loads(j.read_text())["config"]["threads"] == 5
        assert run_cli("greedy", "--ell", "3", "--b", "10", "--threads", "2",
                       "--json", str(j)) == 0
        assert json.loads(j.read_text())["config"]["threads"] == 2

    def test_no_floats_anywhere(self, tmp_path, table_file):
        j = tmp_path / "r.json"
        run_cli("modsearch", "--ell", "3", "--k1", "2", "--pool", "9", "--json", str(j))
        assert no_floats(json.loads(j.read_text()))
        run_cli("mild-scan", "--table", str(table_file), "--lo", "0", "--hi", "20",
                "--k", "4", "--e", "8", "--json", str(j))
        assert no_floats(json.loads(j.read_text()))


class TestReplay:
    def normalize(self, obj):
        def scrub(o):
            if isinstance(o, dict):
                return {
                    k: scrub(v)
                    for k, v in o.items()
                    if k not in {"json", "out", "threads"}
                }
            if isinstance(o, list):
                return [scrub(v) for v in o]
            return o

        return scrub(obj)

    @pytest.mark.parametrize(
        "args",
        [
            ("modsearch", "--ell", "3", "--k1", "2", "--pool", "9,63"),
            ("theta", "--ell", "3", "--q", "2", "--terms", "40"),
            ("exceptional", "--limit", "120", "--epsilon", "1/100"),
        ],
    )
    def test_report_replays_bit_identically(self, tmp_path, args):
        first = tmp_path / "first.json"
        run_cli(*args, "--json", str(first))
        second = tmp_path / "second.json"
        code = cli.replay_report(first, overrides={"json": str(second), "threads": 3})
        assert code in (0, 1, 2)
        a = self.normalize(json.loads(first.read_text()))
        b = self.normalize(json.loads(second.read_text()))
        assert a == b

    def test_report_accepted_as_config_file(self, tmp_path):
        first = tmp_path / "first.json"
        run_cli("modsearch", "--ell", "3", "--k1", "2", "--pool", "9", "--json", str(first))
        second = tmp_path / "second.json"
        assert run_cli("modsearch", "--config", str(first), "--json", str(second)) == 0
        a = self.normalize(json.loads(first.read_text()))
        b = self.normalize(json.loads(second.read_text()))
        assert a == b

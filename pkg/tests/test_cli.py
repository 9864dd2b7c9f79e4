import csv
import io
import json

import pytest

from stiefel_compare.cli import UsageError, dispatch, load_a_matrices, main, parse_config
from stiefel_compare.report import COMPARISON_COLUMNS


def run_cli(capsys, argv):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestParse:
    def test_verify_prefix(self):
        cfg = parse_config("verify theorem1 --n 64 --k 16 --norm spectral --samples 10000 --seed 42".split())
        assert (cfg.command, cfg.n, cfg.k, cfg.norm, cfg.samples, cfg.seed) == ("theorem1", 64, 16, "spectral", 10000, 42)

    def test_dimension_error(self):
        with pytest.raises(UsageError, match="--k"):
            parse_config("theorem1 --k 20 --n 10".split())

    def test_defaults(self):
        cfg = parse_config(["converse1"])
        assert (cfg.seed, cfg.samples, cfg.n, cfg.k, cfg.format, cfg.output) == (0, 10_000, 16, 4, "csv", "-")
        assert parse_config(["selftest"]).samples == 100_000

    def test_bad_norm_names_flag(self):
        with pytest.raises(UsageError, match="--norm"):
            parse_config("theorem1 --norm nuclear".split())

    def test_bad_values(self):
        for argv in (["theorem1", "--samples", "1"], ["theorem1", "--seed", "-1"], ["maxentry", "--n-list", "1,4"]):
            with pytest.raises(UsageError):
                parse_config(argv)

    def test_only_one_dim(self):
        with pytest.raises(UsageError, match="--k"):
            parse_config("converse1 --n 8".split())

    def test_config_precedence(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"n": 8, "k": 2, "seed": 5, "samples": 300}))
        cfg = parse_config(["theorem1", "--config", str(path), "--seed", "9"])
        assert (cfg.n, cfg.k, cfg.seed, cfg.samples) == (8, 2, 9, 300)

    def test_config_unknown_key(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"n": 8, "colour": "red"}))
        with pytest.raises(UsageError, match="colour"):
            parse_config(["theorem1", "--config", str(path)])

    def test_config_missing(self, tmp_path):
        with pytest.raises(UsageError, match="--config"):
            parse_config(["theorem1", "--config", str(tmp_path / "nope.json")])

    def test_missing_a_matrices(self, tmp_path):
        with pytest.raises(UsageError, match="--a-matrices"):
            parse_config(["ncgauss", "--a-matrices", str(tmp_path / "nope.json")])


class TestMain:
    def test_unknown_subcommand(self, capsys):
        code, _, err = run_cli(capsys, ["frobnicate"])
        assert code == 1 and "unknown command" in err

    def test_usage_error_exit(self, capsys):
        code, _, err = run_cli(capsys, "theorem1 --k 20 --n 10".split())
        assert code == 1 and "--k" in err

    def test_theorem1_single_row(self, capsys):
        code, out, _ = run_cli(capsys, "theorem1 --n 8 --k 2 --norm spectral --phi identity --samples 500".split())
        rows = read_csv(out)
        assert code == 0
        assert tuple(rows[0].keys()) == COMPARISON_COLUMNS
        assert len(rows) == 1 and rows[0]["verdict"] == "CONSISTENT"
        assert rows[0]["seed"] == "0" and rows[0]["samples"] == "500"
        assert (rows[0]["n"], rows[0]["k"]) == ("8", "2")

    def test_factor_override_exit_2(self, capsys):
        code, out, _ = run_cli(
            capsys, "theorem1 --n 32 --k 32 --norm spectral --samples 300 --factor-override 0.5".split()
        )
        assert code == 2 and read_csv(out)[0]["verdict"] == "VIOLATED"

    def test_alpha_table_rows(self, capsys):
        code, out, _ = run_cli(capsys, "alpha-table --n-max 8".split())
        assert code == 0 and len(read_csv(out)) == 36

    def test_json_output(self, capsys):
        code, out, _ = run_cli(capsys, "converse1 --samples 200 --format json".split())
        data = json.loads(out)
        assert code == 0
        assert data["columns"] == list(COMPARISON_COLUMNS)
        assert data["rows"][0]["theorem_id"] == "converse1"

    def test_byte_identical_files(self, tmp_path):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for p in paths:
            assert main(["convex", "--samples", "300", "--seed", "3", "--output", str(p)]) == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_floats_round_trip(self, capsys):
        _, out, _ = run_cli(capsys, "alpha-table --n-max 3".split())
        from stiefel_compare.constants import alpha_exact

        row = read_csv(out)[-1]
        assert float(row["alpha_exact"]) == alpha_exact(int(row["k"]), int(row["n"]))

    def test_output_dir_missing(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, ["alpha-table", "--output", str(tmp_path / "no" / "x.csv")])
        assert code == 1 and "--output" in err

    def test_io_error_names_path(self, capsys, tmp_path):
        target = tmp_path / "dir"
        target.mkdir()
        cfg = parse_config(["alpha-table", "--n-max", "2"])
        cfg.output = str(target)
        assert dispatch(cfg) == 1
        assert str(target) in capsys.readouterr().err

    def test_ncgauss_a_matrices(self, capsys, tmp_path):
        path = tmp_path / "a.json"
        path.write_text(json.dumps([[0.5, 0, 0, 0.5], [[0.5, 0], [0, 0.5]]]))
        code, out, _ = run_cli(capsys, ["ncgauss", "--a-matrices", str(path), "--norm", "frobenius", "--samples", "400"])
        row = read_csv(out)[0]
        assert code == 0 and row["n"] == "2" and row["factor"] == "1.5"

    def test_ncgauss_default(self, capsys):
        code, out, _ = run_cli(capsys, "ncgauss --samples 200".split())
        assert code == 0 and read_csv(out)[0]["n"] == "8"

    def test_load_a_matrices_errors(self, tmp_path):
        path = tmp_path / "a.json"
        path.write_text(json.dumps({"A": [[1, 2, 3]]}))
        with pytest.raises(UsageError):
            load_a_matrices(path, 2)
        path.write_text("[]")
        with pytest.raises(UsageError):
            load_a_matrices(path)

    def test_other_commands(self, capsys):
        for argv, rows in (
            ("counterexample --samples 200", 1),
            ("maxentry --n-list 4,8 --samples 200", 2),
            ("converse2 --Y l1 --Z linf --samples 200", 1),
            ("convex --norm max_entry --negate --sense concave --n 8 --k 2 --samples 200", 1),
            ("convex --norm none --linear-entry 1,1 --samples 200", 1),
        ):
            code, out, err = run_cli(capsys, argv.split())
            assert code == 0, (argv, err)
            assert len(read_csv(out)) == rows

    def test_selftest_small(self, capsys):
        code, out, _ = run_cli(capsys, "selftest --n 6 --k 2 --samples 5000 --seed 1".split())
        rows = read_csv(out)
        assert code == 0 and all(r["passed"] == "true" for r in rows)

    def test_non_ideal_converse1(self, capsys):
        code, _, err = run_cli(capsys, "converse1 --norm max_entry --samples 10".split())
        assert code == 1 and "--norm" in err

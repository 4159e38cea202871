import csv
import io
from contextlib import redirect_stderr, redirect_stdout

import numpy as np
import pytest

from fraclap.cli import main
from fraclap.graphs import from_edges, path_graph
from fraclap.sparse import save_matrix_market


def run_cli(args):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(args)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def k2_file(tmp_path):
    path = tmp_path / "k2.mtx"
    save_matrix_market(path_graph(2), path)
    return str(path)


@pytest.fixture
def digraph_file(tmp_path):
    # 2-cycle {0,1} plus a dangling node reachable only one way
    path = tmp_path / "d.mtx"
    save_matrix_market(from_edges(3, [(0, 1), (1, 0), (1, 2)]), path)
    return str(path)


class TestScc:
    def test_reports_component_size(self, digraph_file):
        code, out, _ = run_cli(["scc", "--graph", digraph_file])
        assert code == 0
        assert out.strip() == "n=2 nnz=2"

    def test_missing_file_is_io_error(self, tmp_path):
        code, _, err = run_cli(["scc", "--graph", str(tmp_path / "nope.mtx")])
        assert code == 4
        assert "error" in err

    def test_malformed_file_is_io_error(self, tmp_path):
        bad = tmp_path / "bad.mtx"
        bad.write_text("this is not matrix market\n")
        code, _, err = run_cli(["scc", "--graph", str(bad)])
        assert code == 4

    def test_self_loop_is_numerical_error(self, tmp_path):
        looped = tmp_path / "loop.mtx"
        looped.write_text(
            "%%MatrixMarket matrix coordinate pattern general\n2 2 3\n1 2\n2 1\n1 1\n"
        )
        code, _, err = run_cli(["solve", "--graph", str(looped), "--pole", "poly"])
        assert code == 3
        assert "loop" in err


class TestSpectrum:
    def test_k2(self, k2_file):
        code, out, _ = run_cli(["spectrum", "--graph", k2_file])
        assert code == 0
        lines = out.splitlines()
        assert lines[0].startswith("lambda2=")
        assert lines[1].startswith("lambdaN=")
        lamN = float(lines[1].split("=")[1])
        assert abs(lamN - 2.0) <= 1e-4

    def test_solve_honors_extent_overrides(self, k2_file):
        # overriding both extents skips estimation entirely; the solve
        # still converges because any negative pole is admissible
        code, out, _ = run_cli(
            ["solve", "--graph", k2_file, "--pole", "si-geomean",
             "--lambda2", "1.0", "--lambdan", "4.0"]
        )
        assert code == 0
        assert "sum=1.000000000000" in out

    def test_solve_rank1_with_theta(self, k2_file):
        code, out, _ = run_cli(
            ["solve", "--graph", k2_file, "--desing", "rank1", "--theta", "2.5",
             "--pole", "si-time"]
        )
        assert code == 0
        assert "sum=1.000000000000" in out


class TestNullvec:
    def test_writes_vector(self, digraph_file, tmp_path):
        out_path = tmp_path / "z.txt"
        code, out, _ = run_cli(["nullvec", "--graph", digraph_file, "--out", str(out_path)])
        assert code == 0
        z = np.loadtxt(out_path)
        assert z.shape == (2,)
        assert abs(z.sum() - 1.0) <= 1e-14
        assert np.all(z > 0)


class TestSolve:
    def test_t_zero_echoes_u0(self, k2_file):
        code, out, _ = run_cli(["solve", "--graph", k2_file, "--t", "0", "--pole", "poly"])
        assert code == 0
        assert "sum=1.000000000000" in out
        assert "iterations=1" in out

    def test_full_vector_output(self, k2_file, tmp_path):
        out_path = tmp_path / "u.txt"
        code, out, _ = run_cli(
            ["solve", "--graph", k2_file, "--t", "1", "--alpha", "0.5", "--out", str(out_path)]
        )
        assert code == 0
        u = np.loadtxt(out_path)
        c = np.exp(-np.sqrt(2.0))
        assert np.allclose(u, [(1 + c) / 2, (1 - c) / 2], atol=1e-10)

    def test_deterministic_output(self, k2_file):
        args = ["solve", "--graph", k2_file, "--t", "1", "--alpha", "0.5", "--pole", "eds"]
        _, out1, _ = run_cli(args)
        _, out2, _ = run_cli(args)
        assert out1 == out2

    def test_si_time_at_t_zero_is_usage_error(self, k2_file):
        code, _, err = run_cli(["solve", "--graph", k2_file, "--t", "0", "--pole", "si-time"])
        assert code == 2
        assert "error" in err

    def test_bad_alpha_is_usage_error(self, k2_file):
        code, _, _ = run_cli(["solve", "--graph", k2_file, "--alpha", "1.5"])
        assert code == 2

    def test_unknown_flag_exits_two(self, k2_file):
        with pytest.raises(SystemExit) as exc:
            run_cli(["solve", "--graph", k2_file, "--bogus"])
        assert exc.value.code == 2


class TestStudy:
    def test_k2_all_methods_csv(self, k2_file, tmp_path):
        out_path = tmp_path / "study.csv"
        code, out, _ = run_cli(
            ["study", "--graph", k2_file, "--t", "1", "--alpha", "0.5",
             "--max-k", "2", "--out", str(out_path)]
        )
        assert code == 0
        with open(out_path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["method", "k", "rel_error", "sum_dev", "seconds"]
        methods = {r[0] for r in rows[1:]}
        assert len(methods) == 16
        finals = {}
        for r in rows[1:]:
            finals[r[0]] = float(r[2])
        assert all(v <= 1e-12 for v in finals.values())

    def test_explicit_method_list(self, k2_file, tmp_path):
        out_path = tmp_path / "s.csv"
        code, _, _ = run_cli(
            ["study", "--graph", k2_file, "--methods", "poly:none,eds:implicit",
             "--out", str(out_path)]
        )
        assert code == 0
        with open(out_path, newline="") as fh:
            methods = {r[0] for r in list(csv.reader(fh))[1:]}
        assert methods == {"poly+none", "eds+implicit"}

    def test_bad_method_token(self, k2_file, tmp_path):
        code, _, err = run_cli(
            ["study", "--graph", k2_file, "--methods", "nope", "--out", str(tmp_path / "x.csv")]
        )
        assert code == 2

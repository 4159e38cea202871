import shutil
import subprocess
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from render import PlotSpec, main, method_style, read_series, render

FIXTURES = Path(__file__).parent / "fixtures"

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def test_k2_study_single_panel(tmp_path):
    out = tmp_path / "k2.png"
    path = render(PlotSpec([str(FIXTURES / "k2_study.csv")], str(out), title="K2"))
    data = Path(path).read_bytes()
    assert data[:8] == PNG_MAGIC
    series = read_series(FIXTURES / "k2_study.csv")
    assert len(series) == 16  # one curve per method


def test_path_study_curves(tmp_path):
    out = tmp_path / "path.png"
    render(PlotSpec([str(FIXTURES / "path_study.csv")], str(out)))
    assert out.exists()
    series = read_series(FIXTURES / "path_study.csv")
    assert set(series) == {
        "poly+implicit",
        "si-geomean+implicit",
        "si-time+implicit",
        "eds+implicit",
    }
    ks, errs = series["eds+implicit"]
    assert ks == sorted(ks)
    assert min(errs) < 1e-10  # the study ran to convergence


def test_two_panel_corrected_uncorrected(tmp_path):
    out = tmp_path / "fig1.png"
    spec = PlotSpec(
        [str(FIXTURES / "path_corrected.csv"), str(FIXTURES / "path_uncorrected.csv")],
        str(out),
        title="standard Krylov, with and without sum correction",
        panel_titles=["corrected", "uncorrected"],
    )
    render(spec)
    assert out.read_bytes()[:8] == PNG_MAGIC


def test_rendering_is_deterministic(tmp_path):
    a, b = tmp_path / "a.png", tmp_path / "b.png"
    render(PlotSpec([str(FIXTURES / "k2_study.csv")], str(a)))
    render(PlotSpec([str(FIXTURES / "k2_study.csv")], str(b)))
    assert a.read_bytes() == b.read_bytes()


def test_styles_stable_across_figures():
    assert method_style("eds+implicit") == method_style("eds+implicit")
    # same pole kind shares a color, same desing mode shares a line style
    assert method_style("eds+none")[0] == method_style("eds+proj")[0]
    assert method_style("poly+none")[1] == method_style("eds+none")[1]
    assert method_style("poly+none")[0] != method_style("eds+none")[0]


def test_empty_csv_fails_without_output(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("method,k,rel_error,sum_dev,seconds\n")
    out = tmp_path / "no.png"
    code = main(["--csv", str(empty), "--out", str(out)])
    assert code == 1
    assert not out.exists()


def test_missing_column_fails(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("method,iteration,error\nx,1,0.5\n")
    out = tmp_path / "no.png"
    code = main(["--csv", str(bad), "--out", str(out)])
    assert code == 1
    assert not out.exists()


def test_missing_file_fails(tmp_path):
    code = main(["--csv", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "x.png")])
    assert code == 1


def test_cli_script_end_to_end(tmp_path):
    out = tmp_path / "cli.png"
    result = subprocess.run(
        [
            sys.executable,
            str(Path(__file__).parents[1] / "render.py"),
            "--csv",
            str(FIXTURES / "path_study.csv"),
            "--out",
            str(out),
            "--title",
            "path graph",
        ],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0
    assert out.exists()


@pytest.mark.skipif(shutil.which("fraclap") is None, reason="fraclap CLI not installed")
def test_live_pipeline_from_solver_cli(tmp_path):
    """Full external-interface round trip: solver CLI -> CSV -> figure."""
    mtx = tmp_path / "k2.mtx"
    mtx.write_text(
        "%%MatrixMarket matrix coordinate pattern symmetric\n2 2 1\n2 1\n"
    )
    study = tmp_path / "study.csv"
    run = subprocess.run(
        ["fraclap", "study", "--graph", str(mtx), "--max-k", "2", "--out", str(study)],
        capture_output=True,
        text=True,
    )
    assert run.returncode == 0
    out = tmp_path / "fig.png"
    code = main(["--csv", str(study), "--out", str(out)])
    assert code == 0
    assert out.read_bytes()[:8] == PNG_MAGIC

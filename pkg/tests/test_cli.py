import json

import numpy as np
import pytest

from bosonbunch import UnitaryMatrix, save_matrix
from bosonbunch.cli import main


@pytest.fixture()
def beamsplitter_path(tmp_path):
    path = tmp_path / "bs.json"
    save_matrix(path, UnitaryMatrix(np.array([[1, 1], [1, -1]]) / np.sqrt(2)))
    return str(path)


def test_haar_writes_unitary_and_prints_defect(tmp_path, capsys):
    out = tmp_path / "u.json"
    assert main(["haar", "--dim", "8", "--seed", "7", "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "unitarity defect" in printed
    assert float(printed.split(":")[1]) <= 1e-12
    doc = json.loads(out.read_text())
    assert doc["rows"] == 8 and doc["seed"] == 7


def test_haar_same_seed_same_bytes(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["haar", "--dim", "5", "--seed", "3", "--out", str(a)]) == 0
    assert main(["haar", "--dim", "5", "--seed", "3", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_haar_rejects_dim_zero(tmp_path, capsys):
    assert main(["haar", "--dim", "0", "--seed", "1", "--out", str(tmp_path / "x.json")]) == 2
    assert "error" in capsys.readouterr().err


def test_permanent_identity_all_methods(tmp_path, capsys):
    path = tmp_path / "eye.json"
    save_matrix(path, np.eye(3, dtype=complex))
    for method in ("naive", "ryser", "glynn"):
        assert main(["permanent", "--matrix", str(path), "--method", method]) == 0
        assert capsys.readouterr().out.strip() == "1+0j"


def test_permanent_ones(tmp_path, capsys):
    path = tmp_path / "ones.json"
    save_matrix(path, np.ones((2, 2), dtype=complex))
    assert main(["permanent", "--matrix", str(path)]) == 0
    assert capsys.readouterr().out.strip() == "2+0j"


def test_permanent_repeated_reports_gray_steps(tmp_path, capsys):
    path = tmp_path / "block.json"
    save_matrix(path, np.ones((3, 2), dtype=complex))
    assert main(["permanent", "--matrix", str(path), "--method", "repeated", "--multiplicities", "2,1"]) == 0
    out = capsys.readouterr().out
    assert "gray_steps: 2" in out


def test_permanent_repeated_validates_multiplicities(tmp_path, capsys):
    path = tmp_path / "block.json"
    save_matrix(path, np.ones((3, 2), dtype=complex))
    assert main(["permanent", "--matrix", str(path), "--method", "repeated", "--multiplicities", "2,2"]) == 2


def test_permanent_naive_guard_is_usage_error(tmp_path):
    path = tmp_path / "big.json"
    save_matrix(path, np.eye(11, dtype=complex))
    assert main(["permanent", "--matrix", str(path), "--method", "naive"]) == 2


def test_permanent_missing_file_is_usage_error(tmp_path):
    assert main(["permanent", "--matrix", str(tmp_path / "nope.json")]) == 2


def test_sample_hong_ou_mandel(beamsplitter_path, capsys):
    assert main(["sample", "--unitary", beamsplitter_path, "-n", "2", "--count", "100", "--seed", "3"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 101
    header = json.loads(lines[0])
    assert header["count"] == 100
    for line in lines[1:]:
        doc = json.loads(line)
        assert doc["config"] in ([2, 0], [0, 2])


def test_sample_count_zero_header_only(beamsplitter_path, capsys):
    assert main(["sample", "--unitary", beamsplitter_path, "-n", "2", "--count", "0", "--seed", "3"]) == 0
    assert len(capsys.readouterr().out.strip().splitlines()) == 1


def test_sample_fixed_seed_is_byte_identical(beamsplitter_path, tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for out in (a, b):
        assert main(
            ["sample", "--unitary", beamsplitter_path, "-n", "2", "--count", "50", "--seed", "9", "--out", str(out)]
        ) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sample_csv_format(beamsplitter_path, capsys):
    assert main(
        ["sample", "--unitary", beamsplitter_path, "-n", "2", "--count", "3", "--seed", "1", "--format", "csv"]
    ) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "idx,ports,config,ops"
    assert len(lines) == 4


def test_sample_json_format(beamsplitter_path, capsys):
    assert main(
        ["sample", "--unitary", beamsplitter_path, "-n", "2", "--count", "3", "--seed", "1", "--format", "json"]
    ) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["count"] == 3
    assert len(doc["samples"]) == 3


def test_sample_rejects_too_many_bosons(beamsplitter_path):
    assert main(["sample", "--unitary", beamsplitter_path, "-n", "3", "--count", "1", "--seed", "1"]) == 2


def test_dist_small_table(capsys):
    assert main(["dist", "-n", "2", "-m", "2"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "n,P_exact,P,B"
    assert lines[1].startswith("1,2/3,")
    assert lines[2].startswith("2,1/3,")


def test_dist_single_boson(capsys):
    assert main(["dist", "-n", "1", "-m", "4"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2
    assert lines[1].startswith("1,1,")


def test_dist_figure_case_normalizes(tmp_path):
    out = tmp_path / "dist.csv"
    assert main(["dist", "-n", "50", "-m", "100", "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 51
    total = sum(float(line.split(",")[2]) for line in lines[1:])
    assert abs(total - 1.0) < 1e-12


def test_dist_plot_data_writes_figure_series(tmp_path):
    out = tmp_path / "dist.csv"
    assert main(["dist", "-n", "50", "-m", "100", "--out", str(out), "--plot-data"]) == 0
    fig_lines = (tmp_path / "dist.csv.fig.csv").read_text().strip().splitlines()
    assert fig_lines[0] == "n,P_exact,P,B,region"
    regions = [line.rsplit(",", 1)[1] for line in fig_lines[1:]]
    assert "left-tail" in regions and "core" in regions and "right-tail" in regions


def test_dist_rejects_inverted_counts():
    assert main(["dist", "-n", "5", "-m", "2"]) == 2


def test_bounds_report(capsys):
    assert main(["bounds", "-n", "20", "-m", "60", "--epsilon", "0.05"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["n_equiv"] == 15.0
    assert doc["sample_lower_log2"] <= doc["sample_upper_log2"]
    assert "formulas" in doc


def test_bounds_rejects_bad_epsilon():
    assert main(["bounds", "-n", "20", "-m", "60", "--epsilon", "1.5"]) == 2


def test_verify_beamsplitter_passes(beamsplitter_path, capsys):
    assert main(["verify", "--unitary", beamsplitter_path, "-n", "2", "--samples", "10000", "--seed", "4"]) == 0
    out = capsys.readouterr().out
    assert "tvd:" in out and "verdict: pass" in out


def test_verify_undersampled_run_fails_with_code_1(tmp_path, capsys):
    from bosonbunch import haar_unitary

    path = tmp_path / "u3.json"
    save_matrix(path, haar_unitary(3, seed=8))
    # 25 samples over 6 configurations cannot track the distribution to 0.02
    assert main(["verify", "--unitary", str(path), "-n", "2", "--samples", "25", "--seed", "4"]) == 1
    assert "verdict: fail" in capsys.readouterr().out


def test_verify_refuses_infeasible_enumeration(tmp_path):
    path = tmp_path / "u30.json"
    from bosonbunch import haar_unitary

    save_matrix(path, haar_unitary(30, seed=1))
    assert main(["verify", "--unitary", path.as_posix(), "-n", "30", "--samples", "10", "--seed", "1"]) == 2


def test_usage_error_exit_code():
    assert main(["sample", "--unitary"]) == 2
    assert main(["nonsense"]) == 2

from __future__ import annotations

import json

import pytest

from qident.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_verify_ident_exact_range(capsys):
    code, out = run_cli(capsys, "verify-ident", "--m", "0..2")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 3
    for line, m in zip(lines, range(3)):
        data = json.loads(line)
        assert data["m"] == m
        assert data["verdict"] == "zero"
        assert data["mode"] == "exact"


def test_verify_ident_modular(capsys):
    code, out = run_cli(
        capsys, "verify-ident", "--m", "4", "--mode", "modular", "--trials", "6"
    )
    assert code == 0
    data = json.loads(out)
    assert data["mode"] == "modular"
    assert data["trials"] == 6


def test_verify_dist_fails_without_diagnostic(capsys):
    code, out = run_cli(capsys, "verify-dist", "--m", "0", "--window", "5")
    assert code == 1
    assert json.loads(out)["verdict"] == "nonzero"


def test_verify_dist_diagnostic_accepts_clean_fit(capsys):
    code, out = run_cli(
        capsys, "verify-dist", "--m", "0", "--window", "5", "--diagnostic"
    )
    assert code == 0
    data = json.loads(out)
    assert data["fitted_scalar"] == "q^1"
    assert data["fitted_mismatches"] == 0


def test_replay_diagnostic(capsys):
    code, out = run_cli(
        capsys, "replay", "--m", "1", "--window", "5", "--order", "6", "--diagnostic"
    )
    assert code == 0
    data = json.loads(out)
    assert data["stage_residuals"] == [True, True]


def test_delta_coeff_exit_codes(capsys):
    code, _ = run_cli(capsys, "delta-coeff", "--m", "1")
    assert code == 0
    code, _ = run_cli(capsys, "delta-coeff", "--m", "1", "--mutate", "sign")
    assert code == 1


def test_qbinom_table(capsys):
    code, out = run_cli(capsys, "qbinom", "--n", "3")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "[0,0] = 1"
    assert "[3,1] = 1 q^2 + 1 + 1 q^-2" in lines
    assert len(lines) == 10


def test_out_file_and_thread_determinism(capsys, tmp_path):
    paths = []
    for threads in ("1", "2", "8"):
        path = tmp_path / f"t{threads}.json"
        code = main(
            [
                "verify-dist",
                "--m",
                "1",
                "--window",
                "5",
                "--order",
                "6",
                "--threads",
                threads,
                "--diagnostic",
                "--out",
                str(path),
            ]
        )
        assert code == 0
        paths.append(path)
    blobs = [p.read_bytes() for p in paths]
    assert blobs[0] == blobs[1] == blobs[2]
    capsys.readouterr()


def test_pretty_output_parses(capsys):
    code, out = run_cli(capsys, "verify-ident", "--m", "1", "--pretty")
    assert code == 0
    data = json.loads(out)
    assert data["verdict"] == "zero"


def test_timings_flag_controls_elapsed(capsys):
    _, out = run_cli(capsys, "verify-ident", "--m", "1")
    assert json.loads(out)["elapsed_ms"] == 0
    _, out = run_cli(capsys, "verify-ident", "--m", "1", "--timings")
    assert json.loads(out)["elapsed_ms"] >= 0


def test_bench_modes(capsys):
    code, out = run_cli(capsys, "bench", "--m", "2")
    assert code == 0
    data = json.loads(out)
    assert data["mode"] == "exact" and "wall_s" in data
    code, out = run_cli(
        capsys, "bench", "--m", "1", "--mode", "replay", "--window", "5", "--order", "6"
    )
    assert code == 0
    data = json.loads(out)
    assert len(data["stage_wall_ms"]) == 2


def test_bad_usage_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify-ident"])  # --m is required
    assert exc.value.code == 2
    capsys.readouterr()
    with pytest.raises(SystemExit) as exc:
        main(["verify-ident", "--m", "3..1"])  # empty range
    assert exc.value.code == 2
    capsys.readouterr()

import pytest

from conftest import REFERENCE_TEXT

from bykovlab.cli import main


def run_cli(args):
    try:
        return main(args)
    except SystemExit as exc:
        return exc.code


def test_validate_ok(ref_config_path, tmp_path, capsys):
    code = run_cli(
        ["validate", "--config", ref_config_path, "--out", str(tmp_path)]
    )
    assert code == 0
    assert (tmp_path / "validation.txt").exists()
    out = capsys.readouterr().out
    assert "stability_criterion = True" in out


def test_validate_domain_failure_exits_1(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text(REFERENCE_TEXT.replace("C_v = 2.0", "C_v = 0.5"))
    code = run_cli(["validate", "--config", str(bad), "--out", str(tmp_path)])
    assert code == 1


def test_missing_config_exits_2(tmp_path):
    code = run_cli(
        ["validate", "--config", str(tmp_path / "nope.cfg"), "--out", str(tmp_path)]
    )
    assert code == 2


def test_unknown_key_exits_2(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text(REFERENCE_TEXT + "mystery = 1\n")
    code = run_cli(["validate", "--config", str(bad), "--out", str(tmp_path)])
    assert code == 2


def test_bad_flags_exit_2(ref_config_path, tmp_path):
    with pytest.raises(SystemExit) as err:
        main(["orbit", "--config", ref_config_path, "--out", str(tmp_path)])
    assert err.value.code == 2  # missing required --x/--y


def test_curves_artifacts_with_header(ref_config_path, tmp_path):
    code = run_cli(["curves", "--config", ref_config_path, "--out", str(tmp_path)])
    assert code == 0
    for name in ("g_curve.csv", "h_curve.csv", "h_return.csv", "fold_point.csv"):
        text = (tmp_path / name).read_text()
        assert text.startswith("# bykovlab artifact; resolved configuration:")
        assert "# lambda = 0.01" in text


def test_lambda_override_changes_artifact(ref_config_path, tmp_path):
    run_cli(
        [
            "curves",
            "--config",
            ref_config_path,
            "--out",
            str(tmp_path),
            "--lambda",
            "0.02",
        ]
    )
    text = (tmp_path / "g_curve.csv").read_text()
    assert "# lambda = 0.02" in text


def test_orbit_command(ref_config_path, tmp_path, capsys):
    code = run_cli(
        [
            "orbit",
            "--config",
            ref_config_path,
            "--out",
            str(tmp_path),
            "--x",
            "0.3",
            "--y",
            "0.2",
            "--k",
            "5",
        ]
    )
    assert code == 0
    body = (tmp_path / "orbit.csv").read_text()
    assert "step,x_unwrapped,y,sheet,symbol,winding,status" in body


def test_itinerary_match_line(ref_config_path, tmp_path, capsys):
    code = run_cli(
        [
            "itinerary",
            "--config",
            ref_config_path,
            "--out",
            str(tmp_path),
            "--word",
            "1+,1+,2+,1+",
        ]
    )
    assert code == 0
    assert "MATCH 4/4" in capsys.readouterr().out
    assert "MATCH 4/4" in (tmp_path / "itinerary.txt").read_text()


def test_horseshoe_command(ref_config_path, tmp_path, capsys):
    code = run_cli(
        [
            "horseshoe",
            "--config",
            ref_config_path,
            "--out",
            str(tmp_path),
            "--grid",
            "25",
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "1 1" in out
    matrix_text = (tmp_path / "transition_matrix.txt").read_text()
    assert "1 1\n1 1" in matrix_text


def test_escape_command(ref_config_path, tmp_path):
    code = run_cli(
        [
            "escape",
            "--config",
            ref_config_path,
            "--out",
            str(tmp_path),
            "--samples",
            "500",
            "--horizon",
            "4",
        ]
    )
    assert code == 0
    body = (tmp_path / "survival.csv").read_text()
    assert "returns,survival" in body
    assert "\n0,1\n" in body


def test_escape_horizon_zero_all_ones(ref_config_path, tmp_path):
    code = run_cli(
        [
            "escape",
            "--config",
            ref_config_path,
            "--out",
            str(tmp_path),
            "--samples",
            "100",
            "--horizon",
            "0",
        ]
    )
    assert code == 0
    rows = [
        line
        for line in (tmp_path / "survival.csv").read_text().splitlines()
        if line and not line.startswith("#")
    ]
    assert rows == ["returns,survival", "0,1"]


def test_tangency_command(ref_config_path, tmp_path, capsys):
    code = run_cli(
        [
            "tangency",
            "--config",
            ref_config_path,
            "--out",
            str(tmp_path),
            "--lambda-hi",
            "0.1",
            "--lambda-lo",
            "0.001",
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "records:" in out
    assert (tmp_path / "tangency_table.txt").exists()


def test_replay_byte_identical(ref_config_path, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        assert (
            run_cli(
                [
                    "escape",
                    "--config",
                    ref_config_path,
                    "--out",
                    str(out),
                    "--samples",
                    "1000",
                    "--horizon",
                    "6",
                ]
            )
            == 0
        )
    assert (out1 / "survival.csv").read_bytes() == (out2 / "survival.csv").read_bytes()

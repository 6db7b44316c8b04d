import json

import pytest
from mpmath import mp, mpf

from src.cli.config import RunConfig, read_config_file
from src.cli.main import EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, main
from src.cli.verify import CheckResult, Verifier, load_golden
from src.moments.solver import solve_moments
from src.qmark.minkowski import fixed_points
from src.utils.exceptions import ConfigError, ValidationError


def _json_output(capsys, argv):
    assert main(argv) == EXIT_OK
    return json.loads(capsys.readouterr().out)


def test_moments_report(capsys) -> None:
    data = _json_output(capsys, ["moments", "--order", "16", "--prec", "96", "--json"])
    assert (data["order"], data["prec_bits"], data["kernel"]) == (16, 96, "mobius")
    assert [len(data[key]) for key in ("m", "M", "c", "B", "err")] == [16, 17, 32, 17, 16]
    assert float(data["m"][0]) == pytest.approx(0.5, abs=1e-15)
    assert float(data["M"][1]) == pytest.approx(1.5, abs=1e-15)
    assert data["B"][:5] == [1, 1, 3, 13, 75]
    assert all(float(later) < float(earlier) for earlier, later in zip(data["m"], data["m"][1:]))
    assert all(0 <= float(e) < 1e-10 for e in data["err"][:8])
    assert "wall_time" not in data


def test_moments_csv(capsys) -> None:
    assert main(["moments", "--order", "8", "--prec", "96", "--csv"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "L,m,M,B,err"
    assert len(lines) == 10
    assert lines[4].split(",")[3] == "13"


def test_deterministic_json_is_byte_identical(tmp_path) -> None:
    argv = ["gfun", "eval", "--z", "-1/2", "--order", "24", "--prec", "96", "--json", "--deterministic"]
    first, second = tmp_path / "first.json", tmp_path / "second.json"
    assert main(argv + ["--out", str(first)]) == EXIT_OK
    assert main(argv + ["--out", str(second)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()
    assert "wall_time" not in json.loads(first.read_text())


def test_tree_generation_csv(capsys) -> None:
    assert main(["tree", "gen", "--gen", "3", "--csv"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "index,numerator,denominator"
    assert lines[1:] == ["0,1,3", "1,3,2", "2,2,3", "3,3,1"]


def test_qmark_eval(capsys) -> None:
    data = _json_output(capsys, ["qmark", "eval", "--x", "1/2", "--json"])
    row = data["results"][0]
    assert float(row["value"]) == pytest.approx(0.5)
    assert row["exact"] == "1/2"
    assert "wall_time" in data


def test_padic_mu(capsys) -> None:
    data = _json_output(capsys, ["padic", "mu", "--p", "2", "--nu", "0", "--empirical", "12", "--json"])
    row = data["results"][0]
    assert row["closed_form"] == row["chain"] == "2/3"
    assert row["empirical"] == "1365/2048"


def test_padic_orbit_csv(capsys) -> None:
    assert main(["padic", "orbit", "--p", "3", "--dump", "csv"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "state_id,i,kappa,is_outside"
    assert len(lines) == 5


def test_text_report_to_file(tmp_path) -> None:
    target = tmp_path / "reports" / "counts.txt"
    assert main(["padic", "counts", "--gen", "4", "--out", str(target)]) == EXIT_OK
    text = target.read_text()
    assert text.startswith("# padic counts")
    assert "E=6" in text and "O=2" in text


def test_usage_errors(capsys) -> None:
    assert main(["qmark"]) == EXIT_USAGE
    assert main(["moments", "--kernel", "laguerre"]) == EXIT_USAGE
    assert main(["padic", "mu", "--p", "2"]) == EXIT_USAGE
    assert "minklab" in capsys.readouterr().err


def test_domain_errors_exit_with_validation_code() -> None:
    assert main(["padic", "mu", "--p", "4", "--nu", "1"]) == EXIT_VALIDATION
    assert main(["padic", "mu", "--p", "3", "--z", "3", "--nu", "1"]) == EXIT_VALIDATION
    assert main(["qmark", "eval", "--x", "1/2", "--prec", "8"]) == EXIT_VALIDATION


def test_config_file(tmp_path) -> None:
    path = tmp_path / "run.cfg"
    path.write_text("# defaults\nprec = 96\n\ngen = 10\n")
    assert read_config_file(path) == {"prec": 96, "gen": 10}
    config = RunConfig.resolve({"gen": 12, "format": None}, path)
    assert (config.prec, config.gen) == (96, 12)
    path.write_text("depth = 3\n")
    with pytest.raises(ConfigError):
        read_config_file(path)
    assert main(["padic", "counts", "--config", str(path)]) == EXIT_VALIDATION
    with pytest.raises(ConfigError):
        read_config_file(tmp_path / "missing.cfg")


def test_golden_file_errors(tmp_path) -> None:
    assert "fixed_point" in load_golden()
    broken = tmp_path / "golden.json"
    broken.write_text("{not json")
    with pytest.raises(ValidationError):
        load_golden(broken)
    with pytest.raises(ValidationError):
        load_golden(tmp_path / "absent.json")


def test_corrupted_golden_value_fails_its_check(tmp_path) -> None:
    golden = tmp_path / "golden.json"
    golden.write_text(json.dumps({"checks": {
        "fixed_point": {"value": "0.5", "tolerance": "1e-8", "kind": "value", "provenance": "derived"},
        "charpoly_p7": {"value": "match", "kind": "exact", "provenance": "published"},
    }}))
    verifier = Verifier(golden)
    result = verifier.compare("fixed_point", fixed_points(64)[0])
    assert not result.passed
    assert result.to_dict()["check"] == "fixed_point"
    assert verifier.compare("charpoly_p7", "match").passed
    missing = verifier.compare("m2", 0.29)
    assert not missing.passed and missing.error == "no golden value"


def test_failing_stage_does_not_stop_the_run(monkeypatch) -> None:
    verifier = Verifier()

    def broken():
        raise ValidationError("stage exploded")

    monkeypatch.setattr(verifier, "stages", lambda suite: {"broken": broken, "qmark": verifier.stage_qmark})
    results = verifier.run("fast")
    assert results[0] == CheckResult("broken", False, "", "", "", "", error="stage exploded")
    assert [r.name for r in results[1:]] == ["fixed_point", "inverse_two_thirds", "inverse_roundtrip"]
    assert all(r.passed for r in results[1:])
    with pytest.raises(ValidationError):
        Verifier().stages("nightly")


def test_golden_moments_hold_at_two_precisions() -> None:
    verifier = Verifier()
    low, high = solve_moments(64, 192), solve_moments(64, 320)
    for L in (2, 3, 4):
        for name, low_value, high_value in ((f"m{L}", low.m[L], high.m[L]), (f"M{L}", low.M[L], high.M[L])):
            assert verifier.compare(name, low_value).passed
            assert verifier.compare(name, high_value).passed
            with mp.workprec(320):
                assert abs(low_value - high_value) < mpf(10) ** -20


def test_qmark_stage_samples_seeded_dyadics() -> None:
    first, second = Verifier().stage_qmark(), Verifier().stage_qmark()
    assert first["inverse_roundtrip"] == second["inverse_roundtrip"]
    assert first["inverse_roundtrip"] <= mp.ldexp(mpf(1), -48)


@pytest.mark.slow
def test_eigen_stage_checks_stability_and_contraction() -> None:
    verifier = Verifier()
    results = verifier.stage_eigen()
    assert {"eigen_stability", "eigen_contraction"} <= set(results)
    assert all(verifier.compare(name, value).passed for name, value in results.items())

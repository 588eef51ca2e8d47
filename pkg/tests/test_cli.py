import json
from importlib import resources

import jsonschema
import pytest

from pbcert import cli


def write_json(path, data):
    path.write_text(json.dumps(data))
    return str(path)


def read_report(out_dir):
    with open(out_dir / "report.json", "r", encoding="utf-8") as fh:
        report = json.load(fh)
    schema = json.loads(resources.files("pbcert.schemas")
                        .joinpath("report.schema.json").read_text())
    jsonschema.validate(report, schema)
    return report


GOODWIN_BLUE = {"type": "goodwin", "tau": 0.01, "lambda": 0.1}
PARABOLIC_PASS = {"eigenvalues": [float(k * k) for k in range(1, 13)],
                  "alpha": 0.0, "Lambda": 2.0, "j": 2}
LURJE_SCALAR = {
    "type": "lurje_delay_system",
    "a_terms": [{"delay": 0.0, "matrix": [[-1.0]]}],
    "b": [[1.0]],
    "c_terms": [{"delay": 0.0, "matrix": [[1.0]]}],
    "lambda": 0.5,
    "nu": 0.0,
}


class TestGoodwinCheck:
    def test_blue_point_exits_zero(self, tmp_path):
        inp = write_json(tmp_path / "in.json", GOODWIN_BLUE)
        code = cli.main(["goodwin-check", "--input", inp,
                         "--out", str(tmp_path / "out")])
        assert code == 0
        report = read_report(tmp_path / "out")
        assert report["status"] == "certified"
        assert report["classification"]["label"] == "StablePoint"
        assert set(report["hypotheses"]) == {"H1", "H2", "H3"}
        assert report["hypotheses"]["H2"]["j"] == 2
        assert report["hypotheses"]["H3"]["nu"] == pytest.approx(0.1)

    def test_uncertified_point_is_refuted(self, tmp_path):
        inp = write_json(tmp_path / "in.json",
                         {"type": "goodwin", "tau": 2.9, "lambda": 1.2})
        code = cli.main(["goodwin-check", "--input", inp,
                         "--out", str(tmp_path / "out")])
        assert code == 0
        report = read_report(tmp_path / "out")
        assert report["status"] == "refuted"
        assert "hypotheses" not in report

    def test_malformed_json_exits_one(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        code = cli.main(["goodwin-check", "--input", str(bad),
                         "--out", str(tmp_path / "out")])
        assert code == 1
        err = json.loads(capsys.readouterr().out.strip())
        assert err["error"] == "validation"
        assert err["field"] == "$"

    def test_invalid_field_named_in_error(self, tmp_path, capsys):
        inp = write_json(tmp_path / "in.json",
                         {"type": "goodwin", "tau": -5, "lambda": 0.1})
        code = cli.main(["goodwin-check", "--input", inp,
                         "--out", str(tmp_path / "out")])
        assert code == 1
        err = json.loads(capsys.readouterr().out.strip())
        assert err["field"] == "tau"

    def test_wrong_document_type_rejected(self, tmp_path, capsys):
        inp = write_json(tmp_path / "in.json", LURJE_SCALAR)
        code = cli.main(["goodwin-check", "--input", inp,
                         "--out", str(tmp_path / "out")])
        assert code == 1
        err = json.loads(capsys.readouterr().out.strip())
        assert err["field"] == "type"


class TestCertifyDelay:
    def test_scalar_certified(self, tmp_path):
        inp = write_json(tmp_path / "in.json", LURJE_SCALAR)
        code = cli.main(["certify-delay", "--input", inp,
                         "--out", str(tmp_path / "out")])
        assert code == 0
        report = read_report(tmp_path / "out")
        assert report["status"] == "certified"
        assert report["root_counts"][0]["count"] == 0
        assert report["sweeps"][0]["passed"] is True
        assert report["hypotheses"]["H3"]["margin"] == pytest.approx(1.0, abs=1e-6)

    def test_expected_count_mismatch_refutes(self, tmp_path):
        doc = dict(LURJE_SCALAR, j_expected=2)
        inp = write_json(tmp_path / "in.json", doc)
        code = cli.main(["certify-delay", "--input", inp,
                         "--out", str(tmp_path / "out")])
        assert code == 0
        report = read_report(tmp_path / "out")
        assert report["status"] == "refuted"
        assert "hypotheses" not in report

    def test_tight_lipschitz_refutes(self, tmp_path):
        doc = dict(LURJE_SCALAR)
        doc["lambda"] = 2.0
        inp = write_json(tmp_path / "in.json", doc)
        code = cli.main(["certify-delay", "--input", inp,
                         "--out", str(tmp_path / "out")])
        assert code == 0
        assert read_report(tmp_path / "out")["status"] == "refuted"

    def test_overflowing_delay_is_inconclusive(self, tmp_path):
        doc = dict(LURJE_SCALAR)
        doc["a_terms"] = [{"delay": 0.0, "matrix": [[-1.0]]},
                          {"delay": 900.0, "matrix": [[0.1]]}]
        doc["nu"] = 2.0
        inp = write_json(tmp_path / "in.json", doc)
        code = cli.main(["certify-delay", "--input", inp,
                         "--out", str(tmp_path / "out")])
        assert code == 2
        assert read_report(tmp_path / "out")["status"] == "inconclusive"


class TestParabolicGap:
    def test_pass_report(self, tmp_path):
        inp = write_json(tmp_path / "in.json", PARABOLIC_PASS)
        code = cli.main(["parabolic-gap", "--input", inp,
                         "--out", str(tmp_path / "out")])
        assert code == 0
        report = read_report(tmp_path / "out")
        assert report["status"] == "certified"
        assert report["gap"]["gap_value"] == pytest.approx(2.5)

    def test_fail_report(self, tmp_path):
        doc = dict(PARABOLIC_PASS, alpha=0.5)
        inp = write_json(tmp_path / "in.json", doc)
        code = cli.main(["parabolic-gap", "--input", inp,
                         "--out", str(tmp_path / "out")])
        assert code == 0
        assert read_report(tmp_path / "out")["status"] == "refuted"

    def test_degenerate_gap_is_validation_error(self, tmp_path, capsys):
        doc = dict(PARABOLIC_PASS, eigenvalues=[1.0, 4.0, 4.0, 9.0], j=2)
        inp = write_json(tmp_path / "in.json", doc)
        code = cli.main(["parabolic-gap", "--input", inp,
                         "--out", str(tmp_path / "out")])
        assert code == 1
        assert json.loads(capsys.readouterr().out.strip())["field"] == "j"


class TestSimulate:
    def test_orbit_detection_and_trajectory_csv(self, tmp_path):
        inp = write_json(tmp_path / "in.json",
                         {"type": "goodwin", "tau": 2.7, "lambda": 0.5})
        code = cli.main(["simulate", "--input", inp,
                         "--out", str(tmp_path / "out"),
                         "--horizon", "420", "--step", "0.021"])
        assert code == 0
        report = read_report(tmp_path / "out")
        assert report["verdict"]["kind"] == "ConvergedToPeriodicOrbit"
        assert report["verdict"]["period"] == pytest.approx(15.774, abs=0.02)
        lines = (tmp_path / "out" / "trajectory.csv").read_text().splitlines()
        assert lines[0] == "t,x1,x2,x3"
        assert len(lines) > 1000

    def test_constant_history_at_stationary_point(self, tmp_path):
        import pbcert.goodwin as gw
        phi0 = [float(v) for v in gw.stationary_point(0.8)]
        inp = write_json(tmp_path / "in.json",
                         {"type": "goodwin", "tau": 1.0, "lambda": 0.8,
                          "history": {"kind": "constant", "values": phi0}})
        code = cli.main(["simulate", "--input", inp,
                         "--out", str(tmp_path / "out"),
                         "--horizon", "50", "--step", "0.05"])
        assert code == 0
        report = read_report(tmp_path / "out")
        assert report["verdict"]["kind"] == "ConvergedToPoint"


class TestRegion:
    def test_csv_and_svg_identical_across_worker_counts(self, tmp_path):
        args = ["goodwin-region", "--tau-range", "2:3:6",
                "--lambda-range", "0.35:0.65:4", "--beta-set", "1.5"]
        code1 = cli.main(args + ["--out", str(tmp_path / "w1"), "--workers", "1"])
        code2 = cli.main(args + ["--out", str(tmp_path / "w2"), "--workers", "3"])
        assert code1 == code2 == 0
        csv1 = (tmp_path / "w1" / "region.csv").read_bytes()
        csv2 = (tmp_path / "w2" / "region.csv").read_bytes()
        assert csv1 == csv2
        svg1 = (tmp_path / "w1" / "region.svg").read_bytes()
        svg2 = (tmp_path / "w2" / "region.svg").read_bytes()
        assert svg1 == svg2
        report = read_report(tmp_path / "w1")
        assert report["region"]["cells"] == 24
        counts = report["region"]["counts"]
        assert sum(counts.values()) == 24

    def test_rejects_bad_worker_count(self, tmp_path, capsys):
        code = cli.main(["goodwin-region", "--tau-range", "2:3:2",
                         "--lambda-range", "0.4:0.6:2",
                         "--out", str(tmp_path / "out"), "--workers", "0"])
        assert code == 1
        assert json.loads(capsys.readouterr().out.strip())["field"] == "workers"

import json

import pytest

from mulab.analysis import (
    CurveRecord,
    analyze,
    analyze_many,
    ingest,
    render_report,
)
from mulab.cli import main
from mulab.errors import (
    BadReduction,
    InconsistentAp,
    InvalidModel,
    NotOrdinary,
    ParseError,
)


def write_json(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def test_ingest_point_count_fill(tmp_path):
    path = write_json(tmp_path, "c.json", [
        {"label": "11a1", "ainvs": [0, -1, 1, -10, -20], "conductor": 11}])
    (rec,) = ingest(path)
    assert rec.curve().ap(2) == -2


def test_ingest_rejects_wrong_ap(tmp_path):
    path = write_json(tmp_path, "c.json", [
        {"label": "11a1", "ainvs": [0, -1, 1, -10, -20], "conductor": 11,
         "ap": {"2": 1}}])
    with pytest.raises(InconsistentAp):
        ingest(path)


def test_ingest_rejects_singular_and_bad_conductor(tmp_path):
    path = write_json(tmp_path, "c.json", [
        {"label": "x", "ainvs": [0, 0, 0, 0, 0], "conductor": 11}])
    with pytest.raises(InvalidModel):
        ingest(path)
    path = write_json(tmp_path, "c2.json", [
        {"label": "x", "ainvs": [0, -1, 1, -10, -20], "conductor": 15}])
    with pytest.raises(InvalidModel):
        ingest(path)


def test_ingest_empty_and_parse_error(tmp_path):
    path = write_json(tmp_path, "c.json", [])
    assert ingest(path) == []
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    with pytest.raises(ParseError):
        ingest(str(bad))
    with pytest.raises(ParseError):
        ingest(str(tmp_path / "missing.json"))


REC_11A1 = CurveRecord("11a1", (0, -1, 1, -10, -20), 11)
REC_37A1 = CurveRecord("37a1", (0, 0, 1, -1, 0), 37)


def test_analyze_rejects_bad_p():
    with pytest.raises(BadReduction):
        analyze(REC_11A1, 11)
    # 37a1 has a_3 = -3: not ordinary at 3
    with pytest.raises(NotOrdinary):
        analyze(REC_37A1, 3)


def test_analyze_irreducible_still_reports_mu():
    # the conductor-19 curve is irreducible at p = 5 (no 5-isogeny),
    # rank 0 and ordinary there; mu/lambda are still computed
    rep = analyze(CurveRecord("n19-1", (0, 1, 1, 1, 0), 19), 5, layers=2)
    assert rep["reducible"] is False
    assert rep["classification"] == "irreducible"
    assert "mu" in rep and "lambda" in rep


def test_analyze_11a1_report_fields():
    rep = analyze(REC_11A1, 5)
    assert rep["reducible"] and rep["ss"] == ["1", "chi"]
    assert rep["classification"] == "aligned"
    assert rep["alignment_degree"]["kind"] == "congruence-lower-bound"
    assert rep["mu"] == 1 and rep["lambda"] == 0
    assert rep["normalization"]["base_symbol_value"] == "1/5"
    assert rep["precision"]["N"] == 6
    assert any("main conjecture" in a for a in rep["assumptions"])


def test_analyze_many_isogeny_class_checks():
    recs = [CurveRecord("11a1", (0, -1, 1, -10, -20), 11),
            CurveRecord("11a3", (0, -1, 1, 0, 0), 11)]
    reports = analyze_many(recs, lambda r: 5)
    assert [r["mu"] for r in reports] == [1, 0]
    assert reports[0]["lambda"] == reports[1]["lambda"]


def test_report_determinism(tmp_path):
    recs = [REC_11A1]
    a = render_report(analyze_many(recs, lambda r: 5), "json")
    b = render_report(analyze_many(recs, lambda r: 5), "json")
    assert a == b
    table = render_report(analyze_many(recs, lambda r: 5), "table")
    assert "main conjecture" in table


def test_cache_roundtrip_and_verify(tmp_path):
    cache = str(tmp_path / "cache")
    rep1 = analyze(REC_11A1, 5, cache_dir=cache)
    # second run hits the cache; --verify-cache recomputes and compares
    rep2 = analyze(REC_11A1, 5, cache_dir=cache, verify_cache=True)
    assert rep1["mu"] == rep2["mu"]
    theta_file = tmp_path / "cache" / "11a1" / "5" / "theta_1.json"
    assert theta_file.exists()


def test_cli_analyze_exit_codes(tmp_path, capsys):
    curves = write_json(tmp_path, "c.json", [
        {"label": "11a1", "ainvs": [0, -1, 1, -10, -20],
         "conductor": 11}])
    rc = main(["analyze", "--curves", curves, "--p", "5",
               "--format", "json"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out[0]["mu"] == 1
    rc = main(["analyze", "--curves", str(tmp_path / "nope.json"),
               "--p", "5"])
    assert rc == 3


def test_cli_config_file(tmp_path, capsys):
    curves = write_json(tmp_path, "c.json", [
        {"label": "11a1", "ainvs": [0, -1, 1, -10, -20],
         "conductor": 11}])
    cfg = tmp_path / "cfg.toml"
    cfg.write_text('[analyze]\np = 5\nformat = "table"\nlayers = 2\n')
    rc = main(["analyze", "--curves", curves, "--config", str(cfg)])
    assert rc == 0
    assert "11a1" in capsys.readouterr().out


def test_cli_lambda_invariants(tmp_path, capsys):
    pres = write_json(tmp_path, "p.json",
                      {"p": 5, "N": 3, "MT": 8,
                       "rows": [[[5], [0]], [[0], [25]]]})
    rc = main(["lambda-invariants", "--presentation", pres])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["mu_vector"] == [1, 1] and out["mu"] == 3


def test_cli_lift_lab(capsys):
    rc = main(["lift-lab", "run", "data/scenarios/borel_z3.json"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert all(s["status"] == "ok" for s in out["steps"])
    rc = main(["lift-lab", "run", "data/scenarios/obstructed_z3.json"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["steps"][-1]["status"] == "obstructed"


def test_cli_byte_determinism(tmp_path, capsys):
    curves = write_json(tmp_path, "c.json", [
        {"label": "11a3", "ainvs": [0, -1, 1, 0, 0], "conductor": 11}])
    outputs = []
    for _ in range(2):
        rc = main(["analyze", "--curves", curves, "--p", "5"])
        assert rc == 0
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1]


def test_kernel_polys_short_circuit(tmp_path):
    """A supplied kernel_polys field bypasses the factorization."""
    path = write_json(tmp_path, "c.json", [
        {"label": "11a3", "ainvs": [0, -1, 1, 0, 0], "conductor": 11,
         "kernel_polys": {"5": [["0", "-1", "1"]]}}])
    (rec,) = ingest(path)
    rep = analyze(rec, 5, layers=2)
    assert rep["classification"] == "skew"
    assert rep["kernel_count"] == 1


def test_cli_cache_and_verify(tmp_path, capsys):
    curves = write_json(tmp_path, "c.json", [
        {"label": "11a1", "ainvs": [0, -1, 1, -10, -20],
         "conductor": 11}])
    cache = str(tmp_path / "cache")
    rc = main(["analyze", "--curves", curves, "--p", "5",
               "--cache", cache])
    assert rc == 0
    capsys.readouterr()
    rc = main(["analyze", "--curves", curves, "--p", "5",
               "--cache", cache, "--verify-cache"])
    assert rc == 0

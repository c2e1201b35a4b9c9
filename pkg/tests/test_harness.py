import csv
import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bphi_lab.harness import (
    CSV_COLUMNS,
    RunConfig,
    VerificationRecord,
    boundary_nodes,
    emit_report,
    geometric_grid,
    pmap,
    proof_inequalities,
    run_verification,
    verify_bloch_membership,
    verify_theorem1,
    verify_theorem1_corollary,
    verify_theorem2,
    verify_theorem3,
)
from bphi_lab.quadrature import QuadratureSpec
from bphi_lab.weights import PowerWeight

SPEC = QuadratureSpec()


def small(**kw):
    base = dict(corpus=["mono:1", "log1mz"], weights=["power:0", "power:0.5"], r_grid=geometric_grid(1, 3),
                t3_r_grid=geometric_grid(2, 6), rays=8, bloch_levels=6)
    base.update(kw)
    return RunConfig(**base)


@given(
    lhs=st.floats(0, 1e6),
    rhs=st.floats(0, 1e6),
    tol=st.sampled_from([0.0, 0.02, 0.1]),
)
def test_record_pass_iff_ratio_within_tolerance(lhs, rhs, tol):
    rec = VerificationRecord.compare("T1", "f", "w", 0.5, lhs, rhs, tol, SPEC)
    assert rec.passed == (rec.ratio <= 1 + tol)
    assert rec.lhs >= 0 and rec.rhs >= 0
    if lhs > 0 and rhs == 0:
        assert rec.ratio == math.inf and not rec.passed


def test_record_nan_fails():
    rec = VerificationRecord.compare("T1", "f", "w", 0.5, math.nan, 1.0, 0.02, SPEC)
    assert not rec.passed
    assert not VerificationRecord.failed("T1", "f", "w", 0.5, SPEC, "boom").passed


def test_theorem1_identity_example():
    recs = verify_theorem1(small(corpus=["mono:1"], weights=["power:0"], r_grid=[0.5]))
    (rec,) = recs
    assert rec.lhs <= 0.7072
    assert rec.rhs == pytest.approx(math.sqrt(math.log(4 / 3)), rel=1e-12)
    assert rec.passed and rec.ratio <= 1.02


def test_theorem1_constant_passes_with_zero_ratio():
    recs = verify_theorem1(small(corpus=["const:0.7"]))
    assert all(r.passed and r.ratio == 0 for r in recs)
    recs = verify_theorem1_corollary(small(corpus=["const:0.7"]))
    assert all(r.passed and r.ratio == 0 for r in recs)


def test_corollary_matches_theorem1_bloch_rows():
    cfg = small(weights=["power:0"])
    t1 = verify_theorem1(cfg)
    t1c = verify_theorem1_corollary(cfg)
    assert len(t1) == len(t1c)
    for a, b in zip(t1, t1c):
        assert (a.fn, a.weight, a.r) == (b.fn, b.weight, b.r)
        assert abs(a.ratio - b.ratio) <= 1e-12
        assert a.passed and b.passed


def test_theorem1_log_and_lacunary_pass():
    cfg = small(corpus=["log1mz", "lacunary:16"], weights=["power:0"])
    recs = verify_theorem1(cfg)
    assert all(r.passed for r in recs)
    # the estimate is order-sharp for log(1 - z): ratios stay away from 0
    assert all(r.ratio >= 0.1 for r in recs if r.fn == "log1mz")


def test_bad_label_becomes_error_row():
    recs = verify_theorem1(small(corpus=["mono:1", "nonsense"], weights=["power:0"], r_grid=[0.5]))
    bad = [r for r in recs if r.fn == "nonsense"]
    assert bad and not bad[0].passed and "nonsense" in bad[0].error


def test_theorem2_m_table():
    recs, m = verify_theorem2(small(gamma_grid=[0.0, 0.05, 0.1]))
    assert m[0.0] == 1.0
    assert m[0.0] <= m[0.05] <= m[0.1] < math.inf
    assert all(r.passed for r in recs)


def test_theorem2_rejects_nonzero_at_origin():
    recs, _ = verify_theorem2(small(corpus=["const:1"], weights=["power:0"]))
    assert recs and all(not r.passed and r.error for r in recs)


def test_theorem3_records_and_profiles():
    cfg = small()
    recs, profiles, consts = verify_theorem3(cfg)
    assert all(r.passed for r in recs)
    assert {r.theorem for r in recs} == {"T3", "T3-mu-chain"}
    assert all(r.r >= 1 - 2**-4 for r in recs if r.theorem == "T3-mu-chain")
    assert all(math.isfinite(r.lhs) for r in recs)
    assert len(profiles) == len(cfg.corpus) * len(cfg.weights) * cfg.rays
    # identity: the ratio decays along every ray
    for fn, wl, prof in profiles:
        if fn == "mono:1" and wl == "power:0.0":
            assert all(b < a for a, b in zip(prof.ratios, prof.ratios[1:]))
    assert consts[("mono:1", "power:0.0")]["bphi_norm"] == 1.0


def test_theorem3_constant_ratios_zero():
    recs, _, _ = verify_theorem3(small(corpus=["const:0"], weights=["power:0"]))
    assert all(r.lhs == 0 and r.passed for r in recs)


def test_bloch_membership_rows():
    recs = verify_bloch_membership(small(bloch_levels=20))
    log_rows = [r for r in recs if r.fn == "log1mz"]
    assert len(log_rows) == 20 and all(r.passed and r.lhs <= 2 + 1e-9 for r in log_rows)
    thr = [r for r in recs if r.weight == "threshold:10"][0]
    assert thr.passed and thr.rhs > 10


@pytest.mark.parametrize("alpha", [0.0, 0.25, 0.5, 1.0])
def test_proof_inequalities_hold(alpha):
    rows = proof_inequalities(PowerWeight(alpha), geometric_grid(1, 14))
    assert all(r["g_ok"] and r["log_ok"] for r in rows)


def test_boundary_nodes():
    assert boundary_nodes(0.5, SPEC) == 256
    assert boundary_nodes(1 - 2**-10, SPEC) == 8192
    assert boundary_nodes(1 - 2**-20, SPEC) == 2**16


def test_pmap_order_independent_of_workers():
    items = list(range(7))
    assert pmap(abs, items, 1) == pmap(abs, items, 3) == items


def test_config_roundtrip(tmp_path):
    cfg = small(seed=7, format="json")
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    back = RunConfig.load(path)
    assert back.to_dict() == cfg.to_dict()
    assert back.spec == cfg.spec


@pytest.mark.parametrize(
    "kw",
    [dict(r_grid=[0.5, 0.4]), dict(r_grid=[0.0, 0.5]), dict(t3_r_grid=[]), dict(rays=0), dict(format="xml")],
)
def test_config_validation(kw):
    with pytest.raises(ValueError):
        small(**kw)


def test_config_unknown_key():
    with pytest.raises(ValueError):
        RunConfig.from_dict({"bogus": 1})


def test_ray_offset_is_seeded():
    a = small(random_ray_offset=True, seed=3).ray_points()
    b = small(random_ray_offset=True, seed=3).ray_points()
    c = small(random_ray_offset=True, seed=4).ray_points()
    assert (a == b).all() and not (a == c).all()
    assert small().ray_points()[0] == 1


def test_emit_single_record_csv(tmp_path):
    rec = VerificationRecord.compare("T1", "mono:1", "power:0.0", 0.5, 0.35, 0.53, 0.02, SPEC)
    path = emit_report([rec], tmp_path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == list(CSV_COLUMNS)
    assert len(rows) == 2
    assert rows[1][-1] == "true"
    assert json.loads((tmp_path / "report_summary.json").read_text())["summary"] == {"T1": {"pass": 1, "fail": 0}}


def test_emit_json_and_non_finite(tmp_path):
    rec = VerificationRecord.failed("T2", "mono:1", "power:0.0", 0.5, SPEC, "overflow")
    path = emit_report([rec], tmp_path, "json")
    data = json.loads(path.read_text())
    assert data["records"][0]["ratio"] == "nan"
    assert data["records"][0]["error"] == "overflow"


def test_emit_errors(tmp_path):
    with pytest.raises(ValueError):
        emit_report([], tmp_path)
    blocker = tmp_path / "file"
    blocker.write_text("x")
    rec = VerificationRecord.compare("T1", "f", "w", 0.5, 1, 1, 0.02, SPEC)
    with pytest.raises(OSError):
        emit_report([rec], blocker / "sub")


def test_run_verification_sorted_and_deterministic(tmp_path):
    cfg = small(corpus=["mono:1"], weights=["power:0"])
    a, ex_a = run_verification(cfg, workers=1)
    b, ex_b = run_verification(cfg, workers=2)
    pa = emit_report(a, tmp_path / "a", extras=ex_a)
    pb = emit_report(b, tmp_path / "b", extras=ex_b)
    assert pa.read_bytes() == pb.read_bytes()
    assert [r.sort_key() for r in a] == sorted(r.sort_key() for r in a)

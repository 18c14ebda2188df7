import dataclasses
import json

import pytest

from finalg.errors import InputError
from finalg.lattice import baker_instance
from finalg.scenarios import (
    SCENARIO_INDEX,
    SCENARIOS,
    Checks,
    format_reports,
    instance_chain_checks,
    run_all,
    run_scenario,
)

EXPECTED_IDS = [
    "thm-bds-positive",
    "thm-bds-optimal",
    "prop-propcon",
    "thm-pari",
    "prop-moregen",
    "thm-proprelb",
    "cor-dm",
    "lemma-rm",
    "prop-sch",
    "prop-edge",
    "rem-contol",
    "rem-lr",
    "rem-fv3",
    "rem-rem",
    "rem-majari",
    "thm-prl3",
    "rem-fact",
]


def test_registry_contents():
    assert [s.id for s in SCENARIOS] == EXPECTED_IDS
    assert set(SCENARIO_INDEX) == set(EXPECTED_IDS)
    for s in SCENARIOS:
        assert s.summary
        assert isinstance(s.grid(2), list)


def test_grids_nest_by_depth():
    for s in SCENARIOS:
        g2 = {tuple(sorted(p.items())) for p in s.grid(2)}
        g3 = {tuple(sorted(p.items())) for p in s.grid(3)}
        g4 = {tuple(sorted(p.items())) for p in s.grid(4)}
        assert g2 <= g3 <= g4


def test_unknown_scenario_rejected():
    with pytest.raises(InputError):
        run_scenario("no-such-scenario")


def test_bad_params_rejected():
    with pytest.raises(InputError):
        run_scenario("thm-bds-optimal", n=1, sig="b")
    with pytest.raises(InputError):
        run_scenario("thm-bds-optimal", n=2, sig="q")


@pytest.fixture(scope="module")
def all_reports():
    return run_all(2)


def test_run_all_level_two_passes(all_reports):
    assert all_reports
    failing = [r for r in all_reports if r.status != "pass"]
    assert failing == []


def test_reports_are_json_serializable(all_reports):
    for r in all_reports:
        d = r.to_dict()
        json.dumps(d)
        assert d["id"] in SCENARIO_INDEX
        assert d["status"] == "pass"
        assert d["elapsed_ms"] >= 0


def test_format_reports_summary_line(all_reports):
    text = format_reports(all_reports)
    lines = text.strip().splitlines()
    assert any("passed" in ln and "failed" in ln for ln in lines[-2:])
    for r in all_reports:
        assert r.id in text


def test_run_all_rejects_small_depth():
    with pytest.raises(InputError):
        run_all(1)


def test_deep_rows_resource_skip():
    report = run_scenario("prop-sch", n=4)
    assert report.status == "skipped(resource)"
    rows = report.details["checks"]
    assert rows and all(row.get("skipped") for row in rows)
    assert all("resource" in str(row["computed"]) for row in rows)


def test_chain_checks_detect_mutated_beta():
    inst = baker_instance(2, "b")
    ck = Checks()
    instance_chain_checks(inst, ck)
    assert ck.ok

    # swapping in a different genuine congruence keeps every congruence
    # re-assertion green but breaks the named chain links
    mutated = dataclasses.replace(inst, beta=inst.gamma)
    ck = Checks()
    instance_chain_checks(mutated, ck)
    assert not ck.ok
    bad = [row["name"] for row in ck.rows if not row["ok"]]
    assert any("link" in name for name in bad)

"""Acceptance gate: run the full verification battery once and assert every
claim at its shipped tolerance, printing one line per claim."""

import pytest

from cptsim import battery

CLAIM_IDS = [record.claim_id for record in battery.CLAIMS]


@pytest.fixture(scope="module")
def report(tmp_path_factory):
    out = tmp_path_factory.mktemp("battery")
    return battery.run_all(out, verbose=False)


@pytest.fixture(scope="module")
def by_id(report):
    return {record["id"]: record for record in report["claims"]}


@pytest.mark.parametrize("claim_id", CLAIM_IDS)
def test_claim(claim_id, by_id, capsys):
    record = by_id[claim_id]
    status = "PASS" if record["passed"] else "FAIL"
    with capsys.disabled():
        print(f"[{status}] {claim_id} {record['title']}: {record['measured']}")
    assert record["passed"], (
        f"{claim_id} failed: criterion {record['criterion']!r}, "
        f"measured {record['measured']}, error {record['error']}"
    )


def test_battery_runs_inside_time_budget(report):
    assert report["wall_time_s"] < 300.0


def test_every_acceptance_claim_present(by_id):
    assert sorted(by_id) == sorted(f"A{k}" for k in range(1, 12))

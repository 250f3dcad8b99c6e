import pytest

from gwcache import main
from gwcache.core.info import dsbs, joint_measures
from gwcache.services.report_service import ReportService

H_JOINT = joint_measures(dsbs(0.2)).h12


@pytest.fixture(scope="module")
def dsbs_sweep(tmp_path_factory):
    """Every curve for DSBS(0.2) on the 0.01 grid, with the shipped optimizer settings."""
    out = tmp_path_factory.mktemp("sweep") / "dsbs.csv"
    assert main(["sweep", "--p0", "0.2", "--grid", "0:1.73:0.01", "--out", str(out)]) == 0
    return ReportService().read_csv(out)


def test_full_sweep_has_every_grid_point(dsbs_sweep):
    """174 rows from 0 to H(X1,X2), every column filled."""
    assert len(dsbs_sweep) == 174
    assert dsbs_sweep[0]["M"] == 0.0
    assert dsbs_sweep[-1]["M"] == pytest.approx(H_JOINT, abs=1e-11)
    assert all(value is not None for row in dsbs_sweep for value in row.values())


def test_full_sweep_curves_are_ordered(dsbs_sweep):
    """R_lb <= R_lb_gw <= R_ub_gw <= min(R_tc, R_lfu_um) on every row."""
    for row in dsbs_sweep:
        assert row["R_lb"] <= row["R_lb_gw"] + 1e-9
        assert row["R_lb_gw"] <= row["R_ub_gw"] + 1e-9
        assert row["R_ub_gw"] <= min(row["R_tc"], row["R_lfu_um"]) + 1e-9


def test_full_sweep_end_points(dsbs_sweep):
    """Everything is sent at M = 0 and nothing at M = H(X1,X2)."""
    first, last = dsbs_sweep[0], dsbs_sweep[-1]
    assert first["R_lb"] == pytest.approx(H_JOINT, abs=1e-11)
    assert first["R_lfu_um"] == pytest.approx(H_JOINT, abs=1e-11)
    assert last["R_lb"] == pytest.approx(0.0, abs=1e-11)
    assert last["R_lfu_um"] == pytest.approx(0.0, abs=1e-11)


def test_full_sweep_upper_bound_meets_lower_bound_near_the_ends(dsbs_sweep):
    """The plane search closes the gap on [0, 0.25] and [1.23, H]."""
    for row in dsbs_sweep:
        if row["M"] <= 0.25 or row["M"] >= 1.23:
            assert row["R_ub_gw"] == pytest.approx(row["R_lb"], abs=1e-6)

import json

import pytest

from gwcache import main
from gwcache.commands import optimize as optimize_command
from gwcache.commands.utils import emit, parse_grid
from gwcache.config import Config
from gwcache.core.info import dsbs, joint_measures
from gwcache.errors import InfeasibleOptimizationError, ValidationError
from gwcache.schemas import validate_record
from gwcache.services.report_service import CSV_HEADER, ReportService
from gwcache.sim.coding import unpack_bitstring

# --- Constants for testing ---
P0 = "0.2"
FAST = ["--restarts", "2", "--seed", "0"]
H_JOINT = 1.0 + 0.7219280948873623


@pytest.fixture(autouse=True)
def short_searches(monkeypatch):
    """Keeps every optimizer call in these tests to a few dozen iterations."""
    monkeypatch.setattr(Config, "MAX_ITERS", 60)


def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


# --- grids ---

def test_parse_grid_snaps_last_point_to_joint_entropy():
    """0:1.73:0.01 on DSBS(0.2) gives 174 points, the last one H(X1,X2)."""
    points = parse_grid("0:1.73:0.01", H_JOINT)
    assert len(points) == 174
    assert points[-1] == H_JOINT
    assert points[-2] == 1.72


def test_parse_grid_rejects_points_far_past_joint_entropy():
    """Only the last point may overshoot, and by less than one step."""
    with pytest.raises(ValidationError) as excinfo:
        parse_grid("0:2.5:0.1", H_JOINT)
    assert "grid" in excinfo.value.errors


def test_parse_grid_rejects_malformed_text():
    """start:stop:step with a positive step."""
    with pytest.raises(ValidationError):
        parse_grid("0:1")
    with pytest.raises(ValidationError) as excinfo:
        parse_grid("0:1:0")
    assert "step" in excinfo.value.errors


# --- bounds / achievable ---

def test_bounds_at_unit_memory(capsys):
    """DSBS(0.2), M = 1: R_lb = 0.36096 with the third constraint active."""
    code, record = _run(capsys, ["bounds", "--p0", P0, "--memory", "1.0", *FAST])
    assert code == 0
    assert record["status"] == "success"
    assert record["R_lb"] == pytest.approx(0.36096, abs=1e-5)
    assert record["R_lb_active"] == 2
    assert record["R_lb_gw"] >= record["R_lb"] - 1e-9
    assert validate_record(record, "bounds") == {}


def test_achievable_writes_to_file(capsys, tmp_path):
    """--out writes the record instead of printing it."""
    path = tmp_path / "point.json"
    code = main(["achievable", "--p0", P0, "--memory", "0.25", "--out", str(path), *FAST])
    assert code == 0
    assert capsys.readouterr().out == ""
    record = json.loads(path.read_text())
    assert validate_record(record, "achievable") == {}
    assert record["R_ub_gw"] <= min(record["R_tc"], record["R_lfu_um"]) + 1e-9


def test_bounds_from_pmf_file(capsys, tmp_path):
    """A pmf file is read, validated and used."""
    path = tmp_path / "pmf.json"
    path.write_text(json.dumps({"n1": 2, "n2": 2, "p": [[0.4, 0.1], [0.1, 0.4]]}))
    code, record = _run(capsys, ["bounds", "--pmf", str(path), "--memory", "0.0", *FAST])
    assert code == 0
    assert record["source"]["family"] == "pmf"
    assert record["R_lb"] == pytest.approx(joint_measures(dsbs(0.2)).h12, abs=1e-12)


# --- sweep ---

def test_sweep_writes_reproducible_csv(tmp_path):
    """Header plus 174 rows ending at H, identical bytes on a rerun."""
    first = tmp_path / "first.csv"
    second = tmp_path / "second.csv"
    argv = ["sweep", "--p0", P0, "--grid", "0:1.73:0.01", "--curves", "lb,tc,lfu_um"]
    assert main([*argv, "--out", str(first)]) == 0
    assert main([*argv, "--out", str(second)]) == 0

    lines = first.read_text().splitlines()
    assert len(lines) == 175
    assert lines[0] == ",".join(CSV_HEADER)
    assert first.read_bytes() == second.read_bytes()

    rows = ReportService().read_csv(first)
    assert rows[-1]["M"] == pytest.approx(H_JOINT, abs=1e-11)
    assert rows[0]["R_lb"] == pytest.approx(H_JOINT, abs=1e-11)
    assert all(row["R_lb_gw"] is None and row["R_ub_gw"] is None for row in rows)


def test_sweep_all_curves_are_ordered(tmp_path):
    """R_lb <= R_lb_gw <= R_ub_gw <= min(R_tc, R_lfu_um) on every row, with a chart."""
    out = tmp_path / "sweep.csv"
    svg = tmp_path / "sweep.svg"
    code = main(["sweep", "--p0", P0, "--grid", "0:1.72:0.43", "--out", str(out), "--svg", str(svg), *FAST])
    assert code == 0
    rows = ReportService().read_csv(out)
    assert len(rows) == 5
    for row in rows:
        assert row["R_lb"] <= row["R_lb_gw"] + 1e-9
        assert row["R_lb_gw"] <= row["R_ub_gw"] + 1e-9
        assert row["R_ub_gw"] <= min(row["R_tc"], row["R_lfu_um"]) + 1e-9
    assert "<svg" in svg.read_text()


def test_sweep_leaves_tc_blank_for_unequal_entropies(tmp_path):
    """TC needs H(X1) = H(X2); otherwise the column stays empty."""
    out = tmp_path / "sweep.csv"
    code = main(["sweep", "--shared", "0.5:0.5:0.1", "--grid", "0:1:0.5", "--curves", "lb,tc", "--out", str(out)])
    assert code == 0
    rows = ReportService().read_csv(out)
    assert all(row["R_tc"] is None for row in rows)
    assert all(row["R_lb"] is not None for row in rows)


def test_sweep_rejects_unknown_curve(capsys, tmp_path):
    """Curve names are checked before any work."""
    code, record = _run(capsys, ["sweep", "--p0", P0, "--grid", "0:1:0.5", "--curves", "lb,xyz", "--out", str(tmp_path / "x.csv")])
    assert code == 2
    assert "curves" in record["errors"]


# --- optimize ---

def test_optimize_m1_independent_bits(capsys):
    """Independent fair bits give M1 = 1/2."""
    code, record = _run(capsys, ["optimize", "m1", "--p0", "0.5", *FAST])
    assert code == 0
    assert record["value"] == pytest.approx(0.5, abs=1e-6)
    assert record["mode"] == "markov"
    assert len(record["trace"]) == 2
    assert validate_record(record, "optimize") == {}


def test_optimize_ub_gw_on_dsbs_uses_plane(capsys):
    """The DSBS achievable rate comes from the plane search."""
    code, record = _run(capsys, ["optimize", "ub_gw", "--p0", P0, "--memory", "0.5", *FAST])
    assert code == 0
    assert record["mode"] == "plane"
    assert record["trace"] == []


def test_optimize_memory_objective_needs_memory(capsys):
    """lb_gw without --memory is a validation error."""
    code, record = _run(capsys, ["optimize", "lb_gw", "--p0", P0, *FAST])
    assert code == 2
    assert record["status"] == "error"
    assert "memory" in record["errors"]
    assert validate_record(record, "error") == {}


def test_infeasible_optimization_exits_with_three(capsys, monkeypatch):
    """InfeasibleOptimizationError maps to exit code 3."""

    def infeasible(*args, **kwargs):
        raise InfeasibleOptimizationError("No auxiliary satisfied the constraints.")

    monkeypatch.setattr(optimize_command, "optimize_record", infeasible)
    code, record = _run(capsys, ["optimize", "m1", "--p0", P0])
    assert code == 3
    assert record["message"] == "No auxiliary satisfied the constraints."


# --- validation failures ---

def test_negative_memory_exits_with_two(capsys):
    """M < 0 is refused."""
    code, record = _run(capsys, ["bounds", "--p0", P0, "--memory", "-0.5", *FAST])
    assert code == 2
    assert "M" in record["errors"]


def test_unreadable_pmf_exits_with_two(capsys, tmp_path):
    """A missing pmf file is reported, not raised."""
    code, record = _run(capsys, ["bounds", "--pmf", str(tmp_path / "missing.json"), "--memory", "0.5"])
    assert code == 2
    assert record["errors"] == {"pmf": "unreadable file"}


def test_invalid_pmf_exits_with_two(capsys, tmp_path):
    """A pmf that does not sum to one is refused."""
    path = tmp_path / "pmf.json"
    path.write_text(json.dumps({"n1": 2, "n2": 2, "p": [[0.5, 0.5], [0.5, 0.5]]}))
    code, record = _run(capsys, ["bounds", "--pmf", str(path), "--memory", "0.5"])
    assert code == 2
    assert record["status"] == "error"


def test_out_of_range_dsbs_parameter_exits_with_two(capsys):
    """p0 must lie in [0, 1/2]."""
    code, _ = _run(capsys, ["bounds", "--p0", "0.7", "--memory", "0.5"])
    assert code == 2


def test_oversized_auxiliary_alphabet_exits_with_two(capsys):
    """--nu above |X1||X2| + 2 is refused."""
    code, record = _run(capsys, ["bounds", "--p0", P0, "--memory", "0.5", "--nu", "7", *FAST])
    assert code == 2
    assert "nu" in record["errors"]


def test_missing_source_is_an_argument_error():
    """argparse stops on a missing source flag."""
    with pytest.raises(SystemExit) as excinfo:
        main(["bounds", "--memory", "0.5"])
    assert excinfo.value.code == 2


# --- simulate ---

def test_simulate_shared_source(capsys, tmp_path):
    """A fair shared-component run decodes everywhere and dumps its codewords."""
    dump = tmp_path / "run.bin"
    code, record = _run(capsys, [
        "simulate", "--shared", "0.5:0.5:0.5", "--grid", "0:3:0.5",
        "--n", "1000", "--seed", "1", "--dump", str(dump),
    ])
    assert code == 0
    assert record["success"] is True
    assert len(record["points"]) == 7
    assert record["max_deviation"] <= 2 / 1000 + 1e-12
    assert validate_record(record, "simulate") == {}

    data = dump.read_bytes()
    offset = 0
    count = 0
    while offset < len(data):
        _, offset = unpack_bitstring(data, offset)
        count += 1
    assert count == 7 * 4


def test_simulate_memory_beyond_range_exits_with_two(capsys):
    """M above R0 + 2 rho of the realized descriptions is refused."""
    code, record = _run(capsys, ["simulate", "--shared", "0.5:0.5:0.5", "--memory", "5", "--n", "100"])
    assert code == 2
    assert "M" in record["errors"]


def test_simulate_needs_memory_or_grid(capsys):
    """Exactly one of --memory and --grid."""
    code, _ = _run(capsys, ["simulate", "--p0", P0, "--n", "100"])
    assert code == 2


def test_simulate_exhaustive(capsys):
    """The exhaustive oracle runs from the command line."""
    code, record = _run(capsys, ["simulate", "--exhaustive", "--n", "2"])
    assert code == 0
    assert record["exhaustive"]["passed"] is True
    assert record["exhaustive"]["checked"] == 64 * 7 * 4
    assert validate_record(record, "simulate") == {}


# --- output records ---

def test_emit_refuses_record_outside_its_schema(capsys, tmp_path):
    """A record missing required fields is an error and nothing is written."""
    path = tmp_path / "bounds.json"
    with pytest.raises(ValidationError) as excinfo:
        emit({"source": {"family": "dsbs", "p0": 0.2}, "M": 0.5}, "bounds", str(path))
    assert "R_lb" in excinfo.value.errors
    assert not path.exists()
    assert capsys.readouterr().out == ""


def test_emit_writes_valid_record(capsys):
    """A valid record gets the success status and goes to stdout."""
    record = emit({"n1": 1, "n2": 1, "p": [[1.0]]}, "pmf")
    assert record["status"] == "success"
    assert json.loads(capsys.readouterr().out) == record

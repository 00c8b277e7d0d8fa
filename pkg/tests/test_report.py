import numpy as np
import pytest

from hop.errors import InvalidArgumentError
from hop.estimator import load_replay_csv, run_replay
from hop.model import load_default_model
from hop.report import parse_log, write_replay_report, write_run_report
from hop.sim import Scenario, run_scenario

PNG_MAGIC = b"\x89PNG\r\n"


def test_parse_log_columns():
    text = "# rng=x seed=1 scenario=y\na,b,c\n1.0,2.0,3.0\n4.0,5.0,6.0\n"
    cols = parse_log(text)
    assert set(cols) == {"a", "b", "c"}
    assert np.array_equal(cols["b"], [2.0, 5.0])


def test_parse_log_rejects_empty_and_ragged():
    with pytest.raises(InvalidArgumentError):
        parse_log("# only a comment\n")
    with pytest.raises(InvalidArgumentError):
        parse_log("a,b\n1.0\n")


def test_run_report_writes_figures(tmp_path):
    scenario = Scenario(name="short", seed=5, duration=0.5)
    run = run_scenario(scenario, load_default_model())
    written = write_run_report(run.text, tmp_path, "short")
    assert [p.name for p in written] == ["short_attitude.png", "short_joints.png"]
    for p in written:
        assert p.read_bytes().startswith(PNG_MAGIC)


def test_replay_report(tmp_path):
    from hop.config import default_config

    samples = load_replay_csv(default_config().model_path.parent / "replay_sample.csv")
    rows = run_replay(samples)
    written = write_replay_report(rows, tmp_path, "replay")
    assert written[0].name == "replay_attitude.png"
    assert written[0].read_bytes().startswith(PNG_MAGIC)

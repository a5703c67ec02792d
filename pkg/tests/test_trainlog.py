"""CSV train logs: formatting, rerun byte-identity, wall-clock stripping."""

import pytest

from flashsr.trainlog import TrainLogger, strip_wall_clock


def test_header_and_rows(tmp_path):
    p = tmp_path / "t.csv"
    log = TrainLogger(p, ["step", "loss", "wall_s"])
    log.row(step=0, loss=0.5)
    log.row(step=1, loss=0.25)
    lines = p.read_text().splitlines()
    assert lines[0] == "step,loss,wall_s"
    assert lines[1].startswith("0,5.00000000e-01,")
    assert lines[2].startswith("1,2.50000000e-01,")
    assert len(lines) == 3


def test_wall_s_mandatory(tmp_path):
    with pytest.raises(ValueError):
        TrainLogger(tmp_path / "x.csv", ["step", "loss"])
    with pytest.raises(ValueError):
        TrainLogger(tmp_path / "y.csv", [])


def test_column_set_enforced(tmp_path):
    log = TrainLogger(tmp_path / "t.csv", ["step", "loss", "wall_s"])
    with pytest.raises(ValueError):
        log.row(step=0)
    with pytest.raises(ValueError):
        log.row(step=0, loss=1.0, extra=2.0)


def test_rerun_identical_modulo_wall(tmp_path):
    def run(path):
        log = TrainLogger(path, ["step", "loss", "wall_s"])
        for i in range(5):
            log.row(step=i, loss=1.0 / (i + 1))

    run(tmp_path / "a.csv")
    run(tmp_path / "b.csv")
    assert strip_wall_clock(tmp_path / "a.csv") == strip_wall_clock(tmp_path / "b.csv")
    # raw files differ only in the wall column (same shape)
    a = (tmp_path / "a.csv").read_text().splitlines()
    b = (tmp_path / "b.csv").read_text().splitlines()
    assert len(a) == len(b)


def test_strip_wall_clock_drops_last_column(tmp_path):
    p = tmp_path / "t.csv"
    log = TrainLogger(p, ["step", "wall_s"])
    log.row(step=3)
    stripped = strip_wall_clock(p)
    assert stripped == "step\n3"


def test_float_formatting_deterministic(tmp_path):
    p = tmp_path / "f.csv"
    log = TrainLogger(p, ["x", "wall_s"])
    log.row(x=0.1 + 0.2)  # formats to fixed precision, no repr noise
    cell = p.read_text().splitlines()[1].split(",")[0]
    assert cell == "3.00000000e-01"

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from greedycover import instances
from greedycover.io import (
    InstanceFormatError,
    dumps,
    points_to_csv,
    read_points,
    read_sidecar,
    write_instance,
    write_points,
)
from greedycover.trace import MEB_COLUMNS, ConvergenceTrace, Status


@settings(max_examples=30)
@given(arrays(float, st.tuples(st.integers(1, 20), st.integers(1, 6)), elements=st.floats(allow_nan=False, allow_infinity=False)))
def test_points_round_trip_exactly(tmp_path_factory, pts):
    path = tmp_path_factory.mktemp("io") / "pts.csv"
    write_points(path, pts)
    back = read_points(path)
    assert np.array_equal(back, pts)
    assert points_to_csv(back) == path.read_text()


@pytest.mark.parametrize(
    "text, message",
    [
        ("1,2\n3,x\n", "row 2: non-numeric"),
        ("1,2\n3,4,5\n", "row 2: expected 2 columns"),
        ("1,nan\n", "row 1: non-finite"),
        ("\n\n", "no points"),
    ],
)
def test_malformed_points_name_the_row(tmp_path, text, message):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(InstanceFormatError, match=message):
        read_points(path)


def test_blank_lines_are_skipped(tmp_path):
    path = tmp_path / "pts.csv"
    path.write_text("1,2\n\n3,4\n")
    assert read_points(path).shape == (2, 2)


def test_instance_sidecar(tmp_path):
    inst = instances.box(20, 3, seed=4)
    side = write_instance(tmp_path / "box.csv", inst)
    meta = read_sidecar(tmp_path / "box.csv")
    assert side.name == "box.json"
    assert meta["kind"] == "box" and meta["n"] == 20 and meta["dim"] == 3 and meta["seed"] == 4
    assert meta["planted"] == inst.planted
    assert read_sidecar(tmp_path / "missing.csv") is None


def test_dumps_is_sorted_and_handles_numpy():
    text = dumps({"b": np.float64(1.5), "a": np.arange(2), "s": Status.COVERED, "x": math.inf, "f": np.bool_(True)})
    assert text.index('"a"') < text.index('"b"')
    assert '"Covered"' in text and '"inf"' in text and "true" in text


def test_trace_csv():
    trace = ConvergenceTrace(MEB_COLUMNS)
    trace.add(iteration=1, violator_index=4, move_length=0.1, max_violation=0.30000000000000004)
    lines = trace.to_csv().splitlines()
    assert lines[0] == ",".join(MEB_COLUMNS)
    assert lines[1] == "1,4,0.1,0.30000000000000004"
    assert trace.column("violator_index") == [4]
    with pytest.raises(KeyError):
        trace.add(iteration=2, bogus=1)


def test_status_text():
    assert str(Status.CAP_EXCEEDED) == "CapExceeded"

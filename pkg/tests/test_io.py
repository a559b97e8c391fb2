import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from specdisc import io


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_round_trips(x):
    assert float(io.fmt(x)) == x


def test_fmt_rejects_nonfinite():
    with pytest.raises(ValueError):
        io.fmt(math.inf)


def test_dumps_is_deterministic_and_ordered():
    obj = {"b": np.float64(0.1), "a": [np.int64(3), True, None, "s"], "z": io.cplx(1 - 2j)}
    text = io.dumps(obj)
    assert text == io.dumps(obj)
    assert text.index('"b"') < text.index('"a"')
    assert '0.10000000000000001' in text


def test_json_round_trip(tmp_path):
    obj = {"x": [1.5, -2.25e-300], "n": 7}
    p = tmp_path / "o.json"
    io.write_json(p, obj)
    assert io.read_json(p) == obj


def test_pgm_round_trip(tmp_path):
    img = (np.arange(30 * 20) % 256).astype(np.uint8).reshape(20, 30)
    img[0, 0] = 10  # a byte that looks like whitespace must survive
    p = tmp_path / "r.pgm"
    io.write_pgm(p, img)
    assert p.read_bytes().startswith(b"P5")
    assert np.array_equal(io.read_pgm(p), img)


def test_csv_rows(tmp_path):
    p = tmp_path / "t.csv"
    io.write_csv_rows(p, ["j", "re"], [[0, 0.5], [1, 1 / 3]])
    lines = p.read_text().splitlines()
    assert lines[0] == "j,re"
    assert float(lines[2].split(",")[1]) == 1 / 3

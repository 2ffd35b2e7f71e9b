import io
import json
import math
from fractions import Fraction

import numpy as np
import pytest

from rwpcorr import csvio
from rwpcorr.mobility import LatticeConfig, kernel_tau1, steady_state
from rwpcorr.simulation import SimConfig, SimEstimate


@pytest.mark.parametrize("value, digits, text", [
    (0.0, 10, "0"), (-0.0, 10, "0"), (float("nan"), 10, "nan"), (True, 10, "1"), (np.int64(7), 10, "7"),
    (1 / 3, 4, "0.3333"), (Fraction(1, 4), 10, "0.25"), (np.float32(0.5), 10, "0.5"), ("rho", 10, "rho"),
    (1.23456789e-20, 3, "1.23e-20"),
])
def test_format_value(value, digits, text):
    assert csvio.format_value(value, digits) == text


def test_round_trip(tmp_path):
    table = csvio.steady_state_table(steady_state(LatticeConfig(6, 2)))
    path = tmp_path / "sub" / "ss.csv"
    csvio.write_table(table, path, csvio.KERNEL_DIGITS)
    back = csvio.read_table(path)
    assert back.columns == ("n", "f")
    np.testing.assert_allclose([r[1] for r in back.rows], [r[1] for r in table.rows], rtol=1e-11)
    first = path.read_bytes()
    csvio.write_table(table, path, csvio.KERNEL_DIGITS)
    assert path.read_bytes() == first


def test_stream_output_is_plain_csv():
    buf = io.StringIO()
    csvio.write_table(csvio.Table("t", ("a", "b"), [[1, 0.5], [2, 0.25]]), buf)
    assert buf.getvalue() == "a,b\n1,0.5\n2,0.25\n"


def test_kernel_table_cells_stay_on_lattice():
    k = kernel_tau1(LatticeConfig(5, 1))
    rows = csvio.kernel_table(k).rows
    assert all(1 <= n + off <= 5 for n, off, _, _ in rows)
    assert len(rows) == 5 * 3 - 2
    totals = {}
    for n, _, _, p in rows:
        totals[n] = totals.get(n, 0) + p
    assert all(math.isclose(t, 1.0) for t in totals.values())


def test_estimate_rows():
    rows = csvio.estimate_rows("rho", [1.0, 2.0], [SimEstimate(0.1, 0.01, 5), SimEstimate(0.2, 0.02, 5)], 1)
    table = csvio.estimates_table(rows)
    assert table.columns == csvio.ESTIMATE_COLUMNS
    assert rows[1] == ["rho", 2.0, 1, 0.2, 0.02, 5]


def test_manifest_records_run(tmp_path):
    cfg = SimConfig(LatticeConfig(5, 1, v=Fraction(1, 2), N_d=2))
    data = csvio.manifest(7, cfg, {"figure": 3})
    assert data["seed"] == 7 and data["figure"] == 3
    assert data["config"]["lattice"]["v"] == "1/2"
    assert data["version"] != "" and data["timestamp"].endswith("+00:00")
    path = tmp_path / "m.json"
    csvio.write_manifest(data, path)
    assert json.loads(path.read_text()) == data

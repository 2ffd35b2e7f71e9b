"""CSV emission and run manifests.

Every table is plain CSV: comma separated, ``.`` decimal point, one header
row. Floats are written with a fixed number of significant digits so reruns
are byte-identical.
"""
from __future__ import annotations

import csv
import dataclasses
import datetime
import json
import math
from fractions import Fraction
from importlib import metadata
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

KERNEL_DIGITS = 12
STATS_DIGITS = 10


class Table(NamedTuple):
    """A named CSV table: column names plus rows of values."""

    name: str
    columns: tuple
    rows: list


def format_value(value, digits: int) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, Fraction):
        value = float(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if value == 0.0:
            return "0"
        return f"{value:.{digits}g}"
    return str(value)


def write_table(table: Table, dest, digits: int = STATS_DIGITS) -> None:
    """Write ``table`` to a path or an open text stream."""
    if hasattr(dest, "write"):
        _write(table, dest, digits)
        return
    path = Path(dest)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        _write(table, fh, digits)


def _write(table: Table, fh, digits: int) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([format_value(v, digits) for v in row])


def read_table(path) -> Table:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    return Table(Path(path).stem, tuple(rows[0]), [[float(v) for v in r] for r in rows[1:]])


def steady_state_table(ss) -> Table:
    return Table("steady_state", ("n", "f"),
                 [[n, float(f)] for n, f in zip(range(1, ss.n_points + 1), ss.f)])


def kernel_table(kernel, name: str = "kernel") -> Table:
    """Non-trivial cells of a displacement kernel, ``n,k,tau,prob``."""
    N = kernel.n_points
    rows = []
    n = np.arange(1, N + 1)
    cols = {k: kernel.column(k) for k in kernel.offsets()}
    for i in range(N):
        for k in kernel.offsets():
            if 1 <= n[i] + k <= N:
                rows.append([int(n[i]), k, kernel.tau, float(cols[k][i])])
    return Table(name, ("n", "k", "tau", "prob"), rows)


def oracle_table(chain, law) -> Table:
    return Table("oracle", ("n", "d", "r", "pi"),
                 [[int(n), int(d), int(r), float(p)] for n, d, r, p in
                  zip(chain.position, chain.destination, chain.remaining, law.pi)])


def interference_table(x_p, tau, mean, std, rho, rho_ppp) -> Table:
    rows = [[float(x), int(tau), float(m), float(s), float(r), float(rp)]
            for x, m, s, r, rp in zip(*(np.atleast_1d(v) for v in (x_p, mean, std, rho, rho_ppp)))]
    return Table("correlation", ("x_p", "tau", "mean", "std", "rho", "rho_ppp"), rows)


def outage_table(x_p, p_out, p_cond) -> Table:
    rows = [[float(x), float(p), float(c)] for x, p, c in
            zip(*(np.atleast_1d(v) for v in (x_p, p_out, p_cond)))]
    return Table("outage", ("x_p", "P_out", "P_out_cond_tau1"), rows)


ESTIMATE_COLUMNS = ("quantity", "x_p", "tau", "estimate", "stderr", "n_samples")


def estimate_rows(quantity: str, x_p: Sequence, estimates: Iterable, tau="") -> list:
    return [[quantity, float(x), tau, e.estimate, e.stderr, e.n_samples]
            for x, e in zip(x_p, estimates)]


def estimates_table(rows: list, name: str = "estimates") -> Table:
    return Table(name, ESTIMATE_COLUMNS, rows)


def package_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj) if obj.denominator != 1 else obj.numerator
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def manifest(seed: int, config, extra: dict = None) -> dict:
    """Run manifest: seed, full configuration, code version and a UTC timestamp."""
    out = {
        "seed": int(seed),
        "config": _jsonable(config),
        "version": package_version(),
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
    }
    if extra:
        out.update(_jsonable(extra))
    return out


def write_manifest(data: dict, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")

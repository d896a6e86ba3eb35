"""Dispatch a validated configuration and serialize the result table."""
from __future__ import annotations

import csv
import io
import itertools
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .. import __version__
from ..circuit import AnsatzSpec, build_ansatz
from ..errors import IoError, NumericError, ValidationError
from ..experiments import descent_curve, sweep_point
from ..projection import (
    LayerBudget,
    TwirlExperimentSpec,
    required_layers,
    run_twirl_experiment,
    theoretical_entropy,
)
from ..vqe import Mitigation
from .config import ExperimentConfig, build_noise, optimizer_config

THREADS_ENV = "DEPOLPROJ_THREADS"

COLUMNS = {
    "twirl-entropy": ("L", "seed", "S", "1-S/N", "S_theory"),
    "vqe-sweep": ("seed", "E_raw", "E_mitigated", "E_exact", "r", "purity"),
    "vqe-descent": ("iteration", "E_raw", "E_mitigated", "overlap"),
    "layer-budget": ("delta", "epsilon", "h_norm", "L"),
}


@dataclass
class ResultTable:
    """Column names, rows and the provenance written above the header."""

    columns: tuple
    rows: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)


def default_threads() -> int:
    """Thread count from ``DEPOLPROJ_THREADS``, or 1 when unset."""
    text = os.environ.get(THREADS_ENV, "").strip()
    if not text:
        return 1
    try:
        n = int(text)
    except ValueError:
        raise ValidationError(f"{THREADS_ENV} must be a positive integer, got {text!r}") from None
    if n < 1:
        raise ValidationError(f"{THREADS_ENV} must be a positive integer, got {n}")
    return n


def _parallel_map(fn: Callable, items: Sequence, threads: int) -> list:
    """Ordered map; the result does not depend on ``threads``."""
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _twirl_rows(cfg: ExperimentConfig, threads: int) -> list:
    t = cfg.section("twirl")
    n = t["n_qubits"]
    s_theory = theoretical_entropy(n)

    def one(k: int) -> list:
        seed = cfg.seed + k
        spec = TwirlExperimentSpec(n, t["layer_counts"], t["pauli"], t["mode"], t["trials"], seed)
        return [(r.L, seed, r.entropy, r.one_minus_s_over_n, s_theory) for r in run_twirl_experiment(spec)]

    return [row for rows in _parallel_map(one, range(t["seeds"]), threads) for row in rows]


def _sweep_rows(cfg: ExperimentConfig, threads: int) -> tuple[str, list]:
    v = cfg.section("vqe")
    n = v["n_qubits"]
    mitigation = Mitigation(v["mitigation"], v["shots"])
    opt = optimizer_config(cfg.section("optimizer"), cfg.seed)
    if v["sweep"] == "coupling":
        grid = [(x, v["depths"][0]) for x in v["couplings"]]
    else:
        grid = [(v["couplings"][0], depth) for depth in v["depths"]]
    tasks = list(itertools.product(range(len(grid)), range(v["seeds"])))

    def one(task) -> tuple:
        g, k = task
        x, depth = grid[g]
        n_layers = build_ansatz(AnsatzSpec(n, depth, v["entangler"])).n_layers
        noise = build_noise(cfg.section("noise"), n, n_layers)
        pt = sweep_point(n, x, depth, cfg.seed + k, noise, mitigation, opt, v["entangler"])
        key = x if v["sweep"] == "coupling" else depth
        return (key, pt.seed, pt.raw, pt.mitigated, pt.exact, pt.rate, pt.purity)

    label = "x" if v["sweep"] == "coupling" else "depth"
    return label, _parallel_map(one, tasks, threads)


def _descent_rows(cfg: ExperimentConfig) -> list:
    v = cfg.section("vqe")
    n = v["n_qubits"]
    n_layers = build_ansatz(AnsatzSpec(n, v["depth"], v["entangler"])).n_layers
    noise = build_noise(cfg.section("noise"), n, n_layers)
    rows = descent_curve(
        n,
        v["coupling"],
        v["depth"],
        noise,
        Mitigation(v["mitigation"], v["shots"]),
        optimizer_config(cfg.section("optimizer"), cfg.seed),
        v["rescale"],
        v["entangler"],
    )
    return [tuple(r) for r in rows]


def _budget_rows(cfg: ExperimentConfig) -> list:
    b = cfg.section("budget")
    rows = []
    for delta, eps, h in itertools.product(b["delta"], b["epsilon"], b["h_norm"]):
        rows.append((delta, eps, h, required_layers(LayerBudget(delta, eps, h))))
    return rows


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> ResultTable:
    """Run the configured experiment and collect its rows.

    Rows come out in a fixed order (seed-major for twirl-entropy, grid-point
    major for vqe-sweep) whatever the thread count.

    Raises
    ------
    NumericError
        If any produced value is not finite.
    """
    threads = max(1, int(threads))
    columns = COLUMNS[cfg.kind]
    if cfg.kind == "twirl-entropy":
        rows = _twirl_rows(cfg, threads)
    elif cfg.kind == "vqe-sweep":
        label, rows = _sweep_rows(cfg, threads)
        columns = (label,) + columns
    elif cfg.kind == "vqe-descent":
        rows = _descent_rows(cfg)
    else:
        rows = _budget_rows(cfg)
    for row in rows:
        for value in row:
            if isinstance(value, float) and not math.isfinite(value):
                raise NumericError(f"non-finite value in output row {row}")
    provenance = {
        "artifact": f"depolproj {__version__}",
        "kind": cfg.kind,
        "config_hash": f"sha256:{cfg.config_hash}",
        "seed": str(cfg.seed),
    }
    return ResultTable(columns, rows, provenance)


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def render_table(table: ResultTable) -> str:
    buf = io.StringIO()
    for key, value in table.provenance.items():
        buf.write(f"# {key}: {value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def emit_table(table: ResultTable, path: str | os.PathLike | None) -> None:
    """Write the table as CSV to ``path``, or to standard output for ``None``/``-``.

    Raises
    ------
    IoError
        If the file cannot be written.
    """
    text = render_table(table)
    if path in (None, "", "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror or exc}") from exc


def read_table(path: str | os.PathLike) -> ResultTable:
    """Read a file written by :func:`emit_table`; numeric cells become floats or ints."""
    provenance = {}
    body = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("# "):
                key, _, value = line[2:].rstrip("\n").partition(": ")
                provenance[key] = value
            else:
                body.append(line)
    reader = csv.reader(body)
    columns = tuple(next(reader))
    rows = []
    for rec in reader:
        rows.append(tuple(_read_cell(c) for c in rec))
    return ResultTable(columns, rows, provenance)


def _read_cell(text: str):
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text

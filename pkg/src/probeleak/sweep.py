"""Deterministic experiment grids over (theta, lambda, shots).

Cell seeds are derived from the master seed and the cell's grid indices with
a fixed public mixing function (see seeding.py), so results are a pure
function of the configuration: the output file is byte-identical across
reruns and across any degree of execution parallelism. Law tables are built
once per (theta, lambda) column and shared across the shots axis.
"""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .decode import AccuracyReport, check_table_capacity, evaluate_accuracy, law_table
from .errors import InputError
from .laws import DEFAULT_ORDER, StepOrder
from .seeding import derive_seed

CSV_COLUMNS = (
    "theta", "lambda", "shots", "depth", "trials",
    "strict_acc", "wilson_hw", "perpos_acc_json", "cell_seed", "wall_ms",
)

INCOMPLETE_MARKER = "# INCOMPLETE"

_DECODERS = ("ml", "perpos")


@dataclass(frozen=True)
class SweepConfig:
    depth: int
    theta_grid: tuple[float, ...]
    lambda_grid: tuple[float, ...]
    shots_grid: tuple[int, ...]
    trials: int = 200
    master_seed: int = 0
    decoder: str = "ml"
    order: StepOrder = DEFAULT_ORDER
    out: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "theta_grid", tuple(float(t) for t in self.theta_grid))
        object.__setattr__(self, "lambda_grid", tuple(float(x) for x in self.lambda_grid))
        object.__setattr__(self, "shots_grid", tuple(int(n) for n in self.shots_grid))
        if not (self.theta_grid and self.lambda_grid and self.shots_grid):
            raise InputError("all sweep grids must be non-empty")
        if any(not 0.0 <= x <= 1.0 for x in self.lambda_grid):
            raise InputError("lambda grid values must be in [0, 1]")
        if any(n < 1 for n in self.shots_grid):
            raise InputError("shots grid values must be >= 1")
        if self.trials < 1:
            raise InputError("trials must be >= 1")
        if self.master_seed < 0:
            raise InputError("master_seed must be non-negative")
        if self.decoder not in _DECODERS:
            raise InputError(f"unknown decoder {self.decoder!r}; expected one of {_DECODERS}")
        check_table_capacity(self.depth)

    @property
    def n_cells(self) -> int:
        return len(self.theta_grid) * len(self.lambda_grid) * len(self.shots_grid)

    def cell_seed(self, theta_idx: int, lambda_idx: int, shots_idx: int) -> int:
        return derive_seed(self.master_seed, theta_idx, lambda_idx, shots_idx)

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "depth": self.depth,
            "theta_grid": list(self.theta_grid),
            "lambda_grid": list(self.lambda_grid),
            "shots_grid": list(self.shots_grid),
            "trials": self.trials,
            "master_seed": self.master_seed,
            "decoder": self.decoder,
            "order": self.order.value,
            "out": self.out,
        }

    @staticmethod
    def from_dict(data: dict) -> "SweepConfig":
        if not isinstance(data, dict):
            raise InputError("sweep config must be a JSON object")
        if data.get("schema_version") != 1:
            raise InputError(f"unsupported schema_version {data.get('schema_version')!r}")
        required = {"depth", "theta_grid", "lambda_grid", "shots_grid"}
        optional = {"schema_version", "trials", "master_seed", "decoder", "order", "out"}
        missing = required - set(data)
        if missing:
            raise InputError(f"sweep config missing fields: {sorted(missing)}")
        unknown = set(data) - required - optional
        if unknown:
            raise InputError(f"sweep config has unknown fields: {sorted(unknown)}")
        try:
            order = StepOrder(data.get("order", DEFAULT_ORDER.value))
        except ValueError:
            raise InputError(f"unknown step order {data.get('order')!r}") from None
        return SweepConfig(
            depth=int(data["depth"]),
            theta_grid=tuple(data["theta_grid"]),
            lambda_grid=tuple(data["lambda_grid"]),
            shots_grid=tuple(data["shots_grid"]),
            trials=int(data.get("trials", 200)),
            master_seed=int(data.get("master_seed", 0)),
            decoder=data.get("decoder", "ml"),
            order=order,
            out=data.get("out"),
        )


@dataclass(frozen=True)
class CellResult:
    theta: float
    lam: float
    shots: int
    depth: int
    trials: int
    strict_accuracy: float
    per_position_accuracy: tuple[float, ...]
    wilson_halfwidth: float
    cell_seed: int
    wall_ms: int = 0

    def to_row(self) -> list:
        return [
            repr(self.theta), repr(self.lam), self.shots, self.depth, self.trials,
            repr(self.strict_accuracy), repr(self.wilson_halfwidth),
            json.dumps(list(self.per_position_accuracy), separators=(",", ":")),
            self.cell_seed, self.wall_ms,
        ]

    @staticmethod
    def from_row(row: list[str]) -> "CellResult":
        if len(row) != len(CSV_COLUMNS):
            raise InputError(f"result row has {len(row)} fields, expected {len(CSV_COLUMNS)}")
        return CellResult(
            theta=float(row[0]),
            lam=float(row[1]),
            shots=int(row[2]),
            depth=int(row[3]),
            trials=int(row[4]),
            strict_accuracy=float(row[5]),
            wilson_halfwidth=float(row[6]),
            per_position_accuracy=tuple(json.loads(row[7])),
            cell_seed=int(row[8]),
            wall_ms=int(row[9]),
        )


def _evaluate_column(config: SweepConfig, ti: int, li: int, timings: bool) -> list[CellResult]:
    """All cells sharing one (theta, lambda): the law table is built once."""
    theta = config.theta_grid[ti]
    lam = config.lambda_grid[li]
    table = law_table(config.depth, theta, lam, config.order)
    out = []
    for si, shots in enumerate(config.shots_grid):
        start = time.perf_counter()
        seed = config.cell_seed(ti, li, si)
        report: AccuracyReport = evaluate_accuracy(
            config.depth, theta, lam, shots, config.trials, seed,
            decoder=config.decoder, order=config.order, table=table,
        )
        wall_ms = int(round((time.perf_counter() - start) * 1000)) if timings else 0
        out.append(CellResult(
            theta=theta, lam=lam, shots=shots, depth=config.depth,
            trials=config.trials, strict_accuracy=report.strict_accuracy,
            per_position_accuracy=report.per_position_accuracy,
            wilson_halfwidth=report.wilson_halfwidth,
            cell_seed=seed, wall_ms=wall_ms,
        ))
    return out


def _column_order(config: SweepConfig):
    for ti in range(len(config.theta_grid)):
        for li in range(len(config.lambda_grid)):
            yield ti, li


def run_sweep(
    config: SweepConfig,
    jobs: int = 1,
    timings: bool = False,
    _partial_sink: list | None = None,
) -> list[CellResult]:
    """Evaluate every grid cell; results come back in (theta, lambda, shots)
    lexicographic grid order regardless of scheduling.

    `timings` populates wall_ms with measured milliseconds; it is off by
    default so that result files stay byte-reproducible.
    """
    check_table_capacity(config.depth)  # fail fast before any cell runs
    columns = list(_column_order(config))
    done: dict[tuple[int, int], list[CellResult]] = {}
    if jobs <= 1:
        for ti, li in columns:
            done[(ti, li)] = _evaluate_column(config, ti, li, timings)
            if _partial_sink is not None:
                _partial_sink.extend(done[(ti, li)])
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {
                pool.submit(_evaluate_column, config, ti, li, timings): (ti, li)
                for ti, li in columns
            }
            for fut, key in futures.items():
                done[key] = fut.result()
                if _partial_sink is not None:
                    _partial_sink.extend(done[key])
    results = []
    for key in columns:
        results.extend(done[key])
    return results


def results_to_csv(results: list[CellResult], complete: bool = True) -> str:
    """Render results in the canonical CSV schema.

    An incomplete run is flagged with an explicit trailer marker so partial
    files are never mistaken for finished sweeps.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for cell in results:
        writer.writerow(cell.to_row())
    if not complete:
        buf.write(INCOMPLETE_MARKER + "\n")
    return buf.getvalue()


def parse_results_csv(text: str) -> list[CellResult]:
    lines = text.splitlines()
    if not lines:
        raise InputError("empty results file")
    if lines[-1].strip() == INCOMPLETE_MARKER:
        raise InputError("results file is flagged incomplete; rerun the sweep")
    rows = list(csv.reader(lines))
    if rows[0] != list(CSV_COLUMNS):
        raise InputError(f"unexpected CSV header {rows[0]!r}")
    return [CellResult.from_row(r) for r in rows[1:]]


def sidecar_dict(config: SweepConfig, complete: bool) -> dict:
    return {
        "schema_version": 1,
        "kind": "sweep_sidecar",
        "config": config.to_dict(),
        "complete": complete,
    }


def run_sweep_to_files(
    config: SweepConfig,
    csv_path: str,
    sidecar_path: str | None = None,
    jobs: int = 1,
    timings: bool = False,
) -> list[CellResult]:
    """Run a sweep and persist the CSV plus its config sidecar.

    If the run is interrupted, whatever columns completed are written with
    the incomplete trailer before the exception propagates.
    """
    if sidecar_path is None:
        sidecar_path = csv_path + ".json"
    partial: list[CellResult] = []
    try:
        results = run_sweep(config, jobs=jobs, timings=timings, _partial_sink=partial)
    except BaseException:
        ordered = sorted(partial, key=lambda c: (c.theta, c.lam, c.shots))
        with open(csv_path, "w") as fh:
            fh.write(results_to_csv(ordered, complete=False))
        with open(sidecar_path, "w") as fh:
            json.dump(sidecar_dict(config, complete=False), fh, indent=2)
            fh.write("\n")
        raise
    with open(csv_path, "w") as fh:
        fh.write(results_to_csv(results))
    with open(sidecar_path, "w") as fh:
        json.dump(sidecar_dict(config, complete=True), fh, indent=2)
        fh.write("\n")
    return results


def ridge_extract(results: list[CellResult], lam: float, shots: int) -> tuple[float, float]:
    """Theta maximizing strict accuracy in one (lambda, shots) slice.

    Ties go to the smaller theta.
    """
    slice_cells = [c for c in results if c.lam == lam and c.shots == shots]
    if not slice_cells:
        raise InputError(f"no cells match lambda={lam}, shots={shots}")
    best_theta, best_acc = None, -1.0
    for cell in sorted(slice_cells, key=lambda c: c.theta):
        if cell.strict_accuracy > best_acc:
            best_theta, best_acc = cell.theta, cell.strict_accuracy
    return best_theta, best_acc

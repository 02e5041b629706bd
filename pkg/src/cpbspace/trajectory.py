"""C-P-B trajectories: sampling, branch segmentation, relation checks and export."""

from __future__ import annotations

import csv
import json
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dynamics
from .quantifiers import CPBTriplet, cpb_triplet, validate_x_state

COLUMNS = (
    "t", "C", "P", "B", "R", "region", "B1", "B2",
    "u1", "u2", "u3", "rho_pp", "singlet_pop", "trace_err",
)
SCENARIOS = ("psi_lossy", "plus_lossy", "psi_perfect", "custom")
DEFAULT_SAMPLES = 4000
DEFAULT_T_MAX = 200.0


@dataclass(frozen=True)
class TrajectoryRecord:
    t: float
    triplet: CPBTriplet
    rho_pp: float
    singlet_pop: float
    trace_err: float

    def to_row(self) -> dict:
        tr = self.triplet
        return {
            "t": self.t, "C": tr.C, "P": tr.P, "B": tr.B, "R": tr.R, "region": int(tr.region),
            "B1": tr.B1, "B2": tr.B2, "u1": tr.u1, "u2": tr.u2, "u3": tr.u3,
            "rho_pp": self.rho_pp, "singlet_pop": self.singlet_pop, "trace_err": self.trace_err,
        }


@dataclass(frozen=True)
class Branch:
    """A maximal stretch of samples with B above the threshold."""

    index: int
    t_start: float
    t_end: float
    b_peak: float
    t_peak: float
    first_sample: int
    last_sample: int
    open_start: bool = False
    open_end: bool = False

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def default_grid(t_max: float = DEFAULT_T_MAX, samples: int = DEFAULT_SAMPLES) -> np.ndarray:
    return np.linspace(0.0, t_max, samples + 1)


def records_from_states(times, states) -> list[TrajectoryRecord]:
    records = []
    for t, rho in zip(times, states):
        rho = np.asarray(rho)
        trace_err = abs(float(np.trace(rho).real) - 1.0)
        s = validate_x_state(rho)
        records.append(
            TrajectoryRecord(
                t=float(t),
                triplet=cpb_triplet(s),
                rho_pp=dynamics.plus_population(rho),
                singlet_pop=dynamics.singlet_population(rho),
                trace_err=trace_err,
            )
        )
    return records


def sample_trajectory(scenario: str, params, t_grid=None, rho0=None) -> list[TrajectoryRecord]:
    """Evolve one of the named scenarios and quantify every grid point.

    ``psi_lossy``/``plus_lossy`` take SimParams, ``psi_perfect`` takes
    PerfectCavityParams, and ``custom`` needs an explicit 4x4 ``rho0``.
    """
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}; choose from {SCENARIOS}")
    if scenario == "custom":
        if rho0 is None:
            raise ValueError("scenario 'custom' needs rho0")
    else:
        want = dynamics.PerfectCavityParams if scenario == "psi_perfect" else dynamics.SimParams
        if not isinstance(params, want):
            raise TypeError(f"scenario {scenario!r} needs {want.__name__}")
        rho0 = dynamics.initial_density("plus" if scenario == "plus_lossy" else "psi")
    if t_grid is None:
        t_max = getattr(params, "t_max", None) or getattr(params, "period", DEFAULT_T_MAX)
        t_grid = default_grid(t_max)
    states = dynamics.evolve(rho0, params, t_grid)
    return records_from_states(t_grid, states)


def _column(records, name: str) -> np.ndarray:
    out = []
    for r in records:
        if isinstance(r, TrajectoryRecord):
            out.append(getattr(r.triplet, name) if hasattr(r.triplet, name) else getattr(r, name))
        elif isinstance(r, Mapping):
            out.append(r[name])
        else:
            out.append(getattr(r, name))
    return np.asarray(out, dtype=float)


def _crossing(t0, y0, t1, y1, level):
    if y1 == y0:
        return 0.5 * (t0 + t1)
    return t0 + (level - y0) / (y1 - y0) * (t1 - t0)


def detect_branches(records, threshold: float = 2.0) -> list[Branch]:
    """Maximal runs with B > threshold, crossing times linearly interpolated.

    A run touching either end of the series is flagged open on that side and
    its boundary time is the first/last sample time.
    """
    t = _column(records, "t")
    b = _column(records, "B")
    if t.size < 2:
        raise ValueError("need at least two records")
    above = b > threshold
    edges = np.diff(np.concatenate([[False], above, [False]]).astype(np.int8))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1) - 1
    branches = []
    for n, (i, j) in enumerate(zip(starts, ends), start=1):
        open_start = i == 0
        open_end = j == t.size - 1
        t_start = t[0] if open_start else _crossing(t[i - 1], b[i - 1], t[i], b[i], threshold)
        t_end = t[-1] if open_end else _crossing(t[j], b[j], t[j + 1], b[j + 1], threshold)
        k = i + int(np.argmax(b[i:j + 1]))
        branches.append(
            Branch(n, float(t_start), float(t_end), float(b[k]), float(t[k]),
                   int(i), int(j), bool(open_start), bool(open_end))
        )
    return branches


@dataclass(frozen=True)
class RelationReport:
    max_residual: float
    holds: bool
    n_samples: int


def closed_relation_residuals(records) -> np.ndarray:
    """|B^2/4 - P - C^2 + (1 - C)^2| per record."""
    c, p, b = _column(records, "C"), _column(records, "P"), _column(records, "B")
    return np.abs(b * b / 4.0 - p - c * c + (1.0 - c) ** 2)


def check_closed_relation(records, tol: float = 1e-8, min_rho_pp: float | None = None) -> RelationReport:
    """Test B^2/4 - P - C^2 = -(1 - C)^2, optionally only where rho_pp >= ``min_rho_pp``."""
    if len(records) == 0:
        raise ValueError("need at least one record")
    res = closed_relation_residuals(records)
    if min_rho_pp is not None:
        res = res[_column(records, "rho_pp") >= min_rho_pp]
    worst = float(res.max()) if res.size else 0.0
    return RelationReport(worst, worst <= tol, int(res.size))


def detect_ordering_inversions(records, eps: float = 1e-6, cap: int = 1000) -> list[tuple[int, int]]:
    """Index pairs (i, j) with C_i > C_j + eps but B_i < B_j - eps, first ``cap`` in row order."""
    c = _column(records, "C")
    b = _column(records, "B")
    if c.size < 2:
        raise ValueError("need at least two records")
    pairs: list[tuple[int, int]] = []
    for i in range(c.size):
        js = np.flatnonzero((c[i] > c + eps) & (b[i] < b - eps))
        pairs.extend((i, int(j)) for j in js[: cap - len(pairs)])
        if len(pairs) >= cap:
            break
    return pairs


# --- I/O ---------------------------------------------------------------------


def _rows(records) -> list[dict]:
    return [r.to_row() if isinstance(r, TrajectoryRecord) else dict(r) for r in records]


def _fmt(key: str, value) -> str:
    if key == "region":
        return str(int(value))
    return f"{float(value):.17g}"


def export_csv(records, path) -> Path:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(COLUMNS)
            for row in _rows(records):
                writer.writerow([_fmt(k, row[k]) for k in COLUMNS])
    except OSError as exc:
        raise OSError(f"cannot write trajectory CSV to {path}: {exc.strerror or exc}") from exc
    return path


def export_json(records, path) -> Path:
    path = Path(path)
    rows = [{k: (int(row[k]) if k == "region" else float(row[k])) for k in COLUMNS} for row in _rows(records)]
    try:
        path.write_text(json.dumps(rows, indent=1))
    except OSError as exc:
        raise OSError(f"cannot write trajectory JSON to {path}: {exc.strerror or exc}") from exc
    return path


def _parse_row(raw: Mapping) -> dict:
    missing = [k for k in COLUMNS if k not in raw]
    if missing:
        raise ValueError(f"missing columns {missing}")
    return {k: (int(raw[k]) if k == "region" else float(raw[k])) for k in COLUMNS}


def load_csv(path) -> list[dict]:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != COLUMNS:
            raise ValueError(f"{path}: header does not match {','.join(COLUMNS)}")
        return [_parse_row(row) for row in reader]


def load_json(path) -> list[dict]:
    path = Path(path)
    data = json.loads(path.read_text())
    if not isinstance(data, list):
        raise ValueError(f"{path}: expected a JSON array of records")
    return [_parse_row(row) for row in data]


def load_records(path) -> list[dict]:
    path = Path(path)
    return load_json(path) if path.suffix.lower() == ".json" else load_csv(path)


def identity_residuals(rows: Sequence) -> np.ndarray:
    """B^2/4 - P - C^2 - R, recomputed from stored columns."""
    c, p, b, r = (_column(rows, k) for k in ("C", "P", "B", "R"))
    return b * b / 4.0 - p - c * c - r


def export(records, path) -> Path:
    path = Path(path)
    return export_json(records, path) if path.suffix.lower() == ".json" else export_csv(records, path)


__all__ = [
    "Branch", "COLUMNS", "RelationReport", "SCENARIOS", "TrajectoryRecord",
    "check_closed_relation", "closed_relation_residuals", "default_grid",
    "detect_branches", "detect_ordering_inversions", "export", "export_csv",
    "export_json", "identity_residuals", "load_csv", "load_json", "load_records",
    "records_from_states", "sample_trajectory",
]


"""Experiment plans, replayable runs and rate sweeps.

CSV is the normative output. The first line is ``# plan_hash=<sha256>``,
followed by a header row and one row per trial in (entry, trial) order.
JSON output mirrors the same rows. Aggregates are always recomputed from
the rows.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import statistics
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .bounds import binary_entropy
from .noise import BernoulliLike, noise_generate, noise_q, parse_noise
from .scheme import SchemeConfig, run_session

ROW_FIELDS = (
    "entry", "trial", "seed", "B", "bits", "R_act", "r_emp", "rate_floor", "error",
    "floor_ok", "q", "n", "K", "epsilon", "metric", "noise", "noise_seed",
)
FORMATS = ("csv", "json")


class PlanError(ValueError):
    """Invalid experiment plan."""


@dataclass(frozen=True)
class PlanEntry:
    config: SchemeConfig
    noise: str  # spec string, see univmod.noise
    trials: int = 1

    def to_dict(self) -> dict:
        cfg = asdict(self.config)
        return {"config": cfg, "noise": self.noise, "trials": self.trials}

    @classmethod
    def from_dict(cls, obj: dict) -> "PlanEntry":
        return cls(SchemeConfig(**obj["config"]), obj["noise"], int(obj.get("trials", 1)))


@dataclass(frozen=True)
class ExperimentPlan:
    entries: tuple[PlanEntry, ...]
    out: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if not self.entries:
            raise PlanError("a plan needs at least one entry")
        if self.format not in FORMATS:
            raise PlanError(f"format must be one of {FORMATS}, got {self.format!r}")
        for e in self.entries:
            if e.trials < 1:
                raise PlanError(f"trials must be >= 1, got {e.trials}")
            spec = parse_noise(e.noise, e.config.q)
            if noise_q(spec) != e.config.q:
                raise PlanError(f"noise {e.noise!r} has q={noise_q(spec)}, config has q={e.config.q}")

    def to_dict(self) -> dict:
        # the output location is not part of what gets computed
        return {"entries": [e.to_dict() for e in self.entries], "format": self.format}

    @classmethod
    def from_dict(cls, obj: dict, out: str | None = None) -> "ExperimentPlan":
        return cls(tuple(PlanEntry.from_dict(e) for e in obj["entries"]), out or obj.get("out"),
                   obj.get("format", "csv"))

    @classmethod
    def load(cls, path) -> "ExperimentPlan":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path) -> None:
        atomic_write(path, json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @property
    def hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    def tasks(self) -> list[tuple[int, int, PlanEntry]]:
        return [(idx, t, e) for idx, e in enumerate(self.entries) for t in range(e.trials)]


@dataclass
class RunRecord:
    plan_hash: str
    rows: list[dict]
    aggregate: dict = field(default_factory=dict)

    def __post_init__(self):
        self.aggregate = aggregate_rows(self.rows)

    @property
    def floor_violations(self) -> int:
        return self.aggregate["floor_violations"]


def trial_seed(base_seed: int, entry: int, trial: int) -> int:
    ss = np.random.SeedSequence([base_seed & 0xFFFFFFFFFFFFFFFF, entry, trial])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def run_trial(task: tuple[int, int, PlanEntry]) -> dict:
    idx, trial, entry = task
    seed = trial_seed(entry.config.seed, idx, trial)
    config = SchemeConfig(**{**asdict(entry.config), "seed": seed})
    spec = parse_noise(entry.noise, config.q)
    noise_seed = spec.seed if spec.seed is not None else seed
    z = noise_generate(spec, config.n, noise_seed)
    log = run_session(config, z)
    return {
        "entry": idx,
        "trial": trial,
        "seed": seed,
        "B": log.B,
        "bits": log.bits,
        "R_act": log.R_act,
        "r_emp": log.r_emp,
        "rate_floor": log.rate_floor,
        "error": log.error,
        "floor_ok": log.floor_ok,
        "q": config.q,
        "n": config.n,
        "K": config.K,
        "epsilon": config.epsilon,
        "metric": config.metric,
        "noise": entry.noise,
        "noise_seed": noise_seed,
    }


def aggregate_rows(rows: list[dict]) -> dict:
    """Summary statistics, derived from the raw row values only."""
    if not rows:
        return {"trials": 0, "mean_R_act": math.nan, "median_R_act": math.nan,
                "error_rate": math.nan, "floor_violations": 0}
    rates = [float(r["R_act"]) for r in rows]
    errors = [_truthy(r["error"]) for r in rows]
    violations = sum(
        1 for r, err in zip(rows, errors)
        if not err and int(r["B"]) * int(r["K"]) / int(r["n"]) < float(r["rate_floor"])
    )
    return {
        "trials": len(rows),
        "mean_R_act": statistics.fmean(rates),
        "median_R_act": statistics.median(rates),
        "error_rate": sum(errors) / len(rows),
        "floor_violations": violations,
    }


def _truthy(v) -> bool:
    if isinstance(v, str):
        return v.strip().lower() in {"1", "true", "yes"}
    return bool(v)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render_csv(rows: list[dict], plan_hash: str, fields=ROW_FIELDS) -> str:
    buf = io.StringIO()
    buf.write(f"# plan_hash={plan_hash}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for r in rows:
        writer.writerow([_fmt(r[f]) for f in fields])
    return buf.getvalue()


def render_json(record: RunRecord, plan: dict | None = None) -> str:
    obj = {"plan_hash": record.plan_hash, "rows": record.rows, "aggregate": record.aggregate}
    if plan is not None:
        obj["plan"] = plan
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def read_csv(path) -> tuple[str, list[dict]]:
    """(plan_hash, rows as strings) from a file written by :func:`run_plan`."""
    with open(path) as fh:
        first = fh.readline()
        if not first.startswith("# plan_hash="):
            raise PlanError(f"{path} has no plan hash header")
        return first.strip().split("=", 1)[1], list(csv.DictReader(fh))


def atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_plan(plan: ExperimentPlan, jobs: int = 1) -> RunRecord:
    """Execute every trial, then write the output file (if any) atomically."""
    tasks = plan.tasks()
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run_trial, tasks))
    else:
        rows = [run_trial(t) for t in tasks]
    record = RunRecord(plan.hash, rows)
    if plan.out:
        text = render_csv(rows, plan.hash) if plan.format == "csv" else render_json(record, plan.to_dict())
        atomic_write(plan.out, text)
    return record


# ---------------------------------------------------------------------------
# sweeps


def capacity_reference(noise: str, q: int) -> float | None:
    """log2 q - H(P) for i.i.d. noise (1 - h_b(p) when q = 2), else None."""
    spec = parse_noise(noise, q)
    if not isinstance(spec, BernoulliLike):
        return None
    if spec.q == 2:
        return 1.0 - binary_entropy(spec.dist[1])
    return math.log2(spec.q) + sum(p * math.log2(p) for p in spec.dist if p > 0)


SWEEP_FIELDS = ("n", "trials", "median_R_act", "median_r_emp", "median_rate_floor",
                "error_rate", "p_hat", "capacity_ref")


def sweep_rates(q: int, noise_spec: str, n_grid, K: int, epsilon: float, trials: int = 3,
                seed: int = 0, jobs: int = 1) -> list[dict]:
    """Per-n medians of R_act, r_emp and the rate floor, with the i.i.d. capacity reference."""
    n_grid = [int(n) for n in n_grid]
    if not n_grid:
        raise PlanError("the n grid is empty")
    spec = parse_noise(noise_spec, q)
    entries = tuple(PlanEntry(SchemeConfig(n=n, q=q, K=K, epsilon=epsilon, seed=seed), noise_spec, trials)
                    for n in n_grid)
    record = run_plan(ExperimentPlan(entries), jobs=jobs)
    cap = capacity_reference(noise_spec, q)
    table = []
    for idx, n in enumerate(n_grid):
        rows = [r for r in record.rows if r["entry"] == idx]
        p_hat = []
        for r in rows:
            z = noise_generate(spec, n, r["noise_seed"])
            p_hat.append(float(np.count_nonzero(z.data)) / n)
        table.append({
            "n": n,
            "trials": len(rows),
            "median_R_act": statistics.median(r["R_act"] for r in rows),
            "median_r_emp": statistics.median(r["r_emp"] for r in rows),
            "median_rate_floor": statistics.median(r["rate_floor"] for r in rows),
            "error_rate": sum(r["error"] for r in rows) / len(rows),
            "p_hat": statistics.median(p_hat),
            "capacity_ref": "" if cap is None else cap,
        })
    return table


def sweep_csv(table: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_FIELDS)
    for r in table:
        writer.writerow([_fmt(r[f]) for f in SWEEP_FIELDS])
    return buf.getvalue()


"""Parameter sweeps over the asymmetry parameter lambda_b.

A sweep runs the same market config across a list of lambda_b values —
either stated explicitly or generated as (start, step, count) — holding
everything else fixed, including the seed and the bimap initial condition,
so that lambda_b is the only varying factor.  Each run is analyzed with the
standard bundle and condensed into one summary row; rows are ordered by
lambda_b regardless of execution order, and a failed run marks its own row
without aborting its siblings.

Runs are independent, so they may execute in separate processes up to
`parallel_runs`; results are aggregated deterministically afterwards.
"""

from __future__ import annotations

import csv
import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .dynamics import CHAOTIC_LAMBDA_MAX, CHAOTIC_LAMBDA_MIN, BimapParams
from .market import MarketConfig, run_simulation
from .stats import analyze_output

SUMMARY_COLUMNS = ("lambda_b", "gini", "exponential_r2", "power_law_r2",
                   "passive_count", "never_loser_count", "richest_share",
                   "error")


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: a base config plus the lambda_b axis.

    Exactly one of `lambda_b_values` (explicit list) or the
    (`lambda_b_start`, `lambda_b_step`, `lambda_b_count`) triple must be
    given.  `output_dir`, when set, receives one artifact directory per run
    plus sweep_summary.csv.
    """

    base_config: MarketConfig
    lambda_b_values: tuple[float, ...] | None = None
    lambda_b_start: float | None = None
    lambda_b_step: float | None = None
    lambda_b_count: int | None = None
    output_dir: Path | None = None
    parallel_runs: int = 1

    def __post_init__(self):
        explicit = self.lambda_b_values is not None
        ranged = (self.lambda_b_start is not None
                  or self.lambda_b_step is not None
                  or self.lambda_b_count is not None)
        if explicit == ranged:
            raise ValueError("give either lambda_b_values or the "
                             "(start, step, count) range, not both")
        if explicit:
            values = tuple(float(v) for v in self.lambda_b_values)
        else:
            if (self.lambda_b_start is None or self.lambda_b_step is None
                    or self.lambda_b_count is None):
                raise ValueError("lambda_b range needs start, step, and count")
            if int(self.lambda_b_count) < 1:
                raise ValueError(
                    f"lambda_b_count must be >= 1: got {self.lambda_b_count}")
            start = float(self.lambda_b_start)
            step = float(self.lambda_b_step)
            values = tuple(start + k * step
                           for k in range(int(self.lambda_b_count)))
        if len(values) == 0:
            raise ValueError("sweep needs at least one lambda_b value")
        for v in values:
            if not CHAOTIC_LAMBDA_MIN <= v <= CHAOTIC_LAMBDA_MAX:
                raise ValueError(
                    f"lambda_b={v!r} outside the chaotic window "
                    f"[{CHAOTIC_LAMBDA_MIN}, {CHAOTIC_LAMBDA_MAX}]")
        object.__setattr__(self, "_values", values)
        if self.output_dir is not None:
            object.__setattr__(self, "output_dir", Path(self.output_dir))
        if int(self.parallel_runs) < 1:
            raise ValueError(
                f"parallel_runs must be >= 1: got {self.parallel_runs}")
        object.__setattr__(self, "parallel_runs", int(self.parallel_runs))

    @property
    def values(self) -> tuple[float, ...]:
        """The resolved lambda_b axis, in the order given."""
        return self._values  # type: ignore[attr-defined]


def expand_sweep(spec: SweepSpec) -> list[MarketConfig]:
    """One config per lambda_b, identical otherwise (same seed, same IC)."""
    base = spec.base_config
    return [
        dataclasses.replace(
            base,
            bimap_params=BimapParams(base.bimap_params.lambda_a, value))
        for value in spec.values
    ]


@dataclass(frozen=True)
class SweepRow:
    """Summary of one sweep run; metric fields are None when it failed."""

    lambda_b: float
    gini: float | None
    exponential_r2: float | None
    power_law_r2: float | None
    passive_count: int | None
    never_loser_count: int | None
    richest_share: float | None
    error: str = ""


@dataclass(frozen=True)
class SweepSummary:
    """All rows of a sweep, ordered by lambda_b ascending."""

    rows: tuple[SweepRow, ...]

    def __len__(self) -> int:
        return len(self.rows)


def _execute_run(payload: tuple[MarketConfig, str | None]) -> SweepRow:
    """Run one sweep config, optionally writing its artifact directory.

    Top-level so that process pools can pickle it; any failure is folded
    into the returned row instead of propagating.
    """
    from .artifacts import write_run_artifacts

    config, run_dir = payload
    lambda_b = config.bimap_params.lambda_b
    try:
        output = run_simulation(config)
        analysis = analyze_output(output)
        if run_dir is not None:
            write_run_artifacts(Path(run_dir), output, analysis)
        return SweepRow(
            lambda_b=lambda_b,
            gini=analysis.gini,
            exponential_r2=(analysis.exponential_fit.r_squared
                            if analysis.exponential_fit else None),
            power_law_r2=(analysis.power_law_fit.r_squared
                          if analysis.power_law_fit else None),
            passive_count=len(analysis.passive_agents),
            never_loser_count=len(analysis.never_losers),
            richest_share=analysis.richest_share)
    except Exception as err:  # noqa: BLE001 — isolate per-row failures
        return SweepRow(lambda_b=lambda_b, gini=None, exponential_r2=None,
                        power_law_r2=None, passive_count=None,
                        never_loser_count=None, richest_share=None,
                        error=f"{type(err).__name__}: {err}")


def run_sweep(spec: SweepSpec) -> SweepSummary:
    """Execute every config of the sweep and aggregate the summary.

    Deterministic for a fixed spec: the same rows and, when `output_dir` is
    set, the same files.  Individual run failures are recorded in their row
    and do not abort the sweep.
    """
    configs = expand_sweep(spec)
    payloads: list[tuple[MarketConfig, str | None]] = []
    for k, config in enumerate(configs):
        if spec.output_dir is None:
            run_dir = None
        else:
            run_dir = str(spec.output_dir /
                          f"run_{k:03d}_lb_{config.bimap_params.lambda_b:.7f}")
        payloads.append((config, run_dir))

    if spec.parallel_runs == 1 or len(payloads) == 1:
        rows = [_execute_run(p) for p in payloads]
    else:
        workers = min(spec.parallel_runs, len(payloads))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_execute_run, payloads))

    rows.sort(key=lambda row: row.lambda_b)
    summary = SweepSummary(rows=tuple(rows))
    if spec.output_dir is not None:
        spec.output_dir.mkdir(parents=True, exist_ok=True)
        write_sweep_summary(spec.output_dir / "sweep_summary.csv", summary)
    return summary


def write_sweep_summary(path: Path, summary: SweepSummary) -> None:
    """Write sweep_summary.csv, one row per lambda_b."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for row in summary.rows:
            writer.writerow([
                repr(row.lambda_b),
                "" if row.gini is None else repr(row.gini),
                "" if row.exponential_r2 is None else repr(row.exponential_r2),
                "" if row.power_law_r2 is None else repr(row.power_law_r2),
                "" if row.passive_count is None else row.passive_count,
                "" if row.never_loser_count is None else row.never_loser_count,
                "" if row.richest_share is None else repr(row.richest_share),
                row.error,
            ])

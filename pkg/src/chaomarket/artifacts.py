"""File artifacts of runs and analyses.

Every simulation run materializes as a directory of plain-text files:

    config_resolved.cfg   fully resolved config, reloadable as-is
    simulation.json       config echo, final money vector, counts, classes
    final_money.csv       agent,money
    pair_matrix.csv       j,i,count sparse triplets (when tracked)
    history_<agent>.csv   transaction,money (one file per traced agent)
    ccdf.csv              money,probability
    fits.json             fit parameters, gini, classification counts
    rank_profile.csv      rank,agent,money,net_wins,losses

Writers are deterministic — same inputs, same bytes — so re-running an
analysis over unchanged inputs reproduces its files exactly.  Numbers are
written in shortest round-trip form and parsed back without loss.  Readers
validate eagerly and report the file and line of the first malformed row.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .config import build_market_config, flatten_market_config, format_config
from .dynamics import Spectrum, Trajectory
from .market import InteractionStats, Ledger, SimulationOutput, classify_agents
from .stats import AnalysisResult, Ccdf


class ArtifactError(ValueError):
    """Missing or malformed artifact file."""


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _json_text(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_final_money(path: Path, ledger: Ledger) -> None:
    lines = ["agent,money"]
    lines.extend(f"{agent},{float(money)!r}"
                 for agent, money in enumerate(ledger.money))
    _write_text(path, "\n".join(lines) + "\n")


def read_final_money(path: str | Path) -> np.ndarray:
    """Parse final_money.csv back into a money vector."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as err:
        raise ArtifactError(f"cannot read {path}: {err}") from err
    if not lines or lines[0] != "agent,money":
        raise ArtifactError(f"{path}:1: expected header 'agent,money'")
    money = []
    for line_no, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 2:
            raise ArtifactError(
                f"{path}:{line_no}: expected 'agent,money', got {line!r}")
        try:
            agent = int(parts[0])
            value = float(parts[1])
        except ValueError:
            raise ArtifactError(
                f"{path}:{line_no}: malformed row {line!r}") from None
        if agent != line_no - 2:
            raise ArtifactError(
                f"{path}:{line_no}: agent index {agent} out of order "
                f"(expected {line_no - 2})")
        if not np.isfinite(value) or value < 0:
            raise ArtifactError(
                f"{path}:{line_no}: money must be finite and non-negative")
        money.append(value)
    if not money:
        raise ArtifactError(f"{path}: no agent rows")
    return np.asarray(money, dtype=np.float64)


def write_pair_matrix(path: Path, stats: InteractionStats) -> None:
    """Write the nonzero (receiver j, payer i) selection counts."""
    matrix = stats.pair_matrix
    lines = ["j,i,count"]
    if isinstance(matrix, np.ndarray):
        for j, i in zip(*np.nonzero(matrix)):
            lines.append(f"{j},{i},{matrix[j, i]}")
    elif matrix is not None:
        for (j, i) in sorted(matrix):
            lines.append(f"{j},{i},{matrix[j, i]}")
    _write_text(path, "\n".join(lines) + "\n")


def write_histories(out_dir: Path, stats: InteractionStats) -> list[Path]:
    """Write one history_<agent>.csv per traced agent."""
    paths = []
    for agent in sorted(stats.histories):
        rows = stats.histories[agent]
        lines = ["transaction,money"]
        lines.extend(f"{int(t)},{float(money)!r}" for t, money in rows)
        path = out_dir / f"history_{agent}.csv"
        _write_text(path, "\n".join(lines) + "\n")
        paths.append(path)
    return paths


def write_simulation_json(path: Path, output: SimulationOutput) -> None:
    """Serialize the full simulation output (config, money, counts, classes)."""
    passive, never_losers = classify_agents(output.stats)
    payload = {
        "config": flatten_market_config(output.config),
        "transactions": output.transactions,
        "self_pairs": output.stats.self_pairs,
        "total_money": float(output.final_ledger.money.sum()),
        "final_money": [float(m) for m in output.final_ledger.money],
        "win_count": [int(c) for c in output.stats.win_count],
        "loss_count": [int(c) for c in output.stats.loss_count],
        "blocked_count": [int(c) for c in output.stats.blocked_count],
        "passive_agents": sorted(passive),
        "never_losers": sorted(never_losers),
    }
    _write_text(path, _json_text(payload))


def read_simulation_output(run_dir: str | Path) -> SimulationOutput:
    """Rebuild a SimulationOutput from a run directory.

    Money comes from final_money.csv (the authoritative vector) and the
    counts and config echo from simulation.json; enough to recompute every
    analysis without re-simulating.  Histories and the pair matrix are not
    reloaded.
    """
    run_dir = Path(run_dir)
    money = read_final_money(run_dir / "final_money.csv")
    json_path = run_dir / "simulation.json"
    try:
        payload = json.loads(json_path.read_text())
    except OSError as err:
        raise ArtifactError(f"cannot read {json_path}: {err}") from err
    except json.JSONDecodeError as err:
        raise ArtifactError(f"{json_path}: invalid JSON: {err}") from err

    try:
        config = build_market_config(payload["config"])
        win = np.asarray(payload["win_count"], dtype=np.int64)
        loss = np.asarray(payload["loss_count"], dtype=np.int64)
        blocked = np.asarray(payload["blocked_count"], dtype=np.int64)
        self_pairs = int(payload["self_pairs"])
        transactions = int(payload["transactions"])
    except (KeyError, TypeError, ValueError) as err:
        raise ArtifactError(f"{json_path}: bad simulation record: {err}") from err
    if not (money.shape == win.shape == loss.shape == blocked.shape):
        raise ArtifactError(
            f"{json_path}: count vectors disagree with final_money.csv "
            f"({money.shape[0]} agents)")

    stats = InteractionStats(win_count=win, loss_count=loss,
                             blocked_count=blocked, self_pairs=self_pairs,
                             pair_matrix=None, histories={})
    passive, _ = classify_agents(stats)
    return SimulationOutput(final_ledger=Ledger(money), stats=stats,
                            config=config, passive_agents=passive,
                            transactions=transactions)


def write_ccdf(path: Path, curve: Ccdf) -> None:
    lines = ["money,probability"]
    lines.extend(f"{float(m)!r},{float(p)!r}"
                 for m, p in zip(curve.money, curve.probability))
    _write_text(path, "\n".join(lines) + "\n")


def _fit_payload(fit) -> dict | None:
    if fit is None:
        return None
    return {
        "kind": fit.kind,
        "parameter": fit.parameter,
        "r_squared": fit.r_squared,
        "fit_range": [fit.fit_range[0], fit.fit_range[1]],
        "n_points": fit.n_points,
    }


def write_fits(path: Path, analysis: AnalysisResult) -> None:
    payload = {
        "exponential": _fit_payload(analysis.exponential_fit),
        "power_law": _fit_payload(analysis.power_law_fit),
        "gini": analysis.gini,
        "richest_share": analysis.richest_share,
        "included_agents": analysis.included_agents,
        "passive_count": len(analysis.passive_agents),
        "never_loser_count": len(analysis.never_losers),
        "notes": list(analysis.notes),
    }
    _write_text(path, _json_text(payload))


def write_rank_profile(path: Path, analysis: AnalysisResult) -> None:
    rank = analysis.rank
    lines = ["rank,agent,money,net_wins,losses"]
    lines.extend(
        f"{r},{rank.order[r - 1]},{float(rank.money[r - 1])!r},"
        f"{rank.net_wins[r - 1]},{rank.losses[r - 1]}"
        for r in range(1, len(rank) + 1))
    _write_text(path, "\n".join(lines) + "\n")


def write_run_artifacts(out_dir: Path, output: SimulationOutput,
                        analysis: AnalysisResult) -> list[Path]:
    """Write the full artifact set of one run; returns the paths written."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []

    cfg_path = out_dir / "config_resolved.cfg"
    _write_text(cfg_path, format_config(flatten_market_config(output.config),
                                        header="resolved configuration"))
    paths.append(cfg_path)

    sim_path = out_dir / "simulation.json"
    write_simulation_json(sim_path, output)
    paths.append(sim_path)

    money_path = out_dir / "final_money.csv"
    write_final_money(money_path, output.final_ledger)
    paths.append(money_path)

    if output.stats.pair_matrix is not None:
        pair_path = out_dir / "pair_matrix.csv"
        write_pair_matrix(pair_path, output.stats)
        paths.append(pair_path)

    paths.extend(write_histories(out_dir, output.stats))
    paths.extend(write_analysis_artifacts(out_dir, analysis))
    return paths


def write_analysis_artifacts(out_dir: Path, analysis: AnalysisResult
                             ) -> list[Path]:
    """Write (or rewrite) just the analysis files of a run directory."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ccdf_path = out_dir / "ccdf.csv"
    write_ccdf(ccdf_path, analysis.ccdf)
    fits_path = out_dir / "fits.json"
    write_fits(fits_path, analysis)
    rank_path = out_dir / "rank_profile.csv"
    write_rank_profile(rank_path, analysis)
    return [ccdf_path, fits_path, rank_path]


def write_trajectory(path: Path, traj: Trajectory) -> None:
    lines = ["index,x,y"]
    lines.extend(f"{k},{float(x)!r},{float(y)!r}"
                 for k, (x, y) in enumerate(traj.points))
    _write_text(path, "\n".join(lines) + "\n")


def write_spectrum(path: Path, spectrum: Spectrum) -> None:
    lines = ["frequency,magnitude"]
    lines.extend(f"{float(f)!r},{float(m)!r}"
                 for f, m in zip(spectrum.frequencies, spectrum.magnitudes))
    _write_text(path, "\n".join(lines) + "\n")


def write_peak(path: Path, frequency: float, magnitude: float) -> None:
    _write_text(path, _json_text({"frequency": frequency,
                                  "magnitude": magnitude}))


def read_series(path: str | Path) -> np.ndarray:
    """Read a one-column series file (optional 'value' header line)."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as err:
        raise ArtifactError(f"cannot read {path}: {err}") from err
    start = 2 if lines and lines[0].strip() == "value" else 1
    values = []
    for line_no, line in enumerate(lines[start - 1:], start=start):
        text = line.strip()
        if not text:
            continue
        try:
            values.append(float(text))
        except ValueError:
            raise ArtifactError(
                f"{path}:{line_no}: expected a number, got {line!r}") from None
    if len(values) < 2:
        raise ArtifactError(f"{path}: series needs at least 2 values")
    return np.asarray(values, dtype=np.float64)

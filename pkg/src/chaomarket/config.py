"""Flat key-value configuration documents.

Runs are described by a small flat file of `key = value` lines (blank lines
and `#` comments allowed) plus command-line `key=value` overrides applied
on top.  Keys match the config dataclass fields one to one, with the nested
map parameters flattened to lambda_a/lambda_b and x0/y0.  Unknown keys are
errors, not warnings, and every error names the offending source and line.

The same format is emitted back as the resolved-config echo, so an artifact
directory's config file can be fed straight back in to reproduce its run.
"""

from __future__ import annotations

from pathlib import Path

from .dynamics import BimapParams, BimapState
from .market import MarketConfig
from .sweep import SweepSpec


class ConfigError(ValueError):
    """Malformed configuration input: syntax, unknown key, or bad value."""


MARKET_KEYS = ("n_agents", "initial_money", "total_transactions",
               "lambda_a", "lambda_b", "x0", "y0", "burn_in", "rng_seed",
               "history_sample_stride", "history_agents", "track_pair_matrix")

SWEEP_KEYS = tuple(k for k in MARKET_KEYS if k != "lambda_b") + (
    "lambda_b_values", "lambda_b_start", "lambda_b_step", "lambda_b_count",
    "parallel_runs", "output_dir")

DYNAMICS_KEYS = ("lambda_a", "lambda_b", "x0", "y0", "burn_in", "samples")

ANALYZE_KEYS = ("exclude_passive", "coverage", "tail_fraction")


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse a flat key-value document into a string map."""
    mapping: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{line_no}: expected 'key = value', "
                              f"got {raw.strip()!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"{source}:{line_no}: empty key")
        if key in mapping:
            raise ConfigError(f"{source}:{line_no}: duplicate key {key!r}")
        mapping[key] = value
    return mapping


def load_config_file(path: str | Path) -> dict[str, str]:
    """Read and parse one config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config file {path}: {err}") from err
    return parse_config_text(text, source=str(path))


def apply_overrides(mapping: dict[str, str], overrides: list[str]
                    ) -> dict[str, str]:
    """Apply `key=value` override strings on top of a parsed config."""
    merged = dict(mapping)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(
                f"override {item!r} is not of the form key=value")
        key, value = item.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"override {item!r} has an empty key")
        merged[key] = value.strip()
    return merged


def check_keys(mapping: dict[str, str], allowed: tuple[str, ...]) -> None:
    """Reject keys outside the documented schema."""
    unknown = sorted(set(mapping) - set(allowed))
    if unknown:
        raise ConfigError(
            f"unknown config key(s): {', '.join(unknown)}; "
            f"allowed: {', '.join(allowed)}")


def _parse_int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {value!r}") from None


def _parse_float(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {value!r}") from None


def _parse_bool(key: str, value: str) -> bool:
    lowered = value.lower()
    if lowered == "true":
        return True
    if lowered == "false":
        return False
    raise ConfigError(f"{key}: expected true or false, got {value!r}")


def _parse_optional_int(key: str, value: str) -> int | None:
    if value.lower() in ("auto", "none"):
        return None
    return _parse_int(key, value)


def _parse_tri_bool(key: str, value: str) -> bool | None:
    if value.lower() in ("auto", "none"):
        return None
    return _parse_bool(key, value)


def _parse_int_list(key: str, value: str) -> tuple[int, ...]:
    if not value:
        return ()
    return tuple(_parse_int(key, part.strip()) for part in value.split(","))


def _parse_float_list(key: str, value: str) -> tuple[float, ...]:
    if not value:
        return ()
    return tuple(_parse_float(key, part.strip()) for part in value.split(","))


def build_market_config(mapping: dict[str, str]) -> MarketConfig:
    """Construct a MarketConfig from a string map, defaults filled in."""
    check_keys(mapping, MARKET_KEYS)
    defaults = MarketConfig()
    try:
        params = BimapParams(
            _parse_float("lambda_a", mapping["lambda_a"])
            if "lambda_a" in mapping else defaults.bimap_params.lambda_a,
            _parse_float("lambda_b", mapping["lambda_b"])
            if "lambda_b" in mapping else defaults.bimap_params.lambda_b)
        initial = BimapState(
            _parse_float("x0", mapping["x0"])
            if "x0" in mapping else defaults.bimap_initial.x,
            _parse_float("y0", mapping["y0"])
            if "y0" in mapping else defaults.bimap_initial.y)
        return MarketConfig(
            n_agents=_parse_int("n_agents", mapping["n_agents"])
            if "n_agents" in mapping else defaults.n_agents,
            initial_money=_parse_float("initial_money",
                                       mapping["initial_money"])
            if "initial_money" in mapping else defaults.initial_money,
            total_transactions=_parse_optional_int(
                "total_transactions", mapping["total_transactions"])
            if "total_transactions" in mapping else defaults.total_transactions,
            bimap_params=params,
            bimap_initial=initial,
            burn_in=_parse_int("burn_in", mapping["burn_in"])
            if "burn_in" in mapping else defaults.burn_in,
            rng_seed=_parse_int("rng_seed", mapping["rng_seed"])
            if "rng_seed" in mapping else defaults.rng_seed,
            history_sample_stride=_parse_optional_int(
                "history_sample_stride", mapping["history_sample_stride"])
            if "history_sample_stride" in mapping
            else defaults.history_sample_stride,
            history_agents=_parse_int_list("history_agents",
                                           mapping["history_agents"])
            if "history_agents" in mapping else defaults.history_agents,
            track_pair_matrix=_parse_tri_bool("track_pair_matrix",
                                              mapping["track_pair_matrix"])
            if "track_pair_matrix" in mapping else defaults.track_pair_matrix)
    except ValueError as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError(str(err)) from err


def flatten_market_config(config: MarketConfig) -> dict[str, str]:
    """Render a MarketConfig as the canonical resolved string map.

    Optional fields are written in their resolved form (actual transaction
    count, actual stride, concrete pair-matrix choice), so feeding the
    result back through `build_market_config` reproduces the run exactly.
    """
    return {
        "n_agents": str(config.n_agents),
        "initial_money": repr(config.initial_money),
        "total_transactions": str(config.transactions),
        "lambda_a": repr(config.bimap_params.lambda_a),
        "lambda_b": repr(config.bimap_params.lambda_b),
        "x0": repr(config.bimap_initial.x),
        "y0": repr(config.bimap_initial.y),
        "burn_in": str(config.burn_in),
        "rng_seed": str(config.rng_seed),
        "history_sample_stride": str(config.stride),
        "history_agents": ",".join(str(a) for a in config.history_agents),
        "track_pair_matrix": "false" if config.pair_matrix_mode == "off"
                             else "true",
    }


def format_config(mapping: dict[str, str], header: str | None = None) -> str:
    """Render a string map back into the flat file format."""
    lines = [] if header is None else [f"# {header}"]
    lines.extend(f"{key} = {value}" for key, value in mapping.items())
    return "\n".join(lines) + "\n"


def build_sweep_spec(mapping: dict[str, str],
                     default_output_dir: str | Path | None = None
                     ) -> SweepSpec:
    """Construct a SweepSpec from a string map.

    The market keys describe the base config (lambda_b itself is the swept
    axis and is rejected here); the sweep keys pick the lambda_b values,
    parallelism, and output directory.
    """
    if "lambda_b" in mapping:
        raise ConfigError("lambda_b is the swept axis; use lambda_b_values "
                          "or lambda_b_start/step/count")
    check_keys(mapping, SWEEP_KEYS)
    market_map = {k: v for k, v in mapping.items() if k in MARKET_KEYS}
    base = build_market_config(market_map)

    values = (_parse_float_list("lambda_b_values", mapping["lambda_b_values"])
              if "lambda_b_values" in mapping else None)
    start = (_parse_float("lambda_b_start", mapping["lambda_b_start"])
             if "lambda_b_start" in mapping else None)
    step = (_parse_float("lambda_b_step", mapping["lambda_b_step"])
            if "lambda_b_step" in mapping else None)
    count = (_parse_int("lambda_b_count", mapping["lambda_b_count"])
             if "lambda_b_count" in mapping else None)
    parallel = (_parse_int("parallel_runs", mapping["parallel_runs"])
                if "parallel_runs" in mapping else 1)
    out_dir = mapping.get("output_dir", default_output_dir)
    try:
        return SweepSpec(base_config=base, lambda_b_values=values,
                         lambda_b_start=start, lambda_b_step=step,
                         lambda_b_count=count,
                         output_dir=Path(out_dir) if out_dir else None,
                         parallel_runs=parallel)
    except ValueError as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError(str(err)) from err


def build_dynamics_settings(mapping: dict[str, str], default_samples: int
                            ) -> tuple[BimapParams, BimapState, int, int]:
    """Resolve (params, initial, burn_in, samples) for the map commands."""
    check_keys(mapping, DYNAMICS_KEYS)
    try:
        params = BimapParams(
            _parse_float("lambda_a", mapping["lambda_a"])
            if "lambda_a" in mapping else 1.032,
            _parse_float("lambda_b", mapping["lambda_b"])
            if "lambda_b" in mapping else 1.032)
        initial = BimapState(
            _parse_float("x0", mapping["x0"]) if "x0" in mapping else 0.5,
            _parse_float("y0", mapping["y0"]) if "y0" in mapping else 0.3)
    except ValueError as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError(str(err)) from err
    burn_in = (_parse_int("burn_in", mapping["burn_in"])
               if "burn_in" in mapping else 1000)
    samples = (_parse_int("samples", mapping["samples"])
               if "samples" in mapping else default_samples)
    if burn_in < 0:
        raise ConfigError(f"burn_in must be >= 0: got {burn_in}")
    if samples < 1:
        raise ConfigError(f"samples must be >= 1: got {samples}")
    return params, initial, burn_in, samples


def flatten_dynamics_settings(params: BimapParams, initial: BimapState,
                              burn_in: int, samples: int) -> dict[str, str]:
    """Canonical string map for the map commands' resolved settings."""
    return {
        "lambda_a": repr(params.lambda_a),
        "lambda_b": repr(params.lambda_b),
        "x0": repr(initial.x),
        "y0": repr(initial.y),
        "burn_in": str(burn_in),
        "samples": str(samples),
    }

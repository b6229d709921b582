"""Batch front-end: config parsing, scenario sweeps, and CSV/JSON export.

A run is described by a JSON configuration document. Every key doubles as a
command-line flag (``--key value``; nested scene keys as ``--scene.key``),
and flags win over the file. All sweeps are deterministic for a fixed
(config, seed): grid point j derives its sampling streams from
SeedSequence((seed, j)).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .atmosphere import (
    MAX_ZENITH,
    WEATHER_PRESETS,
    ChannelScene,
    link_geometry,
    weather_preset,
)
from .bb84 import Bb84Params, bb84_key_rate, bb84_qber, noise_tolerance
from .errors import DomainError, NumericError
from .ext_b92 import ext_b92_key_rate, ext_b92_qber
from .transmittance import (
    RateDistribution,
    TransmittanceDistribution,
    average_key_rate,
    estimate_pdt,
    key_rate_distribution,
)
from .validation import validate_dimension, validate_efficiency, validate_noise


def _bb84_rate(d: int, q: float, xi: float = 1.0) -> float:
    return bb84_key_rate(Bb84Params(d=d, q=q, xi=xi))


def _bb84_qber(d: int, q: float) -> float:
    return bb84_qber(Bb84Params(d=d, q=q))


PROTOCOLS = ("ext_b92", "bb84")
RATE_FUNCTIONS = {"ext_b92": ext_b92_key_rate, "bb84": _bb84_rate}
QBER_FUNCTIONS = {"ext_b92": ext_b92_qber, "bb84": _bb84_qber}
SWEEPS = ("noise", "zenith", "length", "pdt", "pdr", "tolerance")
FORMATS = ("csv", "json")
ROUNDING_DEFAULTS = {"ext_b92": 6, "bb84": 5}

CSV_HEADER = (
    "protocol,d,q,xi,direction,weather,zenith_deg,L_m,mean_eta,avg_rate,"
    "qber,tolerance,n_samples,seed"
)

_SCENE_KEYS = (
    "direction", "weather", "zenith_deg", "L_bar", "h_bar", "wavelength",
    "W0", "r_ap", "alpha", "beta", "Cn2", "n0", "pointing_model",
)
_SCENE_NUMBER_KEYS = (
    "zenith_deg", "L_bar", "h_bar", "wavelength", "W0", "r_ap", "alpha",
    "beta", "Cn2", "n0",
)
_TOP_KEYS = (
    "protocol", "sweep", "d_list", "q_list", "xi", "scene", "zenith_grid",
    "length_grid", "n_samples", "n_bins", "rounding_decimals", "seed",
    "output_path", "format",
)


def _default_q_grid() -> tuple[float, ...]:
    return tuple(round(0.005 * i, 3) for i in range(71))  # 0 .. 0.35


def _default_zenith_grid() -> tuple[float, ...]:
    return tuple(float(z) for z in range(0, 81, 2))  # degrees


def _default_length_grid() -> tuple[float, ...]:
    # 500 km .. 2875 km; sec(80 deg) * 500 km = 2879.4 km caps the domain
    return tuple(500e3 + 125e3 * i for i in range(20))


@dataclass(frozen=True)
class SimulationConfig:
    """Fully validated description of one batch run."""

    protocol: str
    sweep: str
    d_list: tuple[int, ...]
    q_list: tuple[float, ...]
    xi: float
    scene: ChannelScene
    weather: str
    zenith_grid: tuple[float, ...]
    length_grid: tuple[float, ...]
    n_samples: int
    n_bins: int
    rounding_decimals: int | None
    seed: int
    output_path: str | None
    output_format: str


@dataclass(frozen=True)
class SweepRecord:
    """One output row of a sweep."""

    protocol: str
    d: int
    q: float
    xi: float
    direction: str
    weather: str
    zenith_deg: float
    L_m: float
    mean_eta: float
    avg_rate: float
    qber: float
    tolerance: float | None
    n_samples: int
    seed: int


_RECORD_FIELDS = tuple(field.name for field in dataclasses.fields(SweepRecord))


def _choice(raw: dict, key: str, options: tuple[str, ...], default: str) -> str:
    value = raw.get(key, default)
    if value not in options:
        raise DomainError(f"{key} must be one of {', '.join(options)}; got {value!r}")
    return value


def _int_field(raw: dict, key: str, default: int | None, minimum: int) -> int | None:
    if key not in raw:
        return default
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise DomainError(f"{key} must be an integer, got {value!r}")
    if value < minimum:
        raise DomainError(f"{key} must be at least {minimum}, got {value}")
    return value


def _number_list(raw: dict, key: str, default: tuple[float, ...]) -> tuple[float, ...]:
    if key not in raw:
        return default
    value = raw[key]
    if not isinstance(value, (list, tuple)):
        raise DomainError(f"{key} must be a list of numbers, got {value!r}")
    if not value:
        raise DomainError(f"{key} must not be empty")
    out = []
    for entry in value:
        if isinstance(entry, bool) or not isinstance(entry, (int, float)):
            raise DomainError(f"{key} entries must be numbers, got {entry!r}")
        out.append(float(entry))
    return tuple(out)


def _build_scene(raw_scene: dict) -> tuple[ChannelScene, str]:
    if not isinstance(raw_scene, dict):
        raise DomainError(f"scene must be an object, got {raw_scene!r}")
    unknown = set(raw_scene) - set(_SCENE_KEYS)
    if unknown:
        raise DomainError(f"unknown scene key(s): {', '.join(sorted(unknown))}")
    params: dict = {}
    weather = raw_scene.get("weather")
    if weather is not None:
        params["Cn2"], params["n0"] = weather_preset(weather)
        label = weather
    elif "Cn2" in raw_scene or "n0" in raw_scene:
        label = "custom"
    else:
        label = "day1"  # ChannelScene's default (Cn2, n0) pair
    for key in _SCENE_NUMBER_KEYS:
        if key not in raw_scene:
            continue
        value = raw_scene[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise DomainError(f"scene.{key} must be a number, got {value!r}")
        if key == "zenith_deg":
            params["zenith"] = math.radians(float(value))
        else:
            params[key] = float(value)
    if "pointing_model" in raw_scene:
        params["pointing_model"] = raw_scene["pointing_model"]
    direction = raw_scene.get("direction", "downlink")
    return ChannelScene(direction=direction, **params), label


def parse_config(text: str) -> SimulationConfig:
    """Validate a JSON configuration document and fill defaults."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"configuration is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise DomainError(f"configuration must be a JSON object, got {type(raw).__name__}")
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> SimulationConfig:
    """Build a validated configuration from an already-parsed dict."""
    unknown = set(raw) - set(_TOP_KEYS)
    if unknown:
        raise DomainError(f"unknown configuration key(s): {', '.join(sorted(unknown))}")

    protocol = _choice(raw, "protocol", PROTOCOLS + ("both",), "both")
    sweep = _choice(raw, "sweep", SWEEPS, "noise")
    output_format = _choice(raw, "format", FORMATS, "csv")

    d_raw = raw.get("d_list", [2, 4, 8, 16, 32])
    if not isinstance(d_raw, (list, tuple)) or not d_raw:
        raise DomainError(f"d_list must be a non-empty list of integers, got {d_raw!r}")
    d_list = tuple(validate_dimension(d) for d in d_raw)

    q_list = _number_list(raw, "q_list", _default_q_grid())
    d_min = min(d_list)
    for q in q_list:
        validate_noise(d_min, q)

    xi = validate_efficiency(raw.get("xi", 1.0))

    scene, weather = _build_scene(raw.get("scene", {}))

    zenith_grid = _number_list(raw, "zenith_grid", _default_zenith_grid())
    for z in zenith_grid:
        if not 0.0 <= z <= math.degrees(MAX_ZENITH) + 1e-9:
            raise DomainError(f"zenith_grid entry {z!r} outside [0, 80] degrees")

    length_grid = _number_list(raw, "length_grid", _default_length_grid())
    max_length = scene.L_bar / math.cos(MAX_ZENITH)
    for length in length_grid:
        if not scene.L_bar <= length <= max_length + 1e-6:
            raise DomainError(
                f"length_grid entry {length!r} outside [L_bar, L_bar*sec(80 deg)] "
                f"= [{scene.L_bar}, {max_length:.1f}] m"
            )

    n_samples = _int_field(raw, "n_samples", None, 1)
    if n_samples is None:
        n_samples = 1_000_000 if sweep == "pdr" else 10_000
    n_bins = _int_field(raw, "n_bins", 100, 1)
    rounding_decimals = _int_field(raw, "rounding_decimals", None, 0)
    seed = _int_field(raw, "seed", 0, 0)

    output_path = raw.get("output_path")
    if output_path is not None and not isinstance(output_path, str):
        raise DomainError(f"output_path must be a string, got {output_path!r}")

    return SimulationConfig(
        protocol=protocol, sweep=sweep, d_list=d_list, q_list=q_list, xi=xi,
        scene=scene, weather=weather, zenith_grid=zenith_grid,
        length_grid=length_grid, n_samples=n_samples, n_bins=n_bins,
        rounding_decimals=rounding_decimals, seed=seed,
        output_path=output_path, output_format=output_format,
    )


def _rounding_for(config: SimulationConfig, protocol: str) -> int:
    if config.rounding_decimals is not None:
        return config.rounding_decimals
    return ROUNDING_DEFAULTS[protocol]


def _protocols(config: SimulationConfig) -> tuple[str, ...]:
    return PROTOCOLS if config.protocol == "both" else (config.protocol,)


def _record(
    config: SimulationConfig, protocol: str, d: int, q: float, *,
    zenith_deg: float, L_m: float, mean_eta: float, avg_rate: float,
    tolerance: float | None = None, n_samples: int = 0,
) -> SweepRecord:
    return SweepRecord(
        protocol=protocol, d=d, q=q, xi=config.xi,
        direction=config.scene.direction, weather=config.weather,
        zenith_deg=zenith_deg, L_m=L_m, mean_eta=mean_eta, avg_rate=avg_rate,
        qber=QBER_FUNCTIONS[protocol](d, q), tolerance=tolerance,
        n_samples=n_samples, seed=config.seed,
    )


def _scene_geometry(config: SimulationConfig) -> tuple[float, float]:
    L, _ = link_geometry(config.scene.L_bar, config.scene.h_bar, config.scene.zenith)
    return math.degrees(config.scene.zenith), L


def _sweep_noise(config: SimulationConfig) -> list[SweepRecord]:
    # Per-pulse protocol curves; no channel weighting (mean_eta fixed at 1).
    zenith_deg, L = _scene_geometry(config)
    records = []
    for protocol in _protocols(config):
        rate_fn = RATE_FUNCTIONS[protocol]
        for d in config.d_list:
            for q in config.q_list:
                records.append(_record(
                    config, protocol, d, q, zenith_deg=zenith_deg, L_m=L,
                    mean_eta=1.0, avg_rate=rate_fn(d, q, config.xi),
                ))
    return records


def _sweep_tolerance(config: SimulationConfig) -> list[SweepRecord]:
    zenith_deg, L = _scene_geometry(config)
    records = []
    for protocol in _protocols(config):
        rate_fn = RATE_FUNCTIONS[protocol]
        for d in config.d_list:
            tol = noise_tolerance(lambda q: rate_fn(d, q, 1.0), d)
            records.append(_record(
                config, protocol, d, 0.0, zenith_deg=zenith_deg, L_m=L,
                mean_eta=1.0, avg_rate=rate_fn(d, 0.0, config.xi), tolerance=tol,
            ))
    return records


def _grid_pdt(
    config: SimulationConfig, scene: ChannelScene, grid_index: int, label: str
) -> TransmittanceDistribution:
    try:
        return estimate_pdt(
            scene, config.n_samples, config.n_bins,
            seed=_child_seed(config.seed, grid_index),
        )
    except (DomainError, NumericError) as exc:
        raise type(exc)(f"{label}: {exc}") from exc


def _child_seed(seed: int, index: int) -> int:
    # One independent child stream per grid point, stable under re-ordering.
    return int(np.random.SeedSequence((seed, index)).generate_state(1)[0])


def _channel_records(
    config: SimulationConfig, points: list[tuple[float, float, TransmittanceDistribution]]
) -> list[SweepRecord]:
    records = []
    for protocol in _protocols(config):
        rate_fn = RATE_FUNCTIONS[protocol]
        for d in config.d_list:
            for q in config.q_list:
                for zenith_deg, L, pdt in points:
                    records.append(_record(
                        config, protocol, d, q, zenith_deg=zenith_deg, L_m=L,
                        mean_eta=pdt.mean_eta,
                        avg_rate=average_key_rate(pdt, rate_fn, d, q, config.xi),
                        n_samples=config.n_samples,
                    ))
    return records


def _sweep_zenith(config: SimulationConfig) -> list[SweepRecord]:
    points = []
    for j, zenith_deg in enumerate(config.zenith_grid):
        zenith = math.radians(zenith_deg)
        scene = dataclasses.replace(config.scene, zenith=zenith)
        L, _ = link_geometry(scene.L_bar, scene.h_bar, zenith)
        pdt = _grid_pdt(config, scene, j, f"zenith={zenith_deg} deg")
        points.append((zenith_deg, L, pdt))
    return _channel_records(config, points)


def _sweep_length(config: SimulationConfig) -> list[SweepRecord]:
    points = []
    for j, L in enumerate(config.length_grid):
        zenith = math.acos(min(1.0, config.scene.L_bar / L))
        scene = dataclasses.replace(config.scene, zenith=zenith)
        pdt = _grid_pdt(config, scene, j, f"length={L} m")
        points.append((math.degrees(zenith), L, pdt))
    return _channel_records(config, points)


def _sweep_channel_point(config: SimulationConfig) -> list[SweepRecord]:
    # Single channel point at the scene's own zenith (pdt / pdr summaries).
    # Uses the run seed directly so the summary shares its beam draws with
    # the distributions exported by the pdt / pdr subcommands.
    zenith_deg, L = _scene_geometry(config)
    pdt = estimate_pdt(config.scene, config.n_samples, config.n_bins, seed=config.seed)
    return _channel_records(config, [(zenith_deg, L, pdt)])


def run_sweep(config: SimulationConfig) -> list[SweepRecord]:
    """Evaluate the configured grid; one record per grid point, in grid order."""
    dispatch = {
        "noise": _sweep_noise,
        "tolerance": _sweep_tolerance,
        "zenith": _sweep_zenith,
        "length": _sweep_length,
        "pdt": _sweep_channel_point,
        "pdr": _sweep_channel_point,
    }
    return dispatch[config.sweep](config)


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)  # shortest exact round-trip form
    return str(value)


def _emit_text(payload: str, path) -> None:
    if path is None:
        sys.stdout.write(payload)
    else:
        Path(path).write_text(payload, encoding="utf-8", newline="\n")


def emit_records(records: list[SweepRecord], format: str, path) -> None:
    """Write sweep records as CSV (fixed header) or JSON, byte-deterministic.

    Floats are rendered in their shortest exact round-trip form, so the CSV
    and JSON emissions of the same run parse back field-for-field equal.
    ``path=None`` writes to stdout.
    """
    if format not in FORMATS:
        raise DomainError(f"output format must be one of {', '.join(FORMATS)}; got {format!r}")
    if format == "csv":
        lines = [CSV_HEADER]
        for record in records:
            lines.append(",".join(
                _format_value(getattr(record, name)) for name in _RECORD_FIELDS
            ))
        payload = "\n".join(lines) + "\n"
    else:
        payload = json.dumps([dataclasses.asdict(r) for r in records], indent=2) + "\n"
    _emit_text(payload, path)


def emit_pdt(pdt: TransmittanceDistribution, format: str, path) -> None:
    """Write a transmittance distribution (eta, probability) to CSV or JSON."""
    if format not in FORMATS:
        raise DomainError(f"output format must be one of {', '.join(FORMATS)}; got {format!r}")
    if format == "csv":
        lines = ["eta,probability"]
        for eta, prob in zip(pdt.bin_centers.tolist(), pdt.probabilities.tolist()):
            lines.append(f"{_format_value(eta)},{_format_value(prob)}")
        payload = "\n".join(lines) + "\n"
    else:
        payload = json.dumps({
            "eta": pdt.bin_centers.tolist(),
            "probability": pdt.probabilities.tolist(),
            "n_samples": pdt.n_samples,
            "n_bins": pdt.n_bins,
            "seed": pdt.seed,
            "chi_ext": pdt.chi_ext,
        }, indent=2) + "\n"
    _emit_text(payload, path)


def emit_pdr(dist: RateDistribution, format: str, path) -> None:
    """Write a key-rate distribution (rate, probability) to CSV or JSON."""
    if format not in FORMATS:
        raise DomainError(f"output format must be one of {', '.join(FORMATS)}; got {format!r}")
    if format == "csv":
        lines = ["rate,probability"]
        for rate, prob in zip(dist.rate_values.tolist(), dist.probabilities.tolist()):
            lines.append(f"{_format_value(rate)},{_format_value(prob)}")
        payload = "\n".join(lines) + "\n"
    else:
        payload = json.dumps({
            "rate": dist.rate_values.tolist(),
            "probability": dist.probabilities.tolist(),
            "rounding_decimals": dist.rounding_decimals,
        }, indent=2) + "\n"
    _emit_text(payload, path)


_FLAG_LIST_KEYS = ("d_list", "q_list", "zenith_grid", "length_grid")
_FLAG_INT_KEYS = ("n_samples", "n_bins", "rounding_decimals", "seed")
_FLAG_STRING_KEYS = ("protocol", "sweep", "format", "output_path")
_SCENE_STRING_KEYS = ("direction", "weather", "pointing_model")


def _parse_number(text: str, flag: str) -> float | int:
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise DomainError(f"--{flag}: expected a number, got {text!r}") from None


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH", help="JSON configuration file")
    for key in _FLAG_STRING_KEYS:
        parser.add_argument(f"--{key}", metavar="VALUE")
    parser.add_argument("--xi", metavar="VALUE")
    for key in _FLAG_LIST_KEYS:
        parser.add_argument(f"--{key}", metavar="V1,V2,...")
    for key in _FLAG_INT_KEYS:
        parser.add_argument(f"--{key}", metavar="N")
    for key in _SCENE_KEYS:
        parser.add_argument(f"--scene.{key}", dest=f"scene.{key}", metavar="VALUE")


def _merged_config_dict(args: argparse.Namespace) -> dict:
    raw: dict = {}
    if args.config is not None:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise DomainError(f"cannot read configuration file: {exc}") from None
        try:
            loaded = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DomainError(f"configuration is not valid JSON: {exc}") from None
        if not isinstance(loaded, dict):
            raise DomainError("configuration must be a JSON object")
        raw = loaded
    values = vars(args)
    for key in _FLAG_STRING_KEYS:
        if values.get(key) is not None:
            raw[key] = values[key]
    if values.get("xi") is not None:
        raw["xi"] = _parse_number(values["xi"], "xi")
    for key in _FLAG_LIST_KEYS:
        if values.get(key) is not None:
            parts = [p for p in values[key].split(",") if p.strip()]
            if not parts:
                raise DomainError(f"--{key} must list at least one value")
            raw[key] = [_parse_number(p.strip(), key) for p in parts]
    for key in _FLAG_INT_KEYS:
        if values.get(key) is not None:
            parsed = _parse_number(values[key], key)
            if not isinstance(parsed, int):
                raise DomainError(f"--{key}: expected an integer, got {values[key]!r}")
            raw[key] = parsed
    scene_overrides = {}
    for key in _SCENE_KEYS:
        value = values.get(f"scene.{key}")
        if value is None:
            continue
        if key in _SCENE_STRING_KEYS:
            scene_overrides[key] = value
        else:
            scene_overrides[key] = _parse_number(value, f"scene.{key}")
    if scene_overrides:
        scene = dict(raw.get("scene", {}))
        scene.update(scene_overrides)
        raw["scene"] = scene
    return raw


def _single_combo(config: SimulationConfig, command: str) -> tuple[str, int, float]:
    if config.protocol == "both" or len(config.d_list) != 1 or len(config.q_list) != 1:
        raise DomainError(
            f"the {command} command writes one distribution; give a single "
            "protocol, one d_list entry, and one q_list entry"
        )
    return config.protocol, config.d_list[0], config.q_list[0]


def _run_command(args: argparse.Namespace) -> int:
    if args.command == "presets":
        for name in sorted(WEATHER_PRESETS):
            cn2, n0 = WEATHER_PRESETS[name]
            print(f"{name}: Cn2={cn2} m^(-2/3), n0={n0} m^(-3)")
        return 0

    raw = _merged_config_dict(args)
    if args.command in ("pdt", "pdr", "tolerance"):
        raw["sweep"] = args.command
    config = config_from_dict(raw)

    if args.command == "pdt":
        pdt = estimate_pdt(config.scene, config.n_samples, config.n_bins, seed=config.seed)
        emit_pdt(pdt, config.output_format, config.output_path)
    elif args.command == "pdr":
        protocol, d, q = _single_combo(config, "pdr")
        dist = key_rate_distribution(
            config.scene, RATE_FUNCTIONS[protocol], d, q, config.xi,
            config.n_samples, _rounding_for(config, protocol), config.seed,
        )
        emit_pdr(dist, config.output_format, config.output_path)
    else:  # sweep, tolerance
        records = run_sweep(config)
        emit_records(records, config.output_format, config.output_path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="satqkd",
        description="Key rates for high-dimensional QKD over satellite optical links",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("sweep", "evaluate a noise/zenith/length/pdt/pdr/tolerance grid"),
        ("pdt", "export the transmittance distribution at the scene's zenith"),
        ("pdr", "export the key-rate distribution for one (protocol, d, q)"),
        ("tolerance", "report noise tolerances per protocol and dimension"),
    ):
        sub = subparsers.add_parser(name, help=help_text)
        _add_config_flags(sub)
    subparsers.add_parser("presets", help="list the named weather presets")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run_command(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

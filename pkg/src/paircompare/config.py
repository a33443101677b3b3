"""Configuration grammar and observation ingestion.

Config files are INI-style: ``[section]`` headers, ``key = value`` lines,
``#`` comments, UTF-8 text.  Keys are case-sensitive.  List values are
comma-separated.  ``render_config`` writes the canonical form, and
``parse_config(render_config(c))`` always reproduces ``c``.
"""

from __future__ import annotations

import configparser
import csv
import io
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .bayes import BetaParams, PRIOR_PRESETS
from .core import (
    DatasetObs,
    Direction,
    ObservationMode,
    ObservationSet,
    pool_datasets,
    validate,
)
from .errors import ConfigError, IngestError, IoError
from .frequentist import CiMode
from .mcmc import InitStrategy

KNOWN_METHODS = ("pvalue", "ci", "hdi_rope", "bayes_factor")


@dataclass(frozen=True)
class DataConfig:
    mode: ObservationMode
    counts: tuple[tuple[int, int], tuple[int, int]] | None = None
    files: tuple[str, ...] = ()
    names: tuple[str, ...] = ()
    systems: tuple[str, str] = ("system1", "system2")
    pool: bool = False


@dataclass(frozen=True)
class ModelConfig:
    prior_label: str = "uniform"
    prior: BetaParams = BetaParams(1.0, 1.0)


@dataclass(frozen=True)
class AnalysisOptions:
    seed: int
    methods: tuple[str, ...] = KNOWN_METHODS
    alpha: float = 0.05
    ci_level: float = 0.95
    ci_mode: CiMode = CiMode.STANDARD_TWO_SIDED
    hdi_mass: float = 0.95
    rope_radius: float = 0.01
    margin: float = 0.01
    direction: Direction = Direction.GREATER
    n_mc: int = 100_000


@dataclass(frozen=True)
class McmcOptions:
    enabled: bool = True
    chains: int = 4
    warmup: int = 1000
    draws: int = 5000
    init: InitStrategy = InitStrategy.MLE_JITTER


@dataclass(frozen=True)
class OutputConfig:
    report: str = "out/report.json"
    plot_dir: str = "out/plots"
    trace_dir: str = "out/traces"
    sim_dir: str = "out/simulations"


@dataclass(frozen=True)
class SimulateConfig:
    stopping_successes: int = 7
    stopping_trials: int = 24
    stopping_null_rate: float = 0.5
    looks_step: int = 10
    looks_max: int = 500
    os_alpha: float = 0.05
    os_trials: int = 10_000
    os_theta: float = 0.5
    sweep_epsilon: float = 0.01
    sweep_n_mc: int = 100_000


@dataclass(frozen=True)
class AnalysisConfig:
    analysis: AnalysisOptions
    data: DataConfig | None = None
    model: ModelConfig = ModelConfig()
    mcmc: McmcOptions = McmcOptions()
    output: OutputConfig = OutputConfig()
    simulate: SimulateConfig = SimulateConfig()
    # Directory the config file came from; relative data paths resolve
    # against it.  Not part of the grammar, so not compared or rendered.
    base_dir: str | None = field(default=None, compare=False)


def _raw_parse(text: str) -> dict[str, dict[str, str]]:
    parser = configparser.ConfigParser(
        delimiters=("=",),
        comment_prefixes=("#",),
        inline_comment_prefixes=("#",),
        interpolation=None,
        strict=True,
    )
    parser.optionxform = str  # keys stay case-sensitive
    try:
        parser.read_string(text)
    except configparser.DuplicateSectionError as exc:
        raise ConfigError("duplicate section", section=exc.section,
                          line=exc.lineno) from exc
    except configparser.DuplicateOptionError as exc:
        raise ConfigError("duplicate key", section=exc.section, key=exc.option,
                          line=exc.lineno) from exc
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("content before the first [section] header",
                          line=exc.lineno) from exc
    except configparser.ParsingError as exc:
        first = exc.errors[0] if getattr(exc, "errors", None) else None
        line = first[0] if first else None
        raise ConfigError("cannot parse line", line=line) from exc
    return {section: dict(parser.items(section)) for section in parser.sections()}


class _Section:
    """Typed access to one raw section with uniform error context."""

    def __init__(self, name: str, values: dict[str, str]):
        self.name = name
        self.values = dict(values)

    def error(self, message: str, key: str | None = None) -> ConfigError:
        return ConfigError(message, section=self.name, key=key)

    def reject_unknown(self, known: tuple[str, ...]) -> None:
        for key in self.values:
            if key not in known:
                raise self.error(f"unknown key (expected one of {', '.join(known)})", key)

    def has(self, key: str) -> bool:
        return key in self.values

    def raw(self, key: str) -> str:
        return self.values[key].strip()

    def get_str(self, key: str, default: str) -> str:
        return self.raw(key) if self.has(key) else default

    def get_int(self, key: str, default: int | None) -> int | None:
        if not self.has(key):
            return default
        try:
            return int(self.raw(key))
        except ValueError:
            raise self.error(f"expected an integer, got {self.raw(key)!r}", key) from None

    def get_float(self, key: str, default: float | None) -> float | None:
        if not self.has(key):
            return default
        try:
            return float(self.raw(key))
        except ValueError:
            raise self.error(f"expected a number, got {self.raw(key)!r}", key) from None

    def get_bool(self, key: str, default: bool) -> bool:
        if not self.has(key):
            return default
        raw = self.raw(key)
        if raw == "true":
            return True
        if raw == "false":
            return False
        raise self.error(f"expected true or false, got {raw!r}", key)

    def get_list(self, key: str, default: tuple[str, ...]) -> tuple[str, ...]:
        if not self.has(key):
            return default
        items = tuple(part.strip() for part in self.raw(key).split(","))
        if any(not part for part in items):
            raise self.error("list has an empty element", key)
        return items

    def get_choice(self, key: str, choices: dict[str, object], default):
        if not self.has(key):
            return default
        raw = self.raw(key)
        if raw not in choices:
            raise self.error(
                f"expected one of {', '.join(sorted(choices))}, got {raw!r}", key)
        return choices[raw]


def parse_config(text: str, overrides: dict[str, str] | None = None) -> AnalysisConfig:
    """Parse config text into a validated :class:`AnalysisConfig`.

    ``overrides`` maps dotted ``section.key`` names to raw string values and
    is applied before validation, mirroring the CLI ``--set`` flag.

    Raises
    ------
    ConfigError
        On syntax errors, unknown sections or keys, missing required keys,
        or out-of-range values; the error carries section/key/line context.
    """
    raw = _raw_parse(text)
    if overrides:
        for dotted, value in overrides.items():
            if dotted.count(".") != 1:
                raise ConfigError(f"override {dotted!r} must look like section.key")
            section, key = dotted.split(".")
            raw.setdefault(section, {})[key] = value

    known_sections = ("data", "model", "analysis", "mcmc", "output", "simulate")
    for section in raw:
        if section not in known_sections:
            raise ConfigError(
                f"unknown section (expected one of {', '.join(known_sections)})",
                section=section)

    data = _parse_data(raw.get("data"))
    model = _parse_model(raw.get("model"))
    analysis = _parse_analysis(raw.get("analysis"))
    mcmc = _parse_mcmc(raw.get("mcmc"))
    output = _parse_output(raw.get("output"))
    simulate = _parse_simulate(raw.get("simulate"))
    return AnalysisConfig(analysis=analysis, data=data, model=model,
                          mcmc=mcmc, output=output, simulate=simulate)


def _parse_data(values: dict[str, str] | None) -> DataConfig | None:
    if values is None:
        return None
    sec = _Section("data", values)
    sec.reject_unknown(("format", "counts", "files", "names", "systems", "pool"))
    mode = sec.get_choice("format", {m.value: m for m in ObservationMode}, None)
    if mode is None:
        raise sec.error("missing required key", "format")
    systems = sec.get_list("systems", ("system1", "system2"))
    if len(systems) != 2 or systems[0] == systems[1]:
        raise sec.error("expected two distinct system names", "systems")
    names = sec.get_list("names", ())
    files = sec.get_list("files", ())
    counts = None
    if sec.has("counts"):
        counts = _parse_counts(sec)
    if (counts is None) == (len(files) == 0):
        raise sec.error("exactly one of counts and files must be given", "counts")
    if counts is not None and mode is not ObservationMode.AGGREGATE:
        raise sec.error("inline counts require aggregate format", "counts")
    if counts is not None and len(names) > 1:
        raise sec.error("inline counts describe a single dataset", "names")
    if files and names and len(names) != len(files):
        raise sec.error(f"expected {len(files)} names for {len(files)} files", "names")
    pool = sec.get_bool("pool", False)
    return DataConfig(mode=mode, counts=counts, files=files, names=names,
                      systems=(systems[0], systems[1]), pool=pool)


def _parse_counts(sec: _Section) -> tuple[tuple[int, int], tuple[int, int]]:
    parts = sec.get_list("counts", ())
    if len(parts) != 2:
        raise sec.error("expected two correct/total pairs", "counts")
    pairs = []
    for part in parts:
        bits = part.split("/")
        try:
            correct, total = (int(b) for b in bits)
        except ValueError:
            raise sec.error(f"expected correct/total, got {part!r}", "counts") from None
        if total < 1 or not 0 <= correct <= total:
            raise sec.error(f"counts {part!r} out of range", "counts")
        pairs.append((correct, total))
    return (pairs[0], pairs[1])


def _parse_model(values: dict[str, str] | None) -> ModelConfig:
    if values is None:
        return ModelConfig()
    sec = _Section("model", values)
    sec.reject_unknown(("prior",))
    if not sec.has("prior"):
        return ModelConfig()
    raw = sec.raw("prior")
    if raw in PRIOR_PRESETS:
        return ModelConfig(prior_label=raw, prior=PRIOR_PRESETS[raw])
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) == 2:
        try:
            alpha, beta = float(parts[0]), float(parts[1])
        except ValueError:
            raise sec.error(f"expected a preset name or 'alpha, beta', got {raw!r}",
                            "prior") from None
        if alpha <= 0 or beta <= 0:
            raise sec.error("prior shape parameters must be positive", "prior")
        return ModelConfig(prior_label="custom", prior=BetaParams(alpha, beta))
    raise sec.error(
        f"expected one of {', '.join(sorted(PRIOR_PRESETS))} or 'alpha, beta', got {raw!r}",
        "prior")


def _parse_analysis(values: dict[str, str] | None) -> AnalysisOptions:
    sec = _Section("analysis", values or {})
    sec.reject_unknown(("seed", "methods", "alpha", "ci_level", "ci_mode",
                        "hdi_mass", "rope_radius", "margin", "direction", "n_mc"))
    seed = sec.get_int("seed", None)
    if seed is None:
        raise sec.error("missing required key (set it here or pass --seed)", "seed")
    if seed < 0:
        raise sec.error("seed must be non-negative", "seed")
    methods = sec.get_list("methods", KNOWN_METHODS)
    for m in methods:
        if m not in KNOWN_METHODS:
            raise sec.error(
                f"unknown method {m!r} (expected a subset of {', '.join(KNOWN_METHODS)})",
                "methods")
    if len(set(methods)) != len(methods):
        raise sec.error("methods must not repeat", "methods")
    alpha = sec.get_float("alpha", 0.05)
    if not 0.0 < alpha < 1.0:
        raise sec.error("alpha must lie in (0, 1)", "alpha")
    ci_level = sec.get_float("ci_level", 0.95)
    if not 0.0 < ci_level < 1.0:
        raise sec.error("ci_level must lie in (0, 1)", "ci_level")
    ci_mode = sec.get_choice("ci_mode", {m.value: m for m in CiMode},
                             CiMode.STANDARD_TWO_SIDED)
    hdi_mass = sec.get_float("hdi_mass", 0.95)
    if not 0.0 < hdi_mass <= 1.0:
        raise sec.error("hdi_mass must lie in (0, 1]", "hdi_mass")
    rope_radius = sec.get_float("rope_radius", 0.01)
    if not 0.0 < rope_radius < 1.0:
        raise sec.error("rope_radius must lie in (0, 1)", "rope_radius")
    margin = sec.get_float("margin", 0.01)
    if not -1.0 <= margin <= 1.0:
        raise sec.error("margin must lie in [-1, 1]", "margin")
    direction = sec.get_choice("direction", {d.value: d for d in Direction},
                               Direction.GREATER)
    n_mc = sec.get_int("n_mc", 100_000)
    if n_mc < 1000:
        raise sec.error("n_mc must be at least 1000", "n_mc")
    return AnalysisOptions(seed=seed, methods=methods, alpha=alpha,
                           ci_level=ci_level, ci_mode=ci_mode, hdi_mass=hdi_mass,
                           rope_radius=rope_radius, margin=margin,
                           direction=direction, n_mc=n_mc)


def _parse_mcmc(values: dict[str, str] | None) -> McmcOptions:
    if values is None:
        return McmcOptions()
    sec = _Section("mcmc", values)
    sec.reject_unknown(("enabled", "chains", "warmup", "draws", "init"))
    enabled = sec.get_bool("enabled", True)
    chains = sec.get_int("chains", 4)
    if chains < 2:
        raise sec.error("need at least 2 chains", "chains")
    warmup = sec.get_int("warmup", 1000)
    if warmup < 0:
        raise sec.error("warmup must be non-negative", "warmup")
    draws = sec.get_int("draws", 5000)
    if draws < 1:
        raise sec.error("draws must be positive", "draws")
    init = sec.get_choice("init", {s.value: s for s in InitStrategy},
                          InitStrategy.MLE_JITTER)
    return McmcOptions(enabled=enabled, chains=chains, warmup=warmup,
                       draws=draws, init=init)


def _parse_output(values: dict[str, str] | None) -> OutputConfig:
    if values is None:
        return OutputConfig()
    sec = _Section("output", values)
    sec.reject_unknown(("report", "plot_dir", "trace_dir", "sim_dir"))
    defaults = OutputConfig()
    return OutputConfig(
        report=sec.get_str("report", defaults.report),
        plot_dir=sec.get_str("plot_dir", defaults.plot_dir),
        trace_dir=sec.get_str("trace_dir", defaults.trace_dir),
        sim_dir=sec.get_str("sim_dir", defaults.sim_dir),
    )


def _parse_simulate(values: dict[str, str] | None) -> SimulateConfig:
    if values is None:
        return SimulateConfig()
    sec = _Section("simulate", values)
    sec.reject_unknown(("stopping_successes", "stopping_trials", "stopping_null_rate",
                        "looks_step", "looks_max", "os_alpha", "os_trials", "os_theta",
                        "sweep_epsilon", "sweep_n_mc"))
    defaults = SimulateConfig()
    cfg = SimulateConfig(
        stopping_successes=sec.get_int("stopping_successes", defaults.stopping_successes),
        stopping_trials=sec.get_int("stopping_trials", defaults.stopping_trials),
        stopping_null_rate=sec.get_float("stopping_null_rate", defaults.stopping_null_rate),
        looks_step=sec.get_int("looks_step", defaults.looks_step),
        looks_max=sec.get_int("looks_max", defaults.looks_max),
        os_alpha=sec.get_float("os_alpha", defaults.os_alpha),
        os_trials=sec.get_int("os_trials", defaults.os_trials),
        os_theta=sec.get_float("os_theta", defaults.os_theta),
        sweep_epsilon=sec.get_float("sweep_epsilon", defaults.sweep_epsilon),
        sweep_n_mc=sec.get_int("sweep_n_mc", defaults.sweep_n_mc),
    )
    checks = [
        ("stopping_trials", cfg.stopping_trials >= 1),
        ("stopping_successes", 0 <= cfg.stopping_successes <= cfg.stopping_trials),
        ("stopping_null_rate", 0.0 < cfg.stopping_null_rate <= 1.0),
        ("looks_step", cfg.looks_step >= 2),
        ("looks_max", cfg.looks_max >= cfg.looks_step),
        ("os_alpha", 0.0 < cfg.os_alpha < 1.0),
        ("os_trials", cfg.os_trials >= 1),
        ("os_theta", 0.0 < cfg.os_theta < 1.0),
        ("sweep_epsilon", 0.0 < cfg.sweep_epsilon < 1.0),
        ("sweep_n_mc", cfg.sweep_n_mc >= 1000),
    ]
    for key, ok in checks:
        if not ok:
            raise sec.error("value out of range", key)
    return cfg


def parse_config_file(path, overrides: dict[str, str] | None = None) -> AnalysisConfig:
    """Read and parse a config file; relative data paths resolve against it."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read config file {p}: {exc}") from exc
    config = parse_config(text, overrides)
    return replace(config, base_dir=str(p.parent))


def render_config(config: AnalysisConfig) -> str:
    """Canonical text form of a config; ``parse_config`` inverts it exactly."""
    lines = []
    if config.data is not None:
        d = config.data
        lines.append("[data]")
        lines.append(f"format = {d.mode.value}")
        lines.append(f"systems = {d.systems[0]}, {d.systems[1]}")
        if d.counts is not None:
            (c1, t1), (c2, t2) = d.counts
            lines.append(f"counts = {c1}/{t1}, {c2}/{t2}")
        if d.files:
            lines.append(f"files = {', '.join(d.files)}")
        if d.names:
            lines.append(f"names = {', '.join(d.names)}")
        lines.append(f"pool = {'true' if d.pool else 'false'}")
        lines.append("")
    m = config.model
    lines.append("[model]")
    if m.prior_label in PRIOR_PRESETS:
        lines.append(f"prior = {m.prior_label}")
    else:
        lines.append(f"prior = {m.prior.alpha!r}, {m.prior.beta!r}")
    lines.append("")
    a = config.analysis
    lines.extend([
        "[analysis]",
        f"seed = {a.seed}",
        f"methods = {', '.join(a.methods)}",
        f"alpha = {a.alpha!r}",
        f"ci_level = {a.ci_level!r}",
        f"ci_mode = {a.ci_mode.value}",
        f"hdi_mass = {a.hdi_mass!r}",
        f"rope_radius = {a.rope_radius!r}",
        f"margin = {a.margin!r}",
        f"direction = {a.direction.value}",
        f"n_mc = {a.n_mc}",
        "",
    ])
    mc = config.mcmc
    lines.extend([
        "[mcmc]",
        f"enabled = {'true' if mc.enabled else 'false'}",
        f"chains = {mc.chains}",
        f"warmup = {mc.warmup}",
        f"draws = {mc.draws}",
        f"init = {mc.init.value}",
        "",
    ])
    o = config.output
    lines.extend([
        "[output]",
        f"report = {o.report}",
        f"plot_dir = {o.plot_dir}",
        f"trace_dir = {o.trace_dir}",
        f"sim_dir = {o.sim_dir}",
        "",
    ])
    s = config.simulate
    lines.append("[simulate]")
    for f_ in fields(SimulateConfig):
        value = getattr(s, f_.name)
        rendered = repr(value) if isinstance(value, float) else str(value)
        lines.append(f"{f_.name} = {rendered}")
    lines.append("")
    return "\n".join(lines)


def load_observations(config: AnalysisConfig) -> ObservationSet:
    """Materialize the observation set a config points at.

    Inline counts become a single aggregate dataset; files are read as CSV
    (UTF-8, LF or CRLF).  When the config asks for pooling, counts are summed
    into one dataset here.  The result has passed :func:`core.validate`.

    Raises
    ------
    ConfigError
        If the config has no [data] section.
    IngestError
        For unreadable or structurally invalid files, with path and row.
    """
    if config.data is None:
        raise ConfigError("a [data] section is required to load observations",
                          section="data")
    d = config.data
    if d.counts is not None:
        name = d.names[0] if d.names else "inline"
        datasets = [DatasetObs(name=name, aggregate=d.counts)]
    else:
        datasets = []
        for i, file_name in enumerate(d.files):
            path = Path(file_name)
            if not path.is_absolute() and config.base_dir is not None:
                path = Path(config.base_dir) / path
            name = d.names[i] if d.names else path.stem
            if d.mode is ObservationMode.AGGREGATE:
                datasets.append(_read_aggregate_csv(path, name, d.systems))
            else:
                datasets.append(_read_per_item_csv(path, name, d.systems))
    obs = ObservationSet(mode=d.mode, datasets=tuple(datasets), system_names=d.systems)
    obs = validate(obs)
    if d.pool:
        obs = pool_datasets(obs)
    return obs


def _open_rows(path: Path):
    try:
        text = path.read_text(encoding="utf-8-sig")
    except OSError as exc:
        raise IngestError(f"cannot read data file: {exc}", path=str(path)) from exc
    return list(csv.reader(io.StringIO(text, newline="")))


def _read_aggregate_csv(path: Path, name: str, systems: tuple[str, str]) -> DatasetObs:
    rows = _open_rows(path)
    if not rows or rows[0] != ["system", "correct", "total"]:
        raise IngestError("expected header 'system,correct,total'", path=str(path), row=1)
    by_system: dict[str, tuple[int, int]] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 3:
            raise IngestError("expected 3 columns", path=str(path), row=lineno)
        system, correct_s, total_s = (cell.strip() for cell in row)
        if system not in systems:
            raise IngestError(f"unknown system {system!r} (expected {systems[0]!r} or {systems[1]!r})",
                              path=str(path), row=lineno)
        if system in by_system:
            raise IngestError(f"system {system!r} appears twice", path=str(path), row=lineno)
        try:
            correct, total = int(correct_s), int(total_s)
        except ValueError:
            raise IngestError("correct and total must be integers",
                              path=str(path), row=lineno) from None
        if total < 1 or not 0 <= correct <= total:
            raise IngestError(f"counts {correct}/{total} out of range",
                              path=str(path), row=lineno)
        by_system[system] = (correct, total)
    for system in systems:
        if system not in by_system:
            raise IngestError(f"no row for system {system!r}", path=str(path))
    return DatasetObs(name=name, aggregate=(by_system[systems[0]], by_system[systems[1]]))


def _read_per_item_csv(path: Path, name: str, systems: tuple[str, str]) -> DatasetObs:
    rows = _open_rows(path)
    if not rows:
        raise IngestError("file is empty", path=str(path))
    header = [cell.strip() for cell in rows[0]]
    if len(header) != 3 or header[0] != "item_id" or set(header[1:]) != set(systems):
        raise IngestError(
            f"expected header 'item_id,{systems[0]},{systems[1]}'", path=str(path), row=1)
    col1 = header.index(systems[0])
    col2 = header.index(systems[1])
    items = []
    seen = set()
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 3:
            raise IngestError("expected 3 columns", path=str(path), row=lineno)
        cells = [cell.strip() for cell in row]
        item_id = cells[0]
        if not item_id:
            raise IngestError("empty item_id", path=str(path), row=lineno)
        if item_id in seen:
            raise IngestError(f"duplicate item_id {item_id!r}", path=str(path), row=lineno)
        seen.add(item_id)
        outcomes = []
        for col in (col1, col2):
            if cells[col] not in ("0", "1"):
                raise IngestError(f"outcomes must be 0 or 1, got {cells[col]!r}",
                                  path=str(path), row=lineno)
            outcomes.append(int(cells[col]))
        items.append((item_id, outcomes[0], outcomes[1]))
    if not items:
        raise IngestError("no data rows", path=str(path))
    return DatasetObs(name=name, per_item=tuple(items))

"""
Monte Carlo experiment runner, presets and result export.
"""
import itertools
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd

from .config import LAYOUTS, ConfigFile, ScenarioConfig, SolverParams
from .exceptions import ConfigError, ExportError, SingularChannelError
from .facade import SOLVER_STREAM_KEYS, SolverOutcome, get_study
from .utils import format_float, join_vector, round_sig

logger = logging.getLogger(__name__)

SOLVER_NAMES = tuple(SOLVER_STREAM_KEYS)
OUTPUT_FORMATS = ("csv", "json")

CSV_COLUMNS = (
    "preset", "point", "sweep", "realization", "seed", "solver", "status", "u",
    "omega_db", "gains_db", "p", "r_sum", "p_sum", "gaip_invocations",
    "resampled", "digest", "error",
)
SUMMARY_COLUMNS = ("point", "sweep", "solver", "mean_u", "std_u", "count", "resampled")

RADII = tuple(float(r) for r in range(100, 1001, 100))

SweepEntry = Tuple[str, Tuple[Any, ...]]


@dataclass(frozen=True)
class ExperimentSpec:
    """
    A full Monte Carlo experiment.

    Sweep entries are ``(name, values)``. A name may list several scenario
    fields separated by commas, in which case every value is a tuple and the
    fields vary together. Sweep points are the Cartesian product of the
    entries in order.
    """

    preset: str
    base_config: ScenarioConfig
    sweep: Tuple[SweepEntry, ...] = ()
    realizations: int = 1
    solvers: Tuple[str, ...] = ("bgaip",)
    seed: int = 0
    params: SolverParams = field(default_factory=SolverParams)
    output_path: Optional[Path] = None
    output_format: str = "csv"
    threads: int = 1
    trace_omega: bool = False
    timing: bool = False

    def __post_init__(self):
        is_valid, problems = self.validate()
        if not is_valid:
            raise ConfigError(f"Invalid experiment: {'; '.join(problems)}")

    def validate(self) -> Tuple[bool, List[str]]:
        """
        Check the experiment settings and every sweep point.

        Returns:
            Tuple of (is_valid, list_of_problems)
        """
        problems = []

        if self.realizations < 1:
            problems.append(f"realizations must be >= 1 (got {self.realizations})")
        if not self.solvers:
            problems.append("at least one solver is required")
        unknown = [s for s in self.solvers if s not in SOLVER_NAMES]
        if unknown:
            problems.append(f"unknown solver(s) {', '.join(unknown)}; choose from {', '.join(SOLVER_NAMES)}")
        if self.output_format not in OUTPUT_FORMATS:
            problems.append(f"output format must be one of {OUTPUT_FORMATS} (got {self.output_format!r})")
        if self.threads < 1:
            problems.append("threads must be >= 1")
        if self.seed < 0:
            problems.append(f"seed must be non-negative (got {self.seed})")

        valid_fields = set(asdict(self.base_config))
        for name, values in self.sweep:
            names = _split_names(name)
            missing = [n for n in names if n not in valid_fields]
            if missing:
                problems.append(f"swept parameter(s) {', '.join(missing)} do not exist")
                continue
            if not values:
                problems.append(f"sweep '{name}' has no values")
            if len(names) > 1 and any(len(_as_tuple(v)) != len(names) for v in values):
                problems.append(f"every value of sweep '{name}' needs {len(names)} entries")
        if problems:
            return False, problems

        try:
            self.points()
        except ConfigError as e:
            problems.append(str(e))
        return len(problems) == 0, problems

    def points(self) -> List[Tuple[Dict[str, Any], ScenarioConfig]]:
        """
        Expand the sweep into (changes, config) pairs.

        Raises:
            ConfigError: If a sweep point yields an invalid configuration
        """
        axes = []
        for name, values in self.sweep:
            names = _split_names(name)
            axes.append([dict(zip(names, _as_tuple(v))) for v in values])

        points = []
        for combo in itertools.product(*axes):
            changes: Dict[str, Any] = {}
            for part in combo:
                changes.update(part)
            points.append((changes, self.base_config.replace(**changes)))
        return points


@dataclass(frozen=True)
class ResultRecord:
    """One solver outcome on one realization of one sweep point."""

    preset: str
    point: int
    sweep: str
    realization: int
    seed: int
    solver: str
    status: str
    u: float
    omega_db: Optional[int]
    gains_db: Tuple[int, ...]
    p: Tuple[float, ...]
    r_sum: float
    p_sum: float
    gaip_invocations: int
    resampled: int
    digest: str
    error: str = ""
    wall_ms: float = 0.0
    omega_trace: Optional[List[Tuple[int, float]]] = None


def _split_names(name: str) -> List[str]:
    return [n.strip() for n in name.split(",") if n.strip()]


def _as_tuple(value: Any) -> Tuple[Any, ...]:
    return tuple(value) if isinstance(value, (list, tuple)) else (value,)


def sweep_label(changes: Dict[str, Any]) -> str:
    """Render sweep-point values as ``name=value;name=value``."""
    parts = []
    for name, value in changes.items():
        text = format_float(value) if isinstance(value, float) else str(value)
        parts.append(f"{name}={text}")
    return ";".join(parts)


def _pairs(*pairs: Tuple[int, int]) -> Tuple[Tuple[int, int], ...]:
    return tuple(pairs)


def _preset_table() -> Dict[str, Dict[str, Any]]:
    dims = [(k, 2 * k) for k in range(1, 11)] + [(k, 2 * k) for k in range(20, 51, 10)]
    km = [(k, 100) for k in (2, 10, 20, 30, 40, 50)] + [(2, m) for m in (5, 10, 25, 50)]
    return {
        "fig3_oracle": dict(
            base={"num_ues": 2, "num_antennas": 4, "layout": "distributed"},
            sweep=(("cell_radius_m", RADII),),
            realizations=100,
            solvers=("bgaip", "brute_force"),
        ),
        "fig4_dimension": dict(
            base={"cell_radius_m": 100.0},
            sweep=(("layout", LAYOUTS), ("num_ues,num_antennas", tuple(dims))),
            realizations=50,
            solvers=("bgaip",),
        ),
        "fig5_km_sweep": dict(
            base={"cell_radius_m": 100.0},
            sweep=(("layout", LAYOUTS), ("num_ues,num_antennas", tuple(km))),
            realizations=20,
            solvers=("bgaip",),
        ),
        "fig6_radius": dict(
            base={"num_ues": 2, "num_antennas": 4},
            sweep=(("layout", LAYOUTS), ("cell_radius_m", RADII)),
            realizations=200,
            solvers=("bgaip",),
        ),
        "fig7_heuristics": dict(
            base={"layout": "distributed"},
            sweep=(("num_ues,num_antennas", _pairs((2, 4), (10, 20))), ("cell_radius_m", RADII)),
            realizations=100,
            solvers=("bgaip", "heuristic_max_gain", "heuristic_max_power"),
        ),
        "fig8_separate": dict(
            base={"num_ues": 2, "num_antennas": 2},
            sweep=(("layout", LAYOUTS), ("cell_radius_m", RADII)),
            realizations=100,
            solvers=("bgaip", "separate_lna"),
        ),
    }


PRESETS = tuple(_preset_table()) + ("custom",)

# Descriptive names accepted in place of the preset names
PRESET_ALIASES = {
    "oracle_gap": "fig3_oracle",
    "dimension": "fig4_dimension",
    "km_sweep": "fig5_km_sweep",
    "radius": "fig6_radius",
    "heuristics": "fig7_heuristics",
    "separate_vs_shared": "fig8_separate",
}


def resolve_preset(name: str) -> str:
    """Canonical preset name for a preset name or alias."""
    name = PRESET_ALIASES.get(name, name)
    if name not in PRESETS:
        choices = ", ".join(PRESETS + tuple(PRESET_ALIASES))
        raise ConfigError(f"Unknown preset '{name}'; choose from {choices}")
    return name


def build_spec(
    preset: str = "custom",
    config_file: Optional[ConfigFile] = None,
    seed: Optional[int] = None,
    realizations: Optional[int] = None,
    solvers: Optional[Sequence[str]] = None,
    **options: Any,
) -> ExperimentSpec:
    """
    Build an experiment from a preset or a configuration file.

    Command-line style overrides take precedence over the configuration file,
    which takes precedence over the preset.

    Args:
        preset: Preset name or alias, or ``custom`` to use only the configuration file
        config_file: Parsed configuration file
        seed: Master seed
        realizations: Realizations per sweep point
        solvers: Solver names
        **options: Remaining ExperimentSpec fields (output_path, threads, ...)

    Returns:
        Validated ExperimentSpec

    Raises:
        ConfigError: On an unknown preset or invalid settings
    """
    table = _preset_table()
    preset = resolve_preset(preset)
    if preset == "custom" and config_file is None:
        raise ConfigError("the custom preset needs a configuration file")

    entry = table.get(preset, dict(base={}, sweep=(), realizations=1, solvers=("bgaip",)))
    if config_file is not None:
        base = config_file.scenario
        params = config_file.solver
        sweep = tuple((n, tuple(v)) for n, v in config_file.sweep) or entry["sweep"]
        count = config_file.realizations or entry["realizations"]
        names = config_file.solvers or entry["solvers"]
    else:
        base = ScenarioConfig.defaults(**entry["base"])
        params = SolverParams()
        sweep, count, names = entry["sweep"], entry["realizations"], entry["solvers"]

    if realizations is not None:
        count = realizations
    if solvers is not None:
        names = tuple(solvers)

    return ExperimentSpec(
        preset=preset,
        base_config=base,
        sweep=tuple(sweep),
        realizations=int(count),
        solvers=tuple(names),
        seed=int(base.rng_seed if seed is None else seed),
        params=params,
        **options,
    )


def _record(spec: ExperimentSpec, point: int, label: str, realization: int,
            outcome: SolverOutcome, resampled: int, digest: str) -> ResultRecord:
    return ResultRecord(
        preset=spec.preset,
        point=point,
        sweep=label,
        realization=realization,
        seed=spec.seed,
        solver=outcome.solver,
        status=outcome.status,
        u=outcome.u,
        omega_db=outcome.omega_db,
        gains_db=outcome.gains_db,
        p=outcome.p,
        r_sum=outcome.r_sum,
        p_sum=outcome.p_sum,
        gaip_invocations=outcome.gaip_invocations,
        resampled=resampled,
        digest=digest,
        error=outcome.error,
        wall_ms=outcome.wall_ms,
        omega_trace=outcome.trace,
    )


def _run_realization(spec: ExperimentSpec, point: int, label: str,
                     config: ScenarioConfig, realization: int) -> List[ResultRecord]:
    try:
        study = get_study(config, spec.seed, point, realization,
                          params=spec.params, trace_omega=spec.trace_omega)
    except SingularChannelError as e:
        logger.error(f"Point {point} realization {realization}: {e}")
        return [_record(spec, point, label, realization, SolverOutcome.failed(s, "error", str(e)), 0, "")
                for s in spec.solvers]

    digest = study.channel.digest
    records = []
    for solver in spec.solvers:
        try:
            outcome = study.run(solver)
        except Exception as e:
            logger.error(f"Solver '{solver}' crashed on point {point} realization {realization}: {e}",
                         exc_info=True)
            outcome = SolverOutcome.failed(solver, "error", str(e))
        records.append(_record(spec, point, label, realization, outcome, study.resampled, digest))
    return records


def run_experiment(spec: ExperimentSpec) -> List[ResultRecord]:
    """
    Run every solver on every realization of every sweep point.

    Records come back ordered by (point, realization, solver) regardless of
    the number of threads.

    Args:
        spec: Experiment specification

    Returns:
        List of ResultRecord
    """
    points = spec.points()
    logger.info(
        f"Running preset '{spec.preset}': {len(points)} point(s) x {spec.realizations} "
        f"realization(s) x {len(spec.solvers)} solver(s), seed {spec.seed}"
    )

    tasks = [(i, sweep_label(changes), config, r)
             for i, (changes, config) in enumerate(points)
             for r in range(spec.realizations)]

    def work(task):
        return _run_realization(spec, *task)

    if spec.threads > 1:
        with ThreadPoolExecutor(max_workers=spec.threads) as pool:
            batches = list(pool.map(work, tasks))
    else:
        batches = [work(t) for t in tasks]

    records = [rec for batch in batches for rec in batch]
    failed = sum(1 for rec in records if rec.status != "ok")
    logger.info(f"Finished preset '{spec.preset}': {len(records)} record(s), {failed} not ok")
    return records


def summarize(records: Sequence[ResultRecord]) -> pd.DataFrame:
    """
    Per sweep point and solver: mean, sample std and count of U over ok records.

    Groups with a single ok record get std 0 and groups without any get
    mean 0 and count 0. ``resampled`` sums the singular draws discarded.

    Raises:
        ValueError: If ``records`` is empty
    """
    if not records:
        raise ValueError("cannot summarize an empty record list")

    df = pd.DataFrame([{"point": r.point, "sweep": r.sweep, "solver": r.solver,
                        "status": r.status, "u": r.u, "resampled": r.resampled} for r in records])
    keys = ["point", "sweep", "solver"]
    base = df.groupby(keys, sort=False).agg(resampled=("resampled", "sum")).reset_index()
    stats = (df[df["status"] == "ok"].groupby(keys, sort=False)["u"]
             .agg(mean_u="mean", std_u="std", count="count").reset_index())

    summary = base.merge(stats, on=keys, how="left")
    summary["mean_u"] = summary["mean_u"].fillna(0.0)
    summary["std_u"] = summary["std_u"].fillna(0.0)
    summary["count"] = summary["count"].fillna(0).astype(int)
    return summary[list(SUMMARY_COLUMNS)]


def _trace_text(trace: Optional[List[Tuple[int, float]]]) -> str:
    if not trace:
        return ""
    return ";".join(f"{g}:{format_float(u)}" for g, u in trace)


def records_frame(records: Sequence[ResultRecord], timing: bool = False,
                  trace: bool = False) -> pd.DataFrame:
    """Records as a DataFrame with the exported CSV columns."""
    rows = []
    for r in records:
        row = {
            "preset": r.preset,
            "point": r.point,
            "sweep": r.sweep,
            "realization": r.realization,
            "seed": r.seed,
            "solver": r.solver,
            "status": r.status,
            "u": r.u,
            "omega_db": "" if r.omega_db is None else str(r.omega_db),
            "gains_db": ";".join(str(g) for g in r.gains_db),
            "p": join_vector(r.p),
            "r_sum": r.r_sum,
            "p_sum": r.p_sum,
            "gaip_invocations": r.gaip_invocations,
            "resampled": r.resampled,
            "digest": r.digest,
            "error": r.error,
        }
        if timing:
            row["wall_ms"] = r.wall_ms
        if trace:
            row["omega_trace"] = _trace_text(r.omega_trace)
        rows.append(row)

    columns = list(CSV_COLUMNS) + (["wall_ms"] if timing else []) + (["omega_trace"] if trace else [])
    return pd.DataFrame(rows, columns=columns)


def _json_record(r: ResultRecord, timing: bool, trace: bool) -> Dict[str, Any]:
    out = {
        "preset": r.preset,
        "point": r.point,
        "sweep": r.sweep,
        "realization": r.realization,
        "seed": r.seed,
        "solver": r.solver,
        "status": r.status,
        "u": round_sig(r.u),
        "omega_db": r.omega_db,
        "gains_db": list(r.gains_db),
        "p": [round_sig(x) for x in r.p],
        "r_sum": round_sig(r.r_sum),
        "p_sum": round_sig(r.p_sum),
        "gaip_invocations": r.gaip_invocations,
        "resampled": r.resampled,
        "digest": r.digest,
        "error": r.error,
    }
    if timing:
        out["wall_ms"] = round_sig(r.wall_ms)
    if trace:
        out["omega_trace"] = [[g, round_sig(u)] for g, u in (r.omega_trace or [])]
    return out


def summary_path(path: Path) -> Path:
    """Sidecar summary path ``<stem>.summary<suffix>``."""
    return path.with_name(f"{path.stem}.summary{path.suffix}")


def export(
    records: Sequence[ResultRecord],
    fmt: str,
    path: Union[str, Path],
    timing: bool = False,
    trace: bool = False,
) -> List[Path]:
    """
    Write records and their summary.

    Args:
        records: Records to write
        fmt: ``csv`` or ``json``
        path: Output file
        timing: Include the wall-time column
        trace: Include per-gain traces

    Returns:
        Paths written, records file first

    Raises:
        ConfigError: On an unknown format
        ExportError: If a file cannot be written
    """
    if fmt not in OUTPUT_FORMATS:
        raise ConfigError(f"Unknown output format '{fmt}'")
    path = Path(path)
    side = summary_path(path)
    summary = summarize(records)

    try:
        if fmt == "csv":
            records_frame(records, timing, trace).to_csv(
                path, index=False, float_format="%.12g", lineterminator="\n")
            summary.to_csv(side, index=False, float_format="%.12g", lineterminator="\n")
        else:
            with path.open("w", encoding="utf-8") as fh:
                json.dump([_json_record(r, timing, trace) for r in records], fh, indent=2)
                fh.write("\n")
            rows = [{k: (round_sig(v) if isinstance(v, float) else v) for k, v in row.items()}
                    for row in summary.to_dict(orient="records")]
            with side.open("w", encoding="utf-8") as fh:
                json.dump(rows, fh, indent=2, default=int)
                fh.write("\n")
    except OSError as e:
        raise ExportError(f"Cannot write results to {path}: {e}") from e

    logger.info(f"Wrote {len(records)} record(s) to {path} and summary to {side}")
    return [path, side]

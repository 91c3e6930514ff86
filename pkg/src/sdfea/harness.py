"""Experiment configs, parallel seeded runs, aggregation and CSV output.

Config schema (TOML)::

    seed = 1                 # master seed
    repetitions = 200        # runs per (point, algorithm)
    budget = 1000000000      # evaluations per run
    threads = 1
    n = 100                  # integer or list of integers (sweep)
    out = "results"          # optional default output directory

    [function]
    name = "jump"
    k = [4, 5, 6]            # a list sweeps the parameter
    delta = 4

    [[algorithms]]
    name = "sd-fea"
    label = "sd-fea-b1.5"    # optional; must be unique
    beta = 1.5
    gamma = 0.25
    R = 25

Unknown keys anywhere are errors. Every run gets a seed hashed from the master
seed and its identity (point, algorithm label, run index), and the work is
split by a static strided partition of the run index space, so results do not
depend on the thread count.
"""
from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import logging
import os
import statistics
import sys
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .algorithms import _PARAM_KEYS, DEFAULT_BUDGET, AlgorithmSpec, run_optimizer
from .core import derive_seed
from .fitness import BENCHMARKS, make_function

log = logging.getLogger(__name__)

FUNCTION_PARAM_KEYS = {"onemax": (), "leadingones": (), "jump": ("k", "delta")}

RUN_COLUMNS_HEAD = ("index", "function", "n")
RUN_COLUMNS_TAIL = ("algorithm", "algorithm_params", "run", "seed", "evaluations", "success")
SUMMARY_COLUMNS_TAIL = ("algorithm", "algorithm_params", "runs", "censored",
                        "mean", "std", "median", "min", "max")


class ConfigError(ValueError):
    """Invalid experiment configuration; ``path`` names the offending key."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class ResumeError(RuntimeError):
    """Output directory conflicts with the requested run."""


class PlotDataError(ValueError):
    """Summaries cannot be laid out as a complete table."""


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_number(v) -> bool:
    return (isinstance(v, (int, float)) and not isinstance(v, bool))


def _canonical(params: dict) -> str:
    return ";".join(f"{k}={params[k]}" for k in sorted(params))


@dataclass
class ExperimentConfig:
    function: str
    n: tuple[int, ...]
    algorithms: tuple[AlgorithmSpec, ...]
    function_params: dict[str, Any] = field(default_factory=dict)
    repetitions: int = 200
    seed: int = 0
    budget: int = DEFAULT_BUDGET
    threads: int = 1
    out: str | None = None

    def __post_init__(self):
        self.n = tuple(self.n)
        self.algorithms = tuple(self.algorithms)
        self.validate()

    @property
    def param_names(self) -> tuple[str, ...]:
        return FUNCTION_PARAM_KEYS[self.function]

    def sweep_axes(self) -> list[str]:
        axes = ["n"] if len(self.n) > 1 else []
        return axes + [k for k in self.param_names if isinstance(self.function_params.get(k), list)]

    def points(self) -> list[tuple[int, dict]]:
        """Configuration points in canonical order: ``n`` outermost, then params by name."""
        names = [k for k in self.param_names if k in self.function_params]
        values = [v if isinstance(v, list) else [v] for v in (self.function_params[k] for k in names)]
        return [(n, dict(zip(names, combo))) for n in self.n for combo in itertools.product(*values)]

    def labels(self) -> list[str]:
        return [a.display_label for a in self.algorithms]

    def validate(self) -> None:
        if self.function not in BENCHMARKS:
            raise ConfigError("function.name", f"unknown function {self.function!r}; "
                              f"choose from {sorted(BENCHMARKS)}")
        allowed = FUNCTION_PARAM_KEYS[self.function]
        for key, value in self.function_params.items():
            path = f"function.{key}"
            if key not in allowed:
                raise ConfigError(path, "unknown key")
            vals = value if isinstance(value, list) else [value]
            if not vals:
                raise ConfigError(path, "empty sweep")
            if not all(_is_int(v) for v in vals):
                raise ConfigError(path, "must be an integer or a list of integers")
        if not self.n:
            raise ConfigError("n", "empty sweep")
        for i, n in enumerate(self.n):
            if not _is_int(n) or n < 1:
                raise ConfigError(f"n[{i}]" if len(self.n) > 1 else "n", "must be a positive integer")
        if not _is_int(self.repetitions) or self.repetitions < 1:
            raise ConfigError("repetitions", "must be an integer >= 1")
        if not _is_int(self.seed) or not 0 <= self.seed < 1 << 64:
            raise ConfigError("seed", "must be an integer in [0, 2^64)")
        if not _is_int(self.budget) or self.budget < 1:
            raise ConfigError("budget", "must be an integer >= 1")
        if not _is_int(self.threads) or self.threads < 1:
            raise ConfigError("threads", "must be an integer >= 1")
        if not self.algorithms:
            raise ConfigError("algorithms", "at least one algorithm is required")
        seen = {}
        for i, alg in enumerate(self.algorithms):
            label = alg.display_label
            if label in seen:
                raise ConfigError(f"algorithms[{i}].label",
                                  f"duplicate label {label!r} (also algorithms[{seen[label]}])")
            seen[label] = i
        for n, params in self.points():
            try:
                make_function(self.function, n, **params)
            except ValueError as exc:
                raise ConfigError("function", f"invalid point n={n}, {_canonical(params)}: {exc}") from None
            for i, alg in enumerate(self.algorithms):
                try:
                    alg.build(n)
                except ValueError as exc:
                    raise ConfigError(f"algorithms[{i}]", f"invalid at n={n}: {exc}") from None

    def to_dict(self, *, include_runtime: bool = True) -> dict:
        d: dict[str, Any] = {
            "seed": self.seed,
            "repetitions": self.repetitions,
            "budget": self.budget,
        }
        if include_runtime:
            d["threads"] = self.threads
            if self.out is not None:
                d["out"] = self.out
        d["n"] = self.n[0] if len(self.n) == 1 else list(self.n)
        d["function"] = {"name": self.function, **self.function_params}
        algs = []
        for a in self.algorithms:
            entry = {"name": a.name}
            if a.label is not None:
                entry["label"] = a.label
            entry.update(a.params)
            algs.append(entry)
        d["algorithms"] = algs
        return d

    def fingerprint(self) -> str:
        """Hash of everything that determines the results (not threads or out)."""
        blob = json.dumps(self.to_dict(include_runtime=False), sort_keys=True)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def replace(self, **changes) -> "ExperimentConfig":
        d = dict(function=self.function, n=self.n, algorithms=self.algorithms,
                 function_params=dict(self.function_params), repetitions=self.repetitions,
                 seed=self.seed, budget=self.budget, threads=self.threads, out=self.out)
        d.update(changes)
        return ExperimentConfig(**d)


_TOP_KEYS = {"seed", "repetitions", "budget", "threads", "n", "out", "function", "algorithms"}


def _coerce_int(value, path):
    if _is_int(value):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    raise ConfigError(path, f"expected an integer, got {value!r}")


def parse_config(data: dict) -> ExperimentConfig:
    """Build a config from a parsed TOML document."""
    if not isinstance(data, dict):
        raise ConfigError("", "config must be a table")
    for key in data:
        if key not in _TOP_KEYS:
            raise ConfigError(key, "unknown key")
    if "function" not in data:
        raise ConfigError("function", "missing table")
    if "n" not in data:
        raise ConfigError("n", "missing key")
    if "algorithms" not in data:
        raise ConfigError("algorithms", "missing array of tables")

    fn = data["function"]
    if not isinstance(fn, dict):
        raise ConfigError("function", "must be a table")
    if "name" not in fn:
        raise ConfigError("function.name", "missing key")
    fname = fn["name"]
    if fname not in BENCHMARKS:
        raise ConfigError("function.name", f"unknown function {fname!r}; choose from {sorted(BENCHMARKS)}")
    fparams = {k: v for k, v in fn.items() if k != "name"}

    n = data["n"]
    n_values = n if isinstance(n, list) else [n]
    n_values = [_coerce_int(v, "n") for v in n_values]

    algs_raw = data["algorithms"]
    if not isinstance(algs_raw, list):
        raise ConfigError("algorithms", "must be an array of tables")
    algs = []
    for i, entry in enumerate(algs_raw):
        path = f"algorithms[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError(path, "must be a table")
        if "name" not in entry:
            raise ConfigError(f"{path}.name", "missing key")
        name = entry["name"]
        if name not in _PARAM_KEYS:
            raise ConfigError(f"{path}.name", f"unknown algorithm {name!r}")
        label = entry.get("label")
        if label is not None and not isinstance(label, str):
            raise ConfigError(f"{path}.label", "must be a string")
        params = {}
        for key, value in entry.items():
            if key in ("name", "label"):
                continue
            if key not in _PARAM_KEYS[name]:
                raise ConfigError(f"{path}.{key}", f"unknown parameter for {name!r}")
            if not (_is_number(value) or (key == "R" and isinstance(value, str))):
                raise ConfigError(f"{path}.{key}", f"expected a number, got {value!r}")
            params[key] = value
        algs.append(AlgorithmSpec(name, params, label))

    kwargs = {}
    for key in ("seed", "repetitions", "budget", "threads"):
        if key in data:
            kwargs[key] = _coerce_int(data[key], key)
    if "out" in data:
        if not isinstance(data["out"], str):
            raise ConfigError("out", "must be a string")
        kwargs["out"] = data["out"]
    return ExperimentConfig(function=fname, n=tuple(n_values), algorithms=tuple(algs),
                            function_params=fparams, **kwargs)


def loads_config(text: str) -> ExperimentConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("", f"malformed TOML: {exc}") from None
    return parse_config(data)


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    return loads_config(Path(path).read_text(encoding="utf-8"))


def dump_config(config: ExperimentConfig) -> str:
    return tomli_w.dumps(config.to_dict())


def figure2_preset(reduced: bool = False, seed: int = 1) -> ExperimentConfig:
    """Jump_{k,4} at n=100 for k = 4..13 with the seven algorithm variants.

    ``reduced`` uses k in {4, 6, 8, 10, 12} and 50 repetitions.
    """
    algorithms = (
        AlgorithmSpec("sd-fea", {"beta": 1.25, "gamma": 0.25, "R": 25}, "sd-fea-b1.25"),
        AlgorithmSpec("sd-fea", {"beta": 1.5, "gamma": 0.25, "R": 25}, "sd-fea-b1.5"),
        AlgorithmSpec("sd-fea", {"beta": 2.0, "gamma": 0.25, "R": 25}, "sd-fea-b2"),
        AlgorithmSpec("oea", {}, "oea"),
        AlgorithmSpec("fea", {"beta": 1.5}, "fea-b1.5"),
        AlgorithmSpec("sd-oea", {"R": "n^2"}, "sd-oea"),
        AlgorithmSpec("sd-rls-r", {"R": "n^2"}, "sd-rls-r"),
    )
    ks = [4, 6, 8, 10, 12] if reduced else list(range(4, 14))
    return ExperimentConfig(function="jump", n=(100,), algorithms=algorithms,
                            function_params={"k": ks, "delta": 4},
                            repetitions=50 if reduced else 200, seed=seed, budget=DEFAULT_BUDGET)


# ---------------------------------------------------------------- records

@dataclass(frozen=True)
class RunRecord:
    index: int
    function: str
    n: int
    function_params: tuple[tuple[str, int], ...]
    algorithm: str
    algorithm_params: str
    run: int
    seed: int
    evaluations: int
    success: bool

    def point_key(self):
        return (self.function, self.n, self.function_params, self.algorithm, self.algorithm_params)


@dataclass(frozen=True)
class SummaryRecord:
    function: str
    n: int
    function_params: tuple[tuple[str, int], ...]
    algorithm: str
    algorithm_params: str
    runs: int
    censored: int
    mean: float | None
    std: float | None
    median: float | None
    min: int | None
    max: int | None

    def axis_value(self, name: str):
        return self.n if name == "n" else dict(self.function_params)[name]


@dataclass(frozen=True)
class RunTask:
    index: int
    n: int
    function_params: tuple[tuple[str, int], ...]
    alg_index: int
    run: int
    seed: int


def _alg_param_string(alg: AlgorithmSpec) -> str:
    return _canonical(alg.params)


def enumerate_tasks(config: ExperimentConfig) -> list[RunTask]:
    tasks = []
    index = 0
    for n, params in config.points():
        fp = tuple(sorted(params.items()))
        for a, alg in enumerate(config.algorithms):
            ident = (config.function, n, _canonical(params), alg.display_label, _alg_param_string(alg))
            for rep in range(config.repetitions):
                tasks.append(RunTask(index, n, fp, a, rep, derive_seed(config.seed, *ident, rep)))
                index += 1
    return tasks


def execute_task(config: ExperimentConfig, task: RunTask) -> RunRecord:
    alg = config.algorithms[task.alg_index]
    f = make_function(config.function, task.n, **dict(task.function_params))
    outcome = run_optimizer(alg, f, config.budget, task.seed)
    return RunRecord(task.index, config.function, task.n, task.function_params, alg.display_label,
                     _alg_param_string(alg), task.run, task.seed, outcome.evaluations, outcome.success)


def summarize(records: Iterable[RunRecord]) -> list[SummaryRecord]:
    """One summary per configuration point, in order of first appearance by index.

    Statistics cover successful runs only; ``censored`` counts the others.
    The mean is the exact integer sum divided once, so it is reproducible.
    """
    groups: dict[tuple, list[RunRecord]] = {}
    for rec in sorted(records, key=lambda r: r.index):
        groups.setdefault(rec.point_key(), []).append(rec)
    out = []
    for key, recs in groups.items():
        evals = sorted(r.evaluations for r in recs if r.success)
        censored = sum(1 for r in recs if not r.success)
        if evals:
            mean = sum(evals) / len(evals)
            std = statistics.stdev(evals) if len(evals) > 1 else None
            median = float(statistics.median(evals))
            lo, hi = evals[0], evals[-1]
        else:
            mean = std = median = lo = hi = None
        out.append(SummaryRecord(*key, runs=len(recs), censored=censored, mean=mean, std=std,
                                 median=median, min=lo, max=hi))
    return out


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _param_names(records) -> list[str]:
    names = set()
    for r in records:
        names.update(k for k, _ in r.function_params)
    return sorted(names)


def _write_csv(header: Sequence[str], rows: Iterable[Sequence], path: Path | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)
    text = buf.getvalue()
    if path is not None:
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(text, encoding="utf-8", newline="")
        os.replace(tmp, path)
    return text


def _run_row(rec: RunRecord, names) -> list[str]:
    fp = dict(rec.function_params)
    return ([str(rec.index), rec.function, str(rec.n)] + [_fmt(fp.get(k)) for k in names]
            + [rec.algorithm, rec.algorithm_params, str(rec.run), str(rec.seed),
               str(rec.evaluations), _fmt(rec.success)])


def runs_csv(records: Sequence[RunRecord], path: Path | None = None, names=None) -> str:
    names = _param_names(records) if names is None else names
    header = list(RUN_COLUMNS_HEAD) + names + list(RUN_COLUMNS_TAIL)
    rows = (_run_row(r, names) for r in sorted(records, key=lambda r: r.index))
    return _write_csv(header, rows, path)


def summary_csv(summaries: Sequence[SummaryRecord], path: Path | None = None, names=None) -> str:
    names = _param_names(summaries) if names is None else names
    header = ["function", "n"] + names + list(SUMMARY_COLUMNS_TAIL)
    rows = []
    for s in summaries:
        fp = dict(s.function_params)
        rows.append([s.function, str(s.n)] + [_fmt(fp.get(k)) for k in names]
                    + [s.algorithm, s.algorithm_params, str(s.runs), str(s.censored),
                       _fmt(s.mean), _fmt(s.std), _fmt(s.median), _fmt(s.min), _fmt(s.max)])
    return _write_csv(header, rows, path)


def _parse_bool(text: str) -> bool:
    if text not in ("true", "false"):
        raise ValueError(f"bad boolean {text!r}")
    return text == "true"


def read_runs_csv(path: str | os.PathLike, lenient: bool = False) -> list[RunRecord]:
    """Parse a runs file. ``lenient`` skips malformed rows (a partial file
    may end in a torn line); otherwise they raise ``ValueError``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        names = header[len(RUN_COLUMNS_HEAD):len(header) - len(RUN_COLUMNS_TAIL)]
        out = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                if lenient:
                    continue
                raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            head = row[:3]
            params = row[3:3 + len(names)]
            tail = row[3 + len(names):]
            try:
                out.append(RunRecord(int(head[0]), head[1], int(head[2]),
                                     tuple(sorted((k, int(v)) for k, v in zip(names, params) if v != "")),
                                     tail[0], tail[1], int(tail[2]), int(tail[3]), int(tail[4]),
                                     _parse_bool(tail[5])))
            except ValueError:
                if not lenient:
                    raise
    return out


def _opt_float(text):
    return float(text) if text != "" else None


def _opt_int(text):
    return int(text) if text != "" else None


def read_summary_csv(path: str | os.PathLike) -> list[SummaryRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        names = header[2:len(header) - len(SUMMARY_COLUMNS_TAIL)]
        out = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            params = row[2:2 + len(names)]
            t = row[2 + len(names):]
            out.append(SummaryRecord(row[0], int(row[1]),
                                     tuple(sorted((k, int(v)) for k, v in zip(names, params) if v != "")),
                                     t[0], t[1], int(t[2]), int(t[3]), _opt_float(t[4]),
                                     _opt_float(t[5]), _opt_float(t[6]), _opt_int(t[7]), _opt_int(t[8])))
    return out


# ---------------------------------------------------------------- execution

class _PartialWriter:
    """Appends finished runs to ``runs.partial.csv`` so an interrupted run can resume."""

    def __init__(self, path: Path, names: list[str]):
        self.lock = threading.Lock()
        new = not path.exists() or path.stat().st_size == 0
        self.fh = open(path, "a", newline="", encoding="utf-8")
        self.names = names
        self.writer = csv.writer(self.fh, lineterminator="\n")
        if new:
            self.writer.writerow(list(RUN_COLUMNS_HEAD) + names + list(RUN_COLUMNS_TAIL))
            self.fh.flush()

    def write(self, rec: RunRecord):
        with self.lock:
            self.writer.writerow(_run_row(rec, self.names))
            self.fh.flush()

    def close(self):
        self.fh.close()


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list[RunRecord]
    summaries: list[SummaryRecord]
    out: Path | None = None


MANIFEST = "manifest.json"


def _prepare_output(out: Path, config: ExperimentConfig, resume: bool) -> None:
    manifest_path = out / MANIFEST
    if out.exists() and any(out.iterdir()):
        if not resume:
            raise ResumeError(f"output directory {out} is not empty; use --resume to continue it")
        if not manifest_path.exists():
            raise ResumeError(f"{out} has no {MANIFEST}; refusing to mix with unknown content")
        try:
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ResumeError(f"cannot read {manifest_path}: {exc}") from None
        if manifest.get("fingerprint") != config.fingerprint():
            raise ResumeError(f"{out} was produced by a different configuration "
                              f"(fingerprint {manifest.get('fingerprint')!r})")
        return
    out.mkdir(parents=True, exist_ok=True)
    manifest = {"fingerprint": config.fingerprint(), "runs": len(enumerate_tasks(config))}
    (out / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    (out / "config.toml").write_text(dump_config(config.replace(out=None)), encoding="utf-8")


def run_experiment(config: ExperimentConfig, out: str | os.PathLike | None = None,
                   threads: int | None = None, resume: bool = False,
                   progress: bool = False) -> ExperimentResult:
    """Execute every (point, algorithm, repetition) run and aggregate.

    With ``out`` the directory receives ``runs.csv``, ``summary.csv``,
    ``config.toml`` and ``manifest.json``. A non-empty directory is refused
    unless ``resume`` is set and its manifest matches this configuration;
    resumed runs are taken from ``runs.partial.csv`` (or a finished
    ``runs.csv``) after their seeds are checked.
    """
    threads = config.threads if threads is None else int(threads)
    if threads < 1:
        raise ConfigError("threads", "must be an integer >= 1")
    tasks = enumerate_tasks(config)
    names = sorted(config.function_params)

    done: dict[int, RunRecord] = {}
    writer = None
    out_path = None
    if out is not None:
        out_path = Path(out)
        _prepare_output(out_path, config, resume)
        for fname in ("runs.csv", "runs.partial.csv"):
            p = out_path / fname
            if p.exists():
                for rec in read_runs_csv(p, lenient=fname == "runs.partial.csv"):
                    if 0 <= rec.index < len(tasks) and rec.seed == tasks[rec.index].seed:
                        done[rec.index] = rec
                    else:
                        raise ResumeError(f"{p}: record {rec.index} does not match this configuration")
        writer = _PartialWriter(out_path / "runs.partial.csv", names)

    pending = [t for t in tasks if t.index not in done]
    if done:
        log.info("resuming: %d of %d runs already present", len(done), len(tasks))
    lock = threading.Lock()
    counter = [len(done)]
    step = max(1, len(tasks) // 100)

    def worker(part: list[RunTask]) -> list[RunRecord]:
        recs = []
        for task in part:
            rec = execute_task(config, task)
            recs.append(rec)
            if writer is not None:
                writer.write(rec)
            if progress:
                with lock:
                    counter[0] += 1
                    if counter[0] % step == 0 or counter[0] == len(tasks):
                        log.info("%d/%d runs", counter[0], len(tasks))
        return recs

    parts = [pending[i::threads] for i in range(threads)]
    try:
        if threads == 1:
            results = [worker(parts[0])]
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(worker, parts))
    finally:
        if writer is not None:
            writer.close()
    for recs in results:
        for rec in recs:
            done[rec.index] = rec

    records = [done[i] for i in range(len(tasks))]
    summaries = summarize(records)
    if out_path is not None:
        runs_csv(records, out_path / "runs.csv", names)
        summary_csv(summaries, out_path / "summary.csv", names)
        partial = out_path / "runs.partial.csv"
        if partial.exists():
            partial.unlink()
    return ExperimentResult(config, records, summaries, out_path)


# ---------------------------------------------------------------- plot data

def plot_table(summaries: Sequence[SummaryRecord]) -> tuple[list[str], list[list[str]]]:
    """Header and rows: axis columns, then one mean column per algorithm label.

    Axis columns are those of ``n`` and the function parameters that vary
    across the summaries (all of them when nothing varies). An algorithm
    whose runs were all censored gets ``nan``.
    """
    if not summaries:
        raise PlotDataError("no summaries to lay out")
    functions = {s.function for s in summaries}
    if len(functions) > 1:
        raise PlotDataError(f"summaries mix functions {sorted(functions)}")
    param_sets = {tuple(k for k, _ in s.function_params) for s in summaries}
    if len(param_sets) > 1:
        raise PlotDataError(f"summaries have inconsistent parameter columns {sorted(param_sets)}")
    candidates = ["n"] + list(next(iter(param_sets)))
    axes = [a for a in candidates if len({s.axis_value(a) for s in summaries}) > 1] or candidates

    labels: list[str] = []
    for s in summaries:
        if s.algorithm not in labels:
            labels.append(s.algorithm)
    cells: dict[tuple, SummaryRecord] = {}
    for s in summaries:
        key = (tuple(s.axis_value(a) for a in axes), s.algorithm)
        if key in cells:
            raise PlotDataError(f"duplicate cell {s.algorithm} at "
                                + ", ".join(f"{a}={v}" for a, v in zip(axes, key[0])))
        cells[key] = s
    points = sorted({k[0] for k in cells})
    rows = []
    for p in points:
        row = [str(v) for v in p]
        for label in labels:
            s = cells.get((p, label))
            if s is None:
                raise PlotDataError(f"missing cell: algorithm {label} at "
                                    + ", ".join(f"{a}={v}" for a, v in zip(axes, p)))
            row.append(repr(s.mean) if s.mean is not None else "nan")
        rows.append(row)
    return axes + labels, rows


def emit_plot_data(summaries: Sequence[SummaryRecord], path: str | os.PathLike | None = None) -> str:
    header, rows = plot_table(summaries)
    return _write_csv(header, rows, Path(path) if path is not None else None)

"""Monte Carlo sweeps over connectivity graphs, sizes, cycles and error rates.

Every (cg, cols, cycle, error rate, crosstalk) cell is compiled once per
master seed and then simulated for ``trials`` trajectories with seeds from
``derive_seed``. Rows are written in a fixed cell order, so a rerun with the
same config reproduces every CSV byte for byte.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .arch import MAX_COLS, MIN_COLS, ConnectivityGraph, Variant, average_degree, build_cg, load_custom_cg
from .bench import OUTCOMES, SUCCESS, I3Partition, bell_expectation, classify_codes, esp, syndrome_code, syndromes, tripartite_mi
from .circuits import MAX_CYCLES, ame62_circuit, qed412_circuit
from .compiler import CompiledCircuit, compile_circuit
from .ir import HardwareProfile
from .noise import ErrorEvent, NoiseParamsQ, NoiseParamsTN
from .trajectory import DEFAULT_CHUNK, NoiseModel, run_trajectories

log = logging.getLogger(__name__)

EXPERIMENTS = ("ame", "qed", "i3", "crosstalk")
DEFAULT_TRIALS = {"ame": 10_000, "qed": 20_000, "i3": 2_000, "crosstalk": 2_000}
DEFAULT_RATES = {"ame": [1e-4], "qed": [1e-4], "i3": [0.01], "crosstalk": [0.01, 0.03, 0.05, 0.08]}
# data qubits d1, d2, d3; the measured ancillas end in product states
DEFAULT_PARTITION = {"A": [0], "B": [1], "C": [2]}

COLUMNS = ("experiment", "cg", "cols", "cycle", "error_rate", "crosstalk", "metric", "mean", "stderr", "shuttles", "seed")
SUMMARY_COLUMNS = ("experiment", "cg", "cols", "cycle", "error_rate", "crosstalk", "metric", "mean", "n", "shuttles")

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class ConfigError(ValueError):
    pass


def _mix64(x: int) -> int:
    # splitmix64 finalizer: a bijection on 64-bit words
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def cell_hash(cell) -> int:
    text = cell if isinstance(cell, str) else "|".join(map(str, cell))
    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "little")


def derive_seed(master: int, cell, trial: int) -> int:
    """64-bit seed for one trial of one cell.

    For fixed (master, cell) the map trial -> seed is injective, because it
    composes an odd-multiplier affine step with a bijective mixer.
    """
    base = _mix64(_mix64(master) ^ cell_hash(cell))
    return _mix64(base + (trial * _GOLDEN & _MASK64))


@dataclass
class ExperimentConfig:
    experiment: str
    cgs: list = field(default_factory=lambda: ["CG1", "CG2", "CG3"])
    cols: list = field(default_factory=lambda: list(range(MIN_COLS, MAX_COLS + 1)))
    cycles: list = field(default_factory=lambda: list(range(1, MAX_CYCLES + 1)))
    trials: int | None = None
    seed: int = 0
    seeds: list | None = None
    error_rates: list | None = None
    crosstalk: list | None = None
    noise: dict = field(default_factory=dict)
    profile: dict = field(default_factory=dict)
    sabre_trials: int = 10
    partition: dict = field(default_factory=lambda: dict(DEFAULT_PARTITION))
    custom_cg: dict | None = None
    out_dir: str = "results"
    chunk: int = DEFAULT_CHUNK
    plots: bool = True

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}")
        if self.trials is None:
            self.trials = DEFAULT_TRIALS[self.experiment]
        if int(self.trials) < 1:
            raise ConfigError("trials must be >= 1")
        if self.sabre_trials < 1:
            raise ConfigError("sabre_trials must be >= 1")
        if self.chunk < 1:
            raise ConfigError("chunk must be >= 1")
        if self.error_rates is None:
            self.error_rates = list(DEFAULT_RATES[self.experiment])
        if self.crosstalk is None:
            self.crosstalk = [False, True] if self.experiment == "crosstalk" else [False]
        if self.seeds is None:
            self.seeds = [self.seed]
        try:
            self.cgs = [Variant.parse(c).value for c in self.cgs]
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if "Custom" in self.cgs and self.custom_cg is None:
            raise ConfigError("custom CG requested without a custom_cg edge list")
        if self.experiment == "ame":
            self.cycles = [0]
        elif not self.cycles or any(not 1 <= int(c) <= MAX_CYCLES for c in self.cycles):
            raise ConfigError(f"cycles must lie in [1, {MAX_CYCLES}]")
        if any(not MIN_COLS <= int(c) <= MAX_COLS for c in self.cols) and self.cgs != ["Custom"]:
            raise ConfigError(f"cols must lie in [{MIN_COLS}, {MAX_COLS}]")
        unknown = set(self.noise) - {"p1d", "p1r", "tau1p", "rotation_scope", "post_measurement_noise"}
        if unknown:
            raise ConfigError(f"unknown noise keys {sorted(unknown)}")
        try:
            self.hardware()
            self.i3_partition()
            for rate in self.error_rates:
                self.model(float(rate), False, 1.0)
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        if "experiment" not in data:
            raise ConfigError("config needs an 'experiment' key")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def hardware(self) -> HardwareProfile:
        return HardwareProfile.from_dict(self.profile)

    def i3_partition(self) -> I3Partition:
        p = self.partition
        return I3Partition(tuple(p["A"]), tuple(p["B"]), tuple(p["C"]))

    def model(self, rate: float, xt: bool, xi: float) -> NoiseModel:
        if self.experiment in ("ame", "qed"):
            return NoiseModel("Q", q=NoiseParamsQ(p1d=rate))
        tn = NoiseParamsTN(
            p1r=rate,
            tau1p=self.noise.get("tau1p"),
            crosstalk_enabled=bool(xt),
            xi=xi,
            rotation_scope=self.noise.get("rotation_scope", "operands"),
            post_measurement_noise=self.noise.get("post_measurement_noise", True),
        )
        return NoiseModel("TN", tn=tn)

    def graph(self, cg: str, cols: int) -> ConnectivityGraph:
        if cg == "Custom":
            return load_custom_cg(self.custom_cg)
        return build_cg(cg, cols)

    def cells(self):
        """(seed, cg, cols, cycle, rate, crosstalk) tuples in output order."""
        for seed in self.seeds:
            for cg in self.cgs:
                cols_list = [load_custom_cg(self.custom_cg).cols] if cg == "Custom" else self.cols
                for cols in cols_list:
                    for cycle in self.cycles:
                        for rate in self.error_rates:
                            for xt in self.crosstalk:
                                yield int(seed), cg, int(cols), int(cycle), float(rate), bool(xt)


def _circuit_key(experiment: str) -> str:
    return "ame62" if experiment == "ame" else "qed412"


def _circuit(experiment: str, cycle: int):
    return ame62_circuit() if experiment == "ame" else qed412_circuit(cycle)


_COMPILED: dict = {}


def compile_cell(cfg: ExperimentConfig, seed: int, cg: str, cols: int, cycle: int) -> CompiledCircuit:
    """SABRE placement and routing for one cell, memoized in-process.

    The qed, i3 and crosstalk experiments share one circuit family, so they
    share compiled circuits for equal (seed, cg, cols, cycle).
    """
    name = _circuit_key(cfg.experiment)
    custom = json.dumps(cfg.custom_cg, sort_keys=True) if cg == "Custom" else ""
    key = (seed, name, cg, cols, cycle, cfg.sabre_trials, custom)
    if key not in _COMPILED:
        graph = cfg.graph(cg, cols)
        sabre_seed = derive_seed(seed, ("compile", name, cg, cols, cycle), 0)
        if len(_COMPILED) > 4096:
            _COMPILED.clear()
        _COMPILED[key] = compile_circuit(_circuit(cfg.experiment, cycle), graph, trials=cfg.sabre_trials, seed=sabre_seed)
    return _COMPILED[key]


def _mean_stderr(values) -> tuple[float, float]:
    values = np.asarray(values, dtype=float)
    n = values.size
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((values - mean) ** 2) / (n - 1)
    return mean, math.sqrt(var / n)


@dataclass
class CellResult:
    rows: list
    events: list


def run_cell(cfg: ExperimentConfig, cell, dump_events: bool = False, compiled: CompiledCircuit | None = None) -> CellResult:
    seed, cg, cols, cycle, rate, xt = cell
    cc = compiled if compiled is not None else compile_cell(cfg, seed, cg, cols, cycle)
    profile = cfg.hardware()
    model = cfg.model(rate, xt, average_degree(cc.cg))
    # crosstalk on/off share trial seeds so the comparison is paired
    key = (cfg.experiment, cg, cols, cycle, rate)
    seeds = [derive_seed(seed, key, t) for t in range(cfg.trials)]
    n = cc.n_qubits
    exp = cfg.experiment

    if exp == "ame":
        def reduce(batch, _):
            return {"bell": bell_expectation(batch.states)}
    elif exp == "qed":
        def reduce(batch, _):
            codes = syndrome_code(syndromes(batch.bits)[:, -1, :])
            return {"code": codes}
    else:
        part = cfg.i3_partition()

        def reduce(batch, _):
            return {"i3": tripartite_mi(batch.states, part)}

    chunks = run_trajectories(cc.ops, n, seeds, model, profile, record_events=dump_events, chunk=cfg.chunk,
                              reducer=lambda b, s: (reduce(b, s), b.events))
    per_trial = {k: np.concatenate([c[0][k] for c in chunks]) for k in chunks[0][0]}
    events = [e for c in chunks for e in c[1]]

    base = dict(experiment=exp, cg=cg, cols=cols, cycle=cycle if exp != "ame" else "", error_rate=rate,
                crosstalk=int(xt), shuttles=cc.shuttle_count, seed=seed)
    metrics = {"esp": (esp(cc.ops, profile), 0.0)}
    if exp == "ame":
        metrics["bell"] = _mean_stderr(per_trial["bell"])
    elif exp == "qed":
        labels = classify_codes(per_trial["code"])
        for name in OUTCOMES:
            metric = "ps" if name == SUCCESS else f"rate_{name}"
            metrics[metric] = _mean_stderr(labels == name)
    else:
        metrics["i3"] = _mean_stderr(per_trial["i3"])
    rows = [dict(base, metric=m, mean=v[0], stderr=v[1]) for m, v in metrics.items()]
    tagged = [(cell, e) for e in events]
    return CellResult(rows, tagged)


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.9g}"
    return v


def write_csv(path: Path, rows, columns):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in columns])


def _average(rows, keyfn, drop):
    groups: dict = {}
    for r in rows:
        groups.setdefault(keyfn(r), []).append(r)
    out = []
    for key, rs in groups.items():
        row = dict(rs[0])
        for d in drop:
            row[d] = ""
        row["mean"] = math.fsum(r["mean"] for r in rs) / len(rs)
        row["shuttles"] = math.fsum(r["shuttles"] for r in rs) / len(rs)
        row["n"] = len(rs)
        out.append(row)
    return out


def summarize(rows):
    """Cycle-averaged (per size), size-averaged (per cycle) and per-CG views, averaged over seeds."""
    def k(*names):
        return lambda r: tuple(r[n] for n in names)

    base = ("experiment", "cg", "error_rate", "crosstalk", "metric")
    by_size = _average(rows, k(*base, "cols"), drop=("cycle",))
    by_cycle = _average(rows, k(*base, "cycle"), drop=("cols",))
    by_cg = _average(rows, k(*base), drop=("cols", "cycle"))
    return by_size, by_cycle, by_cg


def _group_job(args):
    cfg, group, dump = args
    seed, cg, cols, cycle = group[0][:4]
    cc = compile_cell(cfg, seed, cg, cols, cycle)
    return [run_cell(cfg, cell, dump, compiled=cc) for cell in group]


def _groups(cells):
    """Consecutive cells sharing one compiled circuit."""
    groups: list[list] = []
    for cell in cells:
        if groups and groups[-1][0][:4] == cell[:4]:
            groups[-1].append(cell)
        else:
            groups.append([cell])
    return groups


def run_experiment(cfg: ExperimentConfig, out_dir=None, threads: int = 1, dump_events: bool = False) -> list[dict]:
    """Run every cell, write the CSVs (and plots) and return the result rows."""
    out = Path(out_dir or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(cfg, g, dump_events) for g in _groups(cfg.cells())]
    rows: list[dict] = []
    events: list = []

    def collect(results):
        for res in results:
            rows.extend(res.rows)
            events.extend(res.events)
            log.info("cell done: %s", res.rows[0] if res.rows else "")

    try:
        if threads > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                for results in pool.map(_group_job, jobs):
                    collect(results)
        else:
            for job in jobs:
                collect(_group_job(job))
    finally:
        # partial results survive an interrupt
        write_outputs(out, cfg, rows, events if dump_events else None)
    return rows


def write_outputs(out: Path, cfg: ExperimentConfig, rows, events=None):
    write_csv(out / "results.csv", rows, COLUMNS)
    by_size, by_cycle, by_cg = summarize(rows)
    write_csv(out / "summary_cycle_averaged.csv", by_size, SUMMARY_COLUMNS)
    write_csv(out / "summary_size_averaged.csv", by_cycle, SUMMARY_COLUMNS)
    write_csv(out / "summary_by_cg.csv", by_cg, SUMMARY_COLUMNS)
    (out / "config.json").write_text(json.dumps(asdict(cfg), indent=2, sort_keys=True) + "\n")
    if events is not None:
        write_events(out / "events.csv", events)
    if cfg.plots and rows:
        from .plots import emit_plots
        emit_plots(rows, out)


def write_events(path: Path, events):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("seed", "cg", "cols", "cycle", "error_rate", "crosstalk", "trial", "op_index", "channel", "gate", "qubits", "angle"))
        for cell, e in events:
            e: ErrorEvent
            seed, cg, cols, cycle, rate, xt = cell
            angle = "" if e.angle is None else f"{e.angle:.17g}"
            w.writerow((seed, cg, cols, cycle, _fmt(rate), int(xt), e.trial, e.op_index, e.channel.value,
                        e.gate.value, " ".join(map(str, e.qubits)), angle))

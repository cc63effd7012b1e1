"""Run configuration: one YAML file with a schema version; unknown keys fail."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from ..analysis.assess import OperatorFamily
from ..harness.model import TrainSpec
from ..search.individual import SearchConfig

SCHEMA_VERSION = 1
SUBJECTS = ("digits", "regression")

# Full-scale search settings (--paper-scale) and the desk-scale defaults.
PAPER_SCALE = {
    "digits": {"popsize": 100, "g_max": 1000, "repop_upper_bound": 10},
    "regression": {"popsize": 12, "g_max": 100, "repop_upper_bound": 2, "archive_threshold": 0.55},
}
DESK_SCALE = {
    "digits": {"popsize": 24, "g_max": 50, "repop_upper_bound": 3},
    "regression": {"popsize": 12, "g_max": 40, "repop_upper_bound": 2, "archive_threshold": 0.2},
}
DEFAULT_TRAIN = {
    "digits": {"hidden_sizes": [32], "activations": ["relu"], "epochs": 30, "learning_rate": 0.1,
               "batch_size": 20, "weight_init": "he_uniform"},
    "regression": {"hidden_sizes": [32], "activations": ["tanh"], "epochs": 100, "learning_rate": 0.1,
                   "batch_size": 20, "weight_init": "he_uniform"},
}
DEFAULT_WEAKNESS = {
    "digits": {"threshold": 0.999, "all_instances": False},
    "regression": {"fraction": 0.5},
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class HarnessConfig:
    n: int = 6
    o: int = 1
    m: int = 5
    base_seed: int = 0
    paired: bool = False

    def __post_init__(self):
        if self.n < 3:
            raise ConfigError("harness.n must be at least 3 (rank-sum test)")
        if not 1 <= self.o <= self.n or not 1 <= self.m <= self.n:
            raise ConfigError("harness.o and harness.m must lie in [1, n]")


@dataclass(frozen=True)
class WeaknessConfig:
    threshold: float = 0.999
    all_instances: bool = False
    fraction: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.threshold <= 1.0:
            raise ConfigError("weakness.threshold must lie in (0, 1]")
        if not 0.0 <= self.fraction < 1.0:
            raise ConfigError("weakness.fraction must lie in [0, 1)")


@dataclass(frozen=True)
class RunConfig:
    subject: str
    output_dir: Path
    train: TrainSpec
    harness: HarnessConfig
    search: SearchConfig
    operators: tuple
    weakness: WeaknessConfig
    run_count: int = 10
    m_sweep: tuple = ()
    seed: int = 0
    scale: str = "desk"
    dataset: str | None = None
    seeds_dir: str | None = None
    source: Path | None = field(default=None, compare=False)

    @property
    def task(self) -> str:
        return "classification" if self.subject == "digits" else "regression"

    @property
    def sweep(self) -> tuple:
        return tuple(self.m_sweep) or (self.harness.m,)

    def run_seeds(self) -> list:
        return [self.seed + r for r in range(self.run_count)]

    def scale_factors(self) -> dict:
        paper = PAPER_SCALE[self.subject]
        return {k: self.search.__dict__[k] / v for k, v in paper.items()}

    def to_dict(self) -> dict:
        s = self.search
        return {
            "schema_version": SCHEMA_VERSION,
            "subject": self.subject,
            "output_dir": str(self.output_dir),
            "scale": self.scale,
            "scale_factors": self.scale_factors(),
            "train": {k: v for k, v in self.train.to_dict().items() if k not in ("rng_seed", "task")},
            "harness": dict(self.harness.__dict__),
            "search": {"popsize": s.popsize, "g_max": s.g_max, "repop_upper_bound": s.repop_upper_bound,
                       "mutation_extent": list(s.mutation_extent), "archive_threshold": s.archive_threshold},
            "operators": [f.to_dict() for f in self.operators],
            "weakness": dict(self.weakness.__dict__),
            "run_count": self.run_count,
            "m_sweep": list(self.sweep),
            "seed": self.seed,
            "dataset": self.dataset,
            "seeds_dir": self.seeds_dir,
        }


_TOP = {"schema_version", "subject", "output_dir", "train", "harness", "search", "operators", "weakness",
        "run_count", "m_sweep", "seed", "dataset", "seeds_dir"}
_SEARCH = {"popsize", "g_max", "repop_upper_bound", "mutation_extent", "archive_threshold"}
_TRAIN = {"hidden_sizes", "activations", "epochs", "learning_rate", "batch_size", "weight_init"}
_OPERATOR = {"operator", "range", "epsilon", "label", "other"}


def _check_keys(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected a mapping")
    extra = sorted(set(d) - allowed)
    if extra:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(extra)}")


def parse_config(raw: dict, base_dir: Path = Path("."), paper_scale: bool = False, seed: int | None = None) -> RunConfig:
    _check_keys(raw, _TOP, "config")
    if raw.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"config: schema_version must be {SCHEMA_VERSION}")
    subject = raw.get("subject")
    if subject not in SUBJECTS:
        raise ConfigError(f"config: subject must be one of {SUBJECTS}")
    if "output_dir" not in raw:
        raise ConfigError("config: output_dir is required")
    out = Path(raw["output_dir"])
    if not out.is_absolute():
        out = base_dir / out

    tr = dict(DEFAULT_TRAIN[subject])
    user_tr = raw.get("train", {})
    _check_keys(user_tr, _TRAIN, "train")
    tr.update(user_tr)
    try:
        train = TrainSpec(task="classification" if subject == "digits" else "regression",
                          **{k: tuple(v) if isinstance(v, list) else v for k, v in tr.items()})
    except ValueError as exc:
        raise ConfigError(f"train: {exc}") from exc

    hz = raw.get("harness", {})
    _check_keys(hz, {"n", "o", "m", "base_seed", "paired"}, "harness")
    harness = HarnessConfig(**hz)

    sr = raw.get("search", {})
    _check_keys(sr, _SEARCH, "search")
    merged = dict(DESK_SCALE[subject])
    merged.update(sr)
    if paper_scale:
        merged.update(PAPER_SCALE[subject])
    if "mutation_extent" in merged:
        merged["mutation_extent"] = tuple(merged["mutation_extent"])
    try:
        search = SearchConfig(**merged)
    except ValueError as exc:
        raise ConfigError(f"search: {exc}") from exc

    ops = raw.get("operators")
    if not ops:
        raise ConfigError("operators: at least one operator is required")
    fams = []
    for i, o in enumerate(ops):
        if isinstance(o, str):
            o = {"operator": o}
        _check_keys(o, _OPERATOR, f"operators[{i}]")
        o = dict(o)
        if "range" in o:
            o["range"] = tuple(o["range"])
        try:
            fams.append(OperatorFamily(**o))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"operators[{i}]: {exc}") from exc
    names = [f.operator for f in fams]
    if len(set(names)) != len(names):
        raise ConfigError("operators: each operator may appear once")

    wk = dict(DEFAULT_WEAKNESS[subject])
    user_wk = raw.get("weakness", {})
    _check_keys(user_wk, {"threshold", "all_instances", "fraction"}, "weakness")
    wk.update(user_wk)
    weakness = WeaknessConfig(**wk)

    run_count = int(raw.get("run_count", 10))
    if run_count < 1:
        raise ConfigError("run_count must be positive")
    m_sweep = tuple(int(m) for m in raw.get("m_sweep", ()))
    if any(not 1 <= m <= harness.n for m in m_sweep):
        raise ConfigError("m_sweep values must lie in [1, harness.n]")

    return RunConfig(
        subject=subject,
        output_dir=out,
        train=train,
        harness=harness,
        search=search,
        operators=tuple(fams),
        weakness=weakness,
        run_count=run_count,
        m_sweep=m_sweep,
        seed=int(raw.get("seed", 0)) if seed is None else int(seed),
        scale="paper" if paper_scale else "desk",
        dataset=raw.get("dataset"),
        seeds_dir=raw.get("seeds_dir"),
    )


def load_config(path, paper_scale: bool = False, seed: int | None = None) -> RunConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    cfg = parse_config(raw or {}, path.parent, paper_scale, seed)
    return replace(cfg, source=path)

"""The five pipeline commands and the artifact layout under ``output_dir``.

    baseline/   original instances, manifest, weak test set
    instances/  trained instance sets keyed by mutation (a cache)
    mutants/    operator searches, generation targets, target instance sets
    augment/    per target, per 1vsM configuration, per run: archive + log
    crossval/   leave-one-out fault detection table
    report/     consolidated CSV/JSON

Runtimes are written to separate ``timing`` files so that every report is
byte-identical across repeated executions with the same seeds.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import shutil
import time
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np

from ..analysis.assess import InstanceCache, KillOracle, search_family
from ..analysis.configsearch import (
    OperatorSearchResult,
    UndefinedScoreError,
    killing_probability,
    likely_equivalent,
    mutation_score,
)
from ..digits.path import load_seed_corpus
from ..harness.data import Dataset, Split, derive_weak_test_set, load_dataset, quality_metric, shipped_dataset
from ..harness.model import load_model, save_model
from ..harness.mutation import ModelInstanceSet, MutationSpec
from ..search.archive_io import load_archive, save_archive
from ..search.domains import DigitDomain, EyeDomain
from ..search.engine import run_search
from .config import RunConfig

log = logging.getLogger("metisforge")


class PipelineError(RuntimeError):
    exit_code = 1


class NoTargetsError(PipelineError):
    exit_code = 2


class MissingArtifactsError(PipelineError):
    exit_code = 3

    def __init__(self, missing):
        self.missing = [str(m) for m in missing]
        super().__init__("missing artifacts:\n  " + "\n  ".join(self.missing))


# ---------------------------------------------------------------- helpers

def _dump_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, sort_keys=True, indent=1, allow_nan=False) + "\n")


def _read_json(path: Path):
    return json.loads(path.read_text())


def _num(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".10g")
    return str(v)


def _write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_num(r.get(h)) for h in header])
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buf.getvalue(), encoding="utf-8")


class Workspace:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.root = Path(cfg.output_dir)
        self.baseline = self.root / "baseline"
        self.instances = self.root / "instances"
        self.mutants = self.root / "mutants"
        self.augment = self.root / "augment"
        self.crossval = self.root / "crossval"
        self.report = self.root / "report"

    def run_dir(self, op: str, m: int, run: int) -> Path:
        return self.augment / op / f"1vs{m}" / f"run_{run:02d}"


def load_subject_dataset(cfg: RunConfig) -> Dataset:
    if cfg.dataset is None:
        return shipped_dataset(cfg.subject)
    p = Path(cfg.dataset)
    if not p.is_absolute() and cfg.source is not None:
        p = cfg.source.parent / p
    if not p.exists():
        raise MissingArtifactsError([p])
    ds = load_dataset(p)
    if ds.task != cfg.task:
        raise PipelineError(f"{p}: dataset task {ds.task!r} does not match subject {cfg.subject!r}")
    return ds


def make_domain(cfg: RunConfig):
    if cfg.subject == "regression":
        return EyeDomain()
    if cfg.seeds_dir is None:
        with resources.as_file(resources.files("metisforge").joinpath("data/seeds")) as d:
            seeds = load_seed_corpus(d)
    else:
        d = Path(cfg.seeds_dir)
        if not d.is_absolute() and cfg.source is not None:
            d = cfg.source.parent / d
        seeds = load_seed_corpus(d)
    if not seeds:
        raise PipelineError("seed corpus is empty")
    return DigitDomain(seeds, cfg.search.mutation_extent)


class Context:
    """Dataset, cached instance sets and the persisted weak test set."""

    def __init__(self, cfg: RunConfig, need_baseline: bool = True):
        self.cfg = cfg
        self.ws = Workspace(cfg)
        self.ds = load_subject_dataset(cfg)
        h = cfg.harness
        self.cache = InstanceCache(self.ds, cfg.train, h.n, h.base_seed, self.ws.instances)
        self.weak = None
        if need_baseline:
            manifest = self.ws.baseline / "manifest.json"
            weak = self.ws.baseline / "weak_test.npz"
            missing = [p for p in (manifest, weak) if not p.exists()]
            if missing:
                raise MissingArtifactsError(missing)
            man = _read_json(manifest)
            models = [load_model(self.ws.baseline / e["file"]) for e in man["instances"]]
            self.cache.put(None, ModelInstanceSet(models, None))
            with np.load(weak, allow_pickle=False) as z:
                self.weak = Split(z["x"], z["y"])

    @property
    def originals(self) -> ModelInstanceSet:
        return self.cache.get(None)

    def oracle(self, split: Split) -> KillOracle:
        return KillOracle(self.cache, split, self.cfg.harness.paired)


def _guard(path: Path, force: bool, what: str) -> None:
    if path.exists():
        if not force:
            raise PipelineError(f"{what} already exists at {path}; rerun with --force to overwrite")
        shutil.rmtree(path)


# ---------------------------------------------------------------- baseline

def cmd_baseline(cfg: RunConfig, force: bool = False) -> dict:
    ctx = Context(cfg, need_baseline=False)
    ws = ctx.ws
    _guard(ws.baseline, force, "baseline")
    originals = ctx.originals
    if cfg.task == "classification":
        weak = derive_weak_test_set(ctx.ds.test, originals, cfg.task, threshold=cfg.weakness.threshold,
                                    all_instances=cfg.weakness.all_instances)
    else:
        weak = derive_weak_test_set(ctx.ds.test, originals, cfg.task, fraction=cfg.weakness.fraction)
    (ws.baseline / "models").mkdir(parents=True)
    rows = []
    for k, m in enumerate(originals.instances):
        f = f"models/instance_{k:02d}.mfm"
        save_model(m, ws.baseline / f)
        rows.append({
            "index": k,
            "seed": cfg.harness.base_seed + k,
            "file": f,
            "fingerprint": m.digest(),
            "metrics": {
                "train": quality_metric(m, ctx.ds.train),
                "test": quality_metric(m, ctx.ds.test),
                "weak": quality_metric(m, weak),
            },
        })
    with open(ws.baseline / "weak_test.npz", "wb") as fh:
        np.savez(fh, x=weak.x, y=weak.y)
    manifest = {
        "subject": cfg.subject,
        "train_spec": cfg.train.to_dict(),
        "n": cfg.harness.n,
        "dataset": {"name": ctx.ds.name, "train": ctx.ds.train.digest(), "test": ctx.ds.test.digest(),
                    "n_train": len(ctx.ds.train), "n_test": len(ctx.ds.test)},
        "weak_test": {"size": len(weak), "digest": weak.digest(), "params": dict(cfg.weakness.__dict__)},
        "instances": rows,
    }
    _dump_json(ws.baseline / "manifest.json", manifest)
    _dump_json(ws.root / "config.resolved.json", cfg.to_dict())
    log.info("baseline: %d instances, weak test set of %d inputs", len(rows), len(weak))
    return manifest


# ---------------------------------------------------------------- mutants

def _target_for(fam, weak: OperatorSearchResult, train: OperatorSearchResult, train_oracle, base):
    """Return ``(status, target MutationSpec or None)`` for one operator."""
    if fam.kind == "continuous":
        if train.never_killed:
            return "likely_equivalent", None
        if weak.all_killed:
            return "killed", None
        s = fam.range[1] if weak.never_killed else weak.boundary
        mu = fam.at(s, base)
        if likely_equivalent(train_oracle, mu):
            return "likely_equivalent", None
        return "target", mu
    if not train.killed_set:
        return "likely_equivalent", None
    weak_keys = {json.dumps(v, sort_keys=True) for v in weak.killed_set}
    open_ = [v for v in train.killed_set if json.dumps(v, sort_keys=True) not in weak_keys]
    if not open_:
        return "killed", None
    return "target", MutationSpec.from_dict(open_[0])


def _ms_or_none(test, train):
    try:
        return mutation_score(test, train)
    except UndefinedScoreError:
        return None


def _describe(res: OperatorSearchResult):
    if res.kind == "continuous":
        return "not_killed" if res.never_killed else res.boundary
    return ";".join(MutationSpec.from_dict(v).key() for v in res.killed_set)


def cmd_mutants(cfg: RunConfig, force: bool = False) -> dict:
    ctx = Context(cfg)
    ws = ctx.ws
    _guard(ws.mutants, force, "mutant results")
    weak_o, test_o, train_o = ctx.oracle(ctx.weak), ctx.oracle(ctx.ds.test), ctx.oracle(ctx.ds.train)
    ops, rows = [], []
    for fam in cfg.operators:
        log.info("mutants: searching %s", fam.operator)
        try:
            weak = search_family(fam, weak_o, cfg.train)
            test = search_family(fam, test_o, cfg.train)
            train = search_family(fam, train_o, cfg.train)
            status, mu = _target_for(fam, weak, train, train_o, cfg.train)
        except (RuntimeError, ValueError) as exc:
            # e.g. a mutated specification that cannot be trained; the operator is reported, not targeted
            log.warning("mutants: %s failed: %s", fam.operator, exc)
            ops.append({"operator": fam.operator, "kind": fam.kind, "family": fam.to_dict(), "status": "failed",
                        "error": str(exc), "searches": None, "ms": {"weak": None, "test": None}, "target": None})
            rows.append({"operator": fam.operator, "kind": fam.kind, "status": "failed"})
            continue
        entry = {
            "operator": fam.operator,
            "kind": fam.kind,
            "family": fam.to_dict(),
            "status": status,
            "searches": {"weak": weak.to_dict(), "test": test.to_dict(), "train": train.to_dict()},
            "ms": {"weak": _ms_or_none(weak, train), "test": _ms_or_none(test, train)},
            "target": None,
        }
        if mu is not None:
            inst = ctx.cache.get(mu)
            tdir = ws.mutants / "targets" / fam.operator
            tdir.mkdir(parents=True, exist_ok=True)
            files = []
            for k, m in enumerate(inst.instances):
                save_model(m, tdir / f"instance_{k:02d}.mfm")
                files.append(f"targets/{fam.operator}/instance_{k:02d}.mfm")
            entry["target"] = {
                "mutation": mu.to_dict(),
                "key": mu.key(),
                "files": files,
                "fingerprints": inst.fingerprints(),
                "weak": weak_o.outcome(mu).to_dict(),
                "train": train_o.outcome(mu).to_dict(),
            }
        ops.append(entry)
        rows.append({
            "operator": fam.operator,
            "kind": fam.kind,
            "status": status,
            "train": _describe(train),
            "weak": _describe(weak),
            "test": _describe(test),
            "ms_weak": entry["ms"]["weak"],
            "ms_test": entry["ms"]["test"],
            "k_weak": _k_weak(entry),
            "target": None if mu is None else mu.key(),
        })
    result = {"subject": cfg.subject, "operators": ops}
    _dump_json(ws.mutants / "results.json", result)
    _write_csv(ws.mutants / "mutants.csv",
               ["operator", "kind", "status", "train", "weak", "test", "ms_weak", "ms_test", "k_weak", "target"], rows)
    targets = [o["operator"] for o in ops if o["target"]]
    if not targets:
        raise NoTargetsError("no generation targets: every operator is either killed by the weak test set "
                             "or likely equivalent (see mutants/mutants.csv)")
    log.info("mutants: targets %s", ", ".join(targets))
    return result


def _k_weak(entry) -> float | None:
    """Killing probability of the weak set for an operator's target."""
    if entry["target"] is None:
        return None
    if entry["kind"] == "discrete":
        return 0.0
    ms = entry["ms"]["weak"]
    return 0.0 if ms is None else ms


def _load_results(ws: Workspace) -> dict:
    p = ws.mutants / "results.json"
    if not p.exists():
        raise MissingArtifactsError([p])
    return _read_json(p)


def _target_instances(ws: Workspace, entry) -> ModelInstanceSet:
    files = [ws.mutants / f for f in entry["target"]["files"]]
    missing = [f for f in files if not f.exists()]
    if missing:
        raise MissingArtifactsError(missing)
    return ModelInstanceSet([load_model(f) for f in files], MutationSpec.from_dict(entry["target"]["mutation"]))


# ---------------------------------------------------------------- augment

def _population_seeds(ws: Workspace, cfg: RunConfig, force: bool) -> list:
    p = ws.augment / "population_seeds.json"
    if p.exists() and not force:
        seeds = _read_json(p)["run_seeds"]
        if len(seeds) >= cfg.run_count:
            return seeds[: cfg.run_count]
    seeds = cfg.run_seeds()
    _dump_json(p, {"run_seeds": seeds})
    return seeds


def _assess(ctx: Context, entry, train: OperatorSearchResult, augmented: Split) -> dict:
    mu = MutationSpec.from_dict(entry["target"]["mutation"])
    oracle = ctx.oracle(augmented)
    fam = next(f for f in ctx.cfg.operators if f.operator == entry["operator"])
    out = {"target_outcome": oracle.outcome(mu).to_dict()}
    if entry["kind"] == "continuous":
        res = search_family(fam, oracle, ctx.cfg.train)
        ms = _ms_or_none(res, train)
        out.update(search=res.to_dict(), ms=ms, k=0.0 if ms is None else ms)
    else:
        out.update(k=1.0 if out["target_outcome"]["killed"] else 0.0)
    return out


def run_one(ctx: Context, entry, mutants: ModelInstanceSet, m: int, run: int, seed: int, force: bool) -> dict:
    cfg, ws = ctx.cfg, ctx.ws
    d = ws.run_dir(entry["operator"], m, run)
    done = d / "DONE"
    if done.exists() and not force:
        return _read_json(d / "result.json")
    if d.exists():
        shutil.rmtree(d)  # a partial run without its marker is redone from scratch
    d.mkdir(parents=True)
    t0 = time.perf_counter()
    domain = make_domain(cfg)
    scfg = replace(cfg.search, rng_seed=int(seed))
    res = run_search(scfg, domain, ctx.originals.head(cfg.harness.o), mutants.head(m), ctx.weak)
    save_archive(res.archive.entries, cfg.subject, d / "archive")
    with open(d / "log.jsonl", "w") as fh:
        for rec in res.log:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    _, extra = load_archive(d / "archive")
    augmented = ctx.weak.concat(extra) if len(extra) else ctx.weak
    train = OperatorSearchResult.from_dict(entry["searches"]["train"])
    result = {
        "operator": entry["operator"],
        "config": f"1vs{m}",
        "run": run,
        "seed": int(seed),
        "inputs": len(res.archive),
        "augmented_size": len(augmented),
        "seed_pool": res.seed_pool_size,
    }
    result.update(_assess(ctx, entry, train, augmented))
    _dump_json(d / "result.json", result)
    _dump_json(d / "timing.json", {"runtime_s": time.perf_counter() - t0})
    done.write_text("complete\n")
    return result


def cmd_augment(cfg: RunConfig, force: bool = False, targets=None) -> dict:
    ctx = Context(cfg)
    ws = ctx.ws
    results = _load_results(ws)
    entries = [e for e in results["operators"] if e["target"]]
    if targets:
        unknown = sorted(set(targets) - {e["operator"] for e in entries})
        if unknown:
            raise NoTargetsError(f"not among the persisted targets: {', '.join(unknown)}")
        entries = [e for e in entries if e["operator"] in targets]
    if not entries:
        raise NoTargetsError("no generation targets persisted; nothing to augment")
    seeds = _population_seeds(ws, cfg, force)
    summary = []
    for entry in entries:
        mutants = _target_instances(ws, entry)
        rows = []
        for m in cfg.sweep:
            runs = []
            for r, seed in enumerate(seeds):
                log.info("augment: %s 1vs%d run %d", entry["operator"], m, r)
                runs.append(run_one(ctx, entry, mutants, m, r, seed, force))
            rows += runs
            summary.append({
                "operator": entry["operator"],
                "kind": entry["kind"],
                "config": f"1vs{m}",
                "runs": len(runs),
                "k_weak": _k_weak(entry),
                "k_augmented": killing_probability([x["k"] for x in runs], "continuous"),
                "killed_runs": sum(1 for x in runs if x["target_outcome"]["killed"]),
                "inputs_mean": float(np.mean([x["inputs"] for x in runs])),
            })
        _write_csv(ws.augment / entry["operator"] / "runs.csv",
                   ["operator", "config", "run", "seed", "inputs", "k", "target_killed"],
                   [dict(x, target_killed=int(x["target_outcome"]["killed"])) for x in rows])
    _write_csv(ws.augment / "summary.csv",
               ["operator", "kind", "config", "runs", "k_weak", "k_augmented", "killed_runs", "inputs_mean"], summary)
    _dump_json(ws.augment / "summary.json", {"rows": summary})
    return {"rows": summary}


# ---------------------------------------------------------------- crossval

def cmd_crossval(cfg: RunConfig) -> dict:
    ctx = Context(cfg)
    ws = ctx.ws
    results = _load_results(ws)
    entries = [e for e in results["operators"] if e["target"]]
    m = cfg.harness.m
    seeds_file = ws.augment / "population_seeds.json"
    if not seeds_file.exists():
        raise MissingArtifactsError([seeds_file])
    runs = range(min(cfg.run_count, len(_read_json(seeds_file)["run_seeds"])))

    def complete(e):
        return all((ws.run_dir(e["operator"], m, r) / "DONE").exists() for r in runs)

    augmented_ops = [e for e in entries if complete(e)]
    if len(augmented_ops) < 2:
        have = ", ".join(e["operator"] for e in augmented_ops) or "none"
        raise MissingArtifactsError([f"augmentation archives (1vs{m}) for at least two operators; found: {have}"])
    archives = {
        e["operator"]: [load_archive(ws.run_dir(e["operator"], m, r) / "archive")[1] for r in runs]
        for e in augmented_ops
    }
    rows, detail = [], []
    for held in entries:
        donors = [op for op in archives if op != held["operator"]]
        if not donors:
            rows.append({"MO": held["operator"], "Inputs": None, "Killed": "skipped"})
            detail.append({"operator": held["operator"], "skipped": "no donor archives", "runs": []})
            continue
        mu = MutationSpec.from_dict(held["target"]["mutation"])
        per_run, killed, sizes = [], 0, []
        for r in runs:
            extra = [archives[op][r] for op in donors if len(archives[op][r])]
            aug = ctx.weak
            for s in extra:
                aug = aug.concat(s)
            n_inputs = len(aug) - len(ctx.weak)
            out = ctx.oracle(aug).outcome(mu)
            killed += out.killed
            sizes.append(n_inputs)
            per_run.append({"run": r, "inputs": n_inputs, "outcome": out.to_dict()})
        rows.append({"MO": held["operator"], "Inputs": float(np.mean(sizes)), "Killed": f"{killed}/{len(runs)}"})
        detail.append({"operator": held["operator"], "donors": donors, "target": mu.key(), "runs": per_run})
    ws.crossval.mkdir(parents=True, exist_ok=True)
    _write_csv(ws.crossval / "crossval.csv", ["MO", "Inputs", "Killed"], rows)
    _dump_json(ws.crossval / "crossval.json", {"config": f"1vs{m}", "rows": detail})
    return {"rows": rows, "detail": detail}


# ---------------------------------------------------------------- report

def cmd_report(cfg: RunConfig) -> dict:
    ws = Workspace(cfg)
    results = _load_results(ws)
    summary_path = ws.augment / "summary.json"
    missing = []
    entries = results["operators"]
    for e in entries:
        if not e["target"]:
            continue
        for m in cfg.sweep:
            for r in range(cfg.run_count):
                p = ws.run_dir(e["operator"], m, r) / "result.json"
                if not p.exists():
                    missing.append(p)
    if missing:
        raise MissingArtifactsError(missing)
    configs = [f"1vs{m}" for m in cfg.sweep]
    main = f"1vs{cfg.harness.m}" if cfg.harness.m in cfg.sweep else configs[0]
    rows, timing = [], []
    ms_weak, ms_aug = [], []
    for e in entries:
        row = {
            "operator": e["operator"],
            "kind": e["kind"],
            "status": e["status"],
            "target": None if not e["target"] else e["target"]["key"],
            "ms_weak": e["ms"]["weak"],
            "k_weak": _k_weak(e),
        }
        if e["searches"] is not None:
            row["train"] = _describe(OperatorSearchResult.from_dict(e["searches"]["train"]))
            row["weak"] = _describe(OperatorSearchResult.from_dict(e["searches"]["weak"]))
        if e["kind"] == "continuous" and e["ms"]["weak"] is not None:
            ms_weak.append(e["ms"]["weak"])
        if e["target"]:
            for m, c in zip(cfg.sweep, configs):
                rs, secs = [], 0.0
                for r in range(cfg.run_count):
                    d = ws.run_dir(e["operator"], m, r)
                    rs.append(_read_json(d / "result.json"))
                    if (d / "timing.json").exists():
                        secs += _read_json(d / "timing.json")["runtime_s"]
                row[f"k_{c}"] = killing_probability([x["k"] for x in rs], "continuous")
                row[f"inputs_{c}"] = float(np.mean([x["inputs"] for x in rs]))
                timing.append({"operator": e["operator"], "config": c, "runs": len(rs), "runtime_s": secs})
        if e["kind"] == "continuous" and e["ms"]["weak"] is not None:
            # operators without a target keep their weak-set score
            ms_aug.append(row[f"k_{main}"] if e["target"] else e["ms"]["weak"])
        rows.append(row)
    header = ["operator", "kind", "status", "target", "train", "weak", "ms_weak", "k_weak"]
    header += [f"k_{c}" for c in configs] + [f"inputs_{c}" for c in configs]
    ws.report.mkdir(parents=True, exist_ok=True)
    _write_csv(ws.report / "report.csv", header, rows)
    _write_csv(ws.report / "report_timing.csv", ["operator", "config", "runs", "runtime_s"], timing)
    overall = {
        "config": main,
        "continuous_ms_weak_mean": float(np.mean(ms_weak)) if ms_weak else None,
        "continuous_ms_augmented_mean": float(np.mean(ms_aug)) if ms_aug else None,
    }
    report = {"subject": cfg.subject, "configs": configs, "rows": rows, "overall": overall,
              "augment_summary": _read_json(summary_path)["rows"] if summary_path.exists() else None}
    _dump_json(ws.report / "report.json", report)
    return report

"""Archives on disk: one input file per entry plus ``manifest.json``.

Digit entries are written as SVG-subset path files with a PGM rendering
alongside; eye entries as chromosome records. Model inputs are always
re-derived from those files, so the files alone define the archive.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from ..digits.path import parse_svg, path_to_svg, write_pgm
from ..digits.raster import rasterize
from ..eyes import EyeChromosome, render_features
from ..harness.data import Split

ARCHIVE_SCHEMA = "metisforge-archive/1"


def _sha(x) -> str:
    return hashlib.sha256(np.ascontiguousarray(x, dtype=np.float64).tobytes()).hexdigest()


def save_archive(entries, subject: str, directory) -> dict:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    rows = []
    for k, e in enumerate(entries):
        row = {
            "index": k,
            "id": int(e.id),
            "seed_origin": e.seed_origin,
            "generation": int(e.generation),
            "f1": float(e.fitness.f1),
            "input_sha256": _sha(e.model_input),
        }
        if subject == "digits":
            svg, pgm = f"entry_{k:03d}.svg", f"entry_{k:03d}.pgm"
            (d / svg).write_text(path_to_svg(e.genotype, f"a{k:03d}", int(e.expected)))
            write_pgm(e.phenotype.grid, d / pgm)
            row.update(expected=int(e.expected), files={"svg": svg, "pgm": pgm})
        else:
            c, noise_seed = e.genotype
            rec = f"entry_{k:03d}.json"
            body = {"chromosome": c.to_record(), "noise_seed": int(noise_seed)}
            (d / rec).write_text(json.dumps(body, sort_keys=True, indent=1) + "\n")
            row.update(expected=[float(v) for v in e.expected], files={"record": rec})
        rows.append(row)
    manifest = {"schema": ARCHIVE_SCHEMA, "subject": subject, "size": len(rows), "entries": rows}
    (d / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=1) + "\n")
    return manifest


def load_archive(directory) -> tuple:
    """Return ``(manifest, Split)`` rebuilt from the entry files."""
    d = Path(directory)
    mpath = d / "manifest.json"
    if not mpath.exists():
        raise FileNotFoundError(f"{mpath}: archive manifest missing")
    manifest = json.loads(mpath.read_text())
    if manifest.get("schema") != ARCHIVE_SCHEMA:
        raise ValueError(f"{mpath}: unknown archive schema {manifest.get('schema')!r}")
    xs, ys = [], []
    for row in manifest["entries"]:
        if manifest["subject"] == "digits":
            rec = parse_svg((d / row["files"]["svg"]).read_text(), str(d / row["files"]["svg"]))
            xs.append(rasterize(rec.model).reshape(-1) / 255.0)
            ys.append(rec.label)
        else:
            body = json.loads((d / row["files"]["record"]).read_text())
            fv = render_features(EyeChromosome.from_record(body["chromosome"]), body["noise_seed"])
            xs.append(fv.model_input())
            ys.append(list(fv.truth))
        if _sha(xs[-1]) != row["input_sha256"]:
            raise ValueError(f"{d}: entry {row['index']} does not reproduce its recorded input")
    if manifest["subject"] == "digits":
        split = Split(np.array(xs).reshape(len(xs), 784), np.array(ys, dtype=np.int64))
    else:
        split = Split(np.array(xs).reshape(len(xs), 34), np.array(ys, dtype=np.float64).reshape(len(ys), 2))
    return manifest, split

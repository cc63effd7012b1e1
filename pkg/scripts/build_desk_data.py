"""Regenerate the shipped desk-scale datasets in src/metisforge/data/.

digits_desk.npz: every corpus seed plus nine random variants of it (three
digit mutations each); the last two variants of every seed form the test
split. regression_desk.npz: 1200 sampled eye chromosomes rendered with
their own noise seed; the last 200 form the test split.
"""
from pathlib import Path

import numpy as np

from metisforge.digits.path import load_seed_corpus, mutate_digit
from metisforge.digits.raster import rasterize
from metisforge.eyes import render_features, sample_chromosome
from metisforge.harness.data import Dataset, Split, save_dataset

DATA = Path(__file__).resolve().parents[1] / "src" / "metisforge" / "data"


def digits():
    recs = load_seed_corpus(DATA / "seeds")
    rng = np.random.default_rng(1)
    x, y, is_test = [], [], []
    for r in recs:
        x.append(rasterize(r.model))
        y.append(r.label)
        is_test.append(False)
        for v in range(9):
            m = r.model
            for _ in range(3):
                m = mutate_digit(m, (1.0, 3.0), rng)
            x.append(rasterize(m))
            y.append(r.label)
            is_test.append(v >= 7)
    x = np.array(x).reshape(len(x), -1) / 255.0
    y = np.array(y, dtype=np.int64)
    t = np.array(is_test)
    return Dataset(Split(x[~t], y[~t]), Split(x[t], y[t]), "classification", "digits")


def regression():
    rng = np.random.default_rng(2)
    x, y = [], []
    for _ in range(1200):
        c = sample_chromosome(rng)
        fv = render_features(c, int(rng.integers(2**31)))
        x.append(fv.model_input())
        y.append(fv.truth)
    x, y = np.array(x), np.array(y)
    return Dataset(Split(x[:1000], y[:1000]), Split(x[1000:], y[1000:]), "regression", "regression")


if __name__ == "__main__":
    for ds in (digits(), regression()):
        save_dataset(ds, DATA / f"{ds.name}_desk.npz")
        print(ds.name, len(ds.train), len(ds.test))

"""Regenerate the shipped seed corpus (src/metisforge/data/seeds).

Source bitmaps are the public 8x8 handwritten digits bundled with
scikit-learn. Each one is upscaled to 20x20, centred on the 28x28 canvas the
way MNIST centres its digits, and traced into a path model.

    python scripts/build_corpus.py [--per-class 5] [--out DIR]
"""
import argparse
from pathlib import Path

import numpy as np
from scipy.ndimage import zoom
from sklearn.datasets import load_digits

from metisforge.digits.path import path_to_svg
from metisforge.digits.raster import rasterize
from metisforge.digits.trace import trace_bitmap

DEFAULT_OUT = Path(__file__).resolve().parents[1] / "src" / "metisforge" / "data" / "seeds"


def to_canvas(img8: np.ndarray) -> np.ndarray:
    big = zoom(img8.astype(np.float64) / 16.0, 2.5, order=3)
    big = np.clip(big, 0.0, 1.0)
    canvas = np.zeros((28, 28))
    canvas[4:24, 4:24] = big
    return np.round(canvas * 255).astype(np.uint8)


def iou(a, b):
    return (a & b).sum() / max((a | b).sum(), 1)


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--per-class", type=int, default=5)
    ap.add_argument("--out", type=Path, default=DEFAULT_OUT)
    ap.add_argument("--min-iou", type=float, default=0.9)
    args = ap.parse_args(argv)
    digits = load_digits()
    args.out.mkdir(parents=True, exist_ok=True)
    for old in args.out.glob("*.svg"):
        old.unlink()
    for label in range(10):
        taken = 0
        for idx in np.flatnonzero(digits.target == label):
            if taken == args.per_class:
                break
            grid = to_canvas(digits.images[idx])
            model = trace_bitmap(grid, 128)
            score = iou(rasterize(model) >= 128, grid >= 128)
            # a digit must trace into one outer contour (plus holes) to be a clean seed
            if score < args.min_iou:
                continue
            sid = f"d{label}_{taken:02d}"
            (args.out / f"{sid}.svg").write_text(path_to_svg(model, sid, label))
            print(f"{sid}: source #{idx}, {sum(model.segment_counts())} segments, IoU {score:.3f}")
            taken += 1


if __name__ == "__main__":
    main()

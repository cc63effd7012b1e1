"""Regenerate src/metisforge/data/eye_schema.json.

Bounds are fixed by hand below; the renderer's mixing constants are drawn
once from a fixed seed and frozen into the file so that rendering never
depends on the numpy RNG implementation at run time.
"""
import json
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "metisforge" / "data" / "eye_schema.json"

GENES = [
    # name, kind, lo, hi  (angles in radians)
    ("head_pitch", "angle", -0.3, 0.3),
    ("head_yaw", "angle", -0.3, 0.3),
    ("eye_pitch", "angle", -0.3, 0.3),
    ("eye_yaw", "angle", -0.3, 0.3),
    ("pupil_size", "float", 0.1, 0.9),
    ("iris_size", "float", 0.9, 1.1),
    ("ambient_intensity", "float", 0.6, 1.2),
    ("exposure", "float", 0.8, 1.3),
    ("light_rotation", "float", -1.0, 1.0),
]
CATEGORICAL = [("iris_texture", 5), ("skin_texture", 5)]
N_FEATURES = 32


def main():
    rng = np.random.default_rng(20210915)
    n = len(GENES)
    linear = rng.normal(0.0, 0.5, (N_FEATURES, n))
    # the gaze angles must be recoverable: give them a stronger linear imprint
    linear[:, 2:4] *= 2.0
    freq = rng.normal(0.0, 1.0, (N_FEATURES, n))
    phase = rng.uniform(-np.pi, np.pi, N_FEATURES)
    amp = rng.uniform(0.1, 0.3, N_FEATURES)
    embed = {name: rng.normal(0.0, 0.3, (k, N_FEATURES)).round(6).tolist() for name, k in CATEGORICAL}
    schema = {
        "schema_version": 1,
        "genes": [{"name": g, "kind": k, "lo": lo, "hi": hi} for g, k, lo, hi in GENES],
        "categorical": [{"name": name, "choices": k} for name, k in CATEGORICAL],
        "renderer": {
            "n_features": N_FEATURES,
            "noise_amplitude": 0.01,
            "linear": linear.round(6).tolist(),
            "freq": freq.round(6).tolist(),
            "phase": phase.round(6).tolist(),
            "amp": amp.round(6).tolist(),
            "embed": embed,
        },
    }
    OUT.write_text(json.dumps(schema, indent=1) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()

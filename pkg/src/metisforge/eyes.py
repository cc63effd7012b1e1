"""Synthetic eye-region domain for the gaze regression subject.

Chromosomes mix angle, float and categorical genes. ``render_features`` is a
fixed, smooth stand-in for an eye renderer: every feature is

    linear[i] . z + amp[i] * sin(freq[i] . z + phase[i])
        + embed_iris[iris_texture][i] + embed_skin[skin_texture][i]
        + noise_amplitude * u_i,          u_i ~ U(-1, 1) from noise_seed

where ``z`` are the continuous genes rescaled to [-1, 1]. The constants live
in ``data/eye_schema.json``.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

CONTINUOUS = (
    "head_pitch", "head_yaw", "eye_pitch", "eye_yaw",
    "pupil_size", "iris_size", "ambient_intensity", "exposure", "light_rotation",
)
CATEGORICAL = ("iris_texture", "skin_texture")
GENES = CONTINUOUS + CATEGORICAL
MUTATION_STEP = 0.10


@dataclass(frozen=True)
class Schema:
    bounds: dict
    kinds: dict
    choices: dict
    linear: np.ndarray
    freq: np.ndarray
    phase: np.ndarray
    amp: np.ndarray
    embed: dict
    noise_amplitude: float
    version: int

    @property
    def n_features(self) -> int:
        return self.linear.shape[0]


@lru_cache(maxsize=None)
def load_schema(path=None) -> Schema:
    if path is None:
        text = resources.files("metisforge").joinpath("data/eye_schema.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    raw = json.loads(text)
    r = raw["renderer"]
    return Schema(
        bounds={g["name"]: (g["lo"], g["hi"]) for g in raw["genes"]},
        kinds={g["name"]: g["kind"] for g in raw["genes"]},
        choices={c["name"]: c["choices"] for c in raw["categorical"]},
        linear=np.array(r["linear"]),
        freq=np.array(r["freq"]),
        phase=np.array(r["phase"]),
        amp=np.array(r["amp"]),
        embed={k: np.array(v) for k, v in r["embed"].items()},
        noise_amplitude=float(r["noise_amplitude"]),
        version=int(raw["schema_version"]),
    )


@dataclass(frozen=True)
class EyeChromosome:
    head_pitch: float
    head_yaw: float
    eye_pitch: float
    eye_yaw: float
    pupil_size: float
    iris_size: float
    ambient_intensity: float
    exposure: float
    light_rotation: float
    iris_texture: int
    skin_texture: int

    def to_record(self) -> dict:
        return asdict(self)

    @classmethod
    def from_record(cls, rec: dict) -> "EyeChromosome":
        unknown = set(rec) - set(GENES)
        if unknown:
            raise ValueError(f"unknown genes: {sorted(unknown)}")
        vals = {g: float(rec[g]) for g in CONTINUOUS}
        vals.update({g: int(rec[g]) for g in CATEGORICAL})
        return cls(**vals)

    def continuous(self) -> np.ndarray:
        return np.array([getattr(self, g) for g in CONTINUOUS])


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    truth: tuple
    head: tuple

    def model_input(self) -> np.ndarray:
        return np.concatenate([self.values, np.asarray(self.head, dtype=np.float64)])


def validate(c: EyeChromosome, schema: Schema | None = None) -> None:
    schema = schema or load_schema()
    for g in CONTINUOUS:
        lo, hi = schema.bounds[g]
        v = getattr(c, g)
        if not (math.isfinite(v) and lo <= v <= hi):
            raise ValueError(f"gene {g}={v} outside [{lo}, {hi}]")
    for g in CATEGORICAL:
        v = getattr(c, g)
        if not 0 <= v < schema.choices[g]:
            raise ValueError(f"gene {g}={v} outside 0..{schema.choices[g] - 1}")


def normalized(c: EyeChromosome, schema: Schema | None = None) -> np.ndarray:
    schema = schema or load_schema()
    lo = np.array([schema.bounds[g][0] for g in CONTINUOUS])
    hi = np.array([schema.bounds[g][1] for g in CONTINUOUS])
    return 2.0 * (c.continuous() - lo) / (hi - lo) - 1.0


def render_features(c: EyeChromosome, noise_seed: int, schema: Schema | None = None) -> FeatureVector:
    schema = schema or load_schema()
    validate(c, schema)
    z = normalized(c, schema)
    vals = schema.linear @ z + schema.amp * np.sin(schema.freq @ z + schema.phase)
    vals = vals + schema.embed["iris_texture"][c.iris_texture] + schema.embed["skin_texture"][c.skin_texture]
    noise = np.random.default_rng(int(noise_seed)).uniform(-1.0, 1.0, schema.n_features)
    vals = vals + schema.noise_amplitude * noise
    return FeatureVector(vals, (c.eye_pitch, c.eye_yaw), (c.head_pitch, c.head_yaw))


def lipschitz_bounds(schema: Schema | None = None) -> dict:
    """Per-gene L2 Lipschitz constant of the noiseless renderer, in raw gene units."""
    schema = schema or load_schema()
    out = {}
    for j, g in enumerate(CONTINUOUS):
        lo, hi = schema.bounds[g]
        dz = 2.0 / (hi - lo)
        out[g] = dz * (np.linalg.norm(schema.linear[:, j]) + np.linalg.norm(schema.amp * schema.freq[:, j]))
    return out


def sample_chromosome(rng, schema: Schema | None = None) -> EyeChromosome:
    schema = schema or load_schema()
    vals = {g: float(rng.uniform(*schema.bounds[g])) for g in CONTINUOUS}
    vals.update({g: int(rng.integers(schema.choices[g])) for g in CATEGORICAL})
    return EyeChromosome(**vals)


def mutate_chromosome(c: EyeChromosome, rng, schema: Schema | None = None) -> EyeChromosome:
    """Change one uniformly chosen gene.

    Continuous genes move by 10% of their range in a random direction and
    are clamped; categorical genes switch to a different category.
    """
    schema = schema or load_schema()
    gene = GENES[int(rng.integers(len(GENES)))]
    rec = c.to_record()
    if gene in CATEGORICAL:
        k = schema.choices[gene]
        shift = int(rng.integers(1, k))
        rec[gene] = (rec[gene] + shift) % k
    else:
        lo, hi = schema.bounds[gene]
        step = MUTATION_STEP * (hi - lo) * (1.0 if rng.integers(2) else -1.0)
        rec[gene] = min(max(rec[gene] + step, lo), hi)
    return EyeChromosome(**rec)


def gaze_vector(pitch: float, yaw: float) -> np.ndarray:
    return np.array([
        -math.cos(pitch) * math.sin(yaw),
        -math.sin(pitch),
        -math.cos(pitch) * math.cos(yaw),
    ])


def angular_error(pred, truth) -> float:
    """Angle in radians between the gaze vectors of two (pitch, yaw) pairs."""
    a, b = gaze_vector(*pred), gaze_vector(*truth)
    # atan2 form stays accurate for small angles, unlike acos of the dot product
    return math.atan2(float(np.linalg.norm(np.cross(a, b))), float(a @ b))

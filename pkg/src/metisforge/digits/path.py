"""Cubic Bezier path model for digits and its SVG-subset text format."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CANVAS = 28.0


class PathFormatError(ValueError):
    pass


@dataclass(frozen=True)
class PathModel:
    """Closed subpaths of cubic segments.

    Each subpath is stored as an array of shape ``(K, 3, 2)`` holding
    ``[start, control1, control2]`` per segment. The end of segment ``k`` is
    the start of segment ``k + 1`` (wrapping), so closure holds by
    construction and shared endpoints are a single point.
    """

    subpaths: tuple

    def __post_init__(self):
        subs = tuple(np.array(s, dtype=np.float64).reshape(-1, 3, 2) for s in self.subpaths)
        if not subs or all(len(s) == 0 for s in subs):
            raise ValueError("path model needs at least one subpath with one segment")
        for i, s in enumerate(subs):
            if len(s) == 0:
                raise ValueError(f"subpath {i} has no segments")
            s.setflags(write=False)
        object.__setattr__(self, "subpaths", subs)

    @classmethod
    def from_segments(cls, subpaths):
        """Build from lists of ``(p0, p1, p2, p3)`` segments.

        Raises if a subpath is not closed (segment ends must chain and the
        last end must return to the first start).
        """
        out = []
        for i, segs in enumerate(subpaths):
            segs = np.asarray(segs, dtype=np.float64).reshape(-1, 4, 2)
            if len(segs) == 0:
                raise ValueError(f"subpath {i} has no segments")
            nxt = np.roll(segs[:, 0], -1, axis=0)
            if not np.allclose(segs[:, 3], nxt, atol=1e-9, rtol=0):
                raise PathFormatError(f"subpath {i} is not closed")
            out.append(segs[:, :3])
        return cls(tuple(out))

    def segments(self) -> np.ndarray:
        """All segments as a ``(K, 8)`` array of ``x0 y0 x1 y1 x2 y2 x3 y3``."""
        rows = []
        for s in self.subpaths:
            ends = np.roll(s[:, 0], -1, axis=0)
            rows.append(np.concatenate([s.reshape(len(s), 6), ends], axis=1))
        return np.ascontiguousarray(np.concatenate(rows, axis=0))

    @property
    def n_points(self) -> int:
        return sum(3 * len(s) for s in self.subpaths)

    def segment_counts(self) -> tuple:
        return tuple(len(s) for s in self.subpaths)

    def points(self) -> np.ndarray:
        return np.concatenate([s.reshape(-1, 2) for s in self.subpaths], axis=0)

    def with_points(self, pts) -> "PathModel":
        pts = np.asarray(pts, dtype=np.float64)
        out, k = [], 0
        for s in self.subpaths:
            n = 3 * len(s)
            out.append(pts[k:k + n].reshape(len(s), 3, 2))
            k += n
        return PathModel(tuple(out))

    def __eq__(self, other):
        if not isinstance(other, PathModel):
            return NotImplemented
        return self.segment_counts() == other.segment_counts() and all(
            np.array_equal(a, b) for a, b in zip(self.subpaths, other.subpaths)
        )

    def __hash__(self):
        return hash(self.points().tobytes())


@dataclass(frozen=True)
class DigitInput:
    grid: np.ndarray
    label: int

    def __post_init__(self):
        g = np.asarray(self.grid)
        if g.shape != (28, 28):
            raise ValueError(f"digit grid must be 28x28, got {g.shape}")
        if g.dtype != np.uint8:
            if g.min() < 0 or g.max() > 255:
                raise ValueError("intensities must lie in [0, 255]")
            g = g.astype(np.uint8)
        object.__setattr__(self, "grid", g)


@dataclass(frozen=True)
class SeedRecord:
    id: str
    model: PathModel = field(compare=False)
    label: int


def mutate_digit(model: PathModel, extent=(1.0, 3.0), rng=None) -> PathModel:
    """Move one point of the model along +-x or +-y.

    The point is drawn uniformly over all endpoints and control points, the
    magnitude uniformly from ``extent``; coordinates are clamped to the
    canvas.
    """
    lo, hi = extent
    if not (0 < lo <= hi):
        raise ValueError("extent must satisfy 0 < lo <= hi")
    rng = np.random.default_rng() if rng is None else rng
    pts = model.points().copy()
    idx = int(rng.integers(len(pts)))
    direction = int(rng.integers(4))
    mag = float(rng.uniform(lo, hi)) if hi > lo else float(lo)
    axis, sign = divmod(direction, 2)
    pts[idx, axis] = min(max(pts[idx, axis] + (mag if sign == 0 else -mag), 0.0), CANVAS)
    return model.with_points(pts)


# -- SVG subset ---------------------------------------------------------------

_META = re.compile(r"<!--\s*metisforge\s+id=(\S+)\s+label=(\d+)\s*-->")
_PATH = re.compile(r'<path\s+d="([^"]*)"\s*/>')
_TOKEN = re.compile(r"[MCZ]|[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?")


def _fmt(v: float) -> str:
    r = repr(float(v))
    return r[:-2] if r.endswith(".0") else r


def path_to_svg(model: PathModel, id: str, label: int) -> str:
    lines = [
        '<svg xmlns="http://www.w3.org/2000/svg" width="28" height="28" viewBox="0 0 28 28">',
        f"<!-- metisforge id={id} label={int(label)} -->",
    ]
    for s in model.subpaths:
        parts = [f"M {_fmt(s[0, 0, 0])} {_fmt(s[0, 0, 1])}"]
        n = len(s)
        for k in range(n):
            c1, c2 = s[k, 1], s[k, 2]
            end = s[(k + 1) % n, 0]
            parts.append("C " + " ".join(_fmt(v) for v in (*c1, *c2, *end)))
        parts.append("Z")
        lines.append(f'<path d="{" ".join(parts)}"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _parse_path_data(d: str, index: int, where: str):
    toks = list(_TOKEN.finditer(d))
    rest = _TOKEN.sub(" ", d).replace(",", " ").strip()
    if rest:
        raise PathFormatError(f"{where}: subpath {index}: unexpected characters {rest[:20]!r}")
    segs, pos, cur, start, closed = [], 0, None, None, False

    def nums(n):
        nonlocal pos
        vals = []
        for _ in range(n):
            if pos >= len(toks) or toks[pos].group() in "MCZ":
                off = toks[pos].start() if pos < len(toks) else len(d)
                raise PathFormatError(f"{where}: subpath {index}: expected number at offset {off}")
            vals.append(float(toks[pos].group()))
            pos += 1
        return vals

    while pos < len(toks):
        t = toks[pos]
        cmd = t.group()
        if closed:
            raise PathFormatError(f"{where}: subpath {index}: data after Z at offset {t.start()}")
        pos += 1
        if cmd == "M":
            if cur is not None:
                raise PathFormatError(f"{where}: subpath {index}: second M at offset {t.start()}")
            cur = start = tuple(nums(2))
        elif cmd == "C":
            if cur is None:
                raise PathFormatError(f"{where}: subpath {index}: C before M at offset {t.start()}")
            v = nums(6)
            segs.append([cur, v[0:2], v[2:4], v[4:6]])
            cur = tuple(v[4:6])
        elif cmd == "Z":
            closed = True
        else:
            raise PathFormatError(f"{where}: subpath {index}: unexpected token at offset {t.start()}")
    if not segs:
        raise PathFormatError(f"{where}: subpath {index}: no segments")
    if not closed or abs(cur[0] - start[0]) > 1e-9 or abs(cur[1] - start[1]) > 1e-9:
        raise PathFormatError(f"{where}: subpath {index} is not closed")
    return segs


def parse_svg(text: str, where: str = "<string>") -> SeedRecord:
    meta = _META.search(text)
    if meta is None:
        raise PathFormatError(f"{where}: missing metisforge metadata comment")
    subpaths = []
    for i, m in enumerate(_PATH.finditer(text)):
        subpaths.append(_parse_path_data(m.group(1), i, f"{where} (offset {m.start()})"))
    if not subpaths:
        raise PathFormatError(f"{where}: no path elements")
    return SeedRecord(meta.group(1), PathModel.from_segments(subpaths), int(meta.group(2)))


def load_seed_corpus(source) -> list:
    """Load every ``*.svg`` under ``source`` in file-name order."""
    source = Path(source)
    records, seen = [], set()
    for f in sorted(source.glob("*.svg")):
        rec = parse_svg(f.read_text(), str(f))
        if rec.id in seen:
            raise PathFormatError(f"{f}: duplicate seed id {rec.id!r}")
        seen.add(rec.id)
        records.append(rec)
    return records


def write_pgm(grid, path) -> None:
    g = np.asarray(grid, dtype=np.uint8)
    h, w = g.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode("ascii") + g.tobytes())


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    m = re.match(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s", data)
    if m is None:
        raise ValueError(f"{path}: not a binary PGM")
    w, h, maxval = (int(g) for g in m.groups())
    if maxval != 255:
        raise ValueError(f"{path}: unsupported maxval {maxval}")
    return np.frombuffer(data[m.end():m.end() + w * h], dtype=np.uint8).reshape(h, w).copy()

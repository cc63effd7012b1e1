"""Antialiased rasterization of path models onto the 28x28 grid."""
import numpy as np

from .. import kernels
from .path import DigitInput, PathModel

SIZE = 28
SUPERSAMPLE = 8
FLATNESS = 0.1


def coverage_to_grid(cov: np.ndarray, ss: int = SUPERSAMPLE) -> np.ndarray:
    """Map covered-sample counts to 0..255 with round-half-up."""
    total = ss * ss
    return ((cov.astype(np.int64) * 255 + total // 2) // total).astype(np.uint8)


def rasterize(model: PathModel, backend=None) -> np.ndarray:
    """Render ``model`` to a uint8 grid (0 = background), nonzero winding."""
    impl = kernels if backend is None else kernels.backends()[backend]
    edges = impl.flatten_segments(model.segments(), FLATNESS)
    cov = impl.fill_coverage(np.ascontiguousarray(edges), SIZE, SIZE, SUPERSAMPLE)
    return coverage_to_grid(np.asarray(cov))


def render_digit(model: PathModel, label: int) -> DigitInput:
    return DigitInput(rasterize(model), int(label))

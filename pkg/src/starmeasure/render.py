"""Binary PGM (P5) output for measures on grids."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import DomainError
from .spaces import GridSpace


def to_bytes(values) -> np.ndarray:
    """Map [0, 1] to 0..255, rounding halves away from zero (0.5 -> 128)."""
    v = np.asarray(values, dtype=float) * 255.0
    return np.floor(v + 0.5).clip(0, 255).astype(np.uint8)


def image_array(mu) -> np.ndarray:
    """Pixel rows for a 1D or 2D grid measure; row 0 is the top of the box."""
    space = mu.space
    if not isinstance(space, GridSpace):
        raise DomainError("rendering needs a grid space")
    if space.dim == 2:
        nx, ny = (int(r) for r in space.resolution)
        # axis 0 is x (columns), axis 1 is y (rows, flipped so y grows upward)
        return to_bytes(mu.values).reshape(nx, ny).T[::-1]
    if space.dim == 1:
        return to_bytes(mu.values).reshape(1, -1)
    raise DomainError(f"cannot render a {space.dim}-dimensional grid")


def render_pgm(mu, path=None, strip: bool = False) -> bytes:
    """Write ``mu`` as a P5 image; 1D grids need ``strip=True`` (1 x N)."""
    if isinstance(mu.space, GridSpace) and mu.space.dim == 1 and not strip:
        raise DomainError("1D measures render only as a 1 x N strip (pass strip=True)")
    img = image_array(mu)
    h, w = img.shape
    data = f"P5\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(img).tobytes()
    if path is not None:
        Path(path).write_bytes(data)
    return data


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5":
        raise DomainError("not a binary PGM file")
    w, h = (int(x) for x in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w)

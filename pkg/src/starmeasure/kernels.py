"""Backend selection and thread partitioning for the hot kernels.

The compiled extension ``_kernel`` is used when it imports; otherwise the
numpy implementation in ``_kernel_py`` takes over.  Set
``STARMEASURE_BACKEND=python`` to force the fallback.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _kernel_py

THREADS_ENV = "STARMEASURE_THREADS"


def _load(name: str | None = None):
    want = (name or os.environ.get("STARMEASURE_BACKEND", "auto")).lower()
    if want == "python":
        return _kernel_py
    try:
        from . import _kernel
    except ImportError:
        if want == "cython":
            raise
        return _kernel_py
    return _kernel


backend = _load()


def use_backend(name: str):
    """Switch backend at runtime ('cython', 'python' or 'auto'); returns the module."""
    global backend
    backend = _load(name)
    return backend


def available_backends() -> list[str]:
    names = ["python"]
    try:
        from . import _kernel  # noqa: F401
    except ImportError:
        return names
    return ["cython"] + names


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _chunks(S: int, parts: int):
    parts = max(1, min(parts, S))
    edges = np.linspace(0, S, parts + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def run_partitioned(fn, S: int, N: int, threads: int | None = None):
    """Run ``fn(start, stop, out)`` over first-index chunks and max-merge.

    Each chunk writes a private accumulator; merging by pointwise max is
    order independent, so the result does not depend on ``threads``.
    Returns ``(out, error)`` where error is the first failure in
    enumeration order, or None.
    """
    threads = default_threads() if threads is None else max(1, int(threads))
    chunks = _chunks(S, threads * 4 if threads > 1 else 1)

    def work(ch):
        buf = np.zeros(N)
        err = fn(ch[0], ch[1], buf)
        return buf, err

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, chunks))
    else:
        results = [work(ch) for ch in chunks]
    out = np.zeros(N)
    for buf, err in results:
        if err is not None:
            return out, err
        np.maximum(out, buf, out=out)
    return out, None

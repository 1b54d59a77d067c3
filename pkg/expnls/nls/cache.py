"""On-disk cache of coefficient tables.

Layout, little-endian throughout:
    header   "<6sHIIQ"  magic, version, s, alpha count, mode count
    alphas   float64 x alpha count
    a        complex128 x s*s*modes
    b        complex128 x s*modes
    props    complex128 x alpha count*modes
    contour  uint8 x (s + 1)*modes, one row per stage argument
"""

from pathlib import Path
from typing import Optional
import hashlib
import json
import logging
import os
import struct

import numpy as np

from expnls.nls.coefficients import CoefficientTables, dedupe_alphas, precompute_tables
from expnls.nls.collocation import CollocationNodes
from expnls.nls.phi import DEFAULT_CONTOUR, ContourConfig
from expnls.nls.spectral import Grid

logger = logging.getLogger(__name__)

CACHE_ENV = "EXPNLS_CACHE_DIR"
MAGIC = b"EXPNLS"
VERSION = 2
HEADER = struct.Struct("<6sHIIQ")


class CacheError(Exception):
    pass


def cache_key(
    grid: Grid,
    h: float,
    nodes: CollocationNodes,
    nu: float,
    alphas: tuple[float, ...],
    contour: ContourConfig,
) -> str:
    description = {
        "grid": grid.describe(),
        "h": repr(float(h)),
        "nodes": [repr(float(c)) for c in nodes.c],
        "nu": repr(float(nu)),
        "alphas": [repr(float(a)) for a in alphas],
        "contour": [contour.points, contour.radius, contour.switch_radius],
        "version": VERSION,
    }
    blob = json.dumps(description, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def store_tables(path: Path, tables: CoefficientTables):
    s = tables.nodes.s
    alphas = np.array(sorted(tables.propagators), dtype="<f8")
    modes = tables.grid.size
    with open(path, "wb") as handle:
        handle.write(HEADER.pack(MAGIC, VERSION, s, alphas.size, modes))
        handle.write(alphas.tobytes())
        handle.write(tables.a.astype("<c16").tobytes())
        handle.write(tables.b.astype("<c16").tobytes())
        for alpha in alphas:
            handle.write(tables.propagators[float(alpha)].astype("<c16").tobytes())
        handle.write(tables.contour_stages.astype(np.uint8).tobytes())


def load_tables(
    path: Path,
    grid: Grid,
    h: float,
    nodes: CollocationNodes,
    nu: float,
    contour: ContourConfig = DEFAULT_CONTOUR,
) -> CoefficientTables:
    data = Path(path).read_bytes()
    if len(data) < HEADER.size:
        raise CacheError(f"Cache file {path} is truncated")
    magic, version, s, n_alpha, modes = HEADER.unpack_from(data, 0)
    if magic != MAGIC or version != VERSION:
        raise CacheError(f"Cache file {path} has an unknown header")
    if s != nodes.s or modes != grid.size:
        raise CacheError(f"Cache file {path} does not match the requested tables")
    offset = HEADER.size

    def take(dtype: str, count: int) -> np.ndarray:
        nonlocal offset
        itemsize = np.dtype(dtype).itemsize
        end = offset + itemsize * count
        if end > len(data):
            raise CacheError(f"Cache file {path} is truncated")
        out = np.frombuffer(data, dtype=dtype, count=count, offset=offset)
        offset = end
        return out

    alphas = take("<f8", n_alpha)
    a = take("<c16", s * s * modes).reshape((s, s) + grid.shape).astype(np.complex128)
    b = take("<c16", s * modes).reshape((s,) + grid.shape).astype(np.complex128)
    propagators = {
        float(alpha): take("<c16", modes).reshape(grid.shape).astype(np.complex128)
        for alpha in alphas
    }
    contour_stages = take("u1", (s + 1) * modes).reshape((s + 1,) + grid.shape).astype(bool)
    return CoefficientTables(
        grid=grid,
        h=h,
        nodes=nodes,
        nu=nu,
        a=a,
        b=b,
        propagators=propagators,
        contour_stages=contour_stages,
        contour=contour,
    )


def cached_precompute(
    grid: Grid,
    h: float,
    nodes: CollocationNodes,
    nu: float = 0.5,
    alpha_set: tuple[float, ...] = (),
    contour: ContourConfig = DEFAULT_CONTOUR,
    workers: int = 1,
    cache_dir: Optional[str] = None,
) -> CoefficientTables:
    """precompute_tables behind the optional cache named by EXPNLS_CACHE_DIR."""
    cache_dir = cache_dir or os.environ.get(CACHE_ENV)
    if not cache_dir:
        return precompute_tables(grid, h, nodes, nu, alpha_set, contour, workers)

    alphas = dedupe_alphas(list(alpha_set) + list(nodes.c) + [1.0])
    key = cache_key(grid, h, nodes, nu, alphas, contour)
    path = Path(cache_dir) / f"{key}.bin"
    if path.exists():
        try:
            tables = load_tables(path, grid, h, nodes, nu, contour)
            logger.info("Loaded coefficient tables from %s", path)
            return tables
        except CacheError as e:
            logger.warning("Ignoring unreadable cache entry: %s", e)

    tables = precompute_tables(grid, h, nodes, nu, alpha_set, contour, workers)
    Path(cache_dir).mkdir(parents=True, exist_ok=True)
    store_tables(path, tables)
    logger.info("Stored coefficient tables in %s", path)
    return tables

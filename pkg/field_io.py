"""
On-disk container for TPField data.

A field file is a NumPy ``.npz`` archive with two members: ``header``, a JSON
document {n, n_t, n_x, T, L, components, representation, format_version},
and ``values``, the row-major complex128 array. Loading reproduces the
values bit for bit.
"""

import json
import logging
import zipfile
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np

from kernel_errors import FieldIOError
from spectral_solver import REPRESENTATIONS, GridSpec, TPField

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
HEADER_KEYS = ("n", "n_t", "n_x", "T", "L", "components", "representation")


def field_header(tp_field: TPField, grid: GridSpec) -> Dict:
    return {
        "format_version": FORMAT_VERSION,
        "n": grid.n,
        "n_t": grid.n_t,
        "n_x": grid.n_x,
        "T": float(grid.period),
        "L": float(grid.box_edge),
        "components": tp_field.components,
        "representation": tp_field.representation,
    }


def save_field(path: Union[str, Path], tp_field: TPField, grid: GridSpec) -> Path:
    """Write a field and its grid description; returns the path written."""
    tp_field.check(grid)
    path = Path(path)
    if path.suffix != ".npz":
        path = path.with_suffix(".npz")
    header = json.dumps(field_header(tp_field, grid), sort_keys=True)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as handle:
            np.savez(handle, header=np.array(header), values=np.ascontiguousarray(tp_field.values, dtype=np.complex128))
    except OSError as exc:
        raise FieldIOError(f"cannot write field file {path}: {exc}") from exc
    logger.debug("wrote %s %s field to %s", tp_field.representation, tp_field.values.shape, path)
    return path


def load_field(path: Union[str, Path]) -> Tuple[TPField, GridSpec]:
    """Read a field file written by save_field."""
    path = Path(path)
    try:
        with np.load(path, allow_pickle=False) as archive:
            header = json.loads(str(archive["header"]))
            values = archive["values"]
    except (OSError, KeyError, ValueError, zipfile.BadZipFile) as exc:
        raise FieldIOError(f"cannot read field file {path}: {exc}") from exc

    missing = [key for key in HEADER_KEYS if key not in header]
    if missing:
        raise FieldIOError(f"field file {path} header lacks {missing}")
    if header.get("format_version", FORMAT_VERSION) != FORMAT_VERSION:
        raise FieldIOError(f"unsupported field format version {header['format_version']}")
    if header["representation"] not in REPRESENTATIONS:
        raise FieldIOError(f"unknown representation {header['representation']!r}")
    try:
        grid = GridSpec(n=header["n"], n_t=header["n_t"], n_x=header["n_x"],
                        box_edge=header["L"], period=header["T"])
    except ValueError as exc:
        raise FieldIOError(f"field file {path} describes an invalid grid: {exc}") from exc
    expected = grid.field_shape(header["components"])
    if values.shape != expected:
        raise FieldIOError(f"field file {path}: data shape {values.shape}, header says {expected}")
    return TPField(values, header["representation"]), grid

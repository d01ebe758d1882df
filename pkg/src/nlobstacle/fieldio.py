"""Binary field dumps.

Format: one ASCII header line ``FIELD v1 n=<N> name=<id>\\n`` followed by
``N*N`` little-endian float64 values in row-major order.  Masks are written
with values in ``{0.0, 1.0}``.
"""
from __future__ import annotations

import re
from pathlib import Path

import numpy as np

_HEADER = re.compile(rb"^FIELD v1 n=(\d+) name=(\S+)$")


def write_field(path, values, name: str) -> None:
    values = np.asarray(values, dtype="<f8")
    n = values.shape[0]
    if values.shape != (n, n):
        raise ValueError(f"expected a square field, got shape {values.shape}")
    if not name or any(c.isspace() for c in name):
        raise ValueError(f"field name must be a nonempty token, got {name!r}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(f"FIELD v1 n={n} name={name}\n".encode("ascii"))
        fh.write(np.ascontiguousarray(values).tobytes(order="C"))


def read_field(path) -> tuple[str, np.ndarray]:
    """Return ``(name, values)`` from a dump written by :func:`write_field`."""
    data = Path(path).read_bytes()
    head, sep, body = data.partition(b"\n")
    m = _HEADER.match(head)
    if not sep or m is None:
        raise ValueError(f"{path}: not a FIELD v1 dump")
    n = int(m.group(1))
    if len(body) != 8 * n * n:
        raise ValueError(f"{path}: expected {8 * n * n} payload bytes, got {len(body)}")
    values = np.frombuffer(body, dtype="<f8").reshape(n, n).astype(float)
    return m.group(2).decode("ascii"), values


def write_mask(path, mask, name: str) -> None:
    write_field(path, np.asarray(mask, dtype=bool).astype(float), name)


def read_mask(path) -> tuple[str, np.ndarray]:
    name, values = read_field(path)
    if not np.isin(values, (0.0, 1.0)).all():
        raise ValueError(f"{path}: mask values must be 0.0 or 1.0")
    return name, values.astype(bool)

"""File formats: snapshot streams, eigen-tables, atomic text outputs.

Snapshot stream (extension .snaps), all integers/floats little-endian:

    bytes 0-7    magic b"PNLSNAP1"
    u32          format version (1)
    u32, u32     n, k
    f64          box_length
    u32, u32     points_per_axis, torus_modes
    i32          split_index (-1 when absent)
    64 bytes     config hash, ascii hex (space-padded when absent)
    then zero or more records, until EOF:
        f64      snapshot time
        f64[2 * total_points]  coefficients, interleaved (re, im)

Coefficients are written with every axis rotated to monotone frequency order
(most negative first, i.e. numpy's fftshift of the internal layout) so files
are comparable across tools; the reader rotates back. Records are flushed as
written: an aborted run leaves a valid truncated stream.

Eigen-table file (extension .eig):

    bytes 0-7    magic b"PNLSEIG1"
    u32          version (1)
    u64          header length H
    H bytes      JSON header {"count": J, "quad_points": Q}
    f64[J]       eigenvalues
    f64[Q]       quadrature weights
    f64[2*J*Q]   eigenfunction samples, row-major, interleaved (re, im)
"""

import json
import os
import struct
import tempfile
from typing import List, Tuple

import numpy as np

from .grid import GridSpec, SpectralField, make_grid
from .propagate import EigenTable

SNAP_MAGIC = b"PNLSNAP1"
EIG_MAGIC = b"PNLSEIG1"


def atomic_write_bytes(path: str, data: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


class SnapshotWriter:
    """Streaming writer; records are flushed as they arrive so partial output
    survives an abort. Use as a context manager."""

    def __init__(self, path: str, grid: GridSpec, config_hash: str = ""):
        self.grid = grid
        self._fh = open(path, "wb")
        split = grid.split_index if grid.split_index is not None else -1
        header = SNAP_MAGIC + struct.pack(
            "<IIIdIIi",
            1,
            grid.n,
            grid.k,
            grid.box_length,
            grid.points_per_axis,
            grid.torus_modes,
            split,
        )
        self._fh.write(header)
        self._fh.write(config_hash.ljust(64, " ").encode("ascii")[:64])
        self._fh.flush()

    def write(self, t: float, field: SpectralField) -> None:
        shifted = np.fft.fftshift(field.coeffs)
        payload = np.ascontiguousarray(shifted, dtype="<c16").view("<f8")
        self._fh.write(struct.pack("<d", float(t)))
        self._fh.write(payload.tobytes())
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


def read_snapshots(path: str) -> Tuple[GridSpec, str, List[Tuple[float, SpectralField]]]:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != SNAP_MAGIC:
            raise ValueError(f"{path} is not a snapshot stream (magic {magic!r})")
        version, n, k, L, nx, ny, split = struct.unpack("<IIIdIIi", fh.read(struct.calcsize("<IIIdIIi")))
        if version != 1:
            raise ValueError(f"unsupported snapshot version {version}")
        config_hash = fh.read(64).decode("ascii").rstrip(" ")
        grid = make_grid(n, k, L, nx, ny, split_index=None if split < 0 else split)
        count = grid.total_points
        record = 8 + 16 * count
        out = []
        while True:
            chunk = fh.read(record)
            if not chunk:
                break
            if len(chunk) < record:
                break  # truncated final record from an aborted run
            (t,) = struct.unpack("<d", chunk[:8])
            flat = np.frombuffer(chunk[8:], dtype="<f8").view("<c16")
            coeffs = np.fft.ifftshift(flat.reshape(grid.shape))
            out.append((t, SpectralField(grid, coeffs)))
    return grid, config_hash, out


def save_eigen_table(path: str, table: EigenTable) -> None:
    J = table.eigenvalues.shape[0]
    Q = table.weights.shape[0]
    header = json.dumps({"count": J, "quad_points": Q}).encode("ascii")
    body = [
        EIG_MAGIC,
        struct.pack("<I", 1),
        struct.pack("<Q", len(header)),
        header,
        np.ascontiguousarray(table.eigenvalues, dtype="<f8").tobytes(),
        np.ascontiguousarray(table.weights, dtype="<f8").tobytes(),
        np.ascontiguousarray(table.functions, dtype="<c16").view("<f8").tobytes(),
    ]
    atomic_write_bytes(path, b"".join(body))


def load_eigen_table(path: str) -> EigenTable:
    """Read and validate (nonnegative eigenvalues, orthonormal rows) a table."""
    with open(path, "rb") as fh:
        if fh.read(8) != EIG_MAGIC:
            raise ValueError(f"{path} is not an eigen-table")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != 1:
            raise ValueError(f"unsupported eigen-table version {version}")
        (hlen,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(hlen).decode("ascii"))
        J, Q = int(header["count"]), int(header["quad_points"])
        lam = np.frombuffer(fh.read(8 * J), dtype="<f8")
        w = np.frombuffer(fh.read(8 * Q), dtype="<f8")
        phi = np.frombuffer(fh.read(16 * J * Q), dtype="<f8").view("<c16").reshape(J, Q)
    return EigenTable(eigenvalues=lam.copy(), weights=w.copy(), functions=phi.copy())

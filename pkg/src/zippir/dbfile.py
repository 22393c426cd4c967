"""On-disk database format: fixed header plus row-major symbols in [0, p)."""

import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"ZPIRDB1\x00"
DB_VERSION = 1
HEADER = struct.Struct("<8sIQQIQ")  # magic, version, d0, d1, p, record_bytes


class DatabaseError(ValueError):
    pass


@dataclass
class DatabaseFile:
    d0: int
    d1: int
    p: int
    record_bytes: int
    symbols: np.ndarray  # shape (d0, d1), dtype int64

    def serialize(self) -> bytes:
        head = HEADER.pack(MAGIC, DB_VERSION, self.d0, self.d1,
                           self.p, self.record_bytes)
        if self.p <= 256:
            body = self.symbols.astype(np.uint8).tobytes()
        else:
            body = self.symbols.astype("<u8").tobytes()
        return head + body

    @classmethod
    def deserialize(cls, data: bytes) -> "DatabaseFile":
        if len(data) < HEADER.size:
            raise DatabaseError("file shorter than header")
        magic, version, d0, d1, p, record_bytes = HEADER.unpack_from(data)
        if magic != MAGIC:
            raise DatabaseError("bad magic")
        if version != DB_VERSION:
            raise DatabaseError(f"unsupported database version {version}")
        body = data[HEADER.size:]
        width = 1 if p <= 256 else 8
        if len(body) != d0 * d1 * width:
            raise DatabaseError("symbol count does not match header shape")
        dtype = np.uint8 if width == 1 else np.dtype("<u8")
        symbols = np.frombuffer(body, dtype=dtype).astype(np.int64)
        symbols = symbols.reshape(d0, d1)
        if symbols.size and int(symbols.max()) >= p:
            raise DatabaseError("symbol out of range")
        return cls(d0, d1, p, record_bytes, symbols)


def ingest(raw: bytes, d0: int, d1: int, p: int = 256) -> DatabaseFile:
    """Pack raw bytes into a (d0, d1) database of Z_p symbols.

    With p = 256 each byte is one symbol; a row of d1 symbols is one
    record of d1 bytes. Smaller p splits each byte into ceil(8/log2 p)
    base-p digits, little-endian.
    """
    if p < 2:
        raise DatabaseError("p must be at least 2")
    if p >= 256:
        if p > 256:
            raise DatabaseError("p above 256 is not supported by ingest")
        if len(raw) != d0 * d1:
            raise DatabaseError(
                f"need exactly {d0 * d1} bytes for shape ({d0}, {d1}), got {len(raw)}")
        symbols = np.frombuffer(raw, dtype=np.uint8).astype(np.int64)
        record_bytes = d1
    else:
        bits = (p - 1).bit_length()
        if (1 << bits) != p:
            raise DatabaseError("p below 256 must be a power of two")
        per_byte = -(-8 // bits)
        if len(raw) * per_byte != d0 * d1:
            raise DatabaseError("input length incompatible with shape")
        arr = np.frombuffer(raw, dtype=np.uint8).astype(np.int64)
        digits = [(arr >> (bits * j)) & (p - 1) for j in range(per_byte)]
        symbols = np.stack(digits, axis=1).reshape(-1)
        record_bytes = d1 // per_byte
    if int(symbols.max(initial=0)) >= p:
        raise DatabaseError("symbol out of range")
    return DatabaseFile(d0, d1, p, record_bytes, symbols.reshape(d0, d1))


def record_bytes_of_row(db: DatabaseFile, row) -> bytes:
    """Inverse of ingest for a single row: Z_p symbols back to bytes."""
    row = np.asarray(row, dtype=np.int64)
    if db.p == 256:
        return row.astype(np.uint8).tobytes()
    bits = (db.p - 1).bit_length()
    per_byte = -(-8 // bits)
    grouped = row.reshape(-1, per_byte)
    out = np.zeros(len(grouped), dtype=np.int64)
    for j in range(per_byte):
        out |= grouped[:, j] << (bits * j)
    return out.astype(np.uint8).tobytes()


def load(path: str) -> DatabaseFile:
    with open(path, "rb") as fh:
        return DatabaseFile.deserialize(fh.read())


def save(db: DatabaseFile, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(db.serialize())

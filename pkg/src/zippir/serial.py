"""Binary encodings shared by all modules.

Big integers travel as a 32-bit little-endian byte count followed by the
little-endian magnitude. Fixed-width variants exist for message payloads
whose sizes must match the communication-cost formulas bit-exactly.
"""

import struct


def encode_bigint(x: int) -> bytes:
    if x < 0:
        raise ValueError("negative integers are not encodable")
    nbytes = (x.bit_length() + 7) // 8
    return struct.pack("<I", nbytes) + x.to_bytes(nbytes, "little")


def decode_bigint(buf: bytes, off: int = 0):
    (nbytes,) = struct.unpack_from("<I", buf, off)
    off += 4
    x = int.from_bytes(buf[off:off + nbytes], "little")
    return x, off + nbytes


def encode_bigint_fixed(x: int, width: int) -> bytes:
    """Length-prefixed encoding with the magnitude padded to `width` bytes."""
    if x < 0:
        raise ValueError("negative integers are not encodable")
    return struct.pack("<I", width) + x.to_bytes(width, "little")


def decode_bigint_prefixed(buf: bytes):
    """Decode one length-prefixed integer, returning (value, remainder)."""
    (nbytes,) = struct.unpack_from("<I", buf)
    if len(buf) < 4 + nbytes:
        raise ValueError("truncated big-integer field")
    return int.from_bytes(buf[4:4 + nbytes], "little"), buf[4 + nbytes:]


def encode_fixed(x: int, width: int) -> bytes:
    return x.to_bytes(width, "little")


def decode_fixed(buf: bytes, off: int, width: int):
    return int.from_bytes(buf[off:off + width], "little"), off + width


def encode_lwe_ciphertext(n: int, q: int, a, b: int) -> bytes:
    # q = 2^64 is stored as 0 (the only q value not fitting a 64-bit word)
    qword = 0 if q == 1 << 64 else q
    out = [struct.pack("<QQ", n, qword)]
    for x in a:
        out.append(struct.pack("<Q", int(x)))
    out.append(struct.pack("<Q", int(b)))
    return b"".join(out)


def decode_lwe_ciphertext(buf: bytes, off: int = 0):
    n, qword = struct.unpack_from("<QQ", buf, off)
    off += 16
    q = qword if qword != 0 else 1 << 64
    comps = list(struct.unpack_from("<%dQ" % (n + 1), buf, off))
    off += 8 * (n + 1)
    return n, q, comps[:-1], comps[-1], off

"""TCP wire format.

Frame = u32-LE total length, then header (version u8, message type u8,
parameter hash 32 bytes), then the body. Body integers use the
length-prefixed little-endian big-integer encoding from `serial`, with
magnitudes padded to the parameter-determined field width so the payload
byte count of every message is a pure function of the parameters
(`payload` below). Frame/prefix overhead is accounted separately.
"""

import struct
from dataclasses import dataclass

from .serial import encode_bigint_fixed, decode_bigint_prefixed

WIRE_VERSION = 1
HEADER_BYTES = 1 + 1 + 32
FRAME_PREFIX_BYTES = 4

# message types
MSG_HINT_REQUEST = 1
MSG_QUERY = 2
MSG_RESPONSE_SEPARATE = 3
MSG_RESPONSE_COMBINED = 4
MSG_HINT_TRANSFER = 5
MSG_HINT_TRANSFER_REPLY = 6
MSG_ACK = 7
MSG_ERROR = 8
MSG_HINT_PENDING = 9

# error codes (stable; carried in MSG_ERROR bodies)
ERR_INPUT = 10          # malformed values supplied by the peer
ERR_PROTOCOL = 20       # malformed frame / unknown message type / bad version
ERR_STATE = 30          # unknown client, consumed hint, stale query index
ERR_CRYPTO = 40         # invalid ciphertext encountered


class WireError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


@dataclass
class Frame:
    msg_type: int
    params_hash: bytes
    body: bytes


def pack_frame(msg_type: int, params_hash: bytes, body: bytes) -> bytes:
    if len(params_hash) != 32:
        raise WireError(ERR_INPUT, "params hash must be 32 bytes")
    payload = struct.pack("<BB", WIRE_VERSION, msg_type) + params_hash + body
    return struct.pack("<I", len(payload)) + payload


def unpack_frame(data: bytes) -> Frame:
    if len(data) < HEADER_BYTES:
        raise WireError(ERR_PROTOCOL, "short frame")
    version, msg_type = struct.unpack_from("<BB", data)
    if version != WIRE_VERSION:
        raise WireError(ERR_PROTOCOL, f"unsupported wire version {version}")
    return Frame(msg_type, data[2:34], data[34:])


def read_frame(sock) -> Frame:
    raw = _read_exact(sock, 4)
    (length,) = struct.unpack("<I", raw)
    if length < HEADER_BYTES or length > (1 << 31):
        raise WireError(ERR_PROTOCOL, "bad frame length")
    return unpack_frame(_read_exact(sock, length))


def _read_exact(sock, n: int) -> bytes:
    chunks = []
    while n:
        chunk = sock.recv(n)
        if not chunk:
            raise WireError(ERR_PROTOCOL, "connection closed mid-frame")
        chunks.append(chunk)
        n -= len(chunk)
    return b"".join(chunks)


# -- field widths ----------------------------------------------------------

def _w(bits: int) -> int:
    return (bits + 7) // 8


class Layout:
    """Byte widths of every payload field for a fixed parameter set."""

    def __init__(self, paillier_bits: int, n: int, log2q: int,
                 d0: int, d1_prime: int, seed_bytes: int = 16):
        self.m_bytes = _w(paillier_bits)
        self.m2_bytes = _w(2 * paillier_bits)
        self.q_bytes = _w(log2q)
        self.n = n
        self.d0 = d0
        self.d1_prime = d1_prime
        self.seed_bytes = seed_bytes

    # payload byte counts (frame header and length prefixes excluded)
    def hint_request_payload(self) -> int:
        return self.m2_bytes + self.seed_bytes

    def query_payload(self) -> int:
        return self.n * self.m_bytes + self.d0 * self.q_bytes

    def response_separate_payload(self) -> int:
        return self.d1_prime * (self.m_bytes + self.m2_bytes)

    def response_combined_payload(self) -> int:
        return self.d1_prime * self.m2_bytes

    def hint_transfer_payload(self) -> int:
        return self.d1_prime * self.m2_bytes


def frame_overhead(num_bigints: int) -> int:
    """Bytes added on the wire beyond the payload of one message."""
    return FRAME_PREFIX_BYTES + HEADER_BYTES + 4 * num_bigints


# -- message bodies --------------------------------------------------------

def encode_hint_request(layout: Layout, paillier_n: int, seed: bytes) -> bytes:
    # the public key is g = n+1 as an element of Z_{n^2}
    return encode_bigint_fixed(paillier_n + 1, layout.m2_bytes) + seed


def decode_hint_request(layout: Layout, body: bytes):
    g, rest = decode_bigint_prefixed(body)
    if len(rest) != layout.seed_bytes:
        raise WireError(ERR_INPUT, "bad hint request length")
    return g - 1, rest


def encode_query(layout: Layout, client_id: bytes, query_index: int,
                 mode: int, ck_o, qu0) -> bytes:
    head = client_id + struct.pack("<QB", query_index, mode)
    parts = [head]
    parts += [encode_bigint_fixed(v, layout.m_bytes) for v in ck_o]
    parts += [encode_bigint_fixed(int(v), layout.q_bytes) for v in qu0]
    return b"".join(parts)


def decode_query(layout: Layout, body: bytes):
    if len(body) < 32 + 9:
        raise WireError(ERR_INPUT, "bad query length")
    client_id, body = body[:32], body[32:]
    query_index, mode = struct.unpack_from("<QB", body)
    body = body[9:]
    ck_o = []
    for _ in range(layout.n):
        v, body = decode_bigint_prefixed(body)
        ck_o.append(v)
    qu0 = []
    for _ in range(layout.d0):
        v, body = decode_bigint_prefixed(body)
        qu0.append(v)
    if body:
        raise WireError(ERR_INPUT, "trailing bytes in query")
    return client_id, query_index, mode, ck_o, qu0


def encode_response_separate(layout: Layout, query_index: int, t, k) -> bytes:
    parts = [struct.pack("<Q", query_index)]
    parts += [encode_bigint_fixed(v, layout.m_bytes) for v in t]
    parts += [encode_bigint_fixed(v, layout.m2_bytes) for v in k]
    return b"".join(parts)


def decode_response_separate(layout: Layout, body: bytes):
    (query_index,) = struct.unpack_from("<Q", body)
    body = body[8:]
    t, k = [], []
    for _ in range(layout.d1_prime):
        v, body = decode_bigint_prefixed(body)
        t.append(v)
    for _ in range(layout.d1_prime):
        v, body = decode_bigint_prefixed(body)
        k.append(v)
    if body:
        raise WireError(ERR_INPUT, "trailing bytes in response")
    return query_index, t, k


def encode_response_combined(layout: Layout, query_index: int, combined) -> bytes:
    parts = [struct.pack("<Q", query_index)]
    parts += [encode_bigint_fixed(v, layout.m2_bytes) for v in combined]
    return b"".join(parts)


def decode_response_combined(layout: Layout, body: bytes):
    (query_index,) = struct.unpack_from("<Q", body)
    body = body[8:]
    vals = []
    for _ in range(layout.d1_prime):
        v, body = decode_bigint_prefixed(body)
        vals.append(v)
    if body:
        raise WireError(ERR_INPUT, "trailing bytes in response")
    return query_index, vals


def encode_hint_transfer(client_id: bytes, query_index: int) -> bytes:
    return client_id + struct.pack("<Q", query_index)


def decode_hint_transfer(body: bytes):
    if len(body) != 40:
        raise WireError(ERR_INPUT, "bad hint transfer length")
    return body[:32], struct.unpack("<Q", body[32:])[0]


def encode_hint_transfer_reply(layout: Layout, query_index: int, entries) -> bytes:
    parts = [struct.pack("<Q", query_index)]
    parts += [encode_bigint_fixed(v, layout.m2_bytes) for v in entries]
    return b"".join(parts)


decode_hint_transfer_reply = decode_response_combined


def encode_error(code: int, message: str) -> bytes:
    return struct.pack("<I", code) + message.encode()


def decode_error(body: bytes):
    (code,) = struct.unpack_from("<I", body)
    return code, body[4:].decode(errors="replace")

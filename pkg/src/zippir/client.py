"""PIR client: persisted long-term state plus a byte-counting transport.

The long-term state on disk is one Paillier secret key and one 16-byte
seed; everything else (per-query keys, hint randomness) is rederived.
"""

import json
import os
import socket

import numpy as np

from . import paillier, protocol, wire
from .protocol import (ClientLongTermState, ProtocolParams, ResponseMessage,
                       SEPARATE, COMBINED, client_id_of)
from .server import BYTE_BY_MODE


class Transport:
    """A framed connection that counts bytes in each direction."""

    def __init__(self, host: str, port: int):
        self.sock = socket.create_connection((host, port))
        self.bytes_sent = 0
        self.bytes_received = 0

    def round_trip(self, frame: bytes) -> wire.Frame:
        self.sock.sendall(frame)
        self.bytes_sent += len(frame)
        reply = wire.read_frame(self.sock)
        self.bytes_received += (wire.FRAME_PREFIX_BYTES + wire.HEADER_BYTES
                                + len(reply.body))
        if reply.msg_type == wire.MSG_ERROR:
            code, message = wire.decode_error(reply.body)
            raise wire.WireError(code, message)
        return reply

    def close(self):
        self.sock.close()


class PirClient:
    def __init__(self, params: ProtocolParams, state: ClientLongTermState,
                 transport: Transport = None):
        self.params = params
        self.state = state
        self.transport = transport
        self.layout = wire.Layout(params.paillier_bits, params.lwe.n,
                                  params.lwe.q.bit_length() - 1,
                                  params.d0, params.d1_prime)
        self.client_id = client_id_of(state.pk)
        self.stored_hints = {}  # query_index -> entries (client-storage mode)

    # -- offline -------------------------------------------------------------

    def register(self):
        body = wire.encode_hint_request(self.layout, self.state.pk.m,
                                        self.state.seed)
        frame = wire.pack_frame(wire.MSG_HINT_REQUEST,
                                self.params.params_hash(), body)
        reply = self.transport.round_trip(frame)
        if reply.msg_type != wire.MSG_ACK:
            raise wire.WireError(wire.ERR_PROTOCOL, "unexpected reply")

    def fetch_hint(self, query_index: int):
        body = wire.encode_hint_transfer(self.client_id, query_index)
        frame = wire.pack_frame(wire.MSG_HINT_TRANSFER,
                                self.params.params_hash(), body)
        reply = self.transport.round_trip(frame)
        if reply.msg_type != wire.MSG_HINT_TRANSFER_REPLY:
            raise wire.WireError(wire.ERR_PROTOCOL, "unexpected reply")
        qi, entries = wire.decode_hint_transfer_reply(self.layout, reply.body)
        self.stored_hints[qi] = [paillier.PaillierCiphertext(c)
                                 for c in entries]
        return self.stored_hints[qi]

    # -- online ---------------------------------------------------------------

    def retrieve(self, i0: int, mode: str = SEPARATE, rng=None):
        """Run one full online query; returns (records, response_message)."""
        qi = self.state.next_query_index
        qmsg, secret = protocol.query(self.state, self.params, i0, qi,
                                      rng=rng, mode=mode)
        body = wire.encode_query(self.layout, self.client_id, qi,
                                 BYTE_BY_MODE[mode], qmsg.ck_o, qmsg.qu0)
        frame = wire.pack_frame(wire.MSG_QUERY, self.params.params_hash(),
                                body)
        reply = self.transport.round_trip(frame)
        if reply.msg_type == wire.MSG_HINT_PENDING:
            # The server never consumed the hint, so the index stays valid;
            # roll back and retry with the same index once the hint is ready.
            self.state.next_query_index = qi
            raise HintPending(qi)
        if reply.msg_type == wire.MSG_RESPONSE_SEPARATE:
            _, t, k = wire.decode_response_separate(self.layout, reply.body)
            rmsg = ResponseMessage(SEPARATE, qi, t,
                                   [paillier.PaillierCiphertext(c) for c in k])
        elif reply.msg_type == wire.MSG_RESPONSE_COMBINED:
            _, vals = wire.decode_response_combined(self.layout, reply.body)
            rmsg = ResponseMessage(COMBINED, qi, [],
                                   [paillier.PaillierCiphertext(c) for c in vals])
        else:
            raise wire.WireError(wire.ERR_PROTOCOL, "unexpected reply")
        hint_entries = self.stored_hints.pop(qi, None)
        records = protocol.extract(self.state.sk_paillier, self.params, rmsg,
                                   hint_entries=hint_entries)
        return records, rmsg


class HintPending(Exception):
    def __init__(self, query_index: int):
        super().__init__(f"hint not ready for query index {query_index}")
        self.query_index = query_index


# -- state persistence ---------------------------------------------------------

def save_state(state: ClientLongTermState, path: str, force: bool = False):
    if os.path.exists(path) and not force:
        raise FileExistsError(f"client state already exists at {path}")
    blob = {"p": str(state.sk_paillier.p), "q": str(state.sk_paillier.q),
            "seed": state.seed.hex(),
            "next_query_index": state.next_query_index}
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(blob, fh)
    os.replace(tmp, path)


def load_state(path: str) -> ClientLongTermState:
    with open(path) as fh:
        blob = json.load(fh)
    sk = paillier.PaillierSecretKey(int(blob["p"]), int(blob["q"]))
    return ClientLongTermState(sk, bytes.fromhex(blob["seed"]),
                               int(blob["next_query_index"]))

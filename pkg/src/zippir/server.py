"""Threaded TCP PIR server.

One PirServer owns the database-derived global state, the client
registrations, and a background worker that generates client hints during
idle time. Database updates build a fresh global state off to the side and
swap it in atomically, so request handlers always see a consistent
(state, hints) pair and never a half-updated one.
"""

import logging
import queue
import socketserver
import threading

import numpy as np

from . import protocol, wire
from .hintstore import HintStore
from .paillier import PaillierCiphertext, PaillierPublicKey
from .protocol import (ClientRegistration, ProtocolParams, ServerGlobalState,
                       SEPARATE, COMBINED, client_id_of)

log = logging.getLogger("zippir.server")

MODE_BY_BYTE = {0: SEPARATE, 1: COMBINED}
BYTE_BY_MODE = {v: k for k, v in MODE_BY_BYTE.items()}


class PirServer:
    def __init__(self, params: ProtocolParams, db: np.ndarray,
                 store_dir: str = None, basis=None):
        self.params = params
        self.layout = wire.Layout(params.paillier_bits, params.lwe.n,
                                  params.lwe.q.bit_length() - 1,
                                  params.d0, params.d1_prime)
        self.state = ServerGlobalState(params, db, basis=basis)
        self.store = HintStore(store_dir) if store_dir else None
        self.registrations = {}
        self.lock = threading.Lock()
        self.jobs = queue.Queue()
        self._stop = threading.Event()
        self.worker = threading.Thread(target=self._hint_worker, daemon=True)
        self.worker.start()
        if self.store:
            self._restore()

    # -- persistence --------------------------------------------------------

    def _restore(self):
        for client_id, pk, seed in self.store.load_registrations():
            reg = ClientRegistration(pk, seed, client_id)
            for qi, entries in self.store.load_hints(
                    client_id, self.state.db_version).items():
                reg.hints[qi] = protocol.ClientHint(
                    qi, self.state.db_version,
                    [PaillierCiphertext(c) for c in entries])
            self.registrations[client_id] = reg
            self._enqueue_missing(reg)

    # -- hint generation ----------------------------------------------------

    def _enqueue_missing(self, reg: ClientRegistration):
        base = max(list(reg.hints) + list(reg.consumed), default=-1) + 1
        fresh = {qi for qi, h in reg.hints.items()
                 if h.db_version == self.state.db_version}
        stale = [qi for qi in reg.hints if qi not in fresh]
        todo = stale + [qi for qi in range(base, base + self.params.hints_per_client)
                        if qi not in fresh]
        for qi in todo[:self.params.hints_per_client]:
            self.jobs.put((reg.client_id, qi))

    def _hint_worker(self):
        while not self._stop.is_set():
            try:
                client_id, qi = self.jobs.get(timeout=0.1)
            except queue.Empty:
                continue
            try:
                self._generate_hint(client_id, qi)
            except Exception:
                log.exception("hint generation failed for %s/%d",
                              client_id.hex()[:8], qi)
            finally:
                self.jobs.task_done()

    def _generate_hint(self, client_id: bytes, qi: int):
        with self.lock:
            state = self.state
            reg = self.registrations.get(client_id)
        if reg is None:
            return
        existing = reg.hints.get(qi)
        if existing is not None and existing.db_version == state.db_version:
            return
        h = protocol.hint(state, reg, qi)
        with self.lock:
            if self.state.db_version != h.db_version:
                return
            reg.hints[qi] = h
        if self.store:
            self.store.save_hint(client_id, qi, h.db_version,
                                 [c.c for c in h.entries])

    def wait_for_hints(self, timeout: float = None):
        """Block until every queued hint job has finished."""
        import time
        deadline = None if timeout is None else time.monotonic() + timeout
        while self.jobs.unfinished_tasks:
            if deadline and time.monotonic() > deadline:
                raise TimeoutError("hint generation did not finish in time")
            time.sleep(0.01)

    # -- database update ----------------------------------------------------

    def update_database(self, db: np.ndarray):
        new_state = ServerGlobalState(self.params, db, basis=self.state.basis,
                                      db_version=self.state.db_version + 1)
        with self.lock:
            self.state = new_state
            regs = list(self.registrations.values())
        for reg in regs:
            if self.store:
                self.store.purge_stale(reg.client_id, new_state.db_version)
            self._enqueue_missing(reg)

    # -- request handling ----------------------------------------------------

    def handle_frame(self, frame: wire.Frame) -> bytes:
        try:
            if frame.params_hash != self.params.params_hash():
                raise wire.WireError(wire.ERR_PROTOCOL,
                                     "parameter hash mismatch")
            if frame.msg_type == wire.MSG_HINT_REQUEST:
                return self._on_hint_request(frame.body)
            if frame.msg_type == wire.MSG_QUERY:
                return self._on_query(frame.body)
            if frame.msg_type == wire.MSG_HINT_TRANSFER:
                return self._on_hint_transfer(frame.body)
            raise wire.WireError(wire.ERR_PROTOCOL,
                                 f"unknown message type {frame.msg_type}")
        except wire.WireError as e:
            return self._error(e.code, str(e))
        except (ValueError, IndexError) as e:
            return self._error(wire.ERR_INPUT, str(e))
        except KeyError as e:
            return self._error(wire.ERR_STATE, str(e))

    def _error(self, code: int, message: str) -> bytes:
        return wire.pack_frame(wire.MSG_ERROR, self.params.params_hash(),
                               wire.encode_error(code, message))

    def _on_hint_request(self, body: bytes) -> bytes:
        m, seed = wire.decode_hint_request(self.layout, body)
        pk = PaillierPublicKey(m, m.bit_length())
        if pk.bit_length != self.params.paillier_bits:
            raise wire.WireError(wire.ERR_INPUT, "public key size mismatch")
        client_id = client_id_of(pk)
        with self.lock:
            reg = self.registrations.get(client_id)
            if reg is None:
                reg = ClientRegistration(pk, seed, client_id)
                self.registrations[client_id] = reg
        if self.store:
            self.store.save_registration(client_id, pk, seed)
        self._enqueue_missing(reg)
        return wire.pack_frame(wire.MSG_ACK, self.params.params_hash(), b"")

    def _on_query(self, body: bytes) -> bytes:
        client_id, qi, mode_b, ck_o, qu0 = wire.decode_query(self.layout, body)
        mode = MODE_BY_BYTE.get(mode_b)
        if mode is None:
            raise wire.WireError(wire.ERR_INPUT, "unknown response mode")
        with self.lock:
            state = self.state
            reg = self.registrations.get(client_id)
        if reg is None:
            raise wire.WireError(wire.ERR_STATE, "client not registered")
        stored = reg.hints.get(qi)
        if stored is None or stored.db_version != state.db_version:
            self.jobs.put((client_id, qi))
            return wire.pack_frame(wire.MSG_HINT_PENDING,
                                   self.params.params_hash(), b"")
        qmsg = protocol.QueryMessage(client_id, qi, mode, ck_o,
                                     np.array(qu0, dtype=np.uint64))
        rmsg = protocol.respond(state, reg, qmsg)
        # keep the look-ahead window of precomputed hints topped up
        self.jobs.put((client_id, qi + self.params.hints_per_client))
        if mode == SEPARATE:
            body = wire.encode_response_separate(
                self.layout, qi, rmsg.t, [c.c for c in rmsg.k])
            return wire.pack_frame(wire.MSG_RESPONSE_SEPARATE,
                                   self.params.params_hash(), body)
        body = wire.encode_response_combined(
            self.layout, qi, [c.c for c in rmsg.k])
        return wire.pack_frame(wire.MSG_RESPONSE_COMBINED,
                               self.params.params_hash(), body)

    def _on_hint_transfer(self, body: bytes) -> bytes:
        client_id, qi = wire.decode_hint_transfer(body)
        with self.lock:
            reg = self.registrations.get(client_id)
        if reg is None:
            raise wire.WireError(wire.ERR_STATE, "client not registered")
        h = protocol.client_storage_hint_transfer(reg, qi)
        body = wire.encode_hint_transfer_reply(self.layout, qi,
                                               [c.c for c in h.entries])
        return wire.pack_frame(wire.MSG_HINT_TRANSFER_REPLY,
                               self.params.params_hash(), body)

    def close(self):
        self._stop.set()
        self.worker.join(timeout=2)


class _Handler(socketserver.BaseRequestHandler):
    def handle(self):
        pir: PirServer = self.server.pir
        while True:
            try:
                frame = wire.read_frame(self.request)
            except wire.WireError:
                return
            self.request.sendall(pir.handle_frame(frame))


class _ThreadedTCP(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


def serve(pir: PirServer, host: str = "127.0.0.1", port: int = 0):
    """Start a TCP listener; returns the socketserver (caller shuts down)."""
    srv = _ThreadedTCP((host, port), _Handler)
    srv.pir = pir
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    return srv

"""Crash-safe on-disk store for per-client hints.

Layout: <root>/<client_id hex>/meta.json holds the registration (public
key and seed); each hint lives in its own file named
hint_<query_index>_<db_version>.bin, written to a temp file and renamed
so a crash never leaves a half-written entry visible. Entries for a
stale db_version are skipped at load time and never served.
"""

import json
import os
import struct
import tempfile

from .paillier import PaillierPublicKey
from .serial import encode_bigint, decode_bigint


class HintStore:
    def __init__(self, root: str):
        self.root = root
        os.makedirs(root, exist_ok=True)

    def _client_dir(self, client_id: bytes) -> str:
        return os.path.join(self.root, client_id.hex())

    def save_registration(self, client_id: bytes, pk: PaillierPublicKey,
                          seed: bytes) -> None:
        d = self._client_dir(client_id)
        os.makedirs(d, exist_ok=True)
        meta = {"m": str(pk.m), "bit_length": pk.bit_length,
                "seed": seed.hex()}
        _atomic_write(os.path.join(d, "meta.json"),
                      json.dumps(meta).encode())

    def load_registrations(self):
        """Yield (client_id, pk, seed) for every complete registration."""
        if not os.path.isdir(self.root):
            return
        for name in sorted(os.listdir(self.root)):
            meta_path = os.path.join(self.root, name, "meta.json")
            if not os.path.isfile(meta_path):
                continue
            with open(meta_path, "rb") as fh:
                meta = json.loads(fh.read())
            pk = PaillierPublicKey(int(meta["m"]), int(meta["bit_length"]))
            yield bytes.fromhex(name), pk, bytes.fromhex(meta["seed"])

    def save_hint(self, client_id: bytes, query_index: int, db_version: int,
                  entries) -> None:
        d = self._client_dir(client_id)
        os.makedirs(d, exist_ok=True)
        body = [struct.pack("<QQI", query_index, db_version, len(entries))]
        body += [encode_bigint(v) for v in entries]
        _atomic_write(
            os.path.join(d, f"hint_{query_index}_{db_version}.bin"),
            b"".join(body))

    def load_hints(self, client_id: bytes, db_version: int):
        """Return {query_index: entries} for the given db_version only."""
        d = self._client_dir(client_id)
        out = {}
        if not os.path.isdir(d):
            return out
        for name in os.listdir(d):
            if not name.startswith("hint_") or not name.endswith(".bin"):
                continue
            with open(os.path.join(d, name), "rb") as fh:
                data = fh.read()
            if len(data) < 20:
                continue  # incomplete write from a crash without rename
            qi, ver, count = struct.unpack_from("<QQI", data)
            if ver != db_version:
                continue
            off, entries = 20, []
            try:
                for _ in range(count):
                    v, off = decode_bigint(data, off)
                    entries.append(v)
            except struct.error:
                continue
            out[qi] = entries
        return out

    def delete_hint(self, client_id: bytes, query_index: int,
                    db_version: int) -> None:
        path = os.path.join(self._client_dir(client_id),
                            f"hint_{query_index}_{db_version}.bin")
        try:
            os.unlink(path)
        except FileNotFoundError:
            pass

    def purge_stale(self, client_id: bytes, db_version: int) -> None:
        d = self._client_dir(client_id)
        if not os.path.isdir(d):
            return
        for name in os.listdir(d):
            if name.startswith("hint_") and not name.endswith(f"_{db_version}.bin"):
                os.unlink(os.path.join(d, name))


def _atomic_write(path: str, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path))
    try:
        os.write(fd, data)
        os.fsync(fd)
    finally:
        os.close(fd)
    os.replace(tmp, path)

"""Offline/online PIR over a d0 x d1 database of Z_p symbols.

Roles:
  setup    client generates Paillier keys and a seed; the hint request
           (public key + seed) is the entire offline upstream traffic
  hint     server derives the per-query key ciphertexts from the seed and
           multiplies them against the batch-scaled global hint matrix
  query    client sends key offsets ck_o and an LWE encryption of the row
           selector; all Paillier decryptions happen client-side here
  respond  two matrix-vector multiplies, no modular exponentiation
  extract  client recombines t with the decrypted hint and unpacks slots

The global hint H = -db^T A mod q is shared by all clients. Batch scaling
packs `capacity` database columns per Paillier plaintext; the capacity is
the exact worst-case bound (every packed value must stay below m), computed
against the smallest modulus of the configured bit length so the layout is
client independent.
"""

from dataclasses import dataclass, field
import hashlib
import math
import secrets
import time

import numpy as np

from . import paillier, rns
from .compress import select_scale, phase_bound, STANDARD, QUARTER_DELTA
from .gaussian import DiscreteGaussian
from .lwe import LweParams, phase_to_plaintext, BINARY
from .prg import Stream, DOM_PUBLIC_MATRIX, SEED_BYTES

LAMBDA_BITS = 128

SEPARATE = "separate"
COMBINED = "combined"


@dataclass(frozen=True)
class ProtocolParams:
    lwe: LweParams
    d0: int
    d1: int
    paillier_bits: int = 3072
    scale_regime: str = QUARTER_DELTA
    a_seed: bytes = b"\x00" * SEED_BYTES
    hints_per_client: int = 4
    delta_fail: float = 2.0 ** -40

    def __post_init__(self):
        if self.lwe.noise_sigma > 0 and not self.correctness_margin() > 1:
            raise ValueError("q/p too small for the target failure probability")

    def correctness_margin(self) -> float:
        """(q/p) / (2*p*sigma*sqrt(2*d0*ln(2/delta_fail))); must exceed 1."""
        lwe = self.lwe
        rhs = 2 * lwe.p * lwe.noise_sigma * math.sqrt(
            2 * self.d0 * math.log(2 / self.delta_fail))
        return (lwe.q / lwe.p) / rhs if rhs else float("inf")

    @property
    def gamma(self) -> int:
        return select_scale(self.lwe, self.scale_regime)

    @property
    def capacity(self) -> int:
        """Exact batch capacity: packed worst case < 2^(paillier_bits-1) <= m."""
        limit = 1 << (self.paillier_bits - 1)
        worst_slot = phase_bound(self.lwe) - 1
        ell, total, power = 0, 0, 1
        while total + worst_slot * power < limit:
            total += worst_slot * power
            power *= self.gamma
            ell += 1
        if ell == 0:
            raise ValueError("plaintext modulus cannot hold one slot")
        return ell

    @property
    def d1_prime(self) -> int:
        return -(-self.d1 // self.capacity)

    def params_hash(self) -> bytes:
        lwe = self.lwe
        blob = repr((lwe.n, lwe.q, lwe.p, lwe.noise_sigma, lwe.key_dist,
                     self.d0, self.d1, self.paillier_bits, self.scale_regime,
                     self.a_seed, self.hints_per_client)).encode()
        return hashlib.sha256(blob).digest()

    def public_matrix(self) -> np.ndarray:
        """The shared (d0, n) query matrix, expanded from the public seed."""
        flat = Stream(self.a_seed, DOM_PUBLIC_MATRIX).integers(self.lwe.q,
                                                               self.d0 * self.lwe.n)
        return flat.reshape(self.d0, self.lwe.n)


@dataclass
class HintRequest:
    pk: paillier.PaillierPublicKey
    seed: bytes


@dataclass
class ClientLongTermState:
    sk_paillier: paillier.PaillierSecretKey
    seed: bytes
    next_query_index: int = 0

    @property
    def pk(self):
        return self.sk_paillier.pk


@dataclass
class QuerySecret:
    sk_lwe: np.ndarray
    sk_paillier: paillier.PaillierSecretKey
    query_index: int


@dataclass
class QueryMessage:
    client_id: bytes
    query_index: int
    mode: str
    ck_o: list  # n integers in [0, m)
    qu0: np.ndarray  # d0 integers in [0, q)


@dataclass
class ClientHint:
    query_index: int
    db_version: int
    entries: list  # d1' PaillierCiphertexts


@dataclass
class ResponseMessage:
    mode: str
    query_index: int
    t: list  # d1' integers mod m (separate mode; empty otherwise)
    k: list  # d1' PaillierCiphertexts (stored hint or combined result)


@dataclass
class ClientRegistration:
    pk: paillier.PaillierPublicKey
    seed: bytes
    client_id: bytes
    hints: dict = field(default_factory=dict)  # query_index -> ClientHint
    consumed: set = field(default_factory=set)


def client_id_of(pk: paillier.PaillierPublicKey) -> bytes:
    return hashlib.sha256(pk.serialize()).digest()


class ServerGlobalState:
    """Database-derived state, immutable between update_database calls."""

    def __init__(self, params: ProtocolParams, db: np.ndarray, basis=None,
                 db_version: int = 0):
        lwe = params.lwe
        db = np.asarray(db)
        if db.shape != (params.d0, params.d1):
            raise ValueError("database shape mismatch")
        if int(db.max(initial=0)) >= lwe.p:
            raise ValueError("database symbol out of range")
        self.params = params
        self.db = db
        self.db_version = db_version
        self.basis = basis if basis is not None else rns.build_basis(27, 240)
        q, n = lwe.q, lwe.n
        A = params.public_matrix()
        self.A = A
        self._fast = (q == 1 << 32 and lwe.p <= 256
                      and params.d0 * 128 * (1 << 31) <= 1 << 53
                      and n * (q - 1) < 1 << 53)
        t0 = time.perf_counter()
        if self._fast:
            H = self._global_hint_fast(db, A, q)
        else:
            H = self._global_hint_slow(db, A, q)
        self.hint_time = time.perf_counter() - t0
        self.H = H  # (d1, n) ints mod q
        self.H_scaled = self._scale_rows(H)  # d1' rows of big-int columns
        self.H_rns = rns.matrix_to_rns(self.basis, self.H_scaled)
        self._b_scale_consts = [params.gamma ** j for j in range(params.capacity)]
        if self._fast:
            # centered operands: every float64 partial sum stays within 2^53
            self._dbt_c = (db.astype(np.float64) - 128.0).T.copy()
            self._colsum_c = (db.astype(np.int64) - 128).sum(axis=0)

    @staticmethod
    def _global_hint_fast(db, A, q):
        # H = -db^T A mod q via two exact float64 gemms (db split at 16 bits
        # is unnecessary: db < 2^8, A split 16/16 keeps products < 2^24)
        dbt = db.astype(np.float64).T
        Ai = A.astype(np.int64)
        lo = (Ai & 0xFFFF).astype(np.float64)
        hi = (Ai >> 16).astype(np.float64)
        glo = (dbt @ lo).astype(np.int64)
        ghi = (dbt @ hi).astype(np.int64)
        mask = (1 << 32) - 1
        h = (np.mod(glo, 1 << 32) + ((np.mod(ghi, 1 << 16)) << 16)) & mask
        return ((1 << 32) - h) & mask

    def _global_hint_slow(self, db, A, q):
        d0, d1 = db.shape
        n = A.shape[1]
        H = [[0] * n for _ in range(d1)]
        for c in range(d1):
            col = [int(x) for x in db[:, c]]
            for j in range(n):
                H[c][j] = (-sum(col[i] * int(A[i, j]) for i in range(d0))) % q
        return H

    def _scale_rows(self, H):
        params = self.params
        cap, gamma, n = params.capacity, params.gamma, params.lwe.n
        rows = []
        fast_concat = (gamma == params.lwe.q == 1 << 32
                       and isinstance(H, np.ndarray))
        for g in range(params.d1_prime):
            chunk = range(g * cap, min((g + 1) * cap, params.d1))
            if fast_concat:
                block = np.ascontiguousarray(H[chunk.start:chunk.stop].astype("<u4").T)
                rows.append([int.from_bytes(block[i].tobytes(), "little")
                             for i in range(n)])
            else:
                row = [0] * n
                for j, c in enumerate(chunk):
                    gj = gamma ** j
                    for i in range(n):
                        row[i] += gj * int(H[c][i])
                rows.append(row)
        return rows

    # -- online path -------------------------------------------------------

    def db_matvec(self, qu: np.ndarray) -> np.ndarray:
        """b = db^T qu mod q (the first online matrix multiply)."""
        params = self.params
        q = params.lwe.q
        if self._fast:
            quf = qu.astype(np.float64) - float(1 << 31)
            s = (self._dbt_c @ quf).astype(np.int64)
            sum_quc = int(qu.astype(np.uint64).sum()) - params.d0 * (1 << 31)
            total = (s + (self._colsum_c << 31)
                     + (128 * sum_quc + params.d0 * 128 * (1 << 31)))
            return np.mod(total, 1 << 32).astype(np.uint64)
        out = np.empty(params.d1, dtype=object)
        qi = [int(x) for x in qu]
        for c in range(params.d1):
            out[c] = sum(int(self.db[i, c]) * qi[i] for i in range(params.d0)) % q
        return out

    def scaled_b(self, b) -> list:
        """Group the d1 values of b into d1' batch-scaled big integers."""
        params = self.params
        cap, gamma = params.capacity, params.gamma
        if gamma == params.lwe.q == 1 << 32:
            arr = np.asarray(b, dtype=np.uint64).astype("<u4")
            return [int.from_bytes(arr[g * cap:(g + 1) * cap].tobytes(), "little")
                    for g in range(params.d1_prime)]
        return [sum(self._b_scale_consts[j] * int(b[g * cap + j])
                    for j in range(min(cap, params.d1 - g * cap)))
                for g in range(params.d1_prime)]


def setup(params: ProtocolParams, rng=None, primes=None):
    """Client key generation. Returns (long-term state, hint request)."""
    if primes is not None:
        sk = paillier.PaillierSecretKey(*primes)
        if sk.pk.bit_length != params.paillier_bits:
            raise ValueError("test primes do not match the configured size")
    else:
        _, sk = paillier.keygen(params.paillier_bits, rng)
    seed = (secrets.token_bytes(SEED_BYTES) if rng is None
            else bytes(rng.randrange(256) for _ in range(SEED_BYTES)))
    return ClientLongTermState(sk, seed), HintRequest(sk.pk, seed)


def derive_ck_r(pk, seed: bytes, query_index: int, n: int):
    """The seeded compression-key ciphertexts for one query index."""
    return [paillier.sample_ciphertext(pk, seed, (query_index << 32) | i)
            for i in range(n)]


def hint(state: ServerGlobalState, reg: ClientRegistration,
         query_index: int) -> ClientHint:
    params = state.params
    ck_r = derive_ck_r(reg.pk, reg.seed, query_index, params.lwe.n)
    entries = paillier.paillier_matmul(reg.pk, state.H_scaled, ck_r)
    return ClientHint(query_index, state.db_version, entries)


def query(client: ClientLongTermState, params: ProtocolParams, i0: int,
          query_index: int, rng=None, mode: str = SEPARATE, A=None):
    if not 0 <= i0 < params.d0:
        raise IndexError("row index out of range")
    if query_index < client.next_query_index:
        raise ValueError("query index already consumed")
    lwe_p = params.lwe
    m = client.pk.m
    rng_sys = rng or secrets.SystemRandom()
    sk_lwe = np.array([rng_sys.randrange(2) for _ in range(lwe_p.n)],
                      dtype=np.uint64)
    # decrypt the seeded key ciphertexts lazily, only now
    pt_r = [paillier.decrypt(client.sk_paillier, c)
            for c in derive_ck_r(client.pk, client.seed, query_index, lwe_p.n)]
    ck_o = [(int(sk_lwe[i]) - pt_r[i]) % m for i in range(lwe_p.n)]
    if A is None:
        A = params.public_matrix()
    e = DiscreteGaussian(lwe_p.noise_sigma).sample_vector(params.d0, rng_sys)
    q = lwe_p.q
    if q == 1 << 32 and lwe_p.n * (q - 1) < 1 << 53:
        As = (A.astype(np.float64) @ sk_lwe.astype(np.float64)).astype(np.int64)
    else:
        As = np.array([sum(int(A[i, j]) * int(sk_lwe[j]) for j in range(lwe_p.n))
                       for i in range(params.d0)], dtype=object)
    qu0 = np.empty(params.d0, dtype=np.uint64)
    delta = lwe_p.delta
    for i in range(params.d0):
        v = int(As[i]) + int(e[i]) + (delta if i == i0 else 0)
        qu0[i] = v % q
    client.next_query_index = query_index + 1
    qmsg = QueryMessage(client_id_of(client.pk), query_index, mode, ck_o, qu0)
    return qmsg, QuerySecret(sk_lwe, client.sk_paillier, query_index)


def respond(state: ServerGlobalState, reg: ClientRegistration,
            qmsg: QueryMessage, mode: str = None, timings=None) -> ResponseMessage:
    params = state.params
    mode = mode or qmsg.mode
    if len(qmsg.ck_o) != params.lwe.n or len(qmsg.qu0) != params.d0:
        raise ValueError("query dimensions do not match the parameters")
    stored = reg.hints.get(qmsg.query_index)
    if stored is None or stored.db_version != state.db_version:
        raise KeyError("no hint for this query index and database version")
    m = reg.pk.m
    t_total = time.perf_counter()
    t0 = time.perf_counter()
    b = state.db_matvec(qmsg.qu0)
    mm1 = time.perf_counter() - t0
    t0 = time.perf_counter()
    hv = rns.rns_matmul_mod(state.basis, state.H_rns, qmsg.ck_o, m)
    bs = state.scaled_b(b)
    t = [(bs[g] + hv[g]) % m for g in range(params.d1_prime)]
    mm2 = time.perf_counter() - t0
    if mode == SEPARATE:
        out = ResponseMessage(SEPARATE, qmsg.query_index, t, stored.entries)
    elif mode == COMBINED:
        out = ResponseMessage(COMBINED, qmsg.query_index, [], [
            paillier.add(reg.pk, paillier.trivial_encrypt(reg.pk, t[g]),
                         stored.entries[g])
            for g in range(params.d1_prime)])
    else:
        raise ValueError("unknown response mode")
    if timings is not None:
        timings["db_matvec"] = mm1
        timings["hint_matvec"] = mm2
        timings["total"] = time.perf_counter() - t_total
    return out


def extract(client_sk: paillier.PaillierSecretKey, params: ProtocolParams,
            rmsg: ResponseMessage, hint_entries=None) -> list:
    """Recover row i0 of the database (d1 records in [0, p)).

    In client-storage mode the response omits the hint; pass the locally
    stored entries as hint_entries.
    """
    m = client_sk.pk.m
    if rmsg.mode == SEPARATE:
        k = rmsg.k if rmsg.k else hint_entries
        mu = [(rmsg.t[g] + paillier.decrypt(client_sk, k[g])) % m
              for g in range(len(k))]
    else:
        mu = [paillier.decrypt(client_sk, c) for c in rmsg.k]
    cap, gamma, lwe_p = params.capacity, params.gamma, params.lwe
    q = lwe_p.q
    records = []
    for g, val in enumerate(mu):
        nslots = min(cap, params.d1 - g * cap)
        if gamma == q == 1 << 32:
            words = np.frombuffer(val.to_bytes((params.paillier_bits + 7) // 8,
                                               "little"), dtype="<u4")
            for j in range(nslots):
                records.append(phase_to_plaintext(lwe_p, int(words[j])))
        else:
            for j in range(nslots):
                slot = (val // gamma ** j) % gamma
                records.append(phase_to_plaintext(lwe_p, slot % q))
    return records


def client_storage_hint_transfer(reg: ClientRegistration,
                                 query_index: int) -> ClientHint:
    """Hand the stored hint to the client (client-storage mode); single use."""
    if query_index in reg.consumed:
        raise ValueError("hint already consumed")
    h = reg.hints.get(query_index)
    if h is None:
        raise KeyError("no hint for this query index")
    reg.consumed.add(query_index)
    return h

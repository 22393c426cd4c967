"""Residue-number-system engine for the online big-modulus matrix multiply.

Operands are converted to residues modulo many small primes; the per-prime
matrix-vector products run in machine arithmetic (float64 BLAS with operand
splitting keeps every partial sum below 2^53, hence exact), and the result
is reconstructed with Garner's mixed-radix algorithm before one final
reduction mod m. Exactness requires Q = prod(primes) to exceed the largest
true inner-product value; that bound is asserted at setup.
"""

from dataclasses import dataclass

import gmpy2
import numpy as np

SPLIT_BITS = 14


@dataclass
class RnsBasis:
    primes: np.ndarray  # float64, each < 2^27
    Q: int
    # garner constants: inv_partial[i] = (prod_{j<i} p_j)^(-1) mod p_i
    inv_partial: np.ndarray
    primes_int: list  # the same primes as exact Python ints

    @property
    def count(self):
        return len(self.primes)


def build_basis(prime_bits: int, count: int) -> RnsBasis:
    """The `count` largest primes below 2^prime_bits, descending."""
    if prime_bits < 2 or prime_bits > 27:
        raise ValueError("prime size must be between 2 and 27 bits")
    primes = []
    x = (1 << prime_bits) - 1
    while len(primes) < count and x >= 2:
        if gmpy2.is_prime(x):
            primes.append(x)
        x -= 1
    if len(primes) < count:
        raise ValueError("not enough primes of %d bits" % prime_bits)
    Q = 1
    inv_partial = np.zeros(count, dtype=np.int64)
    for i, p in enumerate(primes):
        inv_partial[i] = int(gmpy2.invert(Q % p, p)) if i else 1
        Q *= p
    return RnsBasis(np.array(primes, dtype=np.float64), Q, inv_partial, [int(p) for p in primes])


def _limbs16(values, nbytes: int) -> np.ndarray:
    """Matrix of 16-bit little-endian limbs, one row per value."""
    buf = b"".join(int(v).to_bytes(nbytes, "little") for v in values)
    return np.frombuffer(buf, dtype="<u2").reshape(len(values), nbytes // 2)


def _power_table(basis: RnsBasis, nlimbs: int) -> np.ndarray:
    """pow(2^16, k) mod p for every prime/limb position, as float64."""
    count = basis.count
    tbl = np.empty((nlimbs, count), dtype=np.float64)
    cur = np.ones(count, dtype=np.int64)
    ip = basis.primes.astype(np.int64)
    for k in range(nlimbs):
        tbl[k] = cur
        cur = (cur << 16) % ip
    return tbl


def to_rns(basis: RnsBasis, values) -> np.ndarray:
    """Residues of big integers: shape (len(values), count), float64."""
    values = [int(v) for v in values]
    if not values:
        return np.zeros((0, basis.count))
    maxbits = max(v.bit_length() for v in values)
    nbytes = max(2, ((maxbits + 15) // 16) * 2)
    limbs = _limbs16(values, nbytes).astype(np.float64)
    tbl = _power_table(basis, limbs.shape[1])
    # limbs < 2^16, table entries < 2^27: chunk the contraction so partial
    # sums stay below 2^53
    chunk = 1 << (53 - 16 - 27)
    acc = np.zeros((len(values), basis.count), dtype=np.float64)
    for s in range(0, limbs.shape[1], chunk):
        part = limbs[:, s:s + chunk] @ tbl[s:s + chunk]
        acc = np.mod(acc + part, basis.primes)
    return acc


def from_rns(basis: RnsBasis, residues) -> int:
    """Garner reconstruction of a single value in [0, Q)."""
    return from_rns_batch(basis, np.asarray(residues, dtype=np.float64).reshape(1, -1))[0]


def from_rns_batch(basis: RnsBasis, residues, mod=None):
    """Reconstruct each row of `residues`; optionally reduce mod `mod`.

    Mixed-radix digits are computed vectorized across rows, one prime per
    step; the final big-integer assembly uses precomputed partial products.
    """
    res = np.asarray(residues, dtype=np.int64)
    nrows = res.shape[0]
    count = basis.count
    ip = basis.primes.astype(np.int64)
    digits = np.zeros((count, nrows), dtype=np.int64)
    # acc_i tracks (x mod p_i) of the value assembled so far; step k peels
    # off digit k = (r_k - acc_k) / prod_{j<k} p_j mod p_k
    acc = np.zeros((count, nrows), dtype=np.int64)
    partial_mod = np.ones(count, dtype=np.int64)  # prod_{j<k} p_j mod p_i
    for k in range(count):
        pk = int(ip[k])
        d = (res[:, k] - acc[k]) % pk
        d = d * int(basis.inv_partial[k]) % pk
        digits[k] = d
        if k + 1 < count:
            acc = (acc + partial_mod[:, None] * d[None, :]) % ip[:, None]
            partial_mod = partial_mod * pk % ip
    consts = _assembly_consts(basis, mod)
    out = []
    for r in range(nrows):
        v = 0
        col = digits[:, r]
        for k in range(count):
            dk = int(col[k])
            if dk:
                v += dk * consts[k]
        out.append(v % mod if mod is not None else v)
    return out


_consts_cache = {}


def _assembly_consts(basis: RnsBasis, mod):
    """prod_{j<k} p_j (mod `mod`) for each k, cached per (basis, mod)."""
    key = (id(basis), mod)
    hit = _consts_cache.get(key)
    if hit is not None:
        return hit
    consts = []
    run = 1
    for p in basis.primes_int:
        consts.append(run if mod is None else run % mod)
        run *= int(p)
    _consts_cache[key] = consts
    return consts


def matrix_to_rns(basis: RnsBasis, H) -> np.ndarray:
    """Residues of a big-integer matrix: shape (count, rows, cols), float64."""
    rows = len(H)
    cols = len(H[0]) if rows else 0
    flat = [x for row in H for x in row]
    res = to_rns(basis, flat)  # (rows*cols, count)
    return np.ascontiguousarray(res.T.reshape(basis.count, rows, cols))


def check_matmul_bound(basis: RnsBasis, n: int, h_bound: int, v_bound: int):
    """Exactness condition: Q must exceed the largest true inner product."""
    if basis.Q <= n * h_bound * v_bound:
        raise ValueError("basis product too small for exact reconstruction")


def rns_matmul_mod(basis: RnsBasis, H_rns: np.ndarray, v, m: int, h_bound=None):
    """(H @ v) mod m with H given in residue form (count, d, n).

    Exact: per-prime products use a 14-bit split of the vector residues so
    all float64 partial sums stay below 2^53, and Q exceeds the true
    inner-product bound (checked at setup via check_matmul_bound).
    """
    count, d, n = H_rns.shape
    if len(v) != n:
        raise ValueError("dimension mismatch")
    v = [int(x) for x in v]
    check_matmul_bound(basis, n, m - 1 if h_bound is None else h_bound,
                       max(v, default=0))
    if n * ((1 << SPLIT_BITS) - 1) * ((1 << 27) - 1) >= 1 << 53:
        raise ValueError("dimension too large for the exact float64 kernel")
    vres = to_rns(basis, v)  # (n, count)
    vint = vres.astype(np.int64)
    vlo = (vint & ((1 << SPLIT_BITS) - 1)).astype(np.float64)
    vhi = (vint >> SPLIT_BITS).astype(np.float64)
    # batched per-prime matvecs
    lo = H_rns @ vlo.T[:, :, None]  # (count, d, 1)
    hi = H_rns @ vhi.T[:, :, None]
    p = basis.primes[:, None]
    t = (np.mod(lo[:, :, 0], p) + np.mod(hi[:, :, 0], p) * float(1 << SPLIT_BITS))
    t = np.mod(t, p)  # < 2^27 * 2^14 + 2^27, exact
    return from_rns_batch(basis, t.T, mod=m)

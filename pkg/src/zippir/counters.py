"""Global operation counters for instrumenting the crypto layers.

Counts public-API operations: ciphertext additions, plaintext-scalar
multiplications, encryptions, decryptions, modular exponentiations and raw
group multiplications. Tests snapshot these to prove properties like "the
online path performs zero modular exponentiations".
"""

from dataclasses import dataclass, fields
import threading


@dataclass
class OpCounts:
    add: int = 0
    scalar_mul: int = 0
    encrypt: int = 0
    decrypt: int = 0
    modexp: int = 0
    group_mult: int = 0

    def __sub__(self, other):
        return OpCounts(**{f.name: getattr(self, f.name) - getattr(other, f.name)
                           for f in fields(OpCounts)})

    def copy(self):
        return OpCounts(**{f.name: getattr(self, f.name) for f in fields(OpCounts)})


_counts = OpCounts()
_lock = threading.Lock()


def bump(name, amount=1):
    with _lock:
        setattr(_counts, name, getattr(_counts, name) + amount)


def snapshot():
    with _lock:
        return _counts.copy()


def reset():
    global _counts
    with _lock:
        _counts = OpCounts()


class measure:
    """Context manager yielding the OpCounts delta over the with-block."""

    def __enter__(self):
        self._start = snapshot()
        self.delta = OpCounts()
        return self

    def __exit__(self, *exc):
        end = snapshot()
        d = end - self._start
        for f in fields(OpCounts):
            setattr(self.delta, f.name, getattr(d, f.name))
        return False

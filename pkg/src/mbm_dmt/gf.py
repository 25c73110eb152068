"""Finite fields GF(p^m) and Reed-Solomon (evaluation) MDS codes.

Field elements are integers ``0 .. q-1``; the base-``p`` digits of an
element are its polynomial coefficients (least significant digit = constant
term).  Multiplication goes through exp/log tables built from a primitive
element.  All arithmetic helpers accept numpy integer arrays.

Reduction polynomials for ``p = 2`` are fixed (see ``BINARY_POLYS``); for odd
``p`` and ``m > 1`` the lexicographically smallest monic irreducible
polynomial of degree ``m`` is used.  Both choices make codewords
reproducible across runs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Field",
    "MdsCode",
    "BudgetError",
    "is_prime",
    "prime_power",
    "next_prime_power",
    "rs_encode",
    "codebook",
    "min_distance_exhaustive",
    "count_support_subset",
    "check_information_sets",
]

ENUMERATION_BUDGET = 10**6

# x^m + ... as an integer bit mask, one primitive polynomial per degree
BINARY_POLYS = {
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0b100011101,
    9: 0b1000010001,
    10: 0b10000001001,
    11: 0b100000000101,
    12: 0b1000001010011,
    13: 0b10000000011011,
    14: 0b100010001000011,
    15: 0b1000000000000011,
    16: 0b10001000000001011,
}


class BudgetError(RuntimeError):
    """Exhaustive enumeration would exceed the configured budget."""


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    return all(p % d for d in range(3, math.isqrt(p) + 1, 2))


def prime_power(q: int):
    """Return ``(p, m)`` with ``q = p**m``, or ``None`` if q is not a prime power."""
    if q < 2:
        return None
    for p in range(2, math.isqrt(q) + 1):
        if q % p == 0:
            if not is_prime(p):
                return None
            m = 0
            while q % p == 0:
                q //= p
                m += 1
            return (p, m) if q == 1 else None
    return (q, 1)


def next_prime_power(x: float) -> int:
    q = max(2, math.ceil(x - 1e-9))
    while prime_power(q) is None:
        q += 1
    return q


def _digits(v, p, m):
    return [(v // p**i) % p for i in range(m)]


def _polymulmod(a, b, p, poly):
    """Multiply coefficient lists modulo the monic ``poly`` (low-order first)."""
    m = len(poly) - 1
    prod = [0] * (2 * m - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    for d in range(len(prod) - 1, m - 1, -1):
        coef = prod[d]
        if coef:
            for k in range(m + 1):
                prod[d - m + k] = (prod[d - m + k] - coef * poly[k]) % p
    return prod[:m]


def _is_irreducible(poly, p):
    """Trial division by every monic polynomial of degree 1..m/2."""
    m = len(poly) - 1
    for deg in range(1, m // 2 + 1):
        for low in itertools.product(range(p), repeat=deg):
            div = list(low) + [1]
            rem = list(poly)
            for d in range(m, deg - 1, -1):
                coef = rem[d]
                if coef:
                    for k in range(deg + 1):
                        rem[d - deg + k] = (rem[d - deg + k] - coef * div[k]) % p
            if not any(rem[:deg]):
                return False
    return True


def _smallest_irreducible(p, m):
    for low in itertools.product(range(p), repeat=m):
        poly = list(reversed(low)) + [1]
        if poly[0] and _is_irreducible(poly, p):
            return poly
    raise ValueError(f"no irreducible polynomial of degree {m} over GF({p})")


@dataclass(frozen=True, eq=False)
class Field:
    """GF(p^m) with exp/log multiplication tables."""

    p: int
    m: int = 1
    reduction_poly: tuple = field(default=())

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"characteristic must be prime, got {self.p}")
        if self.m < 1:
            raise ValueError("extension degree must be >= 1")
        q = self.p**self.m
        if q > 1 << 16:
            raise ValueError(f"field order {q} above the 2^16 desk-scale limit")
        poly = tuple(self.reduction_poly)
        if self.m > 1:
            if not poly:
                if self.p == 2:
                    mask = BINARY_POLYS[self.m]
                    poly = tuple((mask >> i) & 1 for i in range(self.m + 1))
                else:
                    poly = tuple(_smallest_irreducible(self.p, self.m))
            if len(poly) != self.m + 1 or poly[-1] != 1:
                raise ValueError("reduction polynomial must be monic of degree m")
            if not _is_irreducible(list(poly), self.p):
                raise ValueError(f"reduction polynomial {poly} is reducible over GF({self.p})")
        object.__setattr__(self, "reduction_poly", poly)
        exp, log = self._build_tables(q)
        object.__setattr__(self, "_exp", exp)
        object.__setattr__(self, "_log", log)

    @classmethod
    def of_order(cls, q: int) -> "Field":
        pm = prime_power(q)
        if pm is None:
            raise ValueError(f"{q} is not a prime power")
        return cls(*pm)

    @property
    def q(self) -> int:
        return self.p**self.m

    def _mul_slow(self, a, b):
        if self.m == 1:
            return (a * b) % self.p
        if self.p == 2:
            mask = sum(c << i for i, c in enumerate(self.reduction_poly))
            prod = 0
            while b:
                if b & 1:
                    prod ^= a
                b >>= 1
                a <<= 1
                if a >> self.m:
                    a ^= mask
            return prod
        da, db = _digits(a, self.p, self.m), _digits(b, self.p, self.m)
        prod = _polymulmod(da, db, self.p, list(self.reduction_poly))
        return sum(c * self.p**i for i, c in enumerate(prod))

    def _build_tables(self, q):
        order = q - 1
        for g in range(2 if q > 2 else 1, q):
            exp = np.empty(2 * order, dtype=np.int64)
            x = 1
            ok = True
            for i in range(order):
                exp[i] = x
                x = self._mul_slow(x, g)
                if x == 1 and i < order - 1:
                    ok = False
                    break
            if ok:
                exp[order:] = exp[:order]
                log = np.zeros(q, dtype=np.int64)
                log[exp[:order]] = np.arange(order)
                return exp, log
        raise RuntimeError("no primitive element found")

    # element-wise arithmetic on ints or integer arrays
    def add(self, a, b):
        a, b = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
        if self.p == 2:
            return a ^ b
        if self.m == 1:
            return (a + b) % self.p
        out = np.zeros(np.broadcast(a, b).shape, dtype=np.int64)
        for i in range(self.m):
            w = self.p**i
            out += (((a // w) % self.p + (b // w) % self.p) % self.p) * w
        return out

    def neg(self, a):
        a = np.asarray(a, dtype=np.int64)
        if self.p == 2:
            return a
        out = np.zeros_like(a)
        for i in range(self.m):
            w = self.p**i
            out += ((-(a // w)) % self.p) * w
        return out

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        a, b = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
        nz = (a != 0) & (b != 0)
        prod = self._exp[(self._log[a] + self._log[b]) % (self.q - 1)]
        return np.where(nz, prod, 0)

    def inv(self, a):
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("zero has no multiplicative inverse")
        return self._exp[(-self._log[a]) % (self.q - 1)]

    def power(self, a, k: int):
        a = np.asarray(a, dtype=np.int64)
        if k == 0:
            return np.ones_like(a)
        return np.where(a == 0, 0, self._exp[(self._log[a] * k) % (self.q - 1)])

    def describe(self) -> str:
        poly = "".join(map(str, self.reduction_poly)) if self.reduction_poly else "-"
        return f"p={self.p} m={self.m} poly={poly}"


@dataclass(frozen=True, eq=False)
class MdsCode:
    """Reed-Solomon code: codeword_i = sum_j message_j * x_i^j."""

    field: Field
    N: int
    K: int
    eval_points: tuple = ()

    def __post_init__(self):
        q = self.field.q
        if not 1 <= self.K <= self.N:
            raise ValueError(f"need 1 <= K <= N, got N={self.N}, K={self.K}")
        if self.N > q:
            raise ValueError(f"block length N={self.N} exceeds field size q={q}")
        pts = tuple(int(v) for v in self.eval_points) or \
            tuple(list(range(1, q)) + [0])[: self.N]
        if len(pts) != self.N or len(set(pts)) != self.N or not all(0 <= v < q for v in pts):
            raise ValueError("need N pairwise distinct evaluation points in the field")
        object.__setattr__(self, "eval_points", pts)
        x = np.array(pts, dtype=np.int64)
        gen = np.stack([self.field.power(x, j) for j in range(self.K)])
        gen.setflags(write=False)
        object.__setattr__(self, "generator", gen)

    @classmethod
    def reed_solomon(cls, q: int, N: int, K: int, eval_points=()) -> "MdsCode":
        return cls(Field.of_order(q), N, K, tuple(eval_points))

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def D(self) -> int:
        return self.N - self.K + 1

    @property
    def rate(self) -> float:
        return self.K / self.N

    @property
    def size(self) -> int:
        return self.q**self.K

    def describe(self) -> str:
        pts = ",".join(map(str, self.eval_points))
        return (f"{self.field.describe()} N={self.N} K={self.K} D={self.D} "
                f"eval={pts}")


def rs_encode(code: MdsCode, message) -> np.ndarray:
    """Encode one message (length K) or a stack of shape (..., K)."""
    msg = np.asarray(message, dtype=np.int64)
    if msg.shape[-1] != code.K:
        raise ValueError(f"message length {msg.shape[-1]} != K={code.K}")
    if np.any((msg < 0) | (msg >= code.q)):
        raise ValueError("message symbols must be field elements")
    f = code.field
    out = np.zeros(msg.shape[:-1] + (code.N,), dtype=np.int64)
    for j in range(code.K):
        out = f.add(out, f.mul(msg[..., j, None], code.generator[j]))
    return out


def _check_budget(code, budget):
    if code.size > budget:
        raise BudgetError(f"q^K = {code.size} codewords exceeds budget {budget}")


def codebook(code: MdsCode, budget: int = ENUMERATION_BUDGET) -> np.ndarray:
    """All codewords, sorted lexicographically (row 0 is the zero word)."""
    _check_budget(code, budget)
    digits = np.indices((code.q,) * code.K).reshape(code.K, -1).T
    words = rs_encode(code, digits)
    order = np.lexsort(words.T[::-1])
    out = words[order]
    out.setflags(write=False)
    return out


def min_distance_exhaustive(code: MdsCode, budget: int = ENUMERATION_BUDGET) -> int:
    words = codebook(code, budget)
    weights = np.count_nonzero(words, axis=1)
    return int(weights[weights > 0].min()) if np.any(weights > 0) else code.N


def count_support_subset(code: MdsCode, positions, budget: int = ENUMERATION_BUDGET) -> int:
    """Number of codewords whose support is exactly ``positions`` (0-based).

    Raises ``ArithmeticError`` if the count exceeds q^(|I| - D + 1), which
    would mean the code is not MDS.
    """
    idx = sorted(set(int(i) for i in positions))
    if any(not 0 <= i < code.N for i in idx):
        raise ValueError("positions must lie in [0, N)")
    mask = np.zeros(code.N, dtype=bool)
    mask[idx] = True
    if 0 < len(idx) < code.D:
        return 0
    words = codebook(code, budget)
    count = int(np.count_nonzero(np.all((words != 0) == mask, axis=1)))
    if idx and count > code.q ** (len(idx) - code.D + 1):
        raise ArithmeticError(f"|Delta(I)| = {count} violates the MDS size bound")
    return count


def check_information_sets(code: MdsCode, budget: int = ENUMERATION_BUDGET) -> bool:
    """Every K positions, every pattern on them: exactly one matching codeword."""
    words = codebook(code, budget)
    for pos in itertools.combinations(range(code.N), code.K):
        sub = words[:, pos]
        keys = np.ravel_multi_index(sub.T, (code.q,) * code.K)
        if np.bincount(keys, minlength=code.size).min() != 1:
            return False
    return True

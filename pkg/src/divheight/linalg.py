"""Exact integer determinants and rational linear solves."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import kernels

# below this size fraction-free elimination in Python ints is faster than CRT
BAREISS_MAX_N = 24


def det_bareiss(rows: Sequence[Sequence[int]]) -> int:
    """Fraction-free (Bareiss) determinant; every intermediate is an exact integer."""
    m = [list(map(int, r)) for r in rows]
    n = len(m)
    if n == 0:
        return 1
    if any(len(r) != n for r in m):
        raise ValueError("matrix is not square")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = m[k][k]
        rowk = m[k]
        for i in range(k + 1, n):
            rowi = m[i]
            a = rowi[k]
            for j in range(k + 1, n):
                rowi[j] = (rowi[j] * pivot - a * rowk[j]) // prev
            rowi[k] = 0
        prev = pivot
    return sign * m[n - 1][n - 1]


def hadamard_bound(rows: Sequence[Sequence[int]]) -> int:
    """Integer B >= |det| (product of Euclidean row norms, rounded up)."""
    bound = 1
    for r in rows:
        sq = sum(x * x for x in r)
        if sq == 0:
            return 0
        root = math.isqrt(sq)
        if root * root < sq:
            root += 1
        bound *= root
    return bound


def _as_int64(rows: Sequence[Sequence[int]]) -> np.ndarray | None:
    try:
        arr = np.array(rows, dtype=np.int64)
    except OverflowError:
        return None
    return arr if arr.size == 0 or int(np.abs(arr).max()) < 1 << 26 else None


def _hadamard_small(arr: np.ndarray) -> int:
    # entries below 2**26: row sums of squares stay below 2**63 for n < 2**11
    bound = 1
    for sq in (arr * arr).sum(axis=1).tolist():
        if sq == 0:
            return 0
        root = math.isqrt(sq)
        bound *= root if root * root == sq else root + 1
    return bound


def det_multimodular(rows: Sequence[Sequence[int]], det_mod_p=None) -> int:
    """Determinant via residues modulo word-sized primes and CRT.

    The number of primes is fixed in advance from the Hadamard bound, so the
    result is exact, not probabilistic.
    """
    det_mod_p = det_mod_p or kernels.det_mod_p
    n = len(rows)
    if n == 0:
        return 1
    small = _as_int64(rows) if n < 1 << 11 else None
    if small is not None:
        bound = _hadamard_small(small)
        reduce_mod = lambda p: small % p
    else:
        bound = hadamard_bound(rows)
        obj = np.array([[int(x) for x in r] for r in rows], dtype=object)
        reduce_mod = lambda p: (obj % p).astype(np.int64)
    if bound == 0:
        return 0
    need = 2 * bound + 1
    # every prime exceeds 2**30
    primes = kernels.primes_below_2_31(need.bit_length() // 30 + 1)
    modulus = 1
    value = 0
    for p in primes:
        residue = det_mod_p(reduce_mod(p), p)
        t = ((residue - value) * pow(modulus, -1, p)) % p
        value += modulus * t
        modulus *= p
    if value > modulus // 2:
        value -= modulus
    return value


def integer_det(rows: Sequence[Sequence[int]]) -> int:
    n = len(rows)
    if n <= BAREISS_MAX_N:
        return det_bareiss(rows)
    return det_multimodular(rows)


def solve_rational(a: Sequence[Sequence], b: Sequence) -> list[Fraction]:
    """Exact solution of a square nonsingular system; raises on singularity."""
    n = len(a)
    m = [[Fraction(x) for x in row] + [Fraction(bi)] for row, bi in zip(a, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        m[col], m[piv] = m[piv], m[col]
        inv = 1 / m[col][col]
        rowc = [x * inv for x in m[col]]
        m[col] = rowc
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                rowr = m[r]
                for j in range(col, n + 1):
                    if rowc[j]:
                        rowr[j] -= f * rowc[j]
    return [m[i][n] for i in range(n)]

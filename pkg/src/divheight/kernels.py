"""Hot numeric loops, compiled with numba when available.

Set ``DIVHEIGHT_DISABLE_NUMBA=1`` to force the pure-numpy implementations
(same signatures, same results).  Each public kernel has a ``*_numba`` and a
``*_numpy`` variant; the unsuffixed name is bound to whichever is active.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("DIVHEIGHT_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:
    if _DISABLED:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via the env flag
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]
        return lambda f: f


USE_NUMBA = HAVE_NUMBA and not _DISABLED

# primes below 2**31 so that products of residues fit in int64
_PRIME_CACHE: list[int] = []


def primes_below_2_31(count: int) -> list[int]:
    """The ``count`` largest primes below 2**31, descending."""
    from sympy import prevprime

    p = _PRIME_CACHE[-1] if _PRIME_CACHE else 2**31
    while len(_PRIME_CACHE) < count:
        p = prevprime(p)
        _PRIME_CACHE.append(p)
    return _PRIME_CACHE[:count]


# ---------------------------------------------------------------------------
# determinant modulo a word-sized prime


@njit(cache=True)
def _inv_mod(a, p):
    # extended Euclid; a != 0 mod p
    t, newt = 0, 1
    r, newr = p, a % p
    while newr != 0:
        q = r // newr
        t, newt = newt, t - q * newt
        r, newr = newr, r - q * newr
    if t < 0:
        t += p
    return t


@njit(cache=True)
def _det_mod_p_numba(a, p):
    n = a.shape[0]
    m = a.copy()
    det = 1
    for col in range(n):
        piv = -1
        for r in range(col, n):
            if m[r, col] != 0:
                piv = r
                break
        if piv < 0:
            return 0
        if piv != col:
            for c in range(col, n):
                tmp = m[col, c]
                m[col, c] = m[piv, c]
                m[piv, c] = tmp
            det = (p - det) % p
        pv = m[col, col]
        det = (det * pv) % p
        inv = _inv_mod(pv, p)
        for r in range(col + 1, n):
            f = m[r, col]
            if f == 0:
                continue
            f = (f * inv) % p
            for c in range(col, n):
                m[r, c] = (m[r, c] - f * m[col, c]) % p
    return det


def _det_mod_p_numpy(a, p):
    m = np.array(a, dtype=np.int64, copy=True)
    n = m.shape[0]
    det = 1
    for col in range(n):
        nz = np.nonzero(m[col:, col])[0]
        if nz.size == 0:
            return 0
        piv = col + int(nz[0])
        if piv != col:
            m[[col, piv]] = m[[piv, col]]
            det = (p - det) % p
        pv = int(m[col, col])
        det = (det * pv) % p
        inv = pow(pv, -1, p)
        f = (m[col + 1:, col] * inv) % p
        m[col + 1:, col:] = (m[col + 1:, col:] - np.outer(f, m[col, col:]) % p) % p
    return det


def det_mod_p_numba(a, p: int) -> int:
    return int(_det_mod_p_numba(np.ascontiguousarray(a, dtype=np.int64), np.int64(p)))


def det_mod_p_numpy(a, p: int) -> int:
    return int(_det_mod_p_numpy(a, p))


# ---------------------------------------------------------------------------
# Jensen slices: for each row of polynomial coefficients (highest degree
# first) return log|lead| + sum log max(1, |root|)


@njit(cache=True)
def _jensen_rows_numba(rows):
    nrows, width = rows.shape
    out = np.empty(nrows, dtype=np.float64)
    for r in range(nrows):
        start = 0
        while start < width and rows[r, start] == 0:
            start += 1
        if start == width:
            out[r] = -np.inf
            continue
        lead = rows[r, start]
        deg = width - 1 - start
        acc = np.log(abs(lead))
        if deg > 0:
            comp = np.zeros((deg, deg), dtype=np.complex128)
            for j in range(deg):
                comp[0, j] = -rows[r, start + 1 + j] / lead
            for j in range(1, deg):
                comp[j, j - 1] = 1.0
            roots = np.linalg.eigvals(comp)
            for z in roots:
                az = abs(z)
                if az > 1.0:
                    acc += np.log(az)
        out[r] = acc
    return out


def _jensen_rows_numpy(rows):
    out = np.empty(rows.shape[0])
    for r, row in enumerate(rows):
        nz = np.nonzero(row)[0]
        if nz.size == 0:
            out[r] = -np.inf
            continue
        row = row[nz[0]:]
        acc = np.log(abs(row[0]))
        if row.size > 1:
            az = np.abs(np.roots(row))
            acc += np.log(az[az > 1.0]).sum()
        out[r] = acc
    return out


def jensen_rows_numba(rows) -> np.ndarray:
    return _jensen_rows_numba(np.ascontiguousarray(rows, dtype=np.complex128))


def jensen_rows_numpy(rows) -> np.ndarray:
    return _jensen_rows_numpy(np.asarray(rows, dtype=np.complex128))


if USE_NUMBA:
    det_mod_p = det_mod_p_numba
    jensen_rows = jensen_rows_numba
else:
    det_mod_p = det_mod_p_numpy
    jensen_rows = jensen_rows_numpy

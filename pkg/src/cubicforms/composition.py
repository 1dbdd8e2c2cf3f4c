"""Real composition algebras of dimension 1, 2, 4, 8 via Cayley-Dickson doubling.

Elements are real arrays of length m in the basis e_0 = 1, e_1, ..., e_{m-1}.
An element of the doubled algebra is a pair (a, b) stored as concat(a, b), and

    (a, b)(c, d) = (ac - conj(d) b, d a + b conj(c)),   conj(a, b) = (conj(a), -b).

Starting from R this gives C, the quaternions H and the octonions O.  The
octonions are not associative, so products of three factors must be bracketed.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

DIMENSIONS = (1, 2, 4, 8)


def conj(x: np.ndarray) -> np.ndarray:
    out = -np.asarray(x, dtype=float)
    out[..., 0] *= -1
    return out


def mult(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    m = x.shape[-1]
    if m == 1:
        return x * y
    h = m // 2
    a, b = x[..., :h], x[..., h:]
    c, d = y[..., :h], y[..., h:]
    first = mult(a, c) - mult(conj(d), b)
    second = mult(d, a) + mult(b, conj(c))
    return np.concatenate([first, second], axis=-1)


@lru_cache(maxsize=None)
def structure_constants(m: int) -> np.ndarray:
    """Array C with e_a e_b = sum_c C[a, b, c] e_c."""
    if m not in DIMENSIONS:
        raise ValueError(f"no composition algebra of dimension {m}")
    eye = np.eye(m)
    c = mult(eye[:, None, :], eye[None, :, :])
    c.setflags(write=False)
    return c


@lru_cache(maxsize=None)
def real_triple_product(m: int) -> np.ndarray:
    """Array R with Re((e_a e_b) e_c) = R[a, b, c]."""
    eye = np.eye(m)
    ab = mult(eye[:, None, :], eye[None, :, :])
    out = mult(ab[:, :, None, :], eye[None, None, :, :])[..., 0]
    out.setflags(write=False)
    return out

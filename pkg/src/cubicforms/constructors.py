"""Explicit families of Einstein cubic forms and a catalog of named examples."""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from math import comb, sqrt

import numpy as np

from . import composition
from .tensor_core import (
    CubicForm,
    direct_sum,
    from_array,
    from_tensor,
    from_terms,
    rescale,
    substitute,
    verify_einstein,
)

# Cap on the number of monomials pfaffian_form is willing to build.
PFAFFIAN_MONOMIAL_LIMIT = 200_000


def simplicial(n: int) -> CubicForm:
    """Closed form of the simplicial cubic on R^n; Einstein with kappa = n(n-1)."""
    if n < 2:
        raise ValueError("simplicial needs n >= 2")
    pre = sqrt(n * (n + 1)) / 6.0
    terms = []
    for j in range(1, n):  # 0-based index of the variable x_{j+1}
        w = pre / sqrt((j + 1) * (j + 2))
        for i in range(j):
            terms.append(((j, j, j), w))
            terms.append(((j, i, i), -3.0 * w))
    return from_terms(n, terms)


def _cone_term(n: int) -> CubicForm:
    """(1/6) sum_i (t^3 - 3 t x_i^2) on R^{n+1}, t the last variable."""
    terms = []
    for i in range(n):
        terms.append(((n, n, n), 1.0 / 6.0))
        terms.append(((i, i, n), -0.5))
    return from_terms(n + 1, terms)


def _embed(Q: CubicForm, dim: int) -> CubicForm:
    return CubicForm(dim, dict(Q.monomials))


def simplicial_recursive(n: int) -> CubicForm:
    """Simplicial cubic built by the dimension-raising recursion from n = 2."""
    if n < 2:
        raise ValueError("simplicial needs n >= 2")
    P = from_terms(2, [((1, 1, 1), 1 / 6), ((0, 0, 1), -0.5)])
    for k in range(2, n):
        P = _cone_term(k) + rescale(_embed(P, k + 1), sqrt((k + 2) / k))
    return P


def extend(Q: CubicForm, kappa_next: float, tol: float = 1e-9) -> CubicForm:
    """Raise the dimension of an Einstein form by one, prescribing the new kappa."""
    if kappa_next <= 0:
        raise ValueError("kappa_next must be positive")
    rep = verify_einstein(Q, tol)
    if not rep.is_einstein:
        raise ValueError("extend needs an Einstein form")
    n = Q.dim
    inner = _cone_term(n) + rescale(_embed(Q, n + 1), sqrt((n + 2) * (n - 1) / rep.kappa))
    return rescale(inner, sqrt(kappa_next / ((n + 1) * n)))


def _multiplicity(i: np.ndarray, j: np.ndarray, k: np.ndarray) -> np.ndarray:
    eq = (i == j).astype(int) + (j == k).astype(int) + (i == k).astype(int)
    return np.select([eq == 0, eq == 1], [6.0, 3.0], 1.0)


def tensor_product(P: CubicForm, Q: CubicForm) -> CubicForm:
    """Kronecker product of the symmetric tensors, flat index i*Q.dim + alpha."""
    q = Q.dim
    pi, pj, pk, pv = P.entries
    qi, qj, qk, qv = Q.entries
    i = (pi[:, None] * q + qi[None, :]).ravel()
    j = (pj[:, None] * q + qj[None, :]).ravel()
    k = (pk[:, None] * q + qk[None, :]).ravel()
    v = (pv[:, None] * qv[None, :]).ravel()
    keep = (i <= j) & (j <= k)
    i, j, k, v = i[keep], j[keep], k[keep], v[keep]
    c = v * _multiplicity(i, j, k) / 6.0
    return CubicForm(P.dim * q, {(int(a), int(b), int(d)): float(x) for a, b, d, x in zip(i, j, k, c)})


def tensor_index_permutation(n: int, q: int) -> list[int]:
    """Map from tensor-product index i*q + alpha to block index alpha*n + i."""
    return [alpha * n + i for i in range(n) for alpha in range(q)]


def _real_part_of_composition(P: CubicForm, a: np.ndarray) -> CubicForm:
    t = P.tensor.astype(complex)
    for _ in range(3):
        t = np.tensordot(t, a, axes=([0], [0]))
    return from_tensor(t.real, tol=1e-9)


def parahurwitzification(P: CubicForm) -> CubicForm:
    """Re P(x + i y) on R^{2n}, variables ordered (x_1..x_n, y_1..y_n)."""
    n = P.dim
    a = np.hstack([np.eye(n), 1j * np.eye(n)])
    return _real_part_of_composition(P, a)


def triple(P: CubicForm) -> CubicForm:
    """P(x+y+z) - P(x+y) - P(y+z) - P(z+x) + P(x) + P(y) + P(z) on R^{3n}."""
    n = P.dim
    blocks = [np.hstack([np.eye(n) if b in s else np.zeros((n, n)) for b in range(3)]) for s in
              [(0, 1, 2), (0, 1), (1, 2), (0, 2), (0,), (1,), (2,)]]
    signs = [1, -1, -1, -1, 1, 1, 1]
    out = CubicForm(3 * n, {})
    for s, a in zip(signs, blocks):
        out = out + rescale(substitute(P, a), s)
    return out


def affine_extension(P: CubicForm) -> CubicForm:
    """r^3/6 + r|x|^2/2 + P(x) on R^{n+1}, r the last variable."""
    n = P.dim
    terms = [((n, n, n), 1 / 6)] + [((i, i, n), 0.5) for i in range(n)]
    return from_terms(n + 1, terms) + _embed(P, n + 1)


def cartan_isoparametric(m: int) -> CubicForm:
    """Cartan's cubic on R^2 + F^3 with F of real dimension m in {1, 2, 4, 8}.

    Variables are ordered u, v, z1 (m entries), z2, z3; the octonion basis is the
    Cayley-Dickson one from ``composition``.
    """
    if m not in composition.DIMENSIONS:
        raise ValueError("m must be one of 1, 2, 4, 8")
    n = 3 * m + 2
    u, v = 0, 1
    z = [list(range(2 + b * m, 2 + (b + 1) * m)) for b in range(3)]
    a = np.zeros((n, n, n))
    s3 = 1.5 * sqrt(3.0)
    a[u, u, u] = 1.0
    a[u, v, v] = -3.0
    for b, w in zip(range(3), (1.5, 1.5, -3.0)):
        for i in z[b]:
            a[u, i, i] += w
    for i in z[0]:
        a[v, i, i] += s3
    for i in z[1]:
        a[v, i, i] -= s3
    # (z1 z2) z3 + conj(z3)(conj(z2) conj(z1)) = 2 Re((z1 z2) z3)
    r = composition.real_triple_product(m)
    a[np.ix_(z[0], z[1], z[2])] += 2.0 * s3 * r
    return from_array(a)


def _perm_sign(seq: list[int]) -> int:
    inv = sum(1 for x, y in combinations(seq, 2) if x > y)
    return -1 if inv % 2 else 1


def _three_part_splits(n_points: int, part: int):
    everything = set(range(n_points))
    for rest_i in combinations(range(1, n_points), part - 1):
        first = (0,) + rest_i
        left = sorted(everything - set(first))
        for rest_j in combinations(left[1:], part - 1):
            second = (left[0],) + rest_j
            third = tuple(sorted(set(left) - set(second)))
            yield first, second, third


def pfaffian_form(n: int = 1) -> CubicForm:
    """Signed cubic on the exterior power of degree 2n of R^{6n}.

    Variables are the 2n-subsets of {0..6n-1} in lexicographic order.  Each
    splitting of the index set into three such subsets I, J, K contributes
    sign(IJK) x_I x_J x_K.  For n = 1 this is the 15-variable Pfaffian form.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    count = comb(6 * n - 1, 2 * n - 1) * comb(4 * n - 1, 2 * n - 1)
    if count > PFAFFIAN_MONOMIAL_LIMIT:
        raise MemoryError(f"pfaffian_form({n}) needs {count} monomials, above the limit")
    subsets = list(combinations(range(6 * n), 2 * n))
    index = {s: i for i, s in enumerate(subsets)}
    terms = []
    for first, second, third in _three_part_splits(6 * n, 2 * n):
        sign = _perm_sign(list(first + second + third))
        terms.append(((index[first], index[second], index[third]), float(sign)))
    return from_terms(len(subsets), terms)


def two_d(r: float = 1.0, theta: float = 0.0) -> CubicForm:
    """6P = r cos(t)(x1^3 - 3 x1 x2^2) + r sin(t)(x2^3 - 3 x2 x1^2); kappa = 2 r^2."""
    c, s = r * math.cos(theta) / 6, r * math.sin(theta) / 6
    return from_terms(2, [((0, 0, 0), c), ((0, 1, 1), -3 * c), ((1, 1, 1), s), ((0, 0, 1), -3 * s)])


def basepoly() -> CubicForm:
    return from_terms(3, [((0, 1, 2), 1.0)])


def split_example(p: int, q: int) -> CubicForm:
    """Direct sum of p planar and q three-variable blocks, all with kappa = 2."""
    parts = [two_d()] * p + [basepoly()] * q
    if not parts:
        raise ValueError("need at least one block")
    out = parts[0]
    for part in parts[1:]:
        out = direct_sum(out, part)
    return out


def lazero(kappa: float = 12.0) -> CubicForm:
    c = sqrt(2 * kappa) / 12
    return from_terms(4, [((3, 3, 3), c), ((2, 2, 3), -3 * c), ((0, 0, 1), 3 * c), ((1, 1, 1), -c)])


def minusonethird(kappa: float = 12.0) -> CubicForm:
    c = sqrt(3 * kappa) / 12
    return from_terms(4, [((3, 3, 3), c), ((0, 0, 3), -c), ((1, 1, 3), -c), ((2, 2, 3), -c),
                          ((0, 1, 2), 2 * sqrt(5) * c)])


def poly3() -> CubicForm:
    return from_terms(4, [((3, 3, 3), 1 / 6), ((0, 0, 3), -0.5), ((1, 1, 3), -0.5), ((2, 2, 3), 0.5),
                          ((0, 1, 2), 1.0)])


def poly3_rotation() -> np.ndarray:
    """Orthogonal matrix whose rows give (u1, u2, v1, v2) in terms of x."""
    r3 = sqrt(3) / 2
    rows = np.array([
        [-r3, r3, -0.5, -0.5],
        [-0.5, 0.5, r3, r3],
        [-r3, -r3, 0.5, -0.5],
        [-0.5, -0.5, -r3, r3],
    ])
    return rows / sqrt(2)


def _matrix_terms(entries: list[tuple[tuple[int, int, int], float]]) -> CubicForm:
    return from_terms(9, entries, one_based=True)


def permanent9() -> CubicForm:
    return _matrix_terms([((1, 5, 9), 1), ((2, 6, 7), 1), ((3, 4, 8), 1),
                          ((1, 6, 8), 1), ((2, 4, 9), 1), ((3, 5, 7), 1)])


def det9() -> CubicForm:
    return _matrix_terms([((1, 5, 9), 1), ((2, 6, 7), 1), ((3, 4, 8), 1),
                          ((1, 6, 8), -1), ((2, 4, 9), -1), ((3, 5, 7), -1)])


def immanant9() -> CubicForm:
    return _matrix_terms([((1, 5, 9), 1), ((2, 6, 7), -1), ((3, 4, 8), -1)])


def sym3det() -> CubicForm:
    """Determinant of a symmetric 3x3 matrix in variables (x11, x22, x33, x12, x13, x23)."""
    return from_terms(6, [((0, 1, 2), 1.0), ((0, 5, 5), -0.5), ((1, 4, 4), -0.5), ((2, 3, 3), -0.5),
                          ((3, 5, 4), 1 / sqrt(2))])


def d2poly2() -> CubicForm:
    return from_terms(6, [((1, 2, 3), 1), ((1, 4, 5), 1), ((2, 4, 6), 1), ((3, 5, 6), 1)], one_based=True)


def triple_parahurwitz() -> CubicForm:
    return from_terms(6, [((1, 3, 5), 1), ((1, 4, 6), -1), ((2, 3, 6), -1), ((2, 4, 5), -1)], one_based=True)


def lanminusone(R: CubicForm, tol: float = 1e-9) -> CubicForm:
    """t^3 - 3 t s^2 + (6 sqrt 2 / sqrt(sigma)) R on two extra variables s, t; kappa = 72."""
    rep = verify_einstein(R, tol)
    if not rep.is_einstein:
        raise ValueError("R must be Einstein")
    head = from_terms(2, [((1, 1, 1), 1.0), ((0, 0, 1), -3.0)])
    return direct_sum(rescale(R, 6 * sqrt(2) / sqrt(rep.kappa)), head)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    dim: int
    kappa_expected: float | None
    form: CubicForm
    notes: str


_CATALOG = {
    "basepoly": (basepoly, 2.0, "product of three orthogonal linear forms"),
    "two_d": (two_d, 2.0, "planar harmonic cubic (x1^3 - 3 x1 x2^2)/6"),
    "poly3": (poly3, 4.0, "decomposable 4-variable form, sum of two planar pieces"),
    "minusonethird": (minusonethird, 12.0, "indecomposable 4-variable normal form, lambda = -1/3"),
    "lazero": (lazero, 12.0, "decomposable 4-variable normal form, lambda = 0"),
    "d2poly2": (d2poly2, 4.0, "partial Steiner system on 6 points with r = 2"),
    "triple_parahurwitz": (triple_parahurwitz, 4.0, "triple of the planar cubic"),
    "permanent9": (permanent9, 4.0, "permanent of a 3x3 matrix"),
    "det9": (det9, None, "determinant of a 3x3 matrix"),
    "immanant9": (immanant9, 2.0, "(2,1) immanant, three copies of basepoly"),
    "sym3det": (sym3det, None, "determinant of a symmetric 3x3 matrix; not harmonic"),
    "pfaff15": (pfaffian_form, 6.0, "Pfaffian-type form on 15 variables"),
    "lanminusone5": (lambda: lanminusone(basepoly()), 72.0, "planar block plus rescaled basepoly"),
}

CATALOG_NAMES = tuple(_CATALOG)


def catalog(name: str) -> CatalogEntry:
    try:
        build, kappa, notes = _CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown catalog entry {name!r}; known: {', '.join(CATALOG_NAMES)}") from None
    form = build()
    return CatalogEntry(name, form.dim, kappa, form, notes)

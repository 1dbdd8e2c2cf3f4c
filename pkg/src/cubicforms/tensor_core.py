"""Cubic forms stored as sparse coefficient maps over sorted index triples.

A form ``P`` on R^n is ``P(x) = sum c[i,j,k] x_i x_j x_k`` over ``i <= j <= k``.
Its symmetric tensor has components ``P_ijk = c * 6 / m`` where ``m`` counts the
distinct orderings of ``(i, j, k)``, so that ``P_ijk`` is the third partial
derivative.  The metric is the identity in the working basis.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import permutations
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp

DEFAULT_TOL = 1e-9
DENSE_LIMIT = 64

Triple = tuple[int, int, int]


def _orderings(key: Triple) -> list[Triple]:
    return sorted(set(permutations(key)))


@dataclass(frozen=True)
class CubicForm:
    dim: int
    monomials: Mapping[Triple, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim!r}")
        clean: dict[Triple, float] = {}
        for key, c in dict(self.monomials).items():
            key = tuple(int(i) for i in key)
            if len(key) != 3 or list(key) != sorted(key):
                raise ValueError(f"index triple {key} is not sorted")
            if key[0] < 0 or key[2] >= self.dim:
                raise ValueError(f"index triple {key} out of range for dim {self.dim}")
            c = float(c)
            if not math.isfinite(c):
                raise ValueError(f"non-finite coefficient at {key}")
            if c != 0.0:
                clean[key] = c
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "monomials", MappingProxyType(dict(sorted(clean.items()))))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CubicForm):
            return NotImplemented
        return self.dim == other.dim and dict(self.monomials) == dict(other.monomials)

    __hash__ = None  # type: ignore[assignment]

    def __add__(self, other: CubicForm) -> CubicForm:
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        out = dict(self.monomials)
        for key, c in other.monomials.items():
            out[key] = out.get(key, 0.0) + c
        return CubicForm(self.dim, out)

    def __neg__(self) -> CubicForm:
        return rescale(self, -1.0)

    def __sub__(self, other: CubicForm) -> CubicForm:
        return self + (-other)

    def __mul__(self, s: float) -> CubicForm:
        return rescale(self, s)

    __rmul__ = __mul__

    def __call__(self, x) -> float:
        return evaluate(self, x)

    @cached_property
    def entries(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """All nonzero tensor components as (I, J, K, V) arrays over ordered triples."""
        rows: list[tuple[int, int, int, float]] = []
        for key, c in self.monomials.items():
            perms = _orderings(key)
            val = c * (6 // len(perms))
            rows.extend((*p, val) for p in perms)
        if not rows:
            z = np.zeros(0, dtype=np.int64)
            return z, z, z, np.zeros(0)
        a = np.array(rows)
        return a[:, 0].astype(np.int64), a[:, 1].astype(np.int64), a[:, 2].astype(np.int64), a[:, 3]

    @cached_property
    def tensor(self) -> np.ndarray:
        """Dense symmetric tensor; only sensible for moderate dimensions."""
        n = self.dim
        t = np.zeros((n, n, n))
        i, j, k, v = self.entries
        t[i, j, k] = v
        t.setflags(write=False)
        return t

    def coefficient_norm(self) -> float:
        return math.sqrt(sum(c * c for c in self.monomials.values()))


def from_tensor(t: np.ndarray, tol: float = 1e-12) -> CubicForm:
    """Inverse of the polarization map; ``t`` must be symmetric."""
    t = np.asarray(t, dtype=float)
    n = t.shape[0]
    if t.shape != (n, n, n):
        raise ValueError("expected an n x n x n array")
    scale = max(1.0, float(np.abs(t).max(initial=0.0)))
    for perm in [(1, 0, 2), (0, 2, 1)]:
        if np.abs(t - t.transpose(perm)).max(initial=0.0) > tol * scale:
            raise ValueError("tensor is not symmetric")
    mono: dict[Triple, float] = {}
    for i, j, k in zip(*np.nonzero(t)):
        if i <= j <= k:
            key = (int(i), int(j), int(k))
            mono[key] = float(t[i, j, k]) / (6 // len(_orderings(key)))
    return CubicForm(n, mono)


def from_array(a: np.ndarray) -> CubicForm:
    """Form ``x -> sum a[i,j,k] x_i x_j x_k`` for an arbitrary (unsymmetric) array."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    mono: dict[Triple, float] = {}
    for i, j, k in zip(*np.nonzero(a)):
        key = tuple(sorted((int(i), int(j), int(k))))
        mono[key] = mono.get(key, 0.0) + float(a[i, j, k])
    return CubicForm(n, mono)


def from_entries(dim: int, i, j, k, v) -> CubicForm:
    """Build a form from ordered tensor components given sparsely (duplicates summed)."""
    mono: dict[Triple, float] = {}
    for a, b, c, val in zip(np.asarray(i), np.asarray(j), np.asarray(k), np.asarray(v, dtype=float)):
        if a <= b <= c:
            key = (int(a), int(b), int(c))
            mono[key] = mono.get(key, 0.0) + float(val) / (6 // len(_orderings(key)))
    return CubicForm(dim, mono)


def from_terms(dim: int, terms: Iterable[tuple[Iterable[int], float]], one_based: bool = False) -> CubicForm:
    """Sum of monomials given as (index list, coefficient); order of indices is irrelevant."""
    off = 1 if one_based else 0
    mono: dict[Triple, float] = {}
    for idx, c in terms:
        key = tuple(sorted(int(i) - off for i in idx))
        mono[key] = mono.get(key, 0.0) + float(c)
    return CubicForm(dim, mono)


def zero(dim: int) -> CubicForm:
    return CubicForm(dim, {})


def _vec(P: CubicForm, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (P.dim,):
        raise ValueError(f"expected a vector of length {P.dim}, got shape {x.shape}")
    return x


def evaluate(P: CubicForm, x) -> float:
    x = _vec(P, x)
    return float(sum(c * x[i] * x[j] * x[k] for (i, j, k), c in P.monomials.items()))


def hessian(P: CubicForm, x) -> np.ndarray:
    x = _vec(P, x)
    i, j, k, v = P.entries
    h = np.zeros((P.dim, P.dim))
    np.add.at(h, (i, j), v * x[k])
    return h


def gradient(P: CubicForm, x) -> np.ndarray:
    x = _vec(P, x)
    return 0.5 * hessian(P, x) @ x


def laplacian_coefficients(P: CubicForm) -> np.ndarray:
    i, j, k, v = P.entries
    lap = np.zeros(P.dim)
    mask = j == k
    np.add.at(lap, i[mask], v[mask])
    return lap


def hessian_gram(P: CubicForm) -> np.ndarray:
    n = P.dim
    if n <= DENSE_LIMIT:
        t = P.tensor.reshape(n * n, n)
        return t.T @ t
    i, j, k, v = P.entries
    m = sp.csr_matrix((v, (i * n + j, k)), shape=(n * n, n))
    return np.asarray((m.T @ m).todense())


@dataclass(frozen=True)
class VerificationReport:
    harmonic_defect: float
    gram: np.ndarray
    kappa: float
    off_diag_defect: float
    is_harmonic: bool
    is_einstein: bool
    tol: float

    def to_dict(self) -> dict:
        return {
            "harmonic_defect": self.harmonic_defect,
            "kappa": self.kappa,
            "off_diag_defect": self.off_diag_defect,
            "is_harmonic": self.is_harmonic,
            "is_einstein": self.is_einstein,
            "tol": self.tol,
            "gram": self.gram.tolist(),
        }


def verify_einstein(P: CubicForm, tol: float = DEFAULT_TOL) -> VerificationReport:
    """Check harmonicity and |Hess P|^2 = kappa |x|^2, with tolerances relative to the form's size."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    lap = laplacian_coefficients(P)
    gram = hessian_gram(P)
    n = P.dim
    kappa = float(np.trace(gram) / n)
    harmonic_defect = float(np.abs(lap).max(initial=0.0))
    off = float(np.abs(gram - kappa * np.eye(n)).max())
    is_harmonic = harmonic_defect <= tol * max(1.0, P.coefficient_norm())
    is_einstein = is_harmonic and kappa > tol and off <= tol * max(1.0, kappa)
    return VerificationReport(harmonic_defect, gram, kappa, off, is_harmonic, is_einstein, tol)


def substitute(P: CubicForm, a: np.ndarray) -> CubicForm:
    """The form ``y -> P(a @ y)`` for any real matrix ``a`` of shape (n, m)."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != P.dim:
        raise ValueError("matrix rows must match the form's dimension")
    # T'_{abc} = sum P_ijk a_ia a_jb a_kc
    if P.dim <= DENSE_LIMIT:
        out = P.tensor
        for _ in range(3):
            out = np.tensordot(out, a, axes=([0], [0]))
    else:
        i, j, k, v = P.entries
        out = np.einsum("e,ea,eb,ec->abc", v, a[i], a[j], a[k])
    return from_tensor(out, tol=1e-9)


def _check_orthogonal(g: np.ndarray, tol: float = 1e-9) -> None:
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ValueError("g must be square")
    if np.abs(g.T @ g - np.eye(g.shape[0])).max() > tol:
        raise ValueError("g is not orthogonal")


def act_orthogonal(g, P: CubicForm) -> CubicForm:
    """``(g . P)(x) = P(g^T x)``."""
    g = np.asarray(g, dtype=float)
    _check_orthogonal(g)
    if g.shape[0] != P.dim:
        raise ValueError("dimension mismatch")
    if np.array_equal(g, np.eye(P.dim)):
        return P
    return substitute(P, g.T)


def direct_sum(P: CubicForm, Q: CubicForm) -> CubicForm:
    off = P.dim
    mono = dict(P.monomials)
    for (i, j, k), c in Q.monomials.items():
        mono[(i + off, j + off, k + off)] = c
    return CubicForm(P.dim + Q.dim, mono)


def rescale(P: CubicForm, s: float) -> CubicForm:
    return CubicForm(P.dim, {key: s * c for key, c in P.monomials.items()})


def normalize_kappa(P: CubicForm, kappa_target: float, tol: float = DEFAULT_TOL) -> CubicForm:
    if kappa_target <= 0:
        raise ValueError("kappa_target must be positive")
    rep = verify_einstein(P, tol)
    if not rep.is_einstein:
        raise ValueError("normalize_kappa needs an Einstein form")
    return rescale(P, math.sqrt(kappa_target / rep.kappa))


def coefficient_distance(P: CubicForm, Q: CubicForm) -> float:
    if P.dim != Q.dim:
        raise ValueError("dimension mismatch")
    keys = set(P.monomials) | set(Q.monomials)
    return max((abs(P.monomials.get(k, 0.0) - Q.monomials.get(k, 0.0)) for k in keys), default=0.0)


def permute_variables(P: CubicForm, perm) -> CubicForm:
    """Relabel variables: old index ``i`` becomes ``perm[i]``."""
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(P.dim)):
        raise ValueError("not a permutation")
    mono: dict[Triple, float] = {}
    for key, c in P.monomials.items():
        mono[tuple(sorted(perm[i] for i in key))] = c
    return CubicForm(P.dim, mono)


def to_dict(P: CubicForm) -> dict:
    return {"dim": P.dim, "monomials": [{"idx": list(k), "c": c} for k, c in P.monomials.items()]}


def from_dict(d: Mapping) -> CubicForm:
    try:
        dim = d["dim"]
        items = d["monomials"]
    except (KeyError, TypeError) as exc:
        raise ValueError("polynomial JSON needs 'dim' and 'monomials'") from exc
    if not isinstance(dim, int) or isinstance(dim, bool):
        raise ValueError("dim must be an integer")
    mono: dict[Triple, float] = {}
    for item in items:
        if not isinstance(item, Mapping) or "idx" not in item or "c" not in item:
            raise ValueError(f"monomial entries need 'idx' and 'c', got {item!r}")
        idx = item["idx"]
        if not isinstance(idx, list) or len(idx) != 3 or not all(isinstance(i, int) and not isinstance(i, bool) for i in idx):
            raise ValueError(f"bad idx {idx!r}")
        key = tuple(idx)
        if key in mono:
            raise ValueError(f"duplicate idx {idx!r}")
        c = item["c"]
        if not isinstance(c, (int, float)) or isinstance(c, bool):
            raise ValueError(f"bad coefficient {c!r}")
        mono[key] = float(c)
    return CubicForm(dim, mono)


def dumps(P: CubicForm, indent: int | None = None) -> str:
    return json.dumps(to_dict(P), indent=indent)


def loads(text: str) -> CubicForm:
    return from_dict(json.loads(text))

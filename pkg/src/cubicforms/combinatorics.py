"""Triple systems and tight frames, and the cubic forms they define."""
from __future__ import annotations

import re
from collections import Counter, deque
from dataclasses import dataclass
from itertools import combinations
from math import sqrt

import numpy as np

from .constructors import _perm_sign
from .tensor_core import CubicForm, from_array, from_terms

ORBIT_LIMIT = 1_000_000


@dataclass(frozen=True)
class TripleSystem:
    points: int
    blocks: tuple[tuple[int, int, int], ...]
    signs: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        blocks = tuple(tuple(sorted(int(i) for i in b)) for b in self.blocks)
        for b in blocks:
            if len(b) != 3 or len(set(b)) != 3:
                raise ValueError(f"block {b} does not have three distinct points")
            if b[0] < 0 or b[2] >= self.points:
                raise ValueError(f"block {b} out of range for {self.points} points")
        signs = tuple(int(s) for s in self.signs) if self.signs is not None else (1,) * len(blocks)
        if len(signs) != len(blocks) or any(s not in (1, -1) for s in signs):
            raise ValueError("signs must be +1/-1, one per block")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "signs", signs)

    def to_dict(self) -> dict:
        return {"points": self.points, "blocks": [list(b) for b in self.blocks], "signs": list(self.signs)}

    @classmethod
    def from_dict(cls, d) -> TripleSystem:
        try:
            return cls(int(d["points"]), tuple(tuple(b) for b in d["blocks"]), d.get("signs"))
        except (KeyError, TypeError) as exc:
            raise ValueError("triple system JSON needs 'points' and 'blocks'") from exc


@dataclass(frozen=True)
class TripleSystemReport:
    is_partial: bool
    is_regular: bool
    r: int | None
    is_steiner: bool
    blocks: int


def validate_triple_system(ts: TripleSystem) -> TripleSystemReport:
    pairs = Counter(p for b in ts.blocks for p in combinations(b, 2))
    is_partial = all(c == 1 for c in pairs.values())
    reps = Counter(i for b in ts.blocks for i in b)
    counts = {reps.get(i, 0) for i in range(ts.points)}
    is_regular = len(counts) == 1
    r = counts.pop() if is_regular else None
    is_steiner = is_partial and len(pairs) == ts.points * (ts.points - 1) // 2
    return TripleSystemReport(is_partial, is_regular, r, is_steiner, len(ts.blocks))


def triple_system_polynomial(ts: TripleSystem, require_regular: bool = True) -> CubicForm:
    """Signed sum of the block monomials; Einstein with kappa = 2r for regular partial systems."""
    rep = validate_triple_system(ts)
    if require_regular and not (rep.is_partial and rep.is_regular):
        raise ValueError("triple system is not a regular partial Steiner system")
    return from_terms(ts.points, [(b, float(s)) for b, s in zip(ts.blocks, ts.signs)])


def projective_geometry(k: int) -> TripleSystem:
    """Lines of PG(k, 2): point p-1 is the nonzero vector with binary digits of p."""
    if k < 1:
        raise ValueError("k must be >= 1")
    n = 2 ** (k + 1) - 1
    blocks = sorted({tuple(sorted((x - 1, y - 1, (x ^ y) - 1))) for x in range(1, n + 1)
                     for y in range(x + 1, n + 1)})
    return TripleSystem(n, tuple(blocks))


def _one_based(points: int, blocks: str) -> TripleSystem:
    return TripleSystem(points, tuple(tuple(int(c) - 1 for c in b) for b in blocks.split()))


def pfaff15_signed() -> TripleSystem:
    """Perfect matchings of {1..6} on the 15 pairs, signed by permutation parity."""
    pairs = list(combinations(range(6), 2))
    index = {p: i for i, p in enumerate(pairs)}
    blocks, signs = [], []
    for a, b, c in combinations(pairs, 3):
        if len(set(a + b + c)) == 6:
            blocks.append((index[a], index[b], index[c]))
            signs.append(_perm_sign(list(a + b + c)))
    return TripleSystem(15, tuple(blocks), tuple(signs))


def ts_catalog(name: str) -> TripleSystem:
    m = re.fullmatch(r"pg\(?(\d+)\)?", name)
    if m:
        k = int(m.group(1))
        if not 2 <= k <= 4:
            raise KeyError("pg(k) is available for k = 2, 3, 4")
        return projective_geometry(k)
    if name == "fano":
        return _one_based(7, "123 145 167 246 257 347 356")
    if name == "ag2_3":
        return TripleSystem(9, tuple(tuple(int(c) for c in b) for b in
                                     "012 345 678 036 147 258 057 138 246 048 156 237".split()))
    if name == "k4":
        return _one_based(6, "123 145 246 356")
    if name == "pfaff15_signed":
        return pfaff15_signed()
    raise KeyError(f"unknown triple system {name!r}")


TS_NAMES = ("fano", "pg(2)", "pg(3)", "pg(4)", "ag2_3", "k4", "pfaff15_signed")


@dataclass(frozen=True)
class Frame:
    dim: int
    vectors: np.ndarray

    def __post_init__(self) -> None:
        v = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        if v.size == 0:
            raise ValueError("a frame needs at least one vector")
        if v.shape[1] != self.dim:
            raise ValueError("vector length must equal dim")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def size(self) -> int:
        return self.vectors.shape[0]

    def to_dict(self) -> dict:
        return {"dim": self.dim, "vectors": self.vectors.tolist()}

    @classmethod
    def from_dict(cls, d) -> Frame:
        try:
            return cls(int(d["dim"]), np.asarray(d["vectors"], dtype=float))
        except (KeyError, TypeError) as exc:
            raise ValueError("frame JSON needs 'dim' and 'vectors'") from exc


@dataclass(frozen=True)
class FrameReport:
    spanning: bool
    tight: bool
    frame_constant: float
    centered: bool
    unit_norm: bool
    norms: tuple[float, ...]
    distance_values: tuple[float, ...]
    two_distance: bool
    equiangular: bool
    c: float | None

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


def _cluster(values: np.ndarray, gap: float) -> list[float]:
    out: list[list[float]] = []
    for x in np.sort(values):
        if out and x - out[-1][-1] <= gap:
            out[-1].append(float(x))
        else:
            out.append([float(x)])
    return [float(np.mean(c)) for c in out]


def validate_frame(frame: Frame, tol: float = 1e-9, distance_tol: float = 1e-7) -> FrameReport:
    v = frame.vectors
    n, m = frame.dim, frame.size
    s = v.T @ v
    M = float(np.trace(s) / n)
    tight = float(np.abs(s - M * np.eye(n)).max()) <= tol * max(1.0, M)
    norms = np.linalg.norm(v, axis=1)
    g = v @ v.T
    iu = np.triu_indices(m, 1)
    values = _cluster(g[iu], distance_tol) if m > 1 else []
    two = 1 <= len(values) <= 2
    equi = two and abs(abs(values[0]) - abs(values[-1])) <= distance_tol
    return FrameReport(
        spanning=bool(np.linalg.matrix_rank(v, tol=1e-10) == n),
        tight=bool(tight),
        frame_constant=M,
        centered=bool(np.linalg.norm(v.mean(axis=0)) <= tol),
        unit_norm=bool(np.abs(norms - 1).max() <= tol),
        norms=tuple(float(x) for x in norms),
        distance_values=tuple(values),
        two_distance=bool(two),
        equiangular=bool(equi),
        c=abs(values[0]) if equi else None,
    )


def frame_polynomial(frame: Frame) -> CubicForm:
    """6P(x) = sum_v <x,v>^3 - 3/(n+2) |x|^2 |v|^2 <x,v>; always harmonic."""
    v = frame.vectors
    n = frame.dim
    cubes = np.einsum("ai,aj,ak->ijk", v, v, v)
    trace_part = np.einsum("ij,k->ijk", np.eye(n), (v * (v * v).sum(1)[:, None]).sum(0))
    return from_array((cubes - 3.0 / (n + 2) * trace_part) / 6.0)


def complement_basis(N: int) -> np.ndarray:
    """Orthonormal basis (columns) of the hyperplane orthogonal to (1,...,1) in R^N.

    Column j is (e_1 + ... + e_j - j e_{j+1}) / sqrt(j(j+1)).
    """
    b = np.zeros((N, N - 1))
    for j in range(1, N):
        b[:j, j - 1] = 1.0
        b[j, j - 1] = -j
        b[:, j - 1] /= sqrt(j * (j + 1))
    return b


def simplicial_frame(n: int) -> Frame:
    """The n+1 vertices (e - (n+1) e_i)/sqrt(n(n+1)) written in the basis of complement_basis."""
    e = np.ones((n + 1, n + 1))
    f = (e - (n + 1) * np.eye(n + 1)) / sqrt(n * (n + 1))
    return Frame(n, f @ complement_basis(n + 1))


def _columns(rows: list[list[int]], scale: float) -> np.ndarray:
    return np.array(rows, dtype=float).T * scale


def two_distance_6_8() -> Frame:
    rows = [[1, 1, -1, -1, 1, 1, -1, -1],
            [1, -1, 1, -1, 1, -1, 1, -1],
            [1, -1, -1, 1, 1, -1, -1, 1],
            [1, -1, -1, 1, -1, 1, 1, -1],
            [1, -1, 1, -1, -1, 1, -1, 1],
            [1, 1, -1, -1, -1, -1, 1, 1]]
    return Frame(6, _columns(rows, 1 / sqrt(6)))


def etf_6_16() -> Frame:
    rows = [[1, -1, 1, -1, 1, -1, 1, -1, 0, 0, 0, 0, 0, 0, 0, 0],
            [1, 1, -1, -1, 0, 0, 0, 0, 1, 1, -1, -1, 0, 0, 0, 0],
            [1, -1, -1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1, -1, -1, 1],
            [0, 0, 0, 0, 1, -1, -1, 1, 1, -1, -1, 1, 0, 0, 0, 0],
            [0, 0, 0, 0, 1, 1, -1, -1, 0, 0, 0, 0, 1, 1, -1, -1],
            [0, 0, 0, 0, 0, 0, 0, 0, 1, -1, 1, -1, 1, -1, 1, -1]]
    return Frame(6, _columns(rows, 1 / sqrt(3)))


def etf_7_28() -> Frame:
    """All placements of (-3,-3,1,...,1)/sqrt(24) in R^8, written in the basis of complement_basis."""
    vecs = []
    for a, b in combinations(range(8), 2):
        w = np.ones(8)
        w[[a, b]] = -3.0
        vecs.append(w / sqrt(24))
    return Frame(7, np.array(vecs) @ complement_basis(8))


GOLDEN = (1 + sqrt(5)) / 2


def icosahedron() -> Frame:
    vecs = set()
    for s1 in (1, -1):
        for s2 in (1, -1):
            base = (s1 * 1.0, s2 * GOLDEN, 0.0)
            for shift in range(3):
                vecs.add(base[shift:] + base[:shift])
    arr = np.array(sorted(vecs)) / sqrt(1 + GOLDEN ** 2)
    return Frame(3, arr)


def icosahedral_generators() -> list[np.ndarray]:
    w = GOLDEN
    flip = np.diag([-1.0, -1.0, 1.0])
    cyc = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    rot = 0.5 * np.array([[-w, 1, w - 1], [-1, 1 - w, -w], [1 - w, -w, 1]])
    return [flip, cyc, rot]


def frame_catalog(name: str) -> Frame:
    m = re.fullmatch(r"simplicial\((\d+)\)", name)
    if m:
        return simplicial_frame(int(m.group(1)))
    table = {"two_distance_6_8": two_distance_6_8, "etf_6_16": etf_6_16, "etf_7_28": etf_7_28,
             "icosahedron": icosahedron}
    if name not in table:
        raise KeyError(f"unknown frame {name!r}")
    return table[name]()


FRAME_NAMES = ("simplicial(n)", "two_distance_6_8", "etf_6_16", "etf_7_28", "icosahedron")


def group_orbit_frame(generators, v, tol: float = 1e-9, limit: int = ORBIT_LIMIT) -> Frame:
    """Orbit of the unit vector v under the group generated by orthogonal matrices.

    Each orbit point is listed once.  The orbit is closed under the generators by
    breadth-first search; since the group is finite the inverses are powers of
    the generators.  More than ``limit`` orbit points raises an error.
    """
    gens = [np.asarray(g, dtype=float) for g in generators]
    for g in gens:
        if np.abs(g.T @ g - np.eye(len(g))).max() > 1e-9:
            raise ValueError("generators must be orthogonal")
    v = np.asarray(v, dtype=float)
    digits = max(1, int(round(-np.log10(tol))) - 2)

    def key(x: np.ndarray) -> tuple:
        return tuple(np.round(x, digits) + 0.0)

    seen = {key(v): v}
    queue = deque([v])
    while queue:
        x = queue.popleft()
        for g in gens:
            y = g @ x
            k = key(y)
            if k not in seen:
                seen[k] = y
                queue.append(y)
                if len(seen) > limit:
                    raise RuntimeError(f"orbit exceeds {limit} points; the group may be infinite")
    return Frame(len(v), np.array([seen[k] for k in sorted(seen)]))


def permutation_matrix(perm) -> np.ndarray:
    n = len(perm)
    m = np.zeros((n, n))
    m[list(perm), list(range(n))] = 1.0
    return m


def all_permutation_generators(n: int) -> list[np.ndarray]:
    """A transposition and an n-cycle, which generate the symmetric group."""
    swap = list(range(n))
    swap[0], swap[1] = 1, 0
    cycle = [(i + 1) % n for i in range(n)]
    return [permutation_matrix(swap), permutation_matrix(cycle)]



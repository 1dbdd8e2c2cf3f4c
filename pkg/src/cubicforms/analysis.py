"""Orbit invariants of cubic forms: nonassociativity tensors, critical lines, mkc,
reflection symmetries, decomposability witnesses, fingerprints and the low
dimensional classifier.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree
from scipy.stats import norm, qmc

from .tensor_core import CubicForm, from_tensor, hessian_gram, laplacian_coefficients, rescale, verify_einstein

DEFAULT_SEED = 20240001
ANALYSIS_DIM_LIMIT = 128
DEGENERATE_TOL = 1e-4
DEGENERATE_DEDUP = 1e-3


@dataclass(frozen=True)
class SearchOptions:
    starts: int | None = None
    seed: int = DEFAULT_SEED
    newton_tol: float = 1e-12
    dedup_tol: float = 1e-6
    max_iter: int = 60
    ascent_starts: int = 256
    refine_rounds: int = 4
    refine_limit: int = 40000

    def budget(self, n: int) -> int:
        return self.starts if self.starts is not None else max(200 * n, 2000)


@dataclass(frozen=True)
class CriticalLine:
    generator: np.ndarray
    multiplier: float
    weight: float
    value: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "generator": self.generator.tolist(),
            "multiplier": self.multiplier,
            "weight": self.weight,
            "value": self.value,
            "degenerate": self.degenerate,
        }


class CriticalLines(list):
    """List of CriticalLine sorted by value, plus the search metadata."""

    def __init__(self, lines=(), starts: int = 0, converged: int = 0):
        super().__init__(lines)
        self.starts = starts
        self.converged = converged

    @property
    def generators(self) -> np.ndarray:
        if not self:
            return np.zeros((0, 0))
        return np.array([line.generator for line in self])


def _dense(P: CubicForm) -> np.ndarray:
    if P.dim > ANALYSIS_DIM_LIMIT:
        raise ValueError(f"dimension {P.dim} is above the analysis limit {ANALYSIS_DIM_LIMIT}")
    return P.tensor


def _scale(t: np.ndarray) -> float:
    return max(1.0, float(np.sqrt((t * t).sum() / t.shape[0])))


def sphere_points(n: int, count: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    """Low-discrepancy points on the unit sphere: scrambled Sobol through the normal quantile."""
    sobol = qmc.Sobol(d=n, scramble=True, seed=np.random.default_rng(seed))
    u = sobol.random_base2(max(1, math.ceil(math.log2(count))))[:count]
    g = norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _batch_hess(t: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.einsum("ijk,bk->bij", t, x)


def _solve(j: np.ndarray, f: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(j, f[..., None])[..., 0]
    except np.linalg.LinAlgError:
        pass
    # only the singular systems pay for a pseudo-inverse
    sign, _ = np.linalg.slogdet(j)
    bad = sign == 0
    out = np.empty_like(f)
    if (~bad).any():
        out[~bad] = np.linalg.solve(j[~bad], f[~bad][..., None])[..., 0]
    out[bad] = np.einsum("bij,bj->bi", np.linalg.pinv(j[bad]), f[bad])
    return out


def _newton(t: np.ndarray, x: np.ndarray, tol: float, max_iter: int) -> tuple[np.ndarray, np.ndarray]:
    """Newton on (grad P(v) - theta v, (|v|^2 - 1)/2); returns points and final residuals."""
    # divergent starts overflow harmlessly; their residual is inf and they are dropped
    with np.errstate(all="ignore"):
        return _newton_loop(t, x, tol, max_iter)


def _newton_loop(t: np.ndarray, x: np.ndarray, tol: float, max_iter: int) -> tuple[np.ndarray, np.ndarray]:
    n = t.shape[0]
    x = x.copy()
    h = _batch_hess(t, x)
    g = 0.5 * np.einsum("bij,bj->bi", h, x)
    theta = np.einsum("bi,bi->b", g, x)
    res = np.full(len(x), np.inf)
    active = np.arange(len(x))
    eye = np.eye(n)
    for it in range(max_iter + 1):
        xa, ta = x[active], theta[active]
        h = _batch_hess(t, xa)
        g = 0.5 * np.einsum("bij,bj->bi", h, xa)
        f = np.concatenate([g - ta[:, None] * xa, (0.5 * ((xa * xa).sum(1) - 1))[:, None]], axis=1)
        r = np.linalg.norm(f, axis=1)
        res[active] = r
        keep = r > tol
        active, xa, ta, h, f = active[keep], xa[keep], ta[keep], h[keep], f[keep]
        if len(active) == 0 or it == max_iter:
            break
        jac = np.zeros((len(active), n + 1, n + 1))
        jac[:, :n, :n] = h - ta[:, None, None] * eye
        jac[:, :n, n] = -xa
        jac[:, n, :n] = xa
        step = _solve(jac, -f)
        # retract onto the sphere and reset the multiplier to its Rayleigh value
        xn = xa + step[:, :n]
        xn /= np.linalg.norm(xn, axis=1, keepdims=True)
        x[active] = xn
        theta[active] = 0.5 * np.einsum("bi,bij,bj->b", xn, _batch_hess(t, xn), xn)
    bad = ~np.isfinite(res)
    res[bad] = np.inf
    return x, res


def _ascend(t: np.ndarray, x: np.ndarray, steps: int = 200) -> np.ndarray:
    """Shifted power iteration; monotone ascent of P on the sphere towards local maxima."""
    alpha = float(np.sqrt((t * t).sum()))
    for _ in range(steps):
        g = 0.5 * np.einsum("bij,bj->bi", _batch_hess(t, x), x)
        x = g + alpha * x
        x /= np.linalg.norm(x, axis=1, keepdims=True)
    return x


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("CUBIC_THREADS", "1")))
    except ValueError:
        return 1


def _run_newton(t: np.ndarray, x: np.ndarray, tol: float, max_iter: int) -> tuple[np.ndarray, np.ndarray]:
    workers = _workers()
    if workers == 1 or len(x) < 2 * workers:
        return _newton(t, x, tol, max_iter)
    chunks = np.array_split(x, workers)
    with ThreadPoolExecutor(workers) as pool:
        parts = list(pool.map(lambda c: _newton(t, c, tol, max_iter), chunks))
    # chunks are merged in their original order, so the result is scheduling independent
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def _canonical_sign(v: np.ndarray, value: float, zero_tol: float) -> np.ndarray:
    if value < -zero_tol:
        return -v
    if abs(value) <= zero_tol:
        lead = np.flatnonzero(np.abs(v) > 1e-6)[0]
        return v if v[lead] > 0 else -v
    return v


def _degenerate_flags(t: np.ndarray, x: np.ndarray, tol: float) -> np.ndarray:
    """Whether Hess P(v) - theta on the complement of v has a kernel, for each row v."""
    n = t.shape[1]
    if len(x) == 0:
        return np.zeros(0, dtype=bool)
    if n == 1:
        return np.zeros(len(x), dtype=bool)
    h = _batch_hess(t, x)
    theta = 0.5 * np.einsum("bi,bij,bj->b", x, h, x)
    eye = np.eye(n)
    proj = eye - np.einsum("bi,bj->bij", x, x)
    a = proj @ (h - theta[:, None, None] * eye) @ proj
    # push the eigenvalue along v far away so only the complement is tested
    shift = 10.0 * (np.abs(h).sum(axis=(1, 2)) + np.abs(theta) + 1.0)
    a += shift[:, None, None] * np.einsum("bi,bj->bij", x, x)
    return np.abs(np.linalg.eigvalsh(a)).min(axis=1) <= tol


def _converged_points(t: np.ndarray, starts: np.ndarray, opts: SearchOptions, scale: float) -> np.ndarray:
    x, res = _run_newton(t, starts, opts.newton_tol * scale, opts.max_iter)
    x = x[res <= max(opts.newton_tol, 1e-10) * scale]
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def _merge(t: np.ndarray, kept: np.ndarray, x: np.ndarray, dedup_tol: float, zero_tol: float) -> np.ndarray:
    """Append to ``kept`` the points of ``x`` not already present up to sign, largest |P| first."""
    n = t.shape[0]
    values = np.einsum("ijk,bi,bj,bk->b", t, x, x, x, optimize=True) / 6.0
    order = np.lexsort((np.arange(len(x)), -np.where(np.abs(values) <= zero_tol, 0.0, np.abs(values))))
    x = np.array([_canonical_sign(x[i], values[i], zero_tol) for i in order]).reshape(-1, n)
    # exact-grid prefilter collapses the bulk of repeated Newton limits cheaply
    _, first = np.unique(np.round(x / dedup_tol), axis=0, return_index=True)
    x = x[np.sort(first)]
    pts = np.vstack([kept, x])
    total = len(pts)
    if total == 0:
        return pts
    # points within dedup_tol of each other or of each other's negative form one line;
    # the earliest point of each cluster (existing rows first) represents it
    pairs = cKDTree(np.vstack([pts, -pts])).query_pairs(dedup_tol, output_type="ndarray") % total
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(total, total))
    _, labels = connected_components(graph, directed=False)
    _, reps = np.unique(labels, return_index=True)
    return pts[np.sort(reps)]


def _pair_index(na: int, nb: int | None, limit: int) -> tuple[np.ndarray, np.ndarray]:
    """The first ``limit`` index pairs in row-major order, without building the full list."""
    rows, cols, total = [], [], 0
    for i in range(na):
        if total >= limit:
            break
        j = np.arange(i + 1, na) if nb is None else np.arange(nb)
        j = j[: limit - total]
        rows.append(np.full(len(j), i))
        cols.append(j)
        total += len(j)
    if not rows:
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    return np.concatenate(rows), np.concatenate(cols)


def _pair_starts(a: np.ndarray, b: np.ndarray | None = None, limit: int = 1 << 62) -> np.ndarray:
    """Normalized u + w and u - w over at most ``limit`` pairs.

    Pairs are unordered pairs within ``a`` when ``b`` is None, otherwise ``a`` x ``b``.
    """
    n = a.shape[1]
    i, j = _pair_index(len(a), None if b is None else len(b), limit)
    u, w = a[i], (a if b is None else b)[j]
    s = np.concatenate([u + w, u - w]).reshape(-1, n)
    nrm = np.linalg.norm(s, axis=1)
    s = s[nrm > 1e-6]
    return s / np.linalg.norm(s, axis=1, keepdims=True)


def critical_lines(P: CubicForm, opts: SearchOptions | None = None) -> CriticalLines:
    """Critical lines of P on the unit sphere found by seeded multistart Newton.

    After the low-discrepancy starts, Newton is restarted from normalized sums
    and differences of pairs of isolated lines until no new isolated line turns
    up.  Those restarts rotate with P, which makes the isolated part of the
    result far less sensitive to the coordinate frame.  Completeness is still
    heuristic.  Lines lying in positive dimensional critical families are
    flagged ``degenerate``.
    """
    opts = opts or SearchOptions()
    if not P.monomials:
        raise ValueError("the zero form has no critical lines")
    t = _dense(P)
    n = P.dim
    scale = _scale(t)
    zero_tol = 1e-10 * scale
    budget = opts.budget(n)
    x0 = sphere_points(n, budget, opts.seed)
    extra = _ascend(t, x0[: min(opts.ascent_starts, budget)])
    x = _converged_points(t, np.vstack([x0, extra]), opts, scale)
    converged = len(x)
    kept = _merge(t, np.zeros((0, n)), x, opts.dedup_tol, zero_tol)
    # Newton converges only linearly onto degenerate critical points, so its limits
    # there sit about sqrt(residual) away from the root: flag and merge at that scale
    deg_tol = DEGENERATE_TOL * scale
    degenerate = _degenerate_flags(t, kept, deg_tol)
    if degenerate.any():
        coarse = _merge(t, np.zeros((0, n)), kept[degenerate], DEGENERATE_DEDUP, zero_tol)
        kept = np.vstack([kept[~degenerate], coarse])
        degenerate = np.arange(len(kept)) >= len(kept) - len(coarse)

    def isolated(rows: np.ndarray) -> np.ndarray:
        vals = np.einsum("ijk,bi,bj,bk->b", t, rows, rows, rows) / 6.0
        return rows[(np.abs(vals) > zero_tol) & ~_degenerate_flags(t, rows, deg_tol)]

    fresh = kept[~degenerate & (np.abs(np.einsum("ijk,bi,bj,bk->b", t, kept, kept, kept)) > 6 * zero_tol)]
    old = np.zeros((0, n))
    for _ in range(opts.refine_rounds):
        if len(fresh) == 0:
            break
        half = opts.refine_limit // 2
        within = _pair_starts(fresh, limit=half)
        across = _pair_starts(fresh, old, limit=max(0, half - len(within) // 2))
        starts = np.vstack([within, across])[: opts.refine_limit]
        x = _converged_points(t, starts, opts, scale)
        converged += len(x)
        # refinement only hunts for isolated lines; critical families are sampled by the first pass
        x = isolated(x)
        before = len(kept)
        kept = _merge(t, kept, x, opts.dedup_tol, zero_tol)
        degenerate = np.concatenate([degenerate, np.zeros(len(kept) - before, dtype=bool)])
        old = np.vstack([old, fresh])
        fresh = kept[before:]
    lines = []
    for v, deg in zip(kept, degenerate):
        value = _value(t, v)
        lines.append(CriticalLine(v, 3.0 * value, value * value, value, bool(deg)))
    lines.sort(key=lambda line: -line.value)
    if not lines:
        warnings.warn("no Newton start converged to a critical line", RuntimeWarning, stacklevel=2)
    return CriticalLines(lines, starts=budget, converged=converged)


def _value(t: np.ndarray, v: np.ndarray) -> float:
    return float(np.einsum("ijk,i,j,k->", t, v, v, v) / 6.0)


def critical_lines_stable(P: CubicForm, opts: SearchOptions | None = None) -> tuple[CriticalLines, bool]:
    """Critical lines plus a flag telling whether doubling the budget changes the count."""
    opts = opts or SearchOptions()
    first = critical_lines(P, opts)
    doubled = critical_lines(P, replace(opts, starts=2 * opts.budget(P.dim)))
    return first, len(first) == len(doubled)


def extreme_set(P: CubicForm, opts: SearchOptions | None = None, lines: CriticalLines | None = None) -> list[np.ndarray]:
    lines = critical_lines(P, opts) if lines is None else lines
    if not lines:
        return []
    top = lines[0].value
    return [line.generator for line in lines if line.value >= top - 1e-7 * max(1.0, abs(top))]


def mkc(P: CubicForm, opts: SearchOptions | None = None, lines: CriticalLines | None = None) -> float:
    lines = critical_lines(P, opts) if lines is None else lines
    rep = verify_einstein(P)
    top = lines[0].value
    if rep.is_einstein:
        return rep.kappa / (6.0 * top) ** 2
    gram = rep.gram
    return max(float(e @ gram @ e) / (36.0 * top ** 2) for e in extreme_set(P, lines=lines))


def ass_tensor(P: CubicForm) -> np.ndarray:
    """ass[i,j,k,l] = P_lip P_jkp - P_ljp P_ikp."""
    t = _dense(P)
    return np.einsum("lip,jkp->ijkl", t, t) - np.einsum("ljp,ikp->ijkl", t, t)


def ricci(ass: np.ndarray) -> np.ndarray:
    return np.einsum("pijp->ij", ass)


def cass_tensor(P: CubicForm) -> np.ndarray:
    """Totally trace-free part of the nonassociativity tensor."""
    n = P.dim
    if n < 3:
        raise ValueError("cass_tensor needs dim >= 3")
    a = ass_tensor(P)
    ric = ricci(a)
    scal = float(np.trace(ric))
    d = np.eye(n)
    # X_[ij] = (X_ij - X_ji) / 2 on the first two slots
    t1 = 0.5 * (np.einsum("ki,jl->ijkl", d, ric) - np.einsum("kj,il->ijkl", d, ric))
    t2 = 0.5 * (np.einsum("li,jk->ijkl", d, ric) - np.einsum("lj,ik->ijkl", d, ric))
    hh = 0.5 * (np.einsum("ki,jl->ijkl", d, d) - np.einsum("kj,il->ijkl", d, d))
    return a + (2.0 / (n - 2)) * (t1 - t2) - (2.0 / ((n - 1) * (n - 2))) * scal * hh


def cass_norm(P: CubicForm) -> float:
    """Frobenius norm of cass divided by kappa * n^2."""
    kappa = float(np.trace(hessian_gram(P)) / P.dim)
    if kappa <= 0:
        raise ValueError("cass_norm needs a nonzero form")
    return float(np.linalg.norm(cass_tensor(P))) / (kappa * P.dim ** 2)


def reflection_automorphism(P: CubicForm, r, tol: float = 1e-9) -> bool:
    """True when P(r) = 0 and Hess P(r) vanishes on the hyperplane orthogonal to r."""
    r = np.asarray(r, dtype=float)
    nr = np.linalg.norm(r)
    if nr == 0:
        raise ValueError("r must be nonzero")
    r = r / nr
    t = _dense(P)
    scale = _scale(t)
    h = np.einsum("ijk,k->ij", t, r)
    proj = np.eye(P.dim) - np.outer(r, r)
    value = float(r @ h @ r) / 6.0
    return abs(value) <= tol * scale and float(np.abs(proj @ h @ proj).max()) <= tol * scale


def reflect(r, x) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    x = np.asarray(x, dtype=float)
    return x - 2.0 * (x @ r) / (r @ r) * r


def centroid(P: CubicForm, tol: float = 1e-9) -> np.ndarray:
    """Basis of the symmetric operators commuting with every Hessian slice of P.

    The identity is always there; a second independent element exists exactly
    when P splits as an orthogonal sum.
    """
    t = _dense(P)
    n = P.dim
    iu, ju = np.triu_indices(n)
    basis = np.zeros((len(iu), n, n))
    basis[np.arange(len(iu)), iu, ju] = 1.0
    basis[np.arange(len(iu)), ju, iu] = 1.0
    comm = np.einsum("bij,kjl->bkil", basis, t) - np.einsum("kij,bjl->bkil", t, basis)
    m = comm.reshape(len(iu), -1).T
    _, s, vt = np.linalg.svd(m, full_matrices=False)
    null = vt[s <= tol * max(1.0, s.max())]
    return np.einsum("rb,bij->rij", null, basis)


def orthogonal_splitting(P: CubicForm, tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray] | None:
    """Orthonormal bases (columns) of complementary subspaces on which P splits, if any."""
    ops = centroid(P, tol)
    if len(ops) < 2:
        return None
    weights = np.random.default_rng(DEFAULT_SEED).normal(size=len(ops))
    vals, vecs = np.linalg.eigh(np.einsum("r,rij->ij", weights, ops))
    gaps = np.diff(vals)
    cut = int(np.argmax(gaps)) + 1
    return vecs[:, :cut], vecs[:, cut:]


def _restrict(P: CubicForm, basis: np.ndarray) -> np.ndarray:
    return np.einsum("ijk,ia,jb,kc->abc", _dense(P), basis, basis, basis)


def _some_critical_vector(P: CubicForm, basis: np.ndarray, opts: SearchOptions | None) -> np.ndarray:
    sub = _restrict(P, basis)
    if not np.any(np.abs(sub) > 1e-12 * _scale(_dense(P))):
        return basis[:, 0]
    lines = critical_lines(from_tensor(sub, tol=1e-13 * max(1.0, float(np.abs(sub).max()))), opts)
    return basis @ lines[0].generator


def decomposability_witness(P: CubicForm, lines: CriticalLines | None = None, tol: float = 1e-8,
                            opts: SearchOptions | None = None) -> tuple[np.ndarray, np.ndarray] | None:
    """Orthogonal critical generators v1, v2 with P_ijk v1^i v2^j = 0 for all k, if any.

    Pairs are looked for among the isolated critical lines first.  Failing
    that, an orthogonal splitting read off the centroid supplies a witness
    built from one critical line of each summand.  Degenerate lines are
    skipped, since which points of a critical family the search lands on
    depends on the frame.
    """
    lines = critical_lines(P, opts) if lines is None else lines
    t = _dense(P)
    scale = _scale(t)
    iso = [line for line in lines if not line.degenerate]
    if len(iso) >= 2:
        g = np.array([line.generator for line in iso])
        gram = np.abs(g @ g.T)
        a, b = np.nonzero(np.triu(gram <= tol, k=1))
        if len(a):
            m = np.einsum("ijk,ai->ajk", t, g)
            w = np.abs(np.einsum("pjk,pj->pk", m[a], g[b])).sum(axis=1)
            hits = np.flatnonzero(w <= tol * scale)
            if len(hits):
                p = hits[0]
                return g[a[p]], g[b[p]]
    split = orthogonal_splitting(P)
    if split is None:
        return None
    return _some_critical_vector(P, split[0], opts), _some_critical_vector(P, split[1], opts)


@dataclass(frozen=True)
class Fingerprint:
    dim: int
    kappa: float
    mkc: float
    extreme_count: int | None
    weight_spectrum: tuple[tuple[float, int | None], ...]
    cass_norm: float | None
    decomposability_witness_found: bool
    line_count: int = field(default=0, compare=False)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "kappa": self.kappa,
            "mkc": self.mkc,
            "extreme_count": self.extreme_count,
            "weight_spectrum": [list(w) for w in self.weight_spectrum],
            "cass_norm": self.cass_norm,
            "decomposability_witness_found": self.decomposability_witness_found,
            "line_count": self.line_count,
        }


def _spectrum(lines: CriticalLines, tol: float = 1e-6) -> tuple[tuple[float, int | None], ...]:
    groups: list[list[CriticalLine]] = []
    for line in lines:
        if groups and abs(groups[-1][-1].weight - line.weight) <= tol * max(1.0, line.weight):
            groups[-1].append(line)
        else:
            groups.append([line])
    out = []
    for grp in groups:
        weight = float(np.mean([line.weight for line in grp]))
        mult = None if any(line.degenerate for line in grp) else len(grp)
        out.append((weight, mult))
    return tuple(out)


def fingerprint(P: CubicForm, opts: SearchOptions | None = None) -> Fingerprint:
    """Orbit invariants computed in the gauge kappa = n(n-1); ``kappa`` keeps the measured value."""
    n = P.dim
    kappa = float(np.trace(hessian_gram(P)) / n)
    if kappa <= 0:
        raise ValueError("fingerprint needs a nonzero form")
    Q = rescale(P, math.sqrt(max(n * (n - 1), 1) / kappa))
    lines = critical_lines(Q, opts)
    extremes = [line for line in lines if line.value >= lines[0].value - 1e-7 * max(1.0, lines[0].value)]
    return Fingerprint(
        dim=n,
        kappa=kappa,
        mkc=mkc(Q, lines=lines),
        extreme_count=None if any(line.degenerate for line in extremes) else len(extremes),
        weight_spectrum=_spectrum(lines),
        cass_norm=cass_norm(Q) if n >= 3 else None,
        decomposability_witness_found=decomposability_witness(Q, lines) is not None,
        line_count=len(lines),
    )


def _spectra_match(a, b, tol: float) -> bool:
    if len(a) != len(b):
        return False
    for (wa, ma), (wb, mb) in zip(a, b):
        if abs(wa - wb) > tol * max(1.0, wa):
            return False
        if ma is not None and mb is not None and ma != mb:
            return False
    return True


def fingerprint_difference(fa: Fingerprint, fb: Fingerprint, tol: float = 1e-6) -> str | None:
    """First field on which two fingerprints disagree, or None."""
    if fa.dim != fb.dim:
        return "dim"
    if not math.isclose(fa.mkc, fb.mkc, rel_tol=tol, abs_tol=tol):
        return "mkc"
    if (fa.cass_norm is None) != (fb.cass_norm is None) or (
            fa.cass_norm is not None and not math.isclose(fa.cass_norm, fb.cass_norm, rel_tol=tol, abs_tol=1e-8)):
        return "cass_norm"
    if fa.decomposability_witness_found != fb.decomposability_witness_found:
        return "decomposability_witness_found"
    if fa.extreme_count is not None and fb.extreme_count is not None and fa.extreme_count != fb.extreme_count:
        return "extreme_count"
    if not _spectra_match(fa.weight_spectrum, fb.weight_spectrum, tol):
        return "weight_spectrum"
    return None


def compare(P: CubicForm, Q: CubicForm, opts: SearchOptions | None = None) -> str:
    """'distinguished(<field>)' or 'indistinguishable_by_invariants'; never asserts equivalence."""
    for form in (P, Q):
        if not verify_einstein(form).is_einstein:
            raise ValueError("compare needs Einstein forms")
    if P.dim != Q.dim:
        return "distinguished(dim)"
    diff = fingerprint_difference(fingerprint(P, opts), fingerprint(Q, opts))
    return "indistinguishable_by_invariants" if diff is None else f"distinguished({diff})"


@dataclass(frozen=True)
class Classification:
    label: str
    mkc: float | None
    lam: float | None


def classify_low_dim(P: CubicForm, opts: SearchOptions | None = None, tol: float = 1e-4) -> Classification:
    if not verify_einstein(P).is_einstein:
        raise ValueError("classify_low_dim needs an Einstein form")
    if P.dim == 2:
        return Classification("two_d", None, None)
    if P.dim == 3:
        return Classification("basepoly", None, None)
    if P.dim != 4:
        raise ValueError("classify_low_dim handles dimensions 2, 3, 4")
    value = mkc(P, opts)
    lam = math.sqrt(max(value - 4 / 3, 0.0) / 6) - 1 / 3
    if abs(value - 4 / 3) <= tol:
        return Classification("minusonethird", value, lam)
    if abs(value - 2) <= tol:
        return Classification("lazero", value, lam)
    raise ValueError(f"mkc = {value} matches no four-dimensional normal form")


def harmonic_coordinates(P: CubicForm) -> tuple[dict[tuple[int, int, int], float], np.ndarray]:
    """Coefficients alpha (distinct triples) and beta (i != j) of a harmonic form in the basis
    x_i x_j x_k and (3 x_i^2 x_j - x_j^3)/6."""
    n = P.dim
    alpha = {}
    beta = np.zeros((n, n))
    for (i, j, k), c in P.monomials.items():
        if i < j < k:
            alpha[(i, j, k)] = c
        elif i == j and j < k:
            beta[i, k] = 2.0 * c
        elif j == k and i < j:
            beta[j, i] = 2.0 * c
    return alpha, beta


def coefficient_residuals(P: CubicForm, kappa: float | None = None) -> np.ndarray:
    """Residuals of the quadratic system in (alpha, beta) that characterizes Einstein forms.

    Entries are the off-diagonal equations for i < j followed by the diagonal
    kappa equations.  All vanish exactly when P is Einstein with constant kappa.
    """
    n = P.dim
    scale = max(1.0, P.coefficient_norm())
    if np.abs(laplacian_coefficients(P)).max(initial=0.0) > 1e-9 * scale:
        raise ValueError("coefficient_residuals needs a harmonic form")
    alpha, b = harmonic_coordinates(P)

    def al(i: int, j: int, k: int) -> float:
        return alpha.get(tuple(sorted((i, j, k))), 0.0)

    off = []
    for i in range(n):
        for j in range(i + 1, n):
            others = [k for k in range(n) if k != i and k != j]
            s = 0.0
            for k in others:
                s += -(b[k, i] * b[i, j] + b[k, j] * b[j, i]) + b[k, i] * b[k, j]
                s += 2 * b[i, k] * al(i, k, j) + 2 * b[j, k] * al(j, k, i)
            for x in range(len(others)):
                for y in range(x + 1, len(others)):
                    k, l = others[x], others[y]
                    s += 2 * al(i, k, l) * al(j, k, l)
            off.append(s)
    diag = []
    for i in range(n):
        others = [k for k in range(n) if k != i]
        s = 2 * sum(b[k, i] ** 2 + b[i, k] ** 2 for k in others)
        for x in range(len(others)):
            for y in range(x + 1, len(others)):
                k, l = others[x], others[y]
                s += 2 * b[k, i] * b[l, i] + 2 * al(i, k, l) ** 2
        diag.append(s)
    diag = np.array(diag)
    target = float(diag.mean()) if kappa is None else kappa
    return np.concatenate([np.array(off), diag - target])

import itertools
import math

import numpy as np
import pytest

from cubicforms import (
    affine_extension,
    cartan_isoparametric,
    catalog,
    compare,
    critical_lines,
    evaluate,
    extend,
    gradient,
    parahurwitzification,
    pfaffian_form,
    simplicial,
    tensor_product,
    triple,
    verify_einstein,
)
from cubicforms import composition
from cubicforms.analysis import ass_tensor, cass_tensor
from cubicforms.combinatorics import triple_system_polynomial, ts_catalog
from cubicforms.constructors import (
    CATALOG_NAMES,
    basepoly,
    d2poly2,
    det9,
    immanant9,
    lanminusone,
    permanent9,
    poly3,
    poly3_rotation,
    simplicial_recursive,
    split_example,
    sym3det,
    tensor_index_permutation,
    triple_parahurwitz,
    two_d,
)
from cubicforms.tensor_core import (
    act_orthogonal,
    coefficient_distance,
    direct_sum,
    from_terms,
    normalize_kappa,
    permute_variables,
    rescale,
)
from oracles import immanant21, permanent, random_orthogonal, same_up_to_signed_permutation

P2 = simplicial(2)


# ---- simplicial family ------------------------------------------------------

def test_simplicial_two_is_the_planar_form():
    expected = from_terms(2, [((1, 1, 1), 1 / 6), ((0, 0, 1), -0.5)])
    assert coefficient_distance(P2, expected) <= 1e-15


@pytest.mark.parametrize("n", range(2, 9))
def test_simplicial_kappa(n):
    rep = verify_einstein(simplicial(n))
    assert rep.is_einstein
    assert rep.kappa == pytest.approx(n * (n - 1), rel=1e-9)


@pytest.mark.parametrize("n", range(2, 9))
def test_closed_form_equals_recursion_and_extend_chain(n):
    closed = simplicial(n)
    assert coefficient_distance(closed, simplicial_recursive(n)) <= 1e-12
    chained = P2
    for k in range(3, n + 1):
        chained = extend(chained, k * (k - 1))
    assert coefficient_distance(closed, chained) <= 1e-12


def test_simplicial_rejects_small_n():
    with pytest.raises(ValueError):
        simplicial(1)


def test_simplicial_four_matches_minusonethird_orbit_invariants():
    assert compare(simplicial(4), catalog("minusonethird").form) == "indistinguishable_by_invariants"


def test_simplicial_three_matches_scaled_basepoly_invariants():
    assert compare(simplicial(3), rescale(basepoly(), math.sqrt(3))) == "indistinguishable_by_invariants"


# ---- extend -------------------------------------------------------------------

def test_extend_first_step():
    assert coefficient_distance(extend(P2, 6), simplicial(3)) <= 1e-12


def test_extend_hits_requested_kappa():
    Q = extend(catalog("d2poly2").form, 17.5)
    rep = verify_einstein(Q)
    assert rep.is_einstein and rep.kappa == pytest.approx(17.5, rel=1e-9)


def test_extend_rejects_non_einstein_input():
    with pytest.raises(ValueError):
        extend(sym3det(), 2.0)


def test_extend_doubles_critical_line_count_plus_one():
    counts = [len(critical_lines(simplicial(n))) for n in (3, 4)]
    assert counts == [7, 15]
    assert len(critical_lines(extend(simplicial(3), 12))) == 2 * counts[0] + 1


def test_extend_scales_conformal_nonassociativity():
    Q = triple_system_polynomial(ts_catalog("ag2_3"))
    n, kappa, kappa_next = Q.dim, 8.0, 90.0
    big = cass_tensor(extend(Q, kappa_next))
    factor = kappa_next / kappa * (n + 2) * (n - 1) / ((n + 1) * n)
    padded = np.zeros_like(big)
    padded[:n, :n, :n, :n] = factor * cass_tensor(Q)
    assert np.abs(big - padded).max() <= 1e-9 * np.abs(big).max()
    assert np.linalg.norm(big) > 1.0


# ---- tensor products ----------------------------------------------------------

def test_product_of_basepolys_is_the_permanent():
    assert coefficient_distance(tensor_product(basepoly(), basepoly()), permanent9()) == 0.0


def test_tensor_product_of_planar_and_basepoly_is_phtriple():
    phtriple = from_terms(6, [((1, 2, 3), 1), ((1, 5, 6), -1), ((4, 2, 6), -1), ((4, 5, 3), -1)], one_based=True)
    assert coefficient_distance(tensor_product(two_d(), basepoly()), phtriple) <= 1e-15


def test_tensor_product_evaluates_on_pure_tensors(rng):
    for _ in range(10):
        p, q = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        from cubicforms.tensor_core import from_array

        P, Q = from_array(rng.normal(size=(p, p, p))), from_array(rng.normal(size=(q, q, q)))
        a, b = rng.normal(size=p), rng.normal(size=q)
        value = evaluate(tensor_product(P, Q), np.kron(a, b))
        assert value == pytest.approx(6 * evaluate(P, a) * evaluate(Q, b), rel=1e-10, abs=1e-10)


def test_kappa_multiplies_over_catalog_pairs(rng):
    names = [n for n in CATALOG_NAMES if n != "sym3det"]
    kappas = {n: verify_einstein(catalog(n).form).kappa for n in names}
    for _ in range(50):
        a, b = rng.choice(names, size=2)
        rep = verify_einstein(tensor_product(catalog(a).form, catalog(b).form))
        assert rep.is_einstein
        assert rep.kappa == pytest.approx(kappas[a] * kappas[b], rel=1e-8)


def test_kappa_of_planar_square():
    assert verify_einstein(tensor_product(P2, P2)).kappa == pytest.approx(4.0)


def test_index_permutation_is_a_bijection():
    perm = tensor_index_permutation(3, 4)
    assert sorted(perm) == list(range(12))
    assert perm[1 * 4 + 2] == 2 * 3 + 1


# ---- triple and parahurwitzification ------------------------------------------

def test_triple_of_single_cube_is_basepoly():
    assert coefficient_distance(triple(from_terms(1, [((0, 0, 0), 1 / 6)])), basepoly()) <= 1e-15


def test_triple_of_basepoly_is_permanent(rng):
    assert coefficient_distance(triple(basepoly()), permanent9()) == 0.0
    m = rng.normal(size=(3, 3))
    assert evaluate(permanent9(), m.ravel()) == pytest.approx(permanent(m))


@pytest.mark.parametrize("seed_form", [basepoly(), P2, simplicial(4), catalog("d2poly2").form])
def test_triple_and_parahurwitz_are_permuted_tensor_products(seed_form):
    n = seed_form.dim
    t = tensor_product(seed_form, basepoly())
    assert coefficient_distance(triple(seed_form), permute_variables(t, tensor_index_permutation(n, 3))) <= 1e-12
    ph = tensor_product(seed_form, two_d())
    assert coefficient_distance(parahurwitzification(seed_form), permute_variables(ph, tensor_index_permutation(n, 2))) <= 1e-12


def test_triple_doubles_kappa_and_is_harmonic():
    rep = verify_einstein(triple(P2))
    assert rep.is_einstein and rep.kappa == pytest.approx(4.0)
    # second equation only: x^3/6 is not harmonic, but its triple is
    rep = verify_einstein(triple(from_terms(1, [((0, 0, 0), 1 / 6)])))
    assert rep.is_einstein and rep.kappa == pytest.approx(2.0)


def test_triple_of_planar_form_is_the_tripleparahurwitz_polynomial():
    assert same_up_to_signed_permutation(triple(P2), triple_parahurwitz())
    assert same_up_to_signed_permutation(parahurwitzification(basepoly()), triple_parahurwitz())


def test_parahurwitzification_examples():
    rep = verify_einstein(parahurwitzification(basepoly()))
    assert rep.is_einstein and rep.kappa == pytest.approx(4.0)
    assert same_up_to_signed_permutation(parahurwitzification(P2), poly3())
    planar = parahurwitzification(from_terms(1, [((0, 0, 0), 1 / 6)]))
    rep = verify_einstein(planar)
    assert planar.dim == 2 and rep.is_einstein


def test_parahurwitzification_is_real_part_of_complexified_form(rng):
    P = catalog("d2poly2").form
    Q = parahurwitzification(P)
    x, y = rng.normal(size=6), rng.normal(size=6)
    z = x + 1j * y
    direct = sum(c * z[i] * z[j] * z[k] for (i, j, k), c in P.monomials.items()).real
    assert evaluate(Q, np.concatenate([x, y])) == pytest.approx(direct)


# ---- affine extension -----------------------------------------------------------

def test_affine_extension_of_zero_in_one_variable():
    Phat = affine_extension(from_terms(1, []))
    assert coefficient_distance(Phat, from_terms(2, [((1, 1, 1), 1 / 6), ((0, 0, 1), 0.5)])) == 0.0
    # |Hess|^2 = (kappa + 2)|x|^2 + (n + 1) r^2 with kappa = 0, n = 1
    np.testing.assert_allclose(verify_einstein(Phat).gram, np.diag([2.0, 2.0]), atol=1e-15)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_affine_extension_gram_formula(n):
    P = simplicial(n)
    kappa = n * (n - 1)
    gram = verify_einstein(affine_extension(P)).gram
    np.testing.assert_allclose(gram, np.diag([kappa + 2.0] * n + [n + 1.0]), atol=1e-10)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_affine_extension_of_conformally_associative_form_is_associative(n):
    P = normalize_kappa(simplicial(n), n - 1)
    Phat = affine_extension(P)
    assert np.abs(ass_tensor(Phat)).max() <= 1e-8
    np.testing.assert_allclose(verify_einstein(Phat).gram, (n + 1) * np.eye(n + 1), atol=1e-10)


def test_affine_extension_ass_identity_on_random_forms(rng):
    from cubicforms.tensor_core import from_array

    for _ in range(20):
        n = int(rng.integers(1, 6))
        P = from_array(rng.normal(size=(n, n, n)))
        a = ass_tensor(affine_extension(P))
        expected = np.zeros((n + 1,) * 4)
        d = np.eye(n)
        expected[:n, :n, :n, :n] = ass_tensor(P) + np.einsum("jk,il->ijkl", d, d) - np.einsum("ik,jl->ijkl", d, d)
        assert np.abs(a - expected).max() <= 1e-9 * max(1.0, np.abs(a).max())


# ---- Cartan cubics ---------------------------------------------------------------

def cartan_direct(m, point):
    u, v = point[0], point[1]
    z1, z2, z3 = point[2:2 + m], point[2 + m:2 + 2 * m], point[2 + 2 * m:]
    nrm = lambda z: float(z @ z)
    conj, mult = composition.conj, composition.mult
    cross = mult(mult(z1, z2), z3) + mult(conj(z3), mult(conj(z2), conj(z1)))
    return (u ** 3 + 1.5 * u * (nrm(z1) + nrm(z2) - 2 * nrm(z3) - 2 * v * v)
            + 1.5 * math.sqrt(3) * v * (nrm(z1) - nrm(z2)) + 1.5 * math.sqrt(3) * cross[0])


@pytest.mark.parametrize("m,kappa", [(1, 126), (2, 180), (4, 288), (8, 504)])
def test_cartan_kappa(m, kappa):
    P = cartan_isoparametric(m)
    rep = verify_einstein(P)
    assert P.dim == 3 * m + 2
    assert rep.is_einstein and rep.kappa == pytest.approx(kappa, rel=1e-9)
    assert kappa == 18 * (P.dim + 2)


@pytest.mark.parametrize("m", [1, 2, 4, 8])
def test_cartan_matches_direct_composition_formula(m, rng):
    P = cartan_isoparametric(m)
    for _ in range(20):
        x = rng.normal(size=P.dim)
        assert evaluate(P, x) == pytest.approx(cartan_direct(m, x), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("m", [1, 2, 4, 8])
def test_cartan_gradient_norm_identity(m, rng):
    P = cartan_isoparametric(m)
    x = rng.normal(size=(1000, P.dim))
    ratio = np.array([gradient(P, p) @ gradient(P, p) for p in x]) / (9 * (x * x).sum(1) ** 2)
    assert np.abs(ratio - 1).max() <= 1e-9


def test_cartan_complex_case_is_hermitian_determinant(rng):
    P = cartan_isoparametric(2)
    s3 = math.sqrt(3)
    for _ in range(10):
        p = rng.normal(size=8)
        x, y = p[0], p[1]
        z1, z2, z3 = p[2] + 1j * p[3], p[4] + 1j * p[5], p[6] + 1j * p[7]
        mat = np.array([[-x / s3 + y, z3, np.conj(z1)],
                        [np.conj(z3), -x / s3 - y, z2],
                        [z1, np.conj(z2), 2 * x / s3]])
        assert evaluate(P, p) == pytest.approx(1.5 * s3 * np.linalg.det(mat).real, rel=1e-12)


def test_cartan_rejects_other_m():
    with pytest.raises(ValueError):
        cartan_isoparametric(3)


def test_octonion_norm_is_multiplicative(rng):
    for _ in range(20):
        a, b = rng.normal(size=8), rng.normal(size=8)
        assert np.linalg.norm(composition.mult(a, b)) == pytest.approx(np.linalg.norm(a) * np.linalg.norm(b))


def test_octonions_are_not_associative():
    e = np.eye(8)
    left = composition.mult(composition.mult(e[1], e[2]), e[4])
    right = composition.mult(e[1], composition.mult(e[2], e[4]))
    assert not np.allclose(left, right)


# ---- Pfaffian family -------------------------------------------------------------

PFAFF66 = """
+12.34.56 +12.36.45 -12.35.46 -13.24.56 +13.25.46 -13.26.45 +14.23.56 -14.25.36
+14.26.35 -15.23.46 +15.24.36 -15.26.34 +16.23.45 -16.24.35 +16.25.34
"""


def test_pfaffian_form_matches_explicit_expansion():
    pairs = list(itertools.combinations(range(1, 7), 2))
    index = {f"{a}{b}": i for i, (a, b) in enumerate(pairs)}
    terms = []
    for token in PFAFF66.split():
        sign = 1.0 if token[0] == "+" else -1.0
        terms.append((tuple(index[p] for p in token[1:].split(".")), sign))
    expected = from_terms(15, terms)
    P = pfaffian_form(1)
    assert len(P.monomials) == 15
    assert coefficient_distance(P, expected) == 0.0


def test_pfaffian_kappa_is_measured():
    rep = verify_einstein(pfaffian_form(1))
    assert rep.is_einstein and rep.kappa == pytest.approx(6.0)
    assert rep.kappa == pytest.approx(math.comb(4, 2))
    assert rep.kappa != pytest.approx(math.comb(2, 1))


def test_pfaffian_is_the_pfaffian(rng):
    pairs = list(itertools.combinations(range(6), 2))
    P = pfaffian_form(1)
    for _ in range(5):
        x = rng.normal(size=15)
        a = np.zeros((6, 6))
        for (i, j), v in zip(pairs, x):
            a[i, j], a[j, i] = v, -v
        # Pf(A)^2 = det(A)
        assert evaluate(P, x) ** 2 == pytest.approx(np.linalg.det(a), rel=1e-9)


def test_pfaffian_size_limit():
    with pytest.raises(MemoryError):
        pfaffian_form(3)
    with pytest.raises(ValueError):
        pfaffian_form(0)


# ---- catalog -----------------------------------------------------------------------

@pytest.mark.parametrize("name", [n for n in CATALOG_NAMES if n != "sym3det"])
def test_catalog_entries_verify(name):
    entry = catalog(name)
    rep = verify_einstein(entry.form)
    assert rep.is_einstein
    assert entry.dim == entry.form.dim
    if entry.kappa_expected is not None:
        assert rep.kappa == pytest.approx(entry.kappa_expected, rel=1e-9)


def test_catalog_examples():
    assert catalog("d2poly2").dim == 6 and verify_einstein(catalog("d2poly2").form).kappa == pytest.approx(4)
    assert catalog("immanant9").dim == 9 and verify_einstein(immanant9()).kappa == pytest.approx(2)
    assert verify_einstein(det9()).is_einstein
    assert not verify_einstein(catalog("sym3det").form).is_harmonic
    with pytest.raises(KeyError):
        catalog("nonesuch")


def test_measured_det9_kappa():
    assert verify_einstein(det9()).kappa == pytest.approx(4.0, rel=1e-12)


def test_matrix_forms_match_matrix_functions(rng):
    c = 2 ** (-1 / 3)
    for _ in range(5):
        m = rng.normal(size=(3, 3))
        assert evaluate(det9(), m.ravel()) == pytest.approx(np.linalg.det(m))
        scaled = m.copy()
        np.fill_diagonal(scaled, c * np.diag(m))
        # scaling the diagonal by 2^(-1/3) turns the (2,1) immanant into unit coefficients
        assert evaluate(immanant9(), m.ravel()) == pytest.approx(immanant21(scaled))


def test_sym3det_is_symmetric_determinant(rng):
    s2 = math.sqrt(2)
    for _ in range(5):
        v = rng.normal(size=6)
        m = np.array([[v[0], v[3] / s2, v[4] / s2], [v[3] / s2, v[1], v[5] / s2], [v[4] / s2, v[5] / s2, v[2]]])
        assert evaluate(sym3det(), v) == pytest.approx(np.linalg.det(m))


def test_poly3_orthogonal_decomposition():
    g = poly3_rotation()
    assert np.abs(g @ g.T - np.eye(4)).max() <= 1e-15
    split = act_orthogonal(g, poly3())
    c = 2 * math.sqrt(2) / 12
    expected = from_terms(4, [((0, 0, 0), c), ((0, 1, 1), -3 * c), ((2, 2, 2), c), ((2, 3, 3), -3 * c)])
    assert coefficient_distance(split, expected) <= 1e-12


def test_triple_parahurwitz_is_not_a_relabeled_d2poly2():
    # triple_parahurwitz differs from d2poly2 only by signs of monomials, not by a relabeling
    assert not same_up_to_signed_permutation(triple_parahurwitz(), d2poly2())


def test_split_example_kappa():
    for p, q in [(1, 1), (2, 0), (0, 2), (2, 3)]:
        rep = verify_einstein(split_example(p, q))
        assert rep.is_einstein and rep.kappa == pytest.approx(2.0)
        assert split_example(p, q).dim == 2 * p + 3 * q


def test_lanminusone_pattern():
    rep = verify_einstein(lanminusone(basepoly()))
    assert rep.is_einstein and rep.kappa == pytest.approx(72.0)
    rep = verify_einstein(lanminusone(simplicial(4)))
    assert rep.is_einstein and rep.kappa == pytest.approx(72.0)


def test_constructions_commute_with_rotations(rng):
    g = random_orthogonal(rng, 3)
    rotated = act_orthogonal(g, basepoly())
    rep = verify_einstein(triple(rotated))
    assert rep.is_einstein and rep.kappa == pytest.approx(4.0)
    assert verify_einstein(direct_sum(rotated, basepoly())).kappa == pytest.approx(2.0)

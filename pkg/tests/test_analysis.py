from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from recurlab.analysis import (EigenData, FunctionOnX, delta, density_scan, eigenbasis, eigenvalue_extends,
                               ghk_seminorm, intersection_density, invariant_expectation, is_eigenfunction,
                               kronecker_projection, subgroup_members, uc_average_product)
from recurlab.errors import InvalidArgument, ResourceLimit
from recurlab.groups import Homomorphism, make_group
from recurlab.systems import (CounterexampleParams, build_counterexample, build_example31, build_example41,
                              build_nonergodic, build_rotation)


def rotation(n):
    Z = make_group([n])
    return build_rotation(Z, Homomorphism.identity(Z))


def exact_integral(f: FunctionOnX) -> Fraction:
    """Integral of a rational-valued exact function."""
    assert f.kind == "exact" and f.modulus == 1
    return Fraction(int(f.hist[:, 0].sum()), f.den * f.system.size)


def brute_density(system, mask, a, b, g):
    """Oracle: direct point-by-point evaluation through the generator maps."""
    x = np.arange(system.size)
    ga = system.G.reduce([a * c for c in g])
    gb = system.G.reduce([b * c for c in g])

    def act(coords, pts):
        for j, k in enumerate(coords):
            for _ in range(int(k)):
                pts = system.generators[j][pts]
        return pts

    hit = mask & mask[act(ga, x)] & mask[act(gb, x)]
    return Fraction(int(hit.sum()), system.size)


# -- densities ------------------------------------------------------------------------------------

def test_density_trivial_cases():
    system = build_example31(1)
    A = [0, 3, 5]
    assert intersection_density(system, A, 1, 2, [0]) == Fraction(3, 8)
    everything = np.ones(system.size, dtype=bool)
    for g in range(4):
        assert intersection_density(system, everything, 1, 2, [g]) == 1


def test_density_rejects_bad_points():
    with pytest.raises(InvalidArgument):
        intersection_density(rotation(8), [9], 1, 2, [1])


def test_xp_model_density():
    p = 5
    B = [0, 1]
    system = build_nonergodic(p, 1)
    A = [z * p + u for z in range(p) for u in B]
    for g in range(1, p):
        assert intersection_density(system, A, 1, 2, [g]) == Fraction(len(B), p * p)


def test_density_scan_rotation_entry_count():
    rng = np.random.default_rng(7)
    system = rotation(64)
    A = rng.permutation(64)[:32]
    rep = density_scan(system, A, 1, 2)
    assert len(rep.counts) == 64
    assert rep.density(0) == Fraction(1, 2)
    assert rep.mu == Fraction(1, 2)
    assert all(0 <= v <= rep.mu for v in rep.densities().values())


@pytest.mark.parametrize("make,a,b", [
    (lambda: build_example31(2), 1, 2),
    (lambda: build_counterexample(CounterexampleParams(3, 1)), 1, 2),
    (lambda: build_nonergodic(3, 2), 2, 1),
    (lambda: rotation(30), 2, 3),
])
def test_scan_matches_pointwise_oracle(make, a, b):
    system = make()
    rng = np.random.default_rng(system.size)
    mask = rng.random(system.size) < 0.5
    rep = density_scan(system, mask, a, b)
    for gi in range(system.G.order):
        g = system.G.decode(gi).tolist()
        assert rep.density(gi) == intersection_density(system, mask, a, b, g) == brute_density(system, mask, a, b, g)


def test_scan_homomorphism_pair():
    system = build_example31(2)
    G = system.G
    phi = Homomorphism.from_images(G, G, [[1, 0], [0, 0]])
    psi = Homomorphism.from_images(G, G, [[0, 1], [1, 1]])
    mask = np.arange(system.size) % 3 == 0
    rep = density_scan(system, mask, phi, psi)
    for gi in range(G.order):
        assert rep.density(gi) == intersection_density(system, mask, phi, psi, G.decode(gi).tolist())


def test_p2_system_degenerate_everywhere():
    # T_{pg} is the identity for every g, so the scan with pattern (p a, p b) returns mu(A) everywhere
    p = 5
    system = build_counterexample(CounterexampleParams(p, 1))
    H = system.H.order
    A = [z * H + u for z in range(p) for u in range(H) if u % p in (0, 1)]
    G = system.G
    rep = density_scan(system, A, Homomorphism.scalar(G, p), Homomorphism.scalar(G, 2 * p))
    assert len(rep.degenerate) == G.order
    assert set(rep.densities().values()) == {rep.mu}


def test_density_identity_with_average():
    # <1_A * avg_g 1_A(T_ag .) 1_A(T_bg .), 1> = mean over g of the triple density
    system = build_example31(2)
    rng = np.random.default_rng(3)
    mask = rng.random(system.size) < 0.4
    ind = FunctionOnX.indicator(system, mask)
    avg = uc_average_product(system, [ind, ind], [1, 2])
    lhs = exact_integral(ind * avg)
    rep = density_scan(system, mask, 1, 2)
    assert lhs == sum(rep.densities().values()) / system.G.order


def test_report_serialisation():
    system = rotation(12)
    rep = density_scan(system, [0, 1, 2, 5, 7], 1, 2)
    again = type(rep).from_json(rep.to_json())
    assert np.array_equal(again.counts, rep.counts) and again.den == rep.den
    lines = rep.to_csv().splitlines()
    assert lines[0] == "g,num,den" and len(lines) == 13
    assert lines[1] == "0,5,12"


def test_above_uses_exact_threshold():
    system = rotation(10)
    rep = density_scan(system, range(10), 1, 2)
    # density 1 everywhere; 1 > 1 - 0.1 but not > 1 - 0
    assert len(rep.above(0.1)) == 10
    assert len(rep.above(0)) == 0


# -- averages ---------------------------------------------------------------------------------------

def test_average_of_mean_zero_function_vanishes():
    system = rotation(9)
    f = FunctionOnX.character(system, [2])
    avg = uc_average_product(system, [f], [1])
    assert avg.kind == "exact" and avg.is_zero()


def test_example41_average():
    for d in (1, 2):
        fac = build_example41(d).factor
        f1 = FunctionOnX.coordinate(fac, d)
        f = FunctionOnX.coordinate(fac, d + 1)
        avg = uc_average_product(fac, [f1, f], [1, 2])
        assert avg.kind == "exact"
        assert avg.equals(f1 * f)


@pytest.mark.parametrize("d", [1, 2])
def test_example31_averages_at_finite_depth(d):
    """Truncation: exactly the f1 of character (2, ..., 2) pairs with y to a nonzero average."""
    system = build_example31(d)
    y = FunctionOnX.character(system, [0] * d + [1])
    nonzero = []
    for ci in range(system.Z.order):
        coords = system.Z.decode(ci).tolist()
        avg = uc_average_product(system, [FunctionOnX.character(system, coords + [0]), y], [1, 2])
        if not avg.is_zero():
            nonzero.append(coords)
    assert nonzero == [[2] * d]


def test_average_exact_vs_complex_paths():
    system = build_example31(1)
    rng = np.random.default_rng(11)
    f1 = FunctionOnX.character(system, [1, 1])
    f2 = FunctionOnX.from_complex(system, rng.normal(size=8) + 1j * rng.normal(size=8))
    exact = uc_average_product(system, [f1, f1], [1, 3])
    approx = uc_average_product(system, [f1.as_complex(), f1.as_complex()], [1, 3])
    assert np.allclose(exact.to_complex(), approx.to_complex(), atol=1e-12)
    mixed = uc_average_product(system, [f1, f2], [1, 2])
    assert mixed.kind == "complex"


def test_average_argument_checks():
    system = rotation(4)
    with pytest.raises(InvalidArgument):
        uc_average_product(system, [FunctionOnX.constant(system)], [1, 2])
    with pytest.raises(InvalidArgument):
        uc_average_product(system, [FunctionOnX.constant(rotation(4))], [1])


# -- conditional expectation ------------------------------------------------------------------------

def test_invariant_expectation_cases():
    system = rotation(6)
    rng = np.random.default_rng(5)
    vals = rng.integers(-5, 6, size=6)
    f = FunctionOnX.from_roots(system, 0, 1, weights=vals)
    full = invariant_expectation(system, f)
    assert np.allclose(full.to_complex(), vals.mean())
    assert invariant_expectation(system, f, []).equals(f)
    orbit = system.orbit_partition(scalar=2)[0]
    ind = FunctionOnX.indicator(system, orbit)
    assert invariant_expectation(system, ind, 2).equals(ind)
    half = invariant_expectation(system, f, 2)
    assert invariant_expectation(system, half, 2).equals(half)


# -- eigenbases -------------------------------------------------------------------------------------

def test_rotation_eigenbasis_is_character_table():
    system = rotation(12)
    basis = eigenbasis(system)
    assert sorted(e.character.coords for e in basis) == [(k,) for k in range(12)]


BASIS_CASES = [
    (lambda: build_example31(1), None), (lambda: build_example31(1), 2), (lambda: build_example31(2), 2),
    (lambda: build_example41(1).extension, None), (lambda: build_nonergodic(3, 2), None),
    (lambda: build_counterexample(CounterexampleParams(3, 1)), 3), (lambda: rotation(10), 5),
]


@pytest.mark.parametrize("make,H", BASIS_CASES)
def test_eigenbasis_spans_and_is_orthogonal(make, H):
    system = make()
    basis = eigenbasis(system, H)
    assert len(basis) == system.size
    mat = np.stack([e.function.to_complex() for e in basis])
    assert np.linalg.matrix_rank(mat) == system.size
    gram = mat.conj() @ mat.T
    assert np.allclose(gram, np.diag(np.diag(gram)))
    assert all(is_eigenfunction(system, e) for e in basis)


def test_example31_y_is_2G_eigenfunction():
    system = build_example31(1)
    y = EigenData(np.arange(8), system.G.character([1]), FunctionOnX.coordinate(system, 1),
                  subgroup_members(system, 2))
    assert is_eigenfunction(system, y)
    # eigenvalue at 2g is (-1)^g: residue 2g mod 4
    assert [y.eigenvalue_on(h) for h in y.subgroup] == [0, 2]
    wrong = EigenData(y.support, system.G.character([0]), y.function, y.subgroup)
    assert not is_eigenfunction(system, wrong)


@pytest.mark.parametrize("make,H", BASIS_CASES)
def test_every_eigenvalue_extends_at_finite_scale(make, H):
    system = make()
    for e in eigenbasis(system, H):
        ext = eigenvalue_extends(system, e)
        assert ext is not None
        members = system.G.decode(e.subgroup)
        assert np.array_equal(ext.character.evaluate(members), e.character.evaluate(members))


def test_trivial_eigenvalue_extends():
    system = build_example41(1).extension
    e = next(x for x in eigenbasis(system, 2) if x.character.is_trivial())
    assert eigenvalue_extends(system, e) is not None


def test_example41_extension_character():
    ext = build_example41(1).extension
    y = EigenData(np.arange(ext.size), ext.G.character([1]), FunctionOnX.coordinate(ext, 2),
                  subgroup_members(ext, 2))
    found = eigenvalue_extends(ext, y)
    assert found is not None and is_eigenfunction(ext, found)


# -- derivatives and seminorms ------------------------------------------------------------------------

def test_delta_cases():
    system = rotation(8)
    one = FunctionOnX.constant(system)
    assert delta(one, 3).equals(one)
    chi = FunctionOnX.character(system, [3])
    d = delta(chi, 2)
    assert np.allclose(d.to_complex(), np.exp(2j * np.pi * 6 / 8))
    rng = np.random.default_rng(2)
    f = FunctionOnX.from_complex(system, rng.normal(size=8) + 1j * rng.normal(size=8))
    v = f.to_complex()
    assert np.allclose(np.abs(delta(f, 5).to_complex()), np.abs(np.roll(v, -5)) * np.abs(v))


def test_seminorm_examples():
    system = rotation(8)
    one = FunctionOnX.constant(system)
    for k in (1, 2, 3):
        assert ghk_seminorm(system, one, k=k) == pytest.approx(1, abs=1e-12)
    assert ghk_seminorm(system, FunctionOnX.character(system, [3]), k=1) == pytest.approx(0, abs=1e-12)
    assert ghk_seminorm(system, FunctionOnX.character(system, [3]), k=2) == pytest.approx(1, abs=1e-12)


def test_seminorm_u2_by_hand():
    # ||f||_{U^2}^4 on a transitive rotation of Z/n is sum |f^(k)|^4 with normalised Fourier coefficients
    system = rotation(8)
    rng = np.random.default_rng(9)
    v = rng.normal(size=8) + 1j * rng.normal(size=8)
    coef = np.fft.fft(v) / 8
    want = float(np.sum(np.abs(coef) ** 4)) ** 0.25
    assert ghk_seminorm(system, FunctionOnX.from_complex(system, v), k=2) == pytest.approx(want, abs=1e-9)


def test_seminorm_argument_checks():
    system = rotation(8)
    with pytest.raises(InvalidArgument):
        ghk_seminorm(system, FunctionOnX.constant(system), k=4)
    system.budget = 100
    with pytest.raises(ResourceLimit):
        ghk_seminorm(system, FunctionOnX.constant(system), k=3)


@given(st.integers(0, 10 ** 6), st.sampled_from(["rot", "ex31", "nonerg"]))
def test_seminorm_monotone(seed, kind):
    rng = np.random.default_rng(seed)
    system = {"rot": lambda: rotation(int(rng.integers(2, 33))),
              "ex31": lambda: build_example31(1),
              "nonerg": lambda: build_nonergodic(3, 1)}[kind]()
    f = FunctionOnX.from_complex(system, rng.normal(size=system.size) + 1j * rng.normal(size=system.size))
    u = [ghk_seminorm(system, f, k=k) for k in (1, 2, 3)]
    assert u[0] <= u[1] + 1e-9 and u[1] <= u[2] + 1e-9


# -- projections -----------------------------------------------------------------------------------

@pytest.mark.parametrize("make,H", BASIS_CASES[:4])
def test_projection_is_identity_on_finite_systems(make, H):
    system = make()
    rng = np.random.default_rng(1)
    f = FunctionOnX.from_complex(system, rng.normal(size=system.size) + 1j * rng.normal(size=system.size))
    proj = kronecker_projection(system, f, H)
    assert proj.equals(f, tol=1e-9)
    assert kronecker_projection(system, proj, H).equals(proj, tol=1e-9)
    resid = FunctionOnX.from_complex(system, f.to_complex() - proj.to_complex())
    assert ghk_seminorm(system, resid, H, k=2) < 1e-6


def test_projection_agrees_for_subgroup_and_group():
    for system in (build_example31(1), build_example41(1).extension):
        f = FunctionOnX.character(system, [1] * system.X.rank)
        assert kronecker_projection(system, f, 2).equals(kronecker_projection(system, f), tol=1e-9)


# -- function objects ---------------------------------------------------------------------------------

def test_function_json_roundtrip():
    system = build_example31(1)
    f = FunctionOnX.character(system, [1, 1]) * FunctionOnX.coordinate(system, 0)
    g = FunctionOnX.from_json(system, f.to_json())
    assert g.equals(f) and g.kind == "exact"


def test_exact_products_stay_exact():
    system = build_example31(1)
    f = FunctionOnX.character(system, [1, 0])
    g = (f * f.conj()) + FunctionOnX.constant(system)
    assert g.kind == "exact"
    assert np.allclose(g.to_complex(), 2)

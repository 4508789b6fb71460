import math

import numpy as np
import pytest

from recurlab.errors import InvalidArgument, ResourceLimit
from recurlab.groups import Homomorphism, make_group
from recurlab.systems import (Cocycle, CounterexampleParams, FiniteSystem, RotationSystem, SkewProduct,
                              build_counterexample, build_example31, build_example41, build_nonergodic,
                              build_rotation, counterexample_closed_form, example31_cocycle, orbit_partition,
                              system_from_spec, validate_cocycle, verify_pth_identity)


def union_find_orbits(n, perms):
    """Independent orbit oracle: union-find over the generator edges."""
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for perm in perms:
        for x in range(n):
            rx, ry = find(x), find(int(perm[x]))
            if rx != ry:
                parent[rx] = ry
    return len({find(x) for x in range(n)})


def test_rotation_orbits():
    Z8 = make_group([8])
    assert build_rotation(Z8, Homomorphism.identity(Z8)).orbit_count() == 1
    doubled = build_rotation(Z8, Homomorphism.scalar(Z8, 2))
    blocks = doubled.orbit_partition()
    assert len(blocks) == 2
    assert blocks[0].tolist() == [0, 2, 4, 6]


def test_rotation_rejects_bad_alpha():
    with pytest.raises(InvalidArgument):
        build_rotation(make_group([4]), Homomorphism(make_group([2]), make_group([4]), ((1,),)))


def test_example31_base():
    G = make_group([4, 4])
    base = RotationSystem(G, Homomorphism.identity(G))
    assert base.size == 16 and base.orbit_count() == 1
    assert base.apply([1, 3], [G.index([2, 2])]).tolist() == [G.index([3, 1])]


def test_cocycle_from_character_is_valid():
    G = make_group([6])
    Z = make_group([3])
    base = RotationSystem(Z, Homomorphism(G, Z, ((1,),)))
    # sigma(e, z) = chi(e) independent of z
    sigma = Cocycle(base, make_group([6]), np.full((1, 3), 5))
    assert validate_cocycle(sigma) is None


def test_example31_cocycle_valid_and_perturbation_caught():
    sigma = example31_cocycle(1)
    assert validate_cocycle(sigma) is None
    vals = sigma.values.copy()
    vals[0, 2, 0] ^= 1
    bad = validate_cocycle(Cocycle(sigma.base, sigma.H, vals))
    assert bad is not None and bad["kind"] == "order"
    with pytest.raises(InvalidArgument):
        SkewProduct(Cocycle(sigma.base, sigma.H, vals))


def test_perturbation_of_commuting_pair_caught():
    sigma = example31_cocycle(2)
    assert validate_cocycle(sigma) is None
    vals = sigma.values.copy()
    vals[1, 5, 0] ^= 1
    assert validate_cocycle(Cocycle(sigma.base, sigma.H, vals)) is not None


def test_trivial_cocycle_orbit_count():
    Z = make_group([8])
    base = build_rotation(Z, Homomorphism.scalar(Z, 2))
    for H in ([3], [2, 2]):
        Hg = make_group(H)
        skew = SkewProduct(Cocycle(base, Hg, np.zeros((1, 8, Hg.rank), dtype=np.int64)))
        assert skew.orbit_count() == base.orbit_count() * Hg.order


def test_example_sizes():
    assert build_example31(1).size == 8
    ex = build_example41(1)
    assert ex.extension.size == 32
    assert ex.factor.size == 16
    assert ex.extension.X.moduli == (4, 4, 2)


def test_example41_lambda_coordinate():
    ext = build_example41(2).extension
    # x_inf moves by g_1 + g_2 mod 4
    pts = np.arange(ext.size)
    img = ext.apply([1, 2], pts)
    c0, c1 = ext.X.decode(pts), ext.X.decode(img)
    assert np.all((c1[:, 2] - c0[:, 2]) % 4 == 3)


@pytest.mark.parametrize("d", [1, 2])
def test_example41_equivariance(d):
    assert build_example41(d).check_equivariance() is None


def test_example41_equivariance_detects_broken_map():
    ex = build_example41(1)
    broken = ex.factor_map.copy()
    broken[[0, 1]] = broken[[1, 0]]
    ex.factor_map = broken
    assert ex.check_equivariance() is not None


def test_example31_orbits_of_2G():
    system = build_example31(1)
    perms = [system.perm(2)]
    assert len(system.orbit_partition(scalar=2)) == union_find_orbits(system.size, perms) == 4


def test_orbit_extremes():
    system = build_example31(2)
    assert len(orbit_partition(system, [])) == system.size
    # the example is not transitive under G: the fiber sign splits points into two classes
    assert len(orbit_partition(system)) == union_find_orbits(system.size, system.generators)


SYSTEMS = [
    lambda: build_example31(1),
    lambda: build_example31(2),
    lambda: build_example41(2).extension,
    lambda: build_counterexample(CounterexampleParams(3, 1)),
    lambda: build_counterexample(CounterexampleParams(3, 2)),
    lambda: build_counterexample(CounterexampleParams(5, 1, corrected=False)),
    lambda: build_nonergodic(3, 2),
]


@pytest.mark.parametrize("make", SYSTEMS)
def test_action_relations(make):
    system = make()
    assert system.validate() is None
    assert len(system.orbit_partition()) == union_find_orbits(system.size, system.generators)
    for perm in system.generators:
        assert len(np.unique(perm)) == system.size


def test_validate_catches_noncommuting_generators():
    G = make_group([2, 2])
    X = make_group([3])
    swap = np.asarray([1, 0, 2])
    shift = np.asarray([0, 2, 1])
    assert FiniteSystem(G, X, [swap, shift]).validate()["kind"] == "commute"


def test_table_budget():
    system = build_example31(2)
    system.budget = 10
    with pytest.raises(ResourceLimit):
        system.table()
    # lazy composition still works
    assert system.perm(5).shape == (system.size,)


def test_table_matches_lazy_composition():
    system = build_counterexample(CounterexampleParams(3, 1))
    tab = system.table()
    for gi in range(system.G.order):
        lazy = FiniteSystem(system.G, system.X, system.generators).perm(gi)
        assert np.array_equal(tab[gi], lazy)


# -- the p-th root system -------------------------------------------------------------

def test_params():
    pr = CounterexampleParams(3, 1)
    assert (pr.modulus, pr.omega, pr.eta, pr.xi, pr.binom) == (9, 3, 1, 8, 3)
    assert pr.check_invariants() is None
    for p in (5, 7, 11):
        assert CounterexampleParams(p, 1).check_invariants() is None
    with pytest.raises(InvalidArgument):
        CounterexampleParams(2, 1)
    with pytest.raises(InvalidArgument):
        CounterexampleParams(9, 1)
    with pytest.raises(InvalidArgument):
        CounterexampleParams(3, 0)


def test_counterexample_sizes():
    system = build_counterexample(CounterexampleParams(3, 1))
    assert system.size == 27
    assert system.G.order == 9


@pytest.mark.parametrize("p,d,corrected", [(3, 1, True), (3, 2, False), (5, 1, True), (5, 1, False)])
def test_closed_form_oracle(p, d, corrected):
    params = CounterexampleParams(p, d, corrected)
    system = build_counterexample(params)
    rng = np.random.default_rng(p * 10 + d)
    for _ in range(60):
        g = rng.integers(p * p, size=d).tolist()
        t = rng.integers(p, size=d).tolist()
        u = int(rng.integers(p * p))
        t2, u2 = counterexample_closed_form(params, g, t, u)
        x = system.point(system.Z.index(t), u)
        y = int(system.apply(g, [x])[0])
        z, h = system.split([y])
        assert system.Z.decode(int(z[0])).tolist() == list(t2)
        assert int(h[0]) == u2


def test_generator_order_corrected():
    # T_{p e_1} is already the identity, so the generator has order p (not p^2)
    params = CounterexampleParams(3, 1)
    system = build_counterexample(params)
    ident = np.arange(system.size)
    assert not np.array_equal(system.perm(1), ident)
    assert np.array_equal(system.perm(3), ident)
    raw = build_counterexample(CounterexampleParams(3, 1, corrected=False))
    assert not np.array_equal(raw.perm(3), ident)
    assert np.array_equal(raw.perm(9), ident)


def test_uncorrected_third_power():
    params = CounterexampleParams(3, 1, corrected=False)
    for t in range(3):
        for u in range(9):
            t2, u2 = counterexample_closed_form(params, [3], [t], u)
            # the p-fold product over the orbit of t is eta^{C(3,2)} whatever t is
            assert t2 == (t,) and u2 == (u + 3) % 9


@pytest.mark.parametrize("p,d", [(3, 1), (3, 2), (5, 1), (7, 1), (5, 2)])
def test_pth_identity(p, d):
    params = CounterexampleParams(p, d)
    assert verify_pth_identity(build_counterexample(params)) is None
    w = verify_pth_identity(build_counterexample(CounterexampleParams(p, d, corrected=False)))
    assert w is not None
    assert w["discrepancy_eta_exponent"] == math.comb(p, 2) * sum(w["g"]) % (p * p)


def test_pth_identity_witness_values():
    w = verify_pth_identity(build_counterexample(CounterexampleParams(3, 1, corrected=False)))
    assert w["g"] == [1] and w["discrepancy_eta_exponent"] == 3
    w5 = verify_pth_identity(build_counterexample(CounterexampleParams(5, 2, corrected=False)))
    assert w5["g"] == [0, 1] and w5["discrepancy_eta_exponent"] == 10


def test_lifted_reading_fails():
    system = build_counterexample(CounterexampleParams(3, 1))
    w = verify_pth_identity(system, reading="lifted")
    assert w is not None
    with pytest.raises(InvalidArgument):
        verify_pth_identity(system, reading="other")
    with pytest.raises(InvalidArgument):
        verify_pth_identity(build_example31(1))


def test_counterexample_orbits_reported():
    system = build_counterexample(CounterexampleParams(3, 1))
    count = system.orbit_count()
    assert count == union_find_orbits(system.size, system.generators)
    assert count > 1


def test_nonergodic_fixes_base():
    system = build_nonergodic(5, 1)
    assert system.size == 25
    blocks = system.orbit_partition()
    # x = 0 is a block of fixed points; every other x gives one block of size p
    assert sum(len(b) == 1 for b in blocks) == 5
    assert sum(len(b) == 5 for b in blocks) == 4


def test_budget_guard(monkeypatch):
    monkeypatch.setenv("RECURLAB_BUDGET", "100")
    with pytest.raises(ResourceLimit):
        build_example31(3)


def test_system_from_spec():
    rot = system_from_spec({"kind": "rotation", "G": [8], "Z": [8]})
    assert rot.orbit_count() == 1
    skew = system_from_spec({"kind": "skew", "G": [4], "Z": [4], "H": [2], "sigma": [[0, 1, 0, 1]]})
    assert skew.size == 8
    assert system_from_spec({"kind": "counterexample", "p": 3, "d": 1}).size == 27
    assert system_from_spec({"kind": "example41", "d": 1, "factor": True}).size == 16
    with pytest.raises(InvalidArgument):
        system_from_spec({"kind": "nope"})

import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from recurlab.errors import InvalidArgument
from recurlab.groups import (Homomorphism, char_eval, element_add, element_neg, hom_validate, make_group,
                             scalar_action, subgroup_indices)


def test_orders():
    assert make_group([4, 2]).order == 8
    assert make_group([]).order == 1
    assert make_group([9]).moduli == (9,)


def test_bad_modulus():
    with pytest.raises(InvalidArgument):
        make_group([0])
    with pytest.raises(InvalidArgument):
        make_group([3, -1])


def test_element_arithmetic_examples():
    G = make_group([4, 2])
    assert element_add(G.element([3, 1]), G.element([1, 1])).coords == (0, 0)
    assert element_neg(G.element([1, 0])).coords == (3, 0)
    g = G.element([2, 1])
    assert g + G.zero == g


def test_scalar_examples():
    G = make_group([4, 4])
    assert scalar_action(2, G.element([1, 3])).coords == (2, 2)
    assert all(scalar_action(4, g).is_zero() for g in G.elements())
    assert scalar_action(3, make_group([9]).element([4])).coords == (3,)


def test_character_examples():
    G = make_group([4])
    assert char_eval(G.character([0]), G.element([3])) == 0
    chi = G.character([1])
    assert char_eval(chi, G.element([2])) == 2
    assert chi.value(G.element([2])) == pytest.approx(-1)


def test_group_mismatch():
    G, K = make_group([4]), make_group([2])
    with pytest.raises(InvalidArgument):
        G.element([1]) + K.element([1])
    with pytest.raises(InvalidArgument):
        char_eval(G.character([1]), K.element([1]))


def test_hom_validate_examples():
    Z4sq = make_group([4, 4])
    assert hom_validate(((1, 0), (0, 1)), Z4sq, Z4sq) is None
    assert hom_validate(((1,),), make_group([9]), make_group([3])) is None
    assert hom_validate(((1,),), make_group([2]), make_group([4])) == (0, (1,))
    with pytest.raises(InvalidArgument):
        hom_validate(((1, 0),), make_group([2]), make_group([4]))


SMALL = [[2], [5], [4, 2], [3, 3], [2, 2, 2], [8, 4], [9], [6, 4], [2, 4, 8], [16, 16, 2]]


@pytest.mark.parametrize("moduli", SMALL)
def test_group_laws_exhaustive(moduli):
    G = make_group(moduli)
    assert G.order <= 512
    coords = G.all_coords
    idx = np.arange(G.order)
    assert np.array_equal(G.encode(coords), idx)
    add = G.encode(coords[:, None, :] + coords[None, :, :])   # add[i, j] = i + j
    assert np.array_equal(add, add.T)
    # associativity: (i + j) + k == i + (j + k) for sampled triples
    rng = np.random.default_rng(len(moduli) * 31 + G.order)
    for i, j, k in rng.integers(G.order, size=(400, 3)):
        assert add[add[i, j], k] == add[i, add[j, k]]
    neg = G.encode(-coords)
    assert np.array_equal(neg[neg], idx)
    assert np.all(add[idx, neg] == 0)
    assert np.array_equal(add[:, 0], idx)


@pytest.mark.parametrize("moduli", SMALL)
def test_characters_are_homomorphisms(moduli):
    G = make_group(moduli)
    m = G.exponent
    table = G.pairing_table()
    coords = G.all_coords
    add = G.encode(coords[:, None, :] + coords[None, :, :])
    # table[chi, g]; chi(g + h) = chi(g) + chi(h)
    for chi in range(G.order):
        row = table[chi]
        assert np.array_equal(row[add], (row[:, None] + row[None, :]) % m)


@pytest.mark.parametrize("moduli", SMALL)
def test_duality_nondegenerate(moduli):
    G = make_group(moduli)
    table = G.pairing_table()
    assert table.shape == (G.order, G.order)
    killed = np.flatnonzero(~np.any(table != 0, axis=0))
    assert killed.tolist() == [0]
    # distinct characters give distinct rows
    assert len({row.tobytes() for row in table}) == G.order


@given(st.lists(st.integers(1, 12), min_size=1, max_size=3), st.data())
def test_char_eval_matches_pairing(moduli, data):
    G = make_group(moduli)
    c = [data.draw(st.integers(0, n - 1)) for n in moduli]
    g = [data.draw(st.integers(-50, 50)) for _ in moduli]
    chi, el = G.character(c), G.element(g)
    assert char_eval(chi, el) == G.pairing_table()[G.index(c), el.index]
    # value is a root of unity of the right order
    assert abs(chi.value(el)) == pytest.approx(1)


@given(st.lists(st.integers(1, 10), min_size=1, max_size=3), st.data())
def test_encode_decode_roundtrip(moduli, data):
    G = make_group(moduli)
    i = data.draw(st.integers(0, G.order - 1))
    assert G.index(G.decode(i).tolist()) == i


def test_homomorphism_compose_and_onto():
    Z9, Z3 = make_group([9]), make_group([3])
    red = Homomorphism(Z9, Z3, ((1,),))
    assert red.is_onto()
    triple = Homomorphism.scalar(Z9, 3)
    assert not triple.is_onto()
    comp = red.compose(triple)
    assert comp.index_map.tolist() == [0] * 9
    with pytest.raises(InvalidArgument):
        triple.compose(red)


def test_homomorphism_respects_addition():
    G, K = make_group([4, 6]), make_group([12, 2])
    h = Homomorphism.from_images(G, K, [[3, 1], [2, 0]])
    assert h.validate() is None
    for g, k in itertools.product(list(G.elements())[:12], list(G.elements())[-12:]):
        assert h(g + k) == h(g) + h(k)


def test_subgroup_indices():
    G = make_group([4, 4])
    two = subgroup_indices(G, [G.element([2, 0]), G.element([0, 2])])
    assert len(two) == 4
    assert len(subgroup_indices(G, [])) == 1
    assert len(subgroup_indices(G, [G.element([1, 1])])) == 4


def test_json_roundtrip():
    G = make_group([4, 9])
    assert type(G).from_json(G.to_json()) == G

"""Finite abelian groups ``Z/n_1 x ... x Z/n_r``, their elements, characters and homomorphisms.

Roots of unity never appear as floats here: a character value
``exp(2 pi i k / m)`` is carried as the residue ``k mod m`` where ``m`` is the
exponent (lcm of the moduli) of the group.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import InvalidArgument


def _lcm(values: Iterable[int]) -> int:
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out


@dataclass(frozen=True)
class FiniteAbelianGroup:
    moduli: tuple[int, ...]

    def __post_init__(self):
        mods = tuple(int(n) for n in self.moduli)
        for n in mods:
            if n < 1:
                raise InvalidArgument(f"modulus must be >= 1, got {n}")
        object.__setattr__(self, "moduli", mods)

    @property
    def rank(self) -> int:
        return len(self.moduli)

    @cached_property
    def order(self) -> int:
        return math.prod(self.moduli)

    @cached_property
    def exponent(self) -> int:
        return _lcm(self.moduli)

    @cached_property
    def strides(self) -> np.ndarray:
        # lexicographic order: last coordinate varies fastest
        out = np.ones(self.rank, dtype=np.int64)
        for i in range(self.rank - 2, -1, -1):
            out[i] = out[i + 1] * self.moduli[i + 1]
        return out

    @cached_property
    def moduli_array(self) -> np.ndarray:
        return np.asarray(self.moduli, dtype=np.int64)

    def __len__(self) -> int:
        return self.order

    def __repr__(self) -> str:
        if not self.moduli:
            return "FiniteAbelianGroup(trivial)"
        return "FiniteAbelianGroup(" + " x ".join(f"Z/{n}" for n in self.moduli) + ")"

    # -- indexing ---------------------------------------------------------
    def reduce(self, coords) -> np.ndarray:
        return np.mod(np.asarray(coords, dtype=np.int64), self.moduli_array)

    def index(self, coords: Sequence[int]) -> int:
        return int(np.dot(self.reduce(coords), self.strides)) if self.rank else 0

    def encode(self, coords: np.ndarray) -> np.ndarray:
        """Vectorised ``index`` for an ``(n, rank)`` coordinate array (reduced first)."""
        coords = np.asarray(coords, dtype=np.int64)
        if self.rank == 0:
            return np.zeros(coords.shape[:-1], dtype=np.int64)
        return np.mod(coords, self.moduli_array) @ self.strides

    def decode(self, index) -> np.ndarray:
        index = np.asarray(index, dtype=np.int64)
        return (index[..., None] // self.strides) % self.moduli_array

    @cached_property
    def all_coords(self) -> np.ndarray:
        if self.rank == 0:
            return np.zeros((1, 0), dtype=np.int64)
        grids = np.indices(self.moduli).reshape(self.rank, -1).T
        return np.ascontiguousarray(grids, dtype=np.int64)

    # -- elements ---------------------------------------------------------
    def element(self, coords: Sequence[int]) -> "Element":
        if len(coords) != self.rank:
            raise InvalidArgument(f"expected {self.rank} coordinates, got {len(coords)}")
        return Element(self, tuple(int(c) % n for c, n in zip(coords, self.moduli)))

    def element_at(self, index: int) -> "Element":
        return Element(self, tuple(int(c) for c in self.decode(index)))

    @property
    def zero(self) -> "Element":
        return Element(self, (0,) * self.rank)

    def unit(self, i: int) -> "Element":
        coords = [0] * self.rank
        coords[i] = 1
        return self.element(coords)

    def generators(self) -> list["Element"]:
        return [self.unit(i) for i in range(self.rank)]

    def elements(self) -> Iterator["Element"]:
        for coords in itertools.product(*(range(n) for n in self.moduli)):
            yield Element(self, coords)

    # -- dual -------------------------------------------------------------
    def character(self, coords: Sequence[int]) -> "Character":
        if len(coords) != self.rank:
            raise InvalidArgument(f"expected {self.rank} dual exponents, got {len(coords)}")
        return Character(self, tuple(int(c) % n for c, n in zip(coords, self.moduli)))

    def characters(self) -> Iterator["Character"]:
        for coords in itertools.product(*(range(n) for n in self.moduli)):
            yield Character(self, coords)

    @cached_property
    def character_weights(self) -> np.ndarray:
        # exponent / n_i scales coordinate i into Z/exponent
        return np.asarray([self.exponent // n for n in self.moduli], dtype=np.int64)

    def pairing_table(self) -> np.ndarray:
        """``table[c, g]`` = value of character ``c`` at element ``g`` as a residue mod exponent."""
        c = self.all_coords * self.character_weights
        return (c @ self.all_coords.T) % self.exponent

    def to_json(self) -> dict:
        return {"moduli": list(self.moduli)}

    @classmethod
    def from_json(cls, data: dict) -> "FiniteAbelianGroup":
        return cls(tuple(data["moduli"]))

    def product(self, other: "FiniteAbelianGroup") -> "FiniteAbelianGroup":
        return FiniteAbelianGroup(self.moduli + other.moduli)


def make_group(moduli: Sequence[int]) -> FiniteAbelianGroup:
    return FiniteAbelianGroup(tuple(moduli))


@dataclass(frozen=True)
class Element:
    group: FiniteAbelianGroup
    coords: tuple[int, ...]

    def _check(self, other: "Element"):
        if not isinstance(other, Element) or other.group != self.group:
            raise InvalidArgument("elements belong to different groups")

    def __add__(self, other: "Element") -> "Element":
        self._check(other)
        return Element(self.group, tuple((a + b) % n for a, b, n in zip(self.coords, other.coords, self.group.moduli)))

    def __neg__(self) -> "Element":
        return Element(self.group, tuple((-a) % n for a, n in zip(self.coords, self.group.moduli)))

    def __sub__(self, other: "Element") -> "Element":
        return self + (-other)

    def __rmul__(self, c: int) -> "Element":
        return scalar_action(c, self)

    def is_zero(self) -> bool:
        return not any(self.coords)

    @property
    def index(self) -> int:
        return self.group.index(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __repr__(self) -> str:
        return f"Element{self.coords}"


@dataclass(frozen=True)
class Character:
    group: FiniteAbelianGroup
    coords: tuple[int, ...]

    @property
    def modulus(self) -> int:
        return self.group.exponent

    def __call__(self, g: Element) -> int:
        return char_eval(self, g)

    def evaluate(self, coords: np.ndarray) -> np.ndarray:
        """Residues mod ``modulus`` for an ``(n, rank)`` coordinate array."""
        w = np.asarray(self.coords, dtype=np.int64) * self.group.character_weights
        return (np.asarray(coords, dtype=np.int64) @ w) % self.modulus

    def value(self, g: Element) -> complex:
        return complex(np.exp(2j * np.pi * self(g) / self.modulus))

    def __add__(self, other: "Character") -> "Character":
        if other.group != self.group:
            raise InvalidArgument("characters of different groups")
        return self.group.character([a + b for a, b in zip(self.coords, other.coords)])

    def __neg__(self) -> "Character":
        return self.group.character([-a for a in self.coords])

    def is_trivial(self) -> bool:
        return not any(self.coords)

    def __repr__(self) -> str:
        return f"Character{self.coords}"


def element_add(g: Element, h: Element) -> Element:
    return g + h


def element_neg(g: Element) -> Element:
    return -g


def scalar_action(c: int, g: Element) -> Element:
    return Element(g.group, tuple((c * a) % n for a, n in zip(g.coords, g.group.moduli)))


def char_eval(chi: Character, g: Element) -> int:
    if chi.group != g.group:
        raise InvalidArgument("character and element belong to different groups")
    G = chi.group
    m = G.exponent
    return sum(c * x * (m // n) for c, x, n in zip(chi.coords, g.coords, G.moduli)) % m


@dataclass(frozen=True)
class Homomorphism:
    """Integer matrix on generators; column ``j`` is the image of ``e_j``."""

    source: FiniteAbelianGroup
    target: FiniteAbelianGroup
    matrix: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in row) for row in self.matrix)
        if len(rows) != self.target.rank or any(len(r) != self.source.rank for r in rows):
            raise InvalidArgument(
                f"matrix must be {self.target.rank}x{self.source.rank} for {self.source} -> {self.target}"
            )
        object.__setattr__(self, "matrix", rows)

    @classmethod
    def from_images(cls, source, target, images: Sequence[Sequence[int]]) -> "Homomorphism":
        """Build from the list of images of the source generators."""
        cols = [list(im) for im in images]
        rows = tuple(tuple(cols[j][i] for j in range(source.rank)) for i in range(target.rank))
        return cls(source, target, rows)

    @classmethod
    def scalar(cls, group: FiniteAbelianGroup, c: int) -> "Homomorphism":
        r = group.rank
        return cls(group, group, tuple(tuple(c if i == j else 0 for j in range(r)) for i in range(r)))

    @classmethod
    def identity(cls, group: FiniteAbelianGroup) -> "Homomorphism":
        return cls.scalar(group, 1)

    @classmethod
    def zero(cls, source, target) -> "Homomorphism":
        return cls(source, target, tuple((0,) * source.rank for _ in range(target.rank)))

    @cached_property
    def array(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=np.int64).reshape(self.target.rank, self.source.rank)

    def image_of_generator(self, j: int) -> Element:
        return self.target.element([row[j] for row in self.matrix])

    def validate(self):
        """Return ``None`` when well defined, else ``(j, image)`` with ``n_j * image != 0``."""
        return hom_validate(self.matrix, self.source, self.target)

    def apply_coords(self, coords: np.ndarray) -> np.ndarray:
        out = np.asarray(coords, dtype=np.int64) @ self.array.T
        return np.mod(out, self.target.moduli_array) if self.target.rank else out

    def __call__(self, g: Element) -> Element:
        if g.group != self.source:
            raise InvalidArgument("element not in the source group")
        return self.target.element(self.apply_coords(np.asarray([g.coords]))[0].tolist())

    @cached_property
    def index_map(self) -> np.ndarray:
        """``index_map[i]`` = index in the target of the image of source element ``i``."""
        return self.target.encode(self.apply_coords(self.source.all_coords))

    def compose(self, inner: "Homomorphism") -> "Homomorphism":
        """``self o inner``."""
        if inner.target != self.source:
            raise InvalidArgument("cannot compose: intermediate groups differ")
        prod = self.array @ inner.array
        return Homomorphism(inner.source, self.target, tuple(map(tuple, prod.tolist())))

    def image_indices(self) -> np.ndarray:
        return np.unique(self.index_map)

    def is_onto(self) -> bool:
        return len(self.image_indices()) == self.target.order


def hom_validate(matrix, source: FiniteAbelianGroup, target: FiniteAbelianGroup):
    rows = [list(r) for r in matrix]
    if len(rows) != target.rank or any(len(r) != source.rank for r in rows):
        raise InvalidArgument("matrix dimensions do not match generator counts")
    for j, n_j in enumerate(source.moduli):
        image = [rows[i][j] for i in range(target.rank)]
        if any((n_j * v) % m for v, m in zip(image, target.moduli)):
            return (j, tuple(v % m for v, m in zip(image, target.moduli)))
    return None


def subgroup_indices(G: FiniteAbelianGroup, generators: Sequence[Element]) -> np.ndarray:
    """Sorted indices of the subgroup of ``G`` generated by ``generators``."""
    for g in generators:
        if g.group != G:
            raise InvalidArgument("subgroup generator not in the acting group")
    members = np.zeros(G.order, dtype=bool)
    members[0] = True
    gens = [np.asarray(g.coords, dtype=np.int64) for g in generators]
    coords = np.zeros((1, G.rank), dtype=np.int64)
    while len(coords):
        new = []
        for step in gens:
            nxt = G.encode(coords + step)
            fresh = nxt[~members[nxt]]
            fresh = np.unique(fresh)
            members[fresh] = True
            if len(fresh):
                new.append(G.decode(fresh))
        coords = np.concatenate(new) if new else np.zeros((0, G.rank), dtype=np.int64)
    return np.flatnonzero(members)


def scalar_subgroup_generators(G: FiniteAbelianGroup, c: int) -> list[Element]:
    return [scalar_action(c, e) for e in G.generators()]

"""Averages, densities, eigenbases and seminorms on finite systems.

Functions on ``X`` are either exact (a phase histogram over ``zeta_m`` per
point with one common denominator) or complex floats. Exact inputs stay exact
through products, compositions and group averages.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import cyclo
from .errors import InvalidArgument, ResourceLimit
from .groups import Character, Element, FiniteAbelianGroup, Homomorphism, subgroup_indices
from .systems import FiniteSystem, orbit_partition

SEMINORM_TOL = 1e-9


class FunctionOnX:
    """A function on the points of a system.

    Exact kind: ``hist[x, k]`` integer weights of ``zeta_m**k`` divided by ``den``.
    Complex kind: a ``complex128`` value table.
    """

    def __init__(self, system: FiniteSystem, *, hist=None, modulus: int = 1, den: int = 1, values=None):
        self.system = system
        if (hist is None) == (values is None):
            raise InvalidArgument("give exactly one of hist or values")
        if hist is not None:
            hist = np.asarray(hist, dtype=np.int64)
            if hist.shape != (system.size, modulus):
                raise InvalidArgument(f"histogram must have shape {(system.size, modulus)}")
            if den < 1:
                raise InvalidArgument("denominator must be positive")
            self.kind = "exact"
            self.hist = hist
            self.modulus = int(modulus)
            self.den = int(den)
            self.values = None
        else:
            values = np.asarray(values, dtype=np.complex128)
            if values.shape != (system.size,):
                raise InvalidArgument(f"value table must have length {system.size}")
            self.kind = "complex"
            self.values = values
            self.hist = None
            self.modulus = 1
            self.den = 1

    # -- constructors -------------------------------------------------------
    @classmethod
    def from_roots(cls, system, phases, modulus: int, weights=None, den: int = 1) -> "FunctionOnX":
        """``weights[x] * zeta_modulus**phases[x] / den``."""
        n = system.size
        phases = np.mod(np.broadcast_to(np.asarray(phases, dtype=np.int64), (n,)), modulus)
        w = np.ones(n, dtype=np.int64) if weights is None else np.broadcast_to(np.asarray(weights, dtype=np.int64), (n,))
        hist = np.zeros((n, modulus), dtype=np.int64)
        hist[np.arange(n), phases] = w
        return cls(system, hist=hist, modulus=modulus, den=den)

    @classmethod
    def constant(cls, system, value: int = 1) -> "FunctionOnX":
        return cls.from_roots(system, 0, 1, weights=value)

    @classmethod
    def indicator(cls, system, points) -> "FunctionOnX":
        return cls.from_roots(system, 0, 1, weights=point_mask(system, points).astype(np.int64))

    @classmethod
    def from_complex(cls, system, values) -> "FunctionOnX":
        return cls(system, values=values)

    @classmethod
    def coordinate(cls, system, i: int, power: int = 1) -> "FunctionOnX":
        """``x -> zeta_{n_i} ** (power * x_i)`` for coordinate ``i`` of the point set."""
        n = system.X.moduli[i]
        return cls.from_roots(system, power * system.X.all_coords[:, i], n)

    @classmethod
    def character(cls, system, coords: Sequence[int]) -> "FunctionOnX":
        """A character of the point set viewed as a group."""
        chi = system.X.character(list(coords))
        return cls.from_roots(system, chi.evaluate(system.X.all_coords), chi.modulus)

    # -- conversion ---------------------------------------------------------
    def to_complex(self) -> np.ndarray:
        if self.kind == "complex":
            return self.values.copy()
        return cyclo.to_complex(self.hist, self.modulus) / self.den

    def as_complex(self) -> "FunctionOnX":
        return FunctionOnX(self.system, values=self.to_complex())

    def reduced(self) -> tuple[np.ndarray, int]:
        """Canonical coordinates over ``Q(zeta_m)`` and the denominator, after removing common factors."""
        if self.kind != "exact":
            raise InvalidArgument("only exact functions have canonical coordinates")
        coeffs = cyclo.reduce(self.hist, self.modulus)
        g = math.gcd(int(np.gcd.reduce(coeffs.ravel())) if coeffs.size else 0, self.den)
        if g == 0:
            return coeffs, 1
        return coeffs // g, self.den // g

    def is_zero(self, tol: float = 0.0) -> bool:
        if self.kind == "exact":
            return not np.any(cyclo.reduce(self.hist, self.modulus))
        return bool(np.max(np.abs(self.values), initial=0.0) <= tol)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.to_complex()), initial=0.0))

    def lifted(self, M: int) -> "FunctionOnX":
        return FunctionOnX(self.system, hist=cyclo.lift(self.hist, self.modulus, M), modulus=M, den=self.den)

    def equals(self, other: "FunctionOnX", tol: float = 1e-12) -> bool:
        if self.kind == other.kind == "exact":
            M = cyclo.common_modulus(self.modulus, other.modulus)
            a = cyclo.reduce(cyclo.lift(self.hist, self.modulus, M) * other.den, M)
            b = cyclo.reduce(cyclo.lift(other.hist, other.modulus, M) * self.den, M)
            return bool(np.array_equal(a, b))
        return bool(np.max(np.abs(self.to_complex() - other.to_complex()), initial=0.0) <= tol)

    def monomial(self):
        """``(weights, phases)`` when every point carries at most one phase, else ``None``."""
        if self.kind != "exact":
            return None
        nz = self.hist != 0
        if np.any(nz.sum(axis=1) > 1):
            return None
        phases = np.argmax(nz, axis=1)
        return self.hist[np.arange(len(phases)), phases], phases

    # -- algebra ------------------------------------------------------------
    def compose(self, perm: np.ndarray) -> "FunctionOnX":
        """``x -> f(perm[x])``."""
        if self.kind == "exact":
            return FunctionOnX(self.system, hist=self.hist[perm], modulus=self.modulus, den=self.den)
        return FunctionOnX(self.system, values=self.values[perm])

    def shift(self, g) -> "FunctionOnX":
        """``T_g f = f o T_g``."""
        return self.compose(self.system.perm(g))

    def conj(self) -> "FunctionOnX":
        if self.kind == "exact":
            return FunctionOnX(self.system, hist=cyclo.conj(self.hist, self.modulus), modulus=self.modulus, den=self.den)
        return FunctionOnX(self.system, values=np.conj(self.values))

    def __mul__(self, other: "FunctionOnX") -> "FunctionOnX":
        if self.kind == other.kind == "exact":
            M = cyclo.common_modulus(self.modulus, other.modulus)
            a = cyclo.lift(self.hist, self.modulus, M)
            b = cyclo.lift(other.hist, other.modulus, M)
            return FunctionOnX(self.system, hist=cyclo.cyclic_mul(a, b, M), modulus=M, den=self.den * other.den)
        return FunctionOnX(self.system, values=self.to_complex() * other.to_complex())

    def __add__(self, other: "FunctionOnX") -> "FunctionOnX":
        if self.kind == other.kind == "exact":
            M = cyclo.common_modulus(self.modulus, other.modulus)
            hist = (cyclo.lift(self.hist, self.modulus, M) * other.den
                    + cyclo.lift(other.hist, other.modulus, M) * self.den)
            return FunctionOnX(self.system, hist=hist, modulus=M, den=self.den * other.den)
        return FunctionOnX(self.system, values=self.to_complex() + other.to_complex())

    def __neg__(self) -> "FunctionOnX":
        if self.kind == "exact":
            return FunctionOnX(self.system, hist=-self.hist, modulus=self.modulus, den=self.den)
        return FunctionOnX(self.system, values=-self.values)

    def __sub__(self, other: "FunctionOnX") -> "FunctionOnX":
        return self + (-other)

    def mean(self) -> complex:
        return complex(np.mean(self.to_complex()))

    def to_json(self) -> dict:
        if self.kind == "exact":
            return {"kind": "exact", "modulus": self.modulus, "den": self.den, "hist": self.hist.tolist()}
        return {"kind": "complex", "re": self.values.real.tolist(), "im": self.values.imag.tolist()}

    @classmethod
    def from_json(cls, system, data: dict) -> "FunctionOnX":
        if data["kind"] == "exact":
            return cls(system, hist=np.asarray(data["hist"]), modulus=data["modulus"], den=data["den"])
        return cls(system, values=np.asarray(data["re"]) + 1j * np.asarray(data["im"]))


def point_mask(system: FiniteSystem, points) -> np.ndarray:
    arr = np.asarray(points)
    if arr.dtype == bool:
        if arr.shape != (system.size,):
            raise InvalidArgument("boolean mask has the wrong length")
        return arr.copy()
    mask = np.zeros(system.size, dtype=bool)
    idx = arr.astype(np.int64).ravel()
    if idx.size and (idx.min() < 0 or idx.max() >= system.size):
        raise InvalidArgument("point index out of range")
    mask[idx] = True
    return mask


def as_hom(G: FiniteAbelianGroup, h) -> Homomorphism:
    if isinstance(h, Homomorphism):
        if h.source != G or h.target != G:
            raise InvalidArgument("homomorphism must map the acting group to itself")
        return h
    return Homomorphism.scalar(G, int(h))


def _pattern_label(phi, psi):
    def one(h):
        return int(h) if not isinstance(h, Homomorphism) else [list(r) for r in h.matrix]
    return [one(phi), one(psi)]


# -- densities -----------------------------------------------------------------

def intersection_density(system: FiniteSystem, A, phi, psi, g) -> Fraction:
    """``mu(A & T_{phi g}^{-1} A & T_{psi g}^{-1} A)`` as an exact fraction."""
    mask = point_mask(system, A)
    if not isinstance(g, Element):
        g = system.G.element(list(g))
    a = as_hom(system.G, phi)(g)
    b = as_hom(system.G, psi)(g)
    hit = mask & mask[system.perm(a)] & mask[system.perm(b)]
    return Fraction(int(hit.sum()), system.size)


@dataclass
class DensityReport:
    group: FiniteAbelianGroup
    counts: np.ndarray
    den: int
    set_size: int
    pattern: list
    degenerate: list[int] = field(default_factory=list)
    system_name: str = ""

    @property
    def mu(self) -> Fraction:
        return Fraction(self.set_size, self.den)

    def density(self, g) -> Fraction:
        idx = g if isinstance(g, (int, np.integer)) else self.group.index(list(g))
        return Fraction(int(self.counts[idx]), self.den)

    def densities(self) -> dict[tuple, Fraction]:
        return {tuple(self.group.decode(i).tolist()): Fraction(int(c), self.den) for i, c in enumerate(self.counts)}

    def min_nonzero(self) -> Fraction | None:
        if len(self.counts) < 2:
            return None
        return Fraction(int(self.counts[1:].min()), self.den)

    def above(self, eps) -> np.ndarray:
        """Indices ``g`` with density strictly above ``mu^3 - eps`` (exact comparison)."""
        thr = self.mu ** 3 - Fraction(eps)
        # counts / den > thr  <=>  counts * thr.den > thr.num * den
        return np.flatnonzero(self.counts * thr.denominator > thr.numerator * self.den)

    def outside_degenerate(self) -> np.ndarray:
        keep = np.ones(len(self.counts), dtype=bool)
        keep[self.degenerate] = False
        return np.flatnonzero(keep)

    def summary(self, eps=0) -> dict:
        low = self.min_nonzero()
        return {
            "mu": str(self.mu),
            "min_nonzero_g": None if low is None else str(low),
            "count_above": int(len(self.above(eps))),
            "eps": str(Fraction(eps)),
            "degenerate": [":".join(map(str, self.group.decode(i).tolist())) for i in self.degenerate],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["g", "num", "den"])
        for i, c in enumerate(self.counts):
            fr = Fraction(int(c), self.den)
            w.writerow([":".join(map(str, self.group.decode(i).tolist())), fr.numerator, fr.denominator])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "system": self.system_name,
            "group": self.group.to_json(),
            "pattern": self.pattern,
            "set_size": self.set_size,
            "points": self.den,
            "counts": [int(c) for c in self.counts],
            "summary": self.summary(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "DensityReport":
        G = FiniteAbelianGroup.from_json(data["group"])
        degenerate = [G.index([int(v) for v in s.split(":")]) if s else 0 for s in data["summary"]["degenerate"]]
        return cls(G, np.asarray(data["counts"], dtype=np.int64), data["points"], data["set_size"],
                   data["pattern"], degenerate, data.get("system", ""))


def density_scan(system: FiniteSystem, A, phi, psi) -> DensityReport:
    """Exact triple-intersection counts for every ``g`` in the acting group.

    ``degenerate`` lists the ``g`` for which both ``T_{phi g}`` and ``T_{psi g}``
    are the identity map, so the density is forced to equal ``mu(A)``.
    """
    G = system.G
    mask = point_mask(system, A)
    hp, hq = as_hom(G, phi), as_hom(G, psi)
    img_a, img_b = hp.index_map, hq.index_map
    ident = np.arange(system.size)
    counts = np.empty(G.order, dtype=np.int64)
    degenerate = []
    for gi in range(G.order):
        pa = system.perm(int(img_a[gi]))
        pb = system.perm(int(img_b[gi]))
        counts[gi] = int(np.count_nonzero(mask & mask[pa] & mask[pb]))
        if np.array_equal(pa, ident) and np.array_equal(pb, ident):
            degenerate.append(gi)
    return DensityReport(G, counts, system.size, int(mask.sum()), _pattern_label(phi, psi), degenerate, system.name)


# -- averages --------------------------------------------------------------------

def accumulate_average(system: FiniteSystem, functions: Sequence[FunctionOnX], point_maps, count: int) -> FunctionOnX:
    """``x -> count^{-1} sum over terms of prod_i f_i(p_i[x])``.

    ``point_maps`` yields, per term, one index array ``p_i`` per function.
    Exact when every input is exact; otherwise computed in complex floats.
    """
    for f in functions:
        if f.system is not system:
            raise InvalidArgument("all functions must live on the given system")
    n = system.size
    if all(f.kind == "exact" for f in functions):
        M = cyclo.common_modulus(*(f.modulus for f in functions))
        den = math.prod(f.den for f in functions) * count
        monos = [f.monomial() for f in functions]
        acc = np.zeros((n, M), dtype=np.int64)
        if all(mono is not None for mono in monos):
            scaled = [(w, ph * (M // f.modulus)) for (w, ph), f in zip(monos, functions)]
            flat = acc.reshape(-1)
            base = np.arange(n) * M
            for maps in point_maps:
                weight = np.ones(n, dtype=np.int64)
                phase = np.zeros(n, dtype=np.int64)
                for (w, ph), pts in zip(scaled, maps):
                    weight *= w[pts]
                    phase += ph[pts]
                np.add.at(flat, base + phase % M, weight)
        else:
            lifted = [cyclo.lift(f.hist, f.modulus, M) for f in functions]
            for maps in point_maps:
                prod = None
                for hist, pts in zip(lifted, maps):
                    term = hist[pts]
                    prod = term if prod is None else cyclo.cyclic_mul(prod, term, M)
                acc += prod
        return FunctionOnX(system, hist=acc, modulus=M, den=den)
    vals = [f.to_complex() for f in functions]
    acc = np.zeros(n, dtype=np.complex128)
    for maps in point_maps:
        term = np.ones(n, dtype=np.complex128)
        for v, pts in zip(vals, maps):
            term *= v[pts]
        acc += term
    return FunctionOnX(system, values=acc / count)


def uc_average_product(system: FiniteSystem, functions: Sequence[FunctionOnX], homs: Sequence) -> FunctionOnX:
    """``x -> |G|^{-1} sum_g prod_i f_i(T_{phi_i g} x)``, the full-group average."""
    if len(functions) != len(homs) or not functions:
        raise InvalidArgument("need one homomorphism per function")
    G = system.G
    index_maps = [as_hom(G, h).index_map for h in homs]

    def maps():
        for gi in range(G.order):
            yield [system.perm(int(mp[gi])) for mp in index_maps]

    return accumulate_average(system, functions, maps(), G.order)


def _subgroup_spec(system: FiniteSystem, H):
    """Normalise a subgroup spec into (generator list or None, scalar or None)."""
    if H is None:
        return None, None
    if isinstance(H, (int, np.integer)):
        return None, int(H)
    if isinstance(H, dict) and "scalar" in H:
        return None, int(H["scalar"])
    return list(H), None


def subgroup_members(system: FiniteSystem, H) -> np.ndarray:
    """Indices in ``G`` of the subgroup described by ``H``."""
    G = system.G
    gens, scalar = _subgroup_spec(system, H)
    if gens is None and scalar is None:
        return np.arange(G.order)
    if scalar is not None:
        return np.unique(Homomorphism.scalar(G, scalar).index_map)
    elems = [g if isinstance(g, Element) else G.element(list(g)) for g in gens]
    return subgroup_indices(G, elems)


def _orbits(system, H):
    gens, scalar = _subgroup_spec(system, H)
    return orbit_partition(system, gens, scalar=scalar)


def invariant_expectation(system: FiniteSystem, f: FunctionOnX, H=None) -> FunctionOnX:
    """Conditional expectation onto ``H``-invariant functions: average over each ``H``-orbit."""
    blocks = _orbits(system, H)
    if f.kind == "exact":
        L = 1
        for b in blocks:
            L = L * len(b) // math.gcd(L, len(b))
        out = np.empty_like(f.hist)
        for b in blocks:
            out[b] = f.hist[b].sum(axis=0) * (L // len(b))
        return FunctionOnX(system, hist=out, modulus=f.modulus, den=f.den * L)
    vals = np.empty(system.size, dtype=np.complex128)
    for b in blocks:
        vals[b] = f.values[b].mean()
    return FunctionOnX(system, values=vals)


# -- eigenfunctions ------------------------------------------------------------------

@dataclass
class EigenData:
    support: np.ndarray
    character: Character
    function: FunctionOnX
    subgroup: np.ndarray

    def eigenvalue_on(self, h_index: int) -> int:
        G = self.character.group
        return int(self.character.evaluate(G.decode(h_index)[None, :])[0])


def eigenbasis(system: FiniteSystem, H=None) -> list[EigenData]:
    """Orbit-by-orbit eigenbasis for the action of the subgroup ``H``.

    On an orbit ``O = H x0`` with stabiliser ``S`` the basis consists of
    ``T_h x0 -> chi(h)`` for the distinct restrictions to ``H`` of characters of
    ``G`` that vanish on ``S``.
    """
    G = system.G
    members = subgroup_members(system, H)
    h_coords = G.decode(members)
    dual_coords = G.all_coords
    m = G.exponent
    chi_on_h = (dual_coords * G.character_weights) @ h_coords.T % m
    tab = np.stack([system.perm(int(h)) for h in members])  # (|H|, |X|)
    out = []
    seen = np.zeros(system.size, dtype=bool)
    for x0 in range(system.size):
        if seen[x0]:
            continue
        images = tab[:, x0]
        support = np.unique(images)
        seen[support] = True
        stab = images == x0
        ok = ~np.any(chi_on_h[:, stab] != 0, axis=1)
        _, first = np.unique(chi_on_h[ok], axis=0, return_index=True)
        candidates = np.flatnonzero(ok)[np.sort(first)]
        # first h reaching each support point
        _, pick = np.unique(images, return_index=True)
        reach = members[pick]
        for ci in candidates:
            chi = G.character(dual_coords[ci].tolist())
            phases = np.zeros(system.size, dtype=np.int64)
            weights = np.zeros(system.size, dtype=np.int64)
            phases[support] = chi.evaluate(G.decode(reach))
            weights[support] = 1
            fn = FunctionOnX.from_roots(system, phases, m, weights=weights)
            out.append(EigenData(support, chi, fn, members))
    return out


def is_eigenfunction(system: FiniteSystem, data: EigenData) -> bool:
    """Exact check of ``T_h f = chi(h) f`` for every generator of the subgroup."""
    f = data.function
    m = data.character.modulus
    for h in data.subgroup:
        lhs = f.shift(int(h))
        val = data.eigenvalue_on(int(h))
        rhs = FunctionOnX(system, hist=np.roll(f.lifted(m).hist, val, axis=1), modulus=m, den=f.den)
        if not lhs.equals(rhs):
            return False
    return True


def eigenvalue_extends(system: FiniteSystem, eigen: EigenData, G_spec=None) -> EigenData | None:
    """Find a ``G``-eigenfunction whose eigenvalue restricts to ``eigen``'s on its subgroup.

    The search runs over the orbit-wise ``G``-eigenbasis and only considers
    eigenfunctions whose support meets ``eigen.support``.
    """
    G = system.G
    target = eigen.character.evaluate(G.decode(eigen.subgroup))
    support = set(eigen.support.tolist())
    for cand in eigenbasis(system, G_spec):
        if not support.intersection(cand.support.tolist()):
            continue
        if np.array_equal(cand.character.evaluate(G.decode(eigen.subgroup)), target):
            return cand
    return None


def delta(f: FunctionOnX, g) -> FunctionOnX:
    """``x -> f(T_g x) * conj(f(x))``."""
    return f.shift(g) * f.conj()


# -- seminorms -------------------------------------------------------------------------

def _u1_power(values: np.ndarray, blocks) -> float:
    # ||E(f | I_H)||_2^2
    total = 0.0
    for b in blocks:
        s = values[b].sum()
        total += (s.real ** 2 + s.imag ** 2) / len(b)
    return total / len(values)


def ghk_seminorm(system: FiniteSystem, f: FunctionOnX, H=None, k: int = 1) -> float:
    """Gowers-Host-Kra seminorm of order ``k`` (1 to 3) relative to the subgroup ``H``.

    Uses ``||f||_{U^k}^{2^k} = avg_h ||Delta_h f||_{U^{k-1}}^{2^{k-1}}`` with averages over ``H``.
    """
    if k not in (1, 2, 3):
        raise InvalidArgument("k must be 1, 2 or 3")
    members = subgroup_members(system, H)
    cost = len(members) ** (k - 1) * system.size
    if cost > system.budget:
        raise ResourceLimit(f"seminorm needs {cost} evaluations, budget is {system.budget}")
    blocks = _orbits(system, H)
    perms = [system.perm(int(h)) for h in members]
    vals = f.to_complex()

    def power(v: np.ndarray, level: int) -> float:
        if level == 1:
            return _u1_power(v, blocks)
        acc = 0.0
        cv = np.conj(v)
        for perm in perms:
            acc += power(v[perm] * cv, level - 1)
        return acc / len(perms)

    p = max(power(vals, k), 0.0)
    return p ** (1.0 / 2 ** k)


def kronecker_projection(system: FiniteSystem, f: FunctionOnX, H=None) -> FunctionOnX:
    """Orthogonal projection of ``f`` onto the span of ``eigenbasis(system, H)`` (complex values)."""
    vals = f.to_complex()
    out = np.zeros(system.size, dtype=np.complex128)
    for e in eigenbasis(system, H):
        phi = e.function.to_complex()
        norm = np.vdot(phi, phi)
        out += (np.vdot(phi, vals) / norm) * phi
    return FunctionOnX(system, values=out)


def average_product_json(fn: FunctionOnX) -> dict:
    if fn.kind == "exact":
        coeffs, den = fn.reduced()
        return {"kind": "exact", "modulus": fn.modulus, "den": den, "coefficients": coeffs.tolist(),
                "is_zero": fn.is_zero(), "sup_norm": fn.sup_norm()}
    v = fn.to_complex()
    return {"kind": "complex", "sup_norm": fn.sup_norm(), "re": v.real.tolist(), "im": v.imag.tolist()}

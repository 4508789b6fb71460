"""Finite measure-preserving systems: rotations, skew products and the worked examples.

Every action is stored as one permutation of the point set per generator of
the acting group. Composite maps ``T_g`` are built lazily and cached; the full
``|G| x |X|`` table is only materialised inside the configured budget.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
import sympy
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import InvalidArgument, ResourceLimit
from .groups import Element, FiniteAbelianGroup, Homomorphism, make_group

DEFAULT_BUDGET = 1 << 24


def table_budget() -> int:
    raw = os.environ.get("RECURLAB_BUDGET")
    if raw is None:
        return DEFAULT_BUDGET
    try:
        value = int(raw)
    except ValueError as exc:
        raise InvalidArgument(f"RECURLAB_BUDGET must be an integer, got {raw!r}") from exc
    if value < 1:
        raise InvalidArgument("RECURLAB_BUDGET must be positive")
    return value


def perm_power(perm: np.ndarray, k: int) -> np.ndarray:
    out = np.arange(len(perm), dtype=perm.dtype)
    base = perm
    while k:
        if k & 1:
            out = base[out]
        base = base[base]
        k >>= 1
    return out


class FiniteSystem:
    """A finite abelian group ``G`` acting on the points of ``X`` (uniform measure)."""

    def __init__(self, G: FiniteAbelianGroup, X: FiniteAbelianGroup, generators: Sequence[np.ndarray],
                 name: str = "system", meta: dict | None = None, budget: int | None = None):
        if len(generators) != G.rank:
            raise InvalidArgument(f"need {G.rank} generator maps, got {len(generators)}")
        gens = []
        for perm in generators:
            perm = np.asarray(perm, dtype=np.int64)
            if perm.shape != (X.order,):
                raise InvalidArgument("generator map has the wrong length")
            perm.setflags(write=False)
            gens.append(perm)
        self.G = G
        self.X = X
        self.generators = gens
        self.name = name
        self.meta = dict(meta or {})
        self.budget = table_budget() if budget is None else budget
        self._cache: dict[int, np.ndarray] = {}
        self._table: np.ndarray | None = None

    @property
    def size(self) -> int:
        return self.X.order

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name}, |G|={self.G.order}, |X|={self.X.order})"

    # -- action -----------------------------------------------------------
    def _g_index(self, g) -> int:
        if isinstance(g, Element):
            if g.group != self.G:
                raise InvalidArgument("element is not in the acting group")
            return g.index
        if isinstance(g, (int, np.integer)):
            return int(g)
        return self.G.index(list(g))

    def perm(self, g) -> np.ndarray:
        """The permutation ``x -> T_g x`` as an index array."""
        idx = self._g_index(g)
        if self._table is not None:
            return self._table[idx]
        hit = self._cache.get(idx)
        if hit is not None:
            return hit
        coords = self.G.decode(idx)
        out = np.arange(self.size, dtype=np.int64)
        for j, k in enumerate(coords):
            if k:
                out = perm_power(self.generators[j], int(k))[out]
        out.setflags(write=False)
        if len(self._cache) < 4096:
            self._cache[idx] = out
        return out

    def apply(self, g, points) -> np.ndarray:
        return self.perm(g)[np.asarray(points, dtype=np.int64)]

    def table(self) -> np.ndarray:
        """Full action table ``table[g, x] = T_g x`` (rows in lexicographic order of ``G``)."""
        if self._table is not None:
            return self._table
        cells = self.G.order * self.size
        if cells > self.budget:
            raise ResourceLimit(f"action table needs {cells} entries, budget is {self.budget}")
        tab = np.arange(self.size, dtype=np.int64)[None, :]
        for j, n in enumerate(self.G.moduli):
            powers = np.empty((n, self.size), dtype=np.int64)
            powers[0] = np.arange(self.size)
            for k in range(1, n):
                powers[k] = self.generators[j][powers[k - 1]]
            # T_{(g', k)} = gen_j^k o T_{g'}
            tab = powers[:, tab].transpose(1, 0, 2).reshape(-1, self.size)
        tab.setflags(write=False)
        self._table = tab
        return tab

    def has_table_budget(self) -> bool:
        return self.G.order * self.size <= self.budget

    def iter_perms(self):
        """Yield ``(g_index, perm)`` for every ``g`` in lexicographic order."""
        if self.has_table_budget():
            tab = self.table()
            for i in range(self.G.order):
                yield i, tab[i]
        else:
            for i in range(self.G.order):
                yield i, self.perm(i)

    # -- checks -----------------------------------------------------------
    def validate(self):
        """``None`` if the generator maps define a ``G``-action, else a witness dict."""
        ident = np.arange(self.size)
        for j, perm in enumerate(self.generators):
            if not np.array_equal(np.sort(perm), ident):
                return {"kind": "not-bijective", "generator": j}
            powered = perm_power(perm, self.G.moduli[j])
            bad = np.flatnonzero(powered != ident)
            if len(bad):
                return {"kind": "order", "generator": j, "point": int(bad[0])}
        for i in range(self.G.rank):
            for j in range(i + 1, self.G.rank):
                a = self.generators[i][self.generators[j]]
                b = self.generators[j][self.generators[i]]
                bad = np.flatnonzero(a != b)
                if len(bad):
                    return {"kind": "commute", "generators": (i, j), "point": int(bad[0])}
        return None

    def orbit_partition(self, H=None, scalar: int | None = None) -> list[np.ndarray]:
        return orbit_partition(self, H, scalar=scalar)

    def orbit_labels(self, H=None, scalar: int | None = None) -> np.ndarray:
        blocks = orbit_partition(self, H, scalar=scalar)
        labels = np.empty(self.size, dtype=np.int64)
        for b, block in enumerate(blocks):
            labels[block] = b
        return labels

    def orbit_count(self) -> int:
        return len(orbit_partition(self, None))


def _subgroup_perms(system: FiniteSystem, H, scalar) -> list[np.ndarray]:
    if H is not None and scalar is not None:
        raise InvalidArgument("give either subgroup generators or a scalar, not both")
    if scalar is not None:
        return [perm_power(p, int(scalar) % n) if int(scalar) % n else np.arange(system.size)
                for p, n in zip(system.generators, system.G.moduli)]
    if H is None:
        return list(system.generators)
    perms = []
    for h in H:
        if not isinstance(h, Element):
            h = system.G.element(list(h))
        elif h.group != system.G:
            raise InvalidArgument(f"subgroup generator {h} is not in the acting group")
        perms.append(system.perm(h))
    return perms


def orbit_partition(system: FiniteSystem, H=None, scalar: int | None = None) -> list[np.ndarray]:
    """Orbits of the subgroup generated by ``H`` (default: all of ``G``), or of ``scalar * G``.

    Blocks are sorted arrays, ordered by their least point.
    """
    n = system.size
    perms = _subgroup_perms(system, H, scalar)
    if perms:
        rows = np.concatenate([np.arange(n)] * len(perms))
        cols = np.concatenate(perms)
        graph = coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
        _, labels = connected_components(graph, directed=True, connection="weak")
    else:
        labels = np.arange(n)
    # relabel by least member
    order = np.argsort(labels, kind="stable")
    sorted_labels = labels[order]
    cuts = np.flatnonzero(np.diff(sorted_labels)) + 1
    blocks = np.split(order, cuts)
    blocks.sort(key=lambda b: int(b[0]))
    return blocks


# -- rotations ---------------------------------------------------------------

class RotationSystem(FiniteSystem):
    """``T_g z = z + alpha(g)`` on the group ``Z``."""

    def __init__(self, Z: FiniteAbelianGroup, alpha: Homomorphism, name: str = "rotation", **kw):
        if alpha.target != Z:
            raise InvalidArgument("alpha must map into Z")
        witness = alpha.validate()
        if witness is not None:
            raise InvalidArgument(f"alpha is not well defined: generator {witness[0]} maps to {witness[1]}")
        self.Z = Z
        self.alpha = alpha
        gens = [self.shift_perm(alpha.image_of_generator(j).coords) for j in range(alpha.source.rank)]
        super().__init__(alpha.source, Z, gens, name=name, **kw)

    def shift_perm(self, t: Sequence[int]) -> np.ndarray:
        return self.Z.encode(self.Z.all_coords + np.asarray(t, dtype=np.int64))

    def perm(self, g) -> np.ndarray:
        idx = self._g_index(g)
        return self.shift_perm(self.alpha.apply_coords(self.G.decode(idx)[None, :])[0])

    def alpha_index(self, g) -> int:
        return int(self.alpha.index_map[self._g_index(g)])

    def is_onto(self) -> bool:
        return self.alpha.is_onto()


def build_rotation(Z: FiniteAbelianGroup, alpha: Homomorphism, **kw) -> RotationSystem:
    return RotationSystem(Z, alpha, **kw)


# -- cocycles and skew products ------------------------------------------------

@dataclass
class Cocycle:
    """Generator table of a cocycle ``sigma: G x Z -> H``.

    ``values[j, z]`` holds the coordinates in ``H`` of ``sigma(e_j, z)``.
    """

    base: RotationSystem
    H: FiniteAbelianGroup
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.int64)
        G, Z = self.base.G, self.base.Z
        if vals.ndim == 2 and self.H.rank == 1:
            vals = vals[..., None]
        if vals.shape != (G.rank, Z.order, self.H.rank):
            raise InvalidArgument(
                f"cocycle table must have shape {(G.rank, Z.order, self.H.rank)}, got {vals.shape}")
        self.values = np.mod(vals, self.H.moduli_array) if self.H.rank else vals

    @cached_property
    def value_index(self) -> np.ndarray:
        """``value_index[j, z]`` = index in ``H`` of ``sigma(e_j, z)``."""
        return self.H.encode(self.values)

    def validate(self):
        return validate_cocycle(self)


def validate_cocycle(sigma: Cocycle):
    """``None`` when the generator table defines a cocycle, else a witness dict.

    Checks the commutation relation for each generator pair and the order
    relation ``sum_{k < n_j} sigma(e_j, z + k alpha_j) = 0``.
    """
    base, H = sigma.base, sigma.H
    vals = sigma.values
    mods = H.moduli_array
    shifts = base.generators
    for i in range(base.G.rank):
        for j in range(i + 1, base.G.rank):
            lhs = np.mod(vals[i] + vals[j][shifts[i]], mods)
            rhs = np.mod(vals[j] + vals[i][shifts[j]], mods)
            bad = np.flatnonzero(np.any(lhs != rhs, axis=1))
            if len(bad):
                return {"kind": "commute", "generators": (i, j), "z": int(bad[0])}
    for j, n in enumerate(base.G.moduli):
        total = np.zeros_like(vals[j])
        pos = np.arange(base.Z.order)
        for _ in range(n):
            total = total + vals[j][pos]
            pos = shifts[j][pos]
        total = np.mod(total, mods)
        bad = np.flatnonzero(np.any(total != 0, axis=1))
        if len(bad):
            return {"kind": "order", "generator": j, "z": int(bad[0])}
    return None


class SkewProduct(FiniteSystem):
    """``T_g (z, h) = (z + alpha_g, h + sigma(g, z))`` on ``Z x H``; point index = ``z * |H| + h``."""

    def __init__(self, sigma: Cocycle, name: str = "skew", validate: bool = True, **kw):
        if validate:
            witness = validate_cocycle(sigma)
            if witness is not None:
                raise InvalidArgument(f"cocycle identity fails: {witness}")
        self.cocycle = sigma
        self.base = sigma.base
        self.Z = sigma.base.Z
        self.H = sigma.H
        self.alpha = sigma.base.alpha
        X = self.Z.product(self.H)
        nH = self.H.order
        h_coords = self.H.all_coords
        gens = []
        for j in range(self.base.G.rank):
            z_next = self.base.generators[j]
            # (z, h) -> (z + alpha_j, h + sigma_j(z))
            shifted = self.H.encode(h_coords[None, :, :] + sigma.values[j][:, None, :])
            gens.append((z_next[:, None] * nH + shifted).reshape(-1))
        super().__init__(self.base.G, X, gens, name=name, **kw)

    def point(self, z: int, h: int) -> int:
        return z * self.H.order + h

    def split(self, points) -> tuple[np.ndarray, np.ndarray]:
        points = np.asarray(points, dtype=np.int64)
        return points // self.H.order, points % self.H.order

    def sigma_index(self, g) -> np.ndarray:
        """``sigma(g, z)`` as an index into ``H`` for every ``z``."""
        starts = np.arange(self.Z.order) * self.H.order
        return self.perm(g)[starts] % self.H.order


def build_skew_product(sigma: Cocycle, **kw) -> SkewProduct:
    return SkewProduct(sigma, **kw)


# -- worked examples -----------------------------------------------------------

def _check_points(count: int, budget: int | None = None):
    limit = table_budget() if budget is None else budget
    if count > limit:
        raise ResourceLimit(f"system would have {count} points, budget is {limit}")


def example31_cocycle(d: int, fiber: int = 2) -> Cocycle:
    G = make_group([4] * d)
    base = RotationSystem(G, Homomorphism.identity(G), name=f"C4^{d}")
    vals = np.stack([G.all_coords[:, j] % 2 for j in range(d)])
    return Cocycle(base, make_group([fiber]), vals)


def build_example31(d: int) -> SkewProduct:
    """``G = (Z/4)^d`` on ``C4^d x C2``; the fiber moves by ``x_j mod 2`` under ``e_j``."""
    if d < 1:
        raise InvalidArgument("d must be >= 1")
    _check_points(8 * 4 ** d)
    system = SkewProduct(example31_cocycle(d), name=f"example31(d={d})")
    system.meta.update({"kind": "example31", "d": d})
    return system


@dataclass
class Example41:
    extension: FiniteSystem
    factor: FiniteSystem
    factor_map: np.ndarray

    def check_equivariance(self):
        """``None`` when ``pi o S_g = T_g o pi`` for every ``g``, else a witness."""
        for gi, perm in self.extension.iter_perms():
            lhs = self.factor_map[perm]
            rhs = self.factor.perm(gi)[self.factor_map]
            bad = np.flatnonzero(lhs != rhs)
            if len(bad):
                return {"g": self.extension.G.decode(gi).tolist(), "point": int(bad[0])}
        return None


def _example41_system(d: int, inf_mod: int) -> FiniteSystem:
    # points (x, x_inf, y), x_inf moves by sum(g) mod inf_mod
    G = make_group([4] * d)
    X = make_group([4] * d + [inf_mod, 2])
    coords = X.all_coords
    gens = []
    for j in range(d):
        step = np.zeros(d + 2, dtype=np.int64)
        step[j] = 1
        step[d] = 1
        nxt = coords + step
        nxt[:, d + 1] += coords[:, j] % 2
        gens.append(X.encode(nxt))
    name = "example41" if inf_mod == 4 else "example41-factor"
    return FiniteSystem(G, X, gens, name=f"{name}(d={d})", meta={"kind": name, "d": d})


def build_example41(d: int) -> Example41:
    """Extension on ``C4^d x C4 x C2``, its factor on ``C4^d x C2 x C2``, and the factor map."""
    if d < 1:
        raise InvalidArgument("d must be >= 1")
    _check_points(32 * 4 ** d)
    ext = _example41_system(d, 4)
    fac = _example41_system(d, 2)
    c = ext.X.all_coords.copy()
    # x_inf -> x_inf^2 in multiplicative notation: C4 -> C2, exponent k -> k mod 2
    c[:, d] %= 2
    return Example41(ext, fac, fac.X.encode(c))


# -- the p-th root counterexample -----------------------------------------------

@dataclass(frozen=True)
class CounterexampleParams:
    """Parameters of the ``(Z/p^2)^d`` system on ``C_p^d x C_{p^2}``.

    Roots of unity are exponents: ``omega`` is ``p`` and ``eta`` is ``1`` in ``Z/p^2``.
    """

    p: int
    d: int
    corrected: bool = True

    def __post_init__(self):
        if self.p == 2:
            raise InvalidArgument("p = 2 is excluded: (1 - p)/2 is not an integer")
        if self.p < 2 or not sympy.isprime(self.p):
            raise InvalidArgument(f"p must be an odd prime, got {self.p}")
        if self.d < 1:
            raise InvalidArgument("d must be >= 1")

    @property
    def modulus(self) -> int:
        return self.p * self.p

    @property
    def omega(self) -> int:
        return self.p

    @property
    def eta(self) -> int:
        return 1

    @property
    def xi(self) -> int:
        # eta^{(1-p)/2}: the p-th power is eta^{-C(p,2)}
        return ((1 - self.p) // 2) % self.modulus

    @property
    def binom(self) -> int:
        return math.comb(self.p, 2) % self.modulus

    @property
    def cross_section(self) -> np.ndarray:
        """``phi[x]`` for ``x`` in ``Z/p``: the residue ``x`` read in ``Z/p^2``."""
        return np.arange(self.p, dtype=np.int64)

    def check_invariants(self):
        m, p = self.modulus, self.p
        phi = self.cross_section
        # phi(x)^p = x, with C_p embedded as multiples of p
        if np.any((p * phi) % m != (p * np.arange(p)) % m):
            return "cross-section is not a p-th root"
        if phi[1] != self.eta:
            return "phi(omega) != eta"
        if (p * self.xi + self.binom) % m:
            return "xi^p * eta^C(p,2) != 1"
        return None


def counterexample_cocycle(params: CounterexampleParams) -> Cocycle:
    p, d = params.p, params.d
    G = make_group([p * p] * d)
    Z = make_group([p] * d)
    # S_g t = t + g mod p; alpha is reduction mod p
    alpha = Homomorphism(G, Z, Homomorphism.identity(G).matrix)
    base = RotationSystem(Z, alpha, name=f"T_{p}^{d}")
    extra = params.xi if params.corrected else 0
    vals = np.stack([(params.cross_section[Z.all_coords[:, j]] + extra) % params.modulus for j in range(d)])
    return Cocycle(base, make_group([p * p]), vals)


def build_counterexample(params: CounterexampleParams) -> SkewProduct:
    _check_points(params.p ** (params.d + 2))
    system = SkewProduct(counterexample_cocycle(params),
                         name=f"counterexample(p={params.p}, d={params.d}, corrected={params.corrected})")
    system.meta.update({"kind": "counterexample", "p": params.p, "d": params.d,
                        "corrected": params.corrected, "params": params})
    return system


def counterexample_closed_form(params: CounterexampleParams, g: Sequence[int], t: Sequence[int], u: int):
    """Direct evaluation of ``T_g(t, u)`` from the product formula (test oracle)."""
    p, m = params.p, params.modulus
    extra = params.xi if params.corrected else 0
    shift = 0
    for gj, tj in zip(g, t):
        gj %= m
        shift += sum((tj + k) % p for k in range(gj)) + gj * extra
    return tuple((tj + gj) % p for tj, gj in zip(t, g)), (u + shift) % m


def verify_pth_identity(system: SkewProduct, p: int | None = None, reading: str = "literal"):
    """Check ``T_{pg}(t, u) = (t, t^{pg} u)`` for every ``g`` and every point.

    ``reading='literal'`` computes ``t^{pg} = prod_j t_j^{p g_j}`` inside ``C_p``
    (always trivial). ``reading='lifted'`` uses the exponent ``p * sum_j t_j g_j``
    in ``Z/p^2``. Returns ``None`` on success, else a witness dict.
    """
    params = system.meta.get("params")
    if params is None:
        raise InvalidArgument("system was not built by build_counterexample")
    p = params.p if p is None else p
    if p != params.p:
        raise InvalidArgument("p does not match the system")
    if reading not in ("literal", "lifted"):
        raise InvalidArgument(f"unknown reading {reading!r}")
    m = params.modulus
    Z, H = system.Z, system.H
    t_coords = Z.all_coords
    z_idx = np.repeat(np.arange(Z.order), H.order)
    u = np.tile(np.arange(H.order), Z.order)
    pts = np.arange(system.size)
    for gi in range(system.G.order):
        g = system.G.decode(gi)
        pg = (p * g) % m
        img = system.apply(pg, pts)
        z2, u2 = system.split(img)
        if reading == "literal":
            expect = np.zeros(Z.order, dtype=np.int64)
        else:
            expect = (p * (t_coords @ g)) % m
        want_u = (u + expect[z_idx]) % m
        bad = np.flatnonzero((z2 != z_idx) | (u2 != want_u))
        if len(bad):
            x = int(bad[0])
            return {
                "g": g.tolist(),
                "pg": pg.tolist(),
                "t": t_coords[z_idx[x]].tolist(),
                "u": int(u[x]),
                "got_u": int(u2[x]),
                "expected_u": int(want_u[x]),
                "discrepancy_eta_exponent": int((u2[x] - want_u[x]) % m),
            }
    return None


def build_nonergodic(p: int, d: int) -> SkewProduct:
    """``(Z/p)^d`` acting on ``C_p^d x C_p`` by ``(x, u) -> (x, u + <g, x>)``."""
    if p < 2 or not sympy.isprime(p):
        raise InvalidArgument(f"p must be prime, got {p}")
    if d < 1:
        raise InvalidArgument("d must be >= 1")
    _check_points(p ** (d + 1))
    G = make_group([p] * d)
    base = RotationSystem(G, Homomorphism.zero(G, G), name=f"trivial on C_{p}^{d}")
    vals = np.stack([G.all_coords[:, j] for j in range(d)])
    system = SkewProduct(Cocycle(base, make_group([p]), vals), name=f"nonergodic(p={p}, d={d})")
    system.meta.update({"kind": "nonergodic", "p": p, "d": d})
    return system


# -- JSON spec -----------------------------------------------------------------

def _hom_from_json(G, Z, data) -> Homomorphism:
    if data is None or data == "identity":
        return Homomorphism(G, Z, Homomorphism.identity(G).matrix)
    if "images" in data:
        return Homomorphism.from_images(G, Z, data["images"])
    return Homomorphism(G, Z, tuple(map(tuple, data["matrix"])))


def system_from_spec(spec: dict) -> FiniteSystem:
    """Build a system from ``{"kind": ..., params}``."""
    kind = spec.get("kind")
    if kind == "rotation":
        G = make_group(spec["G"]["moduli"] if isinstance(spec["G"], dict) else spec["G"])
        Z = make_group(spec["Z"]["moduli"] if isinstance(spec["Z"], dict) else spec["Z"])
        return build_rotation(Z, _hom_from_json(G, Z, spec.get("alpha")))
    if kind == "skew":
        G = make_group(spec["G"]["moduli"] if isinstance(spec["G"], dict) else spec["G"])
        Z = make_group(spec["Z"]["moduli"] if isinstance(spec["Z"], dict) else spec["Z"])
        H = make_group(spec["H"]["moduli"] if isinstance(spec["H"], dict) else spec["H"])
        base = build_rotation(Z, _hom_from_json(G, Z, spec.get("alpha")))
        return build_skew_product(Cocycle(base, H, np.asarray(spec["sigma"])))
    if kind == "example31":
        return build_example31(int(spec["d"]))
    if kind == "example41":
        ex = build_example41(int(spec["d"]))
        return ex.factor if spec.get("factor") else ex.extension
    if kind == "counterexample":
        return build_counterexample(CounterexampleParams(int(spec["p"]), int(spec["d"]),
                                                         bool(spec.get("corrected", True))))
    if kind == "nonergodic":
        return build_nonergodic(int(spec["p"]), int(spec["d"]))
    raise InvalidArgument(f"unknown system kind {kind!r}")

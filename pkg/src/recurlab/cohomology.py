"""Coboundaries, Mackey groups, psi correction tables and the two-term limit formula.

Characters of a fiber ``H`` take values in ``Z/m`` with ``m = exponent(H)``.
A cocycle over a system is given on generators: ``values[j, x]`` is the label
of the edge ``x -> T_{e_j} x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import FunctionOnX, accumulate_average, uc_average_product
from .errors import InternalConsistencyError, InvalidArgument
from .groups import FiniteAbelianGroup, Homomorphism, make_group
from .systems import Cocycle, FiniteSystem, RotationSystem, SkewProduct


# -- coboundary solver ---------------------------------------------------------------

@dataclass
class CoboundaryResult:
    solution: np.ndarray | None
    obstruction: dict | None = None

    @property
    def ok(self) -> bool:
        return self.solution is not None


def check_cocycle_values(system: FiniteSystem, values: np.ndarray, m: int):
    """``None`` if the generator labels satisfy the commutation and order relations mod ``m``."""
    gens = system.generators
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            lhs = (values[i] + values[j][gens[i]]) % m
            rhs = (values[j] + values[i][gens[j]]) % m
            bad = np.flatnonzero(lhs != rhs)
            if len(bad):
                return {"kind": "commute", "generators": (i, j), "point": int(bad[0])}
    for j, n in enumerate(system.G.moduli):
        total = np.zeros(system.size, dtype=np.int64)
        pos = np.arange(system.size)
        for _ in range(n):
            total += values[j][pos]
            pos = gens[j][pos]
        bad = np.flatnonzero(total % m)
        if len(bad):
            return {"kind": "order", "generator": j, "point": int(bad[0])}
    return None


class SpanningForest:
    """BFS spanning forest of the generator graph, reusable across label tables."""

    def __init__(self, system: FiniteSystem):
        self.system = system
        n = system.size
        gens = system.generators
        seen = np.zeros(n, dtype=bool)
        self.parent_pt = np.full(n, -1, dtype=np.int64)
        self.parent_gen = np.full(n, -1, dtype=np.int64)
        self.levels: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
        roots = []
        for start in range(n):
            if seen[start]:
                continue
            roots.append(start)
            seen[start] = True
            frontier = np.asarray([start])
            depth = 0
            while len(frontier):
                fresh = []
                for j, perm in enumerate(gens):
                    nxt = perm[frontier]
                    new = ~seen[nxt]
                    if not np.any(new):
                        continue
                    uniq, first = np.unique(nxt[new], return_index=True)
                    src = frontier[new][first]
                    seen[uniq] = True
                    self.parent_pt[uniq] = src
                    self.parent_gen[uniq] = j
                    fresh.append((uniq, src, np.full(len(uniq), j)))
                if fresh:
                    if depth >= len(self.levels):
                        self.levels.append(([], [], []))
                    for part, arr in zip(self.levels[depth], (np.concatenate([f[k] for f in fresh]) for k in range(3))):
                        part.append(arr)
                    frontier = np.unique(np.concatenate([f[0] for f in fresh]))
                else:
                    frontier = np.zeros(0, dtype=np.int64)
                depth += 1
        self.levels = [tuple(np.concatenate(part) for part in lvl) for lvl in self.levels]
        self.roots = np.asarray(roots, dtype=np.int64)

    def potentials(self, values: np.ndarray, m: int) -> np.ndarray:
        """Tree potentials ``F`` for label tables of shape ``(..., gens, n)``."""
        F = np.zeros(values.shape[:-2] + (self.system.size,), dtype=np.int64)
        for child, parent, gen in self.levels:
            F[..., child] = (F[..., parent] + values[..., gen, parent]) % m
        return F

    def defects(self, values: np.ndarray, m: int) -> np.ndarray:
        """``(..., gens, n)`` array of ``F(T_j x) - F(x) - label`` mod ``m``."""
        F = self.potentials(values, m)
        out = np.empty(values.shape, dtype=np.int64)
        for j, perm in enumerate(self.system.generators):
            out[..., j, :] = (F[..., perm] - F - values[..., j, :]) % m
        return out

    def path(self, x: int) -> list[tuple[int, int]]:
        out = []
        while self.parent_pt[x] >= 0:
            out.append((int(self.parent_pt[x]), int(self.parent_gen[x])))
            x = int(self.parent_pt[x])
        out.reverse()
        return out


def coboundary_mask(forest: SpanningForest, values: np.ndarray, m: int) -> np.ndarray:
    """Boolean array over the leading axes: is each label table a coboundary?"""
    values = np.mod(np.asarray(values, dtype=np.int64), m)
    d = forest.defects(values, m)
    return ~np.any(d.reshape(d.shape[:-2] + (-1,)) != 0, axis=-1)


def is_coboundary(system: FiniteSystem, values, m: int, check: bool = True,
                  forest: SpanningForest | None = None) -> CoboundaryResult:
    """Solve ``F(T_{e_j} x) - F(x) = values[j, x] (mod m)`` orbit by orbit.

    On failure the obstruction is a closed walk: the tree path to ``x``, the
    edge ``(x, j)`` and the tree path back from ``T_{e_j} x``; its label sum is
    ``total`` (nonzero mod ``m``).
    """
    values = np.mod(np.asarray(values, dtype=np.int64).reshape(len(system.generators), system.size), m)
    if check:
        witness = check_cocycle_values(system, values, m)
        if witness is not None:
            raise InvalidArgument(f"labels do not form a cocycle: {witness}")
    forest = SpanningForest(system) if forest is None else forest
    F = forest.potentials(values, m)
    for j, perm in enumerate(system.generators):
        bad = np.flatnonzero((F[perm] - F - values[j]) % m)
        if len(bad):
            x = int(bad[0])
            y = int(perm[x])
            return CoboundaryResult(None, {
                "edge": (x, j),
                "total": int((F[x] + values[j][x] - F[y]) % m),
                "path_to_edge": forest.path(x),
                "path_back": forest.path(y),
            })
    return CoboundaryResult(F)


# -- Mackey groups -----------------------------------------------------------------------

@dataclass
class MackeySubgroup:
    H: FiniteAbelianGroup
    c: object
    members: np.ndarray
    annihilator: list[tuple[int, ...]]

    @property
    def order(self) -> int:
        return len(self.members)

    def duality_holds(self) -> bool:
        return self.order * len(self.annihilator) == self.H.order

    def generators(self) -> list[list[int]]:
        return _subgroup_generators(self.H, self.members)

    def to_json(self) -> dict:
        return {"c": self.c, "group": self.H.to_json(), "order": self.order,
                "generators": self.generators(), "annihilator": [list(a) for a in self.annihilator]}


def _subgroup_generators(H: FiniteAbelianGroup, members: np.ndarray) -> list[list[int]]:
    """A small generating list, chosen greedily in index order."""
    span = {0}
    gens = []
    member_set = set(int(i) for i in members)
    for idx in sorted(member_set):
        if idx in span:
            continue
        gens.append(H.decode(idx).tolist())
        step = H.decode(idx)
        new = set(span)
        frontier = list(span)
        while frontier:
            nxt = []
            for s in frontier:
                t = H.index((H.decode(s) + step).tolist())
                if t not in new:
                    new.add(t)
                    nxt.append(t)
            frontier = nxt
        span = new
    return gens


def annihilated(H: FiniteAbelianGroup, chars: list[tuple[int, ...]]) -> np.ndarray:
    """Indices of ``h`` killed by every character in ``chars``."""
    if not chars:
        return np.arange(H.order)
    w = np.asarray(chars, dtype=np.int64) * H.character_weights
    vals = (w @ H.all_coords.T) % H.exponent
    return np.flatnonzero(~np.any(vals != 0, axis=0))


def scaled_base(skew: SkewProduct, c: int) -> RotationSystem:
    """The rotation ``z -> z + alpha(c g)`` on ``Z``."""
    alpha_c = skew.alpha.compose(Homomorphism.scalar(skew.G, c))
    return RotationSystem(skew.Z, alpha_c, name=f"{skew.base.name} x{c}")


def scaled_cocycle_table(skew: SkewProduct, c: int) -> np.ndarray:
    """``table[j, z]`` = index in ``H`` of ``sigma(c e_j, z)``."""
    G = skew.G
    rows = []
    for j in range(G.rank):
        coords = [0] * G.rank
        coords[j] = c
        rows.append(skew.sigma_index(G.element(coords)))
    return np.stack(rows) if rows else np.zeros((0, skew.Z.order), dtype=np.int64)


def _all_char_values(H: FiniteAbelianGroup, h_index: np.ndarray) -> np.ndarray:
    """``out[chi, ...]`` = value of every character at the given ``H`` indices."""
    w = H.all_coords * H.character_weights                       # (|H^|, rank)
    return np.tensordot(w, H.decode(h_index), axes=([1], [-1])) % H.exponent


def mackey_component(skew: SkewProduct, c: int) -> MackeySubgroup:
    """``M_c``: the common kernel of characters ``chi`` with ``chi o sigma_{c.}`` a coboundary over ``(Z, alpha_{c.})``."""
    H = skew.H
    base = scaled_base(skew, c)
    labels = _all_char_values(H, scaled_cocycle_table(skew, c))    # (|H^|, gens, |Z|)
    ok = coboundary_mask(SpanningForest(base), labels, H.exponent)
    good = [tuple(int(v) for v in H.all_coords[i]) for i in np.flatnonzero(ok)]
    return MackeySubgroup(H, c, annihilated(H, good), good)


@dataclass
class JointSpace:
    """``W = {(z + a t, z + b t)}`` with ``S_g w = (w_1 + alpha_{a g}, w_2 + alpha_{b g})``."""

    skew: SkewProduct
    a: int
    b: int
    points: np.ndarray          # (|W|, 2) indices into Z
    system: FiniteSystem
    labels: np.ndarray          # (rank G, |W|, 2) indices into H of (sigma_{a e_j}(w1), sigma_{b e_j}(w2))

    @property
    def size(self) -> int:
        return len(self.points)


def joint_space(skew: SkewProduct, a: int, b: int) -> JointSpace:
    Z, G = skew.Z, skew.G
    zc = Z.all_coords
    first = Z.encode(zc[:, None, :] + a * zc[None, :, :]).ravel()
    second = Z.encode(zc[:, None, :] + b * zc[None, :, :]).ravel()
    keys = np.unique(first * Z.order + second)
    pts = np.stack([keys // Z.order, keys % Z.order], axis=1)
    lookup = {int(k): i for i, k in enumerate(keys)}
    gens = []
    labels = []
    sa = scaled_cocycle_table(skew, a)
    sb = scaled_cocycle_table(skew, b)
    for j in range(G.rank):
        unit = np.eye(G.rank, dtype=np.int64)[j]
        ea = skew.alpha.apply_coords((a * unit)[None, :])[0]
        eb = skew.alpha.apply_coords((b * unit)[None, :])[0]
        n1 = Z.encode(Z.decode(pts[:, 0]) + ea)
        n2 = Z.encode(Z.decode(pts[:, 1]) + eb)
        nk = n1 * Z.order + n2
        perm = np.asarray([lookup[int(k)] for k in nk], dtype=np.int64)
        gens.append(perm)
        labels.append(np.stack([sa[j][pts[:, 0]], sb[j][pts[:, 1]]], axis=1))
    system = FiniteSystem(G, make_group([len(pts)]), gens, name=f"W({a},{b})")
    return JointSpace(skew, a, b, pts, system, np.asarray(labels, dtype=np.int64).reshape(G.rank, len(pts), 2))


@dataclass
class MackeyResult:
    a: int
    b: int
    M_a: MackeySubgroup
    M_b: MackeySubgroup
    joint_annihilator: list[tuple[tuple[int, ...], tuple[int, ...]]]
    joint_members: np.ndarray     # indices into H x H
    decomposes: bool
    witness: dict | None = None

    @property
    def joint_order(self) -> int:
        return len(self.joint_members)

    def to_json(self) -> dict:
        return {
            "a": self.a, "b": self.b,
            "M_a": self.M_a.to_json(), "M_b": self.M_b.to_json(),
            "joint_order": self.joint_order,
            "joint_annihilator": [[list(x), list(y)] for x, y in self.joint_annihilator],
            "decomposes": self.decomposes,
            "witness": self.witness,
        }


def _require_coprime(a: int, b: int):
    if math.gcd(a, b) != 1:
        raise InvalidArgument(f"(a, b) = ({a}, {b}) is not coprime; reduce by the common factor first")


def mackey_group(skew: SkewProduct, a: int, b: int) -> MackeyResult:
    """Joint Mackey group over ``W(a, b)`` compared with ``M_a x M_b``."""
    _require_coprime(a, b)
    H = skew.H
    Ma = mackey_component(skew, a)
    Mb = mackey_component(skew, b)
    W = joint_space(skew, a, b)
    m = H.exponent
    v1 = _all_char_values(H, W.labels[..., 0])                  # (|H^|, gens, |W|)
    v2 = _all_char_values(H, W.labels[..., 1])
    labels = (v1[:, None] + v2[None, :]) % m                    # (|H^|, |H^|, gens, |W|)
    ok = coboundary_mask(SpanningForest(W.system), labels, m)
    dual = [tuple(int(v) for v in row) for row in H.all_coords]
    good = [(dual[i], dual[j]) for i, j in zip(*np.nonzero(ok))]
    HH = H.product(H)
    members = annihilated(HH, [x + y for x, y in good])
    product = set((x, y) for x in Ma.annihilator for y in Mb.annihilator)
    direct = set(good)
    witness = None
    if product != direct:
        extra = sorted(direct - product)
        missing = sorted(product - direct)
        witness = {"only_joint": [list(map(list, e)) for e in extra[:4]],
                   "only_product": [list(map(list, e)) for e in missing[:4]]}
    return MackeyResult(a, b, Ma, Mb, good, members, product == direct, witness)


# -- psi tables -------------------------------------------------------------------------------

def coset_representatives(H: FiniteAbelianGroup, members: np.ndarray, selection="min", seed: int = 0) -> np.ndarray:
    """``rep[h]`` = chosen representative index of the coset ``h + M``."""
    mc = H.decode(members)
    all_c = H.all_coords
    cosets = H.encode(all_c[:, None, :] + mc[None, :, :])        # (|H|, |M|)
    key = cosets.min(axis=1)
    if selection == "min":
        return key
    if selection == "max":
        return cosets.max(axis=1)
    if selection == "random":
        rng = np.random.default_rng(seed)
        choice = {}
        for k in np.unique(key):
            row = cosets[int(k)]
            choice[int(k)] = int(row[rng.integers(len(row))])
        return np.asarray([choice[int(k)] for k in key], dtype=np.int64)
    raise InvalidArgument(f"unknown selection {selection!r}")


@dataclass
class PsiTable:
    c: object
    table: np.ndarray            # (|Z| for t, |Z| for z) -> coset representative index, -1 if t not in image
    modulus_members: np.ndarray
    group: FiniteAbelianGroup

    def __call__(self, t: int, z: int) -> int:
        return int(self.table[t, z])


def _psi_from_pairs(skew: SkewProduct, values_for_g, group: FiniteAbelianGroup, members: np.ndarray,
                    selection, seed, c) -> PsiTable:
    Z, G = skew.Z, skew.G
    rep = coset_representatives(group, members, selection, seed)
    canon = coset_representatives(group, members, "min")
    table = np.full((Z.order, Z.order), -1, dtype=np.int64)
    canon_seen = np.full((Z.order, Z.order), -1, dtype=np.int64)
    amap = skew.alpha.index_map
    for gi in range(G.order):
        t = int(amap[gi])
        vals = values_for_g(gi)
        key = canon[vals]
        if table[t, 0] < 0:
            table[t] = rep[vals]
            canon_seen[t] = key
        else:
            bad = np.flatnonzero(canon_seen[t] != key)
            if len(bad):
                raise InternalConsistencyError(
                    "psi is not well defined", {"t": t, "z": int(bad[0]), "g": G.decode(gi).tolist()})
    return PsiTable(c, table, members, group)


def psi_tables(skew: SkewProduct, c: int, selection="min", seed: int = 0, component: MackeySubgroup | None = None) -> PsiTable:
    """``psi_c(alpha_g, z)``: chosen representative of ``sigma(c g, z)`` modulo ``M_c``."""
    comp = mackey_component(skew, c) if component is None else component
    G = skew.G
    return _psi_from_pairs(skew, lambda gi: skew.sigma_index(Homomorphism.scalar(G, c).index_map[gi]),
                           skew.H, comp.members, selection, seed, c)


def joint_psi_table(skew: SkewProduct, a: int, b: int, members: np.ndarray, selection="min", seed: int = 0) -> PsiTable:
    """Pair version: representative of ``(sigma(a g, z), sigma(b g, z))`` modulo the joint group."""
    G, H = skew.G, skew.H
    HH = H.product(H)
    ma, mb = Homomorphism.scalar(G, a).index_map, Homomorphism.scalar(G, b).index_map
    return _psi_from_pairs(skew, lambda gi: skew.sigma_index(ma[gi]) * H.order + skew.sigma_index(mb[gi]),
                           HH, members, selection, seed, (a, b))


# -- limit formula -----------------------------------------------------------------------------

def _require_onto(skew: SkewProduct):
    if not skew.alpha.is_onto():
        raise InvalidArgument("alpha is not onto Z; the finite limit formula needs a surjective rotation")


def limit_formula_rhs(skew: SkewProduct, f1: FunctionOnX, f2: FunctionOnX, a: int, b: int,
                      mode: str = "product", selection="min", seed: int = 0,
                      mackey: MackeyResult | None = None) -> FunctionOnX:
    """Right-hand side of the two-term limit formula.

    ``mode='product'`` integrates fiber shifts over ``M_a x M_b`` with separate
    ``psi_a, psi_b`` tables; ``mode='joint'`` integrates over the joint Mackey
    group with one pair-valued table.
    """
    _require_coprime(a, b)
    _require_onto(skew)
    if mode not in ("product", "joint"):
        raise InvalidArgument(f"unknown mode {mode!r}")
    res = mackey_group(skew, a, b) if mackey is None else mackey
    Z, H = skew.Z, skew.H
    nH = H.order
    zc = Z.all_coords
    z_of, h_of = skew.split(np.arange(skew.size))
    hc = H.decode(h_of)
    za = Z.encode(zc[z_of][None, :, :] + a * zc[:, None, :])     # (t, x)
    zb = Z.encode(zc[z_of][None, :, :] + b * zc[:, None, :])
    if mode == "product":
        psa = psi_tables(skew, a, selection, seed, res.M_a).table
        psb = psi_tables(skew, b, selection, seed, res.M_b).table
        shifts = [(int(u), int(v)) for u in res.M_a.members for v in res.M_b.members]
        pa = psa[:, z_of]
        pb = psb[:, z_of]
    else:
        pj = joint_psi_table(skew, a, b, res.joint_members, selection, seed).table[:, z_of]
        pa, pb = pj // nH, pj % nH
        shifts = [(int(k) // nH, int(k) % nH) for k in res.joint_members]
    uc = {u: H.decode(u) for u, _ in shifts}
    vc = {v: H.decode(v) for _, v in shifts}
    pac, pbc = H.decode(pa), H.decode(pb)

    def maps():
        for t in range(Z.order):
            for u, v in shifts:
                h1 = H.encode(hc + uc[u] + pac[t])
                h2 = H.encode(hc + vc[v] + pbc[t])
                yield [za[t] * nH + h1, zb[t] * nH + h2]

    return accumulate_average(skew, [f1, f2], maps(), Z.order * len(shifts))


@dataclass
class LimitCheck:
    deviation: float
    exact: bool
    mode: str
    decomposes: bool
    transitive_base: bool
    selection_independent: bool
    mackey: MackeyResult = field(repr=False)

    @property
    def passed(self) -> bool:
        return self.deviation == 0.0 if self.exact else self.deviation <= 1e-9

    def to_json(self) -> dict:
        return {"deviation": self.deviation, "exact": self.exact, "mode": self.mode,
                "decomposes": self.decomposes, "transitive_base": self.transitive_base,
                "selection_independent": self.selection_independent, "passed": self.passed,
                "mackey": self.mackey.to_json()}


def _deviation(lhs: FunctionOnX, rhs: FunctionOnX) -> tuple[float, bool]:
    exact = lhs.kind == rhs.kind == "exact"
    if exact and lhs.equals(rhs):
        return 0.0, True
    return float(np.max(np.abs(lhs.to_complex() - rhs.to_complex()), initial=0.0)), exact


def verify_limit_formula(skew: SkewProduct, f1: FunctionOnX, f2: FunctionOnX, a: int, b: int,
                         mode: str = "product", alt_selection="max", seed: int = 0) -> LimitCheck:
    """Compare the group average of ``f1(T_{ag} x) f2(T_{bg} x)`` with the limit formula."""
    res = mackey_group(skew, a, b)
    lhs = uc_average_product(skew, [f1, f2], [a, b])
    rhs = limit_formula_rhs(skew, f1, f2, a, b, mode=mode, mackey=res)
    alt = limit_formula_rhs(skew, f1, f2, a, b, mode=mode, selection=alt_selection, seed=seed, mackey=res)
    dev, exact = _deviation(lhs, rhs)
    alt_dev, _ = _deviation(rhs, alt)
    return LimitCheck(dev, exact, mode, res.decomposes, skew.base.orbit_count() == 1, alt_dev == 0.0, res)


# -- seeded test family ---------------------------------------------------------------------------

FIBERS = ([2], [3], [4], [2, 2], [5], [6], [7], [8], [2, 4])


def random_skew_product(rng: np.random.Generator, max_z: int = 32, max_h: int = 8,
                        kernel: bool | None = None) -> SkewProduct:
    """A validated random skew product over a cyclic base ``Z/n``.

    Without ``kernel``: ``G = Z/n`` acting by ``+1``. With ``kernel``:
    ``G = Z/n x Z/k`` where the second factor fixes ``Z`` and moves the fiber
    by a constant of order dividing ``k``. The cocycle is then perturbed by a
    random coboundary.
    """
    if kernel is None:
        kernel = bool(rng.integers(2))
    fibers = [f for f in FIBERS if math.prod(f) <= max_h]
    H = make_group(fibers[rng.integers(len(fibers))])
    n = int(rng.integers(3, max_z + 1))
    Z = make_group([n])
    hc = H.all_coords
    step = hc[rng.integers(H.order, size=n)]
    step[-1] = (-step[:-1].sum(axis=0)) % H.moduli_array      # sum over the cycle is zero
    if kernel:
        k = int(rng.choice([2, 3, 4]))
        G = make_group([n, k])
        alpha = Homomorphism(G, Z, ((1, 0),))
        ok = [h for h in hc if not np.any((k * h) % H.moduli_array)]
        const = ok[rng.integers(len(ok))]
        vals = np.stack([step, np.broadcast_to(const, step.shape)])
    else:
        G = Z
        alpha = Homomorphism.identity(G)
        vals = step[None]
    base = RotationSystem(Z, alpha)
    F = hc[rng.integers(H.order, size=n)]
    shifted = [F[base.generators[j]] - F for j in range(G.rank)]
    vals = (vals + np.stack(shifted)) % H.moduli_array
    sigma = Cocycle(base, H, vals)
    return SkewProduct(sigma, name=f"random(n={n}, H={list(H.moduli)}, G={list(G.moduli)})")

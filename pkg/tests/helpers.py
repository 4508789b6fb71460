"""Independent oracles shared by the test modules."""

import numpy as np

from recurlab.analysis import FunctionOnX
from recurlab.cohomology import random_skew_product

PATTERNS = [(1, 2), (2, 3), (1, 3)]


def coboundary_oracle(n, perms, labels, m):
    """Weighted union-find: is there F with F(perm_j[x]) - F(x) = labels[j][x] mod m for all j, x?"""
    parent = list(range(n))
    pot = [0] * n   # F(x) - F(root(x))

    def find(x):
        path = []
        while parent[x] != x:
            path.append(x)
            x = parent[x]
        root, acc = x, 0
        for y in reversed(path):
            acc = (acc + pot[y]) % m
            pot[y] = acc
            parent[y] = root
        return root

    for j, perm in enumerate(perms):
        for x in range(n):
            y = int(perm[x])
            w = int(labels[j][x]) % m          # F(y) - F(x) = w
            rx, ry = find(x), find(y)
            if rx == ry:
                if (pot[y] - pot[x] - w) % m:
                    return False
            else:
                # F(ry) - F(rx) = pot[x] + w - pot[y]
                parent[ry] = rx
                pot[ry] = (pot[x] + w - pot[y]) % m
    return True


def limit_family(seed=1, count=24):
    """The seeded instance family used by the limit-formula experiment."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        a, b = PATTERNS[i % 3]
        skew = random_skew_product(rng)
        c1 = [int(rng.integers(n)) for n in skew.X.moduli]
        c2 = [int(rng.integers(n)) for n in skew.X.moduli]
        out.append((skew, a, b, FunctionOnX.character(skew, c1), FunctionOnX.character(skew, c2)))
    return out


def sigma_table(skew):
    """``sig[g, z]`` = index in H of sigma(g, z), from the point action directly."""
    nH = skew.H.order
    starts = np.arange(skew.Z.order) * nH
    return np.stack([skew.perm(gi)[starts] % nH for gi in range(skew.G.order)])


def joint_annihilator_oracle(skew, a, b):
    """Pairs of characters (chi1, chi2) with chi1(sigma_{a.}) + chi2(sigma_{b.}) a coboundary over W(a, b).

    Builds W as a set of pairs and the action from full group tables, independently of the library.
    """
    Z, G, H = skew.Z, skew.G, skew.H
    sig = sigma_table(skew)
    alpha = skew.alpha.index_map
    zadd = Z.encode(Z.all_coords[:, None, :] + Z.all_coords[None, :, :])
    gscale = lambda c: G.encode(c * G.all_coords)
    ga, gb = gscale(a), gscale(b)
    ta = Z.encode(a * Z.all_coords)
    tb = Z.encode(b * Z.all_coords)
    W = sorted({(int(zadd[z, ta[t]]), int(zadd[z, tb[t]])) for z in range(Z.order) for t in range(Z.order)})
    pos = {w: i for i, w in enumerate(W)}
    gens = [G.index([1 if k == j else 0 for k in range(G.rank)]) for j in range(G.rank)]
    perms, lab1, lab2 = [], [], []
    for e in gens:
        sa, sb = int(alpha[ga[e]]), int(alpha[gb[e]])
        perms.append([pos[(int(zadd[w1, sa]), int(zadd[w2, sb]))] for w1, w2 in W])
        lab1.append([int(sig[ga[e], w1]) for w1, _ in W])
        lab2.append([int(sig[gb[e], w2]) for _, w2 in W])
    table = H.pairing_table()
    m = H.exponent
    good = set()
    for c1 in range(H.order):
        for c2 in range(H.order):
            labels = [[(table[c1, x] + table[c2, y]) % m for x, y in zip(l1, l2)] for l1, l2 in zip(lab1, lab2)]
            if coboundary_oracle(len(W), perms, labels, m):
                good.add((tuple(H.decode(c1).tolist()), tuple(H.decode(c2).tolist())))
    return good


def component_annihilator_oracle(skew, c):
    """Characters chi with chi(sigma_{c.}) a coboundary over (Z, alpha_{c.})."""
    Z, G, H = skew.Z, skew.G, skew.H
    sig = sigma_table(skew)
    gc = G.encode(c * G.all_coords)
    zadd = Z.encode(Z.all_coords[:, None, :] + Z.all_coords[None, :, :])
    alpha = skew.alpha.index_map
    gens = [G.index([1 if k == j else 0 for k in range(G.rank)]) for j in range(G.rank)]
    perms = [zadd[:, int(alpha[gc[e]])] for e in gens]
    table = H.pairing_table()
    good = set()
    for ci in range(H.order):
        labels = [table[ci, sig[gc[e]]] for e in gens]
        if coboundary_oracle(Z.order, perms, labels, H.exponent):
            good.add(tuple(H.decode(ci).tolist()))
    return good


def pattern_triples(N, a, b):
    """All 3-element sets {x, x + a s, x + b s} inside {0..N-1}."""
    out = set()
    for x in range(N):
        for s in range(-N, N + 1):
            t = (x, x + a * s, x + b * s)
            if s and all(0 <= v < N for v in t) and len(set(t)) == 3:
                out.add(frozenset(t))
    return out


def all_pattern_free_masks(N, a=1, b=2):
    """Every pattern-free subset of {0..N-1} as a uint64 bitmask, built element by element."""
    T = pattern_triples(N, a, b)
    masks = np.zeros(1, dtype=np.uint64)
    for top in range(N):
        ok = np.ones(len(masks), dtype=bool)
        for t in T:
            if max(t) == top:
                rest = np.uint64(sum(1 << v for v in t if v != top))
                ok &= (masks & rest) != rest
        masks = np.concatenate([masks, masks[ok] | np.uint64(1 << top)])
    return masks


def brute_max_pattern_free(N, a=1, b=2):
    return int(np.bitwise_count(all_pattern_free_masks(N, a, b)).max())

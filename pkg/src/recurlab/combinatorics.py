"""Pattern-free sets, exact extremal search, correlation scans and box thresholds.

A pattern ``(a, b)`` is a configuration ``{n, n + a m, n + b m}`` with ``m != 0``
(additive ambients) or ``{y, y x^a, y x^b}`` with ``x != 1`` (multiplicative
ones). In modular ambients a configuration whose three points coincide is
degenerate and ignored.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy
from scipy.ndimage import maximum_filter

from . import kernels
from .errors import InvalidArgument, ResourceLimit

EXACT_LIMIT = 40
AMBIENT_KINDS = ("interval", "cyclic", "roots", "units")


@dataclass(frozen=True)
class Ambient:
    """``interval``: ``{0..n-1}``; ``cyclic``: ``Z/n``; ``roots``: ``C_n`` by exponents;
    ``units``: ``(Z/n)^x`` by residues (``n`` prime)."""

    kind: str
    n: int

    def __post_init__(self):
        if self.kind not in AMBIENT_KINDS:
            raise InvalidArgument(f"unknown ambient kind {self.kind!r}")
        if self.n < 1:
            raise InvalidArgument("ambient size must be positive")
        if self.kind == "units" and not sympy.isprime(self.n):
            raise InvalidArgument("units ambient needs a prime modulus")

    def contains(self, members) -> bool:
        arr = np.asarray(members, dtype=np.int64)
        if self.kind == "units":
            return bool(np.all((arr >= 1) & (arr < self.n)))
        return bool(np.all((arr >= 0) & (arr < self.n)))

    def to_json(self) -> dict:
        return {"kind": self.kind, "n": self.n}


@dataclass
class BehrendSet:
    ambient: Ambient
    members: list[int]
    pattern: tuple[int, int]
    info: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.members)

    def to_json(self) -> dict:
        return {"ambient": self.ambient.to_json(), "pattern": list(self.pattern),
                "size": self.size, "members": self.members, "info": self.info}


# -- certification ---------------------------------------------------------------------

def _check_pattern(a: int, b: int):
    if a == b or a == 0 or b == 0:
        raise InvalidArgument(f"pattern needs distinct nonzero a, b; got ({a}, {b})")


def pattern_free_check(members, ambient: Ambient, a: int, b: int):
    """``None`` if no configuration of pattern ``(a, b)`` lies in the set, else ``(base, step)``."""
    _check_pattern(a, b)
    arr = np.unique(np.asarray(list(members), dtype=np.int64))
    if not ambient.contains(arr):
        raise InvalidArgument("set is not inside the ambient")
    if len(arr) == 0:
        return None
    n = ambient.n
    if ambient.kind == "interval":
        mask = np.zeros(n, dtype=bool)
        mask[arr] = True
        for x in arr:
            diffs = arr - x
            ok = (diffs != 0) & (diffs % a == 0)
            steps = diffs[ok] // a
            far = x + b * steps
            inside = (far >= 0) & (far < n)
            hit = np.flatnonzero(mask[far[inside]])
            if len(hit):
                return int(x), int(steps[inside][hit[0]])
        return None
    if ambient.kind in ("cyclic", "roots"):
        mask = np.zeros(n, dtype=bool)
        mask[arr] = True
        idx = np.arange(n)
        for m in range(1, n):
            sa, sb = (a * m) % n, (b * m) % n
            if sa == 0 and sb == 0:
                continue
            hit = np.flatnonzero(mask & mask[(idx + sa) % n] & mask[(idx + sb) % n])
            if len(hit):
                return int(hit[0]), m
        return None
    # units: residues modulo a prime
    mask = np.zeros(n, dtype=bool)
    mask[arr] = True
    for x in range(2, n):
        xa, xb = pow(x, a, n), pow(x, b, n)
        if xa == 1 and xb == 1:
            continue
        ya = (arr * xa) % n
        yb = (arr * xb) % n
        hit = np.flatnonzero(mask[ya] & mask[yb])
        if len(hit):
            return int(arr[hit[0]]), x
    return None


# -- Behrend spheres -----------------------------------------------------------------------

def _digits(values: np.ndarray, base: int, k: int) -> np.ndarray:
    out = np.empty((k, len(values)), dtype=np.int64)
    v = values.copy()
    for i in range(k):
        out[i] = v % base
        v //= base
    return out


def behrend_additive(N: int) -> BehrendSet:
    """3-term-progression-free subset of ``{0..N-1}`` from digit spheres.

    Numbers whose base ``2d - 1`` digits are all below ``d`` add without carries;
    restricting to one digit sum of squares leaves no 3-term progression. The
    best ``d`` and sphere are kept.
    """
    if N < 1:
        raise InvalidArgument("N must be >= 1")
    amb = Ambient("interval", N)
    best = [0] if N < 2 else [0, 1]
    best_params = {"digit_bound": None, "radius": None}
    vals = np.arange(N, dtype=np.int64)
    d = 2
    # one-digit spheres are single points, so the base stays below sqrt(N)
    while (2 * d - 1) ** 2 <= max(N, 9):
        base = 2 * d - 1
        k = max(1, math.ceil(math.log(N, base))) if N > 1 else 1
        while base ** k < N:
            k += 1
        dig = _digits(vals, base, k)
        ok = np.all(dig < d, axis=0)
        if np.count_nonzero(ok) > len(best):
            sq = (dig[:, ok] ** 2).sum(axis=0)
            counts = np.bincount(sq)
            r = int(np.argmax(counts))
            if counts[r] > len(best):
                best = vals[ok][sq == r].tolist()
                best_params = {"digit_bound": d, "radius": r}
        d += 1
    info = dict(best_params)
    if N > 1:
        logn = math.log(N)
        info["implied_constant"] = (logn - math.log(len(best))) / math.sqrt(logn)
    return BehrendSet(amb, sorted(best), (1, 2), info)


# -- exact and greedy extremal search ----------------------------------------------------------

def _conflicts(N: int, a: int, b: int) -> list[list[int]]:
    """For each ``i``: bitmasks of pairs ``j, k < i`` forming a configuration with ``i``."""
    out = [[] for _ in range(N)]
    seen = set()
    for n in range(N):
        for m in range(-N, N + 1):
            if m == 0:
                continue
            p, q = n + a * m, n + b * m
            if 0 <= p < N and 0 <= q < N:
                tri = tuple(sorted((n, p, q)))
                if tri in seen:
                    continue
                seen.add(tri)
                lo, mid, hi = tri
                out[hi].append((1 << lo) | (1 << mid))
    return out


def _greedy(N: int, conflicts) -> list[int]:
    chosen = 0
    out = []
    for i in range(N):
        if all((chosen & msk) != msk for msk in conflicts[i]):
            chosen |= 1 << i
            out.append(i)
    return out


def max_pattern_free(N: int, a: int = 1, b: int = 2, mode: str = "exact") -> BehrendSet:
    """Largest (``exact``) or a maximal (``greedy``) pattern-free subset of ``{0..N-1}``.

    The exact search is depth-first with elements tried in increasing order,
    including before excluding, so the first optimum found is the
    lexicographically least one. It prunes with the optima of shorter
    intervals, which are computed first; the trace records them.
    """
    _check_pattern(a, b)
    if N < 0:
        raise InvalidArgument("N must be >= 0")
    amb = Ambient("interval", max(N, 1))
    conflicts = _conflicts(N, a, b)
    if mode == "greedy":
        return BehrendSet(amb, _greedy(N, conflicts), (a, b), {"mode": "greedy"})
    if mode != "exact":
        raise InvalidArgument(f"unknown mode {mode!r}")
    if N > EXACT_LIMIT:
        raise ResourceLimit(f"exact search is limited to N <= {EXACT_LIMIT}")
    r = [0] * (N + 1)          # r[k]: optimum on an interval of length k
    nodes = 0
    best_mask = 0
    for length in range(1, N + 1):
        # r[length] is r[length - 1] or one more; start just below so the first hit is recorded
        best = [r[length - 1] - 1, 0]
        r[length] = r[length - 1] + 1  # upper bound while searching

        def dfs(i: int, chosen: int, size: int):
            nonlocal nodes
            nodes += 1
            if size + r[length - i] <= best[0]:
                return
            if i == length:
                best[0], best[1] = size, chosen
                return
            if all((chosen & msk) != msk for msk in conflicts[i]):
                dfs(i + 1, chosen | (1 << i), size + 1)
            dfs(i + 1, chosen, size)

        dfs(0, 0, 0)
        r[length] = best[0]
        best_mask = best[1]
    best_set = [i for i in range(N) if best_mask >> i & 1]
    trace = {"optima_by_length": r[1:], "nodes": nodes, "mode": "exact"}
    return BehrendSet(amb, best_set, (a, b), trace)


# -- multiplicative sets ---------------------------------------------------------------------------

def behrend_multiplicative(p: int, a: int = 1, b: int = 2, ambient: str = "roots") -> BehrendSet:
    """Pattern-free subset of ``C_p`` (exponents) or of ``(Z/p)^x`` (residues).

    With ``(a', b') = (a, b) / gcd(a, b)`` and ``h = (|a'| + |b'| + |a' - b'|) / 2``,
    any pattern-free subset of the integer interval ``[0, L)``,
    ``L = (q - 1) // h + 1``, stays pattern-free modulo ``q`` (``q = p`` for roots, ``p - 1`` for units). The
    interval set is exact for ``L <= 40`` and greedy beyond. The result is
    certified before it is returned.
    """
    _check_pattern(a, b)
    if p < 3 or not sympy.isprime(p):
        raise InvalidArgument(f"p must be an odd prime, got {p}")
    if ambient not in ("roots", "units"):
        raise InvalidArgument("ambient must be 'roots' or 'units'")
    g = math.gcd(a, b)
    a1, b1 = a // g, b // g
    q = p if ambient == "roots" else p - 1
    h = (abs(a1) + abs(b1) + abs(a1 - b1)) // 2
    L = (q - 1) // h + 1
    inner = max_pattern_free(L, a1, b1, "exact" if L <= EXACT_LIMIT else "greedy")
    exps = inner.members
    info = {"interval_length": L, "reduced_pattern": [a1, b1], "inner_mode": inner.info.get("mode")}
    if ambient == "roots":
        members = sorted(exps)
    else:
        root = int(sympy.primitive_root(p))
        members = sorted(pow(root, e, p) for e in exps)
        info["primitive_root"] = root
        info["exponents"] = exps
    amb = Ambient(ambient, p)
    witness = pattern_free_check(members, amb, a, b)
    if witness is not None:
        raise InvalidArgument(f"construction failed certification at {witness}")
    info["certified"] = True
    return BehrendSet(amb, members, (a, b), info)


# -- correlation scans ----------------------------------------------------------------------------

@dataclass
class ScanResult:
    n: int
    pattern: tuple[int, int]
    counts: np.ndarray
    set_size: int
    kernel: str
    seconds: float
    moduli: tuple[int, ...] | None = None

    def to_csv(self) -> str:
        lines = ["d,count"]
        if self.moduli:
            coords = np.indices(self.moduli).reshape(len(self.moduli), -1).T
            lines += [f"{':'.join(map(str, c))},{int(v)}" for c, v in zip(coords, self.counts)]
        else:
            lines += [f"{d},{int(v)}" for d, v in enumerate(self.counts)]
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        return {"n": self.n, "pattern": list(self.pattern), "set_size": self.set_size,
                "kernel": self.kernel, "max_nontrivial": int(self.counts[1:].max()) if self.n > 1 else None,
                "min_nontrivial": int(self.counts[1:].min()) if self.n > 1 else None}


def triple_correlation_scan(A, a: int, b: int, kernel: str = "auto", threads: int = 1,
                            moduli=None) -> ScanResult:
    """``counts[d] = |{x : x, x + a d, x + b d in A}|`` for every ``d``.

    ``A`` is a boolean mask over ``Z/N`` (or over a product group when ``moduli``
    is given; that case uses the reference kernel).
    """
    mask = np.asarray(A, dtype=bool)
    t0 = time.perf_counter()
    if moduli is not None:
        moduli = tuple(int(m) for m in moduli)
        grid = mask.reshape(moduli)
        coords = np.indices(moduli).reshape(len(moduli), -1).T
        counts = np.empty(len(coords), dtype=np.int64)
        axes = tuple(range(len(moduli)))
        for i, d in enumerate(coords):
            ra = np.roll(grid, tuple(-(a * int(v)) for v in d), axis=axes)
            rb = np.roll(grid, tuple(-(b * int(v)) for v in d), axis=axes)
            counts[i] = np.count_nonzero(grid & ra & rb)
        return ScanResult(math.prod(moduli), (a, b), counts, int(mask.sum()), "naive",
                          time.perf_counter() - t0, moduli)
    n = len(mask)
    if n == 0:
        raise InvalidArgument("empty ambient")
    if kernel == "naive":
        counts = kernels.scan_counts_naive(mask, a, b)
        used = "naive"
    else:
        backend = None if kernel in ("auto", "bitset") else kernel
        words, shifted = kernels.shifted_tables(mask)
        counts = kernels.scan_counts(words, shifted, n, a, b, threads=threads, backend=backend)
        used = f"bitset-{backend or kernels.BACKEND}"
    return ScanResult(n, (a, b), counts, int(mask.sum()), used, time.perf_counter() - t0)


def popular_difference_report(scan: ScanResult, eps) -> dict:
    """Differences with ``counts[d] > (alpha^3 - eps) * N``, ``alpha = |A| / N`` (exact comparison)."""
    n = scan.n
    eps = Fraction(str(eps)) if isinstance(eps, float) else Fraction(eps)
    thr = (Fraction(scan.set_size, n) ** 3 - eps) * n
    # counts are integers: count > thr  <=>  count > floor(thr)
    cut = math.floor(thr)
    idx = np.flatnonzero(scan.counts > cut)
    return {
        "threshold": str(thr),
        "trivial": [0] if len(idx) and idx[0] == 0 else [],
        "popular": [int(d) for d in idx if d != 0],
    }


# -- syndetic thresholds --------------------------------------------------------------------------

@dataclass
class SyndeticThreshold:
    value: float
    open: bool
    window: tuple[int, ...]
    argmin_window: tuple[int, ...]

    def to_json(self) -> dict:
        return {"value": self.value, "open": self.open, "window": list(self.window),
                "argmin_window": list(self.argmin_window)}


def syndetic_threshold(values, F, wrap: bool = False) -> SyndeticThreshold:
    """Box-restricted synd-sup: the minimum over all side-``F`` windows of the window maximum.

    Every ``a`` strictly below the returned value has ``{v > a}`` meeting every
    window; the value itself does not (``open`` is always ``True``). With
    ``wrap`` the box is treated as a torus.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 0 or arr.size == 0:
        raise InvalidArgument("values must be a nonempty box")
    window = tuple(int(F) for _ in range(arr.ndim)) if np.isscalar(F) else tuple(int(f) for f in F)
    if len(window) != arr.ndim:
        raise InvalidArgument("window rank does not match the box")
    for w, s in zip(window, arr.shape):
        if w < 1:
            raise InvalidArgument("window size must be positive")
        if w > s:
            raise InvalidArgument(f"window {w} exceeds box side {s}")
    # origin -(w // 2) makes output cell i the max over [i, i + w)
    maxes = maximum_filter(arr, size=window, mode="wrap" if wrap else "nearest",
                           origin=tuple(-(w // 2) for w in window))
    if not wrap:
        sl = tuple(slice(0, s - w + 1) for s, w in zip(arr.shape, window))
        maxes = maxes[sl]
    flat = int(np.argmin(maxes))
    pos = np.unravel_index(flat, maxes.shape)
    return SyndeticThreshold(float(maxes[pos]), True, window, tuple(int(p) for p in pos))


# -- multiplicative counting ------------------------------------------------------------------------

def multiplicative_pattern_count(E, N: int, k: int, m: int) -> int:
    """``|{x : x, x m^k, x m^(k+1) in E}|`` for ``E`` inside ``{1..N}``."""
    if m < 2:
        raise InvalidArgument("m must be >= 2")
    if k < 0:
        raise InvalidArgument("k must be >= 0")
    top = 1
    for _ in range(k + 1):
        top *= m
        if top > N:
            return 0
    low = top // m
    arr = np.asarray(sorted(set(int(e) for e in E)), dtype=np.int64)
    if arr.size and (arr.min() < 1 or arr.max() > N):
        raise InvalidArgument("E must lie in {1..N}")
    mask = np.zeros(N + 1, dtype=bool)
    mask[arr] = True
    xs = arr[arr <= N // top]
    return int(np.count_nonzero(mask[xs * low] & mask[xs * top]))

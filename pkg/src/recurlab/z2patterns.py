"""Classification of 3-point matrix patterns ``{x, x + M1 n, x + M2 n}`` in Z^2.

All arithmetic is exact: matrices are tuples of Python ints and conjugates are
``Fraction`` valued. Inputs are limited to 31-bit entries so every internal
product stays inside 64 bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InternalConsistencyError, InvalidArgument

ENTRY_LIMIT = 1 << 31

SHAPES = ("FullKhintchine", "BehrendDecay", "RowLike", "ColumnLike", "Degenerate")

# (lower, upper) epdd bounds as printable exponents of alpha
BOUNDS = {
    "FullKhintchine": {"lower": "alpha^3", "upper": "alpha^3", "exact": True},
    "BehrendDecay": {"lower": None, "upper": "alpha^(c*log(1/alpha))", "exact": False},
    "RowLike": {"lower": "alpha^3", "upper": "alpha^3", "exact": True},
    "ColumnLike": {"lower": "alpha^4", "upper": "alpha^(4-o(1))", "exact": False,
                   "caveat": "the o(1) term has no closed form; only the interval is known"},
    "Degenerate": None,
}

BASIS = {
    (2, 2, 2): "finite-index Khintchine theorem for three finite-index maps",
    (2, 2, 1): "finite-index Khintchine theorem for two finite-index maps",
    (2, 1, 1): "Fubini property of uniform Cesaro limits",
    "commuting": "Behrend-type construction",
    "RowLike": "Fubini property of uniform Cesaro limits",
    "ColumnLike": "corner-type lower bound with a matching upper construction",
}


def _mat(M) -> tuple[tuple[int, int], tuple[int, int]]:
    try:
        rows = [[int(x) for x in row] for row in M]
        flat = [x for row in M for x in row]
    except TypeError as exc:
        raise InvalidArgument("matrix must be a 2x2 nested sequence") from exc
    if len(rows) != 2 or any(len(r) != 2 for r in rows):
        raise InvalidArgument("matrix must be 2x2")
    if any(int(x) != x for x in flat):
        raise InvalidArgument("matrix entries must be integers")
    if any(abs(x) >= ENTRY_LIMIT for row in rows for x in row):
        raise InvalidArgument("matrix entries must be below 2^31 in absolute value")
    return (rows[0][0], rows[0][1]), (rows[1][0], rows[1][1])


def parse_matrix(text: str):
    """``"a,b,c,d"`` -> ``((a, b), (c, d))``."""
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if len(parts) != 4:
        raise InvalidArgument(f"expected four comma-separated integers, got {text!r}")
    try:
        a, b, c, d = (int(p) for p in parts)
    except ValueError as exc:
        raise InvalidArgument(f"non-integer matrix entry in {text!r}") from exc
    return _mat(((a, b), (c, d)))


def mul(A, B):
    return tuple(tuple(sum(A[i][k] * B[k][j] for k in range(2)) for j in range(2)) for i in range(2))


def sub(A, B):
    return tuple(tuple(A[i][j] - B[i][j] for j in range(2)) for i in range(2))


def det(M) -> int:
    return M[0][0] * M[1][1] - M[0][1] * M[1][0]


def trace(M) -> int:
    return M[0][0] + M[1][1]


def transpose(M):
    return ((M[0][0], M[1][0]), (M[0][1], M[1][1]))


def inverse(M):
    dt = det(M)
    if dt == 0:
        raise InvalidArgument("singular matrix")
    return ((Fraction(M[1][1], dt), Fraction(-M[0][1], dt)),
            (Fraction(-M[1][0], dt), Fraction(M[0][0], dt)))


def rank(M) -> int:
    if det(M) != 0:
        return 2
    return 0 if all(x == 0 for row in M for x in row) else 1


def rank_signature(M1, M2) -> tuple[int, int, int]:
    """Ranks of ``M1``, ``M2``, ``M2 - M1`` sorted in decreasing order."""
    M1, M2 = _mat(M1), _mat(M2)
    return tuple(sorted((rank(M1), rank(M2), rank(sub(M2, M1))), reverse=True))


def commutes(M1, M2):
    """``(flag, [M1, M2])`` with the exact integer commutator."""
    M1, M2 = _mat(M1), _mat(M2)
    C = sub(mul(M1, M2), mul(M2, M1))
    return all(x == 0 for row in C for x in row), C


def finite_index(M):
    """Index of ``M(Z^2)`` in ``Z^2``: ``|det M|``, or ``math.inf`` when singular."""
    d = det(_mat(M))
    return abs(d) if d else math.inf


def _primitive(v):
    g = math.gcd(*v)
    v = tuple(x // g for x in v)
    first = next(x for x in v if x)
    return v if first > 0 else tuple(-x for x in v)


def diagonalize_rank1(M):
    """``(P, a)`` with ``M P = P diag(a, 0)``, or ``None`` when ``M`` is nilpotent.

    Columns of ``P``: a primitive vector spanning the image, then a primitive
    kernel vector.
    """
    M = _mat(M)
    if rank(M) != 1:
        raise InvalidArgument("diagonalize_rank1 needs a rank-1 matrix")
    a = trace(M)
    if a == 0:
        return None
    col = next(c for c in ((M[0][0], M[1][0]), (M[0][1], M[1][1])) if any(c))
    row = next(r for r in M if any(r))
    u = _primitive(col)
    k = _primitive((row[1], -row[0]))
    P = ((u[0], k[0]), (u[1], k[1]))
    if mul(M, P) != mul(P, ((a, 0), (0, 0))):
        raise InternalConsistencyError("eigenbasis identity failed", {"M": M, "P": P})
    return P, a


def conjugate(P, M):
    """``P^{-1} M P`` with rational entries."""
    Pi = inverse(P)
    MP = mul(M, P)
    return tuple(tuple(sum(Pi[i][k] * MP[k][j] for k in range(2)) for j in range(2)) for i in range(2))


@dataclass
class RowColWitness:
    label: str                 # "RowLike" | "ColumnLike"
    P: tuple
    a: int
    b: Fraction
    c: Fraction
    swapped: bool
    conjugated: tuple
    proof_trace: str

    def to_json(self) -> dict:
        return {"label": self.label, "P": [list(r) for r in self.P], "a": self.a,
                "b": str(self.b), "c": str(self.c), "swapped": self.swapped,
                "conjugated": [[str(x) for x in r] for r in self.conjugated]}


def rowcol_classify(M1, M2):
    """Row-like or column-like witness for a noncommuting ``(1,1,1)`` pair, else ``None``.

    With ``D = P^{-1} M1 P = diag(a, 0)`` and ``C = P^{-1} M2 P`` of rank one,
    ``det(C - D) = -a C[1][1]`` forces ``C[1][1] = 0``, and then ``det C = 0``
    forces ``C[0][1] C[1][0] = 0``. A zero second row is row-like, a zero
    second column is column-like; both zero would make the pair commute.
    ``M1`` is diagonalized when its trace is nonzero, otherwise ``M2`` (flagged
    ``swapped``).
    """
    M1, M2 = _mat(M1), _mat(M2)
    if rank_signature(M1, M2) != (1, 1, 1) or commutes(M1, M2)[0]:
        return None
    swapped = False
    diag = diagonalize_rank1(M1)
    other = M2
    if diag is None:
        diag = diagonalize_rank1(M2)
        other, swapped = M1, True
    if diag is None:
        raise InternalConsistencyError("both matrices nilpotent in a (1,1,1) noncommuting pair",
                                       {"M1": M1, "M2": M2})
    P, a = diag
    C = conjugate(P, other)
    steps = [f"P={list(map(list, P))}, a={a}: {'M2' if swapped else 'M1'} P = P diag(a,0)",
             f"C = P^-1 {'M1' if swapped else 'M2'} P = {[[str(x) for x in r] for r in C]}",
             "det(C - diag(a,0)) = -a*C[1][1] = 0 since rank(M2-M1) = 1"]
    if C[1][1] != 0:
        raise InternalConsistencyError("C[1][1] must vanish", {"C": C, "P": P})
    if C[1][0] == 0 and C[0][1] != 0:
        label, b = "RowLike", C[0][1]
        steps.append("second row of C is zero")
    elif C[0][1] == 0 and C[1][0] != 0:
        label, b = "ColumnLike", C[1][0]
        steps.append("second column of C is zero")
    else:
        raise InternalConsistencyError("conjugate is diagonal for a noncommuting pair", {"C": C, "P": P})
    return RowColWitness(label, P, a, b, C[0][0], swapped, C, "; ".join(steps))


def verify_witness(M1, M2, w: RowColWitness) -> bool:
    M1, M2 = _mat(M1), _mat(M2)
    first, other = (M2, M1) if w.swapped else (M1, M2)
    if det(w.P) == 0 or mul(first, w.P) != mul(w.P, ((w.a, 0), (0, 0))):
        return False
    C = conjugate(w.P, other)
    if w.label == "RowLike":
        return C[1][0] == 0 and C[1][1] == 0 and C[0][1] == w.b != 0 and C[0][0] == w.c
    return C[0][1] == 0 and C[1][1] == 0 and C[1][0] == w.b != 0 and C[0][0] == w.c


@dataclass
class EpddClass:
    signature: tuple[int, int, int]
    commuting: bool
    shape: str
    witness: RowColWitness | None = None
    degenerate_reason: str | None = None
    bounds: dict | None = field(default=None)
    table_row: dict | None = None
    proof_trace: str = ""

    def to_json(self) -> dict:
        return {
            "signature": list(self.signature),
            "commuting": self.commuting,
            "shape": self.shape,
            "witness": self.witness.to_json() if self.witness else None,
            "degenerate_reason": self.degenerate_reason,
            "bounds": self.bounds,
            "table_row": self.table_row,
            "proof_trace": self.proof_trace,
        }

    def text(self) -> str:
        if self.table_row is None:
            return f"r={self.signature}  degenerate ({self.degenerate_reason}); outside the table"
        row = self.table_row
        return (f"r={tuple(row['signature'])}  {row['condition']:<28} "
                f"epdd={row['epdd']:<24} basis: {row['basis']}")


def epdd_classify(M1, M2) -> EpddClass:
    M1, M2 = _mat(M1), _mat(M2)
    sig = rank_signature(M1, M2)
    comm, _ = commutes(M1, M2)
    if sig[-1] == 0:
        reason = "M1 = M2" if M1 == M2 else "a zero matrix"
        return EpddClass(sig, comm, "Degenerate", degenerate_reason=reason,
                         proof_trace=f"rank signature {sig} contains 0 ({reason})")
    trace_steps = [f"rank signature {sig}", f"commutator {'zero' if comm else 'nonzero'}"]
    witness = None
    if sig != (1, 1, 1):
        shape, condition, basis = "FullKhintchine", "-", BASIS[sig]
    elif comm:
        shape, condition, basis = "BehrendDecay", "[M1,M2] = 0", BASIS["commuting"]
    else:
        witness = rowcol_classify(M1, M2)
        shape = witness.label
        condition = "[M1,M2] != 0, " + ("row-like" if shape == "RowLike" else "column-like")
        basis = BASIS[shape]
        trace_steps.append(witness.proof_trace)
    bounds = BOUNDS[shape]
    epdd = bounds["upper"] if bounds["exact"] else (
        f"< {bounds['upper']}" if bounds["lower"] is None else f"[{bounds['lower']}, {bounds['upper']}]")
    row = {"signature": list(sig), "condition": condition, "epdd": epdd, "basis": basis}
    return EpddClass(sig, comm, shape, witness, None, dict(bounds), row, "; ".join(trace_steps))


def table_lookup(signature, commuting: bool, same_image: bool | None) -> str:
    """Table keyed by (signature, commuting, row/column); used as an independent check."""
    if 0 in signature:
        return "Degenerate"
    if tuple(signature) != (1, 1, 1):
        return "FullKhintchine"
    if commuting:
        return "BehrendDecay"
    return "RowLike" if same_image else "ColumnLike"

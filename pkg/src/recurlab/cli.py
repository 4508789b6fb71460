"""Command-line runner for the recurlab experiments.

Exit codes: 0 when every verdict passes, 2 when a verification fails,
1 on usage errors, 3 when a resource budget is exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
import warnings
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import InvalidArgument, RecurlabError, ResourceLimit

log = logging.getLogger("recurlab")

EXIT_OK, EXIT_USAGE, EXIT_FAIL, EXIT_RESOURCE = 0, 1, 2, 3
EXPERIMENTS = ("counterexample", "limit-formula", "example31", "example41", "density-scan",
               "behrend", "seminorm", "classify", "scan", "multiplicative-count")


class UsageError(RecurlabError):
    pass


# -- set ingestion ---------------------------------------------------------------------------

def parse_set(text: str, fmt: str, N: int | None = None, lo: int = 0) -> list[int]:
    """Parse ``lines`` or ``json`` text into a sorted duplicate-free list in ``[lo, N)``."""
    if fmt == "lines":
        values = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                values.append((int(line), lineno))
            except ValueError:
                raise InvalidArgument(f"line {lineno}: not an integer: {raw.strip()!r}") from None
    elif fmt == "json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidArgument(f"line {exc.lineno}: invalid JSON ({exc.msg})") from None
        if not isinstance(data, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in data):
            raise InvalidArgument("JSON set must be an array of integers")
        values = [(v, None) for v in data]
    else:
        raise InvalidArgument(f"unknown text format {fmt!r}")
    for v, lineno in values:
        if v < lo or (N is not None and v >= N):
            where = f"line {lineno}: " if lineno else ""
            bound = f"[{lo}, {N})" if N is not None else f">= {lo}"
            raise InvalidArgument(f"{where}value {v} is out of range {bound}")
    out = sorted({v for v, _ in values})
    if len(out) != len(values):
        warnings.warn(f"{len(values) - len(out)} duplicate entries removed", stacklevel=2)
    return out


def ingest_set(path, fmt: str = "lines", N: int | None = None, lo: int = 0) -> list[int]:
    """Read a point set from ``path`` (``lines``, ``json`` or ``bitset-binary``)."""
    path = Path(path)
    if fmt == "bitset-binary":
        if N is None:
            raise InvalidArgument("bitset-binary input needs the ambient size N")
        raw = np.frombuffer(path.read_bytes(), dtype=np.uint8)
        bits = np.unpackbits(raw, bitorder="little")
        if len(bits) < N:
            raise InvalidArgument(f"bitset holds {len(bits)} bits, ambient needs {N}")
        if np.any(bits[N:]):
            raise InvalidArgument(f"bit {int(np.flatnonzero(bits[N:])[0]) + N} is out of range [0, {N})")
        return [int(x) for x in np.flatnonzero(bits[:N]) if x >= lo]
    return parse_set(path.read_text(), fmt, N, lo)


def write_bitset(path, members, N: int):
    mask = np.zeros(N, dtype=bool)
    mask[np.asarray(members, dtype=np.int64)] = True
    Path(path).write_bytes(np.packbits(mask, bitorder="little").tobytes())


# -- reports -------------------------------------------------------------------------------------

def new_report(experiment: str, params: dict) -> dict:
    return {"experiment": experiment, "params": params, "results": {}, "verdicts": {},
            "provenance": {}, "table": None, "timing": {}}


def passed(report: dict) -> bool:
    return all(v["passed"] for v in report["verdicts"].values())


def verdict(report: dict, name: str, ok: bool, operation: str, detail=None):
    report["verdicts"][name] = {"passed": bool(ok), "detail": detail}
    report["provenance"][name] = operation


def strip_timing(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "timing"}


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def render_csv(report: dict) -> str:
    table = report.get("table")
    if not table:
        raise InvalidArgument(f"experiment {report['experiment']} has no table to write as CSV")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table["header"])
    w.writerows(table["rows"])
    return buf.getvalue()


def render_text(report: dict) -> str:
    lines = [f"experiment: {report['experiment']}"]
    for k, v in report["params"].items():
        lines.append(f"  {k} = {v}")
    for k, v in report["results"].items():
        if isinstance(v, (dict, list)):
            v = json.dumps(v, default=_json_default)
        lines.append(f"{k}: {v}")
    if report.get("text"):
        lines.append(report["text"])
    table = report.get("table")
    if table:
        rows = [table["header"]] + [[str(c) for c in r] for r in table["rows"]]
        widths = [max(len(str(r[i])) for r in rows) for i in range(len(table["header"]))]
        for r in rows:
            lines.append("  ".join(str(c).rjust(wd) for c, wd in zip(r, widths)))
    for name, v in report["verdicts"].items():
        lines.append(f"[{'PASS' if v['passed'] else 'FAIL'}] {name}" + (f": {v['detail']}" if v["detail"] else ""))
    return "\n".join(lines) + "\n"


def emit(report: dict, fmt: str = "json", path=None) -> str:
    """Render ``report`` as ``json``, ``csv`` or ``text``; write it to ``path`` if given."""
    renderers = {"json": render_json, "csv": render_csv, "text": render_text}
    if fmt not in renderers:
        raise InvalidArgument(f"unknown output format {fmt!r}")
    text = renderers[fmt](report)
    if path is not None:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise InvalidArgument(f"cannot write {path}: {exc.strerror}") from None
    return text


# -- helpers --------------------------------------------------------------------------------------

def _load_json_arg(value: str):
    p = Path(value)
    text = p.read_text() if p.exists() else value
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidArgument(f"invalid JSON ({exc.msg})") from None


def _frac(x) -> str:
    return str(Fraction(x))


def _multiplicative_set(p: int, a: int, b: int, source: str):
    from .combinatorics import Ambient, behrend_multiplicative, max_pattern_free, pattern_free_check

    if source == "behrend":
        return behrend_multiplicative(p, a, b).members
    if source == "exact":
        # exact optimum in the interval that avoids wraparound modulo p
        h = (abs(a) + abs(b) + abs(a - b)) // 2
        members = max_pattern_free((p - 1) // h + 1, a, b).members
        if pattern_free_check(members, Ambient("roots", p), a, b) is not None:
            raise InvalidArgument("exact set is not pattern-free modulo p")
        return members
    raise InvalidArgument(f"unknown set source {source!r}")


# -- experiments --------------------------------------------------------------------------------

def run_counterexample(args, report):
    from .analysis import density_scan
    from .groups import Homomorphism
    from .systems import CounterexampleParams, build_counterexample, build_nonergodic, verify_pth_identity

    p, d, a, b = args.p, args.d, args.a, args.b
    params = CounterexampleParams(p, d, True)
    bad = params.check_invariants()
    verdict(report, "parameter invariants", bad is None, "systems.CounterexampleParams.check_invariants", bad)
    system = build_counterexample(params)
    res = report["results"]
    res["points"] = system.size
    w = verify_pth_identity(system, reading="literal")
    verdict(report, "corrected action: T_pg(t,u) = (t, t^pg u)", w is None, "systems.verify_pth_identity", w)
    lifted = verify_pth_identity(system, reading="lifted")
    res["lifted_reading_witness"] = lifted
    raw = build_counterexample(CounterexampleParams(p, d, False))
    w_raw = verify_pth_identity(raw, reading="literal")
    binom = params.binom
    ok_raw = w_raw is not None and w_raw["discrepancy_eta_exponent"] == binom * sum(w_raw["g"]) % params.modulus
    res["uncorrected_witness"] = w_raw
    verdict(report, "uncorrected action fails by eta^C(p,2)", ok_raw, "systems.verify_pth_identity",
            {"expected_eta_exponent_per_unit": binom})

    B = _multiplicative_set(p, a, b, args.set_source)
    res["B"] = B
    target = Fraction(len(B), p * p)
    res["target_density"] = str(target)

    # X_p model: (Z/p)^d acting on C_p^d x C_p
    xp = build_nonergodic(p, d)
    A = [z * p + u for z in range(xp.Z.order) for u in B]
    rep = density_scan(xp, A, a, b)
    outside = rep.outside_degenerate()
    got = {_frac(Fraction(int(rep.counts[i]), rep.den)) for i in outside}
    res["xp_model"] = {"mu": str(rep.mu), "degenerate": rep.summary()["degenerate"], "densities_outside": sorted(got)}
    ok = rep.degenerate == [0] and got == {str(target)}
    verdict(report, "X_p model: density |B|/p^2 for all g != 0", ok, "analysis.density_scan",
            None if ok else res["xp_model"])

    # p^2 system: A = T x pi^{-1}(B), pattern (a p, b p)
    H = system.H.order
    Bt = [u for u in range(H) if u % p in set(B)]
    A2 = [z * H + u for z in range(system.Z.order) for u in Bt]
    G = system.G
    rep2 = density_scan(system, A2, Homomorphism.scalar(G, a * p), Homomorphism.scalar(G, b * p))
    pG = sorted(set(Homomorphism.scalar(G, p).index_map.tolist()))
    out2 = rep2.outside_degenerate()
    got2 = sorted({_frac(Fraction(int(rep2.counts[i]), rep2.den)) for i in out2})
    res["p2_system"] = {"mu": str(rep2.mu), "degenerate_count": len(rep2.degenerate), "pG_count": len(pG),
                        "densities_outside": got2}
    ok2 = rep2.degenerate == pG and got2 == [str(target)]
    verdict(report, "p^2 system: degenerate set is pG and density |B|/p^2 outside it", ok2,
            "analysis.density_scan", None if ok2 else {"degenerate_is_all_of_G": len(rep2.degenerate) == G.order})
    rows = []
    for gi in range(G.order):
        fr = Fraction(int(rep2.counts[gi]), rep2.den)
        rows.append([":".join(map(str, G.decode(gi).tolist())), fr.numerator, fr.denominator])
    report["table"] = {"header": ["g", "num", "den"], "rows": rows}


def _random_char(rng, skew):
    from .analysis import FunctionOnX
    coords = [int(rng.integers(n)) for n in skew.X.moduli]
    return FunctionOnX.character(skew, coords), coords


def run_limit_formula(args, report):
    from .cohomology import random_skew_product, verify_limit_formula

    rng = np.random.default_rng(args.seed)
    patterns = [(1, 2), (2, 3), (1, 3)]
    rows = []
    dev_ok = sel_ok = dec_ok = True
    for i in range(args.count):
        a, b = patterns[i % 3]
        skew = random_skew_product(rng)
        if skew.cocycle.validate() is not None:
            raise RecurlabError("random family produced an invalid cocycle")
        f1, c1 = _random_char(rng, skew)
        f2, c2 = _random_char(rng, skew)
        chk = verify_limit_formula(skew, f1, f2, a, b, mode=args.mode)
        dev_ok &= chk.passed
        sel_ok &= chk.selection_independent
        dec_ok &= chk.decomposes
        rows.append([i, skew.name, f"{a}:{b}", chk.deviation, chk.selection_independent, chk.decomposes,
                     chk.mackey.M_a.order, chk.mackey.M_b.order, chk.mackey.joint_order])
    report["table"] = {"header": ["instance", "system", "pattern", "deviation", "selection_independent",
                                  "decomposes", "M_a", "M_b", "M_joint"], "rows": rows}
    verdict(report, "limit formula deviation 0", dev_ok, "cohomology.verify_limit_formula")
    verdict(report, "psi selection independence", sel_ok, "cohomology.psi_tables")
    verdict(report, "Mackey group decomposes as M_a x M_b", dec_ok, "cohomology.mackey_group")


def run_example31(args, report):
    from .analysis import FunctionOnX, average_product_json, uc_average_product
    from .systems import build_example31

    system = build_example31(args.d)
    d = args.d
    f = FunctionOnX.character(system, [0] * d + [1])
    rows = []
    worst = 0.0
    exact_zero = True
    for ci in range(system.Z.order):
        coords = system.Z.decode(ci).tolist()
        f1 = FunctionOnX.character(system, coords + [0])
        avg = uc_average_product(system, [f1, f], [1, 2])
        info = average_product_json(avg)
        worst = max(worst, info["sup_norm"])
        exact_zero &= info["is_zero"]
        rows.append([":".join(map(str, coords)), info["is_zero"], f"{info['sup_norm']:.3g}"])
    report["results"]["max_sup_norm"] = worst
    report["table"] = {"header": ["f1_character", "average_is_zero", "sup_norm"], "rows": rows}
    verdict(report, "average of T_g f1 T_2g f is zero for every G-eigenfunction f1",
            exact_zero and worst < 1e-12, "analysis.uc_average_product",
            None if exact_zero else "nonzero for "
            + ", ".join(r[0] for r in rows if not r[1]))


def run_example41(args, report):
    from .analysis import (EigenData, FunctionOnX, average_product_json, eigenvalue_extends, is_eigenfunction,
                           subgroup_members, uc_average_product)
    from .systems import build_example41

    d = args.d
    ex = build_example41(d)
    w = ex.check_equivariance()
    verdict(report, "factor map is equivariant", w is None, "systems.Example41.check_equivariance", w)
    fac = ex.factor
    f1 = FunctionOnX.coordinate(fac, d)
    f = FunctionOnX.coordinate(fac, d + 1)
    avg = uc_average_product(fac, [f1, f], [1, 2])
    target = f1 * f
    report["results"]["average"] = average_product_json(avg)
    verdict(report, "average equals x_inf * y", avg.equals(target), "analysis.uc_average_product")
    # y on the extension is a 2G-eigenfunction with eigenvalue 2g -> (-1)^(sum g)
    ext = ex.extension
    G = ext.G
    y = EigenData(np.arange(ext.size), G.character([1] * d), FunctionOnX.coordinate(ext, d + 1),
                  subgroup_members(ext, 2))
    verdict(report, "y is a 2G-eigenfunction", is_eigenfunction(ext, y), "analysis.is_eigenfunction")
    found = eigenvalue_extends(ext, y)
    report["results"]["extension_character"] = None if found is None else list(found.character.coords)
    verdict(report, "eigenvalue of y under 2G extends to G", found is not None, "analysis.eigenvalue_extends")


def run_density_scan(args, report):
    from .analysis import density_scan
    from .systems import system_from_spec

    system = system_from_spec(_load_json_arg(args.system))
    A = ingest_set(args.set, args.set_format, system.size)
    rep = density_scan(system, A, args.a, args.b)
    report["results"] = {"system": system.name, **rep.summary(args.eps)}
    above = rep.above(args.eps)
    report["results"]["above"] = [":".join(map(str, system.G.decode(i).tolist())) for i in above]
    rows = []
    for i, c in enumerate(rep.counts):
        fr = Fraction(int(c), rep.den)
        rows.append([":".join(map(str, system.G.decode(i).tolist())), fr.numerator, fr.denominator])
    report["table"] = {"header": ["g", "num", "den"], "rows": rows}


def run_behrend(args, report):
    from .combinatorics import behrend_additive, behrend_multiplicative, max_pattern_free, pattern_free_check

    if args.kind == "additive":
        need(args, "N")
        bs = behrend_additive(args.N)
    elif args.kind in ("exact", "greedy"):
        need(args, "N")
        bs = max_pattern_free(args.N, args.a, args.b, args.kind)
    else:
        need(args, "p")
        bs = behrend_multiplicative(args.p, args.a, args.b, args.ambient)
    w = pattern_free_check(bs.members, bs.ambient, *bs.pattern)
    report["results"] = bs.to_json()
    verdict(report, "pattern-free certificate", w is None, "combinatorics.pattern_free_check", w)


def run_seminorm(args, report):
    from .analysis import FunctionOnX, ghk_seminorm
    from .systems import system_from_spec

    system = system_from_spec(_load_json_arg(args.system))
    if args.character is not None:
        coords = [int(x) for x in args.character.split(",")]
        f = FunctionOnX.character(system, coords)
    elif args.set is not None:
        f = FunctionOnX.indicator(system, ingest_set(args.set, args.set_format, system.size))
    else:
        f = FunctionOnX.constant(system)
    vals = [ghk_seminorm(system, f, args.subgroup, k) for k in range(1, args.k + 1)]
    report["results"] = {"system": system.name, "seminorms": {f"U{k}": v for k, v in enumerate(vals, 1)}}
    mono = all(vals[i] <= vals[i + 1] + 1e-9 for i in range(len(vals) - 1))
    verdict(report, "U^1 <= U^2 <= ... (tolerance 1e-9)", mono, "analysis.ghk_seminorm")


def run_classify(args, report):
    from .z2patterns import epdd_classify, parse_matrix, verify_witness

    M1, M2 = parse_matrix(args.m1), parse_matrix(args.m2)
    cls = epdd_classify(M1, M2)
    report["results"] = cls.to_json()
    report["text"] = cls.text()
    if cls.witness is not None:
        verdict(report, "witness identities", verify_witness(M1, M2, cls.witness), "z2patterns.rowcol_classify")


def run_scan(args, report):
    from .combinatorics import popular_difference_report, triple_correlation_scan

    need(args, "N")
    members = ingest_set(args.set, args.set_format, args.N)
    mask = np.zeros(args.N, dtype=bool)
    mask[members] = True
    scan = triple_correlation_scan(mask, args.a, args.b, kernel=args.kernel, threads=args.threads)
    report["results"] = {**scan.summary(), "popular": popular_difference_report(scan, args.eps)}
    report["timing"]["scan_seconds"] = scan.seconds
    report["table"] = {"header": ["d", "count"], "rows": [[d, int(c)] for d, c in enumerate(scan.counts)]}
    ok = scan.counts[0] == scan.set_size and bool(np.all(scan.counts <= scan.set_size))
    verdict(report, "counts[0] = |A| and counts <= |A|", ok, "combinatorics.triple_correlation_scan")


def run_multiplicative_count(args, report):
    from .combinatorics import multiplicative_pattern_count

    need(args, "N")
    E = ingest_set(args.set, args.set_format, args.N + 1, lo=1)
    report["results"] = {"count": multiplicative_pattern_count(E, args.N, args.k, args.m), "set_size": len(E)}


RUNNERS = {
    "counterexample": run_counterexample,
    "limit-formula": run_limit_formula,
    "example31": run_example31,
    "example41": run_example41,
    "density-scan": run_density_scan,
    "behrend": run_behrend,
    "seminorm": run_seminorm,
    "classify": run_classify,
    "scan": run_scan,
    "multiplicative-count": run_multiplicative_count,
}


def need(args, name):
    if getattr(args, name, None) is None:
        raise UsageError(f"--{name} is required for {args.experiment}")


# -- argument parsing -------------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--threads", type=_positive, default=1, help="worker cap for parallel kernels")
    common.add_argument("--budget", type=_positive, help="table-entry budget (default 2^24 or RECURLAB_BUDGET)")
    common.add_argument("--no-timing", action="store_true", help="omit timing fields")

    parser = _Parser(prog="recurlab", description="Finite-model multiple recurrence experiments.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="experiment", required=True, parser_class=_Parser)

    def add(name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text)

    def set_args(sp, required=True):
        sp.add_argument("--set", required=required, help="point set file")
        sp.add_argument("--set-format", choices=("lines", "json", "bitset-binary"), default="lines")

    sp = add("counterexample", "p-th power identity and density tables for the p^2 system")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--d", type=int, default=1)
    sp.add_argument("--a", type=int, default=1)
    sp.add_argument("--b", type=int, default=2)
    sp.add_argument("--set-source", choices=("behrend", "exact"), default="behrend")

    sp = add("limit-formula", "two-term limit formula on seeded random skew products")
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--count", type=_positive, default=24)
    sp.add_argument("--mode", choices=("product", "joint"), default="product")

    sp = add("example31", "average of T_g f1 T_2g f on the truncated C4-odometer extension")
    sp.add_argument("--d", type=_positive, default=1)

    sp = add("example41", "average and eigenvalue extension on the truncated square-root extension")
    sp.add_argument("--d", type=_positive, default=1)

    sp = add("density-scan", "exact triple-intersection densities over the acting group")
    sp.add_argument("--system", required=True, help="JSON system spec or path to one")
    set_args(sp)
    sp.add_argument("--a", type=int, default=1)
    sp.add_argument("--b", type=int, default=2)
    sp.add_argument("--eps", type=Fraction, default=Fraction(1, 100))

    sp = add("behrend", "pattern-free set constructions")
    sp.add_argument("--kind", choices=("additive", "exact", "greedy", "multiplicative"), default="additive")
    sp.add_argument("--N", type=int)
    sp.add_argument("--p", type=int)
    sp.add_argument("--a", type=int, default=1)
    sp.add_argument("--b", type=int, default=2)
    sp.add_argument("--ambient", choices=("roots", "units"), default="roots")

    sp = add("seminorm", "Gowers-Host-Kra seminorms of a function")
    sp.add_argument("--system", required=True)
    sp.add_argument("--k", type=int, choices=(1, 2, 3), default=3)
    sp.add_argument("--character", help="comma-separated character coordinates on the point group")
    set_args(sp, required=False)
    sp.add_argument("--subgroup", type=int, help="use the subgroup cG for this scalar c")

    sp = add("classify", "epdd class of a 2x2 matrix pattern")
    sp.add_argument("--m1", required=True, help="a,b,c,d row-major")
    sp.add_argument("--m2", required=True)

    sp = add("scan", "triple-correlation scan over Z/N")
    set_args(sp)
    sp.add_argument("--N", type=int)
    sp.add_argument("--a", type=int, default=1)
    sp.add_argument("--b", type=int, default=2)
    sp.add_argument("--kernel", choices=("auto", "bitset", "compiled", "numpy", "naive"), default="auto")
    sp.add_argument("--eps", type=Fraction, default=Fraction(1, 100))

    sp = add("multiplicative-count", "count x with x, x m^k, x m^(k+1) in E")
    set_args(sp)
    sp.add_argument("--N", type=int)
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--m", type=int, default=2)
    return parser


def _params(args) -> dict:
    skip = {"experiment", "format", "output", "verbose", "no_timing"}
    return {k: (str(v) if isinstance(v, Fraction) else v) for k, v in vars(args).items() if k not in skip}


def run(args) -> tuple[dict, int]:
    """Run one parsed experiment; returns ``(report, exit_code)``."""
    if args.budget is not None:
        os.environ["RECURLAB_BUDGET"] = str(args.budget)
    report = new_report(args.experiment, _params(args))
    t0 = time.perf_counter()
    RUNNERS[args.experiment](args, report)
    report["timing"]["seconds"] = time.perf_counter() - t0
    if args.no_timing:
        report.pop("timing")
    return report, EXIT_OK if passed(report) else EXIT_FAIL


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        report, code = run(args)
        text = emit(report, args.format, args.output)
    except ResourceLimit as exc:
        print(f"recurlab: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (UsageError, InvalidArgument, FileNotFoundError) as exc:
        print(f"recurlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.output is None:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

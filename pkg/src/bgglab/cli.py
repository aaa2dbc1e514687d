"""Experiment runner: reproducible reports and verification suites.

Every report is a flat table (CSV by default, JSON on request) whose first
line is a ``#``-prefixed JSON header carrying the artifact version and a hash
of the run configuration; outputs contain no timestamps or machine state, so
identical configurations produce byte-identical files.  Exit codes: 0 ok,
2 usage, 3 capacity (the requested truncation cannot hold the computation),
4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from . import bgg, overlaps, principal
from .gtcore import (
    CapacityError,
    InvalidLabelError,
    Irrep,
    RationalOp,
    check_label,
    commutator,
    get_irrep,
    weyl_dim,
)

_EXIT_USAGE = 2
_EXIT_CAPACITY = 3
_EXIT_VERIFY = 4


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    if isinstance(value, tuple):
        return ",".join(str(x) for x in value)
    return str(value)


def _config_hash(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _header(args, command: str, params: dict) -> dict:
    # threads and output paths are execution details, not value-determining
    # configuration, so they stay out of the hash.
    config = {
        "command": command,
        "format": args.format,
        "span": getattr(args, "span", None),
        "tol_double": args.tol_double,
        **params,
    }
    return {
        "artifact": f"bgglab {__version__}",
        "command": command,
        "config": _config_hash(config),
    }


def _emit(args, command: str, params: dict, fields: list[str], rows: list[tuple]):
    header = _header(args, command, params)
    if args.format == "json":
        doc = {
            "header": header,
            "columns": fields,
            "rows": [[_fmt(v) for v in row] for row in rows],
        }
        text = json.dumps(doc, sort_keys=True, indent=1) + "\n"
    else:
        buf = io.StringIO()
        buf.write("# " + json.dumps(header, sort_keys=True) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(fields)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
        text = buf.getvalue()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if getattr(args, "plot", False):
        _render_plot(args, command, fields, rows)


def _render_plot(args, command: str, fields: list[str], rows: list[tuple]):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = os.path.splitext(args.out)[0] + ".png"
    fig, ax = plt.subplots(figsize=(6, 4))
    if command == "rep":
        mults = [r[2] for r in rows if r[0] == "weight"]
        if mults:
            ax.bar(range(len(mults)), mults)
            ax.set_xlabel("weight (enumeration order)")
            ax.set_ylabel("multiplicity")
        else:
            dims = [r[2] for r in rows if r[0] == "dim"]
            ax.bar([0], dims)
            ax.set_ylabel("dimension")
    elif command == "overlap":
        ks = sorted({r[1] for r in rows})
        for k in ks:
            js = [r[0] for r in rows if r[1] == k]
            err = [abs(r[2] - r[3]) + 1e-300 for r in rows if r[1] == k]
            ax.semilogy(js, err, label=f"k={k}")
        ax.set_xlabel("j")
        ax.set_ylabel("|a - b|")
        ax.legend()
    elif command == "limit":
        ms = [r[0] for r in rows]
        ax.plot(ms, [r[2] for r in rows], "o-", label="pairing")
        if rows:
            ax.axhline(rows[0][3], color="k", ls="--", label="limit")
        ax.set_xscale("log")
        ax.set_xlabel("m")
        ax.legend()
    elif command == "tridiag":
        for band in sorted({abs(r[1] - r[2]) for r in rows}):
            pts = [(r[1], r[3]) for r in rows if abs(r[1] - r[2]) == band]
            ax.semilogy([p[0] for p in pts], [max(p[1], 1e-300) for p in pts],
                        "o", label=f"|l-m|={band}")
        ax.set_xlabel("l")
        ax.set_ylabel("block norm")
        ax.legend()
    elif command == "index":
        lams = sorted({r[0] for r in rows})
        pis = sorted({r[1] for r in rows})
        grid = np.zeros((len(lams), len(pis)))
        for lam, pi, val in rows:
            grid[lams.index(lam), pis.index(pi)] = val
        ax.imshow(grid, aspect="auto", cmap="Greys")
        ax.set_xlabel("pi")
        ax.set_ylabel("lambda")
    elif command == "defect":
        labels = [str(r[2]) for r in rows]
        ax.bar(range(len(rows)), [r[3] for r in rows])
        ax.set_xticks(range(len(rows)), labels, rotation=90, fontsize=6)
        ax.set_ylabel("max defect string")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def _parse_label(text: str) -> tuple[int, int, int]:
    parts = text.split(",")
    if len(parts) != 3:
        raise InvalidLabelError(f"expected three comma-separated integers, got {text!r}")
    try:
        return tuple(int(p) for p in parts)
    except ValueError as exc:
        raise InvalidLabelError(str(exc)) from None


def _map_tasks(fn, items, threads: int):
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


# ---------------------------------------------------------------------------
# report commands
# ---------------------------------------------------------------------------


def cmd_rep(args) -> int:
    label = check_label(_parse_label(args.label))
    rep = get_irrep(label, cache_dir=args.cache_dir) if args.cache_dir else Irrep(label)
    rows = [("dim", "", rep.dim)]
    if args.weights:
        mults = rep.weight_multiplicities()
        for w in sorted(mults):
            rows.append(("weight", _fmt(w), mults[w]))
    if args.strings:
        deltas = {}
        for p in rep.patterns:
            if p[5] == p[4]:  # one entry per string: lowest position in c
                deltas[p[3] - p[4]] = deltas.get(p[3] - p[4], 0) + 1
        for d in sorted(deltas):
            rows.append(("string", str(d), deltas[d]))
    _emit(args, "rep", {"label": label, "weights": args.weights, "strings": args.strings},
          ["field", "key", "value"], rows)
    return 0


def cmd_overlap(args) -> int:
    table = overlaps.overlaps_recurrence(args.m, args.kmax)
    rows = []
    for k in range(args.kmax + 1):
        for j in range(args.m + 1):
            rows.append((j, k, table.a(j, k), overlaps.legendre_b(args.m, j, k)))
    params = {"m": args.m, "kmax": args.kmax, "check_oracle": args.check_oracle}
    _emit(args, "overlap", params, ["j", "k", "a", "b"], rows)
    if args.check_oracle:
        oracle = overlaps.overlaps_oracle(args.m)
        delta = float(np.max(np.abs(table.table - oracle.table[:, : args.kmax + 1])))
        if delta >= 1e-10:
            record = {"check": "overlap_oracle", "max_delta": _fmt(delta), "tolerance": "1e-10"}
            sys.stderr.write(json.dumps(record, sort_keys=True) + "\n")
            return _EXIT_VERIFY
    return 0


def cmd_limit(args) -> int:
    ms = sorted(int(p) for p in args.m.split(","))
    lim = overlaps.pairing_limit(args.k)

    def row(m):
        val = overlaps.phase_pairing(m, args.k)
        return (m, args.k, val, lim, abs(val - lim))

    rows = _map_tasks(row, ms, args.threads)
    _emit(args, "limit", {"k": args.k, "m": ms}, ["m", "k", "pairing", "limit", "delta"], rows)
    return 0


def cmd_tridiag(args) -> int:
    mu = _parse_label(args.mu)
    if not principal.scan_labels(mu, args.span):
        raise CapacityError(f"truncation span {args.span} has no labels for mu = {mu}")
    scan = principal.tridiag_scan(mu, args.span)
    rows = [(r.label, r.l, r.m, r.norm) for r in scan]
    _emit(args, "tridiag", {"mu": mu, "span": args.span},
          ["label", "l", "m", "norm"], rows)
    return 0


def cmd_index(args) -> int:
    lams = []
    for p in range(args.lambda_max + 1):
        for q in range(args.lambda_max + 1):
            lams.append((p + q, q, 0))
    lams = sorted(set(lams))
    rows = []
    for lam in lams:
        for pi in _dominant_scan(sum(lam), args.pi_span):
            rows.append((lam, pi, bgg.alternating_multiplicity(lam, pi)))
    _emit(args, "index", {"lambda_max": args.lambda_max, "pi_span": args.pi_span},
          ["lambda", "pi", "alt_mult"], rows)
    return 0


def cmd_defect(args) -> int:
    lam = check_label(_parse_label(args.lam))
    edges = [e for e in bgg.WEYL_EDGES if e.label != "rho"]
    rows = []
    for e in edges:
        for pi in _dominant_scan(-sum(lam), args.span):
            report = bgg.bgg_defect(lam, (e.w, e.wp), pi)
            top = max(report.support) if report.support else -1
            rows.append((lam, f"{e.w}->{e.wp}", pi, top, report.threshold))
    _emit(args, "defect", {"lambda": lam, "span": args.span},
          ["lambda", "edge", "pi", "defect_max_string", "threshold"], rows)
    return 0


def _dominant_scan(total: int, max_span: int) -> list[tuple[int, int, int]]:
    out = []
    for m1 in range(-(-total // 3), (total + 2 * max_span) // 3 + 1):
        for m3 in range(m1 - max_span, m1 + 1):
            m2 = total - m1 - m3
            if m1 >= m2 >= m3 and m1 - m3 <= max_span:
                out.append((m1, m2, m3))
    return sorted(out)


# ---------------------------------------------------------------------------
# verification suites
# ---------------------------------------------------------------------------


def _check(name, ok, value=None, tolerance=None, skipped=False):
    return {
        "name": name,
        "status": "skip" if skipped else ("pass" if ok else "fail"),
        "value": None if value is None else float(f"{value:.6e}"),
        "tolerance": tolerance,
    }


def _suite_gt(span: int, cache_dir, threads: int) -> list[dict]:
    labels = [(m1, m2, 0) for m1 in range(span + 1) for m2 in range(m1 + 1)]

    def label_ok(label):
        rep = Irrep(label)
        if rep.dim != weyl_dim(label):
            return False
        x1, x2 = rep.op("X1"), rep.op("X2")
        y1, y2 = rep.op("X1s"), rep.op("X2s")
        h1, h2 = rep.op("H1"), rep.op("H2")
        two = RationalOp(x1.shape)
        pairs = [
            (commutator(x1, y1), h1),
            (commutator(x2, y2), h2),
            (commutator(x1, y2), two),
            (commutator(x2, y1), two),
            (commutator(h1, x1), x1 + x1),
            (commutator(h2, x2), x2 + x2),
            (commutator(h1, x2), -x2),
            (commutator(h2, x1), -x1),
            (commutator(x1, commutator(x1, x2)), two),
            (commutator(x2, commutator(x2, x1)), two),
        ]
        if any(lhs != rhs for lhs, rhs in pairs):
            return False
        for x in ("X1", "X2"):
            if not np.array_equal(rep.normalized(x + "s"), rep.normalized(x).T):
                return False
        return True

    results = _map_tasks(label_ok, labels, threads)
    checks = [_check("gt_sl2_exact", all(results), value=float(len(labels)), tolerance="0")]
    probe = (min(2, span), min(1, span), 0)
    fresh = Irrep(probe)
    if cache_dir:
        cached = get_irrep(probe, cache_dir=cache_dir)
    else:
        with tempfile.TemporaryDirectory() as tmp:
            get_irrep(probe, cache_dir=tmp)  # writes
            cached = get_irrep(probe, cache_dir=tmp)  # reads back
    same = cached.patterns == fresh.patterns and cached.normsq == fresh.normsq
    checks.append(_check("gt_cache_roundtrip", same, tolerance="0"))
    return checks


def _suite_overlaps(span: int, threads: int) -> list[dict]:
    m_oracle = 40 if span >= 6 else max(4, 2 * span)
    m_big = 2000 if span >= 6 else max(50, 100 * span)
    table = overlaps.overlaps_recurrence(m_oracle, m_oracle)
    oracle = overlaps.overlaps_oracle(m_oracle)
    delta = float(np.max(np.abs(table.table - oracle.table)))
    checks = [_check("overlap_oracle", delta < 1e-10, value=delta, tolerance="1e-10")]

    def pairing_gap(k):
        return abs(overlaps.phase_pairing(m_big, k) - overlaps.pairing_limit(k))

    gaps = _map_tasks(pairing_gap, [1, 2, 3, 4, 5], threads)
    checks.append(_check("overlap_pairing_limit", max(gaps) < 1e-2,
                         value=max(gaps), tolerance="1e-2"))
    m_tail = min(500, m_big)
    worst = max(
        overlaps.tail_mass(m_tail, l) - 1.0 / (2 * l + 1) ** 2 for l in range(1, 11)
    )
    checks.append(_check("overlap_tail_mass", worst <= 0.01, value=worst, tolerance="0.01"))
    return checks


def _suite_principal(span: int, tol_double: float, threads: int) -> list[dict]:
    reach = 1 if span < 4 else (2 if span < 6 else 3)
    mus = [
        (a, b, c)
        for a in range(reach, -reach - 1, -1)
        for b in range(a, -reach - 1, -1)
        for c in range(b, -reach - 1, -1)
    ]

    def far_and_ratio(mu):
        far, ratio = 0.0, 0.0
        for row in principal.tridiag_scan(mu, span):
            if abs(row.l - row.m) > 2:
                far = max(far, row.norm)
            elif abs(row.l - row.m) == 2:
                ratio = max(ratio, row.norm / (row.l + 1))
        return far, ratio

    scans = _map_tasks(far_and_ratio, mus, threads)
    far = max(s[0] for s in scans)
    ratio = max(s[1] for s in scans)
    checks = [
        _check("principal_far_bands", far < tol_double, value=far, tolerance=_fmt(tol_double)),
        _check("principal_band2_linear", ratio < 2.0, value=ratio, tolerance="2.0"),
    ]
    if span >= 4:
        cases = [((1, 0, 0), 1, 1), ((2, 0, 0), 2, 1), ((0, 1, 0), 1, 2)]
        if span >= 6:
            cases.append(((3, 0, 0), 3, 1))
        worst = max(
            principal.intertwiner_residual(mu, n=n, i=i, max_span=span)
            for mu, n, i in cases
        )
        checks.append(_check("principal_intertwiner", worst < 1e-7,
                             value=worst, tolerance="1e-7"))
    else:
        checks.append(_check("principal_intertwiner", True, skipped=True))
    return checks


def _suite_bgg(span: int, threads: int) -> list[dict]:
    checks = []
    ok_graph = len(bgg.WEYL_EDGES) == 8 and all(
        (bgg.WEYL_LENGTH[e.w] + bgg.WEYL_LENGTH[e.wp]) % 2 == 1 for e in bgg.WEYL_EDGES
    )
    checks.append(_check("bgg_graph_odd_grading", ok_graph, tolerance="0"))

    lams = [(0, 0, 0), (1, 0, 0), (1, 1, 0)]
    ok_index = True
    count = 0
    for lam in lams:
        for pi in _dominant_scan(sum(lam), span):
            expected = 1 if pi == lam else 0
            ok_index &= bgg.alternating_multiplicity(lam, pi) == expected
            count += 1
    checks.append(_check("bgg_index_delta", ok_index, value=float(count), tolerance="0"))

    ok_defect = True
    for lam, edge in [((0, 0, 0), ("1", "s1")), ((0, 0, 0), ("1", "s2"))]:
        i, n, _ = bgg.bgg_edge_power(lam, edge)
        ws = bgg.shifted_action(edge[0], lam)
        h = -(ws[0] - ws[1]) if i == 1 else -(ws[1] - ws[2])
        for pi in _dominant_scan(-sum(lam), span):
            report = bgg.bgg_defect(lam, edge, pi)
            predicted = tuple(
                d for d in sorted(report.string_norms) if abs(h) <= d < h + 2 * n
            )
            ok_defect &= report.support == predicted
    checks.append(_check("bgg_defect_support", ok_defect, tolerance="0"))

    reps = _dominant_scan(0, span)
    braids = _map_tasks(lambda r: bgg.braid_residual((1, 0, -1), r), reps, threads)
    worst = max(braids)
    checks.append(_check("bgg_braid_exact", worst < 1e-12, value=worst, tolerance="1e-12"))

    big = (span, 0, -span)
    vals = [bgg.hexagon_residual((0, 0, 0), big, t) for t in range(0, 2 * span + 1, 2)]
    ok_hex = all(a >= b - 1e-12 for a, b in zip(vals, vals[1:])) and vals[-1] == 0.0
    checks.append(_check("bgg_hexagon_decay", ok_hex, value=vals[0], tolerance="monotone"))

    cov = [
        bgg.f_g_covariance_residual((0, 0, 0), ("1", "s1"), t, max_span=span)
        for t in (0, 2, 6, 10)
    ]
    ok_cov = all(a >= b - 1e-12 for a, b in zip(cov, cov[1:])) and cov[-1] < 1e-6
    if span >= 4:
        ok_cov &= cov[0] > 0.5
    checks.append(_check("bgg_covariance_decay", ok_cov, value=cov[0], tolerance="1e-6"))
    return checks


def cmd_verify(args) -> int:
    span = args.span
    suites = ["gt", "overlaps", "principal", "bgg"] if args.suite == "all" else [args.suite]
    report = {}
    for suite in suites:
        if suite == "gt":
            report["gt"] = _suite_gt(span, args.cache_dir, args.threads)
        elif suite == "overlaps":
            report["overlaps"] = _suite_overlaps(span, args.threads)
        elif suite == "principal":
            report["principal"] = _suite_principal(span, args.tol_double, args.threads)
        elif suite == "bgg":
            report["bgg"] = _suite_bgg(span, args.threads)
    failures = sum(
        1 for checks in report.values() for c in checks if c["status"] == "fail"
    )
    doc = {
        "header": _header(args, "verify", {"suite": args.suite}),
        "suites": report,
        "failures": failures,
    }
    text = json.dumps(doc, sort_keys=True, indent=1) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return _EXIT_VERIFY if failures else 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bgg-lab",
        description="reports and verification for the SU(3) harmonic calculus",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cache-dir", default=None, help="irrep cache directory")
    common.add_argument("--span", type=int, default=6, help="bound on m1 - m3")
    common.add_argument("--tol-double", type=float, default=1e-8)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--plot", action="store_true",
                        help="also render a PNG next to --out")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rep", parents=[common], help="irrep summary")
    p.add_argument("label", help="m1,m2,m3")
    p.add_argument("--weights", action="store_true")
    p.add_argument("--strings", action="store_true")
    p.set_defaults(fn=cmd_rep)

    p = sub.add_parser("overlap", parents=[common], help="overlap coefficient table")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--kmax", type=int, default=5)
    p.add_argument("--check-oracle", action="store_true")
    p.set_defaults(fn=cmd_overlap)

    p = sub.add_parser("limit", parents=[common], help="pairing limit schedule")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", required=True, help="comma-separated m schedule")
    p.set_defaults(fn=cmd_limit)

    p = sub.add_parser("tridiag", parents=[common], help="split-Cartan band norms")
    p.add_argument("--mu", required=True, help="mu1,mu2,mu3")
    p.set_defaults(fn=cmd_tridiag)

    p = sub.add_parser("index", parents=[common], help="alternating multiplicity table")
    p.add_argument("--lambda-max", type=int, default=2)
    p.add_argument("--pi-span", type=int, default=6)
    p.set_defaults(fn=cmd_index)

    p = sub.add_parser("defect", parents=[common], help="edge defect support report")
    p.add_argument("--lambda", dest="lam", required=True, help="l1,l2,l3")
    p.set_defaults(fn=cmd_defect)

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("suite", choices=("all", "gt", "overlaps", "principal", "bgg"))
    p.set_defaults(fn=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.plot and not args.out:
        parser.error("--plot requires --out")
    try:
        return args.fn(args)
    except InvalidLabelError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return _EXIT_USAGE
    except CapacityError as exc:
        sys.stderr.write(f"capacity: {exc}\n")
        return _EXIT_CAPACITY


if __name__ == "__main__":
    sys.exit(main())

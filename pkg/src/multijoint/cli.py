"""Command-line harness: JSON configs in, canonical JSON/CSV reports out.

Exit status is 0 when every asserted check passes, 2 when a handicap
search exhausts its budget, and 1 on errors or failed checks.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Any

from .factorization import (
    FactorisationTable,
    build_s,
    corollary4_certificate,
    extend_to_grassmannian,
    lambda_sweep,
    vanishing_certificate,
    verify_multijoint_inequality,
    verify_theorem_2b,
)
from .finite_field import is_prime
from .geometry import (
    DEFAULT_PLANE_CAP,
    AffinePlane,
    Configuration,
    GeometryError,
    canonicalize_plane,
    connected_components,
    enumerate_planes,
)
from .handicap_search import Instance, WeightFunction, brute_force_handicap_oracle, search_good_handicap
from .linalg import format_rational, parse_rational

COMMANDS = ("detect", "factorize", "verify", "sweep", "certify", "oracle", "grassmann")
CHECKS = ("corollary4", "vanishing", "sum_identity", "translation", "row_sums", "holder")


class ConfigError(ValueError):
    def __init__(self, violations: list[tuple[str, str]]):
        self.violations = violations
        super().__init__("; ".join(f"{code}: {msg}" for code, msg in violations))


@dataclass
class FamilySpec:
    k: int
    planes: list[AffinePlane] | str  # "all" for every affine k-plane


@dataclass
class RunConfig:
    p: int
    n: int
    families: list[FamilySpec]
    weights: str | dict[tuple[int, ...], Fraction] = "uniform"
    lambdas: list[int] = field(default_factory=lambda: [2])
    budget: int = 1000
    seed: int = 0
    plane_cap: int = DEFAULT_PLANE_CAP
    oracle_box: int | None = None
    grassmann_mode: str = "finite"
    descent: str = "early_stop"  # or "full": descend to a local lexicographic minimum

    @property
    def early_stop(self) -> bool:
        return self.descent == "early_stop"

    def to_json(self) -> dict:
        fams = []
        for fam in self.families:
            if fam.planes == "all":
                fams.append({"k": fam.k, "planes": "all"})
            else:
                fams.append({"k": fam.k, "planes": [
                    {"base": list(pl.base), "directions": [list(u) for u in pl.direction.basis]}
                    for pl in fam.planes]})
        if self.weights == "uniform":
            weights: Any = "uniform"
        else:
            weights = [{"point": list(pt), "weight": format_rational(w)} for pt, w in sorted(self.weights.items())]
        return {
            "p": self.p, "n": self.n, "families": fams, "weights": weights,
            "lambda": list(self.lambdas), "budget": self.budget, "seed": self.seed,
            "plane_cap": self.plane_cap, "oracle_box": self.oracle_box,
            "grassmann_mode": self.grassmann_mode, "descent": self.descent,
        }

    def configuration(self) -> Configuration:
        fams = []
        for fam in self.families:
            if fam.planes == "all":
                fams.append(enumerate_planes(fam.k, self.n, self.p, self.plane_cap))
            else:
                fams.append(list(fam.planes))
        return Configuration(self.p, self.n, tuple(f.k for f in self.families), fams)


def _int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def parse_config(text: str | dict) -> RunConfig:
    """Validate a JSON config document, collecting every violation before raising."""
    errs: list[tuple[str, str]] = []
    try:
        doc = json.loads(text) if isinstance(text, (str, bytes)) else text
    except json.JSONDecodeError as exc:
        raise ConfigError([("CFG_JSON", str(exc))]) from None
    if not isinstance(doc, dict):
        raise ConfigError([("CFG_SCHEMA", "config must be a JSON object")])
    p, n = doc.get("p"), doc.get("n")
    if not _int(p):
        errs.append(("CFG_SCHEMA", "'p' must be an integer"))
        p = None
    elif not is_prime(p):
        errs.append(("CFG_PRIME", f"modulus {p} is not prime"))
        p = None
    if not _int(n) or n < 1:
        errs.append(("CFG_SCHEMA", "'n' must be a positive integer"))
        n = None
    fams_doc = doc.get("families")
    families: list[FamilySpec] = []
    if not isinstance(fams_doc, list) or len(fams_doc) < 2:
        errs.append(("CFG_SCHEMA", "'families' must be a list of at least two families"))
        fams_doc = fams_doc if isinstance(fams_doc, list) else []
    ks = []
    for j, fam in enumerate(fams_doc):
        if not isinstance(fam, dict) or not _int(fam.get("k")) or fam["k"] < 1:
            errs.append(("CFG_SCHEMA", f"family {j}: needs a positive integer 'k'"))
            continue
        k = fam["k"]
        ks.append(k)
        planes = fam.get("planes", [])
        if planes == "all":
            families.append(FamilySpec(k, "all"))
            continue
        if not isinstance(planes, list):
            errs.append(("CFG_SCHEMA", f"family {j}: 'planes' must be a list or \"all\""))
            continue
        parsed = []
        for i, pl in enumerate(planes):
            try:
                base, dirs = pl["base"], pl["directions"]
                if n is not None and (len(base) != n or any(len(u) != n for u in dirs)):
                    raise GeometryError(f"coordinates must have length n={n}")
                if len(dirs) != k:
                    raise GeometryError(f"{len(dirs)} directions given for a {k}-plane")
                if not all(_int(x) for x in list(base) + [x for u in dirs for x in u]):
                    raise GeometryError("coordinates must be integers")
                if p is not None:
                    parsed.append(canonicalize_plane(base, dirs, p))
            except (KeyError, TypeError) as exc:
                errs.append(("CFG_SCHEMA", f"family {j} plane {i}: malformed ({exc})"))
            except GeometryError as exc:
                errs.append(("CFG_PLANE", f"family {j} plane {i}: {exc}"))
        families.append(FamilySpec(k, parsed))
    if n is not None and ks and sum(ks) != n:
        errs.append(("CFG_KSUM", f"sum of k_j = {sum(ks)} differs from n = {n}"))
    wdoc = doc.get("weights", "uniform")
    weights: Any = "uniform"
    if wdoc != "uniform":
        weights = {}
        n_errs = len(errs)
        if not isinstance(wdoc, list):
            errs.append(("CFG_SCHEMA", "'weights' must be \"uniform\" or a list of {point, weight}"))
            wdoc = []
        for i, item in enumerate(wdoc):
            try:
                pt = tuple(int(x) % p if p else int(x) for x in item["point"])
                raw = item["weight"]
                w = parse_rational(raw) if isinstance(raw, str) else Fraction(raw)
            except (KeyError, TypeError):
                errs.append(("CFG_SCHEMA", f"weight {i}: needs 'point' and 'weight'"))
                continue
            except (ValueError, ZeroDivisionError) as exc:
                errs.append(("CFG_RAT", f"weight {i}: malformed rational ({exc})"))
                continue
            if w < 0:
                errs.append(("CFG_NEG", f"weight {i}: negative weight {raw}"))
                continue
            weights[pt] = weights.get(pt, Fraction(0)) + w
        if len(errs) == n_errs and wdoc and sum(weights.values(), Fraction(0)) <= 0:
            errs.append(("CFG_NEG", "weights must have positive total"))
    lams = doc.get("lambda", [2])
    if isinstance(lams, int):
        lams = [lams]
    if not isinstance(lams, list) or not lams or not all(_int(x) and x >= 0 for x in lams):
        errs.append(("CFG_SCHEMA", "'lambda' must be a non-empty list of non-negative integers"))
        lams = [2]
    opts = {}
    for key, default in (("budget", 1000), ("seed", 0), ("plane_cap", DEFAULT_PLANE_CAP)):
        v = doc.get(key, default)
        if not _int(v) or v < 0:
            errs.append(("CFG_SCHEMA", f"'{key}' must be a non-negative integer"))
            v = default
        opts[key] = v
    box = doc.get("oracle_box")
    if box is not None and (not _int(box) or box < 0):
        errs.append(("CFG_SCHEMA", "'oracle_box' must be a non-negative integer"))
        box = None
    mode = doc.get("grassmann_mode", "finite")
    if mode not in ("finite", "representatives"):
        errs.append(("CFG_SCHEMA", "'grassmann_mode' must be \"finite\" or \"representatives\""))
    descent = doc.get("descent", "early_stop")
    if descent not in ("early_stop", "full"):
        errs.append(("CFG_SCHEMA", "'descent' must be \"early_stop\" or \"full\""))
    if errs:
        raise ConfigError(errs)
    return RunConfig(p, n, families, weights, sorted(lams), opts["budget"], opts["seed"],
                     opts["plane_cap"], box, mode, descent)


# --- serialisation helpers -------------------------------------------------

def pt_str(pt) -> str:
    return ",".join(map(str, pt))


def q(x: Fraction | None) -> str | None:
    return None if x is None else format_rational(x)


def _table_json(table: FactorisationTable, cfg: Configuration) -> list:
    out = []
    for j, fam in enumerate(cfg.families):
        for i, pl in enumerate(fam):
            for pt, s in sorted(table.rows[j][i].items()):
                out.append({"family": j, "plane": str(pl), "point": pt_str(pt),
                            "count": table.counts[j][i][pt], "s": q(s)})
    return out


def _alpha_json(alpha) -> dict:
    return {pt_str(pt): a for pt, a in sorted(alpha.items())}


def _search_json(res) -> dict:
    return {
        "alpha": _alpha_json(res.alpha),
        "gap": q(res.gap), "h": q(res.h), "target": q(res.target),
        "support_target": q(res.support_target), "status": res.status,
        "iterations": res.iterations,
        "w": {pt_str(pt): q(v) for pt, v in sorted(res.profile.normalised.items())},
    }


def _report_json(rep) -> dict:
    return {
        "lambda": rep.lam, "c_emp": q(rep.c_emp), "row_sums_exact": rep.row_sums_exact,
        "zero_factors": [[pt_str(pt), list(t)] for pt, t in rep.zero_factors],
        "max_normalised_w": q(rep.max_normalised_w), "w_lower_bound": q(rep.w_lower_bound),
        "slack": q(rep.slack),
        "margins": [[pt_str(pt), list(t), q(r)] for pt, t, r in rep.margins],
    }


@dataclass
class RunReport:
    command: str
    config: dict
    body: dict
    exit_code: int = 0
    tables: list = field(default_factory=list)  # (lambda, table, cfg) for CSV output

    def to_json(self) -> dict:
        return {"command": self.command, "config": self.config, "exit_code": self.exit_code, **self.body}


def emit_report(report: RunReport | None, fmt: str = "json") -> bytes:
    if fmt == "json":
        doc = {} if report is None else report.to_json()
        return (json.dumps(doc, sort_keys=True, indent=1, ensure_ascii=True) + "\n").encode()
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lambda", "family", "plane", "point", "count", "s"])
        for lam, table, cfg in ([] if report is None else report.tables):
            for row in _table_json(table, cfg):
                w.writerow([lam, row["family"], row["plane"], row["point"], row["count"], row["s"]])
        return buf.getvalue().encode()
    raise ValueError(f"unknown format {fmt!r}")


# --- commands --------------------------------------------------------------

def _instance(rc: RunConfig) -> Instance:
    cfg = rc.configuration()
    inst = Instance(cfg) if rc.weights == "uniform" else None
    if inst is None:
        from .geometry import detect_multijoints
        J = detect_multijoints(cfg)
        inst = Instance(cfg, WeightFunction(rc.weights), J)
    return inst


def run_command(cmd: str, rc: RunConfig, workers: int = 1, checks=("corollary4", "vanishing"),
                random_draws: int = 0) -> RunReport:
    if cmd not in COMMANDS:
        raise ValueError(f"unknown command {cmd!r}")
    executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        return _run(cmd, rc, executor, checks, random_draws)
    finally:
        if executor is not None:
            executor.shutdown()


def _run(cmd, rc: RunConfig, executor, checks, random_draws) -> RunReport:
    if cmd == "detect":
        cfg = rc.configuration()
        from .geometry import detect_multijoints
        J = detect_multijoints(cfg)
        body = {
            "J": [pt_str(pt) for pt in J.points],
            "witnesses": {pt_str(pt): [list(t) for t in J.witnesses[pt]] for pt in J.points},
            "components": [[pt_str(pt) for pt in comp] for comp in connected_components(J)],
        }
        return RunReport(cmd, rc.to_json(), body)

    inst = _instance(rc)
    cfg = inst.cfg
    lam_max = rc.lambdas[-1]
    base = {"J": [pt_str(pt) for pt in inst.J.points], "support": [pt_str(pt) for pt in inst.support]}

    if cmd in ("factorize", "verify"):
        res = search_good_handicap(inst, lam_max, budget=rc.budget, early_stop=rc.early_stop)
        table = build_s(res.alpha, inst, lam_max, executor)
        table.gap = res.gap
        body = dict(base, search=_search_json(res), table=_table_json(table, cfg))
        code = 2 if res.status == "budget" else 0
        if cmd == "verify":
            rep = verify_theorem_2b(table, inst, res)
            body["verification"] = _report_json(rep)
            if rep.finite:
                chain = verify_multijoint_inequality(inst, table, rep.c_emp, [[1] * len(f) for f in cfg.families])
                body["holder"] = {"lhs": repr(chain.lhs), "rhs": repr(chain.rhs), "passed": chain.passed}
            ok = rep.finite and rep.row_sums_exact and rep.lower_bound_ok
            code = code or (0 if ok else 1)
        return RunReport(cmd, rc.to_json(), body, code, [(lam_max, table, cfg)])

    if cmd == "sweep":
        sw = lambda_sweep(inst, rc.lambdas, budget=rc.budget, executor=executor, early_stop=rc.early_stop)
        stages = []
        for st in sw.stages:
            stages.append({"lambda": st.lam, "search": _search_json(st.search),
                           "verification": _report_json(st.report),
                           "table": _table_json(st.table, cfg)})
        body = dict(base, stages=stages, gaps=[q(g) for g in sw.gaps], c_emp=[q(c) for c in sw.c_emp],
                    cauchy=q(sw.cauchy_diagnostic()))
        code = 2 if any(st.search.status == "budget" for st in sw.stages) else 0
        if not code and not all(st.report.row_sums_exact for st in sw.stages):
            code = 1
        return RunReport(cmd, rc.to_json(), body, code, [(st.lam, st.table, cfg) for st in sw.stages])

    if cmd == "certify":
        rng = random.Random(rc.seed)
        results, ok = [], True
        for lam in rc.lambdas:
            alphas = [("searched", search_good_handicap(inst, lam, budget=rc.budget, early_stop=rc.early_stop).alpha)]
            for r in range(random_draws):
                alphas.append((f"random{r}", {pt: rng.randint(-lam - 1, lam + 1) for pt in inst.J.points}))
            for label, alpha in alphas:
                entry = {"lambda": lam, "handicap": label}
                if "corollary4" in checks:
                    c4 = corollary4_certificate(alpha, inst, lam)
                    entry["corollary4"] = {"lhs": c4.lhs, "rhs": c4.rhs, "passed": c4.passed}
                    ok &= c4.passed
                if "vanishing" in checks:
                    vc = vanishing_certificate(alpha, inst, lam)
                    entry["vanishing"] = {"rank": vc.rank, "dim": vc.dim, "passed": vc.passed}
                    ok &= vc.passed
                if "sum_identity" in checks or "translation" in checks:
                    shifted = {pt: a + 7 for pt, a in alpha.items()}
                    s_ok = t_ok = True
                    for pl in inst.plane_points:
                        if not inst.plane_points[pl]:
                            continue
                        c = inst.counts(pl, alpha, lam)
                        s_ok &= sum(c.values()) == comb(lam + pl.k, pl.k)
                        t_ok &= c == inst.counts(pl, shifted, lam)
                    if "sum_identity" in checks:
                        entry["sum_identity"] = s_ok
                        ok &= s_ok
                    if "translation" in checks:
                        entry["translation"] = t_ok
                        ok &= t_ok
                if "row_sums" in checks or "holder" in checks:
                    table = build_s(alpha, inst, lam, executor)
                    rep = verify_theorem_2b(table, inst)
                    if "row_sums" in checks:
                        entry["row_sums"] = rep.row_sums_exact
                        ok &= rep.row_sums_exact
                    if "holder" in checks and label == "searched":
                        passed = rep.finite and verify_multijoint_inequality(
                            inst, table, rep.c_emp, [[1] * len(f) for f in cfg.families]).passed
                        entry["holder"] = passed
                        ok &= passed
                results.append(entry)
        return RunReport(cmd, rc.to_json(), dict(base, certificates=results), 0 if ok else 1)

    if cmd == "oracle":
        out, ok = [], True
        for lam in rc.lambdas:
            # the oracle is the exhaustive lexicographic minimiser, so compare full descent
            res = search_good_handicap(inst, lam, budget=rc.budget, early_stop=False)
            box = rc.oracle_box if rc.oracle_box is not None else 3 * (lam + 1)
            alpha, prof = brute_force_handicap_oracle(inst, lam, box)
            match = prof.sorted == res.profile.sorted
            ok &= match
            out.append({"lambda": lam, "box": box, "search": [q(v) for v in res.profile.sorted],
                        "oracle": [q(v) for v in prof.sorted], "oracle_alpha": _alpha_json(alpha),
                        "match": match})
        return RunReport(cmd, rc.to_json(), dict(base, oracle=out), 0 if ok else 1)

    # grassmann
    g = extend_to_grassmannian(inst, lam_max, mode=rc.grassmann_mode, cap=rc.plane_cap,
                               budget=rc.budget, executor=executor, early_stop=rc.early_stop)
    body = dict(base, grassmann={
        "lambda": lam_max, "c_emp": q(g.c_emp), "passed": g.passed,
        "row_sum_violations": len(g.row_sum_violations),
        "display_violations": len(g.display_violations),
        "restriction_mismatches": len(g.restriction_mismatches),
        "s": [{f"{pt_str(pt)}|{';'.join(pt_str(u) for u in V.basis)}": q(v)
               for (pt, V), v in sorted(sm.items())} for sm in g.s],
    })
    code = 2 if g.search is not None and g.search.status == "budget" else (0 if g.passed else 1)
    return RunReport(cmd, rc.to_json(), body, code, [(lam_max, g.base, g.instance.cfg)])


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="multijoint", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="path to a JSON config")
    ap.add_argument("--lambda", dest="lam", help="comma-separated lambda list overriding the config")
    ap.add_argument("--budget", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--oracle-box", type=int)
    ap.add_argument("--plane-cap", type=int)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--checks", default="corollary4,vanishing",
                    help=f"certify checks, comma-separated from {','.join(CHECKS)}")
    ap.add_argument("--random", type=int, default=0, help="extra random handicaps for certify")
    ap.add_argument("--output", help="write the report here instead of stdout")
    ap.add_argument("--timing", action="store_true",
                    help="add wall-clock seconds to the report (output is then not byte-stable)")
    args = ap.parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            doc = json.load(fh)
        if args.lam:
            doc["lambda"] = [int(x) for x in args.lam.split(",")]
        for key in ("budget", "seed", "oracle_box", "plane_cap"):
            v = getattr(args, key)
            if v is not None:
                doc[key] = v
        rc = parse_config(doc)
        checks = tuple(c for c in args.checks.split(",") if c)
        bad = [c for c in checks if c not in CHECKS]
        if bad:
            raise ValueError(f"unknown checks {bad}")
        start = time.perf_counter()
        report = run_command(args.command, rc, args.workers, checks, args.random)
        if args.timing:
            report.body["timing_seconds"] = round(time.perf_counter() - start, 3)
    except ConfigError as exc:
        for code, msg in exc.violations:
            print(f"{code}: {msg}", file=sys.stderr)
        return 1
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"{type(exc).__module__.split('.')[-1]}: {exc}", file=sys.stderr)
        return 1
    data = emit_report(report, args.format)
    if args.output:
        with open(args.output, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())

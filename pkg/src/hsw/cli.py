"""``hsw`` command-line front end.

Exit codes: 0 when every check passes, 1 when violations are found, 2 on
input or usage errors. Reports go to stdout as text or JSON; derived objects
(duals, pullbacks, inverses, ...) are written with ``--output``.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

from . import io
from .graded import DEFAULT_DEGREE_WINDOW
from .report import HswError, ValidationReport
from .scalars import DEFAULT_TOL, ScalarBackend


class UsageError(Exception):
    pass


SCHEMA_HELP = """Input files are JSON documents {"schema": "hsw/1", "kind": K, "data": ...}.
Kinds: crossed_module, lie2_morphism, inversion, mc, element, groupoid, object_map, cover,
vb_groupoid, vb_morphism, vb_equivalence, morita_witness, module, algebra, points, exterior.
Rationals are "p/q" strings; matrices are {"shape": [r, c], "rows": [[...]]}.
Example files are produced by scripts/make_examples.py."""


@dataclass(frozen=True)
class RunConfig:
    scalar: str = "rational"
    tol: float = DEFAULT_TOL
    degree_window: Tuple[int, int] = DEFAULT_DEGREE_WINDOW
    max_level: int = 2
    seed: int = 0
    fmt: str = "text"
    timing: bool = False
    output: Optional[str] = None

    def __post_init__(self):
        if self.scalar == "float" and not self.tol > 0:
            raise UsageError("--tol must be positive for the float backend")
        if self.max_level < 1:
            raise UsageError("--max-level must be at least 1")
        if self.degree_window[0] > self.degree_window[1]:
            raise UsageError("--degree-window must be LO,HI with LO <= HI")

    @property
    def backend(self) -> ScalarBackend:
        return ScalarBackend(self.scalar, self.tol)


@dataclass
class Report:
    command: str
    status: str = "pass"
    findings: List[dict] = field(default_factory=list)
    result: dict = field(default_factory=dict)
    timing: Optional[float] = None

    def add(self, tag: str, location=None, lhs=None, rhs=None, **details) -> None:
        f = {"tag": tag, "location": _plain(location)}
        if lhs is not None or rhs is not None:
            f["lhs"], f["rhs"] = _plain(lhs), _plain(rhs)
        if details:
            f["details"] = _plain(details)
        self.findings.append(f)
        if self.status == "pass":
            self.status = "fail"

    def absorb(self, rep: ValidationReport, prefix: str = "", limit: int = 20) -> None:
        for f in list(rep)[:limit]:
            self.add(prefix + f.tag, f.location, f.lhs, f.rhs)
        if len(rep) > limit:
            self.add(prefix + "truncated", None, details={"more": len(rep) - limit})

    def to_json(self) -> dict:
        out = {"schema": io.SCHEMA, "command": self.command, "status": self.status,
               "findings": self.findings, "result": _plain(self.result)}
        if self.timing is not None:
            out["timing_s"] = round(self.timing, 3)
        return out


def _plain(x):
    if x is None or isinstance(x, (bool, int, str)):
        return x
    if isinstance(x, float):
        return x
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        return [_plain(v) for v in x]
    return str(x)


def _color(text: str, ok: bool) -> str:
    if os.environ.get("HSW_COLOR", "").lower() in ("1", "always", "true", "yes"):
        return f"\033[{32 if ok else 31}m{text}\033[0m"
    return text


def emit_report(r: Report, fmt: str, stream=None) -> None:
    stream = stream or sys.stdout
    if fmt == "json":
        stream.write(json.dumps(r.to_json(), sort_keys=True, indent=1) + "\n")
        return
    head = {"pass": "PASS", "fail": "FAIL", "error": "ERROR"}[r.status]
    line = f"{_color(head, r.status == 'pass')} {r.command}"
    if r.timing is not None:
        line += f" ({r.timing:.2f}s)"
    stream.write(line + "\n")
    for f in r.findings:
        s = f"  {f['tag']} at {f['location']}"
        if "lhs" in f:
            s += f": lhs={f['lhs']} rhs={f['rhs']}"
        if "details" in f:
            s += f" {f['details']}"
        stream.write(s + "\n")
    for k, v in r.result.items():
        stream.write(f"  {k}: {json.dumps(_plain(v), sort_keys=True)}\n")


# ---------------------------------------------------------------- helpers


def _write_output(cfg: RunConfig, kind: str, obj, report: Report) -> None:
    if cfg.output:
        io.write(cfg.output, kind, obj)
        report.result["output"] = cfg.output


def _exact_only(cfg: RunConfig, what: str) -> None:
    if not cfg.backend.exact:
        raise UsageError(f"{what} runs in exact rational arithmetic only; drop --scalar float")


def _window(cfg: RunConfig, report: Report, name: str, space) -> None:
    if not space.within(cfg.degree_window):
        report.add("degree-window", name, list(space.degrees()), list(cfg.degree_window))


# ---------------------------------------------------------------- lie2


def cmd_lie2(args, cfg: RunConfig, report: Report) -> None:
    from .lie2 import (associated_dgla, check_crossed_module, check_dgla, check_lie2_morphism, compose_lie2,
                       inversion_constraints, invert_lie2_morphism, two_term_cohomology)
    _exact_only(cfg, "lie2")
    if args.action in ("check", "dgla"):
        cm = io.read(args.file, "crossed_module")
        _window(cfg, report, "A", cm.A.space)
        _window(cfg, report, "G", cm.G.space)
        rep = check_crossed_module(cm)
        report.absorb(rep)
        if args.action == "dgla" and rep.ok:
            dg = associated_dgla(cm, validate=False)
            report.absorb(check_dgla(dg), "dgla:")
            report.result["dgla_dims"] = {str(d): n for d, n in dg.V.dims_items}
            report.result["cohomology"] = {str(k): list(v) for k, v in two_term_cohomology(cm).items()}
    elif args.action == "compose":
        if len(args.extra) != 1:
            raise UsageError("lie2 compose OUTER.json INNER.json")
        outer = io.read(args.file, "lie2_morphism")
        inner = io.read(args.extra[0], "lie2_morphism")
        comp = compose_lie2(outer, inner)
        report.absorb(check_lie2_morphism(comp))
        _write_output(cfg, "lie2_morphism", comp, report)
    elif args.action == "invert":
        inst = io.read(args.file, "inversion")
        psi = invert_lie2_morphism(inst.phi, inst.psi1A, inst.psi1G, inst.h, inst.hprime)
        report.absorb(inversion_constraints(inst.phi, psi, inst.h, inst.hprime))
        report.absorb(check_lie2_morphism(psi), "psi:")
        _write_output(cfg, "lie2_morphism", psi, report)


# ---------------------------------------------------------------- mc


def cmd_mc(args, cfg: RunConfig, report: Report) -> None:
    from .lie2 import associated_dgla
    from .mc import (MCElement, check_lp_complex, gauge, lp_cohomology, lp_differential, mc_check, mc_pushforward,
                     twist)
    _exact_only(cfg, "mc")
    m = io.read(args.file, "mc")
    if args.action == "check":
        report.absorb(mc_check(m.cm, m.Lambda, m.Pi))
    elif args.action == "twist":
        T = _need(args.T, "--T", "element")
        out = twist(m, T)
        report.absorb(mc_check(m.cm, out.Lambda, out.Pi))
        report.result.update({"Lambda": io.enc_element(out.Lambda), "Pi": io.enc_element(out.Pi)})
        _write_output(cfg, "mc", out, report)
    elif args.action == "gauge":
        b = _need(args.b, "--b", "element")
        dg = associated_dgla(m.cm, validate=False)
        try:
            res = gauge(dg, m.as_dgla_element(dg), b, nilpotency_bound=args.nilpotency)
        except HswError as e:
            report.add(type(e).__name__, "b", details={"message": str(e)})
            return
        a, p = dg.split(res)
        out = MCElement(m.cm, a, p)
        report.absorb(mc_check(m.cm, out.Lambda, out.Pi))
        report.result.update({"Lambda": io.enc_element(out.Lambda), "Pi": io.enc_element(out.Pi)})
        _write_output(cfg, "mc", out, report)
    elif args.action == "push":
        phi = _need(args.phi, "--phi", "lie2_morphism")
        out = mc_pushforward(phi, m)
        report.absorb(mc_check(phi.target, out.Lambda, out.Pi))
        _write_output(cfg, "mc", out, report)
    elif args.action == "lp":
        report.absorb(mc_check(m.cm, m.Lambda, m.Pi), "mc:")
        if report.status == "pass":
            report.absorb(check_lp_complex(lp_differential(m, validate=False)))
            report.result["cohomology"] = {str(k): v for k, v in sorted(lp_cohomology(m).items())}


def _need(path: Optional[str], flag: str, kind: str):
    if not path:
        raise UsageError(f"{flag} FILE is required")
    return io.read(path, kind)


# ---------------------------------------------------------------- grpd


def cmd_grpd(args, cfg: RunConfig, report: Report) -> None:
    from .fingrpd import check_groupoid, check_partition_inverse, cohomology_dims, pullback_groupoid
    _exact_only(cfg, "grpd")
    if args.action in ("partition-inverse", "appendixB"):
        g, cs = io.read(args.file, "cover")
        report.absorb(check_groupoid(g), "groupoid:")
        if report.status == "pass":
            report.absorb(check_partition_inverse(g, cs))
        return
    g = io.read(args.file, "groupoid")
    report.absorb(check_groupoid(g))
    if report.status != "pass" or args.action == "check":
        return
    if args.action == "cohomology":
        report.result["cohomology"] = cohomology_dims(g, cfg.max_level)
    elif args.action == "pullback":
        X, phi = _need(args.map, "--map", "object_map")
        pb = pullback_groupoid(g, X, phi)
        report.absorb(check_groupoid(pb.groupoid), "pullback:")
        report.result["cohomology_base"] = cohomology_dims(g, cfg.max_level)
        report.result["cohomology_pullback"] = cohomology_dims(pb.groupoid, cfg.max_level)
        if report.result["cohomology_base"] != report.result["cohomology_pullback"]:
            report.add("morita-invariance", None, report.result["cohomology_base"],
                       report.result["cohomology_pullback"])
        _write_output(cfg, "groupoid", pb.groupoid, report)


# ---------------------------------------------------------------- vb


def cmd_vb(args, cfg: RunConfig, report: Report) -> None:
    from . import vbgrpd as V
    _exact_only(cfg, "vb")
    a = args.action
    if a == "check":
        v = io.read(args.file, "vb_groupoid")
        report.absorb(V.check_vb_groupoid(v))
        if report.status == "pass":
            report.absorb(V.exactness_report(v), "core:")
            report.result["core_dims"] = list(v.cdims)
    elif a == "dual":
        v = io.read(args.file, "vb_groupoid")
        d = V.dualize(v)
        report.absorb(V.check_vb_groupoid(d))
        report.absorb(V.check_vb_morphism(V.double_dual_iso(v)), "double-dual:")
        _write_output(cfg, "vb_groupoid", d, report)
    elif a == "split":
        from .homrep import check_homotopy_module, to_split_vb
        m = io.read(args.file, "module")
        report.absorb(check_homotopy_module(m), "module:")
        if report.status == "pass":
            v, _ = to_split_vb(m)
            report.absorb(V.check_vb_groupoid(v))
            _write_output(cfg, "vb_groupoid", v, report)
    elif a == "pullback":
        v = io.read(args.file, "vb_groupoid")
        X, phi = _need(args.map, "--map", "object_map")
        p = V.pullback_along(v, X, phi)
        report.absorb(V.check_vb_groupoid(p.vb))
        report.absorb(V.check_morita_morphism(p.projection), "projection:")
        _write_output(cfg, "vb_groupoid", p.vb, report)
    elif a == "homotopy":
        eq = io.read(args.file, "vb_equivalence")
        report.absorb(V.check_homotopy_equivalence(eq))
        if report.status == "pass":
            report.absorb(V.vb_chain_map_and_homotopy(V.compose_vb(eq.psi, eq.phi),
                                                      V.VBMorphism.identity(eq.phi.source), eq.h1,
                                                      cfg.max_level), "cochains:")
    elif a == "bridge":
        eq = io.read(args.file, "vb_equivalence")
        report.absorb(V.check_homotopy_equivalence(eq))
        if report.status == "pass":
            report.absorb(V.check_bridge(eq), "bridge:")
    elif a == "morita":
        v1, v2, wit = io.read(args.file, "morita_witness")
        report.absorb(V.morita_witness_check(v1, v2, wit))
        if report.status == "pass" and args.dual:
            d1, d2, dw = V.dual_witness(v1, v2, wit)
            report.absorb(V.morita_witness_check(d1, d2, dw), "dual:")
    elif a == "cochains":
        v = io.read(args.file, "vb_groupoid")
        report.absorb(V.check_vb_groupoid(v))
        if report.status != "pass":
            return
        vd = V.dualize(v)
        dims = []
        for k in range(cfg.max_level + 1):
            basis = V.vb_cochains(v, k)
            dims.append(basis.ncols)
            for j, col in enumerate(basis.cols()):
                sec = V.split_cochain(v, k, col)
                d = V.vb_coboundary(v, k, sec)
                if k < cfg.max_level:
                    dd = V.vb_coboundary(v, k + 1, d)
                    if any(x for vec in dd.values() for x in vec):
                        report.add("delta-squared", (k, j))
                    report.absorb(V.vb_dual_intertwining(v, k, sec, vd), f"intertwine{k}:", limit=3)
        report.result["cochain_dims"] = dims


# ---------------------------------------------------------------- rep


def cmd_rep(args, cfg: RunConfig, report: Report) -> None:
    from . import homrep as H
    _exact_only(cfg, "rep")
    a = args.action
    if a == "check":
        m = io.read(args.file, "module")
        report.absorb(H.check_homotopy_module(m))
        if report.status == "pass":
            import random
            D = H.build_D(m, cfg.max_level + 1, random.Random(cfg.seed))
            report.absorb(D.report, "D:")
    elif a == "from-vb":
        v = io.read(args.file, "vb_groupoid")
        m = H.from_split_vb(v, H.default_decomposition(v))
        report.absorb(H.check_homotopy_module(m))
        _write_output(cfg, "module", m, report)
    elif a == "pullback":
        m = io.read(args.file, "module")
        X, phi = _need(args.map, "--map", "object_map")
        pm, _ = H.pullback_module(m, X, phi)
        report.absorb(H.check_homotopy_module(pm))
        _write_output(cfg, "module", pm, report)
    elif a == "morita":
        v1, v2, wit = io.read(args.file, "morita_witness")
        ma, mb, meq = H.module_witness_from_vb(v1, H.default_decomposition(v1), v2, H.default_decomposition(v2), wit)
        report.absorb(H.morita_module_witness(ma, mb, wit.X, wit.phi1, wit.phi2, wit.arrow_iso, meq,
                                              cfg.max_level))


# ---------------------------------------------------------------- qp


def _algebra(spec: Optional[str]):
    from . import qpois as Q
    if not spec:
        raise UsageError("--algebra FILE|sl2|so3|abelianN is required")
    if spec == "sl2":
        return Q.sl2()
    if spec == "so3":
        return Q.so3()
    if spec.startswith("abelian") and spec[7:].isdigit():
        return Q.abelian(int(spec[7:]))
    return io.read(spec, "algebra")


def cmd_qp(args, cfg: RunConfig, report: Report) -> None:
    from . import qpois as Q
    g = _algebra(args.algebra)
    backend = cfg.backend
    report.absorb(Q.check_lie_algebra(g), "algebra:")
    if report.status != "pass":
        return
    a = args.action
    if a == "cartan":
        report.result["cartan"] = io.enc_exterior(Q.cartan_trivector(g))
        return
    if a == "double":
        t = Q.double_quasitriple(g)
        report.absorb(Q.check_quasitriple(t), "triple:")
        phi = Q.phi_from_pairing(t)
        cart = Q.cartan_trivector(g)
        if phi != cart:
            report.add("phi-equals-cartan", None, io.enc_exterior(phi), io.enc_exterior(cart))
        report.result["signature"] = list(Q.signature(t.form))
        report.result["phi"] = io.enc_exterior(phi)
        return
    model = args.model
    data = Q.quasi_poisson_group(g) if model == "group" else Q.amm_structure(g)
    T = None
    if args.twist:
        T = io.read(args.twist, "exterior")
        if any(len(k) != 2 for k in T):
            raise UsageError("--twist must be a bivector")
    pts = _points(args, g, backend, model)
    flags = {"check": a in ("amm", "check") and (args.check or a == "check" or not (args.rank or args.nondeg)),
             "rank": a == "rank" or args.rank, "nondeg": a == "nondeg" or args.nondeg}
    if a == "twist":
        if T is None:
            raise UsageError("qp twist needs --twist T.json")
        if not backend.exact:
            raise UsageError("twists run in exact arithmetic only")
        tw, rep = Q.twist_framed(data, T, pts[:2])
        report.absorb(rep, "twist:")
        report.absorb(Q.check_quasi_poisson(tw, pts), "twisted:")
        report.result["Lambda_T"] = io.enc_exterior(tw.Lambda)
        if model == "conjugation":
            for k, pt in enumerate(pts):
                r, readings = Q.rank_twist_invariance(data, T, pt[1], pts[:1])
                report.absorb(r, f"point{k}:")
        return
    if T is not None:
        if not backend.exact:
            raise UsageError("twists run in exact arithmetic only")
        data, rep = Q.twist_framed(data, T, pts[:2])
        report.absorb(rep, "twist:")
    if flags["check"]:
        report.absorb(Q.check_quasi_poisson(data, pts, backend))
    ranks, nondeg = [], []
    for k, pt in enumerate(pts):
        s = pt[1] if model == "conjugation" else None
        if flags["rank"]:
            ranks.append(Q.rank_at(data, s, backend).rank)
        if flags["nondeg"]:
            ok, cert = Q.nondegenerate_at(data, s, backend)
            nondeg.append(ok)
            if not ok:
                report.add("degenerate", k, details=cert.to_json())
    if flags["rank"]:
        report.result["rank"] = ranks
    if flags["nondeg"]:
        report.result["nondegenerate"] = nondeg


def _points(args, g, backend, model) -> list:
    from . import qpois as Q
    if args.points:
        mats = io.read(args.points, "points")
    else:
        import random
        rng = random.Random(args.seed)
        mats = [Q.random_point(rng, g) for _ in range(args.npoints)]
    if not mats:
        raise UsageError("at least one point is required")
    try:
        pts = [Q.group_point(g, m if backend.exact else [[float(x) for x in r] for r in m.rows], backend)
               for m in mats]
    except HswError as e:
        raise UsageError(str(e)) from e
    if model == "group":
        return [(p,) for p in pts]
    return [(pts[(i + 1) % len(pts)], p) for i, p in enumerate(pts)]


# ---------------------------------------------------------------- suite


def cmd_suite(args, cfg: RunConfig, report: Report) -> None:
    from .suites import MODULE_SUITES, SuiteConfig, run_suite
    name = args.action
    if name not in MODULE_SUITES and name not in ("all", "acceptance"):
        raise UsageError(f"unknown suite {name!r}; choose all, acceptance or one of {sorted(MODULE_SUITES)}")
    _exact_only(cfg, "suite")
    results = run_suite(name, SuiteConfig(cfg.seed, args.count, cfg.max_level))
    report.result["suites"] = [r.to_json(timing=cfg.timing) for r in results]
    for r in results:
        for f in r.failures:
            report.add(f"{r.name}:{f['tag']}", f["instance"], details=f["details"])
        if r.limit is not None and r.elapsed > r.limit:
            report.add(f"{r.name}:time-limit", None, details={"limit_s": r.limit})


# ---------------------------------------------------------------- dispatch

COMMANDS = {
    "lie2": (cmd_lie2, ["check", "dgla", "compose", "invert"]),
    "mc": (cmd_mc, ["check", "twist", "gauge", "push", "lp"]),
    "grpd": (cmd_grpd, ["check", "cohomology", "pullback", "partition-inverse", "appendixB"]),
    "vb": (cmd_vb, ["check", "dual", "split", "pullback", "homotopy", "bridge", "morita", "cochains"]),
    "rep": (cmd_rep, ["check", "from-vb", "pullback", "morita"]),
    "qp": (cmd_qp, ["cartan", "double", "amm", "check", "rank", "nondeg", "twist"]),
    "suite": (cmd_suite, None),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _window_arg(text: str) -> Tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected LO,HI")
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--scalar", choices=["rational", "float"], default="rational")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=["text", "json"], default="text")
    common.add_argument("--max-level", type=int, default=2)
    common.add_argument("--degree-window", type=_window_arg, default=DEFAULT_DEGREE_WINDOW)
    common.add_argument("--output", "-o")
    common.add_argument("--timing", action="store_true", help="include wall-clock time in the report")
    p = _Parser(prog="hsw", description="Verifier for shifted Poisson structures on finite and matrix models.",
                epilog=SCHEMA_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, actions) in COMMANDS.items():
        sp = sub.add_parser(name, parents=[common])
        if actions is None:
            sp.add_argument("action", help="all, acceptance or a module name")
            sp.add_argument("--count", type=int)
            continue
        sp.add_argument("action", choices=actions)
        if name != "qp":
            sp.add_argument("file")
            sp.add_argument("extra", nargs="*")
        if name == "mc":
            sp.add_argument("--T")
            sp.add_argument("--b")
            sp.add_argument("--phi")
            sp.add_argument("--nilpotency", type=int, default=8)
        if name in ("grpd", "vb", "rep"):
            sp.add_argument("--map")
        if name == "vb":
            sp.add_argument("--dual", action="store_true")
        if name == "qp":
            sp.add_argument("--algebra")
            sp.add_argument("--points")
            sp.add_argument("--npoints", type=int, default=3)
            sp.add_argument("--model", choices=["conjugation", "group"], default="conjugation")
            sp.add_argument("--check", action="store_true")
            sp.add_argument("--rank", action="store_true")
            sp.add_argument("--nondeg", action="store_true")
            sp.add_argument("--twist")
    return p


def dispatch(argv: Optional[List[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = RunConfig(args.scalar, args.tol, tuple(args.degree_window), args.max_level, args.seed, args.format,
                        args.timing, args.output)
    except UsageError as e:
        stderr.write(f"usage error: {e}\n\n{parser.format_usage()}\n{SCHEMA_HELP}\n")
        return 2
    fn, _ = COMMANDS[args.command]
    report = Report(f"{args.command} {args.action}")
    t0 = time.perf_counter()
    try:
        fn(args, cfg, report)
    except (UsageError, io.SchemaError) as e:
        report.status = "error"
        report.findings = [{"tag": type(e).__name__, "location": None, "details": {"message": str(e)}}]
        emit_report(report, cfg.fmt, stdout)
        stderr.write(f"input error: {e}\n{SCHEMA_HELP}\n")
        return 2
    except HswError as e:
        report.add(type(e).__name__, None, details={"message": str(e)})
    if cfg.timing:
        report.timing = time.perf_counter() - t0
    emit_report(report, cfg.fmt, stdout)
    return 0 if report.status == "pass" else 1


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()

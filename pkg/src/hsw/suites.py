"""Randomized property suites and the acceptance criteria.

Every suite is deterministic for a given seed: each instance draws from its
own ``random.Random(f"{seed}:{name}:{i}")`` so failures can be replayed one
instance at a time. Results carry their generation parameters; timing is kept
out of the serialized form.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

from .report import HswError, ValidationReport


@dataclass(frozen=True)
class SuiteConfig:
    seed: int = 0
    count: Optional[int] = None  # None: the criterion's own count
    max_level: int = 2


@dataclass
class SuiteResult:
    name: str
    title: str
    params: dict
    instances: int = 0
    failures: List[dict] = field(default_factory=list)
    stats: Dict[str, object] = field(default_factory=dict)
    elapsed: float = 0.0
    limit: Optional[float] = None

    @property
    def passed(self) -> bool:
        return not self.failures and (self.limit is None or self.elapsed <= self.limit)

    def fail(self, instance, tag: str, location=None, details=None) -> None:
        self.failures.append({"instance": instance, "tag": tag, "location": _plain(location),
                              "details": _plain(details)})

    def absorb(self, instance, rep: ValidationReport, prefix: str = "", limit: int = 3) -> bool:
        for f in list(rep)[:limit]:
            self.fail(instance, f"{prefix}{f.tag}", f.location, {"lhs": f.lhs, "rhs": f.rhs})
        return rep.ok

    def to_json(self, timing: bool = False) -> dict:
        out = {"name": self.name, "title": self.title, "params": self.params, "instances": self.instances,
               "status": "pass" if not self.failures else "fail", "failures": self.failures,
               "stats": _plain(self.stats)}
        if self.limit is not None:
            out["time_limit_s"] = self.limit
        if timing:
            out["elapsed_s"] = round(self.elapsed, 3)
        return out


def _plain(x):
    if x is None or isinstance(x, (bool, int, float, str)):
        return x
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return str(x)


def _rng(seed: int, name: str, i: int) -> random.Random:
    return random.Random(f"{seed}:{name}:{i}")


def _run(name: str, title: str, cfg: SuiteConfig, default: int, body: Callable, limit: Optional[float] = None
         ) -> SuiteResult:
    n = cfg.count if cfg.count is not None else default
    res = SuiteResult(name, title, {"seed": cfg.seed, "count": n, "max_level": cfg.max_level}, limit=limit)
    t0 = time.perf_counter()
    for i in range(n):
        try:
            body(_rng(cfg.seed, name, i), i, res)
        except HswError as e:
            res.fail(i, type(e).__name__, None, str(e))
        res.instances += 1
    res.elapsed = time.perf_counter() - t0
    return res


def _count(res: SuiteResult, key: str, by: int = 1) -> None:
    res.stats[key] = res.stats.get(key, 0) + by


# ---------------------------------------------------------------- criteria


def crossed_modules(cfg: SuiteConfig = SuiteConfig()) -> SuiteResult:
    from .lie2 import associated_dgla, check_crossed_module, check_dgla
    from .random_instances import RandomConfig, random_crossed_module

    rc = RandomConfig(-3, 3, 3)

    def body(rng, i, res):
        cm = random_crossed_module(rng, rc)
        if res.absorb(i, check_crossed_module(cm), "cm:"):
            res.absorb(i, check_dgla(associated_dgla(cm, validate=False)), "dgla:")
        _count(res, "dgla_total_dim", associated_dgla(cm, validate=False).V.total_dim())

    return _run("crossed-modules", "crossed modules and their dglas", cfg, 200, body, limit=60.0)


def inversion(cfg: SuiteConfig = SuiteConfig()) -> SuiteResult:
    from .lie2 import check_lie2_morphism, inversion_constraints, invert_lie2_morphism, tables_equal
    from .random_instances import random_inversion_instance

    def body(rng, i, res):
        inst = random_inversion_instance(rng)
        if not res.absorb(i, check_lie2_morphism(inst.phi), "phi:"):
            return
        psi = invert_lie2_morphism(inst.phi, inst.psi1A, inst.psi1G, inst.h, inst.hprime)
        res.absorb(i, inversion_constraints(inst.phi, psi, inst.h, inst.hprime))
        res.absorb(i, check_lie2_morphism(psi), "psi:")
        again = invert_lie2_morphism(inst.phi, inst.psi1A, inst.psi1G, inst.h, inst.hprime)
        if not tables_equal(psi.phi2, again.phi2):
            res.fail(i, "uniqueness")
        if psi.phi2:
            _count(res, "nonzero_psi2")

    return _run("inversion", "homotopy inversion", cfg, 50, body)


def _mc_instance(rng):
    from .mc import random_mc
    from .random_instances import RandomConfig, rand_element, random_crossed_module
    cm = random_crossed_module(rng, RandomConfig(min_degree=0, max_degree=3))
    m = random_mc(rng, cm)
    return cm, m, rand_element(rng, cm.A.space, 1)


def gauge_twist(cfg: SuiteConfig = SuiteConfig()) -> SuiteResult:
    from .mc import gauge_by_twist_element, mc_check, twist

    def body(rng, i, res):
        cm, m, T = _mc_instance(rng)
        if not res.absorb(i, mc_check(cm, m.Lambda, m.Pi), "mc:"):
            return
        tw = twist(m, T)
        if gauge_by_twist_element(m, T) != tw:
            res.fail(i, "gauge-equals-twist")
        res.absorb(i, mc_check(cm, tw.Lambda, tw.Pi), "twisted:")
        if cm.A.br(T, T) or cm.act(m.Pi, T):
            _count(res, "nonlinear_twists")

    return _run("gauge-twist", "gauge action equals twist", cfg, 100, body)


def mc_functoriality(cfg: SuiteConfig = SuiteConfig()) -> SuiteResult:
    from .lie2 import check_lie2_morphism
    from .mc import mc_check, mc_homotopy_transport, mc_pushforward, twist_compatibility
    from .random_instances import random_basis_change, random_homotoped

    def body(rng, i, res):
        cm, m, T = _mc_instance(rng)
        cm2, iso = random_basis_change(rng, cm)
        phi, _ = random_homotoped(rng, iso)
        if not res.absorb(i, check_lie2_morphism(phi), "phi:"):
            return
        res.absorb(i, twist_compatibility(phi, m, T))
        psi, h = random_homotoped(rng, phi)
        res.absorb(i, mc_homotopy_transport(phi, psi, h, m))
        pm = mc_pushforward(phi, m)
        res.absorb(i, mc_check(cm2, pm.Lambda, pm.Pi), "pushforward:")

    return _run("mc-functoriality", "MC functoriality", cfg, 100, body)


def lp_invariance(cfg: SuiteConfig = SuiteConfig()) -> SuiteResult:
    from .mc import check_lp_complex, lp_cohomology, lp_differential, twist

    def body(rng, i, res):
        cm, m, T = _mc_instance(rng)
        res.absorb(i, check_lp_complex(lp_differential(m)), "lp:")
        a, b = lp_cohomology(m), lp_cohomology(twist(m, T))
        if a != b:
            res.fail(i, "lp-cohomology", None, {"m": a, "twisted": b})

    return _run("lp-invariance", "LP cohomology under twists", cfg, 50, body)


def partition_inverse_suite(cfg: SuiteConfig = SuiteConfig()) -> SuiteResult:
    from .fingrpd import (check_covered_surjection, check_groupoid, check_partition_inverse,
                          random_covered_surjection, random_groupoid)

    def body(rng, i, res):
        g = random_groupoid(rng, 6, 30)
        if not res.absorb(i, check_groupoid(g), "groupoid:"):
            return
        cs = random_covered_surjection(rng, g)
        if res.absorb(i, check_covered_surjection(g, cs), "cover:"):
            res.absorb(i, check_partition_inverse(g, cs))
        _count(res, "arrows", g.n_arrows)

    return _run("partition-inverse", "partition-of-unity inverse", cfg, 30, body)


def _small_groupoid(rng):
    from .fingrpd import random_groupoid
    return random_groupoid(rng, 3, 8)


def _pullback_data(rng, v):
    from .linalg import Matrix, hstack
    from .random_instances import rand_matrix
    from .vbgrpd import fold_map
    g = v.base
    X, phi = fold_map(g)
    oi = {o: i for i, o in enumerate(g.objects)}
    base = [v.edims[oi[phi[x]]] for x in X]
    ex = [e + rng.randint(0, 1) for e in base]
    ph = [hstack(Matrix.eye(b), rand_matrix(rng, b, e - b)) for b, e in zip(base, ex)]
    return X, phi, ex, ph


def vb_bridge(cfg: SuiteConfig = SuiteConfig()) -> SuiteResult:
    from .homrep import random_split_vb, random_vb_equivalence
    from .vbgrpd import check_bridge, check_homotopy_equivalence, dual_witness, morita_witness_check, pullback_witness

    def body(rng, i, res):
        g = _small_groupoid(rng)
        eq = random_vb_equivalence(rng, g)
        if not res.absorb(i, check_homotopy_equivalence(eq), "equivalence:"):
            return
        res.absorb(i, check_bridge(eq), "bridge:")
        v = random_split_vb(rng, g)
        X, phi, ex, ph = _pullback_data(rng, v)
        v2, wit = pullback_witness(v, X, phi, ex, ph)
        if res.absorb(i, morita_witness_check(v, v2, wit), "witness:"):
            d1, d2, dw = dual_witness(v, v2, wit)
            res.absorb(i, morita_witness_check(d1, d2, dw), "dual-witness:")

    return _run("vb-bridge", "VB homotopy to Morita bridge and dual witnesses", cfg, 30, body)


def vb_cochains(cfg: SuiteConfig = SuiteConfig()) -> SuiteResult:
    from .homrep import random_vb_equivalence
    from .vbgrpd import (VBMorphism, compose_vb, dualize, split_cochain, vb_chain_map_and_homotopy,
                         vb_cochains as cochain_basis, vb_dual_intertwining)

    def body(rng, i, res):
        g = _small_groupoid(rng)
        eq = random_vb_equivalence(rng, g)
        v1 = eq.phi.source
        res.absorb(i, vb_chain_map_and_homotopy(compose_vb(eq.psi, eq.phi), VBMorphism.identity(v1), eq.h1,
                                                cfg.max_level), "homotopy:")
        vd = dualize(v1)
        for k in range(cfg.max_level):
            basis = cochain_basis(v1, k)
            for col in basis.cols():
                if not res.absorb(i, vb_dual_intertwining(v1, k, split_cochain(v1, k, col), vd), f"intertwine{k}:"):
                    break
            _count(res, f"cochains_level_{k}", basis.ncols)

    return _run("vb-cochains", "VB cochain homotopy and dual intertwining", cfg, 30, body)


def dictionary(cfg: SuiteConfig = SuiteConfig()) -> SuiteResult:
    from .homrep import (check_hm2_morphism, check_homotopy_module, decomposition_gauge, from_split_vb,
                         gauge_relations, random_gauge, random_module, redecompose, same_module, split_iso,
                         to_split_vb)
    from .homrep import default_decomposition
    from .vbgrpd import check_decomposition, check_vb_groupoid, check_vb_morphism, random_transport

    def body(rng, i, res):
        g = _small_groupoid(rng)
        m = random_module(rng, g)
        if not res.absorb(i, check_homotopy_module(m), "module:"):
            return
        v, dec = to_split_vb(m)
        if not res.absorb(i, check_vb_groupoid(v), "split:"):
            return
        if not same_module(from_split_vb(v, dec), m):
            res.fail(i, "module-roundtrip")
        vt, _ = random_transport(rng, v)
        d1 = default_decomposition(vt)
        res.absorb(i, check_decomposition(vt, d1), "decomposition:")
        m1 = from_split_vb(vt, d1)
        w, iso = split_iso(vt, d1, m1)
        if res.absorb(i, check_vb_morphism(iso), "vb-roundtrip:") and not iso.is_invertible():
            res.fail(i, "vb-roundtrip-invertible")
        d2 = redecompose(vt, d1, random_gauge(rng, vt))
        gauge = decomposition_gauge(vt, d1, d2)
        res.absorb(i, check_hm2_morphism(gauge), "gauge:")
        res.absorb(i, gauge_relations(gauge), "gauge-relations:")

    return _run("dictionary", "split VB groupoids and 2-term modules", cfg, 30, body)


def amm(cfg: SuiteConfig = SuiteConfig()) -> SuiteResult:
    from .qpois import (amm_structure, check_quasi_poisson, group_point, nondegenerate_at, orbit_point,
                        random_bivector, random_sl2_point, rank_at, rank_twist_invariance, sl2)

    g = sl2()
    data = amm_structure(g)
    npts = cfg.count if cfg.count is not None else 10
    ntw = 5
    res = SuiteResult("amm", "AMM structure on sl(2)", {"seed": cfg.seed, "points": npts, "twists": ntw,
                                                         "algebra": "sl2", "form": "trace"}, limit=120.0)
    t0 = time.perf_counter()
    rng = _rng(cfg.seed, "amm", 0)
    pts = [(group_point(g, random_sl2_point(rng)), group_point(g, random_sl2_point(rng))) for _ in range(npts)]
    res.absorb("points", check_quasi_poisson(data, pts), "", limit=5)
    for k, (a, s) in enumerate(pts):
        r = rank_at(data, s)
        nd, cert = nondegenerate_at(data, s)
        if r.rank != 0:
            res.fail(k, "rank", None, r.rank)
        if not nd:
            res.fail(k, "nondegenerate", None, cert.to_json())
        o = rank_at(data, orbit_point(a, s, g)).rank
        if o != r.rank:
            res.fail(k, "orbit-rank", None, {"point": r.rank, "conjugate": o})
        res.instances += 1
    readings = {}
    for j in range(ntw):
        T = random_bivector(rng, g)
        s = pts[j % npts][1]
        rep, rd = rank_twist_invariance(data, T, s, pts[:1])
        res.absorb(f"twist{j}", rep)
        for key, val in rd.items():
            readings[key] = readings.get(key, 0) + int(bool(val))
    res.stats["twisted_anchor_readings"] = readings
    res.elapsed = time.perf_counter() - t0
    return res


def group_rank(cfg: SuiteConfig = SuiteConfig()) -> SuiteResult:
    from .qpois import check_quasi_poisson, group_point, nondegenerate_at, quasi_poisson_group, random_sl2_point, rank_at, sl2

    g = sl2()
    data = quasi_poisson_group(g)
    res = SuiteResult("group-rank", "quasi-Poisson group over a point", {"seed": cfg.seed, "dim_g": g.n})
    t0 = time.perf_counter()
    rng = _rng(cfg.seed, "group-rank", 0)
    res.absorb("points", check_quasi_poisson(data, [(group_point(g, random_sl2_point(rng)),) for _ in range(3)]))
    r = rank_at(data)
    nd, cert = nondegenerate_at(data)
    res.stats.update({"rank": r.rank, "nondegenerate": nd, "dim_stack": cert.dim_stack})
    if r.rank != -3:
        res.fail(0, "rank", None, r.rank)
    if nd or cert.dim_stack == 0:
        res.fail(0, "obstruction", None, cert.to_json())
    res.instances = 1
    res.elapsed = time.perf_counter() - t0
    return res


CRITERIA = {
    1: crossed_modules, 2: inversion, 3: gauge_twist, 4: mc_functoriality, 5: lp_invariance, 6: partition_inverse_suite,
    7: vb_bridge, 8: vb_cochains, 9: dictionary, 10: amm, 11: group_rank,
}

ACCEPTANCE_TITLES = {
    1: "200 random crossed modules: axioms, dgla d^2 = 0, Jacobi, derivation (<= 60 s)",
    2: "inversion on 50 instances: four identities, unique Psi_2",
    3: "gauge equals twist on 100 instances",
    4: "MC functoriality on 100 instances",
    5: "LP cohomology invariance under twists on 50 instances",
    6: "partition-of-unity inverse on 30 groupoids (<= 6 objects, <= 30 arrows)",
    7: "VB bridge B.A = id + J, invertible, on 30 instances; dual Morita witnesses",
    8: "cochain homotopy through level 2 and dual intertwining on 30 instances",
    9: "dictionary roundtrip and two-decomposition gauge on 30 instances",
    10: "AMM on sl(2,Q), trace form: 10 points, rank 0, nondegenerate, orbits, 5 twists (<= 120 s)",
    11: "quasi-Poisson group over a point, dim g = 3: rank -3, degenerate",
}


def acceptance_line(k: int, res: SuiteResult) -> str:
    """One PASS/FAIL line per criterion; every comparison is exact, so the tolerance is 0."""
    budget = f", {res.elapsed:.1f}s of {res.limit:.0f}s" if res.limit is not None else ""
    return (f"criterion {k:2d}: {'PASS' if res.passed else 'FAIL'}  {ACCEPTANCE_TITLES[k]}"
            f"  [{res.instances} instances, tol 0 (exact){budget}]")


# ---------------------------------------------------------------- module suites (smaller counts)


def _core(cfg: SuiteConfig) -> SuiteResult:
    from .linalg import Matrix, inverse, kernel, rank, solve
    from .random_instances import rand_invertible, rand_matrix

    def body(rng, i, res):
        m, n = rng.randint(1, 5), rng.randint(1, 5)
        a = rand_matrix(rng, m, n)
        K = kernel(a)
        if rank(a) + K.ncols != n or not (a @ K).is_zero():
            res.fail(i, "rank-nullity")
        b = a @ rand_matrix(rng, n, 1)
        x = solve(a, b)
        if x is None or a @ x != b:
            res.fail(i, "solve")
        p = rand_invertible(rng, n)
        if p @ inverse(p) != Matrix.eye(n):
            res.fail(i, "inverse")

    return _run("core_algebra", "exact linear algebra", cfg, 20, body)


def _scaled(fn, count):
    def run(cfg: SuiteConfig) -> SuiteResult:
        return fn(SuiteConfig(cfg.seed, cfg.count if cfg.count is not None else count, cfg.max_level))
    return run


MODULE_SUITES = {
    "core_algebra": [_core],
    "lie2": [_scaled(crossed_modules, 20), _scaled(inversion, 5)],
    "mc": [_scaled(gauge_twist, 10), _scaled(mc_functoriality, 10), _scaled(lp_invariance, 5)],
    "fingrpd": [_scaled(partition_inverse_suite, 5)],
    "vbgrpd": [_scaled(vb_bridge, 2), _scaled(vb_cochains, 2)],
    "homrep": [_scaled(dictionary, 3)],
    "qpois": [_scaled(amm, 2), group_rank],
}


def run_suite(name: str, cfg: SuiteConfig = SuiteConfig()) -> List[SuiteResult]:
    if name == "all":
        return [r for key in MODULE_SUITES for r in run_suite(key, cfg)]
    if name == "acceptance":
        return [CRITERIA[k](cfg) for k in sorted(CRITERIA)]
    if name not in MODULE_SUITES:
        raise KeyError(name)
    return [fn(cfg) for fn in MODULE_SUITES[name]]

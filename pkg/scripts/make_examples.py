"""Write a deterministic set of example input files for the ``hsw`` CLI."""
import argparse
import os
import random

from hsw import io
from hsw.fingrpd import random_covered_surjection, random_groupoid
from hsw.homrep import random_module, random_split_vb, random_vb_equivalence
from hsw.lie2 import Lie2Morphism
from hsw.mc import random_mc
from hsw.qpois import random_bivector, random_sl2_point, sl2
from hsw.random_instances import (RandomConfig, rand_element, random_basis_change, random_crossed_module,
                                  random_homotoped, random_inversion_instance)
from hsw.suites import _pullback_data
from hsw.vbgrpd import fold_map, pullback_witness


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("outdir")
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    os.makedirs(args.outdir, exist_ok=True)
    rng = random.Random(args.seed)

    def out(name, kind, obj):
        io.write(os.path.join(args.outdir, name), kind, obj)

    cm = random_crossed_module(rng, RandomConfig(min_degree=0, max_degree=3))
    out("cm.json", "crossed_module", cm)
    m = random_mc(rng, cm)
    out("mc.json", "mc", m)
    out("T.json", "element", rand_element(rng, cm.A.space, 1))
    cm2, iso = random_basis_change(rng, cm)
    phi, _ = random_homotoped(rng, iso)
    out("phi.json", "lie2_morphism", phi)
    out("id.json", "lie2_morphism", Lie2Morphism.identity(cm2))
    out("inversion.json", "inversion", random_inversion_instance(rng))

    g = random_groupoid(rng, 3, 8)
    out("groupoid.json", "groupoid", g)
    X, phimap = fold_map(g)
    out("map.json", "object_map", (X, phimap))
    big = random_groupoid(rng, 6, 30)
    out("cover.json", "cover", (big, random_covered_surjection(rng, big)))

    out("module.json", "module", random_module(rng, g))
    v = random_split_vb(rng, g)
    out("vb.json", "vb_groupoid", v)
    out("equivalence.json", "vb_equivalence", random_vb_equivalence(rng, g))
    Xp, php, ex, ph = _pullback_data(rng, v)
    v2, wit = pullback_witness(v, Xp, php, ex, ph)
    out("witness.json", "morita_witness", (v, v2, wit))

    alg = sl2()
    out("sl2.json", "algebra", alg)
    out("points.json", "points", [random_sl2_point(rng) for _ in range(4)])
    out("twist.json", "exterior", random_bivector(rng, alg))


if __name__ == "__main__":
    main()

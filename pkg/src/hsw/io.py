"""Versioned JSON encoding (``"schema": "hsw/1"``) for every data type.

Rationals are written as ``"p/q"`` strings (integers as ``"n"``), floats as
JSON numbers. Groupoid labels may be strings, integers or nested lists, which
decode to tuples. Every ``dump_*`` has a ``load_*`` inverse.
"""
from __future__ import annotations

import contextvars
import json
from typing import Any, Callable, Dict

from .fingrpd import CoveredSurjection, FiniteGroupoid, make_groupoid
from .graded import GradedLinearMap, GradedVectorSpace, sp_clean
from .homrep import HomotopyModule2
from .lie2 import CrossedModule, GradedLieAlgebra, Lie2Morphism
from .linalg import Matrix, q
from .mc import MCElement
from .qpois import MatrixLieAlgebra
from .report import HswError
from .vbgrpd import VBGroupoid

SCHEMA = "hsw/1"

# Within one document, equal VB groupoid encodings decode to the same object,
# since morphism composition requires shared endpoints.
_INTERN: contextvars.ContextVar = contextvars.ContextVar("hsw_intern", default=None)


class SchemaError(HswError):
    """Malformed or unversioned input document."""


# ---------------------------------------------------------------- scalars and matrices


def enc_q(x) -> Any:
    if isinstance(x, float):
        return x
    return str(q(x))


def dec_q(x) -> Any:
    if isinstance(x, bool) or x is None:
        raise SchemaError(f"not a scalar: {x!r}")
    if isinstance(x, float):
        return x
    try:
        return q(x)
    except (ValueError, ZeroDivisionError, TypeError) as e:
        raise SchemaError(f"not a scalar: {x!r}") from e


def enc_matrix(m: Matrix) -> dict:
    return {"shape": [m.nrows, m.ncols], "rows": [[enc_q(v) for v in r] for r in m.rows]}


def dec_matrix(d) -> Matrix:
    if isinstance(d, list):
        if not d:
            raise SchemaError("empty matrix needs an explicit shape")
        return Matrix([[dec_q(v) for v in r] for r in d])
    try:
        nr, nc = d["shape"]
        rows = d["rows"]
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError("matrix needs 'shape' and 'rows'") from e
    if len(rows) != nr or any(len(r) != nc for r in rows):
        raise SchemaError(f"matrix rows do not match shape {nr}x{nc}")
    return Matrix([[dec_q(v) for v in r] for r in rows], nc)


def enc_label(x):
    if isinstance(x, tuple):
        return [enc_label(v) for v in x]
    if isinstance(x, frozenset):
        return sorted((enc_label(v) for v in x), key=repr)
    return x


def dec_label(x):
    if isinstance(x, list):
        return tuple(dec_label(v) for v in x)
    return x


# ---------------------------------------------------------------- graded data


def enc_space(V: GradedVectorSpace) -> dict:
    return {"dims": {str(d): n for d, n in V.dims_items}}


def dec_space(d) -> GradedVectorSpace:
    try:
        return GradedVectorSpace.of({int(k): int(v) for k, v in d["dims"].items()})
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        raise SchemaError("graded space needs 'dims'") from e


def enc_glm(f: GradedLinearMap) -> dict:
    return {"shift": f.shift, "blocks": {str(d): enc_matrix(m) for d, m in f.blocks_items}}


def dec_glm(d, source: GradedVectorSpace, target: GradedVectorSpace) -> GradedLinearMap:
    try:
        blocks = {int(k): dec_matrix(v) for k, v in d.get("blocks", {}).items()}
        return GradedLinearMap.of(source, target, int(d.get("shift", 0)), blocks)
    except HswError:
        raise
    except (TypeError, ValueError, AttributeError) as e:
        raise SchemaError(f"bad graded map: {e}") from e


def enc_element(x: dict) -> dict:
    """Degree-indexed sparse coordinates ``{"deg": {"index": value}}``."""
    out: Dict[str, dict] = {}
    for (d, i), v in sorted(sp_clean(x).items()):
        out.setdefault(str(d), {})[str(i)] = enc_q(v)
    return out


def dec_element(d) -> dict:
    out = {}
    try:
        for deg, comp in d.items():
            if isinstance(comp, list):
                items = enumerate(comp)
            else:
                items = ((int(i), v) for i, v in comp.items())
            for i, v in items:
                out[(int(deg), int(i))] = dec_q(v)
    except (TypeError, ValueError, AttributeError) as e:
        raise SchemaError(f"bad element: {e}") from e
    return sp_clean(out)


def enc_table(t: dict) -> list:
    out = []
    for (a, b), v in sorted(t.items()):
        if v:
            out.append([list(a), list(b), enc_element(v)])
    return out


def dec_table(rows) -> dict:
    try:
        return {(tuple(a), tuple(b)): dec_element(v) for a, b, v in rows}
    except (TypeError, ValueError) as e:
        raise SchemaError(f"bad structure table: {e}") from e


def enc_gla(g: GradedLieAlgebra) -> dict:
    return {"space": enc_space(g.space), "bracket": enc_table(g.table)}


def dec_gla(d) -> GradedLieAlgebra:
    return GradedLieAlgebra(dec_space(d["space"]), dec_table(d.get("bracket", [])))


def enc_cm(cm: CrossedModule) -> dict:
    return {"A": enc_gla(cm.A), "G": enc_gla(cm.G), "d": enc_glm(cm.d), "action": enc_table(cm.action)}


def dec_cm(d) -> CrossedModule:
    try:
        A, G = dec_gla(d["A"]), dec_gla(d["G"])
        return CrossedModule(A, G, dec_glm(d["d"], A.space, G.space), dec_table(d.get("action", [])))
    except KeyError as e:
        raise SchemaError(f"crossed module is missing {e}") from e


def enc_morphism(m: Lie2Morphism) -> dict:
    return {"source": enc_cm(m.source), "target": enc_cm(m.target), "phi1A": enc_glm(m.phi1A),
            "phi1G": enc_glm(m.phi1G), "phi2": enc_table(m.phi2)}


def dec_morphism(d) -> Lie2Morphism:
    try:
        S, T = dec_cm(d["source"]), dec_cm(d["target"])
        return Lie2Morphism(S, T, dec_glm(d["phi1A"], S.A.space, T.A.space),
                            dec_glm(d["phi1G"], S.G.space, T.G.space), dec_table(d.get("phi2", [])))
    except KeyError as e:
        raise SchemaError(f"morphism is missing {e}") from e


def enc_mc(m: MCElement) -> dict:
    return {"cm": enc_cm(m.cm), "Lambda": enc_element(m.Lambda), "Pi": enc_element(m.Pi)}


def dec_mc(d) -> MCElement:
    try:
        return MCElement(dec_cm(d["cm"]), dec_element(d["Lambda"]), dec_element(d["Pi"]))
    except KeyError as e:
        raise SchemaError(f"MC element is missing {e}") from e


# ---------------------------------------------------------------- groupoids


def enc_groupoid(g: FiniteGroupoid) -> dict:
    L, O = g.arrows, g.objects
    return {
        "objects": [enc_label(o) for o in O],
        "arrows": [{"id": enc_label(L[a]), "src": enc_label(O[g.src[a]]), "tgt": enc_label(O[g.tgt[a]])}
                   for a in range(g.n_arrows)],
        "comp": [[enc_label(L[a]), enc_label(L[b]), enc_label(L[c])] for (a, b), c in sorted(g.comp.items())],
        "inv": [[enc_label(L[a]), enc_label(L[g.inv[a]])] for a in range(g.n_arrows)],
        "units": [[enc_label(O[m]), enc_label(L[g.unit[m]])] for m in range(g.n_objects)],
    }


def dec_groupoid(d) -> FiniteGroupoid:
    try:
        objects = [dec_label(o) for o in d["objects"]]
        arrows = [dec_label(a["id"]) for a in d["arrows"]]
        src = {dec_label(a["id"]): dec_label(a["src"]) for a in d["arrows"]}
        tgt = {dec_label(a["id"]): dec_label(a["tgt"]) for a in d["arrows"]}
        units = d["units"]
        unit = ({dec_label(o): dec_label(a) for o, a in units} if isinstance(units, list)
                else {dec_label(o): dec_label(a) for o, a in units.items()})
        inv = {dec_label(a): dec_label(b) for a, b in d["inv"]}
        comp = {(dec_label(a), dec_label(b)): dec_label(c) for a, b, c in d["comp"]}
        return make_groupoid(objects, arrows, src, tgt, unit, inv, comp)
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"bad groupoid: {e!r}") from e


def enc_cover(g: FiniteGroupoid, cs: CoveredSurjection) -> dict:
    O = g.objects
    return {
        "phi": [enc_label(O[m]) for m in cs.phi],
        "cover": [[enc_label(O[m]) for m in sorted(u)] for u in cs.cover],
        "sections": [[[enc_label(O[m]), x] for m, x in sorted(s.items())] for s in cs.sections],
        "weights": [[enc_q(v) for v in w] for w in cs.weights],
    }


def dec_cover(d, g: FiniteGroupoid) -> CoveredSurjection:
    oi = {o: i for i, o in enumerate(g.objects)}
    try:
        return CoveredSurjection(
            tuple(oi[dec_label(m)] for m in d["phi"]),
            tuple(frozenset(oi[dec_label(m)] for m in u) for u in d["cover"]),
            tuple({oi[dec_label(m)]: int(x) for m, x in s} for s in d["sections"]),
            tuple(tuple(dec_q(v) for v in w) for w in d["weights"]),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"bad covered surjection: {e!r}") from e


# ---------------------------------------------------------------- VB groupoids and modules


def _pairs(g: FiniteGroupoid, mats: dict) -> list:
    L = g.arrows
    return [[enc_label(L[a]), enc_label(L[b]), enc_matrix(m)] for (a, b), m in sorted(mats.items())]


def _dec_pairs(rows, g: FiniteGroupoid) -> dict:
    ai = {a: i for i, a in enumerate(g.arrows)}
    return {(ai[dec_label(a)], ai[dec_label(b)]): dec_matrix(m) for a, b, m in rows}


def enc_vb(v: VBGroupoid) -> dict:
    return {
        "base": enc_groupoid(v.base),
        "vdims": list(v.vdims), "edims": list(v.edims),
        "sV": [enc_matrix(m) for m in v.sV], "tV": [enc_matrix(m) for m in v.tV],
        "mV": _pairs(v.base, v.mV),
        "invV": [enc_matrix(m) for m in v.invV], "uV": [enc_matrix(m) for m in v.uV],
    }


def dec_vb(d) -> VBGroupoid:
    cache = _INTERN.get()
    key = json.dumps(d, sort_keys=True) if cache is not None else None
    if key is not None and key in cache:
        return cache[key]
    v = _dec_vb(d)
    if key is not None:
        cache[key] = v
    return v


def _dec_vb(d) -> VBGroupoid:
    try:
        g = dec_groupoid(d["base"])
        return VBGroupoid(g, tuple(d["vdims"]), tuple(d["edims"]),
                          tuple(dec_matrix(m) for m in d["sV"]), tuple(dec_matrix(m) for m in d["tV"]),
                          _dec_pairs(d["mV"], g), tuple(dec_matrix(m) for m in d["invV"]),
                          tuple(dec_matrix(m) for m in d["uV"]))
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"bad VB groupoid: {e!r}") from e


def enc_module(m: HomotopyModule2) -> dict:
    return {
        "base": enc_groupoid(m.base), "cdims": list(m.cdims), "edims": list(m.edims),
        "rho": [enc_matrix(x) for x in m.rho], "RE": [enc_matrix(x) for x in m.RE],
        "RC": [enc_matrix(x) for x in m.RC], "Omega": _pairs(m.base, m.Omega),
    }


def dec_module(d) -> HomotopyModule2:
    try:
        g = dec_groupoid(d["base"])
        return HomotopyModule2(g, tuple(d["cdims"]), tuple(d["edims"]), tuple(dec_matrix(x) for x in d["rho"]),
                               tuple(dec_matrix(x) for x in d["RE"]), tuple(dec_matrix(x) for x in d["RC"]),
                               _dec_pairs(d["Omega"], g))
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"bad homotopy module: {e!r}") from e


def enc_vb_morphism(f) -> dict:
    return {"source": enc_vb(f.source), "target": enc_vb(f.target), "arrow_map": list(f.arrow_map),
            "object_map": list(f.object_map), "maps": [enc_matrix(m) for m in f.maps],
            "obj_maps": [enc_matrix(m) for m in f.obj_maps]}


def dec_vb_morphism(d):
    from .vbgrpd import VBMorphism
    try:
        return VBMorphism(dec_vb(d["source"]), dec_vb(d["target"]), tuple(int(a) for a in d["arrow_map"]),
                          tuple(int(x) for x in d["object_map"]), tuple(dec_matrix(m) for m in d["maps"]),
                          tuple(dec_matrix(m) for m in d["obj_maps"]))
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"bad VB morphism: {e!r}") from e


def enc_equivalence(eq) -> dict:
    return {"phi": enc_vb_morphism(eq.phi), "psi": enc_vb_morphism(eq.psi),
            "h1": [enc_matrix(m) for m in eq.h1], "h2": [enc_matrix(m) for m in eq.h2]}


def dec_equivalence(d):
    from .vbgrpd import HomotopyEquivalence
    try:
        return HomotopyEquivalence(dec_vb_morphism(d["phi"]), dec_vb_morphism(d["psi"]),
                                   tuple(dec_matrix(m) for m in d["h1"]), tuple(dec_matrix(m) for m in d["h2"]))
    except (KeyError, TypeError) as e:
        raise SchemaError(f"bad homotopy equivalence: {e!r}") from e


def enc_object_map(pairs) -> dict:
    X, phi = pairs
    return {"X": [enc_label(x) for x in X], "phi": [[enc_label(x), enc_label(phi[x])] for x in X]}


def dec_object_map(d) -> tuple:
    try:
        X = tuple(dec_label(x) for x in d["X"])
        phi = {dec_label(x): dec_label(m) for x, m in d["phi"]}
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"bad object map: {e!r}") from e
    if set(phi) != set(X):
        raise SchemaError("object map must be defined on every point of X")
    return X, phi


def enc_witness(w) -> dict:
    v1, v2, wit = w
    return {"v1": enc_vb(v1), "v2": enc_vb(v2), "X": [enc_label(x) for x in wit.X],
            "phi1": [[enc_label(x), enc_label(wit.phi1[x])] for x in wit.X],
            "phi2": [[enc_label(x), enc_label(wit.phi2[x])] for x in wit.X],
            "arrow_iso": list(wit.arrow_iso), "equivalence": enc_equivalence(wit.equivalence),
            "pull1": enc_vb(wit.pull1), "pull2": enc_vb(wit.pull2)}


def dec_witness(d) -> tuple:
    from .vbgrpd import MoritaWitness
    try:
        X = tuple(dec_label(x) for x in d["X"])
        wit = MoritaWitness(X, {dec_label(x): dec_label(m) for x, m in d["phi1"]},
                            {dec_label(x): dec_label(m) for x, m in d["phi2"]},
                            tuple(int(a) for a in d["arrow_iso"]), dec_equivalence(d["equivalence"]),
                            dec_vb(d["pull1"]), dec_vb(d["pull2"]))
        return dec_vb(d["v1"]), dec_vb(d["v2"]), wit
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"bad Morita witness: {e!r}") from e


def enc_inversion(inst) -> dict:
    return {"phi": enc_morphism(inst.phi), "psi1A": enc_glm(inst.psi1A), "psi1G": enc_glm(inst.psi1G),
            "h": enc_glm(inst.h), "hprime": enc_glm(inst.hprime)}


def dec_inversion(d):
    from .random_instances import InversionInstance
    try:
        phi = dec_morphism(d["phi"])
        S, T = phi.source, phi.target
        return InversionInstance(phi, dec_glm(d["psi1A"], T.A.space, S.A.space),
                                 dec_glm(d["psi1G"], T.G.space, S.G.space),
                                 dec_glm(d["h"], S.G.space, S.A.space), dec_glm(d["hprime"], T.G.space, T.A.space))
    except KeyError as e:
        raise SchemaError(f"inversion data is missing {e}") from e


def enc_cover_doc(pair) -> dict:
    g, cs = pair
    return {"groupoid": enc_groupoid(g), "cover": enc_cover(g, cs)}


def dec_cover_doc(d) -> tuple:
    try:
        g = dec_groupoid(d["groupoid"])
        return g, dec_cover(d["cover"], g)
    except KeyError as e:
        raise SchemaError(f"cover document is missing {e}") from e


# ---------------------------------------------------------------- matrix Lie algebras


def enc_algebra(g: MatrixLieAlgebra) -> dict:
    out = {"name": g.name, "basis": [enc_matrix(b) for b in g.basis], "K": enc_matrix(g.K)}
    if g.casimir is not None:
        out["casimir"] = enc_matrix(g.casimir)
    return out


def dec_algebra(d) -> MatrixLieAlgebra:
    from .qpois import matrix_lie_algebra
    try:
        basis = [dec_matrix(b) for b in d["basis"]]
        K = dec_matrix(d["K"]) if "K" in d else None
        cas = dec_matrix(d["casimir"]) if "casimir" in d else None
        return matrix_lie_algebra(d.get("name", "custom"), basis, K, cas)
    except (KeyError, TypeError) as e:
        raise SchemaError(f"bad algebra: {e!r}") from e


def enc_points(pts) -> list:
    return [enc_matrix(p) for p in pts]


def dec_points(d) -> list:
    if not isinstance(d, list):
        raise SchemaError("points must be a list of matrices")
    return [dec_matrix(p) for p in d]


def enc_exterior(t: dict) -> list:
    return [[list(k), enc_q(v)] for k, v in sorted(t.items()) if v]


def dec_exterior(rows) -> dict:
    try:
        return {tuple(int(i) for i in k): dec_q(v) for k, v in rows}
    except (TypeError, ValueError) as e:
        raise SchemaError(f"bad exterior element: {e}") from e


# ---------------------------------------------------------------- documents

ENCODERS: Dict[str, Callable] = {
    "space": enc_space, "crossed_module": enc_cm, "lie2_morphism": enc_morphism, "mc": enc_mc,
    "groupoid": enc_groupoid, "vb_groupoid": enc_vb, "module": enc_module, "algebra": enc_algebra,
    "points": enc_points, "exterior": enc_exterior, "element": enc_element,
    "vb_morphism": enc_vb_morphism, "vb_equivalence": enc_equivalence, "object_map": enc_object_map,
    "morita_witness": enc_witness, "inversion": enc_inversion, "cover": enc_cover_doc,
}
DECODERS: Dict[str, Callable] = {
    "space": dec_space, "crossed_module": dec_cm, "lie2_morphism": dec_morphism, "mc": dec_mc,
    "groupoid": dec_groupoid, "vb_groupoid": dec_vb, "module": dec_module, "algebra": dec_algebra,
    "points": dec_points, "exterior": dec_exterior, "element": dec_element,
    "vb_morphism": dec_vb_morphism, "vb_equivalence": dec_equivalence, "object_map": dec_object_map,
    "morita_witness": dec_witness, "inversion": dec_inversion, "cover": dec_cover_doc,
}


def document(kind: str, obj, **extra) -> dict:
    doc = {"schema": SCHEMA, "kind": kind, "data": ENCODERS[kind](obj)}
    doc.update(extra)
    return doc


def parse_document(doc, kind: str):
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA:
        raise SchemaError(f"expected a document with \"schema\": \"{SCHEMA}\"")
    if doc.get("kind") != kind:
        raise SchemaError(f"expected kind {kind!r}, got {doc.get('kind')!r}")
    if "data" not in doc:
        raise SchemaError("document has no 'data'")
    token = _INTERN.set({})
    try:
        return DECODERS[kind](doc["data"])
    finally:
        _INTERN.reset(token)


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e}") from e


def read(path: str, kind: str):
    try:
        with open(path) as fh:
            return parse_document(loads(fh.read()), kind)
    except OSError as e:
        raise SchemaError(f"cannot read {path}: {e.strerror}") from e


def write(path: str, kind: str, obj, **extra) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(document(kind, obj, **extra)) + "\n")


def roundtrip(kind: str, obj):
    return parse_document(loads(dumps(document(kind, obj))), kind)

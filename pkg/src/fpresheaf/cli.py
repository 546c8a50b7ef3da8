"""Batch front end: ``fpresheaf run <spec>``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import growth as gr
from . import kappa as ka
from . import linalg as la
from . import linfun as lf
from . import pgrp as pg
from . import presheaf as ps
from .cache import ActionCache
from .site import TruncatedSite, WindowExceeded
from .specfile import (
    ANALYSES,
    CONSTRUCTORS,
    Analysis,
    Definition,
    SemanticError,
    SpecDocument,
    SpecError,
    bind,
    definition_hashes,
    parse,
)

log = logging.getLogger(__name__)

EXIT_OK, EXIT_INTERNAL, EXIT_SEMANTIC, EXIT_VERDICT = 0, 1, 2, 3


class AnalysisError(Exception):
    pass


@dataclass
class Section:
    analysis: str
    target: str
    status: str  # "ok" or a cap/window verdict name
    fields: dict
    table: tuple[list[str], list[list]] | None = None


@dataclass
class Report:
    provenance: dict
    sections: list[Section] = field(default_factory=list)

    @property
    def has_verdicts(self) -> bool:
        return any(s.status != "ok" for s in self.sections)


def _plain(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    if isinstance(v, str) or v is None:
        return v
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_plain(x) for x in v]
    return repr(v)  # window verdict singletons


def _degree_status(v) -> str:
    return "ok" if isinstance(v, int) else repr(v)


# ---------------------------------------------------------------------------
# building definitions


class Workspace:
    def __init__(self, doc: SpecDocument, seed: int = 0, cache_dir: str | None = None):
        self.doc = doc
        self.seed = seed
        self.site = TruncatedSite(doc.p, doc.window, doc.cap)
        self.cache = ActionCache(cache_dir)
        self.hashes = definition_hashes(doc)
        self.objects: dict[str, object] = {}
        self.failures: dict[str, str] = {}

    def _path(self, v: str) -> Path:
        return Path(v) if Path(v).is_absolute() else self.doc.base_dir / v

    def _construct(self, d: Definition, args: dict):
        site, kind, c = self.site, d.kind, d.expr.name
        obj = self.objects
        if kind == "presheaf":
            if c in ("sym", "ext"):
                return ps.underlying_sets(getattr(lf, c)(site, args["k"]))
            if c == "ibar":
                return ps.underlying_sets(lf.ibar(site))
            if c == "gr_le":
                return ps.gr_le(site, args["n"])
            if c == "gr":
                return ps.gr(site, args["n"])
            if c == "homset":
                return ps.homset(site, args["n"])
            if c == "sets":
                return ps.underlying_sets(obj[args["source"]])
            if c == "splitrank":
                return ps.splitrank(obj[args["source"]])
            if c in ("product", "coproduct", "wedge"):
                return getattr(ps, c)(obj[args["a"]], obj[args["b"]])
            if c == "induced":
                try:
                    Z = ps.EndSetTable.load(self._path(args["table"]), site.p)
                except (ValueError, OSError) as exc:
                    raise SemanticError(d.line, d.col, f"bad table: {exc}", self.doc.path) from None
                if Z.n != args["n"]:
                    raise SemanticError(d.line, d.col, f"table is for n={Z.n}, not n={args['n']}", self.doc.path)
                bad = Z.law_violation()
                if bad is not None:
                    raise SemanticError(d.line, d.col, f"table violates the action law at {bad}", self.doc.path)
                return ps.induced(Z, site).presheaf
        if kind == "linear":
            if c in ("sym", "ext"):
                return getattr(lf, c)(site, args["k"])
            if c == "ibar":
                return lf.ibar(site)
            if c == "freehom":
                return lf.freehom(site, args["n"])
            if c == "sum":
                return lf.direct_sum(obj[args["a"]], obj[args["b"]])
            if c == "tensor":
                return lf.tensor(obj[args["a"]], obj[args["b"]])
            if c == "linearize":
                return lf.linearize(obj[args["source"]])
        if kind == "pgroup":
            if c == "heisenberg":
                return pg.heisenberg(site)
            if c == "elemab":
                return pg.elemab(obj[args["source"]])
            if c == "zmod":
                return pg.zmod(site, args["order"])
        raise AssertionError(f"unhandled constructor {kind} {c}")

    def _groups(self, d: Definition, args: dict) -> list[pg.FiniteGroup]:
        site, c = self.site, d.expr.name
        if c == "heisenberg":
            return [pg.heisenberg_group(k, site.p) for k in range(site.N + 1)]
        if c == "elemab":
            return [pg.elementary_abelian_group(n, site.p) for n in self.objects[args["source"]].dims]
        return [pg.cyclic_group(args["order"])] * (site.N + 1)

    def _args(self, d: Definition) -> dict:
        params = CONSTRUCTORS[d.kind][d.expr.name]
        out = {}
        for name, arg in bind(d.expr, params, self.doc.path).items():
            v = arg.value
            out[name] = v[1] ** v[2] if isinstance(v, tuple) else v
        return out

    def _from_cache(self, d: Definition, args: dict):
        keys = list(self.site.generators)
        z = self.cache.load(self.site.p, self.site.N, self.hashes[d.name])
        if z is None:
            return None
        try:
            acts = {k: z[f"a{i}"] for i, k in enumerate(keys)}
            if d.kind == "linear":
                return lf.LinFunctor(self.site, z["dims"], acts, d.name)
            X = ps.SetPresheaf(self.site, z["sizes"], acts, d.name)
            if d.kind == "pgroup":
                groups = self._groups(d, args)
                if [G.order for G in groups] != list(X.sizes):
                    return None
                X.labels = [G.elements() for G in groups]
                return pg.PGroupPresheaf(self.site, groups, X, d.name)
            return X
        except (KeyError, ValueError):
            return None

    def _to_cache(self, d: Definition, built) -> None:
        if d.kind == "linear" and built.presentation is not None:
            return  # cheap to rebuild from its presheaf, and the presentation matters
        keys = list(self.site.generators)
        X = built.underlying if d.kind == "pgroup" else built
        arrays = {f"a{i}": X.actions[k] for i, k in enumerate(keys)}
        if d.kind == "linear":
            arrays["dims"] = np.array(X.dims, dtype=np.int64)
        else:
            arrays["sizes"] = np.array(X.sizes, dtype=np.int64)
        self.cache.store(self.site.p, self.site.N, self.hashes[d.name], arrays)

    def _validate(self, d: Definition, built) -> None:
        if d.kind == "pgroup":
            ok, msg = built.validate(self.seed)
        else:
            rep = ps.validate(built, self.seed)
            ok, msg = rep.ok, f"not functorial: {rep.witness}"
        if not ok:
            raise SemanticError(d.line, d.col, f"{d.name}: {msg}", self.doc.path)

    def build(self) -> None:
        for d in self.doc.definitions:
            deps = [a.value for a in d.expr.args if isinstance(a.value, str) and a.value in self.doc.kinds()]
            failed = [x for x in deps if x in self.failures]
            if failed:
                self.failures[d.name] = self.failures[failed[0]]
                continue
            args = self._args(d)
            try:
                cached = self._from_cache(d, args) if not (d.kind == "linear" and d.expr.name in ("linearize", "freehom")) else None
                built = cached if cached is not None else self._construct(d, args)
                built.name = d.name
                if d.kind == "pgroup":
                    built.underlying.name = d.name
                self._validate(d, built)
            except la.CapExceeded:
                self.failures[d.name] = "CapExceeded"
                continue
            except WindowExceeded:
                self.failures[d.name] = "WindowExceeded"
                continue
            if cached is None:
                self._to_cache(d, built)
            self.objects[d.name] = built


# ---------------------------------------------------------------------------
# analyses


def _growth(obj, args):
    prof = gr.profile(obj)
    fit = gr.degree_fit(prof)
    rows = [[t, c, repr(v)] for t, (c, v) in enumerate(zip(prof.cardinalities, prof.values))]
    fields = {
        "cardinalities": list(prof.cardinalities),
        "log_p": list(prof.values),
        "degree": fit.describe(),
        "method": fit.method,
    }
    status = "ok" if fit.degree is not gr.NonPolynomialOnWindow else "NonPolynomialOnWindow"
    return status, fields, (["t", "cardinality", "log_p"], rows)


def _degree(obj, args, kind):
    if kind == "presheaf":
        res = lf.finiteness_degree(obj)
        tower = [
            {
                "n": st.n,
                "dims": list(st.quotient.functor.dims),
                "partial_dims": list(st.quotient.partial_dims),
                "injective": st.injective,
            }
            for st in res.tower
        ]
        rows = [[t["n"], " ".join(map(str, t["dims"])), t["injective"]] for t in tower]
        fields = {"degree": res.degree, "tower": tower}
        return _degree_status(res.degree), fields, (["n", "dims", "injective"], rows)
    if kind == "linear":
        deg = lf.poly_degree(obj)
        return _degree_status(deg), {"dims": list(obj.dims), "degree": deg}, None
    deg = pg.group_poly_degree(obj)
    return _degree_status(deg), {"orders": [G.order for G in obj.groups], "degree": deg}, None


def _rankfilt(X, args):
    f = ps.rank_filtration(X)
    N = X.site.N
    rows, ok = [], True
    for n in range(N + 1):
        for d in range(n, N + 1):
            good, lhs, _ = ps.subquotient_count_check(X, n, d, f)
            ok &= good
            rows.append([n, d, lhs, int(f.regular(n).size), la.gaussian_binomial(d, d - n, X.site.p), good])
    fields = {
        "sizes": list(X.sizes),
        "regular_counts": f.regular_counts(),
        "generated_by": f.generated_by(),
        "counts_match": ok,
    }
    return "ok", fields, (["n", "d", "new", "regular", "subspaces", "match"], rows)


def _kappa(X, args):
    dims = ka.poincare(X, args["max"]).dims
    return "ok", {"dims": list(dims)}, (["n", "dim"], [[n, v] for n, v in enumerate(dims)])


def _hom(obj, other, kinds, cap):
    k1, k2 = kinds
    if k1 == "presheaf" and k2 == "presheaf":
        maps = ps.set_maps(obj, other, limit=cap + 1)
        if len(maps) > cap:
            return "CapExceeded", {"kind": "set", "count_at_least": len(maps)}, None
        return "ok", {"kind": "set", "count": len(maps)}, None
    source = lf.linearize(obj) if k1 == "presheaf" else obj
    dim = lf.nat_hom_dim(source, other)
    # beyond the window's reach the answer is only valid for the truncated site
    scope = "exact" if isinstance(lf.poly_degree(source), int) else "window-relative"
    if k1 == "presheaf":
        return "ok", {"kind": "adjoint", "dim": dim, "count": other.site.p**dim, "scope": scope}, None
    return "ok", {"kind": "linear", "dim": dim, "scope": scope}, None


def _pfinite(G, args):
    r = pg.p_finite_test(G)
    fields = {
        "verdict": r.verdict,
        "total_dims": list(r.total.dims),
        "degree": r.degree,
        "gamma_degree": r.gamma_degree,
        "pieces_finite": r.pieces_finite,
        "check": "statement-level",
    }
    return ("ok" if r.p_finite else r.verdict), fields, None


def _frattini(G, args):
    S = pg.p_derived_series(G)
    fields = {
        "length": S.length,
        "graded_dims": [list(piece.dims) for piece in S.graded],
        "graded_degrees": [lf.poly_degree(piece) for piece in S.graded],
        "natural": pg.frattini_naturality_violation(S) is None,
    }
    return "ok", fields, None


def _augfilt(G, args):
    H = G.groups[args["dim"]]
    r = pg.augmentation_filtration(H, G.p)
    fields = {
        "order": H.order,
        "dims": r.dims,
        "nilpotency": r.nilpotency,
        "indecomposables": r.indecomposables,
        "frattini_quotient_dim": r.frattini_quotient_dim,
        "agrees": r.agrees,
    }
    return "ok", fields, None


def run_analysis(ws: Workspace, a: Analysis) -> Section:
    req = a.request
    params, _ = ANALYSES[req.name]
    args = {k: v.value for k, v in bind(req, params, ws.doc.path).items()}
    kinds = ws.doc.kinds()
    names = [a.target] + [v for v in args.values() if isinstance(v, str) and v in kinds]
    for n in names:
        if n in ws.failures:
            return Section(req.name, a.target, ws.failures[n], {"detail": f"definition {n!r} not built"})
    obj = ws.objects[a.target]
    try:
        if req.name == "growth":
            out = _growth(obj, args)
        elif req.name == "degree":
            out = _degree(obj, args, kinds[a.target])
        elif req.name == "rankfilt":
            out = _rankfilt(obj, args)
        elif req.name == "kappa":
            out = _kappa(obj, args)
        elif req.name == "hom":
            other = args["other"]
            out = _hom(obj, ws.objects[other], (kinds[a.target], kinds[other]), ws.site.cap)
        elif req.name == "pfinite":
            out = _pfinite(obj, args)
        elif req.name == "frattini":
            out = _frattini(obj, args)
        else:
            out = _augfilt(obj, args)
    except la.CapExceeded as exc:
        return Section(req.name, a.target, "CapExceeded", {"detail": str(exc)})
    except WindowExceeded as exc:
        return Section(req.name, a.target, "WindowExceeded", {"detail": str(exc)})
    except Exception as exc:
        raise AnalysisError(f"{ws.doc.path}:{a.line}: analyze {a.target}: {req.name}: {exc}") from exc
    status, fields, table = out
    return Section(req.name, a.target, status, {k: _plain(v) for k, v in fields.items()}, _plain(table) if table else None)


def run(doc: SpecDocument, seed: int = 0, threads: int = 1, cache_dir: str | None = None) -> Report:
    ws = Workspace(doc, seed, cache_dir)
    ws.build()
    prov = {
        "tool": "fpresheaf",
        "version": __version__,
        "p": doc.p,
        "window": doc.window,
        "cap": doc.cap,
        "seed": seed,
    }
    if threads > 1 and len(doc.analyses) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            sections = list(pool.map(lambda a: run_analysis(ws, a), doc.analyses))
    else:
        sections = [run_analysis(ws, a) for a in doc.analyses]
    return Report(prov, sections)


# ---------------------------------------------------------------------------
# emitters


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list) and all(not isinstance(x, (list, dict)) for x in v):
        return " ".join(_cell(x) for x in v)
    if isinstance(v, (list, dict)):
        return json.dumps(v, separators=(",", ":"))
    return "" if v is None else str(v)


def _prov_line(prov: dict) -> str:
    return " ".join(f"{k}={v}" for k, v in prov.items())


def emit_text(rep: Report) -> str:
    out = [f"# {_prov_line(rep.provenance)}"]
    for s in rep.sections:
        out.append(f"[{s.target}] {s.analysis}: {s.status}")
        for k, v in s.fields.items():
            out.append(f"  {k}: {_cell(v)}")
        if s.table:
            header, rows = s.table
            out.append("  " + "  ".join(header))
            for r in rows:
                out.append("  " + "  ".join(_cell(x) for x in r))
    return "\n".join(out) + "\n"


def emit_csv(rep: Report) -> str:
    buf = io.StringIO()
    buf.write(f"# {_prov_line(rep.provenance)}\n")
    w = csv.writer(buf, lineterminator="\n")
    for s in rep.sections:
        buf.write(f"# analysis={s.analysis} target={s.target} status={s.status}\n")
        if s.table:
            header, rows = s.table
            w.writerow(header)
            w.writerows([_cell(x) for x in r] for r in rows)
        else:
            w.writerow(["key", "value"])
            w.writerows([k, _cell(v)] for k, v in s.fields.items())
    return buf.getvalue()


def emit_jsonl(rep: Report) -> str:
    lines = [json.dumps({"type": "provenance", **rep.provenance})]
    for s in rep.sections:
        rec = {"type": "analysis", "analysis": s.analysis, "target": s.target, "status": s.status, "result": s.fields}
        lines.append(json.dumps(rec))
    return "\n".join(lines) + "\n"


EMITTERS = {"text": emit_text, "csv": emit_csv, "jsonl": emit_jsonl}


def emit(rep: Report, fmt: str) -> bytes:
    return EMITTERS[fmt](rep).encode("utf-8")


# ---------------------------------------------------------------------------
# entry point


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fpresheaf", description="Finite presheaf analyses on a dimension window.")
    ap.add_argument("--version", action="version", version=f"fpresheaf {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the analyses of a spec file")
    r.add_argument("spec", help="spec file path")
    r.add_argument("--format", choices=sorted(EMITTERS), default="text")
    r.add_argument("--strict", action="store_true", help="exit 3 when any analysis ends in a cap/window verdict")
    r.add_argument("--cache-dir", default=None)
    r.add_argument("--threads", type=_positive, default=1)
    r.add_argument("--seed", type=_u64, default=0)
    r.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        doc = parse(args.spec)
        rep = run(doc, seed=args.seed, threads=args.threads, cache_dir=args.cache_dir)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC
    except AnalysisError as exc:
        cause = exc.__cause__
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC if isinstance(cause, ValueError) else EXIT_INTERNAL
    sys.stdout.buffer.write(emit(rep, args.format))
    sys.stdout.flush()
    if args.strict and rep.has_verdicts:
        return EXIT_VERDICT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

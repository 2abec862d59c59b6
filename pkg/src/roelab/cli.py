"""Batch command-line front end: models in, JSON/CSV out.

Subcommands: build, classify, kgroup, index, edge-index, verify-bec, sweep,
spectrum.  Structured results are JSON (reproducible bit-for-bit given the
same flags and seed, modulo the generated_at stamp); sweeps emit CSV with one
row per (seed, parameter) point.  Exit codes: 0 success / certification pass,
1 computation failure, 2 usage or config error.  ROELAB_JOBS sets the default
sweep parallelism.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone

import numpy as np

from .bulkedge import BECConfig, BulkEdgeError, make_bulk, verify_bec
from .geometry import GeometryError, PointSet, generate, partition_halfspace
from .indices import (PairingError, chern_even, chern_odd, edge_conductance,
                      edge_fredholm, kane_mele, occupied_projection,
                      trace_per_unit_volume)
from .models import MODELS, ModelError, build_model, default_pointset
from .operators import (ControlledOperator, OperatorError, certify_gap, compress,
                        flatten)
from .symmetry import (CARTAN_LABELS, SymmetryError, SymmetrySpec, classify,
                       kgroup_point, kgroup_reflection, kgroup_rotation,
                       spec_from_label)

USER_ERRORS = (GeometryError, SymmetryError, OperatorError, PairingError,
               ModelError, BulkEdgeError)


def _stamp() -> str:
    return datetime.now(timezone.utc).isoformat()


def _write_json(path: str | None, doc: dict):
    doc = dict(doc)
    doc["generated_at"] = _stamp()
    text = json.dumps(doc, indent=2, sort_keys=True)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def save_model(path: str, H: ControlledOperator, spec: SymmetrySpec,
               model: dict | None = None):
    doc = {"format": "roelab-model", "version": 1,
           "model": model or {}, "operator": H.to_json(),
           "symmetry": spec.to_json(), "generated_at": _stamp()}
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path: str):
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != "roelab-model":
        raise ModelError(f"{path} is not a roelab model file")
    H = ControlledOperator.from_json(doc["operator"])
    spec = SymmetrySpec.from_json(doc["symmetry"])
    return H, spec, doc.get("model", {})


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _float_list(text: str):
    return [float(v) for v in text.split(",") if v]


def cmd_build(args, extra_params: dict) -> int:
    params = dict(extra_params)
    size = params.pop("size", None) or params.pop("n", None) or 20
    ps = default_pointset(args.model, float(size), params)
    disorder = float(params.pop("disorder", 0.0))
    seed = int(params.pop("seed", 0))
    module, H, spec = build_model(args.model, params, ps,
                                  disorder=disorder, seed=seed)
    save_model(args.out, H, spec,
               model={"name": args.model, "params": params, "size": size,
                      "disorder": disorder, "seed": seed})
    print(f"wrote {args.out}: {module.n_sites} sites x {module.orbitals_per_site} "
          f"orbitals, class {classify(spec)}")
    return 0


def cmd_classify(args, extra) -> int:
    spec = SymmetrySpec(
        has_T=args.T is not None, T_sq=args.T,
        has_C=args.C is not None, C_sq=args.C,
        has_P=bool(args.P))
    label = classify(spec)
    if args.json:
        _write_json(args.out, {"label": label})
    else:
        print(label)
    return 0


def cmd_kgroup(args, extra) -> int:
    if args.rotation is not None:
        desc = kgroup_rotation(args.label, args.d, args.rotation)
    elif args.reflection:
        spec = spec_from_label(args.label, CR_sign=args.cr_sign,
                               TR_sign=args.tr_sign, PR_sign=args.pr_sign)
        desc = kgroup_reflection(spec, args.d)
    else:
        desc = kgroup_point(args.label, args.d)
    if args.json:
        _write_json(args.out, {"label": args.label, "d": args.d,
                               "group": str(desc), "provenance": desc.provenance})
    else:
        print(desc)
    return 0


def _bulk_report(H, spec, formula, windows, fermi=0.0):
    if formula == "trace":
        est = trace_per_unit_volume(H, windows)
        return {"windows": list(est.windows),
                "values": [[v.real, v.imag] for v in est.values],
                "extrapolated": [est.extrapolated.real, est.extrapolated.imag],
                "error": est.error, "formula": "trace_per_unit_volume"}
    cert = certify_gap(H, fermi=fermi)
    if formula == "chern_even":
        rep = chern_even(occupied_projection(H, cert), windows)
    elif formula == "chern_odd":
        rep = chern_odd(flatten(H, cert), spec, windows)
    elif formula == "kane_mele":
        rep = kane_mele(H, spec, windows, fermi=fermi)
    else:
        raise PairingError(f"unknown formula {formula!r}; choose from "
                           "trace, chern_even, chern_odd, kane_mele")
    return rep.to_json()


def cmd_index(args, extra) -> int:
    H, spec, meta = load_model(args.model_file)
    doc = _bulk_report(H, spec, args.formula, _float_list(args.windows),
                       fermi=args.fermi)
    doc["model"] = meta
    _write_json(args.out, doc)
    if args.csv:
        new = not os.path.exists(args.csv)
        with open(args.csv, "a", newline="") as fh:
            w = csv.writer(fh)
            if new:
                w.writerow(["model", "formula", "raw", "snapped", "error"])
            w.writerow([meta.get("name", "?"), doc.get("formula"),
                        doc.get("raw"), doc.get("snapped"), doc.get("error")])
    return 0


def cmd_edge_index(args, extra) -> int:
    H, spec, meta = load_model(args.model_file)
    ps = H.module.pointset
    part = partition_halfspace(ps, _float_list(args.normal), args.offset,
                               thickness=args.thickness)
    cert = certify_gap(H, fermi=args.fermi)
    if not cert.gapped:
        raise OperatorError("bulk sample has no certified gap; edge pairing invalid")
    H_hat = compress(H, part)
    if ps.dim == 1:
        use = spec
        if not spec.has_P:
            if spec.has_C and spec.C_unitary is not None:
                # real-pairing refinement: C's unitary part as the chiral operator
                use = SymmetrySpec(has_P=True, P_unitary=spec.C_unitary)
            else:
                raise PairingError("1d edge index needs a chiral operator in the spec")
        rep = edge_fredholm(H_hat, use, part=part)
    else:
        frac = args.delta_fraction
        delta = (cert.fermi - frac * cert.epsilon, cert.fermi + frac * cert.epsilon)
        rep = edge_conductance(H_hat, part, delta, _float_list(args.windows),
                               bulk_gap=cert)
    doc = rep.to_json()
    doc["model"] = meta
    _write_json(args.out, doc)
    return 0


def cmd_verify_bec(args, extra) -> int:
    H, spec, meta = load_model(args.model_file)
    ps = H.module.pointset
    bulk = make_bulk(H.module, H, spec, fermi=args.fermi)
    part = partition_halfspace(ps, _float_list(args.normal), args.offset,
                               thickness=args.thickness)
    cfg = BECConfig(
        windows=tuple(_float_list(args.windows)) if args.windows else (),
        edge_windows=tuple(_float_list(args.edge_windows)) if args.edge_windows else (),
        disorder_strength=args.disorder_strength,
        disorder_seeds=tuple(int(s) for s in args.seeds.split(",") if s) if args.seeds else (),
        truncation_radii=tuple(_float_list(args.truncation_radii))
        if args.truncation_radii else ())
    rep = verify_bec(bulk, part, cfg)
    doc = rep.to_json()
    doc["model"] = meta
    _write_json(args.out, doc)
    ok = rep.passed and all(s.get("pass", False) for s in rep.sweeps)
    print(f"bulk {rep.bulk.snapped} vs edge {rep.edge.snapped}: "
          f"{'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def _sweep_point(cfg: dict, seed, value):
    params = dict(cfg.get("params", {}))
    if cfg.get("vary_param"):
        params[cfg["vary_param"]] = value
    name = cfg["model"]
    ps = default_pointset(name, float(cfg.get("size", 20)), params)
    module, H, spec = build_model(name, params, ps,
                                  disorder=float(cfg.get("disorder", 0.0)),
                                  seed=int(seed))
    row = {"model": name, "seed": int(seed)}
    if cfg.get("vary_param"):
        row[cfg["vary_param"]] = value
    fermi = float(cfg.get("fermi", 0.0))
    doc = _bulk_report(H, spec, cfg.get("formula", "chern_even"),
                       cfg.get("windows", [6, 8, 10]), fermi=fermi)
    row.update({"raw": doc.get("raw"), "snapped": doc.get("snapped"),
                "error": doc.get("error")})
    return row


def cmd_sweep(args, extra) -> int:
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
        model = cfg["model"]
        if model not in MODELS:
            raise KeyError(f"unknown model {model!r}")
        seeds = cfg.get("seeds", [0])
        values = cfg.get("values", [None])
        if cfg.get("vary_param") and not cfg.get("values"):
            raise KeyError("vary_param given without values")
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    jobs = args.jobs or int(os.environ.get("ROELAB_JOBS", "1"))
    points = [(s, v) for v in values for s in seeds]
    rows = []
    if points:
        with ThreadPoolExecutor(max_workers=max(jobs, 1)) as pool:
            futs = [pool.submit(_sweep_point, cfg, s, v) for s, v in points]
            rows = [f.result() for f in futs]
    fields = ["model", "seed"]
    if cfg.get("vary_param"):
        fields.append(cfg["vary_param"])
    fields += ["raw", "snapped", "error"]
    with open(args.out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for row in rows:
            w.writerow(row)
    print(f"wrote {args.out}: {len(rows)} rows")
    return 0


def cmd_spectrum(args, extra) -> int:
    H, spec, meta = load_model(args.model_file)
    if not H.hermitian:
        raise OperatorError("spectrum of a non-Hermitian operator")
    w, _ = H.eigh()
    doc = {"model": meta, "dim": int(len(w)),
           "eigenvalues": [float(x) for x in w]}
    _write_json(args.out, doc)
    if args.emit_plot_data:
        with open(args.emit_plot_data, "w", newline="") as fh:
            cw = csv.writer(fh)
            cw.writerow(["index", "energy"])
            for i, x in enumerate(w):
                cw.writerow([i, float(x)])
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _sign(text: str) -> int:
    v = int(text)
    if v not in (1, -1):
        raise argparse.ArgumentTypeError("sign must be +1 or -1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="roelab", description=__doc__,
                            allow_abbrev=False)
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", allow_abbrev=False, help="build a model file")
    b.add_argument("--model", required=True, choices=sorted(MODELS))
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_build, accepts_params=True)

    c = sub.add_parser("classify", allow_abbrev=False, help="Cartan label from symmetry flags")
    c.add_argument("--T", type=_sign, default=None, help="T^2 sign if T present")
    c.add_argument("--C", type=_sign, default=None, help="C^2 sign if C present")
    c.add_argument("--P", action="store_true", help="chiral operator present")
    c.add_argument("--json", action="store_true")
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_classify, accepts_params=False)

    k = sub.add_parser("kgroup", allow_abbrev=False, help="classifying group lookup")
    k.add_argument("--label", required=True, choices=CARTAN_LABELS)
    k.add_argument("--d", type=int, required=True)
    k.add_argument("--rotation", type=int, default=None, metavar="K",
                   help="refine by a k-fold rotation symmetry")
    k.add_argument("--reflection", action="store_true",
                   help="refine by a reflection (requires sign flags)")
    k.add_argument("--cr-sign", type=_sign, default=None)
    k.add_argument("--tr-sign", type=_sign, default=None)
    k.add_argument("--pr-sign", type=_sign, default=None)
    k.add_argument("--json", action="store_true")
    k.add_argument("--out", default=None)
    k.set_defaults(func=cmd_kgroup, accepts_params=False)

    i = sub.add_parser("index", allow_abbrev=False, help="bulk index of a model file")
    i.add_argument("--model-file", required=True)
    i.add_argument("--formula", default="chern_even",
                   choices=["trace", "chern_even", "chern_odd", "kane_mele"])
    i.add_argument("--windows", default="6,8,10")
    i.add_argument("--fermi", type=float, default=0.0)
    i.add_argument("--out", default=None)
    i.add_argument("--csv", default=None)
    i.set_defaults(func=cmd_index, accepts_params=False)

    e = sub.add_parser("edge-index", allow_abbrev=False, help="edge index on a half-space cut")
    e.add_argument("--model-file", required=True)
    e.add_argument("--normal", required=True, help="cut normal, comma-separated")
    e.add_argument("--offset", type=float, required=True)
    e.add_argument("--thickness", type=float, default=None)
    e.add_argument("--windows", default="6,8,10")
    e.add_argument("--fermi", type=float, default=0.0)
    e.add_argument("--delta-fraction", type=float, default=1 / 3)
    e.add_argument("--out", default=None)
    e.set_defaults(func=cmd_edge_index, accepts_params=False)

    v = sub.add_parser("verify-bec", allow_abbrev=False, help="certify bulk index = edge index")
    v.add_argument("--model-file", required=True)
    v.add_argument("--normal", required=True)
    v.add_argument("--offset", type=float, required=True)
    v.add_argument("--thickness", type=float, default=None)
    v.add_argument("--windows", default=None)
    v.add_argument("--edge-windows", default=None)
    v.add_argument("--fermi", type=float, default=0.0)
    v.add_argument("--seeds", default=None, help="disorder sweep seeds")
    v.add_argument("--disorder-strength", type=float, default=0.0)
    v.add_argument("--truncation-radii", default=None)
    v.add_argument("--out", default=None)
    v.set_defaults(func=cmd_verify_bec, accepts_params=False)

    s = sub.add_parser("sweep", allow_abbrev=False, help="batch sweep from a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--jobs", type=int, default=None)
    s.set_defaults(func=cmd_sweep, accepts_params=False)

    sp = sub.add_parser("spectrum", allow_abbrev=False, help="eigenvalues of a model file")
    sp.add_argument("--model-file", required=True)
    sp.add_argument("--out", default=None)
    sp.add_argument("--emit-plot-data", default=None, metavar="CSV")
    sp.set_defaults(func=cmd_spectrum, accepts_params=False)
    return p


def _parse_extra_params(tokens):
    """--key value pairs for model parameters (build only)."""
    params = {}
    it = iter(tokens)
    for tok in it:
        if not tok.startswith("--"):
            raise argparse.ArgumentTypeError(f"unexpected argument {tok!r}")
        key = tok[2:].replace("-", "_")
        try:
            val = next(it)
        except StopIteration:
            raise argparse.ArgumentTypeError(f"missing value for {tok}")
        try:
            params[key] = float(val)
        except ValueError:
            params[key] = val
    return params


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args, unknown = parser.parse_known_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if getattr(args, "accepts_params", False):
            extra = _parse_extra_params(unknown)
        elif unknown:
            parser.error(f"unrecognized arguments: {' '.join(unknown)}")
        else:
            extra = {}
        return args.func(args, extra)
    except argparse.ArgumentTypeError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

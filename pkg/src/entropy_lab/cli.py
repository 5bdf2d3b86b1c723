"""Command line: ``entropy-lab run|validate <config.json>``.

A config is one JSON document::

    {"experiment": "entropy",
     "system": {"kind": "full-shift", "alphabet": 2},
     "measure": {"type": "bernoulli", "probs": [0.5, 0.5], "depth": 14},
     "seed": 0,
     "params": {"n_max": 14}}

``experiment`` is one of entropy, katok, prohorov, indep, induced, theorem3,
seplemma or all (then ``params`` holds one object per kind).  Reports are
written to ``--out-dir``; their bytes depend only on (config, seed).  The
run manifest alone carries wall time and versions.

Exit status: 0 ok, 1 module error (message passed through), 2 invalid config.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import platform
import sys
import tempfile
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import jsonschema
import networkx
import numpy as np
import scipy

from . import __version__
from .entropy import katok_cover_number, katok_entropy_estimate, ks_entropy_estimate, markov_entropy_exact
from .independence import mu_upe_verdict, random_disjoint_pair
from .induced import theorem3_experiment
from .measures import DiscreteMeasure, measure_from_json, prohorov
from .seplemma import theorem5_pipeline
from .symbolic import OpenSet, Partition, random_point, system_from_json

KINDS = ("entropy", "katok", "prohorov", "indep", "induced", "theorem3", "seplemma")
SAMPLED = {"prohorov", "indep", "induced", "theorem3"}
NEEDS_ERGODIC = {"katok", "theorem3", "seplemma"}

# --------------------------------------------------------------------------
# Schema
# --------------------------------------------------------------------------

_word = {"type": "array", "items": {"type": "integer", "minimum": 0}}
_prob = {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}
_ints = {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1}

_SYSTEM = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["full-shift", "sft", "periodic-orbit", "product"]},
        "alphabet": {"type": "integer", "minimum": 1},
        "adjacency": {"type": "array", "items": {"type": "array", "items": {"enum": [0, 1]}}},
        "word": _word,
        "component": {"$ref": "#/$defs/system"},
        "factor_count": {"type": "integer", "minimum": 1},
    },
    "additionalProperties": False,
}

_MEASURE = {
    "type": "object",
    "required": ["type"],
    "properties": {
        "type": {"enum": ["bernoulli", "markov", "parry", "periodic"]},
        "probs": {"type": "array", "items": {"type": "number"}},
        "matrix": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
        "depth": {"type": "integer", "minimum": 1, "maximum": 24},
    },
    "additionalProperties": False,
}

_PARTITION = {
    "type": "object",
    "required": ["cells"],
    "properties": {
        "cells": {"type": "array", "items": {"type": "array", "items": _word}},
        "offset": {"type": "integer"},
    },
    "additionalProperties": False,
}

_pairs = {"oneOf": [{"type": "integer", "minimum": 1},
                    {"type": "array", "items": {"type": "array", "items": _word,
                                                "minItems": 2, "maxItems": 2}}]}

_PARAMS = {
    "entropy": {"n_max": {"type": "integer", "minimum": 1}, "delta": _prob, "partition": _PARTITION},
    "katok": {"delta": _prob, "n_min": {"type": "integer", "minimum": 1},
              "n_max": {"type": "integer", "minimum": 1}, "partition": _PARTITION},
    "prohorov": {"pairs": {"type": "integer", "minimum": 1},
                 "max_atoms": {"type": "integer", "minimum": 1, "maximum": 12},
                 "max_period": {"type": "integer", "minimum": 1}},
    "indep": {"pairs": _pairs, "delta_grid": {"type": "array", "items": _prob, "minItems": 1},
              "m_schedule": _ints, "atom_depth": {"type": "integer", "minimum": 1},
              "threshold": {"type": "number"}, "max_len": {"type": "integer", "minimum": 1}},
    "induced": {"n": {"type": "integer", "minimum": 1}, "direction": {"enum": ["forward", "backward"]},
                "pairs": {"type": "integer", "minimum": 1},
                "delta_grid": {"type": "array", "items": _prob, "minItems": 1},
                "m_schedule": _ints, "atom_depth": {"type": "integer", "minimum": 1},
                "threshold": {"type": "number"}, "max_len": {"type": "integer", "minimum": 1}},
    "seplemma": {"m": {"type": "integer", "minimum": 1}, "delta": _prob, "partition": _PARTITION,
                 "eps": {"type": "number", "exclusiveMinimum": 0}, "b": {"type": "number", "exclusiveMinimum": 0},
                 "cover": {"enum": ["space", "katok"]}, "katok_n_min": {"type": "integer", "minimum": 1},
                 "katok_n_max": {"type": "integer", "minimum": 1}},
}
_PARAMS["theorem3"] = {k: v for k, v in _PARAMS["induced"].items() if k != "direction"}


def _params_schema(kind: str) -> dict:
    return {"type": "object", "properties": _PARAMS[kind], "additionalProperties": False}


SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$defs": {"system": _SYSTEM},
    "type": "object",
    "required": ["experiment", "system", "measure"],
    "properties": {
        "experiment": {"enum": list(KINDS) + ["all"]},
        "system": {"$ref": "#/$defs/system"},
        "measure": _MEASURE,
        "seed": {"type": "integer", "minimum": 0},
        "params": {"type": "object"},
        "output": {"type": "object", "properties": {"dir": {"type": "string"}},
                   "additionalProperties": False},
    },
    "additionalProperties": False,
    "allOf": [
        {"if": {"properties": {"experiment": {"const": k}}},
         "then": {"properties": {"params": _params_schema(k)}}} for k in KINDS
    ] + [
        {"if": {"properties": {"experiment": {"const": "all"}}},
         "then": {"properties": {"params": {"type": "object",
                                            "properties": {k: _params_schema(k) for k in KINDS},
                                            "additionalProperties": False}}}},
    ],
}


def _path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


def kinds_of(config: dict) -> list[str]:
    return list(KINDS) if config["experiment"] == "all" else [config["experiment"]]


def params_for(config: dict, kind: str) -> dict:
    p = config.get("params", {})
    return dict(p.get(kind, {})) if config["experiment"] == "all" else dict(p)


def validate(config) -> list[str]:
    """Schema and cross-field diagnostics as ``"field.path: message"`` strings."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    diags = [f"{_path(e.absolute_path)}: {e.message}"
             for e in sorted(validator.iter_errors(config), key=lambda e: list(map(str, e.absolute_path)))]
    if diags:
        return diags
    try:
        system = system_from_json(config["system"])
    except (ValueError, KeyError, TypeError) as e:
        field = "system.adjacency" if "adjacency" in str(e) else "system"
        return [f"{field}: {e}"]
    try:
        mu = measure_from_json(config["measure"], system, allow_reducible=True)
    except (ValueError, KeyError, TypeError, AttributeError) as e:
        return [f"measure: {e}"]
    if mu.system.alphabet_size != system.alphabet_size or (
            mu.system.kind != system.kind and {mu.system.kind, system.kind} != {"sft", "full-shift"}):
        diags.append(f"measure: lives on {mu.system!r}, config system is {system!r}")
    elif not np.array_equal(mu.system.adjacency, system.adjacency) and mu.generator != "markov":
        diags.append(f"measure: lives on {mu.system!r}, config system is {system!r}")
    kinds = kinds_of(config)
    for kind in kinds:
        prefix = "params" + (f".{kind}" if config["experiment"] == "all" else "")
        p = params_for(config, kind)
        if kind in NEEDS_ERGODIC and not mu.ergodic:
            diags.append(f"measure: {kind} needs an ergodic measure; the transition matrix has "
                         "more than one closed class")
        if kind in SAMPLED and "seed" not in config:
            if not (kind == "indep" and isinstance(p.get("pairs"), list)):
                diags.append(f"seed: required for the sampled experiment {kind}")
        try:
            P = _partition(system, p.get("partition"))
        except ValueError as e:
            diags.append(f"{prefix}.partition: {e}")
            continue
        if kind == "entropy":
            n_max = p.get("n_max", mu.depth - P.length + 1)
            if P.length + n_max - 1 > mu.depth:
                diags.append(f"{prefix}.n_max: needs measure.depth >= {P.length + n_max - 1}, "
                             f"got {mu.depth}")
        if kind == "katok":
            lo, hi = p.get("n_min", 1), p.get("n_max", mu.depth)
            if lo > hi:
                diags.append(f"{prefix}.n_min: exceeds n_max")
            if hi > mu.depth:
                diags.append(f"{prefix}.n_max: needs measure.depth >= {hi}, got {mu.depth}")
        if kind == "seplemma" and p.get("m", 10) > mu.depth:
            diags.append(f"{prefix}.m: needs measure.depth >= {p.get('m', 10)}, got {mu.depth}")
    return diags


# --------------------------------------------------------------------------
# Experiments
# --------------------------------------------------------------------------


def _partition(system, doc) -> Partition:
    if doc is None:
        return Partition.generator(system)
    off = doc.get("offset", 0)
    return Partition.from_open_sets(system, [OpenSet.from_words(cell, off) for cell in doc["cells"]])


def _seed_for(seed: int, kind: str) -> int:
    # independent stream per kind, so an "all" run matches single-kind runs
    return int(np.random.SeedSequence([seed, zlib.crc32(kind.encode())]).generate_state(1)[0])


def _csv(header, rows, config) -> str:
    buf = io.StringIO()
    buf.write("# config: " + _canonical(config) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                    for v in r])
    return buf.getvalue()


def _jsonable(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, (np.ndarray, tuple, set, frozenset)):
        return list(o)
    return repr(o)


def _json(doc, config) -> str:
    return json.dumps({"config": config, **doc}, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _canonical(config) -> str:
    return json.dumps(config, sort_keys=True, separators=(",", ":"))


def run_entropy(system, mu, p, seed, config):
    P = _partition(system, p.get("partition"))
    n_max = p.get("n_max", mu.depth - P.length + 1)
    delta = p.get("delta", 0.125)
    rep = ks_entropy_estimate(mu, system, P, n_max)
    oracle = markov_entropy_exact(mu.transition, mu.pi)
    rows = []
    for n, h, d in rep.rows:
        N = katok_cover_number(mu, system, P, n, delta)
        rows.append((n, h, d, float(np.log2(N)) / n, oracle))
    return {"entropy.csv": _csv(("n", "H_over_n", "H_diff", "katok_logN_over_n", "oracle"), rows, config)}


def run_katok(system, mu, p, seed, config):
    P = _partition(system, p.get("partition"))
    delta = p.get("delta", 0.125)
    ns = range(p.get("n_min", 1), p.get("n_max", mu.depth) + 1)
    est = katok_entropy_estimate(mu, system, P, delta, ns)
    oracle = markov_entropy_exact(mu.transition, mu.pi)
    doc = {"slope": est.slope, "intercept": est.intercept, "oracle": oracle, "delta": delta}
    return {"katok.csv": _csv(("n", "delta", "N", "logN_over_n"), est.rows, config),
            "katok.json": _json(doc, config)}


def _random_discrete(system, rng, max_atoms, max_period):
    k = int(rng.integers(1, max_atoms + 1))
    pts = [random_point(system, rng, max_period) for _ in range(k)]
    w = rng.dirichlet(np.ones(k))
    weights: dict = {}
    for x, m in zip(pts, w):
        weights[x] = weights.get(x, 0.0) + float(m)
    total = sum(weights.values())
    return DiscreteMeasure({x: m / total for x, m in weights.items()})


def run_prohorov(system, mu, p, seed, config):
    rng = np.random.default_rng(seed)
    rows = []
    for pid in range(p.get("pairs", 100)):
        a = _random_discrete(system, rng, p.get("max_atoms", 6), p.get("max_period", 4))
        b = _random_discrete(system, rng, p.get("max_atoms", 6), p.get("max_period", 4))
        fo, fl = prohorov(a, b, oracle=True), prohorov(a, b)
        rows.append((pid, fo, fl, abs(fo - fl)))
    return {"prohorov.csv": _csv(("pair_id", "oracle", "flow", "abs_diff"), rows, config)}


def _explicit_pairs(pairs):
    return [(OpenSet.cylinder(w0), OpenSet.cylinder(w1)) for w0, w1 in pairs]


def run_indep(system, mu, p, seed, config):
    pairs = p.get("pairs", 5)
    if isinstance(pairs, int):
        rng = np.random.default_rng(seed)
        pairs = [random_disjoint_pair(system, rng, p.get("max_len", 2)) for _ in range(pairs)]
    else:
        pairs = _explicit_pairs(pairs)
    v = mu_upe_verdict(system, mu, pairs, tuple(p.get("m_schedule", (6, 8, 10))),
                       tuple(p.get("delta_grid", (0.1, 0.25))), p.get("atom_depth", 1),
                       p.get("threshold", 0.05))
    rows, per_pair = [], []
    for pid, (U0, U1, rep) in enumerate(v.pairs):
        for r in rep.rows:
            rows.append((pid, r["delta"], r["m"], r["phi"], r["ratio"], r["exact"]))
        per_pair.append({"pair": pid, "sets": [repr(U0), repr(U1)], "density": rep.density,
                         "best_delta": rep.best_delta, "witness": list(rep.witness())})
    doc = {"consistent_with_mu_upe": v.consistent, "threshold": v.threshold, "label": v.label,
           "pairs": per_pair}
    return {"indep.csv": _csv(("pair_id", "delta", "m", "phi", "phi_over_m", "exact"), rows, config),
            "indep.json": _json(doc, config)}


def _theorem3(system, mu, p, seed, direction):
    rep = theorem3_experiment(system, mu, p.get("n", 2), direction, p.get("pairs", 10),
                              tuple(p.get("m_schedule", (4, 6, 8))), tuple(p.get("delta_grid", (0.1, 0.25))),
                              p.get("atom_depth", 1), seed, p.get("threshold", 0.05), p.get("max_len", 2))
    return {"direction": direction, "n": rep.n, "threshold": rep.threshold,
            "all_positive": rep.all_positive, "densities": rep.densities, "pairs": rep.pairs,
            "notes": rep.notes}


def run_induced(system, mu, p, seed, config):
    doc = _theorem3(system, mu, p, seed, p.get("direction", "forward"))
    return {"induced.json": _json(doc, config)}


def run_theorem3(system, mu, p, seed, config):
    fwd = _theorem3(system, mu, p, seed, "forward")
    bwd = _theorem3(system, mu, p, seed, "backward")
    doc = {"forward": fwd, "backward": bwd,
           "sign_pattern_agrees": fwd["all_positive"] == bwd["all_positive"],
           "label": "sampled evidence, not proof"}
    return {"theorem3.json": _json(doc, config)}


def run_seplemma(system, mu, p, seed, config):
    P = _partition(system, p.get("partition"))
    m = p.get("m", 10)
    lo, hi = p.get("katok_n_min", 4), p.get("katok_n_max", m)
    rep = theorem5_pipeline(system, mu, P, m, p.get("delta", 0.125), cover=p.get("cover", "space"),
                            eps=p.get("eps", 0.5), b=p.get("b", 0.5), katok_range=range(lo, hi + 1))
    d = rep.as_dict()
    d["k_m"] = d.pop("k")
    return {"seplemma.json": _json(d, config)}


RUNNERS = {"entropy": run_entropy, "katok": run_katok, "prohorov": run_prohorov, "indep": run_indep,
           "induced": run_induced, "theorem3": run_theorem3, "seplemma": run_seplemma}


def _write_atomic(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    os.replace(tmp, path)


def run(config: dict, out_dir: Path, threads: int = 1) -> dict:
    """Execute ``config``; returns ``{filename: text}`` after writing every report."""
    t0 = time.perf_counter()
    system = system_from_json(config["system"])
    mu = measure_from_json(config["measure"], system, allow_reducible=True)
    system = mu.system  # validated compatible; the measure's copy shares its caches
    seed = config.get("seed", 0)
    kinds = kinds_of(config)

    def one(kind):
        return RUNNERS[kind](system, mu, params_for(config, kind), _seed_for(seed, kind), config)

    # experiments are independent; reports are assembled in a fixed order
    if threads > 1 and len(kinds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, kinds))
    else:
        results = [one(k) for k in kinds]
    files: dict = {}
    for r in results:
        files.update(r)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in sorted(files):
        _write_atomic(out_dir / name, files[name])
    manifest = {
        "config": config,
        "config_sha256": hashlib.sha256(_canonical(config).encode()).hexdigest(),
        "seed": seed,
        "reports": {n: hashlib.sha256(files[n].encode()).hexdigest() for n in sorted(files)},
        "versions": {"entropy_lab": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "networkx": networkx.__version__, "python": platform.python_version()},
        "threads": threads,
        "wall_time_s": round(time.perf_counter() - t0, 3),
    }
    _write_atomic(out_dir / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return files


def _load(path: str):
    """Parse the config; returns ``(config, diagnostics)``."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        return None, [f"<file>: {e}"]
    try:
        return json.loads(text), []
    except json.JSONDecodeError as e:
        return None, [f"<json> line {e.lineno} column {e.colno}: {e.msg}"]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="entropy-lab", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, hlp in (("run", "run the configured experiment"), ("validate", "check a config without running")):
        sp = sub.add_parser(name, help=hlp)
        sp.add_argument("config")
        sp.add_argument("--out-dir", default=None, help="report directory (default: output.dir or ./out)")
        sp.add_argument("--seed", type=int, default=None, help="overrides the config seed")
        sp.add_argument("--threads", type=int, default=1, help="worker threads for independent experiments")
    args = ap.parse_args(argv)

    config, diags = _load(args.config)
    if config is not None and args.seed is not None:
        config["seed"] = args.seed
    if config is not None:
        diags = validate(config)
    if args.command == "validate":
        for d in diags:
            print(d)
        return 2 if diags else 0
    if diags:
        for d in diags:
            print(f"error: {d}", file=sys.stderr)
        return 2
    out = Path(args.out_dir or config.get("output", {}).get("dir", "out"))
    try:
        files = run(config, out, max(1, args.threads))
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    for name in sorted(files):
        print(out / name)
    print(out / "manifest.json")
    return 0


if __name__ == "__main__":
    sys.exit(main())

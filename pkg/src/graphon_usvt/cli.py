"""Command-line front end.

Every subcommand reads an optional JSON document (``--config``), fills in
defaults, rejects unknown keys, writes ``manifest.json`` (marked incomplete)
into ``--out`` and then its result files.  Failures print one JSON object
``{"error": ..., "message": ...}`` to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .experiments import (ExperimentConfig, build_graphon, run_conditioning_frequency,
                          run_invariance_suite, run_rate_experiment)
from .graphon import parse_map
from .io import (read_frames, read_matrix, write_csv, write_frames, write_json, write_latents,
                 write_manifest, write_matrix)
from .packing import (PackingSet, block_stack_frames, fano_diagnostics, greedy_frame_packing,
                      vg_greedy_codebook)
from .sampler import (DEFAULT_SEED, LAMBDA_LOWER, LAMBDA_UPPER, LatentSample, default_bins,
                      probability_matrix, sample_adjacency, sample_latents, sample_latents_conditioned, stream_rng)
from .spectra import tail_decay_certificate
from .usvt import UsvtConfig, mse, usvt_estimate

WORKERS_ENV = "GRAPHON_USVT_WORKERS"
REQUIRED = object()

_GRAPHON = {"family": "trig-decay", "rank": 200}
_USVT = {"c": 4.0, "tau": None, "clip": True, "zero_diagonal": True}
_LAM = {"lam1": LAMBDA_LOWER, "lam2": LAMBDA_UPPER}

SCHEMAS = {
    "sample": {"graphon": _GRAPHON, "alpha": 2.0, "n": REQUIRED, "conditioned": False,
               "bins": None, "max_attempts": 10_000, **_LAM},
    "estimate": {"adjacency": REQUIRED, "probability": None, **_USVT},
    "spectra certify": {"graphon": _GRAPHON, "alpha": 2.0, "n": 500, "replicates": 50,
                        "ks": [5, 10, 20]},
    "packing build": {"m1": REQUIRED, "k": REQUIRED, "delta": 0.25, "base_size": 4,
                      "budget": 10_000, "m2": 1, "d": None, "max_size": None},
    "packing verify": {"frames": REQUIRED, "certificate": REQUIRED},
    "fano report": {"frames": REQUIRED, "alpha": 2.0, "n": REQUIRED, "L": None,
                    "max_attempts": 10_000, **_LAM},
    "experiment rate": {"graphon": _GRAPHON, "alpha": 2.0, "n_grid": [200, 400, 800, 1600],
                        "replicates": 20, "conditioned": False, **_USVT, **_LAM},
    "experiment conditioning": {"n": 1000, "trials": 2000, **_LAM},
    "experiment invariance": {"graphon": _GRAPHON, "alpha": 2.0,
                              "maps": ["identity", "half-swap", "wrap-2"], "grid": 1024},
}

_TYPES = {
    "n": int, "replicates": int, "trials": int, "grid": int, "m1": int, "k": int, "m2": int,
    "base_size": int, "budget": int, "max_attempts": int,
    "alpha": float, "delta": float, "lam1": float, "lam2": float, "c": float,
    "conditioned": bool, "clip": bool, "zero_diagonal": bool,
    "adjacency": str, "probability": str, "frames": str, "certificate": str,
    "graphon": dict, "n_grid": list, "ks": list, "maps": list,
    "tau": float, "L": float, "d": int, "max_size": int, "bins": int,
}

_POSITIVE = {"n", "replicates", "trials", "grid", "m1", "k", "m2", "base_size", "budget",
             "max_attempts", "alpha", "delta", "L", "d", "max_size", "bins"}


class ConfigError(ValueError):
    pass


class VerificationError(RuntimeError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    values: dict
    seed: int = DEFAULT_SEED
    out: str = "out"

    def echo(self) -> dict:
        return {"command": self.command, "seed": self.seed, **self.values}


def _coerce(key, val, kind):
    if val is None:
        return None
    if kind is bool:
        if not isinstance(val, bool):
            raise ConfigError(f"{key}: expected true/false, got {val!r}")
        return val
    if kind is int:
        if isinstance(val, bool) or not isinstance(val, (int, float)) or int(val) != val:
            raise ConfigError(f"{key}: expected an integer, got {val!r}")
        return int(val)
    if kind is float:
        if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
            raise ConfigError(f"{key}: expected a finite number, got {val!r}")
        return float(val)
    if not isinstance(val, kind):
        raise ConfigError(f"{key}: expected {kind.__name__}, got {type(val).__name__}")
    return val


def parse_config(command: str, document=None, seed: int | None = None,
                 out: str | None = None) -> RunConfig:
    """Validate a config document (JSON text or dict) for ``command``."""
    if command not in SCHEMAS:
        raise ConfigError(f"unknown subcommand {command!r}")
    if document is None:
        doc = {}
    elif isinstance(document, str):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed config document: {exc}") from None
    else:
        doc = dict(document)
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    doc = dict(doc)
    doc_seed = doc.pop("seed", None)
    schema = SCHEMAS[command]
    unknown = sorted(set(doc) - set(schema))
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown key for '{command}'")
    values = {}
    for key, default in schema.items():
        if key in doc:
            val = _coerce(key, doc[key], _TYPES[key])
        elif default is REQUIRED:
            raise ConfigError(f"{key}: required for '{command}'")
        else:
            val = json.loads(json.dumps(default))
        if key in _POSITIVE and val is not None and not val > 0:
            raise ConfigError(f"{key}: must be positive, got {val!r}")
        values[key] = val
    if "tau" in values and values["tau"] is not None:
        if doc.get("c") is not None:
            raise ConfigError("tau: give either tau or c, not both")
        if values["tau"] < 0:
            raise ConfigError("tau: must be nonnegative")
        values["c"] = None
    if "lam1" in values and not 0.0 <= values["lam1"] < 1.0 < values["lam2"]:
        raise ConfigError("lam1: need 0 <= lam1 < 1 < lam2")
    if "graphon" in values:
        g = values["graphon"]
        try:
            build_graphon(g, values.get("alpha"))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    for tag in values.get("maps") or ():
        try:
            parse_map(tag)
        except ValueError as exc:
            raise ConfigError(f"maps: {exc}") from None
    if doc_seed is not None:
        doc_seed = _coerce("seed", doc_seed, int)
    final_seed = seed if seed is not None else (doc_seed if doc_seed is not None else DEFAULT_SEED)
    if final_seed < 0:
        raise ConfigError("seed: must be nonnegative")
    return RunConfig(command, values, final_seed, out or "out")


def serialize_config(cfg: RunConfig) -> str:
    return json.dumps({"seed": cfg.seed, **cfg.values}, sort_keys=True)


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if not raw:
        return 1
    try:
        w = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV}: expected an integer, got {raw!r}") from None
    if w < 1:
        raise ConfigError(f"{WORKERS_ENV}: must be at least 1")
    return w


def _usvt_cfg(v) -> UsvtConfig:
    return UsvtConfig(tau=v["tau"], c=None if v["tau"] is not None else v["c"],
                      clip=v["clip"], zero_diagonal=v["zero_diagonal"])


# ---------------------------------------------------------------------------
# subcommands; each returns the list of artifact names it wrote


def _cmd_sample(cfg, out):
    v = cfg.values
    W = build_graphon(v["graphon"], v["alpha"])
    rng = stream_rng(cfg.seed, 0)
    info = {"n": v["n"], "conditioned": v["conditioned"]}
    if v["conditioned"]:
        m = v["bins"] or default_bins(v["n"])
        cs = sample_latents_conditioned(v["n"], m, v["lam1"], v["lam2"], rng, v["max_attempts"])
        xi = cs.latents
        info.update(bins=m, attempts=cs.attempts, bin_counts=cs.counts)
    else:
        xi = sample_latents(v["n"], rng)
    xi = LatentSample(xi.xi, seed=cfg.seed, stream=0)
    M = probability_matrix(W, xi)
    A = sample_adjacency(M, rng)
    write_latents(os.path.join(out, "latents.txt"), xi)
    write_matrix(os.path.join(out, "probability.txt"), M)
    write_matrix(os.path.join(out, "adjacency.txt"), A)
    write_json(os.path.join(out, "sample.json"), info)
    return ["latents.txt", "probability.txt", "adjacency.txt", "sample.json"]


def _cmd_estimate(cfg, out):
    v = cfg.values
    A = read_matrix(v["adjacency"]).astype(np.int8)
    est = usvt_estimate(A, _usvt_cfg(v))
    info = {"n": A.shape[0], "tau": est.tau, "retained_rank": est.retained_rank,
            "retained_singular_values": est.singular_values[est.retained]}
    if v["probability"]:
        info["mse"] = mse(est.M_hat, read_matrix(v["probability"]))
    write_matrix(os.path.join(out, "estimate.txt"), est.M_hat)
    write_json(os.path.join(out, "estimate.json"), info)
    return ["estimate.txt", "estimate.json"]


def _cmd_certify(cfg, out):
    v = cfg.values
    W = build_graphon(v["graphon"], v["alpha"])
    cert = tail_decay_certificate(W, v["n"], v["ks"], v["replicates"], cfg.seed, _workers())
    doc = {"n": cert.n, "replicates": cert.replicates, "alpha": cert.alpha, "C": cert.C,
           "trace_norm": cert.diag.trace_norm, "B": cert.diag.B, "C_diag": cert.diag.value,
           "rows": cert.rows, "passed": cert.passed}
    write_json(os.path.join(out, "certificate.json"), doc)
    return ["certificate.json"]


def _packing_certificate(p: PackingSet) -> dict:
    doc = {"m": p.m, "k": p.k, "delta": p.delta, "size": p.size,
           "min_separation": p.min_separation, "separation_bound": p.separation_bound,
           "linf_bound": p.linf_bound}
    if p.code is not None:
        c = p.code
        doc["code"] = {"N": c.N, "n": c.n, "d": c.d, "size": c.size, "method": c.method,
                       "deterministic": c.deterministic, "maximal": c.maximal,
                       "vg_bound": float(c.vg_bound)}
    return doc


def _cmd_packing_build(cfg, out):
    v = cfg.values
    rng = stream_rng(cfg.seed, 0)
    base = greedy_frame_packing(v["m1"], v["k"], v["delta"], v["base_size"], v["budget"], rng)
    d = v["d"] if v["d"] is not None else max(1, math.ceil(v["m2"] / 4))
    if base.size < 2:
        raise RuntimeError("base packing has fewer than 2 frames")
    code = vg_greedy_codebook(base.size, v["m2"], d, rng=stream_rng(cfg.seed, 1),
                              max_size=v["max_size"])
    packing = block_stack_frames(base, code)
    write_frames(os.path.join(out, "frames.txt"), packing.frames)
    write_json(os.path.join(out, "certificate.json"), _packing_certificate(packing))
    return ["frames.txt", "certificate.json"]


def _cmd_packing_verify(cfg, out):
    v = cfg.values
    frames = read_frames(v["frames"])
    with open(v["certificate"]) as fh:
        cert = json.load(fh)
    missing = [k for k in ("separation_bound", "linf_bound") if k not in cert]
    if missing:
        raise ConfigError(f"certificate.{missing[0]}: required")
    p = PackingSet(frames, float(cert["separation_bound"]), math.nan, float(cert["linf_bound"]))
    problems = p.verify()
    if cert.get("size") not in (None, p.size):
        problems.append(f"size: certificate declares {cert['size']}, file holds {p.size}")
    write_json(os.path.join(out, "verify.json"), {"size": p.size, "ok": not problems,
                                                  "violations": problems})
    if problems:
        raise VerificationError("; ".join(problems))
    return ["verify.json"]


def _cmd_fano(cfg, out):
    v = cfg.values
    frames = read_frames(v["frames"])
    m = frames.shape[1]
    cs = sample_latents_conditioned(v["n"], m, v["lam1"], v["lam2"], stream_rng(cfg.seed, 0),
                                    v["max_attempts"])
    rep = fano_diagnostics(frames, cs.latents, v["alpha"], v["L"], v["lam1"], v["lam2"])
    doc = rep.summary()
    doc["attempts"] = cs.attempts
    write_json(os.path.join(out, "fano.json"), doc)
    return ["fano.json"]


def _cmd_rate(cfg, out):
    v = cfg.values
    ecfg = ExperimentConfig(graphon=v["graphon"], alpha=v["alpha"], n_grid=tuple(v["n_grid"]),
                            replicates=v["replicates"], seed=cfg.seed, usvt=_usvt_cfg(v), out=out,
                            workers=_workers(), conditioned=v["conditioned"],
                            lam1=v["lam1"], lam2=v["lam2"])
    res = run_rate_experiment(ecfg)
    write_csv(os.path.join(out, "replicates.csv"), ["n", "replicate", "mse", "retained_rank", "seed_stream"],
              [(r.n, r.replicate, r.mse, r.retained_rank, r.seed_stream) for r in res.replicates])
    write_csv(os.path.join(out, "summary.csv"), ["n", "mean_mse", "stderr", "mean_rank"],
              [(s.n, s.mean_mse, s.stderr, s.mean_rank) for s in res.summary])
    write_json(os.path.join(out, "fit.json"), res.fit_json())
    return ["replicates.csv", "summary.csv", "fit.json"]


def _cmd_conditioning(cfg, out):
    v = cfg.values
    res = run_conditioning_frequency(v["n"], v["trials"], v["lam1"], v["lam2"], stream_rng(cfg.seed, 0))
    write_json(os.path.join(out, "conditioning.json"), res.as_dict())
    return ["conditioning.json"]


def _cmd_invariance(cfg, out):
    v = cfg.values
    rows = run_invariance_suite(build_graphon(v["graphon"], v["alpha"]), v["maps"], v["grid"])
    write_csv(os.path.join(out, "invariance.csv"), ["map", "grid", "reference_grid", "deviation"],
              [(r.map, r.grid, r.reference_grid, r.deviation) for r in rows])
    return ["invariance.csv"]


HANDLERS = {
    "sample": _cmd_sample,
    "estimate": _cmd_estimate,
    "spectra certify": _cmd_certify,
    "packing build": _cmd_packing_build,
    "packing verify": _cmd_packing_verify,
    "fano report": _cmd_fano,
    "experiment rate": _cmd_rate,
    "experiment conditioning": _cmd_conditioning,
    "experiment invariance": _cmd_invariance,
}


def dispatch(cfg: RunConfig) -> list[str]:
    """Run one subcommand: manifest first (incomplete), results, then the
    manifest again marked complete."""
    out = cfg.out
    try:
        os.makedirs(out, exist_ok=True)
        write_manifest(out, cfg.command, cfg.echo(), cfg.seed, __version__, False)
    except OSError as exc:
        raise OSError(f"output directory {out!r} is not writable: {exc}") from exc
    artifacts = HANDLERS[cfg.command](cfg, out)
    write_manifest(out, cfg.command, cfg.echo(), cfg.seed, __version__, True, artifacts)
    return artifacts


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphon-usvt", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config document (file path)")
    common.add_argument("--seed", type=int, help=f"root seed (default {DEFAULT_SEED})")
    common.add_argument("--out", default="out", help="output directory (default ./out)")
    sub = parser.add_subparsers(dest="group", required=True)
    groups = {}
    for name in SCHEMAS:
        head, _, tail = name.partition(" ")
        if not tail:
            sub.add_parser(head, parents=[common])
            continue
        if head not in groups:
            gp = sub.add_parser(head)
            groups[head] = gp.add_subparsers(dest="action", required=True)
        groups[head].add_parser(tail, parents=[common])
    return parser


def _error(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    command = args.group if getattr(args, "action", None) is None else f"{args.group} {args.action}"
    try:
        doc = None
        if args.config:
            with open(args.config) as fh:
                doc = fh.read()
        cfg = parse_config(command, doc, args.seed, args.out)
    except (ConfigError, OSError) as exc:
        return _error("config", str(exc), 2)
    try:
        artifacts = dispatch(cfg)
    except VerificationError as exc:
        return _error("verification", str(exc), 3)
    except ConfigError as exc:
        return _error("config", str(exc), 2)
    except Exception as exc:
        return _error(type(exc).__name__, str(exc), 1)
    print(json.dumps({"command": command, "out": cfg.out, "artifacts": artifacts}))
    return 0


if __name__ == "__main__":
    sys.exit(main())

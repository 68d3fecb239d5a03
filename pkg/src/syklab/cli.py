"""Command-line front end.

Subcommands: moments, sample, clt, cov, bm, poisson-check, fejer, audit.
Ensemble configurations are JSON documents validated against
CONFIG_SCHEMA; every output file carries the tool version, a hash of the
experiment configuration, and the seed, and CSV bodies replay
byte-identically for a given (config, seed) at any parallel width.
Failures emit a JSON error object on stderr with exit code 2 (config or
argument problem), 3 (resource guard), or 4 (numeric validation).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__, harness, moments, setcomb, smoothing
from .errors import NumericValidationError, ResourceGuardError
from .hamiltonian import NAMED_DISTRIBUTIONS, assemble_dense, sample_couplings
from .spectrum import eigenvalues

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RESOURCE = 3
EXIT_NUMERIC = 4

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "syklab ensemble configuration",
    "type": "object",
    "properties": {
        "schema_version": {"const": harness.SCHEMA_VERSION},
        "n": {"type": "integer", "minimum": 2},
        "q": {"type": "integer", "minimum": 1},
        "distribution": {"enum": sorted(NAMED_DISTRIBUTIONS)},
        "test_function": {
            "oneOf": [
                {
                    "type": "object",
                    "properties": {
                        "type": {"const": "polynomial"},
                        "coefficients": {
                            "type": "array",
                            "items": {"type": "number"},
                            "minItems": 1,
                        },
                    },
                    "required": ["type", "coefficients"],
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "properties": {
                        "type": {"const": "lipschitz_menu"},
                        "name": {"enum": ["clipped_abs", "clipped_linear", "sine"]},
                        "lo": {"type": "number"},
                        "hi": {"type": "number"},
                        "points": {"type": "integer", "minimum": 2},
                    },
                    "required": ["type", "name"],
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "properties": {
                        "type": {"const": "tabulated"},
                        "xs": {"type": "array", "items": {"type": "number"}},
                        "ys": {"type": "array", "items": {"type": "number"}},
                        "lipschitz": {"type": "number"},
                    },
                    "required": ["type", "xs", "ys", "lipschitz"],
                    "additionalProperties": False,
                },
            ]
        },
        "samples": {"type": "integer", "minimum": 2},
        "seed": {"type": "integer", "minimum": 0},
        "dump_eigenvalues": {"type": "boolean"},
        "parallel_width": {"type": "integer", "minimum": 1},
    },
    "required": ["schema_version", "n", "q", "distribution", "test_function", "samples", "seed"],
    "additionalProperties": False,
}


class CliError(Exception):
    def __init__(self, message: str, exit_code: int = EXIT_CONFIG):
        super().__init__(message)
        self.exit_code = exit_code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message, EXIT_CONFIG)


def fmt(value) -> str:
    """CSV cell formatting: 17 significant digits, 'inf' literal allowed."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.17g}"
    return str(value)


def parse_a_values(text: str) -> list[float]:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        out.append(math.inf if tok == "inf" else float(tok))
    return out


def _invocation_hash(payload: dict) -> str:
    return hashlib.sha256(
        json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()


def _write_csv(path: Path, columns, rows, config_hash: str, seed: int) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# syklab_version={__version__}\n")
        fh.write(f"# config_sha256={config_hash}\n")
        fh.write(f"# seed={seed}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def _write_json(path: Path, payload: dict, config_hash: str, seed: int) -> None:
    doc = {"syklab_version": __version__, "config_sha256": config_hash, "seed": seed}
    doc.update(payload)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _out_dir(args) -> Path:
    base = args.output_dir or os.environ.get("SYKLAB_OUTPUT_DIR") or "."
    path = Path(base)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_config(args) -> harness.ExperimentConfig:
    path = Path(args.config)
    if not path.is_file():
        raise CliError(f"config file not found: {path}", EXIT_CONFIG)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise CliError(f"config is not valid JSON: {exc}", EXIT_CONFIG)
    for override in args.set or []:
        if "=" not in override:
            raise CliError(f"override must look like key=value, got {override!r}")
        key, _, raw = override.partition("=")
        try:
            doc[key] = json.loads(raw)
        except json.JSONDecodeError:
            doc[key] = raw
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.parallel_width is not None:
        doc["parallel_width"] = args.parallel_width
    try:
        jsonschema.validate(doc, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise CliError(f"config violates schema: {exc.message}", EXIT_CONFIG)
    try:
        return harness.config_from_dict(doc)
    except (KeyError, ValueError) as exc:
        raise CliError(f"config rejected: {exc}", EXIT_CONFIG)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_moments(args) -> list[Path]:
    a_values = parse_a_values(args.a)
    if any(a < 0 for a in a_values):
        raise CliError("a values must be nonnegative")
    rows = [
        (k, a, moments.m_k_a(k, a))
        for a in a_values
        for k in range(args.k_max + 1)
    ]
    out = _out_dir(args) / "moments.csv"
    h = _invocation_hash({"cmd": "moments", "k_max": args.k_max, "a": [fmt(a) for a in a_values]})
    _write_csv(out, ("k", "a", "m_k_a"), rows, h, 0)
    return [out]


def _cmd_sample(args) -> list[Path]:
    dist = NAMED_DISTRIBUTIONS[args.dist]
    rng = np.random.default_rng([args.seed, 0])
    sample = sample_couplings(dist, args.n, args.q, rng)
    outdir = _out_dir(args)
    h = _invocation_hash(
        {"cmd": "sample", "n": args.n, "q": args.q, "dist": args.dist, "seed": args.seed}
    )
    couplings = outdir / "couplings.csv"
    _write_csv(
        couplings,
        ("index", "J"),
        ((i, float(v)) for i, v in enumerate(sample.values)),
        h,
        args.seed,
    )
    outputs = [couplings]
    if args.dump_eigenvalues:
        spec = eigenvalues(assemble_dense(sample))
        eigpath = outdir / "eigenvalues.csv"
        _write_csv(
            eigpath,
            ("sample_id", "rank", "lambda"),
            ((0, r, float(v)) for r, v in enumerate(spec.eigenvalues)),
            h,
            args.seed,
        )
        outputs.append(eigpath)
    return outputs


def _record_csv_paths(record: harness.RunRecord, outdir: Path, h: str) -> list[Path]:
    cfg = record.config
    samples_path = outdir / "samples.csv"
    columns = ("sample_id", "value") + tuple(f"moment_{k}" for k in range(2, 9))
    rows = (
        (i, float(record.values[i])) + tuple(float(v) for v in record.moments[i, 1:8])
        for i in range(cfg.samples)
    )
    _write_csv(samples_path, columns, rows, h, cfg.seed)
    outputs = [samples_path]
    if record.eigenvalue_dump is not None:
        eigpath = outdir / "eigenvalues.csv"
        _write_csv(
            eigpath,
            ("sample_id", "rank", "lambda"),
            (
                (i, r, float(v))
                for i in range(cfg.samples)
                for r, v in enumerate(record.eigenvalue_dump[i])
            ),
            h,
            cfg.seed,
        )
        outputs.append(eigpath)
    return outputs


def _cmd_clt(args) -> list[Path]:
    cfg = _load_config(args)
    record = harness.run_ensemble(cfg)
    outdir = _out_dir(args)
    h = harness.config_hash(cfg)
    outputs = _record_csv_paths(record, outdir, h)
    summary_path = outdir / "summary.json"
    _write_json(summary_path, {"config": harness.config_to_dict(cfg), "summary": record.summary},
                h, cfg.seed)
    outputs.append(summary_path)
    return outputs


def _cmd_cov(args) -> list[Path]:
    cfg = _load_config(args)
    pairs = []
    for chunk in args.pairs.split(";"):
        k, _, kp = chunk.partition(",")
        pairs.append((int(k), int(kp)))
    record = harness.run_ensemble(cfg)
    a = harness.effective_a(cfg.n, cfg.q)
    rows = []
    for k, kp in pairs:
        scaled = harness.empirical_covariance(record, k, kp)
        limit = moments.covariance_limit(k, kp, a, cfg.dist.gamma)
        oracle = float("nan")
        if args.oracle:
            if cfg.dist.kind != "gaussian":
                raise CliError("the exact covariance oracle is Gaussian-only")
            oracle = harness.exact_covariance_oracle(cfg.n, cfg.q, k, kp)
        rows.append((k, kp, scaled, limit, oracle))
    outdir = _out_dir(args)
    h = harness.config_hash(cfg)
    out = outdir / "covariance.csv"
    _write_csv(out, ("k", "k_prime", "scaled_covariance", "limit", "oracle"), rows, h, cfg.seed)
    return [out]


def _cmd_bm(args) -> list[Path]:
    n, q, m = args.n, args.q, args.m
    if m == 3:
        count = setcomb.count_B3_exact(n, q)
    elif m == 4:
        count = setcomb.count_B4_exact(n, q)
    else:
        count = setcomb.count_Bm_bruteforce(n, q, m, distinct=True)
    ratio = setcomb.bm_bound_ratio(n, q, m)
    out = _out_dir(args) / "bm.csv"
    h = _invocation_hash({"cmd": "bm", "n": n, "q": q, "m": m})
    _write_csv(out, ("n", "q", "m", "count", "ratio"), [(n, q, m, count, ratio)], h, 0)
    return [out]


def _cmd_poisson_check(args) -> list[Path]:
    rng = np.random.default_rng([args.seed, 0])
    empirical = setcomb.intersection_histogram(args.n, args.q, args.trials, rng)
    hyper = setcomb.hypergeometric_overlap_pmf(args.n, args.q)
    rate = args.q * args.q / args.n
    poisson = setcomb.poisson_pmf(rate, args.q + 1)
    rows = [
        (j, float(empirical[j]), float(hyper[j]), float(poisson[j])) for j in range(args.q + 1)
    ]
    out = _out_dir(args) / "poisson.csv"
    h = _invocation_hash(
        {"cmd": "poisson-check", "n": args.n, "q": args.q, "trials": args.trials, "seed": args.seed}
    )
    _write_csv(out, ("overlap", "empirical", "hypergeometric", "poisson"), rows, h, args.seed)
    return [out]


def _cmd_fejer(args) -> list[Path]:
    lams = parse_a_values(args.lam)
    xs = np.linspace(args.x_min, args.x_max, args.points)
    rows = []
    for lam in lams:
        kern = smoothing.FejerKernel(lam)
        for x in xs:
            rows.append((lam, float(x), smoothing.fejer_eval(kern, float(x))))
    outdir = _out_dir(args)
    h = _invocation_hash({"cmd": "fejer", "lam": args.lam, "x": [args.x_min, args.x_max, args.points]})
    kernel_path = outdir / "kernel.csv"
    _write_csv(kernel_path, ("lam", "x", "value"), rows, h, 0)
    outputs = [kernel_path]
    if args.smooth_lams:
        f = harness.lipschitz_menu("clipped_abs", points=args.smooth_points)
        grid = f.xs
        sup_rows = []
        for lam in parse_a_values(args.smooth_lams):
            f_lam = smoothing.smooth(f, lam, grid)
            sup_rows.append((lam, smoothing.sup_distance_on_grid(f, f_lam, grid)))
        sup_path = outdir / "smoothing_error.csv"
        _write_csv(sup_path, ("lam", "sup_error"), sup_rows, h, 0)
        outputs.append(sup_path)
    return outputs


def _cmd_audit(args) -> list[Path]:
    cfg = _load_config(args)
    if cfg.dist.kind != "gaussian":
        raise CliError("audits are stated for Gaussian couplings")
    record = harness.run_ensemble(cfg)
    ks = [int(tok) for tok in args.k_list.split(",")]
    rows = []
    for k in ks:
        audit = harness.variance_bound_audit(
            cfg.n, cfg.q, k, cfg.dist, cfg.samples, cfg.seed, record=record
        )
        rows.append((k, audit.scaled_variance, audit.bound, audit.ratio, audit.se, audit.passed))
    outdir = _out_dir(args)
    h = harness.config_hash(cfg)
    variance_path = outdir / "variance_bound.csv"
    _write_csv(variance_path, ("k", "scaled_variance", "bound", "ratio", "se", "passed"),
               rows, h, cfg.seed)
    outputs = [variance_path]
    lip_rows = []
    for name in (args.lipschitz.split(",") if args.lipschitz else []):
        lip_cfg = harness.ExperimentConfig(
            cfg.n, cfg.q, cfg.dist, harness.lipschitz_menu(name), cfg.samples, cfg.seed,
            parallel_width=cfg.parallel_width,
        )
        audit = harness.lipschitz_concentration_audit(lip_cfg)
        lip_rows.append(
            (name, audit.scaled_variance, audit.bound)
            + audit.tail_levels
            + audit.tail_frequencies
            + (audit.passed,)
        )
    if lip_rows:
        lip_path = outdir / "lipschitz.csv"
        _write_csv(
            lip_path,
            ("name", "scaled_variance", "bound", "t1", "t2", "t3", "freq1", "freq2", "freq3", "passed"),
            lip_rows,
            h,
            cfg.seed,
        )
        outputs.append(lip_path)
    return outputs


# ---------------------------------------------------------------------------
# parser / dispatch
# ---------------------------------------------------------------------------


class _PrintSchema(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        print(json.dumps(CONFIG_SCHEMA, indent=2, sort_keys=True))
        parser.exit(0)


def build_parser() -> _Parser:
    parser = _Parser(prog="syklab", description=__doc__)
    parser.add_argument("--version", action="version", version=f"syklab {__version__}")
    parser.add_argument("--print-config-schema", nargs=0, action=_PrintSchema,
                        help="print the JSON schema for ensemble configs and exit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=False):
        p.add_argument("--output-dir", default=None, help="default: $SYKLAB_OUTPUT_DIR or .")
        if config:
            p.add_argument("--config", required=True, help="JSON experiment configuration")
            p.add_argument("--set", action="append", metavar="KEY=VALUE",
                           help="override a top-level config field")
            p.add_argument("--seed", type=int, default=None)
            p.add_argument("--parallel-width", type=int, default=None)

    p = sub.add_parser("moments", help="table of the moment family m_k(a)")
    p.add_argument("--k-max", type=int, default=8)
    p.add_argument("--a", default="0,1,inf", help="comma list; 'inf' allowed")
    common(p)
    p.set_defaults(fn=_cmd_moments)

    p = sub.add_parser("sample", help="dump one coupling tensor (and optionally its spectrum)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--dist", default="gaussian", choices=sorted(NAMED_DISTRIBUTIONS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dump-eigenvalues", action="store_true")
    common(p)
    p.set_defaults(fn=_cmd_sample)

    p = sub.add_parser("clt", help="run a Monte Carlo ensemble from a JSON config")
    common(p, config=True)
    p.set_defaults(fn=_cmd_clt)

    p = sub.add_parser("cov", help="scaled moment covariances against their limits")
    p.add_argument("--pairs", default="2,2;2,4", help="semicolon list of k,k'")
    p.add_argument("--oracle", action="store_true", help="also evaluate the exact finite-n oracle")
    common(p, config=True)
    p.set_defaults(fn=_cmd_cov)

    p = sub.add_parser("bm", help="identity-word tuple counts and bound ratio")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    common(p)
    p.set_defaults(fn=_cmd_bm)

    p = sub.add_parser("poisson-check", help="overlap law: empirical vs hypergeometric vs Poisson")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(fn=_cmd_poisson_check)

    p = sub.add_parser("fejer", help="kernel tables and smoothing sup-errors")
    p.add_argument("--lam", default="1,4,16")
    p.add_argument("--x-min", type=float, default=-10.0)
    p.add_argument("--x-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--smooth-lams", default=None, help="emit sup errors for clipped |x|")
    p.add_argument("--smooth-points", type=int, default=257,
                   help="tabulation grid size for the smoothing check")
    common(p)
    p.set_defaults(fn=_cmd_fejer)

    p = sub.add_parser("audit", help="variance-bound and Lipschitz concentration audits")
    p.add_argument("--k-list", default="2,3,4,6")
    p.add_argument("--lipschitz", default="clipped_abs,clipped_linear",
                   help="comma list of menu names ('' to skip)")
    common(p, config=True)
    p.set_defaults(fn=_cmd_audit)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        outputs = args.fn(args)
    except CliError as exc:
        json.dump({"error": "config", "message": str(exc), "exit_code": exc.exit_code},
                  sys.stderr)
        sys.stderr.write("\n")
        return exc.exit_code
    except ResourceGuardError as exc:
        json.dump({"error": "resource_guard", "message": str(exc), "exit_code": EXIT_RESOURCE},
                  sys.stderr)
        sys.stderr.write("\n")
        return EXIT_RESOURCE
    except NumericValidationError as exc:
        json.dump({"error": "numeric_validation", "message": str(exc), "exit_code": EXIT_NUMERIC},
                  sys.stderr)
        sys.stderr.write("\n")
        return EXIT_NUMERIC
    except (ValueError, KeyError) as exc:
        json.dump({"error": "argument", "message": str(exc), "exit_code": EXIT_CONFIG}, sys.stderr)
        sys.stderr.write("\n")
        return EXIT_CONFIG
    print(json.dumps({"status": "ok", "outputs": [str(p) for p in outputs]}))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Monte Carlo ensembles and verification of the eigenvalue-statistic CLT.

Each sample draws a coupling tensor from a per-sample RNG substream
keyed by (seed, sample_id), assembles and diagonalizes the Hamiltonian,
and records the linear statistic plus the first eight empirical
moments.  Results are independent of the worker-pool width.  On top of
the ensembles sit the scaled-fluctuation statistics, the KS normality
gate, exact covariance oracles, and the variance-bound audits.
"""

from __future__ import annotations

import hashlib
import json
import math
import multiprocessing
from dataclasses import dataclass

import numpy as np
from scipy import stats as scipy_stats
from scipy.special import kolmogi

from . import kernels
from .errors import ResourceGuardError
from .hamiltonian import (
    DENSE_HAMILTONIAN_CAP,
    ENUMERATION_BUDGET,
    GAUSSIAN,
    NAMED_DISTRIBUTIONS,
    CouplingDistribution,
    _word_monomial_arrays,
    assemble_dense,
    index_set_masks,
    sample_couplings,
)
from .moments import limit_mean_functional, limit_variance
from .spectrum import Polynomial, Tabulated, TestFunction, eigenvalues, linear_statistic

MOMENT_ORDERS = tuple(range(1, 9))
BATCH_COUNT = 20
SCHEMA_VERSION = 1
LIPSCHITZ_AUDIT_CONSTANT = 8.0


def gaussian_variance_constant(k: int) -> int:
    """Explicit per-order variance constant for Gaussian couplings."""
    return 2**k * math.factorial(k) * k * k


def effective_a(n: int, q: int) -> float:
    """Finite-n stand-in for the limit of q**2/n (reflected for q > n/2)."""
    return min(q, n - q) ** 2 / n


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    q: int
    dist: CouplingDistribution
    f: TestFunction
    samples: int
    seed: int
    dump_eigenvalues: bool = False
    parallel_width: int = 1

    def __post_init__(self):
        if self.n % 2 != 0:
            raise ValueError(f"n must be even, got {self.n}")
        if not 1 <= self.q <= self.n:
            raise ValueError(f"require 1 <= q <= n, got q={self.q}, n={self.n}")
        if self.samples < 2:
            raise ValueError("need at least 2 samples")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if self.parallel_width < 1:
            raise ValueError("parallel width must be >= 1")

    @property
    def binom(self) -> int:
        return math.comb(self.n, self.q)


@dataclass
class RunRecord:
    config: ExperimentConfig
    values: np.ndarray
    moments: np.ndarray  # shape (samples, 8), orders 1..8
    summary: dict
    eigenvalue_dump: np.ndarray | None = None


def known_linear_statistic_mean(f: TestFunction) -> float | None:
    """Exact E[L_n(f)] where available: for polynomials of degree <= 2 it is
    a_0 + a_2 (the odd moment vanishes and E[L**-1 Tr H**2] = 1 exactly)."""
    if isinstance(f, Polynomial) and f.degree <= 2:
        c = f.coefficients
        return c[0] + (c[2] if len(c) > 2 else 0.0)
    return None


def _simulate_one(cfg: ExperimentConfig, sample_id: int):
    rng = np.random.default_rng([cfg.seed, sample_id])
    sample = sample_couplings(cfg.dist, cfg.n, cfg.q, rng)
    H = assemble_dense(sample)
    H.metadata.update(seed=cfg.seed, sample_id=sample_id)
    spec = eigenvalues(H)
    lam = spec.eigenvalues
    value = linear_statistic(spec, cfg.f)
    moms = np.array([np.mean(lam**k) for k in MOMENT_ORDERS])
    return value, moms, (lam.copy() if cfg.dump_eigenvalues else None)


_WORKER_CONFIG: ExperimentConfig | None = None


def _pool_init(cfg):
    global _WORKER_CONFIG
    _WORKER_CONFIG = cfg


def _pool_task(sample_id):
    return _simulate_one(_WORKER_CONFIG, sample_id)


def run_ensemble(cfg: ExperimentConfig) -> RunRecord:
    """Run the full ensemble; deterministic for a given seed regardless of
    parallel width (aggregation is a fold in sample_id order)."""
    if cfg.n > DENSE_HAMILTONIAN_CAP:
        raise ResourceGuardError(
            f"dense ensemble capped at n <= {DENSE_HAMILTONIAN_CAP}, got n = {cfg.n}"
        )
    _word_monomial_arrays(cfg.n, cfg.q)  # warm the cache before any fork
    ids = range(cfg.samples)
    if cfg.parallel_width > 1:
        chunk = max(1, cfg.samples // (cfg.parallel_width * 8))
        with multiprocessing.Pool(
            cfg.parallel_width, initializer=_pool_init, initargs=(cfg,)
        ) as pool:
            results = pool.map(_pool_task, ids, chunksize=chunk)
    else:
        results = [_simulate_one(cfg, i) for i in ids]
    values = np.array([r[0] for r in results])
    moments = np.vstack([r[1] for r in results])
    dump = np.vstack([r[2] for r in results]) if cfg.dump_eigenvalues else None
    summary = recompute_summary(cfg, values, moments)
    return RunRecord(cfg, values, moments, summary, dump)


def scaled_fluctuations(record: RunRecord) -> np.ndarray:
    """sqrt(binom(n,q)) * (L_n(f) - centering) per sample; the centering is
    the exact mean when known (degree <= 2 polynomials), else the sample mean."""
    center = known_linear_statistic_mean(record.config.f)
    centering = center if center is not None else float(np.mean(record.values))
    return math.sqrt(record.config.binom) * (record.values - centering)


def batch_means_se(per_sample: np.ndarray, statistic, batches: int = BATCH_COUNT) -> float:
    """Standard error of a per-batch statistic over contiguous sample batches."""
    m = len(per_sample)
    nb = min(batches, m // 2)
    if nb < 2:
        return float("nan")
    vals = [statistic(chunk) for chunk in np.array_split(per_sample, nb)]
    return float(np.std(vals, ddof=1) / math.sqrt(nb))


def reference_variance(cfg: ExperimentConfig) -> float | None:
    """Theoretical limit of the scaled variance, for polynomial f."""
    if isinstance(cfg.f, Polynomial):
        return limit_variance(cfg.f, effective_a(cfg.n, cfg.q), cfg.dist.gamma)
    return None


def recompute_summary(cfg: ExperimentConfig, values: np.ndarray, moments: np.ndarray) -> dict:
    binom = cfg.binom
    var = float(np.var(values, ddof=1))
    scaled = binom * var
    se = batch_means_se(values, lambda v: binom * float(np.var(v, ddof=1)))
    ref = reference_variance(cfg)
    center = known_linear_statistic_mean(cfg.f)
    fluct = math.sqrt(binom) * (values - (center if center is not None else float(np.mean(values))))
    summary = {
        "samples": int(len(values)),
        "mean": float(np.mean(values)),
        "variance": var,
        "scaled_variance": scaled,
        "scaled_variance_se": se,
        "skewness": float(scipy_stats.skew(fluct)) if np.ptp(fluct) > 0 else 0.0,
        "excess_kurtosis": float(scipy_stats.kurtosis(fluct)) if np.ptp(fluct) > 0 else 0.0,
        "centering": "known" if center is not None else "sample",
        "reference_variance": ref,
        "ks_statistic": None,
        "limit_mean_functional": (
            limit_mean_functional(cfg.f, effective_a(cfg.n, cfg.q))
            if isinstance(cfg.f, Polynomial)
            else None
        ),
    }
    if ref is not None and ref > 0 and len(values) >= 2:
        summary["ks_statistic"] = float(
            scipy_stats.kstest(fluct, "norm", args=(0.0, math.sqrt(ref))).statistic
        )
    return summary


def empirical_covariance(record: RunRecord, k: int, k_prime: int) -> float:
    """Scaled sample covariance binom(n,q) * cov(moment_k, moment_k')."""
    if not (1 <= k <= 8 and 1 <= k_prime <= 8):
        raise ValueError("moment orders are recorded for 1 <= k <= 8")
    cov = np.cov(record.moments[:, k - 1], record.moments[:, k_prime - 1], ddof=1)[0, 1]
    return record.config.binom * float(cov)


@dataclass(frozen=True)
class NormalityResult:
    statistic: float
    threshold: float
    alpha: float
    passed: bool
    detail: str = ""


def normality_test(
    values: np.ndarray, reference_variance: float, alpha: float = 0.01
) -> NormalityResult:
    """One-sample KS against N(0, reference_variance); the threshold comes
    from the asymptotic Kolmogorov distribution at the given level."""
    values = np.asarray(values, dtype=float)
    m = len(values)
    if m < 500:
        raise ValueError("normality test needs at least 500 samples")
    threshold = float(kolmogi(alpha)) / math.sqrt(m)
    if reference_variance == 0.0:
        if np.ptp(values) == 0.0:
            return NormalityResult(0.0, threshold, alpha, True, "degenerate-degenerate")
        return NormalityResult(
            float("inf"),
            threshold,
            alpha,
            False,
            "nonconstant data against a zero-variance reference",
        )
    if reference_variance < 0:
        raise ValueError("reference variance must be nonnegative")
    stat = float(
        scipy_stats.kstest(values, "norm", args=(0.0, math.sqrt(reference_variance))).statistic
    )
    return NormalityResult(stat, threshold, alpha, stat <= threshold)


# ---------------------------------------------------------------------------
# exact finite-n covariance oracle (Gaussian couplings)
# ---------------------------------------------------------------------------


def exact_covariance_oracle(n: int, q: int, k: int, k_prime: int) -> float:
    """binom(n,q) * cov(L**-1 Tr H**k, L**-1 Tr H**k') computed exactly for
    Gaussian couplings: Wick moments per repeated index set, trace signs
    from the word algebra, enumerated over set partitions with blocks of
    size >= 2 (all other tuples have zero covariance)."""
    if k < 1 or k_prime < 1:
        raise ValueError("moment orders must be >= 1")
    if not 1 <= q <= n:
        raise ValueError(f"require 1 <= q <= n, got q={q}, n={n}")
    if (k + k_prime) % 2 == 1:
        return 0.0
    K = k + k_prime
    ni = math.comb(n, q)
    if ni ** (K // 2) > ENUMERATION_BUDGET:
        raise ResourceGuardError(
            f"covariance enumeration over {ni}**{K // 2} assignments exceeds budget"
        )
    masks = index_set_masks(n, q)
    gamma_m = GAUSSIAN.moment
    total = 0.0
    for block_of_pos, nblocks in kernels.partitions_min_block2(K):
        c_counts = np.bincount(block_of_pos, minlength=nblocks)
        a_counts = np.bincount(block_of_pos[:k], minlength=nblocks)
        w_joint = math.prod(gamma_m(int(c)) for c in c_counts)
        w_split = math.prod(gamma_m(int(a)) for a in a_counts) * math.prod(
            gamma_m(int(c - a)) for c, a in zip(c_counts, a_counts)
        )
        w = w_joint - w_split
        if w == 0.0:
            continue
        s = kernels.signed_trace_assignment_sum(masks, block_of_pos, nblocks, k)
        total += w * float(s)
    e = ((q // 2) * K) % 4
    sign = 1.0 if e == 0 else -1.0
    return sign * total * float(ni) ** (1 - K // 2)


# ---------------------------------------------------------------------------
# variance-bound and concentration audits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VarianceBoundAudit:
    k: int
    scaled_variance: float
    bound: float
    ratio: float
    se: float
    passed: bool


def variance_bound_audit(
    n: int,
    q: int,
    k: int,
    dist: CouplingDistribution,
    samples: int,
    seed: int = 0,
    parallel_width: int = 1,
    record: RunRecord | None = None,
) -> VarianceBoundAudit:
    """Check binom(n,q)*var[L**-1 Tr H**k] against the Gaussian constant
    c_k = 2**k k! k**2.  A matching prior ensemble record may be reused."""
    if dist.kind != "gaussian":
        raise ValueError("the explicit-constant audit is stated for Gaussian couplings")
    if record is not None:
        if (record.config.n, record.config.q) != (n, q) or record.config.dist.kind != "gaussian":
            raise ValueError("record does not match the requested audit configuration")
        if not 1 <= k <= 8:
            raise ValueError("recorded moments cover 1 <= k <= 8")
        column = record.moments[:, k - 1]
        binom = record.config.binom
    else:
        cfg = ExperimentConfig(n, q, dist, Polynomial.monomial(k), samples, seed,
                               parallel_width=parallel_width)
        rec = run_ensemble(cfg)
        column = rec.values
        binom = cfg.binom
    scaled = binom * float(np.var(column, ddof=1))
    se = batch_means_se(column, lambda v: binom * float(np.var(v, ddof=1)))
    bound = float(gaussian_variance_constant(k))
    se_ok = 0.0 if math.isnan(se) else se
    return VarianceBoundAudit(k, scaled, bound, scaled / bound, se,
                              scaled <= bound + 3.0 * se_ok)


@dataclass(frozen=True)
class LipschitzAudit:
    scaled_variance: float
    bound: float
    lipschitz: float
    tail_levels: tuple[float, ...]
    tail_frequencies: tuple[float, ...]
    passed: bool


def lipschitz_concentration_audit(
    cfg: ExperimentConfig,
    lipschitz: float | None = None,
    record: RunRecord | None = None,
    constant: float = LIPSCHITZ_AUDIT_CONSTANT,
) -> LipschitzAudit:
    """Gaussian concentration audit for a Lipschitz test function:
    binom(n,q)*var[L_n(f)] <= constant * |f'|_sup**2, plus empirical tail
    frequencies at t in {1,2,3} * |f'|_sup / sqrt(binom)."""
    if cfg.dist.kind != "gaussian":
        raise ValueError("the concentration audit is stated for Gaussian couplings")
    if lipschitz is None:
        lipschitz = getattr(cfg.f, "lipschitz", None)
    if lipschitz is None or not np.isfinite(lipschitz):
        raise ValueError("a declared Lipschitz constant is required")
    rec = record if record is not None else run_ensemble(cfg)
    binom = cfg.binom
    scaled = binom * float(np.var(rec.values, ddof=1))
    bound = constant * lipschitz**2
    scale = lipschitz / math.sqrt(binom)
    center = float(np.mean(rec.values))
    levels = tuple(j * scale for j in (1, 2, 3))
    freqs = tuple(float(np.mean(np.abs(rec.values - center) > t)) for t in levels)
    return LipschitzAudit(scaled, bound, float(lipschitz), levels, freqs, scaled <= bound)


# ---------------------------------------------------------------------------
# shipped Lipschitz test-function menu + config (de)serialization
# ---------------------------------------------------------------------------


def lipschitz_menu(name: str, lo: float = -3.0, hi: float = 3.0, points: int = 257) -> Tabulated:
    """Named Lipschitz-1 test functions used by the audits and the CLI."""
    xs = np.linspace(lo, hi, points)
    if name == "clipped_abs":
        return Tabulated(xs, np.abs(xs), lipschitz=1.0)
    if name == "clipped_linear":
        return Tabulated(xs, xs.copy(), lipschitz=1.0)
    if name == "sine":
        return Tabulated(xs, np.sin(xs), lipschitz=1.0)
    raise ValueError(f"unknown Lipschitz menu entry {name!r}")


def _function_to_dict(f: TestFunction) -> dict:
    if isinstance(f, Polynomial):
        return {"type": "polynomial", "coefficients": list(f.coefficients)}
    if isinstance(f, Tabulated):
        return {
            "type": "tabulated",
            "xs": [float(x) for x in f.xs],
            "ys": [float(y) for y in f.ys],
            "lipschitz": float(f.lipschitz),
        }
    raise ValueError(f"cannot serialize test function {f!r}")


def _function_from_dict(d: dict) -> TestFunction:
    kind = d["type"]
    if kind == "polynomial":
        return Polynomial(tuple(d["coefficients"]))
    if kind == "lipschitz_menu":
        return lipschitz_menu(
            d["name"], d.get("lo", -3.0), d.get("hi", 3.0), d.get("points", 257)
        )
    if kind == "tabulated":
        return Tabulated(np.asarray(d["xs"]), np.asarray(d["ys"]), d["lipschitz"])
    raise ValueError(f"unknown test function type {kind!r}")


def config_to_dict(cfg: ExperimentConfig) -> dict:
    if cfg.dist.kind not in NAMED_DISTRIBUTIONS:
        raise ValueError("only named distributions are JSON-serializable")
    return {
        "schema_version": SCHEMA_VERSION,
        "n": cfg.n,
        "q": cfg.q,
        "distribution": cfg.dist.kind,
        "test_function": _function_to_dict(cfg.f),
        "samples": cfg.samples,
        "seed": cfg.seed,
        "dump_eigenvalues": cfg.dump_eigenvalues,
        "parallel_width": cfg.parallel_width,
    }


def config_from_dict(d: dict) -> ExperimentConfig:
    return ExperimentConfig(
        n=int(d["n"]),
        q=int(d["q"]),
        dist=NAMED_DISTRIBUTIONS[d["distribution"]],
        f=_function_from_dict(d["test_function"]),
        samples=int(d["samples"]),
        seed=int(d["seed"]),
        dump_eigenvalues=bool(d.get("dump_eigenvalues", False)),
        parallel_width=int(d.get("parallel_width", 1)),
    )


def config_hash(cfg: ExperimentConfig) -> str:
    """Hash of the experiment identity: excludes execution-only fields
    (parallel width, dump flag), which cannot change any sampled value."""
    d = config_to_dict(cfg)
    d.pop("parallel_width")
    d.pop("dump_eigenvalues")
    payload = json.dumps(d, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()

"""Monte Carlo experiment driver and the squared-returns pipeline.

Size experiments simulate FARIMA paths under a known theta0, fit each one, and
check whether nominal-level intervals cover the truth, for three interval
constructions:

* ``standard``       Wald intervals from the iid-only covariance 2 sigma^2 J^{-1};
* ``modified``       Wald intervals from the sandwich J^{-1} I_sp J^{-1};
* ``modified_sn``    self-normalized intervals with simulated critical values.

Rejection frequencies are compared against the binomial significance band
alpha +/- 1.96 sqrt(alpha (1 - alpha) / N). Replications draw their seeds from
SeedSequence([base_seed, r]), so results are deterministic, independent of
execution order, and embarrassingly parallel in principle (the loop here is
sequential). Fits that fail to converge are excluded from denominators and
reported in a ``failed`` count.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .inference import ci_wald, sandwich_estimate, h_process, j_hat
from .lse import fit
from .model import FarimaParams, FeasibleRegion, residuals_with_grad
from .selfnorm import QuantileMC, p_hat, sn_ci
from .simulate import Garch, NoiseKind, SimConfig, Strong, WeakProduct, simulate_farima
from .validation import check_alpha, replication_seed

METHODS = ("standard", "modified", "modified_sn")


def noise_from_name(name: str) -> NoiseKind:
    """CLI-facing noise factory: strong | garch | weak (garch uses design defaults)."""
    table = {"strong": Strong, "garch": Garch, "weak": WeakProduct}
    if name not in table:
        raise ValueError(f"unknown noise kind {name!r}; expected one of {sorted(table)}")
    return table[name]()


def noise_label(kind: NoiseKind) -> str:
    if isinstance(kind, Strong):
        return "strong"
    if isinstance(kind, Garch):
        return "garch"
    if isinstance(kind, WeakProduct):
        return "weak"
    raise TypeError(f"unknown noise kind: {kind!r}")


def param_names(p: int, q: int) -> list[str]:
    return [f"a{i}" for i in range(1, p + 1)] + [f"b{j}" for j in range(1, q + 1)] + ["d"]


@dataclass(frozen=True)
class ExperimentSpec:
    """One Monte Carlo study: design, noise, scale, methods, and seed."""

    theta0: FarimaParams
    noise: NoiseKind
    n: int
    reps: int
    alphas: tuple[float, ...] = (0.01, 0.05, 0.10)
    methods: tuple[str, ...] = METHODS
    base_seed: int = 0
    region: FeasibleRegion = field(default_factory=FeasibleRegion)
    burn_in: int = 2000
    ma_trunc: int = 5000
    r: int | str = "aic"
    mc: QuantileMC = field(default_factory=QuantileMC)
    cache_dir: str | None = None

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("need at least one replication")
        for a in self.alphas:
            check_alpha(a)
        for mth in self.methods:
            if mth not in METHODS:
                raise ValueError(f"unknown method {mth!r}; expected subset of {METHODS}")


@dataclass
class SizeRow:
    method: str
    param: str
    alpha: float
    rejections: int
    n_used: int
    frequency: float
    band_lo: float
    band_hi: float
    failed: int


@dataclass
class SizeTable:
    """Rejection frequencies per (method, parameter, level) with binomial bands."""

    rows: list[SizeRow]
    failed_fits: int
    n: int
    reps: int
    noise: str
    base_seed: int

    def to_csv(self, path) -> None:
        """Fixed schema, repr-formatted floats: identical inputs give identical bytes."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["method", "param", "alpha", "rejections", "n_used", "frequency", "band_lo", "band_hi", "failed"]
            )
            for row in self.rows:
                writer.writerow(
                    [
                        row.method,
                        row.param,
                        repr(row.alpha),
                        row.rejections,
                        row.n_used,
                        repr(row.frequency),
                        repr(row.band_lo),
                        repr(row.band_hi),
                        row.failed,
                    ]
                )

    def frequency(self, method: str, param: str, alpha: float) -> float:
        for row in self.rows:
            if row.method == method and row.param == param and row.alpha == alpha:
                return row.frequency
        raise KeyError((method, param, alpha))


def _sim_config(spec: ExperimentSpec, r: int) -> SimConfig:
    return SimConfig(
        n=spec.n, burn_in=spec.burn_in, ma_trunc=spec.ma_trunc, seed=replication_seed(spec.base_seed, r)
    )


def _fit_replication(spec: ExperimentSpec, r: int):
    """Simulate and fit replication r; returns the FitResult or None on failure."""
    x, _ = simulate_farima(spec.theta0, spec.noise, _sim_config(spec, r))
    try:
        result = fit(x, spec.theta0.p, spec.theta0.q, spec.region)
    except (ValueError, np.linalg.LinAlgError):
        return None, x
    return (result if result.converged else None), x


def _interval_rejections(spec: ExperimentSpec, result, x):
    """Coverage checks for one replication: {(method, param_idx, alpha): rejected} or
    None for a method whose machinery failed."""
    theta0 = spec.theta0.to_vector()
    res = residuals_with_grad(result.params, x)
    out: dict[tuple[str, int, float], bool | None] = {}

    cis: dict[str, object] = {}
    if "standard" in spec.methods or "modified" in spec.methods:
        try:
            sw = sandwich_estimate(res, r=spec.r)
        except ValueError:
            sw = None
        if "standard" in spec.methods:
            cis["standard"] = None if sw is None else {a: ci_wald(result.theta_hat, sw.omega_standard, res.n, a) for a in spec.alphas}
        if "modified" in spec.methods:
            cis["modified"] = None if sw is None else {a: ci_wald(result.theta_hat, sw.omega_hat, res.n, a) for a in spec.alphas}
    if "modified_sn" in spec.methods:
        try:
            snm = p_hat(h_process(res), j_hat(res))
            cis["modified_sn"] = {
                a: np.asarray(
                    [sn_ci(result.theta_hat, snm, a, i, spec.mc, spec.cache_dir) for i in range(theta0.size)]
                )
                for a in spec.alphas
            }
        except ValueError:
            cis["modified_sn"] = None

    for method in spec.methods:
        table = cis[method]
        for a in spec.alphas:
            for i in range(theta0.size):
                if table is None:
                    out[(method, i, a)] = None
                else:
                    lo, hi = table[a][i]
                    out[(method, i, a)] = not (lo <= theta0[i] <= hi)
    return out


def run_size_experiment(spec: ExperimentSpec) -> SizeTable:
    """Empirical sizes of the requested interval methods at the spec's levels."""
    names = param_names(spec.theta0.p, spec.theta0.q)
    dim = len(names)
    rejections = {(m, i, a): 0 for m in spec.methods for i in range(dim) for a in spec.alphas}
    used = {(m, i, a): 0 for m in spec.methods for i in range(dim) for a in spec.alphas}
    failed_fits = 0
    method_failures = {m: 0 for m in spec.methods}

    for r in range(spec.reps):
        result, x = _fit_replication(spec, r)
        if result is None:
            failed_fits += 1
            continue
        marks = _interval_rejections(spec, result, x)
        failed_methods = set()
        for key, rejected in marks.items():
            if rejected is None:
                failed_methods.add(key[0])
            else:
                used[key] += 1
                rejections[key] += int(rejected)
        for m in failed_methods:
            method_failures[m] += 1

    half = {a: 1.96 * math.sqrt(a * (1.0 - a) / spec.reps) for a in spec.alphas}
    rows = []
    for m in spec.methods:
        for i, name in enumerate(names):
            for a in spec.alphas:
                n_used = used[(m, i, a)]
                freq = rejections[(m, i, a)] / n_used if n_used else float("nan")
                rows.append(
                    SizeRow(
                        method=m,
                        param=name,
                        alpha=a,
                        rejections=rejections[(m, i, a)],
                        n_used=n_used,
                        frequency=freq,
                        band_lo=a - half[a],
                        band_hi=a + half[a],
                        failed=failed_fits + method_failures[m],
                    )
                )
    return SizeTable(
        rows=rows,
        failed_fits=failed_fits,
        n=spec.n,
        reps=spec.reps,
        noise=noise_label(spec.noise),
        base_seed=spec.base_seed,
    )


@dataclass
class ErrorMoments:
    """Per-replication estimation errors and their standardized second moments."""

    noise: str
    param_names: list[str]
    means: dict[str, float]          # mean of n (theta_hat_i - theta0_i)^2
    errors: np.ndarray               # (successful reps, dim), raw theta_hat - theta0
    replications: np.ndarray         # replication indices behind each error row
    failed: int


def run_error_moments(spec: ExperimentSpec) -> ErrorMoments:
    """Mean standardized squared errors n (theta_hat_i - theta0_i)^2 across replications."""
    theta0 = spec.theta0.to_vector()
    names = param_names(spec.theta0.p, spec.theta0.q)
    errors, kept = [], []
    failed = 0
    for r in range(spec.reps):
        result, _ = _fit_replication(spec, r)
        if result is None:
            failed += 1
            continue
        errors.append(result.theta_hat - theta0)
        kept.append(r)
    if not errors:
        raise ValueError("every replication failed; nothing to aggregate")
    err = np.asarray(errors)
    means = {name: float(np.mean(spec.n * err[:, i] ** 2)) for i, name in enumerate(names)}
    return ErrorMoments(
        noise=noise_label(spec.noise),
        param_names=names,
        means=means,
        errors=err,
        replications=np.asarray(kept),
        failed=failed,
    )


def emit_figure_data(results, path) -> None:
    """Plot-ready long-format CSV of per-replication estimation errors.

    ``results`` is one ErrorMoments or a sequence of them (one per noise
    design); columns are replication, noise_kind, param, error.
    """
    if isinstance(results, ErrorMoments):
        results = [results]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["replication", "noise_kind", "param", "error"])
        for block in results:
            for row, rep in enumerate(block.replications):
                for i, name in enumerate(block.param_names):
                    writer.writerow([int(rep), block.noise, name, repr(float(block.errors[row, i]))])


def _read_price_csv(path, price_col: str | None = None):
    """Prices from a (date, price) CSV; rows with missing/unparseable prices are dropped."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError("price CSV has no header row")
        if price_col is None:
            lowered = {name.lower(): name for name in reader.fieldnames}
            price_col = lowered.get("price")
            if price_col is None:
                if len(reader.fieldnames) < 2:
                    raise ValueError("price CSV needs a 'price' column or at least two columns")
                price_col = reader.fieldnames[1]
        elif price_col not in reader.fieldnames:
            raise ValueError(f"column {price_col!r} not in CSV header {reader.fieldnames}")
        prices, dropped = [], 0
        for row in reader:
            raw = (row.get(price_col) or "").strip()
            if not raw:
                dropped += 1
                continue
            try:
                value = float(raw)
            except ValueError:
                dropped += 1
                continue
            if math.isnan(value):
                dropped += 1
                continue
            prices.append(value)
    return np.asarray(prices), dropped


def returns_pipeline(
    prices_csv,
    *,
    p: int = 1,
    q: int = 1,
    alpha: float = 0.05,
    region: FeasibleRegion | None = None,
    r: int | str = "aic",
    mc: QuantileMC | None = None,
    cache_dir=None,
    price_col: str | None = None,
) -> dict:
    """Volatility-style analysis of a price series.

    Log returns are squared and mean-corrected, a FARIMA(p, d, q) is fitted to
    the centered squared returns, and the report carries the estimates with
    standard, sandwich, and self-normalized intervals. Inference is for the
    parameters of the mean-corrected series, conditional on the sample
    centering.
    """
    alpha = check_alpha(alpha)
    prices, dropped = _read_price_csv(prices_csv, price_col)
    if prices.size < 3:
        raise ValueError("too few usable price rows")
    if np.any(prices <= 0.0):
        raise ValueError("prices must be strictly positive to take log returns")

    returns = np.diff(np.log(prices))
    squared = returns**2
    x = squared - squared.mean()
    if np.var(x) == 0.0:
        raise ValueError("squared returns are constant; variance dynamics are degenerate")

    result = fit(x, p, q, region)
    res = residuals_with_grad(result.params, x)
    sw = sandwich_estimate(res, r=r)
    snm = p_hat(h_process(res), j_hat(res))

    names = param_names(p, q)
    standard = ci_wald(result.theta_hat, sw.omega_standard, res.n, alpha)
    sandwich = ci_wald(result.theta_hat, sw.omega_hat, res.n, alpha)
    sn = [sn_ci(result.theta_hat, snm, alpha, i, mc, cache_dir) for i in range(len(names))]

    return {
        "n_prices": int(prices.size),
        "n_observations": int(x.size),
        "dropped_rows": int(dropped),
        "p": p,
        "q": q,
        "alpha": alpha,
        "theta_hat": {name: float(v) for name, v in zip(names, result.theta_hat)},
        "sigma2_hat": result.sigma2_hat,
        "converged": result.converged,
        "r_selected": sw.r_selected,
        "intervals": {
            "standard": {name: [float(lo), float(hi)] for name, (lo, hi) in zip(names, standard)},
            "modified": {name: [float(lo), float(hi)] for name, (lo, hi) in zip(names, sandwich)},
            "modified_sn": {name: [float(lo), float(hi)] for name, (lo, hi) in zip(names, sn)},
        },
    }

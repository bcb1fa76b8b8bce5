"""End-to-end experiment orchestration.

Wires loading, splitting, standardization, posterior sampling, prediction,
and the nearest-neighbour baseline into one reproducible run that emits CSV
and JSON artifacts.  Also hosts the enumeration-oracle verification used by
the ``verify-oracle`` subcommand.  One integer seed governs everything; all
files are written atomically.
"""

from __future__ import annotations

import json
import os
import tempfile
import time
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .data import (
    Dataset,
    Split,
    load_csv,
    pairwise_distances,
    split_dataset,
    standardize,
    subset,
    validate_split,
)
from .inference import (
    ChainConfig,
    PosteriorTrace,
    Priors,
    ProposalConfig,
    exact_beta_grid_posterior,
    median_offdiag_distance,
    run_beta_grid_exchange,
    run_exchange,
    run_pseudo_mh,
)
from .knn import default_k_max, knn_classify, knn_test_errors, loocv_select_k
from .mrf import ENUMERATION_CAP, agreement_sum, enumerate_log_z, sample_field_ensemble
from .prediction import misclassification_rate, predict_ergodic
from .weights import MODEL_KINDS, WeightModel, compute_weights

METHODS = ("exchange", "pseudolikelihood", "knn", "all")
ACCEPTANCE_BAND = (0.1, 0.5)


class ConfigError(ValueError):
    """Invalid experiment configuration; maps to CLI exit code 1."""


@dataclass
class ExperimentConfig:
    data_path: str = ""
    label_column: str | int = "label"
    model: str = "dnn1"
    epsilon: float = 1e-10
    train_fraction: float = 0.25
    train_indices_path: str | None = None
    test_indices_path: str | None = None
    standardize_features: bool = True
    beta_prior_sd: float = 50.0
    sigma_upper: float = 100.0
    beta_step: float = 0.5
    sigma_step: float | None = None
    n_iterations: int = 20000
    n_burnin: int = 10000
    aux_sweeps: int = 1000
    seed: int = 0
    method: str = "all"
    thin: int = 10
    k_max: int | None = None
    output_dir: str = "results"
    max_seconds: float | None = None

    def validate(self) -> None:
        if not self.data_path:
            raise ConfigError("data_path is required")
        if not os.path.exists(self.data_path):
            raise ConfigError(f"dataset file not found: {self.data_path}")
        if self.model not in MODEL_KINDS:
            raise ConfigError(
                f"model must be one of {sorted(MODEL_KINDS)}, got {self.model!r}"
            )
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigError("epsilon must lie strictly between 0 and 1")
        if (self.train_indices_path is None) != (self.test_indices_path is None):
            raise ConfigError(
                "train_indices_path and test_indices_path must be given together"
            )
        for path in (self.train_indices_path, self.test_indices_path):
            if path is not None and not os.path.exists(path):
                raise ConfigError(f"index file not found: {path}")
        if self.train_indices_path is None and not 0.0 < self.train_fraction < 1.0:
            raise ConfigError("train_fraction must lie strictly between 0 and 1")
        if self.beta_prior_sd <= 0 or self.sigma_upper <= 0:
            raise ConfigError("prior scales must be positive")
        if self.beta_step <= 0:
            raise ConfigError("beta_step must be positive")
        if self.sigma_step is not None and self.sigma_step <= 0:
            raise ConfigError("sigma_step must be positive")
        if not self.n_iterations > self.n_burnin >= 0:
            raise ConfigError("need n_iterations > n_burnin >= 0")
        if self.aux_sweeps < 1:
            raise ConfigError("aux_sweeps must be >= 1")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.thin < 1:
            raise ConfigError("thin must be >= 1")
        if self.k_max is not None and self.k_max < 1:
            raise ConfigError("k_max must be >= 1")
        if self.max_seconds is not None and self.max_seconds <= 0:
            raise ConfigError("max_seconds must be positive")


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in _TRUE:
        return True
    if low in _FALSE:
        return False
    raise ConfigError(f"expected a boolean, got {raw!r}")


def _parse_optional(parser):
    def inner(raw: str):
        return None if raw.strip().lower() in {"", "none"} else parser(raw)

    return inner


def _parse_label_column(raw: str) -> str | int:
    raw = raw.strip()
    try:
        return int(raw)
    except ValueError:
        return raw


_FIELD_PARSERS = {
    "data_path": str.strip,
    "label_column": _parse_label_column,
    "model": str.strip,
    "epsilon": float,
    "train_fraction": float,
    "train_indices_path": _parse_optional(str.strip),
    "test_indices_path": _parse_optional(str.strip),
    "standardize_features": _parse_bool,
    "beta_prior_sd": float,
    "sigma_upper": float,
    "beta_step": float,
    "sigma_step": _parse_optional(float),
    "n_iterations": int,
    "n_burnin": int,
    "aux_sweeps": int,
    "seed": int,
    "method": str.strip,
    "thin": int,
    "k_max": _parse_optional(int),
    "output_dir": str.strip,
    "max_seconds": _parse_optional(float),
}


def load_config_file(path: str) -> dict[str, str]:
    """Flat ``key = value`` file; blank lines and # comments ignored."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(
                    f"{path}:{lineno}: expected 'key = value', got {line.rstrip()!r}"
                )
            key, _, value = stripped.partition("=")
            values[key.strip()] = value.strip()
    return values


def make_config(
    file_values: dict[str, str] | None = None, **flag_values
) -> ExperimentConfig:
    """Defaults, overridden by config-file entries, overridden by flags.

    ``flag_values`` entries set to None mean "not given on the command line".
    """
    config = ExperimentConfig()
    for key, raw in (file_values or {}).items():
        if key not in _FIELD_PARSERS:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            config = replace(config, **{key: _FIELD_PARSERS[key](raw)})
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})") from exc
    known = {f.name for f in fields(ExperimentConfig)}
    for key, value in flag_values.items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        if value is not None:
            config = replace(config, **{key: value})
    config.validate()
    return config


def atomic_write_text(path: str, text: str) -> None:
    """Write via a temp file in the target directory, then rename over."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_trace_csv(path: str, trace: PosteriorTrace) -> None:
    lines = ["iter,beta,sigma,accepted,log_q,burnin"]
    for t in range(trace.n_iterations):
        burnin = 1 if t < trace.n_burnin else 0
        lines.append(
            f"{t},{_fmt(trace.beta[t])},{_fmt(trace.sigma[t])},"
            f"{int(trace.accepted[t])},{_fmt(trace.log_q[t])},{burnin}"
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_predictions_csv(
    path: str,
    test_indices: np.ndarray,
    true_labels: np.ndarray,
    predicted_labels: np.ndarray,
    probabilities: np.ndarray,
) -> None:
    n_classes = probabilities.shape[1]
    header = "test_index,true_label,predicted_label," + ",".join(
        f"p_{g}" for g in range(1, n_classes + 1)
    )
    lines = [header]
    for idx, truth, pred, probs in zip(
        test_indices, true_labels, predicted_labels, probabilities
    ):
        prob_text = ",".join(_fmt(p) for p in probs)
        lines.append(f"{int(idx)},{int(truth)},{int(pred)},{prob_text}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_curve_csv(path: str, header: str, values: np.ndarray) -> None:
    lines = [header]
    lines.extend(f"{k},{_fmt(v)}" for k, v in enumerate(values, start=1))
    atomic_write_text(path, "\n".join(lines) + "\n")


def _read_index_file(path: str) -> np.ndarray:
    try:
        with open(path, encoding="utf-8") as fh:
            entries = [int(line.strip()) for line in fh if line.strip()]
    except ValueError as exc:
        raise ConfigError(f"index file {path} must hold one integer per line") from exc
    if not entries:
        raise ConfigError(f"index file {path} is empty")
    return np.asarray(entries, dtype=np.int64)


def _resolve_split(config: ExperimentConfig, data: Dataset, seed) -> Split:
    if config.train_indices_path is not None:
        split = Split(
            train_indices=_read_index_file(config.train_indices_path),
            test_indices=_read_index_file(config.test_indices_path),
        )
        validate_split(split, data)
        return split
    return split_dataset(data, config.train_fraction, seed)


def _spawn_seeds(seed: int, n: int) -> list:
    return np.random.SeedSequence(seed).spawn(n)


def _seed_int(seed_seq) -> int:
    return int(seed_seq.generate_state(1)[0])


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    summary: dict
    output_files: list[str] = field(default_factory=list)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run the configured methods and write all artifacts to output_dir.

    Emits per-method trace and prediction CSVs, the nearest-neighbour error
    curves, and summary.json.  Reruns with the same config and seed produce
    byte-identical files except the wall_clock_seconds entry.
    """
    t0 = time.perf_counter()
    config.validate()
    data = load_csv(config.data_path, config.label_column)
    split_seed, exchange_seed_seq, pseudo_seed_seq = _spawn_seeds(config.seed, 3)
    split = _resolve_split(config, data, split_seed)
    if config.standardize_features:
        data = standardize(data, reference=split)
    train = subset(data, split.train_indices)
    test = subset(data, split.test_indices)
    distances = pairwise_distances(train)
    model = WeightModel(kind=config.model, epsilon=config.epsilon)
    priors = Priors(beta_sd=config.beta_prior_sd, sigma_upper=config.sigma_upper)
    sigma_step = (
        config.sigma_step
        if config.sigma_step is not None
        else 0.1 * median_offdiag_distance(distances)
    )
    proposal = ProposalConfig(beta_step=config.beta_step, sigma_step=sigma_step)

    out = config.output_dir
    os.makedirs(out, exist_ok=True)
    files: list[str] = []
    methods_summary: dict[str, dict] = {}
    interrupted = False

    def remaining_budget() -> float | None:
        if config.max_seconds is None:
            return None
        return max(config.max_seconds - (time.perf_counter() - t0), 0.001)

    def run_sampler(name: str, runner, seed_seq) -> None:
        nonlocal interrupted
        chain = ChainConfig(
            n_iterations=config.n_iterations,
            n_burnin=config.n_burnin,
            aux_sweeps=config.aux_sweeps,
            seed=_seed_int(seed_seq),
        )
        trace = runner(
            train.labels, model, distances, priors, proposal, chain,
            train.n_classes, max_seconds=remaining_budget(),
        )
        interrupted = interrupted or trace.interrupted
        trace_path = os.path.join(out, f"trace_{name}.csv")
        write_trace_csv(trace_path, trace)
        files.append(trace_path)
        entry: dict = {
            "acceptance_rate": trace.acceptance_rate,
            "interrupted": trace.interrupted,
            "misclassification_rate": None,
            "n_posterior_samples": None,
        }
        if len(trace.samples[:: config.thin]) > 0:
            result = predict_ergodic(test.features, train, model, trace, config.thin)
            pred_path = os.path.join(out, f"predictions_{name}.csv")
            write_predictions_csv(
                pred_path, split.test_indices, test.labels,
                result.predicted_labels, result.probabilities,
            )
            files.append(pred_path)
            entry["misclassification_rate"] = misclassification_rate(
                result.predicted_labels, test.labels
            )
            entry["n_posterior_samples"] = result.n_samples
        methods_summary[name] = entry

    if config.method in ("exchange", "all"):
        run_sampler("exchange", run_exchange, exchange_seed_seq)
    if config.method in ("pseudolikelihood", "all"):
        run_sampler("pseudolikelihood", run_pseudo_mh, pseudo_seed_seq)
    if config.method in ("knn", "all"):
        k_cap = config.k_max
        if k_cap is None:
            k_cap = min(default_k_max(train.n_observations), train.n_observations - 1)
        k_cap = min(k_cap, train.n_observations - 1)
        k_selected, loocv_curve = loocv_select_k(train, k_cap)
        test_curve = knn_test_errors(train, test.features, test.labels, k_cap)
        predicted = knn_classify(test.features, train, k_selected)
        loocv_path = os.path.join(out, "knn_loocv.csv")
        test_path = os.path.join(out, "knn_test_error.csv")
        write_curve_csv(loocv_path, "k,error", loocv_curve)
        write_curve_csv(test_path, "k,test_error", test_curve)
        files.extend([loocv_path, test_path])
        methods_summary["knn"] = {
            "k_max": int(k_cap),
            "k_selected": int(k_selected),
            "loocv_error": float(loocv_curve[k_selected - 1]),
            "misclassification_rate": misclassification_rate(predicted, test.labels),
        }

    exchange_rate = methods_summary.get("exchange", {}).get("acceptance_rate")
    summary = {
        "config": _config_echo(config),
        "resolved": {
            "sigma_step": sigma_step,
            "n_train": int(train.n_observations),
            "n_test": int(test.n_observations),
            "n_classes": int(train.n_classes),
            "class_names": list(data.class_names),
        },
        "diagnostics": {
            "acceptance_band": list(ACCEPTANCE_BAND),
            "exchange_acceptance_in_band": (
                None
                if exchange_rate is None
                else bool(ACCEPTANCE_BAND[0] <= exchange_rate <= ACCEPTANCE_BAND[1])
            ),
        },
        "methods": methods_summary,
        "seed": config.seed,
        "interrupted": interrupted,
        "wall_clock_seconds": time.perf_counter() - t0,
    }
    summary_path = os.path.join(out, "summary.json")
    atomic_write_text(summary_path, json.dumps(summary, indent=2, sort_keys=True) + "\n")
    files.append(summary_path)
    return ExperimentResult(config=config, summary=summary, output_files=files)


def _config_echo(config: ExperimentConfig) -> dict:
    return {f.name: getattr(config, f.name) for f in fields(ExperimentConfig)}


@dataclass
class OracleConfig:
    """Synthetic-instance settings for the enumeration-oracle checks."""

    n_sites: int = 6
    n_classes: int = 2
    model: str = "dnn1"
    beta_grid_max: float = 4.0
    grid_points: int = 41
    n_steps: int = 300_000
    n_burnin: int = 1000
    aux_sweeps: int = 500
    is_draws: int = 20_000
    is_sweeps: int = 60
    seed: int = 0
    tv_tolerance: float = 0.02

    def validate(self) -> None:
        if self.n_sites < 2 or self.n_classes < 2:
            raise ConfigError("oracle instance needs n_sites >= 2 and n_classes >= 2")
        if float(self.n_classes) ** self.n_sites > ENUMERATION_CAP:
            raise ConfigError(
                f"instance too large to enumerate: {self.n_classes}^{self.n_sites} "
                f"configurations exceed the cap of {ENUMERATION_CAP}"
            )
        if self.model not in MODEL_KINDS:
            raise ConfigError(f"model must be one of {sorted(MODEL_KINDS)}")
        if self.grid_points < 2 or self.beta_grid_max <= 0:
            raise ConfigError("need grid_points >= 2 and beta_grid_max > 0")
        if self.n_steps <= self.n_burnin or self.n_burnin < 0:
            raise ConfigError("need n_steps > n_burnin >= 0")
        if self.aux_sweeps < 1 or self.is_sweeps < 1 or self.is_draws < 2:
            raise ConfigError("aux_sweeps, is_sweeps >= 1 and is_draws >= 2 required")
        if not 0 < self.tv_tolerance < 1:
            raise ConfigError("tv_tolerance must lie in (0, 1)")


@dataclass
class OracleReport:
    tv_distance: float
    tv_tolerance: float
    grid_acceptance_rate: float
    is_estimate: float
    is_exact: float
    is_std_error: float
    passed_grid: bool
    passed_is: bool

    @property
    def passed(self) -> bool:
        return self.passed_grid and self.passed_is

    def render(self) -> str:
        mark = {True: "PASS", False: "FAIL"}
        lines = [
            "enumeration-oracle verification",
            f"  grid posterior TV distance: {self.tv_distance:.5f} "
            f"(tolerance {self.tv_tolerance}) "
            f"[acceptance {self.grid_acceptance_rate:.3f}] ... {mark[self.passed_grid]}",
            f"  normalizer ratio: estimate {self.is_estimate:.6f} vs exact "
            f"{self.is_exact:.6f} (std error {self.is_std_error:.6f}) "
            f"... {mark[self.passed_is]}",
            f"overall: {mark[self.passed]}",
        ]
        return "\n".join(lines)


def make_oracle_instance(config: OracleConfig):
    """Deterministic small instance: features, weight matrix at the median
    distance, and labels redrawn until the agreement statistic sits away from
    both the independence level and saturation (so the grid posterior spreads
    over several grid points)."""
    rng = np.random.default_rng(config.seed)
    features = rng.normal(size=(config.n_sites, 2))
    distances = np.sqrt(
        ((features[:, None, :] - features[None, :, :]) ** 2).sum(axis=-1)
    )
    distances = 0.5 * (distances + distances.T)
    np.fill_diagonal(distances, 0.0)
    sigma = median_offdiag_distance(distances)
    w = compute_weights(WeightModel(kind=config.model), distances, sigma)
    n = config.n_sites
    lo, hi = 0.55 * n, 0.9 * n
    y = rng.integers(1, config.n_classes + 1, size=n)
    for _ in range(200):
        if lo <= agreement_sum(y, w) <= hi:
            break
        y = rng.integers(1, config.n_classes + 1, size=n)
    return y.astype(np.int64), w


def importance_ratio_check(
    w: np.ndarray,
    beta: float,
    beta_ref: float,
    n_classes: int,
    n_draws: int,
    n_sweeps: int,
    seed: int,
) -> tuple[float, float, float]:
    """Estimate z(beta)/z(beta_ref) by importance sampling over field draws
    at beta_ref, against the enumerated truth.

    Each draw is an independent replicate chain (its own sweep budget from a
    shared start), so the standard error of the mean is honest.  Returns
    (estimate, exact, std_error).
    """
    rng = np.random.default_rng(seed)
    n = w.shape[0]
    inits = np.ones((n_draws, n), dtype=np.int64)
    draws = sample_field_ensemble(w, beta_ref, n_sweeps, inits, n_classes, rng)
    s = np.array([agreement_sum(y, w) for y in draws])
    ratios = np.exp((beta - beta_ref) * s)
    estimate = float(ratios.mean())
    std_error = float(ratios.std(ddof=1) / np.sqrt(n_draws))
    exact = float(
        np.exp(
            enumerate_log_z(w, beta, n_classes)
            - enumerate_log_z(w, beta_ref, n_classes)
        )
    )
    return estimate, exact, std_error


def verify_oracle(config: OracleConfig) -> OracleReport:
    """Exact-vs-MCMC checks on an enumerable instance.

    Grid check: exchange sampler over a flat discrete prior on beta (sigma
    fixed) against the enumerated posterior, in total-variation distance.
    Ratio check: importance-sampling estimate of z(beta)/z(beta') against
    enumeration, within 3 standard errors.
    """
    config.validate()
    y, w = make_oracle_instance(config)
    beta_grid = np.linspace(0.0, config.beta_grid_max, config.grid_points)
    visit_freq, acc_rate = run_beta_grid_exchange(
        y, w, beta_grid, config.n_steps, config.aux_sweeps, config.n_classes,
        seed=config.seed + 1, n_burnin=config.n_burnin,
    )
    exact = exact_beta_grid_posterior(y, w, beta_grid, config.n_classes)
    tv = 0.5 * float(np.abs(visit_freq - exact).sum())

    beta_hi = 0.5 * config.beta_grid_max
    beta_lo = 0.25 * config.beta_grid_max
    estimate, exact_ratio, std_error = importance_ratio_check(
        w, beta_hi, beta_lo, config.n_classes, config.is_draws,
        config.is_sweeps, seed=config.seed + 2,
    )
    return OracleReport(
        tv_distance=tv,
        tv_tolerance=config.tv_tolerance,
        grid_acceptance_rate=acc_rate,
        is_estimate=estimate,
        is_exact=exact_ratio,
        is_std_error=std_error,
        passed_grid=tv < config.tv_tolerance,
        passed_is=abs(estimate - exact_ratio) <= 3.0 * std_error,
    )

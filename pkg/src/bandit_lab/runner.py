"""Experiment orchestration: configs, simulation, replay, diagnostics, CSV.

A run configuration is one JSON document (schema in the README). All
randomness flows from the configured seeds, records are emitted in
deterministic (policy, seed, t) order, and floats are written with
shortest-round-trip formatting, so identical configs produce byte-identical
CSV files.
"""

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from . import env as envmod
from . import policies as polmod
from .linalg import spectral_norm

__all__ = [
    "ConfigError",
    "DataFormatError",
    "DiagnosticsRecord",
    "PolicySpec",
    "ReplayDataset",
    "RunConfig",
    "RunRecord",
    "build_policy",
    "emit_outputs",
    "environment_for_seed",
    "load_run_config",
    "read_records_csv",
    "run_diagnostics",
    "run_replay",
    "run_simulation",
    "write_records_csv",
]

RESULTS_HEADER = ["t", "policy", "seed", "arm", "reward", "inst_regret", "cum_regret", "rel_regret", "cos_dist"]
DIAGNOSTICS_HEADER = ["t", "policy", "seed", "norm_n1", "norm_n2", "norm_n3"]
ALLOWED_METRICS = ("cum_regret", "rel_regret", "cos_dist", "diagnostics")


class ConfigError(ValueError):
    """The run configuration is malformed or internally inconsistent."""


class DataFormatError(ValueError):
    """A logged-data file violates the replay format."""


@dataclass(frozen=True)
class RunRecord:
    t: int
    policy: str
    seed: int
    arm: int
    reward: float
    inst_regret: float
    cum_regret: float
    rel_regret: float | None = None
    cos_dist: float | None = None


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: int
    policy: str
    seed: int
    norm_n1: float
    norm_n2: float
    norm_n3: float


@dataclass(frozen=True)
class PolicySpec:
    name: str
    params: dict = field(default_factory=dict)
    label: str = ""

    def __post_init__(self):
        if not self.label:
            object.__setattr__(self, "label", self.name)


@dataclass(frozen=True)
class RunConfig:
    env_spec: dict
    policies: tuple
    seeds: tuple
    metrics: tuple = ("cum_regret", "rel_regret", "cos_dist")
    output_path: str = ""


# ---------------------------------------------------------------------------
# JSON config parsing
# ---------------------------------------------------------------------------

_FAMILY_BUILDERS = {
    "gaussian": lambda p: envmod.GaussianFamily(p.get("mean", 0.0), p.get("std", 1.0)),
    "uniform": lambda p: envmod.UniformFamily(p["low"], p["high"]),
    "laplace": lambda p: envmod.LaplaceFamily(p.get("loc", 0.0), p.get("scale", 1.0)),
    "exponential": lambda p: envmod.ExponentialFamily(p.get("rate", 1.0)),
    "lognormal": lambda p: envmod.LogNormalFamily(p.get("mu", 0.0), p.get("sigma", 1.0)),
}


def parse_family(spec: dict):
    if not isinstance(spec, dict) or "name" not in spec:
        raise ConfigError(f"family spec must be an object with a 'name': {spec!r}")
    name = spec["name"]
    if name == "mixture":
        try:
            return envmod.MixtureFamily(
                weight=spec["weight"],
                first=parse_family(spec["first"]),
                second=parse_family(spec["second"]),
            )
        except KeyError as exc:
            raise ConfigError(f"mixture family missing field {exc}") from exc
    builder = _FAMILY_BUILDERS.get(name)
    if builder is None:
        raise ConfigError(f"unknown family {name!r}")
    try:
        return builder(spec)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad parameters for family {name!r}: {exc}") from exc


def parse_feature_distribution(spec: dict) -> envmod.FeatureDistribution:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("feature_distribution must be an object with a 'kind'")
    kind = spec["kind"]
    try:
        if kind == "multivariate_gaussian":
            return envmod.FeatureDistribution.multivariate_gaussian(spec["covariance"])
        if kind == "iid":
            return envmod.FeatureDistribution.iid(parse_family(spec["family"]))
    except (KeyError, ValueError, np.linalg.LinAlgError) as exc:
        raise ConfigError(f"bad feature_distribution: {exc}") from exc
    raise ConfigError(f"unknown feature_distribution kind {kind!r}")


def _parse_covariance(spec, d: int) -> np.ndarray:
    if isinstance(spec, dict) and "diag" in spec:
        diag = np.asarray(spec["diag"], dtype=float)
        if diag.shape != (d,):
            raise ConfigError(f"noise diag length {diag.shape} does not match d={d}")
        return np.diag(diag)
    cov = np.asarray(spec, dtype=float)
    if cov.shape != (d, d):
        raise ConfigError(f"noise covariance shape {cov.shape} does not match d={d}")
    return cov


def parse_noise_model(spec: dict, d: int) -> envmod.NoiseModel:
    if not isinstance(spec, dict):
        raise ConfigError("noise must be an object")
    mode = spec.get("mode", "per_arm")
    try:
        return envmod.NoiseModel(
            mode=mode,
            covariance=_parse_covariance(spec.get("covariance", np.eye(d)), d),
            truncation_radius=spec.get("truncation_radius"),
        )
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise ConfigError(f"bad noise model: {exc}") from exc


def load_run_config(path) -> RunConfig:
    """Parse a JSON run configuration file, validating its schema."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return parse_run_config(doc)


def parse_run_config(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("run config must be a JSON object")
    env_spec = doc.get("environment")
    if not isinstance(env_spec, dict):
        raise ConfigError("config needs an 'environment' object")
    policies = _parse_policy_specs(doc.get("policies"))
    seeds = doc.get("seeds")
    if not isinstance(seeds, list) or not seeds or not all(isinstance(s, int) for s in seeds):
        raise ConfigError("config needs a nonempty integer list 'seeds'")
    metrics = tuple(doc.get("metrics", ["cum_regret", "rel_regret", "cos_dist"]))
    for m in metrics:
        if m not in ALLOWED_METRICS:
            raise ConfigError(f"unknown metric {m!r}")
    cfg = RunConfig(
        env_spec=env_spec,
        policies=policies,
        seeds=tuple(seeds),
        metrics=metrics,
        output_path=doc.get("output_path", ""),
    )
    environment_for_seed(cfg.env_spec, seeds[0])  # fail before any round runs
    for spec in policies:
        if spec.name not in POLICY_BUILDERS:
            raise ConfigError(f"unknown policy {spec.name!r}")
    return cfg


def _parse_policy_specs(raw) -> tuple:
    if not isinstance(raw, list) or not raw:
        raise ConfigError("config needs a nonempty 'policies' list")
    specs = []
    for item in raw:
        if isinstance(item, str):
            specs.append(PolicySpec(name=item))
        elif isinstance(item, dict) and "name" in item:
            specs.append(
                PolicySpec(
                    name=item["name"],
                    params=item.get("params", {}),
                    label=item.get("label", ""),
                )
            )
        else:
            raise ConfigError(f"bad policy spec {item!r}")
    labels = [s.label for s in specs]
    if len(set(labels)) != len(labels):
        raise ConfigError("policy labels must be unique")
    return tuple(specs)


def environment_for_seed(env_spec: dict, seed: int) -> envmod.EnvironmentConfig:
    """Instantiate the environment template for one seed.

    theta_star may be a concrete vector or "random", in which case it is
    drawn from the seed (coordinates uniform on [-1, 1], rescaled into the
    unit ball only when needed).
    """
    try:
        K = int(env_spec["K"])
        d = int(env_spec["d"])
        T = int(env_spec["T"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"environment needs integer K, d, T: {exc}") from exc
    dist = parse_feature_distribution(env_spec.get("feature_distribution", {"kind": "iid", "family": {"name": "gaussian"}}))
    noise = parse_noise_model(env_spec.get("noise", {}), d)
    theta_spec = env_spec.get("theta_star", "random")
    if isinstance(theta_spec, str):
        if theta_spec != "random":
            raise ConfigError(f"theta_star must be a vector or 'random', got {theta_spec!r}")
        theta = envmod.draw_theta_star(d, envmod.keyed_rng(seed, 0, envmod.LANE_THETA))
    else:
        theta = np.asarray(theta_spec, dtype=float)
    try:
        return envmod.EnvironmentConfig(
            K=K,
            d=d,
            T=T,
            theta_star=theta,
            feature_dist=dist,
            noise=noise,
            reward_noise_sigma=float(env_spec.get("reward_noise_sigma", 0.0)),
            seed=seed,
        )
    except ValueError as exc:
        raise ConfigError(f"bad environment: {exc}") from exc


# ---------------------------------------------------------------------------
# Policy registry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PolicyContext:
    """Everything a policy builder may draw on; hidden fields are None in replay."""

    d: int
    K: int
    T: int
    noise_cov: np.ndarray
    rng: np.random.Generator
    theta_star: np.ndarray | None = None
    feature_dist: envmod.FeatureDistribution | None = None


def _feature_sampler(ctx: PolicyContext):
    if ctx.feature_dist is None:
        return None
    dist, k_arms, d = ctx.feature_dist, ctx.K, ctx.d

    def sampler(rng, n: int) -> np.ndarray:
        return dist.sample(rng, n * k_arms, d).reshape(n, k_arms, d)

    return sampler


def _require_theta_star(ctx: PolicyContext, name: str) -> np.ndarray:
    if ctx.theta_star is None:
        raise ConfigError(f"policy {name!r} needs a simulated environment")
    return ctx.theta_star


def _build_oracle_cf(ctx: PolicyContext, p: dict) -> polmod.FixedCoefficient:
    theta_star = _require_theta_star(ctx, "oracle_cf")
    if ctx.feature_dist is None:
        raise ConfigError("policy 'oracle_cf' needs a feature distribution")
    theta_bar = polmod.bayes_optimal_theta(
        ctx.feature_dist.covariance_matrix(ctx.d), ctx.noise_cov, theta_star
    )
    return polmod.FixedCoefficient(theta_bar, name="oracle_cf")


POLICY_BUILDERS = {
    "uniform": lambda ctx, p: polmod.UniformRandom(),
    "scripted": lambda ctx, p: polmod.ScriptedPolicy(p.get("arms", [])),
    "noisy_linrel": lambda ctx, p: polmod.NoisyLinRel(
        ctx.d, alpha_exponent=p.get("alpha_exponent", polmod.ALPHA_EXPONENT_DEFAULT)
    ),
    "greedy": lambda ctx, p: polmod.ExploreThenCommitGreedy(ctx.d, ctx.T, tau=p.get("tau")),
    "linucb": lambda ctx, p: polmod.LinUCB(ctx.d, ucb_alpha=p.get("ucb_alpha", 0.25)),
    "gradient_linrel": lambda ctx, p: polmod.RegretGradientLinRel(
        ctx.d,
        ctx.noise_cov,
        ctx.rng,
        feature_sampler=_feature_sampler(ctx),
        alpha_exponent=p.get("alpha_exponent", polmod.ALPHA_EXPONENT_DEFAULT),
        step_size=p.get("step_size", 0.05),
        ucb_coeff=p.get("ucb_coeff", 0.25),
        mc_samples=p.get("mc_samples", 100),
        fd_step=p.get("fd_step", 1e-2),
    ),
    "oracle_tc": lambda ctx, p: polmod.FixedCoefficient(
        _require_theta_star(ctx, "oracle_tc"), name="oracle_tc"
    ),
    "oracle_cf": _build_oracle_cf,
    "oracle_gd": lambda ctx, p: polmod.OracleGradient(
        _require_theta_star(ctx, "oracle_gd"),
        ctx.noise_cov,
        ctx.rng,
        feature_sampler=_feature_sampler(ctx),
        step_size=p.get("step_size", 0.05),
        mc_samples=p.get("mc_samples", 100),
        fd_step=p.get("fd_step", 1e-2),
    ),
}


def build_policy(spec: PolicySpec, ctx: PolicyContext) -> polmod.Policy:
    try:
        builder = POLICY_BUILDERS[spec.name]
    except KeyError:
        raise ConfigError(f"unknown policy {spec.name!r}") from None
    try:
        return builder(ctx, dict(spec.params))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad parameters for policy {spec.name!r}: {exc}") from exc


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------


def _cosine_distance(theta, reference) -> float | None:
    if theta is None:
        return None
    theta = np.asarray(theta, dtype=float)
    norm_t = float(np.linalg.norm(theta))
    norm_r = float(np.linalg.norm(reference))
    if norm_t == 0.0 or norm_r == 0.0 or not np.all(np.isfinite(theta)):
        return None
    return float(1.0 - theta @ reference / (norm_t * norm_r))


def run_simulation(cfg: RunConfig):
    """Yield one RunRecord per (policy, seed, round), in that order.

    Environment draws are keyed by (seed, t), so every policy sees the same
    context stream for a given seed.
    """
    want_rel = "rel_regret" in cfg.metrics
    want_cos = "cos_dist" in cfg.metrics
    for spec in cfg.policies:
        for seed in cfg.seeds:
            environment = environment_for_seed(cfg.env_spec, seed)
            theta_star = environment.theta_star
            theta_bar = polmod.bayes_optimal_theta(
                environment.feature_dist.covariance_matrix(environment.d),
                environment.noise.covariance,
                theta_star,
            )
            policy_rng = envmod.keyed_rng(seed, 0, envmod.LANE_POLICY)
            policy = build_policy(
                spec,
                PolicyContext(
                    d=environment.d,
                    K=environment.K,
                    T=environment.T,
                    noise_cov=environment.noise.covariance,
                    rng=policy_rng,
                    theta_star=theta_star,
                    feature_dist=environment.feature_dist,
                ),
            )
            cum = 0.0
            for t in range(1, environment.T + 1):
                round_ctx = envmod.sample_round(environment, t)
                arm = policy.select(t, round_ctx.x, policy_rng)
                y = envmod.reward(environment, round_ctx, arm)
                policy.observe(t, arm, round_ctx.x[arm], y, environment.noise.covariance)
                inst = envmod.instantaneous_regret(round_ctx, arm, theta_star)
                cum += inst
                rel = envmod.relative_regret(round_ctx, arm, theta_bar) if want_rel else None
                cos = _cosine_distance(policy.current_theta(), theta_star) if want_cos else None
                yield RunRecord(
                    t=t,
                    policy=spec.label,
                    seed=seed,
                    arm=arm,
                    reward=y,
                    inst_regret=inst,
                    cum_regret=cum,
                    rel_regret=rel,
                    cos_dist=cos,
                )


# ---------------------------------------------------------------------------
# Replay over logged datasets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReplayDataset:
    """Full-information log: per round, K contexts and all K rewards."""

    contexts: np.ndarray  # (rounds, K, d)
    rewards: np.ndarray  # (rounds, K)

    def __post_init__(self):
        if self.contexts.ndim != 3 or self.rewards.ndim != 2:
            raise DataFormatError("contexts must be (rounds, K, d), rewards (rounds, K)")
        if self.contexts.shape[:2] != self.rewards.shape:
            raise DataFormatError("contexts and rewards disagree on rounds/arms")
        if self.K < 2:
            raise DataFormatError("replay needs at least 2 arms")
        if not (np.all(np.isfinite(self.contexts)) and np.all(np.isfinite(self.rewards))):
            raise DataFormatError("replay data must be finite")

    @property
    def rounds(self) -> int:
        return self.contexts.shape[0]

    @property
    def K(self) -> int:
        return self.contexts.shape[1]

    @property
    def d(self) -> int:
        return self.contexts.shape[2]

    def noise_covariance(self) -> np.ndarray:
        """Default noise handed to noise-aware policies: 10% of the per-coordinate sample variance."""
        flat = self.contexts.reshape(-1, self.d)
        return np.diag(0.1 * flat.var(axis=0))


def read_replay_csv(path) -> ReplayDataset:
    """Parse the replay CSV format.

    Header: round,arm_index,context_0..context_{d-1},reward with K
    consecutive rows per round id and arm_index counting 0..K-1. Malformed
    rows raise DataFormatError with the offending line number.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file (line 1)") from None
        d = len(header) - 3
        if d < 1 or header[:2] != ["round", "arm_index"] or header[-1] != "reward" or header[2:-1] != [f"context_{i}" for i in range(d)]:
            raise DataFormatError(f"{path}: bad header (line 1): {','.join(header)}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != d + 3:
                raise DataFormatError(f"{path}: expected {d + 3} fields, got {len(row)} (line {lineno})")
            try:
                rows.append((int(row[0]), int(row[1]), [float(v) for v in row[2:]], lineno))
            except ValueError as exc:
                raise DataFormatError(f"{path}: {exc} (line {lineno})") from exc
    if not rows:
        raise DataFormatError(f"{path}: no data rows (line 2)")

    groups: list[list] = []
    for rid, arm, values, lineno in rows:
        if not groups or groups[-1][0] != rid:
            groups.append([rid, []])
        expected = len(groups[-1][1])
        if arm != expected:
            raise DataFormatError(f"{path}: expected arm_index {expected} for round {rid} (line {lineno})")
        groups[-1][1].append(values)
    k_arms = len(groups[0][1])
    for rid, arm_rows in groups:
        if len(arm_rows) != k_arms:
            raise DataFormatError(f"{path}: round {rid} has {len(arm_rows)} arms, expected {k_arms}")
    contexts = np.array([[r[:-1] for r in arm_rows] for _, arm_rows in groups])
    rewards = np.array([[r[-1] for r in arm_rows] for _, arm_rows in groups])
    return ReplayDataset(contexts=contexts, rewards=rewards)


def write_replay_csv(path, dataset: ReplayDataset) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["round", "arm_index"] + [f"context_{i}" for i in range(dataset.d)] + ["reward"])
        for rid in range(dataset.rounds):
            for arm in range(dataset.K):
                writer.writerow(
                    [rid, arm]
                    + [repr(float(v)) for v in dataset.contexts[rid, arm]]
                    + [repr(float(dataset.rewards[rid, arm]))]
                )


def run_replay(dataset: ReplayDataset, policy_specs, seeds):
    """Score policies against a full-information log.

    Policies see only the K contexts per round and the reward of the arm
    they pick; regret is measured against the per-round maximum reward.
    """
    specs = tuple(policy_specs)
    noise_cov = dataset.noise_covariance()
    row_best = dataset.rewards.max(axis=1)
    for spec in specs:
        for seed in seeds:
            policy_rng = envmod.keyed_rng(seed, 0, envmod.LANE_POLICY)
            policy = build_policy(
                spec,
                PolicyContext(
                    d=dataset.d,
                    K=dataset.K,
                    T=dataset.rounds,
                    noise_cov=noise_cov,
                    rng=policy_rng,
                ),
            )
            cum = 0.0
            for idx in range(dataset.rounds):
                t = idx + 1
                x = dataset.contexts[idx]
                arm = policy.select(t, x, policy_rng)
                y = float(dataset.rewards[idx, arm])
                policy.observe(t, arm, x[arm], y, noise_cov)
                inst = float(row_best[idx] - y)
                cum += inst
                yield RunRecord(
                    t=t,
                    policy=spec.label,
                    seed=seed,
                    arm=arm,
                    reward=y,
                    inst_regret=inst,
                    cum_regret=cum,
                )


# ---------------------------------------------------------------------------
# Concentration diagnostics
# ---------------------------------------------------------------------------


def run_diagnostics(cfg: RunConfig):
    """Track the three noise-interaction running sums alongside a policy.

    N1 accumulates hidden-feature/noise outer products, N2 the noise
    covariance residual, N3 the reward-noise-weighted observed features.
    Spectral norms are logged at geometric checkpoints t in {1, 2, 4, ...}.
    Needs hidden features and a shared per-round noise draw, so it runs only
    on identical-noise simulated environments.
    """
    spec = cfg.policies[0]
    for seed in cfg.seeds:
        environment = environment_for_seed(cfg.env_spec, seed)
        if environment.noise.mode != "identical":
            raise ConfigError("diagnostics require identical-noise environments")
        noise_cov = environment.noise.covariance
        theta_star = environment.theta_star
        policy_rng = envmod.keyed_rng(seed, 0, envmod.LANE_POLICY)
        policy = build_policy(
            spec,
            PolicyContext(
                d=environment.d,
                K=environment.K,
                T=environment.T,
                noise_cov=noise_cov,
                rng=policy_rng,
                theta_star=theta_star,
                feature_dist=environment.feature_dist,
            ),
        )
        d = environment.d
        n1 = np.zeros((d, d))
        n2 = np.zeros((d, d))
        n3 = np.zeros(d)
        checkpoint = 1
        for t in range(1, environment.T + 1):
            round_ctx = envmod.sample_round(environment, t)
            arm = policy.select(t, round_ctx.x, policy_rng)
            y = envmod.reward(environment, round_ctx, arm)
            policy.observe(t, arm, round_ctx.x[arm], y, noise_cov)
            eps = round_ctx.eps[0]
            n1 += np.outer(round_ctx.z[arm], eps)
            n2 += np.outer(eps, eps) - noise_cov
            n3 += round_ctx.x[arm] * (y - float(round_ctx.z[arm] @ theta_star))
            if t == checkpoint:
                checkpoint *= 2
                norm1, norm2 = spectral_norm(n1), spectral_norm(n2)
                assert spectral_norm(n1 + n2) <= norm1 + norm2 + 1e-9
                yield DiagnosticsRecord(
                    t=t,
                    policy=spec.label,
                    seed=seed,
                    norm_n1=norm1,
                    norm_n2=norm2,
                    norm_n3=float(np.linalg.norm(n3)),
                )


# ---------------------------------------------------------------------------
# Output emission
# ---------------------------------------------------------------------------


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_records_csv(path, records) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULTS_HEADER)
        for rec in records:
            writer.writerow(
                [
                    rec.t,
                    rec.policy,
                    rec.seed,
                    rec.arm,
                    _format_value(rec.reward),
                    _format_value(rec.inst_regret),
                    _format_value(rec.cum_regret),
                    _format_value(rec.rel_regret),
                    _format_value(rec.cos_dist),
                ]
            )


def read_records_csv(path) -> list[RunRecord]:
    """Inverse of write_records_csv; empty fields come back as None."""
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != RESULTS_HEADER:
            raise DataFormatError(f"{path}: unexpected results header")
        for row in reader:
            out.append(
                RunRecord(
                    t=int(row[0]),
                    policy=row[1],
                    seed=int(row[2]),
                    arm=int(row[3]),
                    reward=float(row[4]),
                    inst_regret=float(row[5]),
                    cum_regret=float(row[6]),
                    rel_regret=float(row[7]) if row[7] else None,
                    cos_dist=float(row[8]) if row[8] else None,
                )
            )
    return out


def emit_outputs(records, output_dir, charts: bool = False) -> list:
    """Write results.csv (and optional SVG charts) under output_dir.

    Returns the list of written paths. Chart series are seed-averaged per
    policy with a min/max band across seeds.
    """
    from pathlib import Path

    records = list(records)
    if not records:
        raise ValueError("no records to emit")
    out = Path(output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / "results.csv"
        write_records_csv(csv_path, records)
        written = [csv_path]
        if charts:
            from .charts import write_line_chart_svg

            for metric in ("cum_regret", "rel_regret", "cos_dist"):
                series = _chart_series(records, metric)
                if not series:
                    continue
                path = out / f"chart_{metric}.svg"
                write_line_chart_svg(path, title=metric, series=series)
                written.append(path)
        return written
    except OSError as exc:
        raise OSError(f"cannot write outputs under {output_dir}: {exc}") from exc


def _chart_series(records, metric):
    """Per-policy (ts, mean, lo, hi) arrays of a metric, averaged across seeds."""
    by_policy: dict = {}
    for rec in records:
        value = getattr(rec, metric)
        if value is None:
            continue
        by_policy.setdefault(rec.policy, {}).setdefault(rec.t, []).append(value)
    series = {}
    for policy, per_t in by_policy.items():
        ts = sorted(per_t)
        mean = np.array([float(np.mean(per_t[t])) for t in ts])
        lo = np.array([min(per_t[t]) for t in ts])
        hi = np.array([max(per_t[t]) for t in ts])
        series[policy] = (np.array(ts, dtype=float), mean, lo, hi)
    return series


def write_diagnostics_csv(path, records) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(DIAGNOSTICS_HEADER)
        for rec in records:
            writer.writerow(
                [rec.t, rec.policy, rec.seed]
                + [_format_value(v) for v in (rec.norm_n1, rec.norm_n2, rec.norm_n3)]
            )

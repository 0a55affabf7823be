"""Decision policies behind one select/observe interface.

``select(t, x, rng)`` sees only the observed per-arm features; policies
whose construction bakes in hidden quantities (the true coefficient, the
feature law, or the closed-form optimal coefficient) carry ``oracle = True``.
``observe(t, arm, x_arm, y, noise_cov)`` feeds back the chosen arm's
observed features and reward together with the known noise covariance, and
is the only mutation point of a policy's state.
"""

import logging

import numpy as np

from .gradient import GradientConfig, regret_gradient
from .linalg import (
    cutoff_pinv_solve,
    eigendecompose,
    rank_threshold,
    residual_projection_norm,
    truncated_pinv_apply,
)

__all__ = [
    "ALPHA_EXPONENT_DEFAULT",
    "ExploreThenCommitGreedy",
    "FixedCoefficient",
    "LinUCB",
    "NoisyLinRel",
    "OracleGradient",
    "Policy",
    "RegretGradientLinRel",
    "ScriptedPolicy",
    "UniformRandom",
    "bayes_optimal_theta",
    "candidate_set",
    "posterior_feature_mean",
]

log = logging.getLogger(__name__)

# Eigenvalue-threshold exponent: the spectral cut at round t sits at t**alpha.
ALPHA_EXPONENT_DEFAULT = 5.0 / 8.0


def bayes_optimal_theta(feature_cov, noise_cov, theta_star) -> np.ndarray:
    """Optimal fixed coefficient for Gaussian features observed under Gaussian noise.

    Solves (feature_cov + noise_cov) theta = feature_cov theta_star; the
    result shrinks theta_star toward directions where features dominate
    noise, and playing argmax x.theta with it is the Bayes decision when
    both laws are Gaussian.
    """
    f = np.asarray(feature_cov, dtype=float)
    n = np.asarray(noise_cov, dtype=float)
    return np.linalg.solve(f + n, f @ np.asarray(theta_star, dtype=float))


def posterior_feature_mean(x, feature_cov, noise_cov) -> np.ndarray:
    """Posterior mean of the hidden feature given its noisy observation.

    Computes (feature_cov^-1 + noise_cov^-1)^-1 noise_cov^-1 x for Gaussian
    feature and noise laws.
    """
    f = np.asarray(feature_cov, dtype=float)
    n = np.asarray(noise_cov, dtype=float)
    precision = np.linalg.inv(f) + np.linalg.inv(n)
    return np.linalg.solve(precision, np.linalg.solve(n, np.asarray(x, dtype=float)))


def candidate_set(rewards, pairwise_width) -> list[int]:
    """Elimination loop producing the surviving candidate arms.

    Repeatedly promotes the highest-estimate arm c among the undecided arms
    (ties to the lowest index), then retires every undecided arm i whose
    estimate plus the pairwise width to c cannot reach c's estimate. The
    result always contains the globally highest-estimate arm.
    """
    r = np.asarray(rewards, dtype=float)
    active = list(range(r.shape[0]))
    chosen: list[int] = []
    while active:
        c = active[int(np.argmax(r[active]))]
        chosen.append(c)
        survivors = []
        for i in active:
            if i == c:
                continue
            # elimination is sound by construction: an arm is retired only
            # when its estimate plus the width cannot reach the promoted arm
            if not r[i] + pairwise_width(i, c) <= r[c]:
                survivors.append(i)
        active = survivors
    return chosen


class Policy:
    """Base select/observe interface; subclasses own all mutable state."""

    name = "policy"
    oracle = False

    def select(self, t: int, x: np.ndarray, rng) -> int:
        raise NotImplementedError

    def observe(self, t: int, arm: int, x_arm: np.ndarray, y: float, noise_cov) -> None:
        pass

    def current_theta(self) -> np.ndarray | None:
        """Coefficient vector driving decisions, for tracking metrics; None if absent."""
        return None


class UniformRandom(Policy):
    name = "uniform"

    def select(self, t, x, rng) -> int:
        return int(rng.integers(x.shape[0]))


class ScriptedPolicy(Policy):
    """Plays a fixed arm sequence, cycling; for replay baselines and tests."""

    name = "scripted"

    def __init__(self, arms):
        if not arms:
            raise ValueError("need at least one scripted arm")
        self.arms = [int(a) for a in arms]
        self._i = 0

    def select(self, t, x, rng) -> int:
        arm = self.arms[self._i % len(self.arms)]
        self._i += 1
        if not 0 <= arm < x.shape[0]:
            raise ValueError(f"scripted arm {arm} out of range")
        return arm


class NoisyLinRel(Policy):
    """Spectral regression on noise-corrected sums with pairwise elimination.

    State: Z accumulates x x^T minus the known noise covariance per observed
    round (an unbiased running estimate of the hidden-feature Gram matrix),
    Y accumulates reward-weighted observed features. Each round the spectrum
    of Z is cut at t**alpha; the coefficient estimate inverts only the
    retained directions, and pairwise widths are the feature differences'
    mass in the discarded directions. The played arm is drawn uniformly from
    the candidate set that survives width-based elimination.
    """

    name = "noisy_linrel"

    def __init__(self, d: int, alpha_exponent: float = ALPHA_EXPONENT_DEFAULT):
        if not 0.5 < alpha_exponent < 1.0:
            raise ValueError("alpha_exponent must lie in (1/2, 1)")
        self.d = d
        self.alpha_exponent = alpha_exponent
        self.Z = np.zeros((d, d))
        self.Y = np.zeros(d)
        self.theta_hat = np.zeros(d)

    def estimate(self, t: int):
        """Spectral state at round t: (eigendecomposition, retained rank, coefficient)."""
        eig = eigendecompose(self.Z)
        k = rank_threshold(eig, float(t) ** self.alpha_exponent)
        theta = truncated_pinv_apply(eig, k, self.Y)
        return eig, k, theta

    def select(self, t, x, rng) -> int:
        eig, k, theta = self.estimate(t)
        self.theta_hat = theta
        r = x @ theta
        # Project all arms onto the discarded eigendirections once; each
        # pairwise width is then a cheap column difference.
        tail = eig.eigenvectors[:, k:].T @ x.T  # (d - k, K)

        def width(i: int, c: int) -> float:
            return float(np.linalg.norm(tail[:, i] - tail[:, c]))

        candidates = candidate_set(r, width)
        return candidates[int(rng.integers(len(candidates)))]

    def observe(self, t, arm, x_arm, y, noise_cov) -> None:
        self.Z += np.outer(x_arm, x_arm) - np.asarray(noise_cov, dtype=float)
        self.Y += y * np.asarray(x_arm, dtype=float)

    def current_theta(self):
        return self.theta_hat


def _exploration_length(horizon: int) -> int:
    """floor(horizon ** (2/3)) in exact integer arithmetic."""
    target = horizon * horizon
    m = max(0, int(round(float(target) ** (1.0 / 3.0))))
    while (m + 1) ** 3 <= target:
        m += 1
    while m**3 > target:
        m -= 1
    return m


class ExploreThenCommitGreedy(Policy):
    """Uniform exploration for tau rounds, then greedy on a one-shot estimate.

    tau defaults to floor(T ** (2/3)). The estimate solves the accumulated
    normal equations by an eigenvalue-cutoff pseudo-inverse, so a singular
    design (tau < d) degrades gracefully instead of failing.
    """

    name = "greedy"

    def __init__(self, d: int, horizon: int, tau: int | None = None):
        self.d = d
        self.tau = _exploration_length(horizon) if tau is None else int(tau)
        self.X = np.zeros((d, d))
        self.Y = np.zeros(d)
        self.theta_hat: np.ndarray | None = None

    def select(self, t, x, rng) -> int:
        if t <= self.tau:
            return int(rng.integers(x.shape[0]))
        if self.theta_hat is None:
            self.theta_hat = cutoff_pinv_solve(self.X, self.Y)
        return int(np.argmax(x @ self.theta_hat))

    def observe(self, t, arm, x_arm, y, noise_cov) -> None:
        if t <= self.tau:
            self.X += np.outer(x_arm, x_arm)
            self.Y += y * np.asarray(x_arm, dtype=float)

    def current_theta(self):
        return self.theta_hat


class LinUCB(Policy):
    """Ridge regression on observed features with an ellipsoidal bonus."""

    name = "linucb"

    def __init__(self, d: int, ucb_alpha: float = 0.25):
        if ucb_alpha < 0:
            raise ValueError("ucb_alpha must be nonnegative")
        self.d = d
        self.ucb_alpha = ucb_alpha
        self.A = np.eye(d)
        self.b = np.zeros(d)

    def select(self, t, x, rng) -> int:
        theta = np.linalg.solve(self.A, self.b)
        widths = np.sqrt(np.sum(x * np.linalg.solve(self.A, x.T).T, axis=1))
        return int(np.argmax(x @ theta + self.ucb_alpha * widths))

    def observe(self, t, arm, x_arm, y, noise_cov) -> None:
        self.A += np.outer(x_arm, x_arm)
        self.b += y * np.asarray(x_arm, dtype=float)

    def current_theta(self):
        return np.linalg.solve(self.A, self.b)


class FixedCoefficient(Policy):
    """Plays argmax x.theta for a coefficient fixed at construction.

    Used for the reference policies built from hidden quantities: the true
    coefficient ("oracle_tc") and the closed-form optimum ("oracle_cf").
    """

    oracle = True

    def __init__(self, theta, name: str = "fixed"):
        self.theta = np.asarray(theta, dtype=float).copy()
        self.name = name

    def select(self, t, x, rng) -> int:
        return int(np.argmax(x @ self.theta))

    def current_theta(self):
        return self.theta


class RegretGradientLinRel(Policy):
    """Noise-corrected estimation plus gradient descent on simulated regret.

    Keeps the same running sums as NoisyLinRel to estimate the true
    coefficient, then each round descends a separate decision coefficient
    along a Monte-Carlo regret gradient that plugs in the current estimate,
    and finally plays argmax of score plus a discarded-direction bonus.
    With no feature sampler (replay mode) the round's observed contexts
    stand in for the hidden feature draw.
    """

    name = "gradient_linrel"

    def __init__(
        self,
        d: int,
        noise_cov,
        rng,
        feature_sampler=None,
        alpha_exponent: float = ALPHA_EXPONENT_DEFAULT,
        step_size: float = 0.05,
        ucb_coeff: float = 0.25,
        mc_samples: int = 100,
        fd_step: float = 1e-2,
    ):
        if step_size < 0 or ucb_coeff < 0:
            raise ValueError("step_size and ucb_coeff must be nonnegative")
        self.estimator = NoisyLinRel(d, alpha_exponent)
        self.noise_cov = np.asarray(noise_cov, dtype=float)
        self.feature_sampler = feature_sampler
        self.step_size = step_size
        self.ucb_coeff = ucb_coeff
        self.grad_cfg = GradientConfig(mc_noise_samples=mc_samples, fd_step=fd_step)
        theta = rng.standard_normal(d)
        self.theta = theta / np.linalg.norm(theta)
        self.skipped_gradient_steps = 0

    def select(self, t, x, rng) -> int:
        eig, k, theta_dagger = self.estimator.estimate(t)
        self.estimator.theta_hat = theta_dagger
        z = self.feature_sampler(rng, 1)[0] if self.feature_sampler is not None else x
        if self.step_size > 0.0:
            grad = regret_gradient(self.theta, z, theta_dagger, self.noise_cov, self.grad_cfg, rng)
            if np.all(np.isfinite(grad)):
                self.theta = self.theta - self.step_size * grad
            else:
                self.skipped_gradient_steps += 1
                log.warning("skipped non-finite regret gradient at t=%d", t)
        scores = x @ self.theta
        if self.ucb_coeff > 0.0:
            tail = eig.eigenvectors[:, k:].T @ x.T
            scores = scores + self.ucb_coeff * np.linalg.norm(tail, axis=0)
        return int(np.argmax(scores))

    def observe(self, t, arm, x_arm, y, noise_cov) -> None:
        self.estimator.observe(t, arm, x_arm, y, noise_cov)

    def current_theta(self):
        return self.theta


class OracleGradient(Policy):
    """Gradient-descent policy fed the true coefficient instead of an estimate.

    Identical machinery to RegretGradientLinRel but the regret gradient uses
    the true coefficient, so no estimation state or exploration bonus is
    kept.
    """

    name = "oracle_gd"
    oracle = True

    def __init__(
        self,
        theta_star,
        noise_cov,
        rng,
        feature_sampler=None,
        step_size: float = 0.05,
        mc_samples: int = 100,
        fd_step: float = 1e-2,
    ):
        self.theta_star = np.asarray(theta_star, dtype=float).copy()
        self.noise_cov = np.asarray(noise_cov, dtype=float)
        self.feature_sampler = feature_sampler
        self.step_size = step_size
        self.grad_cfg = GradientConfig(mc_noise_samples=mc_samples, fd_step=fd_step)
        theta = rng.standard_normal(self.theta_star.shape[0])
        self.theta = theta / np.linalg.norm(theta)
        self.skipped_gradient_steps = 0

    def select(self, t, x, rng) -> int:
        z = self.feature_sampler(rng, 1)[0] if self.feature_sampler is not None else x
        if self.step_size > 0.0:
            grad = regret_gradient(self.theta, z, self.theta_star, self.noise_cov, self.grad_cfg, rng)
            if np.all(np.isfinite(grad)):
                self.theta = self.theta - self.step_size * grad
            else:
                self.skipped_gradient_steps += 1
                log.warning("skipped non-finite regret gradient at t=%d", t)
        return int(np.argmax(x @ self.theta))

    def current_theta(self):
        return self.theta

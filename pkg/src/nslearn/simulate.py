"""Seeded data generators for the simulation experiments.

Randomness comes from numpy's PCG64 generator. Every experiment stage draws
from its own sub-stream, ``SeedSequence(seed, spawn_key=(stage,))``, so two
scenarios that share a stage (for example the noise of 1a and 1c) see the
same numbers for the same seed. Stage indices:

====  ======================  ==========================================
 id    stage                   used by
====  ======================  ==========================================
 0     ``mean``                component means of 1c, 1d, 1e
 1     ``noise``               standard normal noise of 1a-1e
 2     ``coef_a``              slope matrix A of experiments 2 and 3
 3     ``coef_b``              intercepts b of experiments 2 and 3
 4     ``predictors``          predictor matrix X of experiments 2 and 3
 5     ``error_mean``          log-normal error location
 6     ``error``               log-normal error draws
 7     ``truncated``           rejection sampler
 8     ``c3``                  uncorrelatedness Monte Carlo check
====  ======================  ==========================================

Conventions for under-determined recipe details: the correlated scenarios
use a first-order autoregressive correlation ``rho**|i - j|`` (default
``rho = 0.5``) scaled to variance 4; ``correlation="exchangeable"`` switches to
a constant off-diagonal correlation. ``N(m, v)`` always means mean ``m`` and
variance ``v``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Orientation, Panel
from .exceptions import InvalidCovariance, RejectionTooAggressive

__all__ = [
    "STAGES",
    "SimOutput",
    "C3Report",
    "rng_for",
    "ar1_covariance",
    "exchangeable_covariance",
    "correlated_covariance",
    "sample_mvn",
    "generate_exp1",
    "generate_exp_regression",
    "sample_truncated_mvn",
    "check_c3_uncorrelatedness",
    "EXP1_SCENARIOS",
    "REGRESSION_SCENARIOS",
]

STAGES = {
    "mean": 0,
    "noise": 1,
    "coef_a": 2,
    "coef_b": 3,
    "predictors": 4,
    "error_mean": 5,
    "error": 6,
    "truncated": 7,
    "c3": 8,
}

EXP1_SCENARIOS = ("exp1a", "exp1b", "exp1c", "exp1d", "exp1e")
REGRESSION_SCENARIOS = ("exp2", "exp3")

DEFAULT_D = 100
DEFAULT_N = 1000
DEFAULT_P = 6
DEFAULT_RHO = 0.5
VARIANCE = 4.0


def rng_for(seed, stage):
    """Generator for one named stage of a seeded run."""
    if isinstance(seed, np.random.Generator):
        return seed
    ss = np.random.SeedSequence(int(seed), spawn_key=(STAGES[stage],))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True, eq=False)
class SimOutput:
    """Generated data plus whatever ground truth the scenario defines.

    ``X`` is in the orientation of ``Y`` (``p x n`` for ``"columns"``).
    """

    Y: Panel
    scenario: str
    seed: int | None = None
    X: np.ndarray | None = None
    theta_true: np.ndarray | None = None
    acceptance_rate: float | None = None
    mean_vector: np.ndarray | None = None
    config: dict = field(default_factory=dict)


def ar1_covariance(d, rho=DEFAULT_RHO, variance=VARIANCE):
    """``variance * rho**|i - j|``: first-order autoregressive correlation."""
    if not -1.0 < rho < 1.0:
        raise InvalidCovariance(f"rho={rho} is not a valid AR(1) correlation")
    idx = np.arange(d)
    return variance * float(rho) ** np.abs(idx[:, None] - idx[None, :])


def correlated_covariance(d, rho=DEFAULT_RHO, structure="ar1", variance=VARIANCE):
    if structure == "ar1":
        return ar1_covariance(d, rho, variance)
    if structure == "exchangeable":
        return exchangeable_covariance(d, rho, variance)
    raise ValueError(f"unknown correlation structure {structure!r}")


def exchangeable_covariance(d, rho=DEFAULT_RHO, variance=VARIANCE):
    """``variance * ((1 - rho) I + rho 11^T)``."""
    if not -1.0 / max(d - 1, 1) < rho < 1.0:
        raise InvalidCovariance(f"rho={rho} is not a valid exchangeable correlation for d={d}")
    R = np.full((d, d), float(rho))
    np.fill_diagonal(R, 1.0)
    return variance * R


def _factor(Sigma):
    Sigma = np.asarray(Sigma, dtype=np.float64)
    if Sigma.ndim != 2 or Sigma.shape[0] != Sigma.shape[1]:
        raise InvalidCovariance(f"covariance must be square, got shape {Sigma.shape}")
    if not np.all(np.isfinite(Sigma)):
        raise InvalidCovariance("covariance has non-finite entries")
    if not np.allclose(Sigma, Sigma.T, rtol=1e-12, atol=1e-14):
        raise InvalidCovariance("covariance is not symmetric")
    try:
        return np.linalg.cholesky(Sigma)
    except np.linalg.LinAlgError:
        pass
    # semidefinite: fall back to a symmetric square root
    vals, vecs = np.linalg.eigh(Sigma)
    scale = max(float(np.max(np.abs(vals))), 1.0)
    if vals.min() < -1e-10 * scale:
        raise InvalidCovariance(
            f"covariance is not positive semidefinite (min eigenvalue {vals.min():.3e})"
        )
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def sample_mvn(mu, Sigma, count, seed=0, stage="noise"):
    """``count`` multivariate normal draws, one per row (``count x d``).

    Draws are ``mu + Z L^T`` with ``L`` a Cholesky factor of ``Sigma`` (or a
    symmetric square root when ``Sigma`` is only semidefinite).
    """
    mu = np.asarray(mu, dtype=np.float64).ravel()
    L = _factor(Sigma)
    if L.shape[0] != mu.size:
        raise InvalidCovariance(
            f"covariance is {L.shape[0]}x{L.shape[0]} but mean has length {mu.size}"
        )
    z = rng_for(seed, stage).standard_normal((int(count), mu.size))
    return mu + z @ L.T


def _exp1_gaussian(d, n, seed, varying_mean, rho, correlation):
    if varying_mean:
        mu = rng_for(seed, "mean").normal(1.0, 1.0, size=d)
    else:
        mu = np.ones(d)
    if rho is None:
        Sigma = VARIANCE * np.eye(d)
    else:
        Sigma = correlated_covariance(d, rho, correlation)
    return sample_mvn(mu, Sigma, n, seed, "noise"), mu


def generate_exp1(
    scenario, d=DEFAULT_D, n=DEFAULT_N, seed=0, rho=DEFAULT_RHO, correlation="ar1"
):
    """Climatology-comparison data; ``Y`` is a ``d x n`` ``"columns"`` panel.

    * ``exp1a``: IID ``N(1, 4)``, shifted to a global mean of 1.
    * ``exp1b``: ``exp`` of the 1a data, scaled to a global mean of 1.
    * ``exp1c``: independent, component means drawn from ``N(1, 1)``, variance 4.
    * ``exp1d``: as 1c with correlation ``rho`` (see module docstring).
    * ``exp1e``: ``exp`` of the 1d data, scaled to a global mean of 1.
    """
    scenario = scenario.lower()
    if scenario not in EXP1_SCENARIOS:
        raise ValueError(f"unknown experiment-1 scenario {scenario!r}")
    if d < 2 or n < 2:
        raise ValueError("experiment 1 needs d >= 2 and n >= 2")
    varying = scenario in ("exp1c", "exp1d", "exp1e")
    correlated = scenario in ("exp1d", "exp1e")
    S, mu = _exp1_gaussian(
        d, n, seed, varying, rho if correlated else None, correlation
    )
    if scenario in ("exp1a", "exp1b"):
        S = S + (1.0 - np.mean(S))
    if scenario in ("exp1b", "exp1e"):
        S = np.exp(S)
        S = S / np.mean(S)
    config = {"d": d, "n": n}
    if correlated:
        config.update(rho=rho, correlation=correlation)
    return SimOutput(
        Panel.from_series(S, Orientation.COLUMNS),
        scenario,
        seed,
        mean_vector=mu,
        config=config,
    )


def generate_exp_regression(
    scenario,
    d=DEFAULT_D,
    n=DEFAULT_N,
    p=DEFAULT_P,
    seed=0,
    rho=DEFAULT_RHO,
    correlation="ar1",
    noise=True,
):
    """Linear model with correlated log-normal errors.

    ``Y = A X + b 1^T + E`` with ``a_ij ~ N(0, 0.5)``, ``b_i ~ N(1, 4)``,
    standard normal predictors and ``E = exp(eps)``, where
    ``eps ~ N_d(mu_eps, 4 R)`` (``R`` per ``correlation``) and ``mu_eps ~ N_d(0, 36 I)``.

    ``exp2`` returns a ``d x n`` ``"columns"`` panel with ``X`` of shape
    ``p x n``; ``exp3`` returns the same numbers as an ``n x d`` ``"rows"``
    panel with ``X`` of shape ``n x p``. ``noise=False`` drops ``E``.
    """
    scenario = scenario.lower()
    if scenario not in REGRESSION_SCENARIOS:
        raise ValueError(f"unknown regression scenario {scenario!r}")
    if d < 2 or n < p + 2:
        raise ValueError("regression scenarios need d >= 2 and n >= p + 2")
    A = rng_for(seed, "coef_a").normal(0.0, np.sqrt(0.5), size=(d, p))
    b = rng_for(seed, "coef_b").normal(1.0, np.sqrt(VARIANCE), size=d)
    X = rng_for(seed, "predictors").standard_normal((n, p))
    S = X @ A.T + b
    if noise:
        mu_eps = rng_for(seed, "error_mean").normal(0.0, 6.0, size=d)
        eps = sample_mvn(mu_eps, correlated_covariance(d, rho, correlation), n, seed, "error")
        S = S + np.exp(eps)
    orientation = Orientation.COLUMNS if scenario == "exp2" else Orientation.ROWS
    X_out = X.T.copy() if orientation is Orientation.COLUMNS else X
    return SimOutput(
        Panel.from_series(S, orientation),
        scenario,
        seed,
        X=X_out,
        theta_true=np.hstack([A, b[:, None]]),
        config={
            "d": d,
            "n": n,
            "p": p,
            "rho": rho,
            "correlation": correlation,
            "noise": noise,
        },
    )


def _centered_ss_rows(S):
    return np.sum((np.mean(S, axis=1)[:, None] - S) ** 2, axis=1)


def sample_truncated_mvn(
    mu,
    Sigma,
    delta,
    count,
    seed=0,
    batch_size=4096,
    min_acceptance=1e-4,
    max_batches=100_000,
):
    """Normal draws conditioned on ``||mean(y) 1 - y||^2 >= delta``.

    Rejection sampling in batches of ``batch_size``. The result is a
    ``"columns"`` panel with one draw per column and the observed
    acceptance rate.

    Raises
    ------
    RejectionTooAggressive
        If the first batch accepts less than ``min_acceptance`` of its draws,
        or ``max_batches`` batches do not produce ``count`` draws.
    """
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    mu = np.asarray(mu, dtype=np.float64).ravel()
    L = _factor(Sigma)
    rng = rng_for(seed, "truncated")
    kept = []
    n_kept = n_drawn = 0
    for batch in range(max_batches):
        draws = mu + rng.standard_normal((batch_size, mu.size)) @ L.T
        ok = _centered_ss_rows(draws) >= delta
        kept.append(draws[ok])
        n_kept += int(ok.sum())
        n_drawn += batch_size
        if batch == 0 and n_kept / n_drawn < min_acceptance:
            raise RejectionTooAggressive(
                f"acceptance rate {n_kept / n_drawn:.2e} below floor {min_acceptance:.1e}",
                n_kept / n_drawn,
            )
        if n_kept >= count:
            break
    else:
        raise RejectionTooAggressive(
            f"only {n_kept} of {count} draws accepted after {max_batches} batches",
            n_kept / n_drawn,
        )
    S = np.vstack(kept)[:count]
    return SimOutput(
        Panel.from_series(S, Orientation.COLUMNS),
        "truncated_mvn",
        seed if not isinstance(seed, np.random.Generator) else None,
        acceptance_rate=n_kept / n_drawn,
        mean_vector=mu,
        config={"delta": float(delta), "count": int(count), "batch_size": batch_size},
    )


@dataclass(frozen=True, eq=False)
class C3Report:
    """Monte Carlo covariance between each component of ``y`` and ``w(y)``."""

    covariance: np.ndarray
    z: np.ndarray
    mean_weight: float
    d: int
    n: int
    lognormal: bool

    @property
    def max_abs_z(self):
        return float(np.max(np.abs(self.z)))

    def passes(self, threshold=4.0):
        return bool(self.max_abs_z < threshold)


def check_c3_uncorrelatedness(d=10, n=100_000, seed=0, mu=1.0, sigma=2.0, lognormal=False):
    """Test ``Cov(y_k, w(y)) = 0`` for ``y ~ N(mu 1, sigma^2 I)``.

    The z-statistic of component ``k`` is the sample mean of
    ``(y_k - mean(y_k)) (w - mean(w))`` divided by its standard error.
    With ``lognormal=True`` the same Gaussian draws are exponentiated first,
    which breaks the independence of level and spread.
    """
    if d <= 3:
        raise ValueError(f"the weight has finite mean only for d > 3, got d = {d}")
    Y = mu + sigma * rng_for(seed, "c3").standard_normal((n, d))
    if lognormal:
        Y = np.exp(Y)
    w = 1.0 / _centered_ss_rows(Y)
    prod = (Y - Y.mean(axis=0)) * (w - w.mean())[:, None]
    cov = prod.mean(axis=0)
    se = prod.std(axis=0, ddof=1) / np.sqrt(n)
    return C3Report(cov, cov / se, float(w.mean()), d, n, lognormal)

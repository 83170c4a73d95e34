"""Loss functions, risk functionals, and the Monte Carlo engines.

The engines consume scatter draws chunk by chunk (see sampling) and reduce
per-replicate statistics in a fixed order, so results are identical for
any worker count. All estimators are always evaluated on the same draws:
risk comparisons are paired by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np
from scipy.stats import ks_2samp

from . import sampling
from .core import (
    ContributionRates,
    LossValue,
    SampleDecomposition,
    Spectrum,
    eigh_descending_batch,
)
from .estimators import ShrinkageWeights

__all__ = [
    "RiskEstimate",
    "RiskComparison",
    "BiasSimulation",
    "SteinHaffCheck",
    "InvarianceReport",
    "entropy_loss",
    "quadratic_loss",
    "stein_haff_G",
    "entropy_risk_difference_bound",
    "bias_expansion",
    "estimate_risk",
    "compare_risks",
    "estimate_bias",
    "simulate_bias",
    "simulate_stein_haff",
    "sample_rates",
    "invariance_check",
]

#: Sample-eigenvalue gap (relative to their sum) below which the
#: eigenvalue-difference denominators are considered degenerate.
EIGENGAP_REL_TOL = 1e-12

_MAX_RESCUE_ATTEMPTS = 100


@dataclass(frozen=True)
class RiskEstimate:
    """Monte Carlo mean loss with its standard error."""

    mean_loss: float
    std_error: float
    replicates: int
    loss_kind: str


@dataclass(frozen=True)
class RiskComparison:
    """Paired risks of several estimators on identical draws.

    ``diff_means``/``diff_std_errors`` describe each non-first estimator's
    per-replicate loss minus the first (baseline) estimator's.
    """

    mean_losses: np.ndarray
    std_errors: np.ndarray
    diff_means: np.ndarray
    diff_std_errors: np.ndarray
    replicates: int
    loss_kind: str


@dataclass(frozen=True)
class BiasSimulation:
    """Monte Carlo means of the sample contribution rates per coordinate."""

    mean_rates: np.ndarray
    std_errors: np.ndarray
    replicates: int


@dataclass(frozen=True)
class SteinHaffCheck:
    """Paired comparison of tr(estimate x inverse truth) with its G functional."""

    mean_trace: float
    trace_std_error: float
    mean_g: float
    g_std_error: float
    diff_mean: float
    diff_std_error: float
    redraw_count: int
    replicates: int


@dataclass(frozen=True)
class InvarianceReport:
    """Per-coordinate two-sample KS comparison of contribution rates."""

    statistics: np.ndarray
    p_values: np.ndarray
    alpha: float
    critical_value: float
    replicates: int

    @property
    def accepted(self) -> bool:
        return bool(np.all(self.p_values > self.alpha))


def entropy_loss(estimate: np.ndarray, truth: np.ndarray) -> LossValue:
    """tr(estimate truth^-1) - log det(estimate truth^-1) - p.

    Zero exactly when the estimate equals the truth; both matrices must be
    positive definite.
    """
    est = np.asarray(estimate, dtype=np.float64)
    tru = np.asarray(truth, dtype=np.float64)
    if est.shape != tru.shape or est.ndim != 2 or est.shape[0] != est.shape[1]:
        raise ValueError(f"matrices must be square and same shape, got {est.shape} vs {tru.shape}")
    p = est.shape[0]
    try:
        np.linalg.cholesky(tru)
    except np.linalg.LinAlgError:
        raise ValueError("truth matrix must be positive definite") from None
    try:
        np.linalg.cholesky(est)
    except np.linalg.LinAlgError:
        raise ValueError("estimate matrix must be positive definite") from None
    ratio = np.linalg.solve(tru, est)
    trace = float(np.trace(ratio))
    sign, logdet = np.linalg.slogdet(ratio)
    if sign <= 0:
        raise ValueError("estimate x truth^-1 has non-positive determinant")
    value = trace - logdet - p
    if value < 0.0:
        if value < -1e-10:
            raise ValueError(f"entropy loss evaluated negative ({value:.3e})")
        value = 0.0
    return LossValue(value=value, kind="entropy")


def quadratic_loss(estimate: ContributionRates, truth: ContributionRates) -> LossValue:
    """Sum of squared relative errors of the estimated rates."""
    if estimate.p != truth.p:
        raise ValueError(f"length mismatch: {estimate.p} vs {truth.p}")
    if np.any(truth.rates <= 0.0):
        raise ValueError("truth rates must be strictly positive")
    value = float(np.sum((1.0 - estimate.rates / truth.rates) ** 2))
    return LossValue(value=value, kind="quadratic")


def _check_eigengaps(l: np.ndarray, total: float) -> None:
    gaps = l[:-1] - l[1:]
    if gaps.size and gaps.min() < EIGENGAP_REL_TOL * total:
        raise ValueError(
            "coincident sample eigenvalues (relative gap below "
            f"{EIGENGAP_REL_TOL:.0e}); the eigenvalue-difference denominators vanish"
        )


def stein_haff_G(decomp: SampleDecomposition, weights: ShrinkageWeights, n: int) -> float:
    """Sigma-free functional whose Wishart expectation matches E[tr(estimate Sigma^-1)].

    For the plug-in estimate with weights beta this is
    (sum l)^-1 {2 sum_{i<j} (beta_i - beta_j) l_j / (l_i - l_j)
                + sum_i (n + p + 1 - 2i - 2 d_i) beta_i}.
    """
    if weights.p != decomp.p:
        raise ValueError(f"weight length {weights.p} does not match dimension {decomp.p}")
    l = decomp.eigenvalues
    d = decomp.rates
    beta = weights.beta
    p = l.size
    total = float(l.sum())
    _check_eigengaps(l, total)
    iu, ju = np.triu_indices(p, 1)
    pair = np.sum((beta[iu] - beta[ju]) * l[ju] / (l[iu] - l[ju]))
    i = np.arange(1, p + 1)
    linear = np.sum((n + p + 1.0 - 2 * i - 2 * d) * beta)
    return float((2.0 * pair + linear) / total)


def entropy_risk_difference_bound(
    decomp: SampleDecomposition, weights: ShrinkageWeights, n: int
) -> float:
    """Per-draw integrand of the entropy risk difference versus the classical plug-in.

    Equals G(shrunk) - G(classical) - log prod(beta); non-positive for every
    draw whenever the weights satisfy the three dominance conditions, which
    is the executable content of the dominance proof.
    """
    g_weighted = stein_haff_G(decomp, weights, n)
    ones = ShrinkageWeights(beta=np.ones(decomp.p), dof=weights.dof)
    g_classical = stein_haff_G(decomp, ones, n)
    return g_weighted - g_classical - float(np.sum(np.log(weights.beta)))


def bias_expansion(truth: Spectrum, n: int) -> np.ndarray:
    """First-order approximation of the expected sample contribution rates.

    E(d_i) is the population rate plus n^-1 times
    2 lambda_i (sum lambda_j^2) / T^3 - 2 lambda_i^2 / T^2
    + (lambda_i / T) sum_{j != i} lambda_j / (lambda_i - lambda_j),
    with T the spectrum total. Requires all eigenvalues distinct.
    """
    lam = truth.values
    p = lam.size
    gaps = lam[:-1] - lam[1:]
    if gaps.min() < 1e-12 * lam[0]:
        raise ValueError(
            "bias expansion requires eigenvalues with no multiplicity; "
            "received a spectrum with (nearly) repeated values"
        )
    if n < 1:
        raise ValueError("n must be positive")
    total = lam.sum()
    sumsq = np.sum(lam**2)
    diff = lam[:, None] - lam[None, :]
    np.fill_diagonal(diff, 1.0)
    ratio = lam[None, :] / diff
    np.fill_diagonal(ratio, 0.0)
    coeff = (
        2.0 * lam * sumsq / total**3
        - 2.0 * lam**2 / total**2
        + (lam / total) * ratio.sum(axis=1)
    )
    return lam / total + coeff / n


# ---------------------------------------------------------------------------
# Monte Carlo engines
# ---------------------------------------------------------------------------


def _chunk_plan(replicates: int) -> list[tuple[int, int]]:
    """(chunk_index, rows_used) covering the first ``replicates`` draws."""
    n_chunks = -(-replicates // sampling.CHUNK_SIZE)
    plan = []
    for c in range(n_chunks):
        rows = min(sampling.CHUNK_SIZE, replicates - c * sampling.CHUNK_SIZE)
        plan.append((c, rows))
    return plan


def _mean_se(values: np.ndarray, axis: int = -1) -> tuple[np.ndarray, np.ndarray]:
    mean = values.mean(axis=axis)
    se = values.std(axis=axis, ddof=1) / sqrt(values.shape[axis])
    return mean, se


def _batch_rates(s: np.ndarray, need_vectors: bool) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
    w, v = eigh_descending_batch(s, compute_vectors=need_vectors)
    totals = w.sum(axis=1)
    if np.any(totals <= 0.0):
        raise RuntimeError("sampled scatter matrix with non-positive trace")
    return w, w / totals[:, None], v


def sample_rates(
    spectrum: Spectrum,
    n: int,
    distribution: str,
    replicates: int,
    seed: int,
    jobs: int = 1,
) -> np.ndarray:
    """Sample contribution-rate vectors, shape (replicates, p)."""
    if replicates < 1:
        raise ValueError("replicates must be positive")
    sampling.parse_distribution(distribution)

    def worker(args):
        chunk, rows = args
        s = sampling.scatter_chunk(spectrum, n, distribution, seed, chunk)[:rows]
        _, d, _ = _batch_rates(s, need_vectors=False)
        return d

    plan = _chunk_plan(replicates)
    parts = sampling.map_chunks(lambda c: worker(plan[c]), len(plan), jobs)
    return np.concatenate(parts, axis=0)


def simulate_bias(
    spectrum: Spectrum,
    n: int,
    distribution: str,
    replicates: int,
    seed: int,
    jobs: int = 1,
    control_variate: bool = False,
) -> BiasSimulation:
    """Monte Carlo means and standard errors of the sample rates.

    With ``control_variate`` the first-order fluctuation of each rate (a
    linear function of the scatter diagonal with exactly zero mean under
    Wishart sampling) is subtracted per draw. The mean is unchanged but its
    standard error drops by roughly the factor the expansion remainder needs
    to be resolved at large n. Wishart only: the zero-mean property is the
    Wishart first-moment identity.
    """
    if replicates < 100:
        raise ValueError("bias simulation needs at least 100 replicates")
    if not control_variate:
        d = sample_rates(spectrum, n, distribution, replicates, seed, jobs)
        mean, se = _mean_se(d, axis=0)
        return BiasSimulation(mean_rates=mean, std_errors=se, replicates=replicates)

    kind, _ = sampling.parse_distribution(distribution)
    if kind != "wishart":
        raise ValueError("the control-variate estimator requires Wishart sampling")
    lam = spectrum.values
    total = lam.sum()

    def worker(args):
        chunk, rows = args
        s = sampling.scatter_chunk(spectrum, n, distribution, seed, chunk)[:rows]
        _, d, _ = _batch_rates(s, need_vectors=False)
        delta = np.einsum("rii->ri", s) / n - lam[None, :]
        linear = delta / total - lam[None, :] * delta.sum(axis=1)[:, None] / total**2
        return d - linear

    plan = _chunk_plan(replicates)
    parts = sampling.map_chunks(lambda c: worker(plan[c]), len(plan), jobs)
    z = np.concatenate(parts, axis=0)
    mean, se = _mean_se(z, axis=0)
    return BiasSimulation(mean_rates=mean, std_errors=se, replicates=replicates)


def estimate_bias(
    spectrum: Spectrum,
    n: int,
    distribution: str,
    replicates: int,
    seed: int,
    jobs: int = 1,
) -> np.ndarray:
    """Monte Carlo mean of the sample contribution rates per coordinate."""
    return simulate_bias(spectrum, n, distribution, replicates, seed, jobs).mean_rates


def _entropy_losses(
    d: np.ndarray, v: np.ndarray, betas: np.ndarray, tau: np.ndarray
) -> np.ndarray:
    """Entropy losses of plug-in estimates, shape (n_weights, rows)."""
    p = tau.size
    phi = betas[:, None, :] * d[None, :, :]
    v2 = v * v
    diag = np.einsum("rjk,wrk->wrj", v2, phi)
    trace = np.einsum("wrj,j->wr", diag, 1.0 / tau)
    logdet = np.log(phi).sum(axis=2) - np.log(tau).sum()
    return trace - logdet - p


def _quadratic_losses(d: np.ndarray, betas: np.ndarray, tau: np.ndarray) -> np.ndarray:
    est = betas[:, None, :] * d[None, :, :]
    return ((1.0 - est / tau[None, None, :]) ** 2).sum(axis=2)


def compare_risks(
    spectrum: Spectrum,
    n: int,
    weights_list: list[ShrinkageWeights],
    loss_kind: str,
    distribution: str,
    replicates: int,
    seed: int,
    jobs: int = 1,
) -> RiskComparison:
    """Monte Carlo risks of several estimators on identical (paired) draws.

    The truth is the spectrum normalized to unit trace; entropy losses are
    evaluated on the plug-in covariance estimates, quadratic losses on the
    weighted rates directly. The first weights act as the baseline for the
    paired difference statistics.
    """
    if loss_kind not in ("entropy", "quadratic"):
        raise ValueError(f"unknown loss kind {loss_kind!r}")
    if replicates < 100:
        raise ValueError("risk estimation needs at least 100 replicates")
    if not weights_list:
        raise ValueError("need at least one weight vector")
    p = spectrum.p
    for w in weights_list:
        if w.p != p:
            raise ValueError(f"weight length {w.p} does not match dimension {p}")
    sampling.parse_distribution(distribution)
    betas = np.stack([w.beta for w in weights_list])
    tau = spectrum.values / spectrum.values.sum()
    need_vectors = loss_kind == "entropy"

    def worker(args):
        chunk, rows = args
        s = sampling.scatter_chunk(spectrum, n, distribution, seed, chunk)[:rows]
        _, d, v = _batch_rates(s, need_vectors)
        if loss_kind == "entropy":
            return _entropy_losses(d, v, betas, tau)
        return _quadratic_losses(d, betas, tau)

    plan = _chunk_plan(replicates)
    parts = sampling.map_chunks(lambda c: worker(plan[c]), len(plan), jobs)
    losses = np.concatenate(parts, axis=1)
    means, ses = _mean_se(losses, axis=1)
    diffs = losses[1:] - losses[0]
    if diffs.size:
        diff_means, diff_ses = _mean_se(diffs, axis=1)
    else:
        diff_means = np.empty(0)
        diff_ses = np.empty(0)
    return RiskComparison(
        mean_losses=means,
        std_errors=ses,
        diff_means=diff_means,
        diff_std_errors=diff_ses,
        replicates=replicates,
        loss_kind=loss_kind,
    )


def estimate_risk(
    spectrum: Spectrum,
    n: int,
    weights: ShrinkageWeights,
    loss_kind: str,
    distribution: str,
    replicates: int,
    seed: int,
    jobs: int = 1,
) -> RiskEstimate:
    """Monte Carlo risk of one estimator under the chosen loss."""
    cmp = compare_risks(spectrum, n, [weights], loss_kind, distribution, replicates, seed, jobs)
    return RiskEstimate(
        mean_loss=float(cmp.mean_losses[0]),
        std_error=float(cmp.std_errors[0]),
        replicates=replicates,
        loss_kind=loss_kind,
    )


def _g_batch(l: np.ndarray, d: np.ndarray, beta: np.ndarray, n: int) -> np.ndarray:
    """Vectorized Stein-Haff functional over rows of eigenvalues."""
    rows, p = l.shape
    li = l[:, :, None]
    lj = l[:, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = lj / (li - lj)
    bi = beta[:, None] - beta[None, :]
    iu, ju = np.triu_indices(p, 1)
    pair = np.einsum("rk,k->r", frac[:, iu, ju], bi[iu, ju])
    i = np.arange(1, p + 1)
    linear = ((n + p + 1.0 - 2 * i)[None, :] - 2.0 * d) @ beta
    return (2.0 * pair + linear) / l.sum(axis=1)


def simulate_stein_haff(
    spectrum: Spectrum,
    n: int,
    weights_list: list[ShrinkageWeights],
    replicates: int,
    seed: int,
    jobs: int = 1,
    gap_rel_tol: float = EIGENGAP_REL_TOL,
) -> list[SteinHaffCheck]:
    """Check E[tr(estimate Sigma^-1)] = E[G] empirically under Wishart draws.

    Draws whose sample eigenvalue gaps fall below ``gap_rel_tol`` (relative
    to the eigenvalue sum) are replaced from a dedicated rescue stream; the
    count of replacements is reported. One check per weight vector, all on
    the same draws.
    """
    if replicates < 100:
        raise ValueError("the identity check needs at least 100 replicates")
    p = spectrum.p
    for w in weights_list:
        if w.p != p:
            raise ValueError(f"weight length {w.p} does not match dimension {p}")
    tau = spectrum.values / spectrum.values.sum()
    betas = np.stack([w.beta for w in weights_list])

    def worker(args):
        chunk, rows = args
        s = sampling.scatter_chunk(spectrum, n, "wishart", seed, chunk)[:rows]
        redraws = 0
        l, d, v = _batch_rates(s, need_vectors=True)
        gaps = (l[:, :-1] - l[:, 1:]).min(axis=1) / l.sum(axis=1)
        for row in np.nonzero(gaps < gap_rel_tol)[0]:
            replicate = chunk * sampling.CHUNK_SIZE + int(row)
            for attempt in range(_MAX_RESCUE_ATTEMPTS):
                s[row] = sampling.rescue_scatter(spectrum, n, "wishart", seed, replicate, attempt)
                lr, dr, vr = _batch_rates(s[row : row + 1], need_vectors=True)
                redraws += 1
                gap = (lr[0, :-1] - lr[0, 1:]).min() / lr[0].sum()
                if gap >= gap_rel_tol:
                    l[row], d[row], v[row] = lr[0], dr[0], vr[0]
                    break
            else:
                raise RuntimeError(
                    f"failed to draw a gap-separated scatter matrix for replicate {replicate} "
                    f"within {_MAX_RESCUE_ATTEMPTS} attempts"
                )
        phi = betas[:, None, :] * d[None, :, :]
        diag = np.einsum("rjk,wrk->wrj", v * v, phi)
        trace = np.einsum("wrj,j->wr", diag, 1.0 / tau)
        g = np.stack([_g_batch(l, d, beta, n) for beta in betas])
        return trace, g, redraws

    plan = _chunk_plan(replicates)
    parts = sampling.map_chunks(lambda c: worker(plan[c]), len(plan), jobs)
    trace = np.concatenate([t for t, _, _ in parts], axis=1)
    g = np.concatenate([gg for _, gg, _ in parts], axis=1)
    redraws = sum(r for _, _, r in parts)

    checks = []
    for k in range(len(weights_list)):
        t_mean, t_se = _mean_se(trace[k])
        g_mean, g_se = _mean_se(g[k])
        diff_mean, diff_se = _mean_se(trace[k] - g[k])
        checks.append(
            SteinHaffCheck(
                mean_trace=float(t_mean),
                trace_std_error=float(t_se),
                mean_g=float(g_mean),
                g_std_error=float(g_se),
                diff_mean=float(diff_mean),
                diff_std_error=float(diff_se),
                redraw_count=redraws,
                replicates=replicates,
            )
        )
    return checks


def invariance_check(
    spectrum: Spectrum,
    n: int,
    nu: int,
    replicates: int,
    seed: int,
    jobs: int = 1,
    alpha: float = 0.01,
) -> InvarianceReport:
    """Two-sample KS comparison of rates from Wishart vs elliptical-t draws.

    The two samples come from independent streams under the same seed. The
    rate distribution is the same for every member of the elliptical family,
    so equality should be accepted coordinate by coordinate.
    """
    d_wishart = sample_rates(spectrum, n, "wishart", replicates, seed, jobs)
    d_elliptical = sample_rates(spectrum, n, f"t:{int(nu)}", replicates, seed, jobs)
    stats = np.empty(spectrum.p)
    pvals = np.empty(spectrum.p)
    for i in range(spectrum.p):
        res = ks_2samp(d_wishart[:, i], d_elliptical[:, i])
        stats[i] = res.statistic
        pvals[i] = res.pvalue
    critical = sqrt(-np.log(alpha / 2.0) / 2.0) * sqrt(2.0 / replicates)
    return InvarianceReport(
        statistics=stats,
        p_values=pvals,
        alpha=alpha,
        critical_value=float(critical),
        replicates=replicates,
    )

"""Information- and estimation-theoretic functionals with executable checks.

Closed forms for linear-Gaussian and logistic feature channels (statistical
Fisher information, entropies, mutual information, KL), Monte-Carlo
estimators with standard errors, and numeric verifications of the robustness
identities these quantities satisfy:

  * Phi(T|X) = J(X|T) - J(X)                    (score decomposition)
  * I(X;T) <= H(X) - (p/2) log(2*pi*e*p / (Phi + J(X)))
  * I(X;T) - I(X + sqrt(delta) Z; T) = (delta/2) Phi(T|X) + o(delta)
  * D(p_{T|x+eps*u} || p_{T|x}) <= (eps^2/2) Phi(T|X=x) + o(eps^2)
  * margin-based robustness lower bound for posterior-vote classifiers

Monte-Carlo policy: every estimator returns its standard error and stochastic
comparisons use 3-standard-error bands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import expit

from .errors import DimensionMismatch, NonFinite, ZeroFisher
from .gaussian import GaussianJoint, LinearGaussianEncoder
from .linalg import check_spd, logdet_spd, sym_inv, symmetrize

LOG_2PI_E = math.log(2.0 * math.pi * math.e)


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LogisticEncoder:
    """Binary feature channel P(T=1|X=x) = sigmoid(w^T x), T in {+1, -1}."""

    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float).reshape(-1)
        if not np.all(np.isfinite(w)):
            raise NonFinite("logit weights must be finite")
        object.__setattr__(self, "w", w)

    @property
    def p(self) -> int:
        return self.w.size


@dataclass(frozen=True)
class GaussianDensity:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = check_spd(self.cov, "cov")
        if cov.shape[0] != mean.size:
            raise DimensionMismatch(
                f"mean has dim {mean.size}, cov is {cov.shape}"
            )
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size


@dataclass(frozen=True)
class SampleSet:
    xs: np.ndarray
    ys: np.ndarray | None = None
    seed: int = 0

    def __post_init__(self):
        xs = np.atleast_2d(np.asarray(self.xs, dtype=float))
        if xs.shape[0] < 1:
            raise DimensionMismatch("sample set must be nonempty")
        if not np.all(np.isfinite(xs)):
            raise NonFinite("samples must be finite")
        ys = self.ys
        if ys is not None:
            ys = np.atleast_2d(np.asarray(ys, dtype=float))
            if ys.shape[0] != xs.shape[0]:
                raise DimensionMismatch("xs and ys row counts differ")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def n(self) -> int:
        return self.xs.shape[0]


# ---------------------------------------------------------------------------
# Fisher information closed forms and estimators
# ---------------------------------------------------------------------------


def fisher_linear(encoder: LinearGaussianEncoder) -> float:
    """Phi(T|X) of T = A X + eps with eps ~ N(0, I): the squared Frobenius norm."""
    return float(np.sum(encoder.a * encoder.a))


def fisher_gaussian_channel(m: np.ndarray, noise_cov: np.ndarray) -> float:
    """Phi(T|X) of the general Gaussian channel T = M x + b + xi, xi ~ N(0, S)."""
    m = np.asarray(m, dtype=float)
    return float(np.trace(m.T @ sym_inv(noise_cov) @ m))


def gaussian_channel_mutual_information(
    m: np.ndarray, noise_cov: np.ndarray, sigma_x: np.ndarray
) -> float:
    """I(X;T) of T = M x + b + xi, xi ~ N(0, S), X ~ N(mu, sigma_x)."""
    m = np.asarray(m, dtype=float)
    s_inv = sym_inv(noise_cov)
    return 0.5 * logdet_spd(m @ np.asarray(sigma_x) @ m.T @ s_inv + np.eye(m.shape[0]))


def fisher_logistic(encoder: LogisticEncoder, samples: SampleSet) -> float:
    """Empirical Phi for the binary logistic channel:
    ||w||^2 / n * sum_i sigmoid(w^T x_i) (1 - sigmoid(w^T x_i))."""
    if samples.xs.shape[1] != encoder.p:
        raise DimensionMismatch(
            f"samples have dim {samples.xs.shape[1]}, encoder has {encoder.p}"
        )
    s = expit(samples.xs @ encoder.w)
    return float(np.dot(encoder.w, encoder.w) * np.mean(s * (1.0 - s)))


def fisher_logistic_pointwise(encoder: LogisticEncoder, x: np.ndarray) -> float:
    s = float(expit(np.dot(np.asarray(x, dtype=float), encoder.w)))
    return float(np.dot(encoder.w, encoder.w)) * s * (1.0 - s)


def fisher_mc_estimate(score_fn, sampler, samples: SampleSet, n_inner: int) -> tuple:
    """Double Monte-Carlo estimate of Phi(T|X).

    For each sample point x_i, averages ||score_fn(x, t)||^2 over n_inner
    feature draws t = sampler(x); returns (mean over points, standard error
    of the outer mean).
    """
    if n_inner < 1:
        raise ValueError("n_inner must be >= 1")
    inner_means = np.empty(samples.n)
    for i, x in enumerate(samples.xs):
        acc = 0.0
        for _ in range(n_inner):
            t = sampler(x)
            score = np.asarray(score_fn(x, t), dtype=float)
            if not np.all(np.isfinite(score)):
                raise NonFinite("score function returned non-finite values")
            acc += float(score @ score)
        inner_means[i] = acc / n_inner
    estimate = float(np.mean(inner_means))
    std_error = float(np.std(inner_means, ddof=1) / math.sqrt(samples.n)) if samples.n > 1 else 0.0
    return estimate, std_error


# ---------------------------------------------------------------------------
# Gaussian functionals
# ---------------------------------------------------------------------------


def gaussian_entropy(g: GaussianDensity) -> float:
    """H(X) = d/2 log(2 pi e) + 1/2 log det cov."""
    return 0.5 * g.dim * LOG_2PI_E + 0.5 * logdet_spd(g.cov)


def gaussian_kl(p: GaussianDensity, q: GaussianDensity) -> float:
    """D(p || q) for Gaussian densities, in nats."""
    if p.dim != q.dim:
        raise DimensionMismatch("densities have different dimensions")
    qi = sym_inv(q.cov)
    diff = q.mean - p.mean
    return 0.5 * (
        float(np.trace(qi @ p.cov))
        + float(diff @ qi @ diff)
        - p.dim
        + logdet_spd(q.cov)
        - logdet_spd(p.cov)
    )


def gaussian_fisher_j(g: GaussianDensity) -> float:
    """Information-theorist's Fisher information J(X) = tr(cov^{-1})."""
    return float(np.trace(sym_inv(g.cov)))


# ---------------------------------------------------------------------------
# Robustness lemma checks
# ---------------------------------------------------------------------------


def mutual_information_linear(joint: GaussianJoint, encoder: LinearGaussianEncoder) -> float:
    """I(X;T) for T = A X + eps over the joint's X marginal."""
    a = encoder.a
    if encoder.m == 0:
        return 0.0
    return 0.5 * logdet_spd(a @ joint.sigma_x @ a.T + np.eye(encoder.m))


def check_mi_fisher_bound(joint: GaussianJoint, encoder: LinearGaussianEncoder) -> tuple:
    """Evaluate I(X;T) against the entropic Cramer-Rao style bound
    H(X) - (p/2) log(2 pi e p / (Phi(T|X) + J(X))).  Returns (lhs, rhs, holds).
    """
    p = joint.p
    lhs = mutual_information_linear(joint, encoder)
    h_x = 0.5 * p * LOG_2PI_E + 0.5 * logdet_spd(joint.sigma_x)
    phi = fisher_linear(encoder)
    j_x = float(np.trace(sym_inv(joint.sigma_x)))
    rhs = h_x - 0.5 * p * math.log(2.0 * math.pi * math.e * p / (phi + j_x))
    return lhs, rhs, bool(lhs <= rhs + 1e-9)


def _binary_kl(p: float, q: float) -> float:
    p = min(max(p, 1e-300), 1.0 - 1e-16)
    q = min(max(q, 1e-300), 1.0 - 1e-16)
    return p * math.log(p / q) + (1.0 - p) * math.log((1.0 - p) / (1.0 - q))


def kl_perturbation_shift(encoder, x: np.ndarray, u: np.ndarray, eps: float) -> float:
    """Exact D(p_{T|x+eps*u} || p_{T|x}) for the supported channel families."""
    x = np.asarray(x, dtype=float).reshape(-1)
    u = np.asarray(u, dtype=float).reshape(-1)
    if isinstance(encoder, LinearGaussianEncoder):
        shift = encoder.a @ (eps * u)
        return 0.5 * float(shift @ shift)
    if isinstance(encoder, LogisticEncoder):
        p = float(expit(np.dot(x + eps * u, encoder.w)))
        q = float(expit(np.dot(x, encoder.w)))
        return _binary_kl(p, q)
    raise TypeError(f"unsupported encoder type {type(encoder).__name__}")


def fisher_pointwise(encoder, x: np.ndarray) -> float:
    if isinstance(encoder, LinearGaussianEncoder):
        return fisher_linear(encoder)
    if isinstance(encoder, LogisticEncoder):
        return fisher_logistic_pointwise(encoder, x)
    raise TypeError(f"unsupported encoder type {type(encoder).__name__}")


def directional_fisher(encoder, x: np.ndarray, u: np.ndarray) -> float:
    """Directional quadratic form u^T Phi-matrix(x) u of the score covariance."""
    u = np.asarray(u, dtype=float).reshape(-1)
    if isinstance(encoder, LinearGaussianEncoder):
        au = encoder.a @ u
        return float(au @ au)
    if isinstance(encoder, LogisticEncoder):
        s = float(expit(np.dot(np.asarray(x, dtype=float), encoder.w)))
        return float(np.dot(encoder.w, u)) ** 2 * s * (1.0 - s)
    raise TypeError(f"unsupported encoder type {type(encoder).__name__}")


def kl_perturbation_ratio(encoder, x: np.ndarray, u: np.ndarray, eps: float) -> float:
    """D(p_{T|x+eps*u} || p_{T|x}) / ((eps^2/2) Phi(T|X=x)).

    The numerator's small-eps coefficient is the directional quadratic form,
    which is bounded by Phi(T|X=x); the reported ratio therefore tends to a
    value <= 1.  Use ``directional_fisher`` for the direction-resolved
    denominator.
    """
    u = np.asarray(u, dtype=float).reshape(-1)
    norm = float(np.linalg.norm(u))
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"u must be a unit vector, got norm {norm}")
    if eps <= 0:
        raise ValueError("eps must be positive")
    phi = fisher_pointwise(encoder, x)
    if phi == 0.0:
        raise ZeroFisher("Phi(T|X=x) = 0; perturbation ratio undefined")
    return kl_perturbation_shift(encoder, x, u, eps) / (0.5 * eps * eps * phi)


def mi_noise_sensitivity(
    joint: GaussianJoint, encoder: LinearGaussianEncoder, delta: float
) -> tuple:
    """(I(X;T) - I(X + sqrt(delta) Z; T), (delta/2) Phi(T|X)) in closed form."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    a = encoder.a
    if encoder.m == 0:
        return 0.0, 0.0
    eye = np.eye(encoder.m)
    sx = joint.sigma_x
    i_xt = 0.5 * logdet_spd(a @ sx @ a.T + eye)
    # Cov(T | X + sqrt(delta) Z) = A (Sx - Sx (Sx + delta I)^-1 Sx) A^T + I
    resid = sx - sx @ np.linalg.solve(sx + delta * np.eye(joint.p), sx)
    i_noisy = i_xt - 0.5 * logdet_spd(a @ symmetrize(resid) @ a.T + eye)
    lhs = i_xt - i_noisy
    predicted = 0.5 * delta * fisher_linear(encoder)
    return float(lhs), float(predicted)


# ---------------------------------------------------------------------------
# Margin-based robustness bound
# ---------------------------------------------------------------------------


def _posterior_class_probs(encoder, classifier, x, n_mc, rng) -> dict:
    """Estimate P(g(T) = y | X = x) from n_mc feature draws."""
    counts: dict = {}
    if isinstance(encoder, LinearGaussianEncoder):
        mean = encoder.a @ x
        draws = mean[None, :] + rng.standard_normal((n_mc, encoder.m))
    elif isinstance(encoder, LogisticEncoder):
        p1 = float(expit(np.dot(x, encoder.w)))
        draws = np.where(rng.random(n_mc) < p1, 1.0, -1.0)[:, None]
    else:
        raise TypeError(f"unsupported encoder type {type(encoder).__name__}")
    for t in draws:
        label = classifier(t)
        counts[label] = counts.get(label, 0) + 1
    return {label: c / n_mc for label, c in counts.items()}


def _vote(probs: dict):
    # deterministic tie break: highest probability, then smallest label repr
    return min(probs.items(), key=lambda kv: (-kv[1], repr(kv[0])))[0]


def _margin(probs: dict, label) -> float:
    own = probs.get(label, 0.0)
    other = max((v for k, v in probs.items() if k != label), default=0.0)
    return own - other


def margin_robustness_bound(
    samples: SampleSet,
    classifier,
    encoder,
    eps: float,
    eta: float,
    n_mc: int,
) -> tuple:
    """First-order margin robustness bound for the posterior-vote classifier.

    Estimates P(x in B^eta) with margin threshold sqrt(eta), computes the
    lower bound P(x in B^eta) - eps^2 Phi(T|X) / eta with the o(eps^2)
    remainder dropped (first-order bound), and measures the empirical fraction
    of points whose vote is unchanged under n_mc random perturbations drawn
    uniformly from the eps-ball.
    """
    if eps < 0 or eta <= 0:
        raise ValueError("eps must be >= 0 and eta > 0")
    rng = np.random.default_rng([samples.seed, 2027])
    p = samples.xs.shape[1]
    in_b_eta = 0
    robust = 0
    phi_sum = 0.0
    for x in samples.xs:
        probs = _posterior_class_probs(encoder, classifier, x, n_mc, rng)
        label = _vote(probs)
        if _margin(probs, label) > math.sqrt(eta):
            in_b_eta += 1
        phi_sum += fisher_pointwise(encoder, x)
        unchanged = True
        if eps > 0:
            for _ in range(n_mc):
                direction = rng.standard_normal(p)
                direction /= max(np.linalg.norm(direction), 1e-300)
                radius = eps * rng.random() ** (1.0 / p)
                x_pert = x + radius * direction
                probs_p = _posterior_class_probs(encoder, classifier, x_pert, n_mc, rng)
                if _vote(probs_p) != label:
                    unchanged = False
                    break
        if unchanged:
            robust += 1
    n = samples.n
    phi_avg = phi_sum / n
    lower_bound = in_b_eta / n - eps * eps * phi_avg / eta
    return float(lower_bound), float(robust / n)


# ---------------------------------------------------------------------------
# Fisher identities (score decomposition, chain rule, convexity)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FisherIdentityReport:
    identity_residual: float
    chain_rule_residual: float
    convexity_slack: float

    def rows(self) -> list:
        """CSV rows: (metric, value, std_error, tolerance, pass)."""
        return [
            ("phi_equals_j_gap", self.identity_residual, 0.0, 1e-9, self.identity_residual < 1e-9),
            ("chain_rule_residual", self.chain_rule_residual, 0.0, 1e-12, self.chain_rule_residual < 1e-12),
            ("mixture_convexity_slack", self.convexity_slack, 0.0, 1e-9, self.convexity_slack > -1e-9),
        ]


def _mixture_fisher_1d(means, sigmas, weights) -> float:
    """J of a 1-d Gaussian mixture by adaptive quadrature of (p')^2 / p."""

    def dens_and_deriv(x):
        p = 0.0
        dp = 0.0
        for mu, s, w in zip(means, sigmas, weights):
            z = (x - mu) / s
            phi = w * math.exp(-0.5 * z * z) / (s * math.sqrt(2.0 * math.pi))
            p += phi
            dp += -z / s * phi
        return p, dp

    lo = min(m - 10.0 * s for m, s in zip(means, sigmas))
    hi = max(m + 10.0 * s for m, s in zip(means, sigmas))

    def integrand(x):
        p, dp = dens_and_deriv(x)
        if p <= 0.0:
            return 0.0
        return dp * dp / p

    val, _ = quad(integrand, lo, hi, limit=400)
    return float(val)


def fisher_identity_checks(joint: GaussianJoint, encoder: LinearGaussianEncoder) -> FisherIdentityReport:
    """Verify Phi(T|X) = J(X|T) - J(X), the independent-pair chain rule, and a
    mixture-convexity instance of J, all numerically."""
    a = encoder.a
    sx = joint.sigma_x
    j_x = float(np.trace(sym_inv(sx)))
    if encoder.m == 0:
        cond = sx
    else:
        g = a @ sx @ a.T + np.eye(encoder.m)
        cond = symmetrize(sx - sx @ a.T @ np.linalg.solve(g, a @ sx))
    j_x_given_t = float(np.trace(sym_inv(cond)))
    identity_residual = abs(fisher_linear(encoder) - (j_x_given_t - j_x))

    # chain rule on an independent pair (X1, X2): J(X1,X2) = J(X1) + J(X2)
    s1 = joint.sigma_x
    s2 = joint.sigma_y
    block = np.block(
        [[s1, np.zeros((s1.shape[0], s2.shape[0]))], [np.zeros((s2.shape[0], s1.shape[0])), s2]]
    )
    chain_rule_residual = abs(
        float(np.trace(sym_inv(block))) - (float(np.trace(sym_inv(s1))) + float(np.trace(sym_inv(s2))))
    )

    # convexity: J(alpha p + (1-alpha) q) <= alpha J(p) + (1-alpha) J(q)
    alpha = 0.3
    means, sigmas = (-1.0, 1.5), (0.8, 1.3)
    j_mix = _mixture_fisher_1d(means, sigmas, (alpha, 1.0 - alpha))
    j_convex = alpha / sigmas[0] ** 2 + (1.0 - alpha) / sigmas[1] ** 2
    convexity_slack = j_convex - j_mix

    return FisherIdentityReport(
        identity_residual=identity_residual,
        chain_rule_residual=chain_rule_residual,
        convexity_slack=float(convexity_slack),
    )


def report_rows_to_csv(rows) -> str:
    """Serialize (metric, value, std_error, tolerance, pass) rows."""
    lines = ["metric,value,std_error,tolerance,pass"]
    for name, value, se, tol, ok in rows:
        lines.append(
            f"{name},{format(float(value), '.17g')},{format(float(se), '.17g')},"
            f"{format(float(tol), '.17g')},{int(bool(ok))}"
        )
    return "\n".join(lines) + "\n"

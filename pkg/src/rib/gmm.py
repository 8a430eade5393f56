"""Two-class Gaussian-mixture robustness laboratory.

The data model: labels Y = +1/-1 with equal probability, X | Y = y drawn from
N(y * (1,1), diag(sigma1_sq, sigma2_sq)).  Linear probes T = w^T X + xi with
xi ~ N(0,1) have class-conditional law N(+-mu_w, sigma_w^2) where
mu_w = w1 + w2 and sigma_w^2 = w1^2 s1^2 + w2^2 s2^2 + 1.

The minimum mean squared error of predicting Y from T reduces to the scalar
function f(mu_w / sigma_w) with

    f(a) = E_{Z ~ N(a^2, a^2)} 8 / (1 + exp(2 Z))^2,

so minimizing mmse + Fisher penalty over probes of norm at most R is the
norm-constrained problem  max_w mu_w / sigma_w  s.t. ||w||_2 <= R, attained
on the sphere ||w||_2 = R.

Worst-case-perturbation accuracy of the deterministic classifier sign(w^T x)
under a per-coordinate budget eps (worst case over the eps cube, equivalently
the dual-norm shift eps * ||w||_1):

    accuracy = P{ Z >= (eps ||w||_1 - mu_w) / sqrt(w^T Sigma w) }.

The formula depends on w only through its direction.  The radius sweeps use
the feature-noise-inclusive variant (denominator sigma_w, i.e. the stochastic
classifier sign(w^T x + xi)); that is the version for which accuracy tends to
1/2 as R -> 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, ndtr

from .errors import ZeroProbe
from .gaussian import golden_section_minimize

GRID_POINTS = 2048
ANGLE_TOL = 1e-10


@dataclass(frozen=True)
class TwoClassGmm:
    """Symmetric two-component mixture with means +-(1,1) and diagonal variances."""

    sigma1_sq: float
    sigma2_sq: float

    def __post_init__(self):
        if self.sigma1_sq <= 0 or self.sigma2_sq <= 0:
            raise ValueError("variances must be positive")

    @property
    def sigma(self) -> np.ndarray:
        return np.diag([self.sigma1_sq, self.sigma2_sq])

    def sample(self, n: int, rng: np.random.Generator) -> tuple:
        """Draw (xs, ys) with ys in {+1, -1}."""
        ys = np.where(rng.random(n) < 0.5, 1.0, -1.0)
        std = np.sqrt([self.sigma1_sq, self.sigma2_sq])
        xs = ys[:, None] * np.ones(2) + rng.standard_normal((n, 2)) * std
        return xs, ys


@dataclass(frozen=True)
class LinearProbe:
    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float).reshape(-1)
        if w.size != 2 or not np.all(np.isfinite(w)):
            raise ValueError("probe weights must be a finite 2-vector")
        object.__setattr__(self, "w", w)

    def mu_w(self) -> float:
        return float(self.w[0] + self.w[1])

    def sigma_w_sq(self, gmm: TwoClassGmm) -> float:
        return float(self.w[0] ** 2 * gmm.sigma1_sq + self.w[1] ** 2 * gmm.sigma2_sq + 1.0)

    @property
    def angle_deg(self) -> float:
        return math.degrees(math.atan2(self.w[1], self.w[0]))


def mmse_scalar_f(a: float, n_mc: int = 1_000_000, seed: int = 0) -> tuple:
    """Monte-Carlo estimate of f(a) = E_{Z~N(a^2,a^2)} 8/(1+e^{2Z})^2.

    At a = 0 the degenerate normal is the point mass at 0 and f(0) = 2
    exactly.  Returns (value, standard error).
    """
    if a < 0:
        raise ValueError("a must be nonnegative")
    if n_mc < 1:
        raise ValueError("n_mc must be >= 1")
    if a == 0.0:
        return 2.0, 0.0
    rng = np.random.default_rng([seed, 61])
    z = a * a + a * rng.standard_normal(n_mc)
    vals = 8.0 * expit(-2.0 * z) ** 2
    return float(np.mean(vals)), float(np.std(vals, ddof=1) / math.sqrt(n_mc))


def _snr(theta: float, gmm: TwoClassGmm, radius: float) -> float:
    w1 = radius * math.cos(theta)
    w2 = radius * math.sin(theta)
    mu = w1 + w2
    sig = math.sqrt(w1 * w1 * gmm.sigma1_sq + w2 * w2 * gmm.sigma2_sq + 1.0)
    return mu / sig


def optimal_probe(gmm: TwoClassGmm, radius: float) -> LinearProbe:
    """Maximize mu_w / sigma_w over the sphere ||w||_2 = radius.

    The direction is found over theta in (-pi/2, pi/2] by a coarse grid that
    brackets the maximum followed by golden-section refinement to 1e-10 rad;
    the optimum always has mu_w >= 0.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    grid = np.linspace(-math.pi / 2, math.pi / 2, GRID_POINTS)
    vals = np.array([_snr(t, gmm, radius) for t in grid])
    i = int(np.argmax(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, GRID_POINTS - 1)]
    theta = golden_section_minimize(lambda t: -_snr(t, gmm, radius), lo, hi, tol=ANGLE_TOL)
    return LinearProbe(np.array([radius * math.cos(theta), radius * math.sin(theta)]))


def adversarial_accuracy(
    probe: LinearProbe,
    gmm: TwoClassGmm,
    eps: float,
    dual_norm: str = "l1",
    include_feature_noise: bool = False,
) -> float:
    """Closed-form accuracy under the worst-case perturbation shift.

    ``dual_norm="l1"`` evaluates the shift eps*||w||_1 (worst case over the
    eps cube); ``"l2"`` evaluates eps*||w||_2 (worst case over the eps ball).
    With ``include_feature_noise`` the denominator is sigma_w (stochastic
    classifier sign(w^T x + xi)); otherwise sqrt(w^T Sigma w) (deterministic
    sign(w^T x)).
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    w = probe.w
    if np.all(w == 0.0):
        raise ZeroProbe("probe weights are identically zero")
    if dual_norm == "l1":
        shift = eps * float(np.abs(w).sum())
    elif dual_norm == "l2":
        shift = eps * float(np.linalg.norm(w))
    else:
        raise ValueError(f"unknown dual_norm {dual_norm!r}")
    var = float(w @ gmm.sigma @ w)
    if include_feature_noise:
        var += 1.0
    z_arg = (shift - probe.mu_w()) / math.sqrt(var)
    return float(ndtr(-z_arg))


def mc_adversarial_accuracy(
    probe: LinearProbe,
    gmm: TwoClassGmm,
    eps: float,
    n_mc: int,
    seed: int,
    dual_norm: str = "l1",
    include_feature_noise: bool = False,
) -> tuple:
    """Monte-Carlo accuracy of the worst-case-shifted classifier; returns
    (estimate, standard error)."""
    rng = np.random.default_rng([seed, 67])
    xs, ys = gmm.sample(n_mc, rng)
    scores = xs @ probe.w
    if include_feature_noise:
        scores = scores + rng.standard_normal(n_mc)
    if dual_norm == "l1":
        shift = eps * float(np.abs(probe.w).sum())
    else:
        shift = eps * float(np.linalg.norm(probe.w))
    correct = np.where(ys > 0, scores - shift > 0, scores + shift < 0)
    acc = float(np.mean(correct))
    se = math.sqrt(max(acc * (1.0 - acc), 1e-12) / n_mc)
    return acc, se


@dataclass(frozen=True)
class SweepTable:
    header: tuple
    rows: tuple

    def to_csv(self) -> str:
        lines = [",".join(self.header)]
        for row in self.rows:
            lines.append(",".join(format(float(v), ".10g") for v in row))
        return "\n".join(lines) + "\n"


def sweep_angle(
    gmm: TwoClassGmm,
    eps_list,
    n_angles: int,
    radius: float = 1.0,
    dual_norm: str = "l1",
) -> SweepTable:
    """Accuracy of sign(w^T x) as a function of the probe angle, per eps."""
    eps_list = list(eps_list)
    if not eps_list or n_angles < 2:
        raise ValueError("eps_list must be nonempty and n_angles >= 2")
    header = ("angle_deg",) + tuple(f"eps_{format(float(e), 'g')}" for e in eps_list)
    rows = []
    for angle in np.linspace(0.0, 180.0, n_angles, endpoint=False):
        theta = math.radians(angle)
        probe = LinearProbe(np.array([radius * math.cos(theta), radius * math.sin(theta)]))
        row = (angle,) + tuple(
            adversarial_accuracy(probe, gmm, e, dual_norm=dual_norm) for e in eps_list
        )
        rows.append(row)
    return SweepTable(header=header, rows=tuple(rows))


def sweep_radius(
    gmm: TwoClassGmm,
    eps_list,
    radii,
    dual_norm: str = "l1",
) -> SweepTable:
    """Accuracy of the norm-constrained optimal probe as a function of R.

    Uses the feature-noise-inclusive accuracy so that R -> 0 drives every
    column to 1/2.
    """
    eps_list = list(eps_list)
    radii = list(radii)
    if not eps_list or not radii:
        raise ValueError("eps_list and radii must be nonempty")
    header = ("radius",) + tuple(f"eps_{format(float(e), 'g')}" for e in eps_list)
    rows = []
    for r in radii:
        probe = optimal_probe(gmm, float(r))
        row = (float(r),) + tuple(
            adversarial_accuracy(
                probe, gmm, e, dual_norm=dual_norm, include_feature_noise=True
            )
            for e in eps_list
        )
        rows.append(row)
    return SweepTable(header=header, rows=tuple(rows))

"""Closed-form robust feature extractors for jointly Gaussian (X, Y).

Features are linear-Gaussian channels T = A X + eps with eps ~ N(0, I).  For
such channels the robustness functional (statistical Fisher information of T
given X) is exactly ||A||_F^2, and the three bottleneck objectives admit
closed forms:

  mmse form     mmse(Y|T) + beta * ||A||_F^2
  ib form       -I(T;Y) + gamma * I(T;X) + beta * ||A||_F^2
  mutual form   -I(T;Y) + beta * ||A||_F^2          (ib form at gamma = 0)

``solve_mmse_identity`` and ``solve_ib_identity`` require Sigma_x to be a
scalar multiple of the identity; ``solve_mutual_fisher`` handles general
Sigma_x for sufficiently small beta; ``solve_mmse_surrogate`` minimizes a
trace-product upper bound of the mmse objective for general Sigma_x.

``brute_force_minimize`` is the numeric verification oracle: multi-restart
gradient descent with central-difference gradients on the same evaluators,
kept deliberately independent of the closed-form constructions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    BetaTooLarge,
    DegenerateObjective,
    DimensionMismatch,
    NonFinite,
    NotIdentityCovariance,
    RankDeficient,
)
from .linalg import (
    EIG_FLOOR_REL,
    as_matrix,
    check_spd,
    logdet_spd,
    sym_inv,
    sym_inv_sqrt,
    symmetrize,
)
from .parallel import thread_map

IDENTITY_RTOL = 1e-10
D_MIN = 1e-9
GOLDEN_TOL = 1e-12


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


class Formulation(Enum):
    MMSE = "mmse"
    IB = "ib"
    MUTUAL_FISHER = "mutual_fisher"


@dataclass(frozen=True)
class GaussianJoint:
    """Covariance blocks of a jointly Gaussian pair (X, Y).

    Invariants enforced at construction: sigma_x symmetric positive definite,
    the conditional covariance Cov(Y|X) positive definite, and the full joint
    covariance positive semidefinite.
    """

    sigma_x: np.ndarray
    sigma_y: np.ndarray
    sigma_xy: np.ndarray

    def __post_init__(self):
        sx = check_spd(self.sigma_x, "sigma_x")
        sy = check_spd(self.sigma_y, "sigma_y")
        sxy = as_matrix(self.sigma_xy, "sigma_xy")
        if sxy.shape != (sx.shape[0], sy.shape[0]):
            raise DimensionMismatch(
                f"sigma_xy shape {sxy.shape} inconsistent with "
                f"p={sx.shape[0]}, k={sy.shape[0]}"
            )
        cond = symmetrize(sy - sxy.T @ sym_inv(sx) @ sxy)
        if np.linalg.eigvalsh(cond)[0] <= 0:
            raise DimensionMismatch("Cov(Y|X) is not positive definite")
        joint = np.block([[sx, sxy], [sxy.T, sy]])
        if np.linalg.eigvalsh(symmetrize(joint))[0] < -1e-9 * np.abs(joint).max():
            raise DimensionMismatch("full joint covariance is not PSD")
        object.__setattr__(self, "sigma_x", sx)
        object.__setattr__(self, "sigma_y", sy)
        object.__setattr__(self, "sigma_xy", sxy)

    @property
    def p(self) -> int:
        return self.sigma_x.shape[0]

    @property
    def k(self) -> int:
        return self.sigma_y.shape[0]

    def cond_cov_y_given_x(self) -> np.ndarray:
        return symmetrize(self.sigma_y - self.sigma_xy.T @ sym_inv(self.sigma_x) @ self.sigma_xy)

    def cond_cov_x_given_y(self) -> np.ndarray:
        return symmetrize(self.sigma_x - self.sigma_xy @ sym_inv(self.sigma_y) @ self.sigma_xy.T)


@dataclass(frozen=True)
class LinearGaussianEncoder:
    """Feature map A of the channel T = A X + eps, eps ~ N(0, I_m).

    The m = 0 (empty) map is allowed and represents dropping every feature.
    """

    a: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.a, dtype=float)
        if m.ndim != 2:
            raise DimensionMismatch(f"encoder matrix must be 2-d, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise NonFinite("encoder matrix has non-finite entries")
        object.__setattr__(self, "a", m)

    @property
    def m(self) -> int:
        return self.a.shape[0]

    @property
    def p(self) -> int:
        return self.a.shape[1]


@dataclass(frozen=True)
class RibConfig:
    beta: float
    gamma: float = 0.0
    formulation: Formulation = Formulation.MMSE

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        if self.formulation is Formulation.MUTUAL_FISHER and self.gamma != 0.0:
            raise ValueError("mutual_fisher formulation forces gamma = 0")


@dataclass(frozen=True)
class RibSolution:
    """Solver output: encoder, its objective value and the spectrum used.

    ``spectrum`` pairs each eigen/singular value driving the solution with its
    scaling d_i; ``active_dims`` counts nonzero rows of the encoder.  Under
    eigenvalue ties the encoder is not unique; the objective value is the
    contractual quantity.
    """

    encoder: LinearGaussianEncoder
    objective_value: float
    spectrum: tuple = field(default_factory=tuple)
    active_dims: int = 0
    surrogate: bool = False


# ---------------------------------------------------------------------------
# Objective evaluators
# ---------------------------------------------------------------------------


def _check_encoder_joint(joint: GaussianJoint, encoder: LinearGaussianEncoder):
    if encoder.p != joint.p:
        raise DimensionMismatch(
            f"encoder has p={encoder.p}, joint has p={joint.p}"
        )


def eval_mmse_objective(joint: GaussianJoint, encoder: LinearGaussianEncoder, beta: float) -> float:
    """mmse(Y|T) + beta * ||A||_F^2 via Gaussian conditioning.

    mmse(Y|T) = tr(Sigma_y - Sigma_yx A^T (A Sigma_x A^T + I)^{-1} A Sigma_xy).
    """
    _check_encoder_joint(joint, encoder)
    a = encoder.a
    trace_y = float(np.trace(joint.sigma_y))
    if encoder.m == 0:
        return trace_y
    g = a @ joint.sigma_x @ a.T + np.eye(encoder.m)
    m = a @ joint.sigma_xy
    explained = float(np.sum(m * np.linalg.solve(g, m)))
    return trace_y - explained + float(beta) * float(np.sum(a * a))


def eval_ib_objective(
    joint: GaussianJoint,
    encoder: LinearGaussianEncoder,
    beta: float,
    gamma: float,
) -> float:
    """-I(T;Y) + gamma * I(T;X) + beta * ||A||_F^2 via Gaussian log-dets."""
    _check_encoder_joint(joint, encoder)
    a = encoder.a
    if encoder.m == 0:
        return 0.0
    eye = np.eye(encoder.m)
    i_tx = 0.5 * logdet_spd(a @ joint.sigma_x @ a.T + eye)
    cond = joint.cond_cov_x_given_y()
    i_ty = i_tx - 0.5 * logdet_spd(a @ cond @ a.T + eye)
    return -i_ty + float(gamma) * i_tx + float(beta) * float(np.sum(a * a))


def _eval_batch_mmse(a_stack: np.ndarray, joint: GaussianJoint, beta: float) -> np.ndarray:
    m = a_stack.shape[1]
    g = a_stack @ joint.sigma_x @ np.swapaxes(a_stack, 1, 2) + np.eye(m)
    mm = a_stack @ joint.sigma_xy
    explained = np.einsum("nij,nij->n", mm, np.linalg.solve(g, mm))
    fisher = np.einsum("nij,nij->n", a_stack, a_stack)
    return float(np.trace(joint.sigma_y)) - explained + beta * fisher


def _eval_batch_ib(
    a_stack: np.ndarray, joint: GaussianJoint, beta: float, gamma: float
) -> np.ndarray:
    m = a_stack.shape[1]
    eye = np.eye(m)
    at = np.swapaxes(a_stack, 1, 2)
    _, ld_tx = np.linalg.slogdet(a_stack @ joint.sigma_x @ at + eye)
    cond = joint.cond_cov_x_given_y()
    _, ld_cond = np.linalg.slogdet(a_stack @ cond @ at + eye)
    i_tx = 0.5 * ld_tx
    i_ty = i_tx - 0.5 * ld_cond
    fisher = np.einsum("nij,nij->n", a_stack, a_stack)
    return -i_ty + gamma * i_tx + beta * fisher


def make_batch_evaluator(joint: GaussianJoint, config: RibConfig):
    """Vectorized objective over a stack of encoder matrices (n, m, p)."""
    if config.formulation is Formulation.MMSE:
        return lambda stack: _eval_batch_mmse(stack, joint, config.beta)
    if config.formulation is Formulation.IB:
        return lambda stack: _eval_batch_ib(stack, joint, config.beta, config.gamma)
    return lambda stack: _eval_batch_ib(stack, joint, config.beta, 0.0)


def eval_objective(joint: GaussianJoint, encoder: LinearGaussianEncoder, config: RibConfig) -> float:
    if config.formulation is Formulation.MMSE:
        return eval_mmse_objective(joint, encoder, config.beta)
    if config.formulation is Formulation.IB:
        return eval_ib_objective(joint, encoder, config.beta, config.gamma)
    return eval_ib_objective(joint, encoder, config.beta, 0.0)


# ---------------------------------------------------------------------------
# Scalar minimization for the ib form
# ---------------------------------------------------------------------------

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0


def golden_section_minimize(f, lo: float, hi: float, tol: float = GOLDEN_TOL) -> float:
    """Golden-section search for the minimum of a unimodal f on [lo, hi]."""
    a, b = float(lo), float(hi)
    h = b - a
    if h <= tol:
        return 0.5 * (a + b)
    n = int(math.ceil(math.log(tol / h) / math.log(_INV_PHI)))
    c = a + _INV_PHI_SQ * h
    d = a + _INV_PHI * h
    yc, yd = f(c), f(d)
    for _ in range(n - 1):
        if yc < yd:
            b, d, yd = d, c, yc
            h *= _INV_PHI
            c = a + _INV_PHI_SQ * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h *= _INV_PHI
            d = a + _INV_PHI * h
            yd = f(d)
    return 0.5 * (a + b)


def _minimize_univariate_scaling(ell: float, sigma_x_sq: float, beta: float, gamma: float) -> float:
    """Minimize 0.5*log(sx^2 d / ell + 1) - (gamma/2) log d + beta/(sx^2 d) on [D_MIN, 1].

    A coarse geometric grid brackets the global minimum before golden-section
    refinement, so multimodal shapes cannot trap the search.  Hitting the
    clamped lower bound D_MIN means the objective is degenerate (only possible
    at beta = 0) and raises.
    """

    def f(d):
        return (
            0.5 * math.log(sigma_x_sq * d / ell + 1.0)
            - 0.5 * gamma * math.log(d)
            + beta / (sigma_x_sq * d)
        )

    grid = np.geomspace(D_MIN, 1.0, 2048)
    vals = (
        0.5 * np.log(sigma_x_sq * grid / ell + 1.0)
        - 0.5 * gamma * np.log(grid)
        + beta / (sigma_x_sq * grid)
    )
    i = int(np.argmin(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]
    d_star = golden_section_minimize(f, lo, hi)
    if f(1.0) <= f(d_star):
        d_star = 1.0
    if d_star <= D_MIN * (1.0 + 1e-6):
        raise DegenerateObjective(
            "scalar minimizer collapsed onto the clamped lower bound d_min"
        )
    return float(d_star)


# ---------------------------------------------------------------------------
# Closed-form solvers
# ---------------------------------------------------------------------------


def identity_scale(joint: GaussianJoint) -> float:
    """Return sx^2 when sigma_x = sx^2 * I within IDENTITY_RTOL, else raise."""
    sx = joint.sigma_x
    scale = float(np.mean(np.diag(sx)))
    if scale <= 0:
        raise NotIdentityCovariance("sigma_x has nonpositive mean diagonal")
    dev = np.abs(sx - scale * np.eye(joint.p)).max() / scale
    if dev > IDENTITY_RTOL:
        raise NotIdentityCovariance(
            f"sigma_x deviates from a multiple of identity by relative {dev:.3e}"
        )
    return scale


def is_identity_covariance(joint: GaussianJoint) -> bool:
    try:
        identity_scale(joint)
        return True
    except NotIdentityCovariance:
        return False


def _assemble(rows: list, p: int) -> np.ndarray:
    if rows:
        return np.vstack(rows)
    return np.zeros((0, p))


def solve_mmse_identity(joint: GaussianJoint, beta: float) -> RibSolution:
    """Optimal mmse-form features for sigma_x = sx^2 * I.

    Directions are the unit eigenvectors of Sigma_xy Sigma_yx; each direction
    with eigenvalue lam gets scale d = sqrt(lam/beta) - 1 when lam >= beta and
    is dropped otherwise.  A = (1/sx) D^{1/2} U^T.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    sx_sq = identity_scale(joint)
    sx = math.sqrt(sx_sq)
    gram = symmetrize(joint.sigma_xy @ joint.sigma_xy.T)
    vals, vecs = np.linalg.eigh(gram)
    order = np.argsort(vals)[::-1][: min(joint.p, joint.k)]
    spectrum = []
    rows = []
    for idx in order:
        lam = max(float(vals[idx]), 0.0)
        d = math.sqrt(lam / beta) - 1.0 if lam >= beta else 0.0
        spectrum.append((lam, d))
        if d > 0.0:
            rows.append(math.sqrt(d) / sx * vecs[:, idx])
    a = _assemble(rows, joint.p)
    encoder = LinearGaussianEncoder(a)
    return RibSolution(
        encoder=encoder,
        objective_value=eval_mmse_objective(joint, encoder, beta),
        spectrum=tuple(spectrum),
        active_dims=len(rows),
    )


def solve_ib_identity(joint: GaussianJoint, beta: float, gamma: float) -> RibSolution:
    """Optimal ib-form features for sigma_x = sx^2 * I.

    With B = Cov(Y|X)^{-1/2} Sigma_yx Sigma_x^{-1} and singular values s_i,
    each direction carries ell_i = 1/s_i^2 and a scale d_i from the univariate
    problem; the feature row is sqrt(1/d_i - 1)/sx times the right singular
    vector.  Rows with d_i = 1 are dropped.
    """
    if beta <= 0 or gamma <= 0:
        raise ValueError("beta and gamma must be positive")
    sx_sq = identity_scale(joint)
    sx = math.sqrt(sx_sq)
    cond_sqrt_inv = sym_inv_sqrt(joint.cond_cov_y_given_x())
    b = cond_sqrt_inv @ joint.sigma_xy.T @ sym_inv(joint.sigma_x)
    _, svals, vt = np.linalg.svd(b, full_matrices=False)
    floor = EIG_FLOOR_REL * max(float(svals[0]), 0.0) if svals.size else 0.0
    keep = svals > floor
    svals = svals[keep]
    w = vt[keep].T  # columns are right singular vectors, s descending
    # ell sorted decreasing corresponds to singular values sorted increasing
    order = np.argsort(svals)
    spectrum = []
    rows = []
    for idx in order:
        ell = 1.0 / float(svals[idx]) ** 2
        d = _minimize_univariate_scaling(ell, sx_sq, beta, gamma)
        spectrum.append((ell, d))
        if 1.0 - d > 1e-12:
            rows.append(math.sqrt(1.0 / d - 1.0) / sx * w[:, idx])
    # strongest feature first (smallest d)
    pairs = sorted(zip(spectrum, rows if rows else []), key=lambda t: t[0][1]) if rows else []
    if rows:
        spectrum_kept = [s for s, _ in pairs]
        rows = [r for _, r in pairs]
        dropped = [s for s in spectrum if s not in spectrum_kept]
        spectrum = spectrum_kept + dropped
    a = _assemble(rows, joint.p)
    encoder = LinearGaussianEncoder(a)
    return RibSolution(
        encoder=encoder,
        objective_value=eval_ib_objective(joint, encoder, beta, gamma),
        spectrum=tuple(spectrum),
        active_dims=len(rows),
    )


def solve_mutual_fisher(joint: GaussianJoint, beta: float) -> RibSolution:
    """Mutual-information-form features (gamma = 0) for small beta.

    Validity is checked at runtime as J - I >= -1e-10 on the assembled
    spectrum, raising BetaTooLarge otherwise.  The construction satisfies the
    full optimality conditions when sigma_x^{-1} preserves the column space of
    C (in particular whenever sigma_x is a multiple of the identity); for
    other inputs it solves the projected stationarity system and its objective
    upper-bounds the optimum.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    svals_xy = np.linalg.svd(joint.sigma_xy, compute_uv=False)
    if (
        joint.sigma_xy.shape[1] > joint.sigma_xy.shape[0]
        or svals_xy.size < joint.k
        or svals_xy[-1] <= EIG_FLOOR_REL * max(float(svals_xy[0]), 0.0)
    ):
        raise RankDeficient("sigma_xy must have full column rank")
    sx_inv_sqrt = sym_inv_sqrt(joint.sigma_x)
    cond_sqrt_inv = sym_inv_sqrt(joint.cond_cov_y_given_x())
    c = sx_inv_sqrt @ joint.sigma_xy @ cond_sqrt_inv  # p x k
    w, lam, vt = np.linalg.svd(c, full_matrices=False)
    v = vt.T
    m = symmetrize(np.linalg.inv(c.T @ sym_inv(joint.sigma_x) @ c))
    dvals, u = np.linalg.eigh(m)
    # stationarity of 0.5*logdet(I + C^T H^-1 C) + beta tr(Sigma_x^-1 H):
    #   d_tilde^-2 + d_tilde^-1 = d / (2 beta)
    dt = beta * (1.0 + np.sqrt(1.0 + 2.0 * dvals / beta)) / dvals
    core = np.diag(lam) @ v.T @ u @ np.diag(1.0 / dt) @ u.T @ v @ np.diag(lam)
    j_minus_i = symmetrize(core) - np.eye(joint.k)
    gvals, s = np.linalg.eigh(j_minus_i)
    if gvals[0] < -1e-10:
        raise BetaTooLarge(
            f"J - I has eigenvalue {gvals[0]:.3e}; beta={beta} is too large "
            "for this joint"
        )
    gvals = np.maximum(gvals, 0.0)
    order = np.argsort(gvals)[::-1]
    rows = []
    spectrum = []
    wt_sx = w.T @ sx_inv_sqrt
    for idx in order:
        g = float(gvals[idx])
        spectrum.append((float(dvals[idx]) if idx < dvals.size else float("nan"), g))
        if g > 0.0:
            rows.append(math.sqrt(g) * (s[:, idx] @ wt_sx))
    a = _assemble(rows, joint.p)
    encoder = LinearGaussianEncoder(a)
    return RibSolution(
        encoder=encoder,
        objective_value=eval_ib_objective(joint, encoder, beta, 0.0),
        spectrum=tuple(spectrum),
        active_dims=len(rows),
    )


def solve_mmse_surrogate(joint: GaussianJoint, beta: float) -> RibSolution:
    """Trace-product surrogate of the mmse form for general sigma_x.

    Directions are eigenvectors of Sigma_x^{-1/2} Sigma_xy Sigma_yx
    Sigma_x^{-1/2}; the Fisher cross-term is upper-bounded with the sharp
    constant 1/lambda_min(Sigma_x), which reduces to the exact multiplier when
    Sigma_x is a multiple of identity, so the surrogate then coincides with
    solve_mmse_identity.  For general Sigma_x the result is an upper bound,
    flagged ``surrogate=True``.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    sx_inv_sqrt = sym_inv_sqrt(joint.sigma_x)
    gram = symmetrize(sx_inv_sqrt @ joint.sigma_xy @ joint.sigma_xy.T @ sx_inv_sqrt)
    vals, vecs = np.linalg.eigh(gram)
    penalty = beta / float(np.linalg.eigvalsh(joint.sigma_x)[0])
    order = np.argsort(vals)[::-1][: min(joint.p, joint.k)]
    spectrum = []
    rows = []
    for idx in order:
        lam = max(float(vals[idx]), 0.0)
        d = math.sqrt(lam / penalty) - 1.0 if lam >= penalty else 0.0
        spectrum.append((lam, d))
        if d > 0.0:
            rows.append(math.sqrt(d) * (vecs[:, idx] @ sx_inv_sqrt))
    a = _assemble(rows, joint.p)
    encoder = LinearGaussianEncoder(a)
    return RibSolution(
        encoder=encoder,
        objective_value=eval_mmse_objective(joint, encoder, beta),
        spectrum=tuple(spectrum),
        active_dims=len(rows),
        surrogate=not is_identity_covariance(joint),
    )


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------

_RESTART_SCALES = (0.5, 0.1, 1.0, 2.0)


def _descend(
    a0: np.ndarray,
    batch_eval,
    max_iters: int,
    grad_tol: float,
) -> tuple:
    """Gradient descent with central-difference gradients and a step-halving
    line search.  Returns (best matrix, best value)."""
    shape = a0.shape
    n = a0.size
    theta = a0.ravel().copy()
    f_cur = float(batch_eval(theta.reshape(1, *shape))[0])
    if not np.isfinite(f_cur):
        raise NonFinite("objective non-finite at the initial point")
    step0 = 1.0
    stall = 0
    for _ in range(max_iters):
        h = 1e-6 * (1.0 + np.abs(theta))
        pert = np.repeat(theta[None, :], 2 * n, axis=0)
        idx = np.arange(n)
        pert[idx, idx] += h
        pert[idx + n, idx] -= h
        vals = batch_eval(pert.reshape(2 * n, *shape))
        if not np.all(np.isfinite(vals)):
            raise NonFinite("objective diverged during gradient evaluation")
        grad = (vals[:n] - vals[n:]) / (2.0 * h)
        gnorm = float(np.abs(grad).max())
        if gnorm <= grad_tol * (1.0 + abs(f_cur)):
            break
        steps = step0 * 0.5 ** np.arange(36)
        cands = theta[None, :] - steps[:, None] * grad[None, :]
        cvals = batch_eval(cands.reshape(-1, *shape))
        finite = np.isfinite(cvals)
        cvals = np.where(finite, cvals, np.inf)
        j = int(np.argmin(cvals))
        if cvals[j] >= f_cur:
            break
        improvement = f_cur - float(cvals[j])
        theta = cands[j]
        f_cur = float(cvals[j])
        step0 = min(4.0 * steps[j], 64.0)
        if improvement <= 1e-14 * (1.0 + abs(f_cur)):
            stall += 1
            if stall >= 3:
                break
        else:
            stall = 0
    return theta.reshape(shape), f_cur


def brute_force_minimize(
    joint: GaussianJoint,
    config: RibConfig,
    feature_dim: int,
    restarts: int,
    seed: int,
    max_iters: int = 400,
) -> RibSolution:
    """Multi-restart numeric minimization of the configured objective.

    Deterministic given ``seed``: restart r draws its start from
    default_rng([seed, r]) and the best objective is selected in restart
    order, so results do not depend on how restarts are scheduled.
    """
    if feature_dim < 1:
        raise ValueError("feature_dim must be >= 1")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    batch_eval = make_batch_evaluator(joint, config)

    def run(r: int):
        rng = np.random.default_rng([seed, r])
        scale = _RESTART_SCALES[r % len(_RESTART_SCALES)]
        a0 = scale * rng.standard_normal((feature_dim, joint.p))
        return _descend(a0, batch_eval, max_iters=max_iters, grad_tol=1e-10)

    results = thread_map(run, range(restarts))
    best_a, best_f = results[0]
    for a, f in results[1:]:
        if f < best_f:
            best_a, best_f = a, f
    encoder = LinearGaussianEncoder(best_a)
    svals = np.linalg.svd(best_a, compute_uv=False) if best_a.size else np.zeros(0)
    row_norms = np.linalg.norm(best_a, axis=1) if best_a.size else np.zeros(0)
    return RibSolution(
        encoder=encoder,
        objective_value=float(best_f),
        spectrum=tuple((float(s) ** 2, float(s)) for s in svals),
        active_dims=int(np.sum(row_norms > 1e-9)),
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def solution_to_text(solution: RibSolution, joint: GaussianJoint, config: RibConfig) -> str:
    """Render a solution as a key-value header plus the row-major matrix."""
    fmt = lambda x: format(float(x), ".17g")
    lines = [
        f"p {joint.p}",
        f"k {joint.k}",
        f"beta {fmt(config.beta)}",
        f"gamma {fmt(config.gamma)}",
        f"formulation {config.formulation.value}",
        f"objective_value {fmt(solution.objective_value)}",
        "",
    ]
    for row in solution.encoder.a:
        lines.append(" ".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def solution_from_text(text: str) -> tuple:
    """Parse the output of ``solution_to_text``; returns (header dict, matrix)."""
    header = {}
    rows = []
    in_matrix = False
    for line in text.splitlines():
        if not line.strip():
            in_matrix = True
            continue
        if in_matrix:
            rows.append([float(v) for v in line.split()])
        else:
            key, value = line.split(maxsplit=1)
            header[key] = value
    p = int(header["p"])
    matrix = np.array(rows, dtype=float).reshape(len(rows), p) if rows else np.zeros((0, p))
    return header, matrix


# ---------------------------------------------------------------------------
# Random instances for verification harnesses
# ---------------------------------------------------------------------------


def random_joint(rng: np.random.Generator, p: int, k: int, identity_x: bool = False) -> GaussianJoint:
    """Draw a valid random joint by sampling a full (p+k) covariance."""
    for _ in range(64):
        root = rng.standard_normal((p + k, p + k + 2))
        full = root @ root.T / (p + k + 2)
        if identity_x:
            sx_scale = float(np.exp(rng.uniform(-0.5, 0.5)))
            sx = sx_scale * np.eye(p)
            # scale the cross block to keep the joint PSD
            cross = full[:p, p:]
            sy = full[p:, p:]
            shrink = 0.5 * math.sqrt(sx_scale / max(np.linalg.eigvalsh(full[:p, :p])[-1], 1e-12))
            cross = shrink * cross
        else:
            sx = full[:p, :p]
            sy = full[p:, p:]
            cross = full[:p, p:]
        try:
            return GaussianJoint(sigma_x=sx, sigma_y=sy, sigma_xy=cross)
        except Exception:
            continue
    raise RuntimeError("failed to draw a valid random joint")

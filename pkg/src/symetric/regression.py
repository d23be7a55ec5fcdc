"""Learning the map F from latent space to ground-truth phase space.

Two families, both exposing analytic Jacobians:

  * PolynomialMap -- Lasso-regularised linear regression over a polynomial
    expansion of the (standardized) latent state, fit by cyclic coordinate
    descent with soft thresholding, alpha chosen per output dimension by
    k-fold cross validation. Expansion order grows progressively up to a
    bound kappa.
  * MlpMap -- a small tanh MLP (4 hidden layers of 4 units by default)
    trained with adaptive-moment gradient descent, L1-penalised weights.

Latent inputs and truth targets are standardized once at fit time and the
same affine maps are applied at every evaluation, so Jacobians carry the
1/scale_in and scale_out factors explicitly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np

from .errors import (
    DataRequirementError,
    DimensionError,
    ExpansionTooLargeError,
    ValidationError,
)

DEFAULT_ALPHAS = (1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2)
DEFAULT_MAX_ITER = 1000
DEFAULT_CD_TOL = 1e-6
MAX_FEATURES = 1_000_000
JACOBIAN_PRUNE = 1e-3

POLYNOMIAL = "polynomial"
MLP = "mlp"


# ---------------------------------------------------------------------------
# Polynomial features
# ---------------------------------------------------------------------------

def feature_count(dim: int, order: int) -> int:
    return math.comb(dim + order, order) - 1


def monomial_exponents(dim: int, order: int) -> np.ndarray:
    """Exponent rows for all monomials of total degree 1..order (no bias),
    ascending degree, lexicographic within a degree."""
    if order < 1:
        raise ValidationError(f"order must be >= 1, got {order}")
    if dim < 1:
        raise DimensionError(f"dim must be >= 1, got {dim}")
    total = feature_count(dim, order)
    if total > MAX_FEATURES:
        raise ExpansionTooLargeError(
            f"expansion of dim {dim} at order {order} would produce {total} features"
            f" (limit {MAX_FEATURES}); filter latent dimensions first"
        )
    rows = []
    for degree in range(1, order + 1):
        for combo in combinations_with_replacement(range(dim), degree):
            rows.append(np.bincount(combo, minlength=dim))
    return np.array(rows, dtype=np.int64)


def polynomial_features(x, exponents) -> np.ndarray:
    """Evaluate monomials at rows of x; x is (N, dim) or a single point."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != exponents.shape[1]:
        raise DimensionError(
            f"points have dim {x.shape[1]}, exponents expect {exponents.shape[1]}"
        )
    return np.prod(x[:, None, :] ** exponents[None, :, :], axis=2)


def _monomial_jacobian(x, exponents) -> np.ndarray:
    """d(monomials)/dx at a single point, shape (n_features, dim)."""
    x = np.asarray(x, dtype=np.float64)
    n_feat, dim = exponents.shape
    out = np.zeros((n_feat, dim))
    for d in range(dim):
        e = exponents[:, d]
        active = e > 0
        if not active.any():
            continue
        dropped = exponents[active].copy()
        dropped[:, d] -= 1
        out[active, d] = e[active] * np.prod(x[None, :] ** dropped, axis=1)
    return out


# ---------------------------------------------------------------------------
# Lasso by cyclic coordinate descent with soft thresholding
# ---------------------------------------------------------------------------

def _soft_threshold(rho, alpha):
    return np.sign(rho) * max(abs(rho) - alpha, 0.0)


def _cd_lasso_gram(gram, xty, alpha, max_iter, tol, beta0=None):
    """Minimise 1/(2N) ||y - X beta||^2 + alpha ||beta||_1 on standardized
    columns (diag(gram) == 1) via cyclic coordinate descent on the Gram form."""
    d = gram.shape[0]
    beta = np.zeros(d) if beta0 is None else beta0.copy()
    gb = gram @ beta
    for _ in range(max_iter):
        max_delta = 0.0
        for j in range(d):
            rho = xty[j] - gb[j] + beta[j]
            new = _soft_threshold(rho, alpha)
            delta = new - beta[j]
            if delta != 0.0:
                gb += gram[:, j] * delta
                beta[j] = new
                max_delta = max(max_delta, abs(delta))
        if max_delta < tol:
            break
    return beta


def _dead_scale(mean, scale):
    # exactly-constant columns keep std ~1e-16 of their mean from rounding
    return scale <= 1e-12 * (np.abs(mean) + 1.0)


def _standardize_columns(x):
    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    live = ~_dead_scale(mean, scale)
    if not live.all():
        warnings.warn(
            f"excluding {int((~live).sum())} zero-variance feature column(s) from the fit",
            stacklevel=3,
        )
    safe = np.where(live, scale, 1.0)
    return (x - mean) / safe, mean, safe, live


def _fold_labels(n_rows, folds, groups):
    if groups is None:
        groups = np.arange(n_rows)
    groups = np.asarray(groups)
    if groups.shape != (n_rows,):
        raise ValidationError("groups must assign one label per row")
    uniq = np.unique(groups)
    if uniq.size < folds:
        raise ValidationError(f"need at least {folds} distinct groups, got {uniq.size}")
    # contiguous chunks of group ids -> fold label per row
    chunks = np.array_split(uniq, folds)
    lab = np.empty(n_rows, dtype=np.int64)
    for f, chunk in enumerate(chunks):
        lab[np.isin(groups, chunk)] = f
    return lab


def lasso_fit(
    x,
    y,
    alphas=DEFAULT_ALPHAS,
    folds: int = 2,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_CD_TOL,
    groups=None,
):
    """Per-output Lasso with alpha selected by k-fold cross validation.

    Features are standardized internally (zero-variance columns excluded with
    a warning) and targets centered; returned (coef, intercept, chosen_alphas)
    are in the units of the inputs as given. Convergence is declared when the
    largest coefficient change in a sweep drops below `tol`.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
    if x.shape[0] != y.shape[0]:
        raise DimensionError(f"{x.shape[0]} feature rows vs {y.shape[0]} target rows")
    alphas = [float(a) for a in alphas]
    if not alphas:
        raise ValidationError("need at least one alpha")

    xs, x_mean, x_scale, live = _standardize_columns(x)
    xs = xs[:, live]
    y_mean = y.mean(axis=0)
    yc = y - y_mean
    n, d = xs.shape
    n_out = y.shape[1]

    chosen = np.empty(n_out)
    if len(alphas) > 1:
        lab = _fold_labels(n, folds, groups)
        val_mse = np.zeros((len(alphas), n_out))
        for f in range(folds):
            tr, va = lab != f, lab == f
            gram = xs[tr].T @ xs[tr] / tr.sum()
            xty = xs[tr].T @ yc[tr] / tr.sum()
            for ai, alpha in enumerate(alphas):
                for out in range(n_out):
                    beta = _cd_lasso_gram(gram, xty[:, out], alpha, max_iter, tol)
                    resid = yc[va][:, out] - xs[va] @ beta
                    val_mse[ai, out] += np.mean(resid ** 2) / folds
        for out in range(n_out):
            chosen[out] = alphas[int(np.argmin(val_mse[:, out]))]
    else:
        chosen[:] = alphas[0]

    gram = xs.T @ xs / n
    xty = xs.T @ yc / n
    beta_std = np.zeros((d, n_out))
    for out in range(n_out):
        beta_std[:, out] = _cd_lasso_gram(gram, xty[:, out], chosen[out], max_iter, tol)

    coef = np.zeros((x.shape[1], n_out))
    coef[live] = beta_std / x_scale[live][:, None]
    intercept = y_mean - x_mean @ coef
    return coef, intercept, chosen


# ---------------------------------------------------------------------------
# Learned maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolynomialMap:
    """F(S) = unstd_out(coef^T monomials(std_in(S)) + intercept)."""

    exponents: np.ndarray        # (n_features, in_dim)
    coef: np.ndarray             # (n_features, out_dim)
    intercept: np.ndarray        # (out_dim,)
    in_mean: np.ndarray
    in_scale: np.ndarray
    out_mean: np.ndarray
    out_scale: np.ndarray
    order: int = 1
    form = POLYNOMIAL

    @property
    def input_dim(self) -> int:
        return self.exponents.shape[1]

    @property
    def output_dim(self) -> int:
        return self.coef.shape[1]

    def _std_in(self, s):
        return (np.asarray(s, dtype=np.float64) - self.in_mean) / self.in_scale

    def predict(self, s) -> np.ndarray:
        s = np.atleast_2d(np.asarray(s, dtype=np.float64))
        feats = polynomial_features(self._std_in(s), self.exponents)
        return (feats @ self.coef + self.intercept) * self.out_scale + self.out_mean

    def jacobian(self, point, prune_below: float = JACOBIAN_PRUNE) -> np.ndarray:
        point = np.asarray(point, dtype=np.float64).reshape(-1)
        if point.size != self.input_dim:
            raise DimensionError(f"point dim {point.size} != input dim {self.input_dim}")
        coef = self.coef
        if prune_below and prune_below > 0.0:
            coef = np.where(np.abs(coef) < prune_below, 0.0, coef)
        dmono = _monomial_jacobian(self._std_in(point), self.exponents)
        jac_std = coef.T @ dmono  # (out, in) in standardized coords
        return jac_std * (self.out_scale[:, None] / self.in_scale[None, :])

    @staticmethod
    def identity(dim: int) -> "PolynomialMap":
        return PolynomialMap.linear(np.eye(dim))

    @staticmethod
    def linear(matrix) -> "PolynomialMap":
        """Exact linear map F(S) = M S as an order-1 polynomial map."""
        matrix = np.asarray(matrix, dtype=np.float64)
        out_dim, in_dim = matrix.shape
        return PolynomialMap(
            exponents=monomial_exponents(in_dim, 1),
            coef=matrix.T.copy(),
            intercept=np.zeros(out_dim),
            in_mean=np.zeros(in_dim),
            in_scale=np.ones(in_dim),
            out_mean=np.zeros(out_dim),
            out_scale=np.ones(out_dim),
            order=1,
        )

    @staticmethod
    def from_coefficients(exponents, coef, intercept=None) -> "PolynomialMap":
        """Exact map in raw units (no standardization)."""
        exponents = np.asarray(exponents, dtype=np.int64)
        coef = np.asarray(coef, dtype=np.float64)
        out_dim, in_dim = coef.shape[1], exponents.shape[1]
        return PolynomialMap(
            exponents=exponents,
            coef=coef,
            intercept=np.zeros(out_dim) if intercept is None else np.asarray(intercept, float),
            in_mean=np.zeros(in_dim),
            in_scale=np.ones(in_dim),
            out_mean=np.zeros(out_dim),
            out_scale=np.ones(out_dim),
            order=int(exponents.sum(axis=1).max()),
        )


def _standardize_pair(latent, truth):
    in_mean, in_scale = latent.mean(axis=0), latent.std(axis=0)
    out_mean, out_scale = truth.mean(axis=0), truth.std(axis=0)
    in_scale = np.where(_dead_scale(in_mean, in_scale), 1.0, in_scale)
    out_scale = np.where(_dead_scale(out_mean, out_scale), 1.0, out_scale)
    return in_mean, in_scale, out_mean, out_scale


def fit_polynomial_map(
    latent,
    truth,
    order: int,
    alphas=DEFAULT_ALPHAS,
    folds: int = 2,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_CD_TOL,
    groups=None,
) -> PolynomialMap:
    latent = np.asarray(latent, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    in_mean, in_scale, out_mean, out_scale = _standardize_pair(latent, truth)
    xs = (latent - in_mean) / in_scale
    ys = (truth - out_mean) / out_scale
    exponents = monomial_exponents(latent.shape[1], order)
    feats = polynomial_features(xs, exponents)
    coef, intercept, _ = lasso_fit(
        feats, ys, alphas=alphas, folds=folds, max_iter=max_iter, tol=tol, groups=groups
    )
    return PolynomialMap(
        exponents=exponents,
        coef=coef,
        intercept=intercept,
        in_mean=in_mean,
        in_scale=in_scale,
        out_mean=out_mean,
        out_scale=out_scale,
        order=order,
    )


DEFAULT_STOP_R2 = 0.999


def progressive_polynomial_fit(
    data,
    kappa: int = 5,
    stop_r2: float = DEFAULT_STOP_R2,
    alphas=DEFAULT_ALPHAS,
    folds: int = 2,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_CD_TOL,
):
    """Fit expansion orders 1, 2, ... on a LatentTrajectorySet, stopping at
    the first order whose training fit reaches R^2 > stop_r2, else returning
    the best (map, R^2) found by order kappa.

    Cross-validation folds are contiguous halves by trajectory, never by
    timestep, so fold membership does not leak trajectory identity.
    """
    from .metrics import r_squared

    if kappa < 1:
        raise ValidationError(f"kappa must be >= 1, got {kappa}")
    k, length = data.latent.shape[:2]
    latent = data.latent.reshape(k * length, data.latent_dim)
    truth = data.truth.reshape(k * length, data.truth_dim)
    groups = np.repeat(np.arange(k), length)

    best = None
    for order in range(1, kappa + 1):
        fitted = fit_polynomial_map(
            latent, truth, order, alphas=alphas, folds=folds,
            max_iter=max_iter, tol=tol, groups=groups,
        )
        r2 = r_squared(fitted.predict(latent), truth)
        if best is None or r2 > best[1]:
            best = (fitted, r2)
        if r2 > stop_r2:
            return fitted, r2
    return best


# ---------------------------------------------------------------------------
# MLP map
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MlpConfig:
    hidden_layers: int = 4
    hidden_units: int = 4
    learning_rate: float = 1.5e-3
    l1: float = 0.01
    steps: int = 10_000
    batch_size: int = 64
    data_ratio: float = 1000.0
    allow_undersized: bool = False
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass(frozen=True)
class MlpMap:
    """F(S) = unstd_out(W_L tanh(... tanh(W_1 std_in(S) + b_1) ...) + b_L)."""

    weights: tuple                # layer matrices, each (fan_out, fan_in)
    biases: tuple
    in_mean: np.ndarray
    in_scale: np.ndarray
    out_mean: np.ndarray
    out_scale: np.ndarray
    form = MLP

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[0]

    def _forward(self, xs):
        a = xs
        pre = []
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            z = a @ w.T + b
            pre.append(z)
            a = np.tanh(z)
        return pre, a @ self.weights[-1].T + self.biases[-1]

    def predict(self, s) -> np.ndarray:
        s = np.atleast_2d(np.asarray(s, dtype=np.float64))
        xs = (s - self.in_mean) / self.in_scale
        _, out = self._forward(xs)
        return out * self.out_scale + self.out_mean

    def jacobian(self, point) -> np.ndarray:
        point = np.asarray(point, dtype=np.float64).reshape(-1)
        if point.size != self.input_dim:
            raise DimensionError(f"point dim {point.size} != input dim {self.input_dim}")
        xs = (point - self.in_mean) / self.in_scale
        jac = np.diag(1.0 / self.in_scale)
        a = xs
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            z = a @ w.T + b
            jac = (w * (1.0 - np.tanh(z) ** 2)[:, None]) @ jac
            a = np.tanh(z)
        jac = self.weights[-1] @ jac
        return jac * self.out_scale[:, None]


def count_mlp_parameters(in_dim, out_dim, config: MlpConfig = MlpConfig()) -> int:
    sizes = [in_dim] + [config.hidden_units] * config.hidden_layers + [out_dim]
    return sum(sizes[i + 1] * sizes[i] + sizes[i + 1] for i in range(len(sizes) - 1))


def mlp_fit(latent, truth, config: MlpConfig = MlpConfig()) -> MlpMap:
    """Train the MLP form of F with adaptive-moment gradient descent on
    MSE + l1 * sum|W|; deterministic for a fixed config.seed.

    Requires at least data_ratio x parameter-count samples unless
    allow_undersized is set, in which case a warning is emitted.
    """
    latent = np.asarray(latent, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    n = latent.shape[0]
    n_params = count_mlp_parameters(latent.shape[1], truth.shape[1], config)
    required = int(config.data_ratio * n_params)
    if n < required:
        if not config.allow_undersized:
            raise DataRequirementError(
                f"MLP with {n_params} parameters needs {required} datapoints"
                f" (ratio {config.data_ratio}), got {n}; pass allow_undersized to override"
            )
        warnings.warn(
            f"fitting MLP on {n} datapoints, below the {required} required"
            f" by the {config.data_ratio}x rule", stacklevel=2,
        )

    in_mean, in_scale, out_mean, out_scale = _standardize_pair(latent, truth)
    xs = (latent - in_mean) / in_scale
    ys = (truth - out_mean) / out_scale

    rng = np.random.default_rng(config.seed)
    sizes = [latent.shape[1]] + [config.hidden_units] * config.hidden_layers + [truth.shape[1]]
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(rng.uniform(-bound, bound, size=fan_out))

    m_w = [np.zeros_like(w) for w in weights]
    v_w = [np.zeros_like(w) for w in weights]
    m_b = [np.zeros_like(b) for b in biases]
    v_b = [np.zeros_like(b) for b in biases]

    n_layers = len(weights)
    # L1 on the mean absolute weight; a raw sum at lambda = 0.01 overwhelms
    # the per-weight data gradients and collapses the deeper layers
    n_weights = sum(w.size for w in weights)
    l1_pull = config.l1 / n_weights
    for step in range(1, config.steps + 1):
        idx = rng.integers(0, n, size=min(config.batch_size, n))
        x, y = xs[idx], ys[idx]

        acts = [x]
        pre = []
        a = x
        for li in range(n_layers - 1):
            z = a @ weights[li].T + biases[li]
            pre.append(z)
            a = np.tanh(z)
            acts.append(a)
        out = a @ weights[-1].T + biases[-1]

        # d MSE / d out, MSE averaged over batch and output dims
        delta = 2.0 * (out - y) / out.size
        g_w = [None] * n_layers
        g_b = [None] * n_layers
        g_w[-1] = delta.T @ acts[-1] + l1_pull * np.sign(weights[-1])
        g_b[-1] = delta.sum(axis=0)
        back = delta @ weights[-1]
        for li in range(n_layers - 2, -1, -1):
            back = back * (1.0 - np.tanh(pre[li]) ** 2)
            g_w[li] = back.T @ acts[li] + l1_pull * np.sign(weights[li])
            g_b[li] = back.sum(axis=0)
            if li > 0:
                back = back @ weights[li]

        b1c = 1.0 - config.beta1 ** step
        b2c = 1.0 - config.beta2 ** step
        for li in range(n_layers):
            m_w[li] = config.beta1 * m_w[li] + (1.0 - config.beta1) * g_w[li]
            v_w[li] = config.beta2 * v_w[li] + (1.0 - config.beta2) * g_w[li] ** 2
            weights[li] -= config.learning_rate * (m_w[li] / b1c) / (np.sqrt(v_w[li] / b2c) + config.eps)
            m_b[li] = config.beta1 * m_b[li] + (1.0 - config.beta1) * g_b[li]
            v_b[li] = config.beta2 * v_b[li] + (1.0 - config.beta2) * g_b[li] ** 2
            biases[li] -= config.learning_rate * (m_b[li] / b1c) / (np.sqrt(v_b[li] / b2c) + config.eps)

    return MlpMap(
        weights=tuple(w.copy() for w in weights),
        biases=tuple(b.copy() for b in biases),
        in_mean=in_mean,
        in_scale=in_scale,
        out_mean=out_mean,
        out_scale=out_scale,
    )

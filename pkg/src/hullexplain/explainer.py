"""Feature-based dual explanation of a black-box regressor.

Local mode: take the K nearest training neighbors of the explained point,
append the point itself, reduce to the extreme points of that set, sample
combination weights uniformly on the simplex, query the black box at the
mapped points (all of which lie inside the neighbor hull, so no
out-of-domain queries ever happen), fit a no-intercept linear model in
simplex coordinates, and map its coefficients back to feature space.
Global mode runs the same pipeline over the whole dataset with no
explained point appended.

The simplex-to-feature map back-solves b_i = g(x*_i) as an affine fit:
coefficients against the centered extreme points plus a compensating
intercept. Solving it without the intercept would fold the black box's
local constant level into the coefficients along the hull-center
direction (for a neighborhood centered at c the shift is roughly
f_const * c / ||c||^2), which swamps the gradient signal whenever the
data sits far from the origin. Centering removes that term exactly and
reproduces the coefficients of a linear black box bit-for-bit.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InvalidInputError, UniformFallbackWarning
from .geometry import Polytope, as_points, as_vector, find_extreme_points
from .sampling import SimplexSampler, map_to_primal
from .surrogate import LinearModel, fit_linear, recover_primal


@dataclass
class DualConfig:
    # ridge 0: minimum-norm least squares already handles degenerate fits,
    # and a 1e-8 penalty costs ~5e-6 per coefficient on unit-box data
    K: int = 10
    n_lambda: int = 30
    tol: float = 1e-6
    ridge: float = 0.0
    seed: int = 0
    stream: int = 0

    def validate(self):
        if self.K < 1:
            raise ConfigError("K must be >= 1")
        if self.n_lambda < 2:
            raise ConfigError("n_lambda must be >= 2")
        if self.tol <= 0:
            raise ConfigError("tol must be positive")
        if self.ridge < 0:
            raise ConfigError("ridge must be nonnegative")


@dataclass
class DualExplanation:
    a: np.ndarray                 # feature-space coefficients (the explanation)
    b: np.ndarray                 # simplex-space coefficients, one per extreme
    intercept: float              # affine offset of the recovered surrogate
    poly: Polytope
    lambdas: np.ndarray           # (n_lambda, d) sampled weights
    z: np.ndarray                 # black-box values at the mapped points
    diagnostics: dict = field(default_factory=dict)

    @property
    def model(self) -> LinearModel:
        """The recovered feature-space surrogate g(x) = a . x + intercept."""
        return LinearModel(coefficients=self.a, intercept=self.intercept)


def _train_matrix(train) -> np.ndarray:
    x = getattr(train, "x", train)
    return as_points(x, "train")


def _affine_recovery(b, extremes, ridge):
    """Slope and intercept of the affine least-squares solve of g(x*_i) = b_i.

    Among all minimizers, the intercept is kept as small as possible: when
    the extremes span a hyperplane u . x = 1 exactly (one-hot vertices, a
    single repeated point), the constant is representable as a pure slope
    and gets folded back so the result matches the plain no-intercept
    solve. On a full-dimensional hull the minimizer is unique and the
    intercept simply carries the black box's local level.
    """
    center = extremes.mean(axis=0)
    b_bar = float(b.mean())
    a = recover_primal(b - b_bar, extremes - center, ridge=ridge)
    a0 = b_bar - float(a @ center)
    ones = np.ones(extremes.shape[0])
    u, *_ = np.linalg.lstsq(extremes, ones, rcond=None)
    if np.linalg.norm(extremes @ u - ones) <= 1e-8 * np.sqrt(extremes.shape[0]):
        a = a + a0 * u
        a0 = 0.0
    return a, a0


def _run_pipeline(points: np.ndarray, x0_row: int | None, predictor, cfg: DualConfig):
    poly = find_extreme_points(points, cfg.tol)
    d = poly.d
    if cfg.n_lambda < d:
        raise ConfigError(
            f"n_lambda = {cfg.n_lambda} is less than the {d} extreme points; "
            "the dual fit would be underdetermined"
        )
    contains_x0 = None
    if x0_row is not None:
        contains_x0 = x0_row not in set(poly.extreme_indices.tolist())
        poly.contains_x0 = contains_x0

    sampler = SimplexSampler(d=d, seed=cfg.seed, stream_id=cfg.stream)
    lam = sampler.draw(cfg.n_lambda)
    primal = map_to_primal(lam, poly.extremes)
    z = predictor.predict(primal)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        dual_model = fit_linear(lam, z, ridge=cfg.ridge, with_intercept=False)
        b = dual_model.coefficients
        a, a0 = _affine_recovery(b, poly.extremes, cfg.ridge)
    rank_notes = [str(w.message) for w in caught]
    for w in caught:
        warnings.warn_explicit(
            w.message, w.category, w.filename, w.lineno
        )

    resid = z - lam @ b
    diagnostics = {
        "d": d,
        "contains_x0": contains_x0,
        "fit_residual_rms": float(np.sqrt(np.mean(resid**2))),
        "rank_warnings": rank_notes,
    }
    return DualExplanation(
        a=a, b=b, intercept=a0, poly=poly, lambdas=lam, z=z, diagnostics=diagnostics
    )


def explain_local(x0, train, predictor, cfg: DualConfig) -> DualExplanation:
    """Explain the prediction at x0 from its K-neighbor hull."""
    cfg.validate()
    X = _train_matrix(train)
    x0v = as_vector(x0, "x0", dim=X.shape[1])
    if X.shape[0] < cfg.K:
        raise InvalidInputError(
            f"training set has {X.shape[0]} rows, fewer than K = {cfg.K}"
        )
    delta = X - x0v
    d2 = np.einsum("ij,ij->i", delta, delta)
    # stable sort: exact distance ties resolve to the lowest training index
    neighbors = np.argsort(d2, kind="stable")[: cfg.K]
    points = np.vstack([X[neighbors], x0v[None, :]])
    return _run_pipeline(points, x0_row=cfg.K, predictor=predictor, cfg=cfg)


def explain_global(train, predictor, cfg: DualConfig) -> DualExplanation:
    """One explanation over the hull of the entire dataset."""
    cfg.validate()
    X = _train_matrix(train)
    return _run_pipeline(X, x0_row=None, predictor=predictor, cfg=cfg)


def feature_importance(expl: DualExplanation, mode: str = "signed") -> np.ndarray:
    """signed: the raw coefficients; normalized: |a_i| / sum |a_j|."""
    if mode == "signed":
        return expl.a.copy()
    if mode != "normalized":
        raise InvalidInputError(f"unknown importance mode {mode!r}")
    mags = np.abs(expl.a)
    total = mags.sum()
    if total == 0.0:
        warnings.warn(
            "all coefficients are zero; reporting uniform importances",
            UniformFallbackWarning,
            stacklevel=2,
        )
        return np.full(mags.shape[0], 1.0 / mags.shape[0])
    return mags / total

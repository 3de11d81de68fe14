"""Laplace-approximation fitting of the gridded Cox-process likelihood.

The point pattern is reduced to cell counts; conditional on the latent
effects the counts are independent Poissons with mean alpha_q lambda(s_q)
(midpoint quadrature, Berman-Turner style), so the log-likelihood is
sum over campaigns and cells of N_q log(alpha_q lambda) - alpha_q lambda.

Fitting splits the latent vector u into the field block w (large, banded
precision) and the dense block d = (mu0, beta, gamma, mu_t) (small). For a
fixed hyperparameter point theta the posterior mode of u is found by Newton
with step-halving; because the Poisson Hessian contributes only a diagonal to
the w block, each step factors an arrowhead matrix (banded + dense border)
instead of a general sparse one. The hyperparameters are then integrated over
a small axis-aligned grid around their posterior mode, spaced so the three
points per axis straddle roughly the central 90% of the Gaussian profile;
posterior draws pick a grid point by weight, add within-cell jitter on theta,
and draw the latent vector from the Gaussian approximation at that point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from . import _banded
from .geodata import CovariateStack, DomainMask, PointPattern
from .gmrf import LatticeMesh, MaternHyper, build_precision
from .model import (
    CellDesign,
    EffectVector,
    ModelSpec,
    _gamma_logpdf,
    build_design,
)

__all__ = [
    "FitError",
    "GriddedLikelihood",
    "PosteriorDraws",
    "FitSummary",
    "DicResult",
    "bin_points",
    "fit",
    "summarize",
    "compute_dic",
    "inner_objective_grad",
]

NEWTON_MAX_ITER = 50
NEWTON_GRAD_TOL = 1e-6
MAX_EXPLORE_EVALS = 150
ETA_CLIP = 300.0  # keeps exp() finite during line search


class FitError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Likelihood assembly
# ---------------------------------------------------------------------------


@dataclass
class GriddedLikelihood:
    """Cell counts, exposures and design pieces for every campaign.

    ``exposure[t]`` is the quadrature weight alpha_q times any thinning
    factor, so the Poisson mean at a cell is exposure * exp(eta).
    ``dense_design[t]`` holds the columns multiplying the dense effects, in
    ``spec.dense_names`` order.
    """

    spec: ModelSpec
    mesh: LatticeMesh | None
    campaigns: list[int]
    designs: dict[int, CellDesign]
    counts: dict[int, np.ndarray]
    exposure: dict[int, np.ndarray]
    dense_design: dict[int, np.ndarray]
    n_points: int

    @property
    def n_mesh(self) -> int:
        return self.mesh.n if (self.mesh is not None and self.spec.include_field) else 0

    @property
    def n_dense(self) -> int:
        return self.spec.n_dense

    def with_exposure_factor(self, factor: float) -> "GriddedLikelihood":
        """Same data with every exposure scaled (used for thinned training)."""
        if factor <= 0:
            raise ValueError("exposure factor must be positive")
        return GriddedLikelihood(
            spec=self.spec,
            mesh=self.mesh,
            campaigns=self.campaigns,
            designs=self.designs,
            counts=self.counts,
            exposure={t: e * factor for t, e in self.exposure.items()},
            dense_design=self.dense_design,
            n_points=self.n_points,
        )

    def with_counts(self, counts: dict[int, np.ndarray], n_points: int) -> "GriddedLikelihood":
        return GriddedLikelihood(
            spec=self.spec,
            mesh=self.mesh,
            campaigns=self.campaigns,
            designs=self.designs,
            counts=counts,
            exposure=self.exposure,
            dense_design=self.dense_design,
            n_points=n_points,
        )


def count_loglik(like: GriddedLikelihood, etas: dict[int, np.ndarray]) -> float:
    """Poisson count log-likelihood (constants included) at given log-intensities."""
    total = 0.0
    for t in like.campaigns:
        y = like.counts[t]
        e = like.exposure[t]
        mean = e * np.exp(np.minimum(etas[t], ETA_CLIP))
        total += float(
            np.dot(y, etas[t] + np.log(e)) - mean.sum() - gammaln(y + 1.0).sum()
        )
    return total


def dense_design_matrix(spec: ModelSpec, design: CellDesign, campaign: int) -> np.ndarray:
    """Columns multiplying (mu0, beta, gamma, mu_t) at the design's cells."""
    cols = [np.ones(design.n_cells)]
    for j in range(design.x.shape[1]):
        cols.append(design.x[:, j])
    if spec.include_poceanica:
        cols.append(design.z)
    mat = np.column_stack(cols)
    if spec.has_campaign_effects:
        onehot = np.zeros((design.n_cells, spec.n_campaigns))
        onehot[:, campaign - 1] = 1.0
        mat = np.hstack([mat, onehot])
    return mat


def bin_points(
    spec: ModelSpec,
    stack: CovariateStack,
    campaign_domains: dict[int, DomainMask],
    points: PointPattern,
    mesh: LatticeMesh | None = None,
) -> GriddedLikelihood:
    """Reduce a point pattern to per-campaign cell counts.

    Every point must fall in a cell of its campaign's domain; stray points
    (outside the grid, on an unclassified cell, or in the wrong sub-domain)
    are a hard error rather than silently dropped.
    """
    if set(campaign_domains) != set(range(1, spec.n_campaigns + 1)):
        raise ValueError("campaign domains must cover campaigns 1..T")
    if spec.include_field and mesh is None:
        raise ValueError("field models need a mesh")
    grid = stack.grid
    designs, counts, exposure, dense = {}, {}, {}, {}
    n_points = 0
    for t in range(1, spec.n_campaigns + 1):
        domain = campaign_domains[t]
        design = build_design(spec, stack, domain, mesh)
        pts = points.for_campaign(t)
        cells = grid.cell_of_points(pts.x, pts.y)
        node_of = np.full(grid.n_cells, -1, dtype=int)
        node_of[design.cell_ids] = np.arange(design.n_cells)
        node = np.where(cells >= 0, node_of[cells], -1)
        stray = int(np.sum(node < 0))
        if stray:
            raise ValueError(
                f"campaign {t}: {stray} points fall outside the campaign domain"
            )
        y = np.bincount(node, minlength=design.n_cells).astype(float)
        designs[t] = design
        counts[t] = y
        exposure[t] = np.full(design.n_cells, design.weight)
        dense[t] = dense_design_matrix(spec, design, t)
        n_points += pts.n
    return GriddedLikelihood(
        spec=spec,
        mesh=mesh if spec.include_field else None,
        campaigns=sorted(designs),
        designs=designs,
        counts=counts,
        exposure=exposure,
        dense_design=dense,
        n_points=n_points,
    )


# ---------------------------------------------------------------------------
# Inner problem: latent mode for one hyperparameter point
# ---------------------------------------------------------------------------


class _DenseFactor:
    """Dense-only stand-in for the arrowhead factor (field-free models)."""

    def __init__(self, s_dense: np.ndarray):
        try:
            self.ls = np.linalg.cholesky(s_dense)
        except np.linalg.LinAlgError as err:
            raise FitError(f"non-positive-definite Hessian: {err}") from None
        self.m = s_dense.shape[0]

    @property
    def logdet(self) -> float:
        return 2.0 * float(np.sum(np.log(np.diag(self.ls))))

    def solve(self, b_w, b_d):
        y = np.linalg.solve(self.ls, b_d)
        return np.zeros(0), np.linalg.solve(self.ls.T, y)

    def sample(self, z_w, z_d):
        return np.zeros(0), np.linalg.solve(self.ls.T, z_d)

    def dense_block_cov(self) -> np.ndarray:
        inv_l = np.linalg.solve(self.ls, np.eye(self.m))
        return inv_l.T @ inv_l


class _Inner:
    """Poisson likelihood plus Gaussian prior for one (sigma, rho, tau)."""

    def __init__(self, like: GriddedLikelihood, field_ab: np.ndarray | None, tau: float | None):
        self.like = like
        self.spec = like.spec
        self.field_ab = field_ab
        self.n_w = like.n_mesh
        self.m = like.n_dense
        prior = np.full(self.m, self.spec.fixed_prec)
        if self.spec.has_campaign_effects:
            if tau is None:
                raise ValueError("campaign models need tau")
            prior[self.m - self.spec.n_campaigns :] = tau
        self.dense_prior = prior
        # constant likelihood terms: sum N_q log alpha_q - log N_q!
        const = 0.0
        for t in like.campaigns:
            y = like.counts[t]
            e = like.exposure[t]
            const += float(np.dot(y, np.log(e)) - gammaln(y + 1.0).sum())
        self.loglik_const = const

    def etas(self, u_w: np.ndarray, u_d: np.ndarray) -> dict[int, np.ndarray]:
        out = {}
        for t in self.like.campaigns:
            eta = self.like.dense_design[t] @ u_d
            if self.n_w:
                eta = eta + u_w[self.like.designs[t].mesh_index]
            out[t] = eta
        return out

    def loglik(self, etas: dict[int, np.ndarray], with_const: bool = False) -> float:
        total = self.loglik_const if with_const else 0.0
        for t in self.like.campaigns:
            y = self.like.counts[t]
            mean = self.like.exposure[t] * np.exp(np.minimum(etas[t], ETA_CLIP))
            total += float(np.dot(y, etas[t]) - mean.sum())
        return total

    def prior_quad(self, u_w: np.ndarray, u_d: np.ndarray) -> float:
        quad = float(np.dot(self.dense_prior * u_d, u_d))
        if self.n_w:
            quad += _banded.quadform(self.field_ab, u_w)
        return quad

    def objective(self, u_w: np.ndarray, u_d: np.ndarray) -> float:
        return self.loglik(self.etas(u_w, u_d)) - 0.5 * self.prior_quad(u_w, u_d)

    def gradient(self, u_w: np.ndarray, u_d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        g_w = np.zeros(self.n_w)
        g_d = -self.dense_prior * u_d
        if self.n_w:
            g_w -= _banded.matvec(self.field_ab, u_w)
        for t, eta in self.etas(u_w, u_d).items():
            resid = self.like.counts[t] - self.like.exposure[t] * np.exp(
                np.minimum(eta, ETA_CLIP)
            )
            g_d += self.like.dense_design[t].T @ resid
            if self.n_w:
                g_w += np.bincount(
                    self.like.designs[t].mesh_index, weights=resid, minlength=self.n_w
                )
        return g_w, g_d

    def _hessian_factor(self, u_w: np.ndarray, u_d: np.ndarray):
        """Factor of the negated Hessian (prior precision + Poisson weights)."""
        s = np.diag(self.dense_prior).astype(float)
        if self.n_w:
            d_w = np.zeros(self.n_w)
            b = np.zeros((self.n_w, self.m))
        for t, eta in self.etas(u_w, u_d).items():
            w = self.like.exposure[t] * np.exp(np.minimum(eta, ETA_CLIP))
            x = self.like.dense_design[t]
            s += (x * w[:, None]).T @ x
            if self.n_w:
                idx = self.like.designs[t].mesh_index
                d_w += np.bincount(idx, weights=w, minlength=self.n_w)
                for j in range(self.m):
                    b[:, j] += np.bincount(idx, weights=w * x[:, j], minlength=self.n_w)
        if not self.n_w:
            return _DenseFactor(s)
        ab = self.field_ab.copy()
        ab[-1] += d_w
        try:
            return _banded.ArrowFactor(ab, b, s)
        except np.linalg.LinAlgError as err:
            raise FitError(f"non-positive-definite Hessian: {err}") from None

    def newton(self, u_w: np.ndarray, u_d: np.ndarray):
        """Mode of the latent posterior; returns (u_w, u_d, factor, n_iter)."""
        u_w, u_d = u_w.copy(), u_d.copy()
        obj = self.objective(u_w, u_d)
        factor = None
        for it in range(1, NEWTON_MAX_ITER + 1):
            g_w, g_d = self.gradient(u_w, u_d)
            gnorm = max(
                float(np.max(np.abs(g_w))) if g_w.size else 0.0,
                float(np.max(np.abs(g_d))) if g_d.size else 0.0,
            )
            if gnorm < NEWTON_GRAD_TOL:
                if factor is None:
                    factor = self._hessian_factor(u_w, u_d)
                return u_w, u_d, factor, it - 1
            factor = self._hessian_factor(u_w, u_d)
            step_w, step_d = factor.solve(g_w, g_d)
            scale = 1.0
            # accept any move within summation noise of the current value:
            # near the mode a full step gains less than the noise floor
            noise = 1e-9 * (1.0 + abs(obj))
            for _ in range(40):
                new_w = u_w + scale * step_w
                new_d = u_d + scale * step_d
                new_obj = self.objective(new_w, new_d)
                if new_obj > obj - noise:
                    break
                scale *= 0.5
            else:
                raise FitError(
                    f"Newton line search failed at iteration {it} "
                    f"(gradient max-norm {gnorm:.3e})"
                )
            u_w, u_d, obj = new_w, new_d, new_obj
        g_w, g_d = self.gradient(u_w, u_d)
        gnorm = max(
            float(np.max(np.abs(g_w))) if g_w.size else 0.0,
            float(np.max(np.abs(g_d))) if g_d.size else 0.0,
        )
        if gnorm < NEWTON_GRAD_TOL:
            return u_w, u_d, self._hessian_factor(u_w, u_d), NEWTON_MAX_ITER
        raise FitError(
            f"Newton did not converge in {NEWTON_MAX_ITER} iterations "
            f"(gradient max-norm {gnorm:.3e})"
        )


def inner_objective_grad(
    like: GriddedLikelihood,
    u_w: np.ndarray,
    u_d: np.ndarray,
    hyper: MaternHyper | None = None,
    tau: float | None = None,
) -> tuple[float, np.ndarray]:
    """Inner Laplace objective and its analytic gradient at (u_w, u_d).

    The objective is the Poisson log-likelihood plus the Gaussian prior
    kernel; the gradient is returned as one concatenated vector. Exposed for
    derivative checking.
    """
    ab = None
    if like.spec.include_field:
        if hyper is None:
            raise ValueError("field models need hyper")
        ab = build_precision(like.mesh, hyper).ab
    inner = _Inner(like, ab, tau)
    obj = inner.objective(u_w, u_d)
    g_w, g_d = inner.gradient(u_w, u_d)
    return obj, np.concatenate([g_w, g_d])


# ---------------------------------------------------------------------------
# Hyperparameter exploration
# ---------------------------------------------------------------------------


@dataclass
class _ThetaPoint:
    theta: np.ndarray
    log_post: float
    u_w: np.ndarray
    u_d: np.ndarray
    n_iter: int


class _Explorer:
    """Deterministic search and evaluation cache over theta space."""

    def __init__(self, like: GriddedLikelihood, warm_w: np.ndarray, warm_d: np.ndarray):
        self.like = like
        self.spec = like.spec
        self.cache: dict[tuple, _ThetaPoint] = {}
        self.warm_w = warm_w
        self.warm_d = warm_d
        self.n_evals = 0
        self.newton_iters = 0

    def _unpack(self, theta: np.ndarray):
        pos = 0
        hyper = None
        tau = None
        if self.spec.include_field:
            hyper = MaternHyper(sigma=math.exp(theta[0]), rho=math.exp(theta[1]))
            pos = 2
        if self.spec.has_campaign_effects:
            tau = math.exp(theta[pos])
        return hyper, tau

    def _log_hyper_prior(self, theta: np.ndarray) -> float:
        """Prior on theta (log scales), including the change-of-variable terms."""
        hyper, tau = self._unpack(theta)
        total = 0.0
        pos = 0
        if self.spec.include_field:
            total += self.spec.pc_prior.logdensity(hyper.sigma, hyper.rho)
            total += theta[0] + theta[1]
            pos = 2
        if self.spec.has_campaign_effects:
            total += _gamma_logpdf(tau, self.spec.tau_shape, self.spec.tau_rate)
            total += theta[pos]
        return total

    def evaluate(self, theta: np.ndarray) -> _ThetaPoint:
        key = tuple(np.round(theta, 10))
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        if self.n_evals >= MAX_EXPLORE_EVALS:
            raise FitError("hyperparameter exploration exceeded its evaluation budget")
        self.n_evals += 1
        hyper, tau = self._unpack(theta)
        ab = build_precision(self.like.mesh, hyper).ab if self.spec.include_field else None
        inner = _Inner(self.like, ab, tau)
        u_w, u_d, factor, iters = inner.newton(self.warm_w, self.warm_d)
        self.newton_iters += iters
        # Laplace: loglik + prior kernel + 0.5 logdet Q_prior - 0.5 logdet H
        logdet_prior = float(np.sum(np.log(inner.dense_prior)))
        if self.spec.include_field:
            logdet_prior += _banded.BandedChol(ab).logdet
        lp = (
            inner.loglik(inner.etas(u_w, u_d), with_const=True)
            - 0.5 * inner.prior_quad(u_w, u_d)
            + 0.5 * logdet_prior
            - 0.5 * factor.logdet
            + self._log_hyper_prior(theta)
        )
        point = _ThetaPoint(theta=theta.copy(), log_post=lp, u_w=u_w, u_d=u_d, n_iter=iters)
        self.cache[key] = point
        self.warm_w, self.warm_d = u_w, u_d
        return point

    def factor_at(self, point: _ThetaPoint):
        """Rebuild the Gaussian approximation's factor at a cached mode."""
        hyper, tau = self._unpack(point.theta)
        ab = build_precision(self.like.mesh, hyper).ab if self.spec.include_field else None
        inner = _Inner(self.like, ab, tau)
        return inner._hessian_factor(point.u_w, point.u_d)

    def hill_climb(
        self, theta0: np.ndarray, steps: tuple[float, ...] = (0.8, 0.4, 0.2, 0.1)
    ) -> _ThetaPoint:
        best = self.evaluate(theta0)
        h = theta0.size
        for step in steps:
            improved = True
            while improved:
                improved = False
                for axis in range(h):
                    for sign in (1.0, -1.0):
                        cand = best.theta.copy()
                        cand[axis] += sign * step
                        point = self.evaluate(cand)
                        if point.log_post > best.log_post + 1e-9:
                            best = point
                            improved = True
        return best

    def axis_scales(self, mode: _ThetaPoint, probe: float = 0.3) -> np.ndarray:
        """Posterior sd per theta axis from a three-point curvature estimate."""
        h = mode.theta.size
        sd = np.empty(h)
        for axis in range(h):
            up = mode.theta.copy()
            up[axis] += probe
            down = mode.theta.copy()
            down[axis] -= probe
            f_up = self.evaluate(up).log_post
            f_down = self.evaluate(down).log_post
            curv = (f_up + f_down - 2.0 * mode.log_post) / probe**2
            sd[axis] = 1.0 / math.sqrt(-curv) if curv < -1e-8 else 1.0
        return np.clip(sd, 0.1, 1.2)


# ---------------------------------------------------------------------------
# Posterior draws and summaries
# ---------------------------------------------------------------------------


@dataclass
class PosteriorDraws:
    """A posterior draws of the hyperparameters and all latent effects.

    ``dense`` is (A, n_dense) in ``spec.dense_names`` order; ``w`` is
    (A, mesh.n) (zero columns for field-free models); ``log_hyper`` is
    (A, n_hyper) in ``spec.hyper_names`` order.
    """

    spec: ModelSpec
    mesh: LatticeMesh | None
    dense: np.ndarray
    w: np.ndarray
    log_hyper: np.ndarray
    theta_mode: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @property
    def n_draws(self) -> int:
        return self.dense.shape[0]

    def effect_draws(self, name: str) -> np.ndarray:
        """Draws of one dense effect or (natural-scale) hyperparameter."""
        if name in self.spec.dense_names:
            return self.dense[:, self.spec.dense_names.index(name)]
        hypers = self.spec.hyper_names
        if f"log_{name}" in hypers:
            return np.exp(self.log_hyper[:, hypers.index(f"log_{name}")])
        raise KeyError(f"unknown effect {name!r}")

    def effects_at(self, a: int) -> EffectVector:
        w = self.w[a] if self.spec.include_field else np.zeros(0)
        return EffectVector.from_dense(self.spec, self.dense[a], w)

    def log_intensity_draws(self, design: CellDesign, campaign: int) -> np.ndarray:
        """(A, n_cells) log-intensity draws at a design's cells."""
        x = dense_design_matrix(self.spec, design, campaign)
        eta = self.dense @ x.T
        if self.spec.include_field:
            eta = eta + self.w[:, design.mesh_index]
        return eta

    def mean_effects(self) -> EffectVector:
        w = self.w.mean(axis=0) if self.spec.include_field else np.zeros(0)
        return EffectVector.from_dense(self.spec, self.dense.mean(axis=0), w)


def _default_theta0(spec: ModelSpec) -> np.ndarray:
    parts = []
    if spec.include_field:
        parts += [math.log(spec.pc_prior.sigma0), math.log(spec.pc_prior.rho0)]
    if spec.has_campaign_effects:
        parts.append(math.log(10.0))
    return np.array(parts)


def fit(
    like: GriddedLikelihood,
    n_draws: int = 1000,
    rng: np.random.Generator | None = None,
    theta_init: np.ndarray | None = None,
    grid_half_width: float = 1.65,
) -> PosteriorDraws:
    """Fit the model and return posterior draws.

    ``theta_init`` warm-starts the hyperparameter search (log scale, in
    ``spec.hyper_names`` order). ``grid_half_width`` scales the integration
    grid's offset in posterior-sd units; the default straddles the central
    90% of a Gaussian profile.
    """
    if rng is None:
        rng = np.random.default_rng()
    spec = like.spec
    n_w = like.n_mesh
    explorer = _Explorer(like, np.zeros(n_w), np.zeros(spec.n_dense))
    h = len(spec.hyper_names)

    if h == 0:
        inner = _Inner(like, None, None)
        u_w, u_d, factor, iters = inner.newton(np.zeros(0), np.zeros(spec.n_dense))
        z = rng.standard_normal((spec.n_dense, n_draws))
        _, x_d = factor.sample(np.zeros((0, n_draws)), z)
        draws = u_d + x_d.T
        return PosteriorDraws(
            spec=spec,
            mesh=like.mesh,
            dense=draws,
            w=np.zeros((n_draws, 0)),
            log_hyper=np.zeros((n_draws, 0)),
            theta_mode=np.zeros(0),
            diagnostics={"n_evals": 1, "newton_iters": iters, "grid_points": 0},
        )

    if theta_init is not None:
        theta0 = np.asarray(theta_init, dtype=float)
        steps = (0.4, 0.2, 0.1)  # trust a warm start; search locally
    else:
        theta0 = _default_theta0(spec)
        steps = (0.8, 0.4, 0.2, 0.1)
    mode = explorer.hill_climb(theta0, steps)
    sd = explorer.axis_scales(mode)
    delta = grid_half_width * sd

    offsets = np.stack(
        np.meshgrid(*[np.array([-1.0, 0.0, 1.0])] * h, indexing="ij"), axis=-1
    ).reshape(-1, h)
    points = [explorer.evaluate(mode.theta + off * delta) for off in offsets]
    log_w = np.array([p.log_post for p in points])
    weights = np.exp(log_w - log_w.max())
    weights /= weights.sum()

    counts = rng.multinomial(n_draws, weights)
    dense = np.empty((n_draws, spec.n_dense))
    w_draws = np.empty((n_draws, n_w))
    log_hyper = np.empty((n_draws, h))
    pos = 0
    for g in np.flatnonzero(counts):
        point = points[g]
        n_g = int(counts[g])
        factor = explorer.factor_at(point)
        jitter = rng.uniform(-0.5, 0.5, size=(n_g, h)) * delta
        log_hyper[pos : pos + n_g] = point.theta + jitter
        z_w = rng.standard_normal((n_w, n_g))
        z_d = rng.standard_normal((spec.n_dense, n_g))
        if n_w:
            x_w, x_d = factor.sample(z_w, z_d)
            w_draws[pos : pos + n_g] = (point.u_w[:, None] + x_w).T
        else:
            _, x_d = factor.sample(z_w, z_d)
        dense[pos : pos + n_g] = (point.u_d[:, None] + x_d).T
        pos += n_g

    return PosteriorDraws(
        spec=spec,
        mesh=like.mesh,
        dense=dense,
        w=w_draws,
        log_hyper=log_hyper,
        theta_mode=mode.theta,
        diagnostics={
            "n_evals": explorer.n_evals,
            "newton_iters": explorer.newton_iters,
            "grid_points": len(points),
            "grid_delta": delta,
            "axis_sd": sd,
        },
    )


@dataclass(frozen=True)
class FitSummary:
    """Posterior summary table: one row per effect and hyperparameter."""

    names: list[str]
    mean: np.ndarray
    sd: np.ndarray
    q05: np.ndarray
    q50: np.ndarray
    q95: np.ndarray

    def row(self, name: str) -> dict[str, float]:
        i = self.names.index(name)
        return {
            "mean": float(self.mean[i]),
            "sd": float(self.sd[i]),
            "q05": float(self.q05[i]),
            "q50": float(self.q50[i]),
            "q95": float(self.q95[i]),
        }

    def interval(self, name: str) -> tuple[float, float]:
        """Central 90% credible interval."""
        i = self.names.index(name)
        return float(self.q05[i]), float(self.q95[i])

    def __str__(self) -> str:
        header = f"{'effect':<16}{'mean':>10}{'sd':>10}{'q05':>10}{'q50':>10}{'q95':>10}"
        lines = [header]
        for i, name in enumerate(self.names):
            lines.append(
                f"{name:<16}{self.mean[i]:>10.4f}{self.sd[i]:>10.4f}"
                f"{self.q05[i]:>10.4f}{self.q50[i]:>10.4f}{self.q95[i]:>10.4f}"
            )
        return "\n".join(lines)


def summarize(draws: PosteriorDraws) -> FitSummary:
    """Means, sds and 5/50/95% quantiles of all effects and hyperparameters.

    Hyperparameters are reported on their natural scales (sigma, rho, tau).
    """
    spec = draws.spec
    names = list(spec.dense_names)
    cols = [draws.dense[:, i] for i in range(spec.n_dense)]
    for j, log_name in enumerate(spec.hyper_names):
        names.append(log_name.removeprefix("log_"))
        cols.append(np.exp(draws.log_hyper[:, j]))
    mat = np.column_stack(cols)
    q = np.quantile(mat, [0.05, 0.5, 0.95], axis=0)
    return FitSummary(
        names=names,
        mean=mat.mean(axis=0),
        sd=mat.std(axis=0, ddof=1),
        q05=q[0],
        q50=q[1],
        q95=q[2],
    )


@dataclass(frozen=True)
class DicResult:
    dbar: float
    d_hat: float
    p_d: float
    dic: float


def compute_dic(like: GriddedLikelihood, draws: PosteriorDraws) -> DicResult:
    """Deviance information criterion from posterior draws.

    Deviance is -2 times the Poisson count log-likelihood (constants
    included); the effective parameter count is mean deviance minus the
    deviance at the posterior-mean effects. The log-intensity is linear in
    the effects, so the plug-in deviance uses the mean of the eta draws.
    """
    eta_draws = {
        t: draws.log_intensity_draws(like.designs[t], t) for t in like.campaigns
    }
    total = 0.0
    for a in range(draws.n_draws):
        total += -2.0 * count_loglik(like, {t: eta_draws[t][a] for t in like.campaigns})
    dbar = total / draws.n_draws
    d_hat = -2.0 * count_loglik(
        like, {t: eta_draws[t].mean(axis=0) for t in like.campaigns}
    )
    p_d = dbar - d_hat
    return DicResult(dbar=dbar, d_hat=d_hat, p_d=p_d, dic=dbar + p_d)

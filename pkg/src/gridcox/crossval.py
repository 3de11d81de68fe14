"""Thinning-based K-fold cross-validation for point processes, CRPS scoring
and model ranking.

Each observed point gets an independent uniform mark in 1..K; fold k trains
on the unmarked points (intensity (K-1)/K of the original, still a Cox
process) and validates on the marked ones (intensity 1/K). Raw residuals are
computed per bounded subset of each campaign's domain: the observed validation
count minus 1/(K-1) times the integrated posterior training intensity. Over
posterior draws this yields an A x K x G_t residual tensor per campaign; the
CRPS of each fold's residual ensemble against 0 is averaged over folds
(one score per subset and campaign), then pooled into a single score per
model. Lower is better.

The study runner fits every (model, fold) pair in worker processes. Fold
marks are drawn once per study; every task derives its own generator from
(seed, model, fold), so results are identical for any worker count.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from multiprocessing import get_context

import numpy as np

from .geodata import CovariateStack, DomainMask, PartitionScheme, PointPattern, build_partition
from .gmrf import LatticeMesh
from .inference import (
    DicResult,
    FitSummary,
    GriddedLikelihood,
    PosteriorDraws,
    bin_points,
    compute_dic,
    fit,
    summarize,
)
from .model import ModelSpec

__all__ = [
    "FoldAssignment",
    "ResidualTensor",
    "CrpsTable",
    "assign_folds",
    "split",
    "thin_intensity",
    "validation_residuals",
    "crps_empirical",
    "aggregate_crps",
    "rank_models",
    "run_study",
]


# ---------------------------------------------------------------------------
# Folds and thinning
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FoldAssignment:
    """Uniform multinomial marks, one per observed point."""

    n_folds: int
    marks: np.ndarray

    def __post_init__(self):
        marks = np.asarray(self.marks, dtype=int)
        if self.n_folds < 2:
            raise ValueError("need at least two folds")
        if marks.size and (marks.min() < 1 or marks.max() > self.n_folds):
            raise ValueError("marks must lie in 1..K")
        object.__setattr__(self, "marks", marks)


def assign_folds(points: PointPattern, n_folds: int, rng: np.random.Generator) -> FoldAssignment:
    """Mark each point with an independent uniform fold label in 1..K."""
    if n_folds < 2:
        raise ValueError("need at least two folds")
    marks = rng.integers(1, n_folds + 1, size=points.n)
    return FoldAssignment(n_folds=n_folds, marks=marks)


def split(
    points: PointPattern, folds: FoldAssignment, k: int
) -> tuple[PointPattern, PointPattern]:
    """(training, validation) patterns for fold k: validation has mark k."""
    if not 1 <= k <= folds.n_folds:
        raise ValueError(f"fold {k} out of range")
    if folds.marks.size != points.n:
        raise ValueError("fold assignment does not match the point pattern")
    val = folds.marks == k
    return points.take(~val), points.take(val)


def thin_intensity(lam, n_folds: int):
    """Training and validation intensities of a K-fold thinning.

    Training keeps (K-1)/K of the rate; validation is the remainder, computed
    by subtraction so the two parts sum to the input exactly.
    """
    if n_folds < 2:
        raise ValueError("need at least two folds")
    lam = np.asarray(lam, dtype=float)
    train = lam * ((n_folds - 1) / n_folds)
    return train, lam - train


# ---------------------------------------------------------------------------
# Residuals
# ---------------------------------------------------------------------------


def validation_residuals(
    draws: PosteriorDraws,
    like: GriddedLikelihood,
    partitions: dict[int, PartitionScheme],
    val_points: PointPattern,
    n_folds: int,
) -> dict[int, np.ndarray]:
    """Raw residual draws for one fold: observed validation counts minus
    1/(K-1) times the integrated training-intensity draws, per subset.

    ``draws`` must come from a fit to the fold's training points with
    unscaled exposures, so its intensity estimates the thinned training rate.
    Returns one (A, G_t) array per campaign.
    """
    out: dict[int, np.ndarray] = {}
    for t in like.campaigns:
        design = like.designs[t]
        part = partitions[t]
        g_of_cell = part.cell_subset.ravel()[design.cell_ids]
        if np.any(g_of_cell < 0):
            raise ValueError(f"campaign {t}: partition does not cover the domain")
        n_g = part.n_subsets
        member = np.zeros((design.n_cells, n_g))
        member[np.arange(design.n_cells), g_of_cell] = 1.0

        pts = val_points.for_campaign(t)
        g_of_point = part.subset_of_points(pts.x, pts.y)
        if np.any(g_of_point < 0):
            raise ValueError(f"campaign {t}: validation points outside the partition")
        counts = np.bincount(g_of_point, minlength=n_g).astype(float)

        lam = np.exp(draws.log_intensity_draws(design, t))
        integral = (lam @ member) * (design.weight / (n_folds - 1))
        out[t] = counts[None, :] - integral
    return out


@dataclass
class ResidualTensor:
    """Per-campaign residual draws, shaped (A, K, G_t)."""

    n_folds: int
    tensors: dict[int, np.ndarray]
    partitions: dict[int, PartitionScheme]

    @classmethod
    def from_folds(
        cls,
        per_fold: list[dict[int, np.ndarray]],
        partitions: dict[int, PartitionScheme],
    ) -> "ResidualTensor":
        if not per_fold:
            raise ValueError("no fold residuals given")
        campaigns = sorted(per_fold[0])
        tensors = {
            t: np.stack([fold[t] for fold in per_fold], axis=1) for t in campaigns
        }
        return cls(n_folds=len(per_fold), tensors=tensors, partitions=partitions)

    @property
    def campaigns(self) -> list[int]:
        return sorted(self.tensors)

    def grand_mean(self) -> float:
        """Mean residual over draws, folds, subsets and campaigns."""
        total = 0.0
        count = 0
        for arr in self.tensors.values():
            total += float(arr.sum())
            count += arr.size
        return total / count


# ---------------------------------------------------------------------------
# CRPS
# ---------------------------------------------------------------------------


def crps_empirical(samples: np.ndarray, y: float = 0.0, method: str = "sort") -> float:
    """CRPS of an empirical ensemble against a scalar observation.

    ``method="sort"`` uses the O(A log A) rearrangement of the double sum;
    ``method="pairwise"`` evaluates the double sum directly. Both implement
    mean|x - y| - mean|x - x'| / 2 over the ensemble.
    """
    x = np.asarray(samples, dtype=float).ravel()
    a = x.size
    if a == 0:
        raise ValueError("empty ensemble")
    term1 = float(np.mean(np.abs(x - y)))
    if method == "sort":
        xs = np.sort(x)
        j = np.arange(a)
        gini = float(np.dot(xs, 2.0 * j - a + 1.0)) / (a * a)
        return term1 - gini
    if method == "pairwise":
        double = float(np.abs(x[:, None] - x[None, :]).sum()) / (2.0 * a * a)
        return term1 - double
    raise ValueError(f"unknown method {method!r}")


def aggregate_crps(
    tensor: ResidualTensor, weights: str = "equal"
) -> tuple[dict[int, np.ndarray], float]:
    """Fold-averaged CRPS per (subset, campaign), plus one pooled score.

    Per subset g and campaign t the score is the mean over folds of the CRPS
    of that fold's residual ensemble against 0. Pooling is an unweighted mean
    over all (g, t) by default, or an area-weighted mean (subset cell counts)
    with ``weights="area"``.
    """
    if weights not in ("equal", "area"):
        raise ValueError(f"unknown weighting {weights!r}")
    by_campaign: dict[int, np.ndarray] = {}
    values = []
    weight_values = []
    for t in tensor.campaigns:
        arr = tensor.tensors[t]  # (A, K, G)
        _, n_k, n_g = arr.shape
        scores = np.empty(n_g)
        for g in range(n_g):
            scores[g] = np.mean(
                [crps_empirical(arr[:, k, g], 0.0) for k in range(n_k)]
            )
        by_campaign[t] = scores
        values.append(scores)
        if weights == "area":
            sizes = np.array([len(s) for s in tensor.partitions[t].subsets], dtype=float)
            weight_values.append(sizes)
    flat = np.concatenate(values)
    if weights == "equal":
        overall = float(flat.mean())
    else:
        wts = np.concatenate(weight_values)
        overall = float(np.dot(flat, wts) / wts.sum())
    return by_campaign, overall


def rank_models(scores: dict[str, float]) -> list[str]:
    """Model ids by ascending score; ties break lexicographically."""
    return [m for m, _ in sorted(scores.items(), key=lambda kv: (kv[1], kv[0]))]


@dataclass
class CrpsTable:
    """Cross-validation scores and in-sample DIC for a set of models.

    Models that failed to fit appear in ``failures`` (model id to a list of
    stage messages) and are absent from ``scores``; rankings cover the
    scored models only.
    """

    model_ids: list[str]
    scores: dict[str, float]
    by_subset: dict[str, dict[int, np.ndarray]]
    mean_residual: dict[str, dict[int, np.ndarray]]
    dic: dict[str, DicResult]
    summaries: dict[str, FitSummary]
    n_folds: int
    n_draws: int
    failures: dict[str, list[str]] = field(default_factory=dict)

    def ranking(self) -> list[str]:
        return rank_models(self.scores)

    def dic_ranking(self) -> list[str]:
        return rank_models({m: r.dic for m, r in self.dic.items()})


# ---------------------------------------------------------------------------
# Study runner
# ---------------------------------------------------------------------------


def derive_rng(seed: int, *parts) -> np.random.Generator:
    """Generator derived by hashing (seed, parts); stable across processes."""
    label = "|".join([str(seed)] + [str(p) for p in parts])
    digest = hashlib.sha256(label.encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


@dataclass
class _StudyPayload:
    stack: CovariateStack
    campaign_domains: dict[int, DomainMask]
    points: PointPattern
    specs: list[ModelSpec]
    marks: np.ndarray
    n_folds: int
    n_draws: int
    seed: int
    partitions: dict[int, PartitionScheme]
    fail_fast: bool = True
    theta_init: dict[str, np.ndarray] | None = None


_PAYLOAD: _StudyPayload | None = None


def _init_worker(payload: _StudyPayload) -> None:
    global _PAYLOAD
    _PAYLOAD = payload


def _build_mesh(spec: ModelSpec, stack: CovariateStack) -> LatticeMesh | None:
    if not spec.include_field:
        return None
    return LatticeMesh.for_grid(stack.grid, rho_ref=spec.pc_prior.rho0)


def _full_fit_task(model_idx: int):
    """Full-data fit: DIC, summary and the hyper mode for warm starts."""
    p = _PAYLOAD
    spec = p.specs[model_idx]
    try:
        mesh = _build_mesh(spec, p.stack)
        like = bin_points(spec, p.stack, p.campaign_domains, p.points, mesh=mesh)
        rng = derive_rng(p.seed, spec.model_id, "full")
        draws = fit(like, n_draws=p.n_draws, rng=rng)
    except Exception as e:
        if p.fail_fast:
            raise
        return model_idx, None, None, None, f"{type(e).__name__}: {e}"
    return (
        model_idx,
        compute_dic(like, draws),
        summarize(draws),
        draws.theta_mode,
        None,
    )


def _fold_fit_task(model_idx: int, k: int):
    """Fit fold k's training pattern and score its validation residuals."""
    p = _PAYLOAD
    spec = p.specs[model_idx]
    try:
        mesh = _build_mesh(spec, p.stack)
        folds = FoldAssignment(n_folds=p.n_folds, marks=p.marks)
        train, val = split(p.points, folds, k)
        like = bin_points(spec, p.stack, p.campaign_domains, train, mesh=mesh)
        rng = derive_rng(p.seed, spec.model_id, "fold", k)
        theta0 = p.theta_init[spec.model_id] if p.theta_init else None
        draws = fit(like, n_draws=p.n_draws, rng=rng, theta_init=theta0)
        resid = validation_residuals(draws, like, p.partitions, val, p.n_folds)
    except Exception as e:
        if p.fail_fast:
            raise
        return model_idx, k, None, f"{type(e).__name__}: {e}"
    return model_idx, k, resid, None


def build_partitions(
    campaign_domains: dict[int, DomainMask], rows: int, cols: int
) -> dict[int, PartitionScheme]:
    """One partition per distinct domain, shared by its campaigns."""
    by_key: dict[bytes, PartitionScheme] = {}
    out: dict[int, PartitionScheme] = {}
    for t, mask in campaign_domains.items():
        key = mask.included.tobytes()
        if key not in by_key:
            by_key[key] = build_partition(mask, rows, cols)
        out[t] = by_key[key]
    return out


def run_study(
    stack: CovariateStack,
    campaign_domains: dict[int, DomainMask],
    points: PointPattern,
    specs: list[ModelSpec],
    n_folds: int = 5,
    n_draws: int = 1000,
    partition_dims: tuple[int, int] = (18, 18),
    seed: int = 0,
    workers: int = 1,
    fail_fast: bool = True,
) -> CrpsTable:
    """Cross-validate and rank a set of models on one survey.

    Fold marks are drawn once from (seed, "folds"). Every model is first fit
    to the full data (DIC, posterior summary, warm start), then once per
    fold; fold fits are scored by subset residuals and pooled CRPS. The
    result is byte-identical for any ``workers`` value under a fixed seed.

    With ``fail_fast=False`` a failed fit does not abort the sweep: the
    error is recorded per model and the remaining work continues.
    """
    ids = [s.model_id for s in specs]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate model ids")
    marks = assign_folds(points, n_folds, derive_rng(seed, "folds")).marks
    partitions = build_partitions(campaign_domains, *partition_dims)
    payload = _StudyPayload(
        stack=stack,
        campaign_domains=campaign_domains,
        points=points,
        specs=specs,
        marks=marks,
        n_folds=n_folds,
        n_draws=n_draws,
        seed=seed,
        partitions=partitions,
        fail_fast=fail_fast,
    )

    ctx = get_context("spawn")
    with ProcessPoolExecutor(
        max_workers=max(1, workers), mp_context=ctx, initializer=_init_worker,
        initargs=(payload,),
    ) as pool:
        full = list(pool.map(_full_fit_task, range(len(specs))))
    dic: dict[str, DicResult] = {}
    summaries: dict[str, FitSummary] = {}
    theta_init: dict[str, np.ndarray] = {}
    failures: dict[str, list[str]] = {}
    for model_idx, dic_res, summary, theta, err in sorted(full, key=lambda r: r[0]):
        if err is not None:
            failures.setdefault(ids[model_idx], []).append(f"full fit: {err}")
            continue
        dic[ids[model_idx]] = dic_res
        summaries[ids[model_idx]] = summary
        theta_init[ids[model_idx]] = theta

    # fold fits warm-start from the full fit's hyper mode; workers need the
    # updated payload, so a fresh pool is started for this phase
    payload.theta_init = theta_init
    live = [i for i in range(len(specs)) if ids[i] not in failures]
    tasks = [(i, k) for i in live for k in range(1, n_folds + 1)]
    results: dict[tuple[int, int], dict[int, np.ndarray]] = {}
    with ProcessPoolExecutor(
        max_workers=max(1, workers), mp_context=ctx, initializer=_init_worker,
        initargs=(payload,),
    ) as pool:
        for model_idx, k, resid, err in pool.map(
            _fold_fit_task, [t[0] for t in tasks], [t[1] for t in tasks]
        ):
            if err is not None:
                failures.setdefault(ids[model_idx], []).append(f"fold {k}: {err}")
            else:
                results[(model_idx, k)] = resid

    scores: dict[str, float] = {}
    by_subset: dict[str, dict[int, np.ndarray]] = {}
    mean_residual: dict[str, dict[int, np.ndarray]] = {}
    for i, spec in enumerate(specs):
        if spec.model_id in failures:
            continue
        per_fold = [results[(i, k)] for k in range(1, n_folds + 1)]
        tensor = ResidualTensor.from_folds(per_fold, partitions)
        by_campaign, overall = aggregate_crps(tensor)
        scores[spec.model_id] = overall
        by_subset[spec.model_id] = by_campaign
        mean_residual[spec.model_id] = {
            t: arr.mean(axis=(0, 1)) for t, arr in tensor.tensors.items()
        }
    return CrpsTable(
        model_ids=ids,
        scores=scores,
        by_subset=by_subset,
        mean_residual=mean_residual,
        dic=dic,
        summaries=summaries,
        n_folds=n_folds,
        n_draws=n_draws,
        failures=failures,
    )

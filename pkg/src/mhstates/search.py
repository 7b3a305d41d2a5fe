"""Stochastic search: coset screening, hyperdeterminant maximization and
local-unitary connection.

All randomness flows through numpy Generators seeded from
``(seed, job index)``, so restarts and per-coset jobs are reproducible
individually and identical whether run serially or in parallel.  Within
one restart the proposal noise is consumed strictly in step order, which
keeps results bit-identical across batching choices.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from . import f2linear, hyperdet, qstate

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class WalkConfig:
    """Hyperparameters of the adaptive random walk.

    ``target`` is the objective value at which the search may stop early;
    ``tolerance`` is the slack on it, and doubles as the convergence
    threshold for residual minimization.
    """

    seed: int = 0
    restarts: int = 32
    max_steps: int = 200_000
    initial_step: float = 0.5
    shrink_factor: float = 0.5
    patience: int = 200
    step_floor: float = 1e-9
    target: float | None = None
    tolerance: float = 1e-9

    def __post_init__(self) -> None:
        if self.initial_step <= 0:
            raise ValueError("initial_step must be positive")
        if not 0.0 < self.shrink_factor < 1.0:
            raise ValueError("shrink_factor must lie strictly between 0 and 1")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")


#: defaults for the 8-parameter hyperdeterminant maximization
MAXIMIZE_DEFAULTS = WalkConfig(target=hyperdet.DELTA4_MAX, tolerance=1e-9)

#: defaults for the 13-parameter connection problem; the step floor sits
#: two decades below the convergence tolerance because the residual cannot
#: fall much below the smallest proposal scale
CONNECT_DEFAULTS = WalkConfig(target=0.0, tolerance=1e-10, step_floor=1e-12)


@dataclass
class SearchResult:
    params: np.ndarray
    value: float
    steps: int
    restart: int
    converged: bool
    phase: float | None = None


def rng_for_job(seed: int, job: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(job,)))


def derived_seed(seed: int, index: int) -> int:
    """A stable 64-bit seed for job ``index`` of a run seeded by ``seed``."""
    return int(np.random.SeedSequence(entropy=seed, spawn_key=(index,)).generate_state(1)[0])


# --- fast product-state objective ----------------------------------------


def product_states(alphas: np.ndarray, betas: np.ndarray) -> np.ndarray:
    """Batched product states: (..., 4) angle arrays in, (..., 16) out."""
    ph = np.exp(-0.5j * alphas)
    a0 = ph * np.cos(0.5 * betas)
    a1 = ph.conjugate() * np.sin(0.5 * betas)
    amps = np.stack([a0[..., 0], a1[..., 0]], axis=-1)
    for k in range(1, 4):
        factor = np.stack([a0[..., k], a1[..., k]], axis=-1)
        amps = (amps[..., :, None] * factor[..., None, :]).reshape(amps.shape[:-1] + (-1,))
    return amps


def coset_objective(a: f2linear.BitMatrix) -> Callable[[np.ndarray], np.ndarray]:
    """|Delta4(X_A |params>)| as a function of (..., 8) angle arrays
    (the four alphas, then the four betas)."""
    perm = qstate.bit_matrix_permutation(a)

    def objective(angles: np.ndarray) -> np.ndarray:
        angles = np.asarray(angles, dtype=float)
        states = product_states(angles[..., :4], angles[..., 4:])[..., perm]
        return np.abs(hyperdet.delta4_raw(states))

    return objective


def angles_to_param(angles: np.ndarray) -> np.ndarray:
    p = np.zeros((4, 3))
    p[:, 0] = angles[:4]
    p[:, 1] = angles[4:]
    return p


def param_to_angles(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return np.concatenate([p[:, 0], p[:, 1]])


# --- the adaptive walk -----------------------------------------------------

_CHUNK = 512


def _walk(
    objective: Callable[[np.ndarray], float],
    x0: np.ndarray,
    rng: np.random.Generator,
    cfg: WalkConfig,
    minimize: bool,
) -> tuple[np.ndarray, float, int, bool]:
    """Greedy adaptive Gaussian walk.

    Proposes x + N(0, step^2) on all coordinates, accepts only strict
    improvements, shrinks the step after ``patience`` consecutive
    rejections and stops at the step floor, the step budget, or as soon
    as the target is met within tolerance.  Returns
    (best x, best objective, evaluations, target hit).
    """

    def hit(value: float) -> bool:
        if cfg.target is None:
            return False
        if minimize:
            return value <= cfg.target + cfg.tolerance
        return value >= cfg.target - cfg.tolerance

    better = (lambda a, b: a < b) if minimize else (lambda a, b: a > b)
    x = np.array(x0, dtype=float)
    best = float(objective(x))
    evals = 1
    step = cfg.initial_step
    rejected = 0
    buffer = np.empty((0, x.size))
    cursor = 0
    while not hit(best) and evals < cfg.max_steps and step >= cfg.step_floor:
        if cursor >= len(buffer):
            buffer = rng.standard_normal((_CHUNK, x.size))
            cursor = 0
        proposal = x + step * buffer[cursor]
        cursor += 1
        value = float(objective(proposal))
        evals += 1
        if better(value, best):
            x, best = proposal, value
            rejected = 0
        else:
            rejected += 1
            if rejected >= cfg.patience:
                step *= cfg.shrink_factor
                rejected = 0
    return x, best, evals, hit(best)


def _random_start(rng: np.random.Generator, dim: int) -> np.ndarray:
    if dim == 8:
        return np.concatenate(
            [rng.uniform(0, TWO_PI, size=4), rng.uniform(0, np.pi, size=4)]
        )
    return rng.uniform(0, TWO_PI, size=dim)


def _run_restarts(
    objective: Callable[[np.ndarray], float],
    cfg: WalkConfig,
    dim: int,
    start: np.ndarray | None,
    minimize: bool,
) -> tuple[np.ndarray, float, int, int, bool]:
    best_x = None
    best_f = np.inf if minimize else -np.inf
    best_restart = 0
    total = 0
    converged = False
    for r in range(cfg.restarts):
        rng = rng_for_job(cfg.seed, r)
        x0 = _random_start(rng, dim)
        if r == 0 and start is not None:
            x0 = np.asarray(start, dtype=float)
        x, f, evals, target_hit = _walk(objective, x0, rng, cfg, minimize=minimize)
        total += evals
        if (f < best_f) if minimize else (f > best_f):
            best_x, best_f, best_restart = x, f, r
        if target_hit:
            converged = True
            break
    return best_x, best_f, best_restart, total, converged


# --- public operations ------------------------------------------------------


def maximize_delta4(
    a: f2linear.BitMatrix,
    cfg: WalkConfig = MAXIMIZE_DEFAULTS,
    start: np.ndarray | None = None,
) -> SearchResult:
    """Maximize |Delta4(X_A |params>)| over the 8 live angles by a
    random-restart adaptive walk; deterministic in ``cfg.seed``."""
    if not f2linear.is_invertible(a):
        raise ValueError("coset representative must be invertible over GF(2)")
    objective = coset_objective(a)
    start_angles = param_to_angles(start) if start is not None else None
    x, f, restart, steps, converged = _run_restarts(
        objective, cfg, dim=8, start=start_angles, minimize=False
    )
    return SearchResult(
        params=angles_to_param(x),
        value=float(f),
        steps=steps,
        restart=restart,
        converged=converged,
    )


def residual(source: np.ndarray, target: np.ndarray, p: np.ndarray, phase: float) -> float:
    """Sum of the moduli of the 16 coordinates of
    target - e^(i phase) U(p) source."""
    moved = np.exp(1j * phase) * qstate.apply_param_operator(p, source)
    return float(np.abs(target - moved).sum())


def lu_connect(
    source: np.ndarray,
    target: np.ndarray,
    cfg: WalkConfig = CONNECT_DEFAULTS,
    start: tuple[np.ndarray, float] | None = None,
) -> SearchResult:
    """Search a local unitary and phase with
    target = e^(i phase) U(P) source by minimizing the coordinate
    residual over the 12 matrix entries plus the phase.  The first
    restart begins at zero parameters unless ``start`` says otherwise.
    """
    for v in (source, target):
        if not qstate.is_normalized(v):
            raise ValueError("lu_connect expects unit-norm states")

    def objective(x: np.ndarray) -> float:
        return residual(source, target, x[:12].reshape(4, 3), x[12])

    if start is None:
        start_x = np.zeros(13)
    else:
        start_x = np.concatenate([np.asarray(start[0], dtype=float).ravel(), [start[1]]])
    x, f, restart, steps, converged = _run_restarts(
        objective, cfg, dim=13, start=start_x, minimize=True
    )
    return SearchResult(
        params=x[:12].reshape(4, 3),
        value=float(f),
        steps=steps,
        restart=restart,
        converged=converged,
        phase=float(x[12]),
    )


# --- screening ---------------------------------------------------------------


@dataclass
class ScreenReport:
    survivors: np.ndarray  # bool per coset record
    max_abs: np.ndarray  # best |Delta4| sample per coset
    samples: int
    seed: int
    threshold: float

    @property
    def survivor_count(self) -> int:
        return int(self.survivors.sum())


def _screen_one(args: tuple[f2linear.BitMatrix, int, int, int]) -> float:
    a, samples, seed, index = args
    rng = rng_for_job(seed, index)
    alphas = rng.uniform(0, TWO_PI, size=(samples, 4))
    betas = rng.uniform(0, np.pi, size=(samples, 4))
    states = product_states(alphas, betas)[:, qstate.bit_matrix_permutation(a)]
    return float(np.abs(hyperdet.delta4_raw(states)).max())


def worker_count() -> int:
    """Worker cap from the HDF_THREADS environment variable (default 1)."""
    try:
        return max(1, int(os.environ.get("HDF_THREADS", "1")))
    except ValueError:
        return 1


def screen_cosets(
    table: f2linear.CosetTable,
    samples: int = 200,
    seed: int = 0,
    threshold: float = 1e-12,
) -> ScreenReport:
    """Flag the cosets on which |Delta4| is not identically zero.

    Each representative is sampled at ``samples`` random parameter
    matrices drawn from a per-coset stream; a coset survives iff any
    sample exceeds ``threshold``.  Flags are written onto the records.
    """
    jobs = [(rec.matrix, samples, seed, i) for i, rec in enumerate(table.records)]
    workers = worker_count()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            max_abs = np.array(list(pool.map(_screen_one, jobs, chunksize=16)))
    else:
        max_abs = np.array([_screen_one(job) for job in jobs])
    survivors = max_abs > threshold
    for rec, flag in zip(table.records, survivors):
        rec.survivor = bool(flag)
    return ScreenReport(survivors, max_abs, samples, seed, threshold)


def expect_survivor_count(report: ScreenReport, expected: int = 333) -> None:
    """Fail loudly when the survivor count is off, listing the borderline
    cosets instead of re-thresholding."""
    if report.survivor_count == expected:
        return
    order = np.argsort(report.max_abs)
    low = [(int(i), float(report.max_abs[i])) for i in order[:5]]
    raise AssertionError(
        f"survivor count {report.survivor_count} != {expected} "
        f"(threshold {report.threshold}); smallest maxima: {low}"
    )


def maximize_cosets(
    table: f2linear.CosetTable,
    indices: Sequence[int],
    cfg: WalkConfig = MAXIMIZE_DEFAULTS,
) -> list[SearchResult]:
    """Maximize over several cosets; job ``i`` runs with the seed derived
    from (cfg.seed, coset index), and maximizer flags are written back."""
    jobs = [
        (table.records[i].matrix, replace(cfg, seed=derived_seed(cfg.seed, i)))
        for i in indices
    ]
    workers = worker_count()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_maximize_one, jobs))
    else:
        results = [_maximize_one(job) for job in jobs]
    for i, res in zip(indices, results):
        if cfg.target is not None:
            table.records[i].maximizer = bool(res.value >= cfg.target - cfg.tolerance)
    return results


def _maximize_one(job: tuple[f2linear.BitMatrix, WalkConfig]) -> SearchResult:
    return maximize_delta4(job[0], job[1])

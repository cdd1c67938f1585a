"""Fusion-weight search with particle swarms and genetic algorithms.

Both optimizers minimize the validation fusion error over weight vectors in
[0,1]^n. The initial population always contains the equal-weight vector and
every one-hot vector, so the returned fitness can never be worse than simple
averaging or the best single model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar, Sequence

import numpy as np

from .combine import equal_weights, fitness_from_stack, stack_scores
from .types import ScoreMatrix, as_labels


@dataclass(frozen=True)
class PsoConfig:
    swarm_size: int = 30
    iterations: int = 100
    seed: int = 0
    inertia: float = 0.729
    cognitive: float = 1.49445
    social: float = 1.49445
    velocity_clamp: float = 0.2

    method: ClassVar[str] = "pso"

    def __post_init__(self):
        if self.swarm_size < 2:
            raise ValueError("swarm_size must be at least 2")
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 50
    generations: int = 100
    seed: int = 0
    tournament_size: int = 3
    crossover_prob: float = 0.9
    blend_alpha: float = 0.5
    mutation_prob: float = 0.1
    mutation_sigma: float = 0.1
    elite_count: int = 2

    method: ClassVar[str] = "ga"

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if self.generations < 1:
            raise ValueError("generations must be at least 1")
        if not 0.0 <= self.crossover_prob <= 1.0:
            raise ValueError("crossover_prob must lie in [0, 1]")
        if not 0.0 <= self.mutation_prob <= 1.0:
            raise ValueError("mutation_prob must lie in [0, 1]")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be at least 1")
        if self.elite_count < 1:
            raise ValueError("elite_count must be at least 1")


@dataclass(frozen=True)
class OptimizeResult:
    """Best weight vector found, its fitness, and the best-so-far trace."""

    weights: np.ndarray
    fitness: float
    history: tuple[float, ...]

    def __iter__(self):
        # allows `weights, fit = optimize_weights_pso(...)`
        return iter((self.weights, self.fitness))


def _seeded_candidates(n_models: int, total: int, rng: np.random.Generator) -> np.ndarray:
    pop = np.empty((total, n_models))
    pop[0] = equal_weights(n_models)
    pop[1 : n_models + 1] = np.eye(n_models)
    if total > n_models + 1:
        pop[n_models + 1 :] = rng.uniform(0.0, 1.0, size=(total - n_models - 1, n_models))
    return pop


def _make_evaluator(scores: Sequence[ScoreMatrix], labels):
    stacked = stack_scores(scores)
    y = as_labels(labels, stacked.shape[2])
    if y.shape[0] != stacked.shape[1]:
        raise ValueError(f"labels have {y.shape[0]} entries for {stacked.shape[1]} samples")

    def evaluate(candidates: np.ndarray) -> np.ndarray:
        out = np.empty(candidates.shape[0])
        for i, w in enumerate(candidates):
            # the all-zero corner has no defined fusion; score it worst so it
            # can never displace a seeded candidate
            out[i] = 1.0 if not (w > 0).any() else fitness_from_stack(w, stacked, y)
        return out

    return evaluate, stacked.shape[0]


def optimize_weights_pso(scores: Sequence[ScoreMatrix], labels, config: PsoConfig) -> OptimizeResult:
    """Global-best PSO over [0,1]^n with clamped velocities and positions."""
    evaluate, n_models = _make_evaluator(scores, labels)
    if config.swarm_size < n_models + 1:
        raise ValueError(
            f"swarm_size {config.swarm_size} cannot seed equal-weight plus "
            f"{n_models} one-hot particles; need at least {n_models + 1}"
        )
    rng = np.random.default_rng(config.seed)
    pos = _seeded_candidates(n_models, config.swarm_size, rng)
    vel = np.zeros_like(pos)

    fit = evaluate(pos)
    pbest_pos = pos.copy()
    pbest_fit = fit.copy()
    g = int(np.argmin(pbest_fit))
    gbest_pos = pbest_pos[g].copy()
    gbest_fit = float(pbest_fit[g])
    history = [gbest_fit]

    for _ in range(config.iterations):
        r1 = rng.uniform(size=pos.shape)
        r2 = rng.uniform(size=pos.shape)
        vel = (
            config.inertia * vel
            + config.cognitive * r1 * (pbest_pos - pos)
            + config.social * r2 * (gbest_pos - pos)
        )
        np.clip(vel, -config.velocity_clamp, config.velocity_clamp, out=vel)
        pos = np.clip(pos + vel, 0.0, 1.0)

        fit = evaluate(pos)
        improved = fit < pbest_fit
        pbest_pos[improved] = pos[improved]
        pbest_fit[improved] = fit[improved]
        g = int(np.argmin(pbest_fit))
        if pbest_fit[g] < gbest_fit:
            gbest_fit = float(pbest_fit[g])
            gbest_pos = pbest_pos[g].copy()
        history.append(gbest_fit)

    return OptimizeResult(gbest_pos, gbest_fit, tuple(history))


def _tournament(rng: np.random.Generator, fit: np.ndarray, size: int) -> int:
    picks = rng.integers(0, fit.shape[0], size=size)
    return int(picks[np.argmin(fit[picks])])


def optimize_weights_ga(scores: Sequence[ScoreMatrix], labels, config: GaConfig) -> OptimizeResult:
    """Generational GA: tournament selection, blend crossover, Gaussian mutation, elitism."""
    evaluate, n_models = _make_evaluator(scores, labels)
    if config.population_size < n_models + 1:
        raise ValueError(
            f"population_size {config.population_size} cannot seed equal-weight plus "
            f"{n_models} one-hot individuals; need at least {n_models + 1}"
        )
    rng = np.random.default_rng(config.seed)
    pop = _seeded_candidates(n_models, config.population_size, rng)
    fit = evaluate(pop)
    history = [float(fit.min())]

    elite_count = min(config.elite_count, config.population_size)
    for _ in range(config.generations):
        order = np.argsort(fit, kind="stable")
        elites = pop[order[:elite_count]].copy()

        children = np.empty((config.population_size - elite_count, n_models))
        made = 0
        while made < children.shape[0]:
            p1 = pop[_tournament(rng, fit, config.tournament_size)]
            p2 = pop[_tournament(rng, fit, config.tournament_size)]
            if rng.random() < config.crossover_prob:
                lo = np.minimum(p1, p2)
                hi = np.maximum(p1, p2)
                span = (hi - lo) * (1.0 + 2.0 * config.blend_alpha)
                base = lo - config.blend_alpha * (hi - lo)
                c1 = base + rng.random(n_models) * span
                c2 = base + rng.random(n_models) * span
            else:
                c1 = p1.copy()
                c2 = p2.copy()
            for child in (c1, c2):
                if made >= children.shape[0]:
                    break
                mask = rng.random(n_models) < config.mutation_prob
                noise = rng.normal(0.0, config.mutation_sigma, size=n_models)
                child = np.where(mask, child + noise, child)
                children[made] = np.clip(child, 0.0, 1.0)
                made += 1

        pop = np.vstack([elites, children])
        fit = np.concatenate([fit[order[:elite_count]], evaluate(children)])
        history.append(float(fit.min()))

    best = int(np.argmin(fit))
    return OptimizeResult(pop[best].copy(), float(fit[best]), tuple(history))

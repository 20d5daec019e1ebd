"""Search machinery for the refinement methods without closed-form fits.

Three layers:

* exact enumeration - non-trivial bipartitions (for the simple canonical
  model, whose space of deterministic combination functions is exactly the
  set of row bipartitions) and set partitions of the parent set (for SICI
  structures), the latter via restricted growth strings.

* a brute-force SCM search that scans every non-trivial bipartition with a
  vectorised median/absolute-deviation kernel, so the exact global optimum
  is found deterministically.

* a seeded genetic algorithm over a mixed encoding: combiner genes in
  [0, 1) decode to child-state labels per mechanism configuration, the
  remaining genes are the mechanism probabilities themselves. Selection is
  binary tournament, crossover uniform, mutation per-gene: probability
  genes get a Gaussian step whose scale is drawn log-uniformly between
  1e-4 and 0.1 (the heavy tail of small steps is what lets runs polish
  optima to the 1e-3 level; a fixed 0.1 scale stalls around 1e-2),
  combiner genes resample uniformly. Identical seed and config give
  bitwise-identical results.

The mechanism configuration (0, ..., 0) is pinned to child state 0: any
non-trivial deterministic combiner can be brought to that form by flipping
mechanism polarities, so the pinning halves the search space without losing
any representable model.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Iterator, Sequence

import numpy as np

from .cpt import Cpt, config_table
from .errors import SearchSpaceError, ValidationError
from .refine import (
    IciSpec,
    ScmSpec,
    SiciSpec,
    canonical_partition,
    param_savings,
    scm_fit,
)

ProgressFn = Callable[[int, float], None]

# per-mutation Gaussian scale is 10**uniform(log10 range): mostly small
# polishing steps with occasional large exploratory ones
_MUTATION_SCALE_LOG10 = (-4.0, -1.0)


@dataclass(frozen=True)
class GaConfig:
    """Genetic-algorithm hyperparameters; defaults follow the benchmark setup."""

    population: int = 300
    max_generations: int = 2000
    mutation_prob: float = 0.3
    elitism_frac: float = 0.05
    crossover_prob: float = 0.8
    stall_limit: int = 50
    seed: int = 0
    restarts: int = 10

    def __post_init__(self) -> None:
        if self.population < 2:
            raise ValidationError("population must be >= 2")
        for name in ("mutation_prob", "elitism_frac", "crossover_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1]")
        if self.stall_limit < 1:
            raise ValidationError("stall_limit must be >= 1")
        if self.max_generations < 1:
            raise ValidationError("max_generations must be >= 1")
        if self.restarts < 1:
            raise ValidationError("restarts must be >= 1")


@dataclass(frozen=True)
class GenomeShape:
    """Gene layout: (combiner_configs - 1) combiner genes then ``reals`` genes.

    Mechanism configuration 0 is pinned to child state 0 and carries no gene.
    """

    combiner_configs: int
    reals: int
    child_card: int = 2

    @property
    def n_genes(self) -> int:
        return (self.combiner_configs - 1) + self.reals

    def decode(self, vector: np.ndarray) -> "Genome":
        vector = np.asarray(vector, dtype=np.float64)
        n_comb = self.combiner_configs - 1
        labels = np.minimum(
            (vector[:n_comb] * self.child_card).astype(int), self.child_card - 1
        )
        return Genome((0, *labels.tolist()), vector[n_comb:].copy())


@dataclass(frozen=True, eq=False)
class Genome:
    """Decoded candidate: child-state label per mechanism config plus probability genes."""

    integer_part: tuple[int, ...]
    real_part: np.ndarray


@dataclass(frozen=True, eq=False)
class SearchResult:
    best_spec: object
    best_score: float
    evaluations: int
    seed_used: int
    generations_run: int


@dataclass(frozen=True, eq=False)
class SiciSweep:
    """Per-partition search results (enumeration order) plus the global best."""

    results: tuple[SearchResult, ...]
    best: SearchResult


def worker_count() -> int:
    """Worker cap from CPT_REFINE_THREADS (default 1). Never affects results."""
    try:
        n = int(os.environ.get("CPT_REFINE_THREADS", "1"))
    except ValueError:
        n = 1
    return max(1, n)


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------


def enumerate_bipartitions(
    item_count: int,
) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
    """All unordered non-trivial 2-block partitions of range(item_count).

    Item 0 is fixed in the first block so each unordered bipartition appears
    exactly once; the count is 2^(item_count - 1) - 1.
    """
    if not 2 <= item_count <= 30:
        raise SearchSpaceError(f"item_count must be in [2, 30], got {item_count}")
    items = range(1, item_count)
    for mask in range(1, 1 << (item_count - 1)):
        block_b = tuple(r for r in items if (mask >> (r - 1)) & 1)
        block_a = (0, *(r for r in items if not (mask >> (r - 1)) & 1))
        yield block_a, block_b


def enumerate_set_partitions(n: int) -> Iterator[tuple[tuple[int, ...], ...]]:
    """All set partitions of range(n) via restricted growth strings.

    Yields Bell(n) partitions, blocks ordered by first appearance, no
    duplicates.
    """
    if not 1 <= n <= 12:
        raise SearchSpaceError(f"n must be in [1, 12], got {n}")
    a = [0] * n

    def rec(i: int, n_blocks: int):
        if i == n:
            blocks: list[list[int]] = [[] for _ in range(n_blocks)]
            for j in range(n):
                blocks[a[j]].append(j)
            yield tuple(tuple(b) for b in blocks)
            return
        for b in range(n_blocks + 1):
            a[i] = b
            yield from rec(i + 1, n_blocks + (1 if b == n_blocks else 0))

    yield from rec(1, 1)


# ---------------------------------------------------------------------------
# Exact SCM search
# ---------------------------------------------------------------------------

_SCM_CHUNK = 1 << 18


def scm_bruteforce(truth: Cpt, on_progress: ProgressFn | None = None) -> SearchResult:
    """Exact optimum over every non-trivial row bipartition of a binary-child CPT.

    Scans all 2^(rows-1) - 1 bipartitions with a vectorised kernel: for a
    sorted value list, the absolute deviation of a block from its median is
    the sum of the block's upper half minus its lower half, which turns the
    per-block fit into one signed dot product. Ties break towards the
    smallest partition index, so results are independent of chunking.
    """
    n = truth.n_rows
    if n > 30:
        raise SearchSpaceError(f"{n} rows means 2^{n - 1} bipartitions; use the GA instead")
    if truth.child.cardinality != 2:
        raise ValidationError("brute-force SCM search requires a binary child")
    v = truth.rows[:, 0]
    order = np.argsort(v, kind="stable").astype(np.int64)
    v_sorted = v[order]

    total = (1 << (n - 1)) - 1
    best_score = np.inf
    best_mask = 0
    start = 1
    while start <= total:
        stop = min(start + _SCM_CHUNK, total + 1)
        masks = np.arange(start, stop, dtype=np.int64) << 1  # row 0 stays in block A
        member = ((masks[:, None] >> order[None, :]) & 1).astype(np.int32)
        score = _lad_scores(member, v_sorted) + _lad_scores(1 - member, v_sorted)
        i = int(np.argmin(score))
        if score[i] < best_score:
            best_score = float(score[i])
            best_mask = int(masks[i])
        start = stop
        if on_progress is not None:
            on_progress(stop - 1, best_score)

    assignment = tuple((best_mask >> r) & 1 for r in range(n))
    spec = ScmSpec(assignment)
    # report the score from the exact refit so it matches re-scoring bitwise
    score = scm_fit(truth, spec).score
    return SearchResult(spec, score, total, 0, 0)


def _lad_scores(member: np.ndarray, v_sorted: np.ndarray) -> np.ndarray:
    """Sum of |v - median| over each row's selected subset of sorted values."""
    k = member.sum(axis=1)
    ranks = member.cumsum(axis=1)
    sgn = np.sign(2 * ranks - (k + 1)[:, None]) * member
    return sgn.astype(np.float64) @ v_sorted


def optimize_scm_ga(
    truth: Cpt, config: GaConfig, on_progress: ProgressFn | None = None
) -> SearchResult:
    """GA over row bipartitions: the fallback for CPTs too large to enumerate.

    One gene per row beyond the first (row 0 is pinned to block A, halving
    the space exactly as the enumeration does); genes >= 0.5 put a row in
    block B, and an empty block B is penalised away. At enumerable sizes
    this serves as a cross-check of :func:`scm_bruteforce`.
    """
    if truth.child.cardinality != 2:
        raise ValidationError("the SCM objective requires a binary child")
    n = truth.n_rows
    v = truth.rows[:, 0]
    order = np.argsort(v, kind="stable")
    v_sorted = v[order]
    shape = GenomeShape(combiner_configs=n, reals=0)

    def batch(pop: np.ndarray) -> np.ndarray:
        bits = np.concatenate(
            [np.zeros((pop.shape[0], 1), dtype=bool), pop >= 0.5], axis=1
        )
        member = bits[:, order].astype(np.int32)
        empty_b = member.sum(axis=1) == 0
        return (
            _lad_scores(member, v_sorted)
            + _lad_scores(1 - member, v_sorted)
            + np.where(empty_b, 1e9, 0.0)
        )

    result = ga_optimize(None, shape, config, batch_fitness=batch, on_progress=on_progress)
    spec = ScmSpec(result.best_spec.integer_part)
    return SearchResult(
        spec,
        scm_fit(truth, spec).score,
        result.evaluations,
        result.seed_used,
        result.generations_run,
    )


# ---------------------------------------------------------------------------
# Genetic algorithm
# ---------------------------------------------------------------------------


def ga_optimize(
    fitness: Callable[[Genome], float] | None,
    shape: GenomeShape,
    config: GaConfig,
    batch_fitness: Callable[[np.ndarray], np.ndarray] | None = None,
    on_progress: ProgressFn | None = None,
) -> SearchResult:
    """Minimise a fitness over the mixed encoding; best of ``config.restarts`` runs.

    ``batch_fitness`` maps a (population, n_genes) matrix to a score vector
    and takes precedence over the per-genome ``fitness`` when given. Restart
    r is seeded with config.seed + r; identical seed and config give
    bitwise-identical results.
    """
    if fitness is None and batch_fitness is None:
        raise ValidationError("need a fitness function")
    if batch_fitness is None:
        batch_fitness = lambda pop: np.array([fitness(shape.decode(x)) for x in pop])

    best_score = np.inf
    best_vec: np.ndarray | None = None
    best_seed = config.seed
    evaluations = 0
    generations = 0
    for r in range(config.restarts):
        seed = config.seed + r
        score, vec, gens, evals = _ga_single_run(
            batch_fitness, shape.n_genes, shape, config, seed, evaluations, on_progress
        )
        evaluations += evals
        generations += gens
        if score < best_score:
            best_score = score
            best_vec = vec
            best_seed = seed
    return SearchResult(shape.decode(best_vec), best_score, evaluations, best_seed, generations)


def _ga_single_run(
    batch_fitness: Callable[[np.ndarray], np.ndarray],
    n_genes: int,
    shape: GenomeShape,
    config: GaConfig,
    seed: int,
    evals_before: int,
    on_progress: ProgressFn | None,
) -> tuple[float, np.ndarray, int, int]:
    rng = np.random.default_rng(seed)
    pop_size = config.population
    n_comb = shape.combiner_configs - 1
    is_comb = np.arange(n_genes) < n_comb

    pop = rng.random((pop_size, n_genes))
    scores = batch_fitness(pop)
    evals = pop_size
    i = int(np.argmin(scores))
    best_score = float(scores[i])
    best_vec = pop[i].copy()

    n_elite = min(pop_size, math.ceil(config.elitism_frac * pop_size))
    n_off = pop_size - n_elite
    stall = 0
    gen = 0
    for gen in range(1, config.max_generations + 1):
        idx = np.argsort(scores, kind="stable")
        elites, elite_scores = pop[idx[:n_elite]], scores[idx[:n_elite]]

        cand = rng.integers(0, pop_size, size=(2, n_off, 2))
        parents = []
        for side in range(2):
            c0, c1 = cand[side, :, 0], cand[side, :, 1]
            parents.append(np.where(scores[c0] <= scores[c1], c0, c1))
        pa, pb = pop[parents[0]], pop[parents[1]]

        do_cross = rng.random(n_off) < config.crossover_prob
        take_b = rng.random((n_off, n_genes)) < 0.5
        children = np.where(do_cross[:, None] & take_b, pb, pa)

        mutate = rng.random((n_off, n_genes)) < config.mutation_prob
        scale = 10.0 ** rng.uniform(*_MUTATION_SCALE_LOG10, size=(n_off, n_genes))
        perturbed = np.clip(children + scale * rng.normal(size=(n_off, n_genes)), 0.0, 1.0)
        resampled = rng.random((n_off, n_genes))
        children = np.where(mutate, np.where(is_comb[None, :], resampled, perturbed), children)

        child_scores = batch_fitness(children)
        evals += n_off
        pop = np.vstack([elites, children])
        scores = np.concatenate([elite_scores, child_scores])

        i = int(np.argmin(scores))
        if scores[i] < best_score:
            best_score = float(scores[i])
            best_vec = pop[i].copy()
            stall = 0
        else:
            stall += 1
        if on_progress is not None:
            on_progress(evals_before + evals, best_score)
        if stall >= config.stall_limit:
            break
    return best_score, best_vec, gen, evals


# ---------------------------------------------------------------------------
# ICI / SICI objectives
# ---------------------------------------------------------------------------


def _partition_batch_fitness(
    truth: Cpt, partition: Sequence[Sequence[int]]
) -> tuple[Callable[[np.ndarray], np.ndarray], GenomeShape, tuple[int, ...]]:
    """Vectorised sum-TVD objective for a US-SICI structure on a binary child.

    Returns (batch fitness over a population matrix, genome shape, block
    sizes of the real-gene segments in block order).
    """
    cards = truth.parent_cards
    states = config_table(cards)
    t_yes = truth.rows[:, 1]
    m = len(partition)
    n_mconf = 1 << m

    gene_cols = []
    block_sizes = []
    offset = 0
    for block in partition:
        stride = 1
        idx = np.zeros(truth.n_rows, dtype=np.int64)
        for i in block:
            idx += states[:, i] * stride
            stride *= cards[i]
        size = math.prod(cards[i] for i in block)
        gene_cols.append(idx + offset)
        block_sizes.append(size)
        offset += size
    gene_idx = np.stack(gene_cols, axis=1)  # (rows, m)
    bits = ((np.arange(n_mconf)[:, None] >> np.arange(m)[None, :]) & 1).astype(bool)
    n_comb = n_mconf - 1

    def batch(pop: np.ndarray) -> np.ndarray:
        reals = pop[:, n_comb:]
        p1 = reals[:, gene_idx]  # (pop, rows, m)
        joint = np.ones((pop.shape[0], truth.n_rows, n_mconf))
        for b in range(m):
            col = p1[:, :, b][:, :, None]
            joint *= np.where(bits[None, None, :, b], col, 1.0 - col)
        to_yes = np.concatenate(
            [np.zeros((pop.shape[0], 1)), (pop[:, :n_comb] >= 0.5).astype(np.float64)], axis=1
        )
        p_yes = np.einsum("prj,pj->pr", joint, to_yes)
        return np.abs(p_yes - t_yes[None, :]).sum(axis=1)

    return batch, GenomeShape(n_mconf, offset, truth.child.cardinality), tuple(block_sizes)


def _genome_to_sici(
    genome: Genome, partition: tuple[tuple[int, ...], ...], block_sizes: tuple[int, ...]
) -> SiciSpec:
    mech = []
    offset = 0
    for size in block_sizes:
        mech.append(tuple(genome.real_part[offset : offset + size].tolist()))
        offset += size
    return SiciSpec(partition, tuple(mech), combiner=genome.integer_part)


def optimize_sici_partition(
    truth: Cpt,
    partition: Sequence[Sequence[int]],
    config: GaConfig,
    on_progress: ProgressFn | None = None,
) -> SearchResult:
    """GA search of one US-SICI structure: combiner and mechanism tables jointly."""
    if truth.child.cardinality != 2:
        raise ValidationError("the SICI objective requires a binary child")
    part = canonical_partition(partition)
    batch, shape, block_sizes = _partition_batch_fitness(truth, part)
    result = ga_optimize(None, shape, config, batch_fitness=batch, on_progress=on_progress)
    spec = _genome_to_sici(result.best_spec, part, block_sizes)
    return replace_spec(result, spec)


def replace_spec(result: SearchResult, spec: object) -> SearchResult:
    return SearchResult(
        spec, result.best_score, result.evaluations, result.seed_used, result.generations_run
    )


def optimize_ici(
    truth: Cpt, config: GaConfig, on_progress: ProgressFn | None = None
) -> SearchResult:
    """GA search of the ICI model: one binary mechanism per parent.

    The genome holds 2^n - 1 combiner genes (configuration 0 pinned to child
    state 0) and one probability per parent state.
    """
    n = len(truth.parents)
    if n > 12:
        raise SearchSpaceError(f"{n} parents means 2^{n} combiner entries; not supported")
    singletons = tuple((i,) for i in range(n))
    result = optimize_sici_partition(truth, singletons, config, on_progress)
    sici: SiciSpec = result.best_spec
    return replace_spec(result, IciSpec(sici.mech_cpts, sici.combiner))


def _run_partition(args) -> SearchResult:
    truth, partition, config = args
    return optimize_sici_partition(truth, partition, config)


def optimize_sici(
    truth: Cpt, config: GaConfig, on_progress: Callable[[int, int, float], None] | None = None
) -> SiciSweep:
    """GA search over every multi-block parent partition; best per partition and overall.

    The single-block partition is skipped (it brings no parameter saving).
    Partition p gets seeds config.seed + p * config.restarts + (0 ..
    restarts-1), so per-partition results do not depend on scheduling; with
    CPT_REFINE_THREADS > 1 the partitions run on a process pool.
    ``on_progress`` receives (partitions done, partitions total, best score).
    """
    n = len(truth.parents)
    if n > 12:
        raise SearchSpaceError(f"partition sweep over {n} parents is not supported")
    partitions = [p for p in enumerate_set_partitions(n) if len(p) > 1]
    jobs = [
        (truth, part, replace(config, seed=config.seed + pi * config.restarts))
        for pi, part in enumerate(partitions)
    ]

    workers = worker_count()
    results: list[SearchResult]
    if workers > 1:
        try:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_run_partition, jobs))
        except OSError:
            results = [_run_partition(job) for job in jobs]
    else:
        results = []
        for done, job in enumerate(jobs, start=1):
            results.append(_run_partition(job))
            if on_progress is not None:
                best = min(r.best_score for r in results)
                on_progress(done, len(jobs), best)

    best = results[0]
    for r in results[1:]:
        if r.best_score < best.best_score:
            best = r
    return SiciSweep(tuple(results), best)


def spec_free_params(truth: Cpt, result: SearchResult) -> int:
    free, _ = param_savings(result.best_spec, truth.parent_cards, truth.child.cardinality)
    return free

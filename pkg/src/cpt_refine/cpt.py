"""Core data model for discrete conditional probability tables (CPTs).

A CPT stores one distribution over the child's states per configuration of
parent states. Rows follow a canonical mixed-radix order in which the FIRST
listed parent varies fastest; all modules in this package rely on that
ordering.

Besides the data model this module provides the numeric primitives used by
the structural refinement methods: total variation distance, an optional
KL divergence, the median as the one-dimensional least-absolute-deviation
minimiser, and fitting/expanding of row groupings (a grouping forces sets
of CPT rows to share one child distribution).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ShapeMismatchError, ValidationError

# Row sums within this tolerance of 1 are stored untouched; beyond it (but
# within the constructor tolerance) they are renormalised. Keeping exactly
# normalised input bitwise intact makes document round-trips byte-stable.
_RENORM_EPS = 1e-12


@dataclass(frozen=True)
class Variable:
    """A named discrete variable with an ordered list of state labels."""

    name: str
    states: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "states", tuple(self.states))
        if len(self.states) < 2:
            raise ValidationError(f"variable {self.name!r} needs >= 2 states")
        if len(set(self.states)) != len(self.states):
            raise ValidationError(f"variable {self.name!r} has duplicate state labels")

    @property
    def cardinality(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class ParentConfig:
    """One state index per parent, in parent order."""

    values: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))


@dataclass(frozen=True, eq=False)
class Cpt:
    """A child variable, its ordered parents, and one distribution per row.

    Rows are validated on construction: the row count must match the parent
    cardinalities, entries must lie in [0, 1], and every row must sum to 1
    within ``tolerance``. Rows off by more than 1e-12 are renormalised. The
    stored array is read-only; treat instances as immutable values.
    """

    child: Variable
    parents: tuple[Variable, ...]
    rows: np.ndarray

    def __init__(
        self,
        child: Variable,
        parents: Sequence[Variable],
        rows: np.ndarray | Sequence[Sequence[float]],
        tolerance: float = 1e-9,
    ) -> None:
        parents = tuple(parents)
        arr = np.array(rows, dtype=np.float64)
        n_rows = math.prod(v.cardinality for v in parents)
        if arr.ndim != 2 or arr.shape != (n_rows, child.cardinality):
            raise ValidationError(
                f"rows must have shape ({n_rows}, {child.cardinality}), got {arr.shape}"
            )
        if np.any(arr < -_RENORM_EPS) or np.any(arr > 1 + _RENORM_EPS):
            raise ValidationError("probabilities must lie in [0, 1]")
        sums = arr.sum(axis=1)
        dev = np.abs(sums - 1.0)
        if np.any(dev > tolerance):
            k = int(np.argmax(dev))
            raise ValidationError(f"row {k} sums to {sums[k]:.12g}, not 1")
        bad = dev > _RENORM_EPS
        if np.any(bad):
            arr = arr.copy()
            arr[bad] = np.clip(arr[bad], 0.0, 1.0) / arr[bad].sum(axis=1, keepdims=True)
        arr.setflags(write=False)
        object.__setattr__(self, "child", child)
        object.__setattr__(self, "parents", parents)
        object.__setattr__(self, "rows", arr)

    @property
    def parent_cards(self) -> tuple[int, ...]:
        return tuple(v.cardinality for v in self.parents)

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    def same_shape(self, other: "Cpt") -> bool:
        return (
            self.child.cardinality == other.child.cardinality
            and self.parent_cards == other.parent_cards
        )


@dataclass(frozen=True)
class Grouping:
    """A partition of CPT row indices plus one shared distribution per group."""

    groups: tuple[tuple[int, ...], ...]
    params: np.ndarray  # (n_groups, child_card)

    def __init__(self, groups: Iterable[Iterable[int]], params: np.ndarray) -> None:
        groups = tuple(tuple(int(j) for j in g) for g in groups)
        params = np.asarray(params, dtype=np.float64)
        if params.ndim != 2 or params.shape[0] != len(groups):
            raise ValidationError("need one parameter vector per group")
        if np.any(np.abs(params.sum(axis=1) - 1.0) > 1e-9):
            raise ValidationError("group parameter vectors must sum to 1")
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "params", params)


@dataclass(frozen=True, eq=False)
class CountTable:
    """Raw observation counts: one count per (parent configuration, child state)."""

    child: Variable
    parents: tuple[Variable, ...]
    counts: np.ndarray

    def __init__(
        self, child: Variable, parents: Sequence[Variable], counts: np.ndarray
    ) -> None:
        parents = tuple(parents)
        arr = np.asarray(counts)
        n_rows = math.prod(v.cardinality for v in parents)
        if arr.shape != (n_rows, child.cardinality):
            raise ValidationError(
                f"counts must have shape ({n_rows}, {child.cardinality}), got {arr.shape}"
            )
        if np.any(arr < 0):
            raise ValidationError("counts must be nonnegative")
        object.__setattr__(self, "child", child)
        object.__setattr__(self, "parents", parents)
        object.__setattr__(self, "counts", arr)


# ---------------------------------------------------------------------------
# Row indexing
# ---------------------------------------------------------------------------


def param_count(parent_cards: Sequence[int], child_card: int) -> int:
    """Number of free parameters of a full CPT: (prod of parent cards) * (child_card - 1)."""
    if child_card < 2:
        raise ValidationError("child must have >= 2 states")
    cards = [int(c) for c in parent_cards]
    if any(c < 1 for c in cards):
        raise ValidationError("parent cardinalities must be >= 1")
    return math.prod(cards) * (child_card - 1)


def row_index(config: ParentConfig | Sequence[int], parent_cards: Sequence[int]) -> int:
    """Canonical row index of a parent configuration (first parent varies fastest)."""
    values = config.values if isinstance(config, ParentConfig) else tuple(config)
    cards = tuple(int(c) for c in parent_cards)
    if len(values) != len(cards):
        raise ValidationError(f"config has {len(values)} entries for {len(cards)} parents")
    index = 0
    stride = 1
    for v, c in zip(values, cards):
        if not 0 <= v < c:
            raise ValidationError(f"state index {v} out of range for cardinality {c}")
        index += v * stride
        stride *= c
    return index


def config_of(index: int, parent_cards: Sequence[int]) -> ParentConfig:
    """Inverse of :func:`row_index`."""
    cards = tuple(int(c) for c in parent_cards)
    n_rows = math.prod(cards)
    if not 0 <= index < n_rows:
        raise ValidationError(f"row index {index} out of range [0, {n_rows})")
    values = []
    for c in cards:
        values.append(index % c)
        index //= c
    return ParentConfig(tuple(values))


def config_table(parent_cards: Sequence[int]) -> np.ndarray:
    """All parent configurations as an (n_rows, n_parents) int array, canonical order."""
    cards = tuple(int(c) for c in parent_cards)
    n_rows = math.prod(cards)
    out = np.zeros((n_rows, len(cards)), dtype=np.int64)
    stride = 1
    for i, c in enumerate(cards):
        out[:, i] = (np.arange(n_rows) // stride) % c
        stride *= c
    return out


# ---------------------------------------------------------------------------
# Estimation and metrics
# ---------------------------------------------------------------------------


def mle_from_counts(table: CountTable) -> Cpt:
    """Relative-frequency (maximum likelihood) CPT from a table of counts.

    Every row must have at least one observation; a zero-total row is an
    error rather than a silent uniform fill.
    """
    totals = table.counts.sum(axis=1)
    if np.any(totals <= 0):
        k = int(np.argmin(totals))
        raise ValidationError(f"row {k} has no observations; cannot normalise")
    rows = table.counts / totals[:, None]
    return Cpt(table.child, table.parents, rows)


def tvd_row(p: Sequence[float], q: Sequence[float]) -> float:
    """Total variation distance between two distributions on the same support.

    For binary distributions this reduces to |p0 - q0|.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ShapeMismatchError(f"length mismatch: {p.shape} vs {q.shape}")
    return 0.5 * float(np.abs(p - q).sum())


def score_sum_tvd(truth: Cpt, approx: Cpt) -> float:
    """Sum of row-wise total variation distances between two same-shape CPTs."""
    if not truth.same_shape(approx):
        raise ShapeMismatchError(
            f"shape mismatch: {truth.parent_cards}->{truth.child.cardinality} vs "
            f"{approx.parent_cards}->{approx.child.cardinality}"
        )
    return 0.5 * float(np.abs(truth.rows - approx.rows).sum())


def kl_row(p: Sequence[float], q: Sequence[float], epsilon: float = 1e-9) -> float:
    """KL divergence KL(p || q) with additive smoothing of q.

    Offered as an alternative metric only; it is far more sensitive than TVD
    where q has near-zero tails, which is why the package scores with TVD by
    default. ``epsilon`` is added to every entry of q before renormalising so
    the divergence stays finite.
    """
    if epsilon <= 0:
        raise ValidationError("epsilon must be > 0")
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ShapeMismatchError(f"length mismatch: {p.shape} vs {q.shape}")
    q = q + epsilon
    q = q / q.sum()
    mask = p > 0
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def score_sum_kl(truth: Cpt, approx: Cpt, epsilon: float = 1e-9) -> float:
    """Sum of row-wise KL divergences KL(truth_row || approx_row)."""
    if not truth.same_shape(approx):
        raise ShapeMismatchError("shape mismatch")
    return sum(kl_row(p, q, epsilon) for p, q in zip(truth.rows, approx.rows))


def median_lad(values: Sequence[float]) -> float:
    """Minimiser of sum_j |v_j - q| over q: the median.

    For an even number of values any point between the two central order
    statistics is optimal; the midpoint is returned so results are
    deterministic.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValidationError("median of an empty list")
    return float(np.median(arr))


# ---------------------------------------------------------------------------
# Row groupings
# ---------------------------------------------------------------------------


def check_partition(groups: Sequence[Sequence[int]], n_rows: int) -> None:
    """Validate that ``groups`` is a partition of range(n_rows)."""
    seen: set[int] = set()
    for g in groups:
        if len(g) == 0:
            raise ValidationError("empty group in partition")
        for j in g:
            if not 0 <= j < n_rows:
                raise ValidationError(f"row index {j} out of range")
            if j in seen:
                raise ValidationError(f"row {j} covered twice")
            seen.add(j)
    if len(seen) != n_rows:
        missing = sorted(set(range(n_rows)) - seen)
        raise ValidationError(f"rows not covered by partition: {missing[:8]}")


def fit_grouping(truth: Cpt, groups: Sequence[Sequence[int]]) -> Grouping:
    """Optimal shared distributions for a row partition under sum-TVD loss.

    Per group and per child state the median of the truth's probabilities
    across member rows is taken. For a binary child the two medians sum to 1
    and are exactly LAD-optimal. For wider children per-state medians need
    not sum to 1 and are renormalised; that renormalised vector is a
    heuristic rather than the exact optimum.
    """
    check_partition(groups, truth.n_rows)
    params = np.empty((len(groups), truth.child.cardinality))
    for k, g in enumerate(groups):
        member = truth.rows[list(g)]
        params[k] = np.median(member, axis=0)
        s = params[k].sum()
        if s <= 0:
            raise ValidationError(f"group {k} has all-zero medians")
        if abs(s - 1.0) > _RENORM_EPS:
            params[k] /= s
    return Grouping(tuple(tuple(g) for g in groups), params)


def expand_grouped(template: Cpt, grouping: Grouping) -> Cpt:
    """Full-shape CPT in which every row carries its group's shared distribution."""
    check_partition(grouping.groups, template.n_rows)
    rows = np.empty_like(template.rows)
    for k, g in enumerate(grouping.groups):
        rows[list(g)] = grouping.params[k]
    return Cpt(template.child, template.parents, rows)

"""The five structural refinement methods for CPT approximation.

Three of the methods act by forcing groups of CPT rows to share one child
distribution, which the core module can then fit optimally with medians:

* pruning      - drop one parent; rows agreeing on the remaining parents group.
* divorcing    - route a subset of parents through a deterministic logic gate;
                 rows agreeing on (gate output, remaining parents) group.
* SCM          - a single deterministic intermediate node over all parents;
                 any bipartition of the rows is admissible.

The remaining two are causal-interaction models evaluated forward from a
small set of mechanism parameters; their rows are generally all distinct and
there is no closed-form fit (the optimizer module searches them):

* ICI          - one stochastic binary mechanism per parent combined by a
                 deterministic function into the child (noisy-OR is the
                 classic special case).
* SICI         - ICI generalised so blocks of parents share one mechanism.
                 The upper-stochastic (US) variant keeps a deterministic
                 combiner; the double-stochastic (DS) variant replaces it
                 with a stochastic lower table p(y | mechanisms), as does
                 PICI for the per-parent-mechanism case.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cpt import (
    Cpt,
    Grouping,
    Variable,
    config_table,
    expand_grouped,
    fit_grouping,
    param_count,
    score_sum_tvd,
)
from .errors import ShapeMismatchError, ValidationError

GATES = ("AND", "OR", "XOR")


# ---------------------------------------------------------------------------
# Method specs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PruneSpec:
    """Drop the edge from parent ``parent`` to the child."""

    parent: int


@dataclass(frozen=True)
class DivorceSpec:
    """Route ``divorced`` parents through one deterministic logic gate.

    ``binarization`` holds, per divorced parent, the set of its state
    indices that map to gate input 1 (every other state maps to 0). It must
    be a proper nonempty subset of the parent's states.
    """

    divorced: tuple[int, ...]
    gate: str
    binarization: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "divorced", tuple(int(i) for i in self.divorced))
        object.__setattr__(
            self, "binarization", tuple(tuple(sorted(int(s) for s in b)) for b in self.binarization)
        )
        if self.gate not in GATES:
            raise ValidationError(f"gate must be one of {GATES}, got {self.gate!r}")
        if len(self.divorced) < 2:
            raise ValidationError("divorce needs at least 2 parents")
        if len(set(self.divorced)) != len(self.divorced):
            raise ValidationError("divorced parents must be distinct")
        if len(self.binarization) != len(self.divorced):
            raise ValidationError("need one binarization per divorced parent")


@dataclass(frozen=True)
class ScmSpec:
    """Assignment of every CPT row (parent configuration) to block 0 or 1."""

    assignment: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "assignment", tuple(int(a) for a in self.assignment))
        if any(a not in (0, 1) for a in self.assignment):
            raise ValidationError("assignment entries must be 0 or 1")
        if len(set(self.assignment)) != 2:
            raise ValidationError("bipartition must have two nonempty blocks")


@dataclass(frozen=True)
class IciSpec:
    """One binary mechanism per parent plus a deterministic combiner.

    ``mech_cpts[i][s]`` is P(mechanism_i = 1 | parent_i = s). ``combiner``
    assigns a child state to each of the 2^n mechanism configurations,
    indexed mixed-radix with mechanism 0 varying fastest.
    """

    mech_cpts: tuple[tuple[float, ...], ...]
    combiner: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "mech_cpts", tuple(tuple(float(p) for p in v) for v in self.mech_cpts)
        )
        object.__setattr__(self, "combiner", tuple(int(y) for y in self.combiner))
        for v in self.mech_cpts:
            if any(not 0.0 <= p <= 1.0 for p in v):
                raise ValidationError("mechanism probabilities must lie in [0, 1]")
        if len(self.combiner) != 1 << len(self.mech_cpts):
            raise ValidationError(
                f"combiner must cover all {1 << len(self.mech_cpts)} mechanism configurations"
            )


@dataclass(frozen=True)
class SiciSpec:
    """Blocks of parents share binary mechanisms; upper or lower variant.

    ``parent_partition`` is a partition of parent indices; parents in one
    block feed one mechanism. ``mech_cpts[b][c]`` is P(mechanism_b = 1 |
    block b's joint configuration c), joint configurations indexed
    mixed-radix over the block's parents (sorted ascending, first fastest).

    Exactly one of ``combiner`` (deterministic, the US variant) and
    ``lower_cpt`` (stochastic p(y | mechanisms), the DS variant) must be
    given; both are indexed over the 2^m mechanism configurations.
    """

    parent_partition: tuple[tuple[int, ...], ...]
    mech_cpts: tuple[tuple[float, ...], ...]
    combiner: tuple[int, ...] | None = None
    lower_cpt: tuple[tuple[float, ...], ...] | None = None

    def __post_init__(self) -> None:
        part = canonical_partition(self.parent_partition)
        object.__setattr__(self, "parent_partition", part)
        object.__setattr__(
            self, "mech_cpts", tuple(tuple(float(p) for p in v) for v in self.mech_cpts)
        )
        if self.combiner is not None:
            object.__setattr__(self, "combiner", tuple(int(y) for y in self.combiner))
        if self.lower_cpt is not None:
            object.__setattr__(
                self, "lower_cpt", tuple(tuple(float(p) for p in r) for r in self.lower_cpt)
            )
        if (self.combiner is None) == (self.lower_cpt is None):
            raise ValidationError("exactly one of combiner / lower_cpt must be given")
        if len(self.mech_cpts) != len(part):
            raise ValidationError("need one mechanism table per parent block")
        m = len(part)
        table = self.combiner if self.combiner is not None else self.lower_cpt
        if len(table) != 1 << m:
            raise ValidationError(f"need entries for all {1 << m} mechanism configurations")
        for v in self.mech_cpts:
            if any(not 0.0 <= p <= 1.0 for p in v):
                raise ValidationError("mechanism probabilities must lie in [0, 1]")


RefinementSpec = PruneSpec | DivorceSpec | ScmSpec | IciSpec | SiciSpec


@dataclass(frozen=True, eq=False)
class ApproxResult:
    """An expanded full-shape approximate CPT with its score and parameter count."""

    cpt: Cpt
    score: float
    free_params: int


def canonical_partition(blocks: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    """Sort members within blocks and blocks by their smallest member."""
    out = tuple(sorted(tuple(sorted(int(i) for i in b)) for b in blocks))
    seen: set[int] = set()
    for b in out:
        if not b:
            raise ValidationError("empty block in parent partition")
        for i in b:
            if i in seen:
                raise ValidationError(f"parent {i} appears in two blocks")
            seen.add(i)
    return out


# ---------------------------------------------------------------------------
# Grouping constructors: pruning and divorcing
# ---------------------------------------------------------------------------


def prune_groups(parent_cards: Sequence[int], spec: PruneSpec) -> tuple[tuple[int, ...], ...]:
    """Row groups induced by pruning one parent.

    Rows sharing a partial configuration over the remaining parents fall in
    one group, so there are prod(cards)/cards[p] groups of size cards[p].
    """
    cards = tuple(int(c) for c in parent_cards)
    if not 0 <= spec.parent < len(cards):
        raise ValidationError(f"parent index {spec.parent} out of range")
    states = config_table(cards)
    keep = [i for i in range(len(cards)) if i != spec.parent]
    groups: dict[tuple[int, ...], list[int]] = {}
    order: list[tuple[int, ...]] = []
    for k in range(states.shape[0]):
        key = tuple(states[k, keep])
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(k)
    return tuple(tuple(groups[key]) for key in order)


def gate_output(gate: str, bits: Sequence[int]) -> int:
    if gate == "AND":
        return int(all(bits))
    if gate == "OR":
        return int(any(bits))
    if gate == "XOR":
        return sum(bits) % 2
    raise ValidationError(f"unknown gate {gate!r}")


def divorce_groups(parent_cards: Sequence[int], spec: DivorceSpec) -> tuple[tuple[int, ...], ...]:
    """Row groups induced by divorcing a parent subset through a logic gate.

    Rows sharing the gate output on the binarized divorced parents and the
    partial configuration over the remaining parents share a group.
    """
    cards = tuple(int(c) for c in parent_cards)
    ones: dict[int, frozenset[int]] = {}
    for i, b in zip(spec.divorced, spec.binarization):
        if not 0 <= i < len(cards):
            raise ValidationError(f"parent index {i} out of range")
        sub = frozenset(b)
        if not sub or len(sub) >= cards[i] or any(not 0 <= s < cards[i] for s in sub):
            raise ValidationError(
                f"binarization for parent {i} must be a proper nonempty subset of its states"
            )
        ones[i] = sub
    remaining = [i for i in range(len(cards)) if i not in ones]
    states = config_table(cards)
    groups: dict[tuple[int, ...], list[int]] = {}
    order: list[tuple[int, ...]] = []
    for k in range(states.shape[0]):
        bits = [1 if states[k, i] in ones[i] else 0 for i in spec.divorced]
        key = (gate_output(spec.gate, bits),) + tuple(states[k, remaining])
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(k)
    return tuple(tuple(groups[key]) for key in order)


def default_binarization(
    parent_cards: Sequence[int],
    divorced: Sequence[int],
    overrides: dict[int, Sequence[int]] | None = None,
) -> tuple[tuple[int, ...], ...]:
    """Binarization tuple for a divorce spec: state 1 maps to gate input 1
    for binary parents unless overridden; wider parents must be overridden."""
    overrides = overrides or {}
    out = []
    for i in divorced:
        if i in overrides:
            out.append(tuple(sorted(int(s) for s in overrides[i])))
        elif parent_cards[i] == 2:
            out.append((1,))
        else:
            raise ValidationError(
                f"parent {i} has {parent_cards[i]} states; choose which map to gate input 1"
            )
    return tuple(out)


def _proper_subsets(card: int):
    """Proper nonempty subsets of range(card), smallest first, lexicographic."""
    for size in range(1, card):
        yield from itertools.combinations(range(card), size)


# ---------------------------------------------------------------------------
# Fitted searches over the grouping methods
# ---------------------------------------------------------------------------


def _fit_and_score(truth: Cpt, groups: Sequence[Sequence[int]]) -> tuple[Grouping, Cpt, float]:
    grouping = fit_grouping(truth, groups)
    approx = expand_grouped(truth, grouping)
    return grouping, approx, score_sum_tvd(truth, approx)


def prune_best(truth: Cpt) -> tuple[PruneSpec, ApproxResult]:
    """Best single-parent prune under sum-TVD; ties go to the lowest index."""
    if len(truth.parents) < 2:
        raise ValidationError("pruning needs at least 2 parents")
    best: tuple[PruneSpec, ApproxResult] | None = None
    for p in range(len(truth.parents)):
        spec = PruneSpec(p)
        _, approx, score = _fit_and_score(truth, prune_groups(truth.parent_cards, spec))
        if best is None or score < best[1].score:
            free, _ = param_savings(spec, truth.parent_cards, truth.child.cardinality)
            best = (spec, ApproxResult(approx, score, free))
    return best


def divorce_best(truth: Cpt, block_size: int = 2) -> tuple[DivorceSpec, ApproxResult]:
    """Exhaustive search over divorces of ``block_size`` parents.

    Searches every parent subset of that size, every gate, and every proper
    binarization of each divorced parent. Ties break lexicographically on
    (parent subset, gate, binarization) because subsets, gates and subsets
    of states are iterated in sorted order and only strict improvements are
    kept.
    """
    n = len(truth.parents)
    if not 2 <= block_size < n:
        raise ValidationError(f"block size must be in [2, {n - 1}], got {block_size}")
    cards = truth.parent_cards
    best: tuple[DivorceSpec, ApproxResult] | None = None
    for subset in itertools.combinations(range(n), block_size):
        for gate in GATES:
            for binar in itertools.product(*(_proper_subsets(cards[i]) for i in subset)):
                spec = DivorceSpec(subset, gate, binar)
                _, approx, score = _fit_and_score(truth, divorce_groups(cards, spec))
                if best is None or score < best[1].score:
                    free, _ = param_savings(spec, cards, truth.child.cardinality)
                    best = (spec, ApproxResult(approx, score, free))
    return best


def scm_fit(truth: Cpt, spec: ScmSpec) -> ApproxResult:
    """Median-fit the two row blocks of a simple-canonical-model bipartition."""
    if len(spec.assignment) != truth.n_rows:
        raise ShapeMismatchError(
            f"assignment covers {len(spec.assignment)} rows, CPT has {truth.n_rows}"
        )
    blocks = (
        tuple(k for k, a in enumerate(spec.assignment) if a == 0),
        tuple(k for k, a in enumerate(spec.assignment) if a == 1),
    )
    _, approx, score = _fit_and_score(truth, blocks)
    free, _ = param_savings(spec, truth.parent_cards, truth.child.cardinality)
    return ApproxResult(approx, score, free)


# ---------------------------------------------------------------------------
# Causal-interaction evaluators
# ---------------------------------------------------------------------------


def _require_binary(child: Variable) -> None:
    if child.cardinality != 2:
        raise ValidationError("deterministic-combiner models require a binary child")


def _mech_config_products(
    mech_p1: np.ndarray,
) -> np.ndarray:
    """Joint mechanism probabilities per row.

    ``mech_p1`` has shape (n_rows, m) holding P(M_b = 1 | row). Returns an
    (n_rows, 2^m) array whose column j is the probability of the mechanism
    configuration with bit pattern j (mechanism 0 in bit 0).
    """
    n_rows, m = mech_p1.shape
    out = np.ones((n_rows, 1 << m))
    for b in range(m):
        bit = (np.arange(1 << m) >> b) & 1
        col = mech_p1[:, b][:, None]
        out *= np.where(bit[None, :] == 1, col, 1.0 - col)
    return out


def ici_evaluate(child: Variable, parents: Sequence[Variable], spec: IciSpec) -> Cpt:
    """Forward-evaluate an ICI model into a full-shape CPT.

    p(y | x) = sum over mechanism configurations m with f(m) = y of
    prod_i P(m_i | x_i).
    """
    _require_binary(child)
    parents = tuple(parents)
    if len(spec.mech_cpts) != len(parents):
        raise ShapeMismatchError("need one mechanism table per parent")
    for v, p in zip(spec.mech_cpts, parents):
        if len(v) != p.cardinality:
            raise ShapeMismatchError(f"mechanism table for {p.name} has wrong length")
    if any(not 0 <= y < child.cardinality for y in spec.combiner):
        raise ValidationError("combiner assigns an unknown child state")
    cards = tuple(p.cardinality for p in parents)
    states = config_table(cards)
    mech_p1 = np.stack(
        [np.asarray(v)[states[:, i]] for i, v in enumerate(spec.mech_cpts)], axis=1
    )
    joint = _mech_config_products(mech_p1)
    comb = np.asarray(spec.combiner)
    rows = np.stack([joint[:, comb == y].sum(axis=1) for y in range(child.cardinality)], axis=1)
    return Cpt(child, parents, rows)


def noisy_or(inhibition: Sequence[float]) -> IciSpec:
    """Classic noisy-OR as an ICI spec over binary parents.

    ``inhibition[i]`` is the probability that parent i's active state is
    inhibited; an inactive parent can never trigger its mechanism. The
    combiner is OR over the mechanisms.
    """
    probs = [float(p) for p in inhibition]
    if any(not 0.0 <= p <= 1.0 for p in probs):
        raise ValidationError("inhibition probabilities must lie in [0, 1]")
    n = len(probs)
    mech = tuple((0.0, 1.0 - p) for p in probs)
    combiner = tuple(0 if j == 0 else 1 for j in range(1 << n))
    return IciSpec(mech, combiner)


def noisy_or_closed_form(
    child: Variable, parents: Sequence[Variable], inhibition: Sequence[float]
) -> Cpt:
    """Noisy-OR via its product closed form: P(Y=0 | x) = prod over active parents of p_i."""
    _require_binary(child)
    cards = tuple(p.cardinality for p in parents)
    if any(c != 2 for c in cards):
        raise ValidationError("noisy-OR requires binary parents")
    states = config_table(cards)
    probs = np.asarray(list(inhibition), dtype=np.float64)
    p0 = np.where(states == 1, probs[None, :], 1.0).prod(axis=1)
    return Cpt(child, tuple(parents), np.stack([p0, 1.0 - p0], axis=1))


def _as_mech_matrix(v, card: int) -> np.ndarray:
    """Mechanism table for one parent as a (card, mech_card) matrix.

    A 1-D vector of length ``card`` is the binary shorthand P(M=1 | x).
    """
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim == 1:
        if arr.shape[0] != card:
            raise ShapeMismatchError(f"mechanism vector has length {arr.shape[0]}, want {card}")
        return np.stack([1.0 - arr, arr], axis=1)
    if arr.ndim == 2 and arr.shape[0] == card:
        return arr
    raise ShapeMismatchError(f"mechanism table has shape {arr.shape}, want ({card}, mech_card)")


def pici_evaluate(
    child: Variable,
    parents: Sequence[Variable],
    mech_cpts: Sequence,
    lower_cpt: np.ndarray,
) -> Cpt:
    """Forward-evaluate a PICI model: ICI with a stochastic lower table.

    p(y | x) = sum over all mechanism configurations m of
    p(y | m) * prod_i P(m_i | x_i). Mechanisms may have any cardinality here
    (the noisy-average model gives them the child's state space); pass 2-D
    per-parent tables for that, or 1-D P(M=1 | x) vectors for binary.
    """
    parents = tuple(parents)
    if len(mech_cpts) != len(parents):
        raise ShapeMismatchError("need one mechanism table per parent")
    mats = [_as_mech_matrix(v, p.cardinality) for v, p in zip(mech_cpts, parents)]
    mech_cards = [m.shape[1] for m in mats]
    lower = np.asarray(lower_cpt, dtype=np.float64)
    if lower.shape != (math.prod(mech_cards), child.cardinality):
        raise ShapeMismatchError(
            f"lower table must have shape ({math.prod(mech_cards)}, {child.cardinality})"
        )
    if np.any(np.abs(lower.sum(axis=1) - 1.0) > 1e-9):
        raise ValidationError("lower table rows must sum to 1")
    cards = tuple(p.cardinality for p in parents)
    states = config_table(cards)
    mech_states = config_table(mech_cards)
    joint = np.ones((states.shape[0], mech_states.shape[0]))
    for i, mat in enumerate(mats):
        joint *= mat[states[:, i][:, None], mech_states[:, i][None, :]]
    return Cpt(child, parents, joint @ lower)


def noisy_average_lower(n_mechs: int, card: int) -> np.ndarray:
    """Lower table of the noisy-average model: p(y | m) = |{i : m_i = y}| / n.

    Mechanisms share the child's state space, so the table has card^n rows.
    """
    mech_states = config_table([card] * n_mechs)
    return np.stack(
        [(mech_states == y).sum(axis=1) / n_mechs for y in range(card)], axis=1
    )


def _block_config_index(
    states: np.ndarray, block: Sequence[int], cards: Sequence[int]
) -> np.ndarray:
    """Mixed-radix index of each row's joint configuration over one parent block."""
    idx = np.zeros(states.shape[0], dtype=np.int64)
    stride = 1
    for i in block:
        idx += states[:, i] * stride
        stride *= cards[i]
    return idx


def _sici_mech_p1(
    spec: SiciSpec, parents: Sequence[Variable]
) -> np.ndarray:
    cards = tuple(p.cardinality for p in parents)
    flat = [i for b in spec.parent_partition for i in b]
    if sorted(flat) != list(range(len(parents))):
        raise ShapeMismatchError("parent partition must cover exactly the parents")
    states = config_table(cards)
    cols = []
    for block, table in zip(spec.parent_partition, spec.mech_cpts):
        size = math.prod(cards[i] for i in block)
        if len(table) != size:
            raise ShapeMismatchError(
                f"mechanism table for block {block} has {len(table)} entries, want {size}"
            )
        cols.append(np.asarray(table)[_block_config_index(states, block, cards)])
    return np.stack(cols, axis=1)


def us_sici_evaluate(child: Variable, parents: Sequence[Variable], spec: SiciSpec) -> Cpt:
    """Forward-evaluate an upper-stochastic SICI model.

    p(y | x) = sum over mechanism configurations m with f(m) = y of
    prod_b P(m_b | x's configuration within block b).
    """
    _require_binary(child)
    if spec.combiner is None:
        raise ValidationError("US variant needs a combiner; this spec has a lower table")
    if any(not 0 <= y < child.cardinality for y in spec.combiner):
        raise ValidationError("combiner assigns an unknown child state")
    joint = _mech_config_products(_sici_mech_p1(spec, parents))
    comb = np.asarray(spec.combiner)
    rows = np.stack([joint[:, comb == y].sum(axis=1) for y in range(child.cardinality)], axis=1)
    return Cpt(child, tuple(parents), rows)


def ds_sici_evaluate(child: Variable, parents: Sequence[Variable], spec: SiciSpec) -> Cpt:
    """Forward-evaluate a double-stochastic SICI model.

    p(y | x) = sum over all mechanism configurations m of
    p(y | m) * prod_b P(m_b | x's configuration within block b).
    """
    if spec.lower_cpt is None:
        raise ValidationError("DS variant needs a lower table; this spec has a combiner")
    lower = np.asarray(spec.lower_cpt, dtype=np.float64)
    if lower.shape != (1 << len(spec.parent_partition), child.cardinality):
        raise ShapeMismatchError("lower table shape does not match the mechanism count")
    if np.any(np.abs(lower.sum(axis=1) - 1.0) > 1e-9):
        raise ValidationError("lower table rows must sum to 1")
    joint = _mech_config_products(_sici_mech_p1(spec, parents))
    return Cpt(child, tuple(parents), joint @ lower)


# ---------------------------------------------------------------------------
# Parameter accounting
# ---------------------------------------------------------------------------


def param_savings(
    spec: RefinementSpec, parent_cards: Sequence[int], child_card: int
) -> tuple[int, int]:
    """Free-parameter count of a refinement and its saving vs the full CPT.

    Counts generalise the all-binary formulas by taking products of block
    cardinalities: a binary mechanism over a parent block costs one free
    parameter per joint configuration of the block.
    """
    cards = tuple(int(c) for c in parent_cards)
    full = param_count(cards, child_card)
    if isinstance(spec, PruneSpec):
        free = (math.prod(cards) // cards[spec.parent]) * (child_card - 1)
    elif isinstance(spec, DivorceSpec):
        remaining = [c for i, c in enumerate(cards) if i not in spec.divorced]
        free = 2 * math.prod(remaining) * (child_card - 1)
    elif isinstance(spec, ScmSpec):
        free = 2 * (child_card - 1)
    elif isinstance(spec, IciSpec):
        free = sum(cards)
    elif isinstance(spec, SiciSpec):
        free = sum(math.prod(cards[i] for i in b) for b in spec.parent_partition)
        if spec.lower_cpt is not None:
            free += (1 << len(spec.parent_partition)) * (child_card - 1)
    else:
        raise ValidationError(f"unknown spec type {type(spec).__name__}")
    return free, full - free


def evaluate_spec(truth: Cpt, spec: RefinementSpec) -> ApproxResult:
    """Expand any refinement spec against a truth CPT and score it.

    Grouping methods (prune / divorce / SCM) are median-fitted to the truth;
    parametric models (ICI / SICI) are evaluated forward from their stored
    parameters.
    """
    cards = truth.parent_cards
    if isinstance(spec, PruneSpec):
        _, approx, score = _fit_and_score(truth, prune_groups(cards, spec))
    elif isinstance(spec, DivorceSpec):
        _, approx, score = _fit_and_score(truth, divorce_groups(cards, spec))
    elif isinstance(spec, ScmSpec):
        return scm_fit(truth, spec)
    elif isinstance(spec, IciSpec):
        approx = ici_evaluate(truth.child, truth.parents, spec)
        score = score_sum_tvd(truth, approx)
    elif isinstance(spec, SiciSpec):
        evaluate = us_sici_evaluate if spec.combiner is not None else ds_sici_evaluate
        approx = evaluate(truth.child, truth.parents, spec)
        score = score_sum_tvd(truth, approx)
    else:
        raise ValidationError(f"unknown spec type {type(spec).__name__}")
    free, _ = param_savings(spec, cards, truth.child.cardinality)
    return ApproxResult(approx, score, free)

"""Classical (tensor) multivariate cumulants over the set-partition lattice.

Moment and cumulant tables are multiplicative functionals on set partitions:
the value at a partition is the product of the values of its blocks.  Tables
are therefore stored per sorted subset of positions.  For matrix arguments the
expectation is the normalized trace of the ordered product, computed in exact
rational arithmetic; the floating (sample-based) path is kept separate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from .partperm import SetPartition, mobius, set_partitions


def _subsets_by_size(k):
    out = [()]
    for i in range(k):
        out += [s + (i,) for s in out]
    return sorted((s for s in out if s), key=lambda s: (len(s), s))


@dataclass(frozen=True)
class _SubsetTable:
    """Scalar for every nonempty sorted subset of {0..k-1}; multiplicative
    extension to set partitions."""

    order: int
    values: Mapping[tuple[int, ...], object]

    def __post_init__(self):
        expected = set(_subsets_by_size(self.order))
        if set(self.values) != expected:
            raise ValueError("table must cover every nonempty subset exactly once")

    def block_value(self, subset):
        return self.values[tuple(sorted(subset))]

    def value(self, v: SetPartition):
        if v.size != self.order:
            raise ValueError("partition size does not match table order")
        result = 1
        for blk in v.blocks():
            result = result * self.block_value(blk)
        return result

    def top(self):
        return self.block_value(tuple(range(self.order)))


class MomentTable(_SubsetTable):
    """E_V: per-block joint moments, extended multiplicatively."""

    @classmethod
    def from_function(cls, k: int, joint_moment: Callable) -> "MomentTable":
        """joint_moment(subset) is the expectation of the ordered product of
        the variables at the given (sorted) positions."""
        return cls(k, {s: joint_moment(s) for s in _subsets_by_size(k)})

    @classmethod
    def from_partition_values(cls, k: int, table: Mapping) -> "MomentTable":
        """Build from a full map SetPartition -> value; rejects input that is
        not multiplicative over blocks."""
        values = {}
        for part, val in table.items():
            if part.num_blocks() == 1:
                values[part.blocks()[0]] = val
        candidate = cls(k, values)
        for part, val in table.items():
            if candidate.value(part) != val:
                raise ValueError(f"moment table is not multiplicative at {part}")
        return candidate


class CumulantTable(_SubsetTable):
    """k_V: per-block joint cumulants, extended multiplicatively."""


def moments_to_cumulants(m: MomentTable) -> CumulantTable:
    """Invert sum_{W <= V} k_W = E_V by Mobius inversion on every subset."""
    values = {}
    for subset in _subsets_by_size(m.order):
        total = 0
        for p in set_partitions(len(subset)):
            term = mobius(p, SetPartition.full(len(subset)))
            for blk in p.blocks():
                term = term * m.block_value(tuple(subset[i] for i in blk))
            total = total + term
        values[subset] = total
    return CumulantTable(m.order, values)


def cumulants_to_moments(c: CumulantTable) -> MomentTable:
    """E_V = sum_{W <= V} k_W, evaluated per subset."""
    values = {}
    for subset in _subsets_by_size(c.order):
        total = 0
        for p in set_partitions(len(subset)):
            term = 1
            for blk in p.blocks():
                term = term * c.block_value(tuple(subset[i] for i in blk))
            total = total + term
        values[subset] = total
    return MomentTable(c.order, values)


def cumulant_of_products(c: CumulantTable, grouping: SetPartition):
    """Joint cumulant of the blockwise products, by Leonov-Shiryaev:
    k(products over the blocks of the grouping) = sum of k_W over partitions
    W whose join with the grouping is the full partition."""
    if grouping.size != c.order:
        raise ValueError("grouping size does not match table order")
    for blk in grouping.blocks():
        if list(blk) != list(range(blk[0], blk[-1] + 1)):
            raise ValueError("grouping must be an interval partition")
    full = SetPartition.full(c.order)
    total = 0
    for w in set_partitions(c.order):
        if w.join(grouping) == full:
            total = total + c.value(w)
    return total


# -- exact matrix arguments ------------------------------------------------

def mat_mul(a, b):
    n = len(a)
    return tuple(tuple(sum(a[i][t] * b[t][j] for t in range(n))
                       for j in range(n)) for i in range(n))


def mat_sub(a, b):
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def normalized_trace(a) -> Fraction:
    return Fraction(sum(a[i][i] for i in range(len(a))), len(a))


def matrix_moment_table(matrices: Sequence) -> MomentTable:
    """Moments of a tuple of square matrices under the normalized trace,
    products taken left-to-right in the listed order."""
    def joint(subset):
        prod = matrices[subset[0]]
        for i in subset[1:]:
            prod = mat_mul(prod, matrices[i])
        return normalized_trace(prod)
    return MomentTable.from_function(len(matrices), joint)


def merge_adjacent(w: SetPartition, i: int) -> SetPartition:
    """Merge elements i and i+1 of {0..k-1} into one and relabel the rest."""
    blocks = []
    for blk in w.blocks():
        blocks.append([e if e <= i else e - 1 for e in blk if e != i + 1])
    return SetPartition.from_blocks(w.size - 1, blocks)


def commutator_cumulant_sides(matrices: Sequence, i: int, w: SetPartition):
    """Both sides of the swap/commutator identity for tensor cumulants.

    Returns (k_W(..., a_i, a_{i+1}, ...) - k_W(..., a_{i+1}, a_i, ...),
             k_{W'}(..., [a_i, a_{i+1}], ...))
    where W' merges positions i and i+1.  W must connect i and i+1.
    """
    k = len(matrices)
    if not (0 <= i < k - 1):
        raise ValueError("position out of range")
    if not w.same_block(i, i + 1):
        raise ValueError("partition does not connect i and i+1")
    swapped = list(matrices)
    swapped[i], swapped[i + 1] = swapped[i + 1], swapped[i]
    lhs = (moments_to_cumulants(matrix_moment_table(matrices)).value(w)
           - moments_to_cumulants(matrix_moment_table(swapped)).value(w))

    bracket = mat_sub(mat_mul(matrices[i], matrices[i + 1]),
                      mat_mul(matrices[i + 1], matrices[i]))
    merged = list(matrices[:i]) + [bracket] + list(matrices[i + 2:])
    w_merged = merge_adjacent(w, i)
    rhs = moments_to_cumulants(matrix_moment_table(merged)).value(w_merged)
    return lhs, rhs


# -- sample-based estimation -----------------------------------------------

@dataclass(frozen=True)
class CumulantEstimate:
    value: complex
    stderr: float
    bootstrap_count: int


def plugin_cumulant(samples: np.ndarray) -> complex:
    """Plug-in joint cumulant of the columns of a (replicas, k) array.

    For orders >= 2 the data is centered first: joint cumulants are
    translation invariant, and centering removes the cancellation error that
    would otherwise leave round-off residue on deterministic input.
    """
    k = samples.shape[1]
    if k == 1:
        return np.mean(samples[:, 0])
    samples = samples - samples.mean(axis=0, keepdims=True)
    total = 0
    for p in set_partitions(k):
        if any(len(blk) == 1 for blk in p.blocks()):
            continue     # centered first moments vanish identically
        term = mobius(p, SetPartition.full(k))
        for blk in p.blocks():
            term = term * np.mean(np.prod(samples[:, list(blk)], axis=1))
        total = total + term
    return total


def estimate_cumulants(samples: np.ndarray, columns: Sequence[int],
                       n_boot: int = 200,
                       rng: np.random.Generator | None = None) -> CumulantEstimate:
    """Plug-in estimate of the joint cumulant of the selected columns, with a
    nonparametric-bootstrap standard error.

    The plug-in estimator (empirical moments, then Mobius inversion) is biased
    at O(1/replicas); at the replica counts used here the bias is negligible
    against the Monte-Carlo noise.
    """
    samples = np.asarray(samples)
    if samples.ndim != 2 or samples.shape[0] < 2:
        raise ValueError("need a 2d array with at least 2 replicas")
    if len(columns) > 4:
        raise ValueError("estimation is supported for joint orders <= 4")
    sub = samples[:, list(columns)]
    point = plugin_cumulant(sub)
    if rng is None:
        rng = np.random.default_rng(0)
    reps = sub.shape[0]
    boots = np.empty(n_boot, dtype=complex)
    for b in range(n_boot):
        idx = rng.integers(0, reps, size=reps)
        boots[b] = plugin_cumulant(sub[idx])
    stderr = float(np.sqrt(np.var(boots.real, ddof=1) + np.var(boots.imag, ddof=1)))
    return CumulantEstimate(value=point, stderr=stderr, bootstrap_count=n_boot)

"""First-order free probability in moment coordinates.

Moment sequences are plain sequences (m_1, ..., m_K) with m_0 = 1 implicit;
free cumulant sequences are shaped likewise.  Everything is truncated at a
declared order K, so no analytic R-transform machinery is needed: the
transforms run over non-crossing partitions, free additive convolution adds
free cumulants orderwise, and compression by a free projector of trace alpha
rescales kappa_m by alpha^(m-1).
"""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

from .errors import GuardError
from .partperm import SetPartition

# Catalan growth is tame but enumeration is cached; keep the cap documented.
NONCROSSING_LIMIT = 12


def _nc_blocks(elems: tuple[int, ...]):
    if not elems:
        yield ()
        return
    first, rest = elems[0], elems[1:]
    for r in range(len(rest) + 1):
        for picks in _increasing_subsets(rest, r):
            block = (first,) + picks
            chosen = set(block)
            others = [e for e in rest if e not in chosen]
            # remaining elements split into independent gaps between
            # consecutive block elements, plus the tail after the last one
            segments = [tuple(e for e in others if lo < e < hi)
                        for lo, hi in zip(block, block[1:])]
            segments.append(tuple(e for e in others if e > block[-1]))
            for sub in _product_of_nc(segments):
                yield (block,) + sub


def _increasing_subsets(elems, r):
    if r == 0:
        yield ()
        return
    for i, e in enumerate(elems):
        for tail in _increasing_subsets(elems[i + 1:], r - 1):
            yield (e,) + tail


def _product_of_nc(segments):
    if not segments:
        yield ()
        return
    for head in _nc_blocks(segments[0]):
        for tail in _product_of_nc(segments[1:]):
            yield head + tail


@lru_cache(maxsize=None)
def noncrossing_partitions(k: int) -> tuple[SetPartition, ...]:
    """All non-crossing partitions of {0..k-1} (Catalan(k) of them)."""
    if k > NONCROSSING_LIMIT:
        raise GuardError(
            f"non-crossing enumeration is limited to k <= {NONCROSSING_LIMIT}")
    return tuple(SetPartition.from_blocks(k, blocks)
                 for blocks in _nc_blocks(tuple(range(k))))


def free_cumulants_to_moments(kappa: Sequence) -> list:
    """m_n = sum over non-crossing partitions of products of kappa_|block|."""
    moments = []
    for n in range(1, len(kappa) + 1):
        total = 0
        for p in noncrossing_partitions(n):
            term = 1
            for blk in p.blocks():
                term = term * kappa[len(blk) - 1]
            total = total + term
        moments.append(total)
    return moments


def moments_to_free_cumulants(moments: Sequence) -> list:
    """Inverse of free_cumulants_to_moments, solved order by order."""
    kappa: list = []
    for n in range(1, len(moments) + 1):
        partial = 0
        for p in noncrossing_partitions(n):
            if p.num_blocks() == 1:
                continue
            term = 1
            for blk in p.blocks():
                term = term * kappa[len(blk) - 1]
            partial = partial + term
        kappa.append(moments[n - 1] - partial)
    return kappa


def free_convolve(a: Sequence, b: Sequence, order: int | None = None) -> list:
    """Moments of the free additive convolution, to the requested order."""
    if order is None:
        order = min(len(a), len(b))
    if len(a) < order or len(b) < order:
        raise ValueError("both inputs must be defined to the requested order")
    ka = moments_to_free_cumulants(list(a)[:order])
    kb = moments_to_free_cumulants(list(b)[:order])
    return free_cumulants_to_moments([x + y for x, y in zip(ka, kb)])


def free_compress(moments: Sequence, alpha, order: int | None = None) -> list:
    """Moments after compression by a free projector of trace alpha:
    kappa_m -> alpha^(m-1) kappa_m in free-cumulant coordinates."""
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if order is None:
        order = len(moments)
    kappa = moments_to_free_cumulants(list(moments)[:order])
    scaled = [alpha ** m * k for m, k in enumerate(kappa)]
    return free_cumulants_to_moments(scaled)


def atomic_moments(atoms: Sequence[tuple], order: int) -> list:
    """Moments of a finitely supported measure given as (location, weight)."""
    return [sum(w * x ** n for x, w in atoms) for n in range(1, order + 1)]


def semicircle_moments(variance, order: int) -> list:
    """Moments of the centered semicircle law (kappa_2 = variance)."""
    kappa = ([0, variance] + [0] * (order - 2)) if order >= 2 else [0] * order
    return free_cumulants_to_moments(kappa[:order])


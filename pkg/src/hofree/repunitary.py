"""Exact spectral data of U(n) irreducible representations.

Irreducibles are indexed by their shifted highest weight l (strictly
decreasing integers, l_i = lambda_i + n - i); ordinary highest weights appear
only at API boundaries.  The module computes Weyl dimensions, the uniform
("naive") and weighted ("natural") spectral measures, the triangular
conversion between their moments, tensor-product decompositions
(Littlewood-Richardson and the one-row Pieri special case), restriction to
smaller unitary groups, and exact statistics of the probability distribution
that weights each irreducible component by multiplicity times dimension.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Sequence

from .errors import GuardError

LR_MAX_RANK = 8
LR_MAX_CELLS = 40
PUSHFORWARD_MAX_COMPONENTS = 10 ** 7


@dataclass(frozen=True, order=True)
class ShiftedWeight:
    """Strictly decreasing integer vector indexing a U(n) irreducible."""

    entries: tuple[int, ...]

    def __post_init__(self):
        if any(a <= b for a, b in zip(self.entries, self.entries[1:])):
            raise ValueError(f"entries must be strictly decreasing: {self.entries}")

    @classmethod
    def from_highest_weight(cls, lam: Sequence[int]) -> "ShiftedWeight":
        n = len(lam)
        if any(a < b for a, b in zip(lam, lam[1:])):
            raise ValueError(f"highest weight must be weakly decreasing: {lam}")
        return cls(tuple(x + n - 1 - i for i, x in enumerate(lam)))

    @property
    def n(self) -> int:
        return len(self.entries)

    def highest_weight(self) -> tuple[int, ...]:
        n = self.n
        return tuple(x - (n - 1 - i) for i, x in enumerate(self.entries))

    def shift(self, s: int) -> "ShiftedWeight":
        """The determinant twist: all entries moved by s."""
        return ShiftedWeight(tuple(x + s for x in self.entries))

    def power_sum(self, k: int) -> int:
        return sum(x ** k for x in self.entries)


@lru_cache(maxsize=None)
def _weyl_dimension_cached(entries: tuple[int, ...]) -> int:
    num = 1
    den = 1
    n = len(entries)
    for i in range(n):
        for j in range(i + 1, n):
            num *= entries[i] - entries[j]
            den *= j - i
    dim, rem = divmod(num, den)
    assert rem == 0
    return dim


def weyl_dimension(l: ShiftedWeight) -> int:
    """dim = prod_{i<j} (l_i - l_j) / (j - i); always an exact integer."""
    return _weyl_dimension_cached(l.entries)


@dataclass(frozen=True)
class AtomicMeasure:
    """Finitely supported signed measure; atoms sorted by location."""

    atoms: tuple[tuple[object, Fraction], ...]

    @classmethod
    def from_pairs(cls, pairs) -> "AtomicMeasure":
        merged: dict = {}
        for loc, w in pairs:
            merged[loc] = merged.get(loc, 0) + w
        atoms = tuple(sorted((loc, w) for loc, w in merged.items() if w != 0))
        return cls(atoms)

    def total(self):
        return sum(w for _, w in self.atoms)

    def moment(self, k: int):
        return sum(w * loc ** k for loc, w in self.atoms)

    def translate(self, s) -> "AtomicMeasure":
        return AtomicMeasure(tuple((loc + s, w) for loc, w in self.atoms))

    def dilate(self, eps) -> "AtomicMeasure":
        return AtomicMeasure.from_pairs((eps * loc, w) for loc, w in self.atoms)


def naive_spectral_measure(l: ShiftedWeight) -> AtomicMeasure:
    """Uniform weight 1/n on each entry of the shifted weight."""
    w = Fraction(1, l.n)
    return AtomicMeasure.from_pairs((x, w) for x in l.entries)


def zelobenko_weights(l: ShiftedWeight) -> tuple[Fraction, ...]:
    """gamma_i = (1/n) prod_{j != i} (1 - 1/(l_i - l_j)); sums to one."""
    n = l.n
    out = []
    for i, li in enumerate(l.entries):
        g = Fraction(1, n)
        for j, lj in enumerate(l.entries):
            if j != i:
                d = li - lj
                g *= Fraction(d - 1, d)
        out.append(g)
    assert sum(out) == 1
    return tuple(out)


def natural_spectral_measure(l: ShiftedWeight) -> AtomicMeasure:
    """Atoms gamma_i at l_i; atoms of weight zero are dropped."""
    return AtomicMeasure.from_pairs(zip(l.entries, zelobenko_weights(l)))


def natural_moment_via_matrix(l: ShiftedWeight, k: int) -> Fraction:
    """(1/n) * (sum of all entries of (L + J)^k), J strictly upper of -1."""
    if k < 0:
        raise ValueError("moment order must be nonnegative")
    n = l.n
    m = [[l.entries[i] if i == j else (-1 if j > i else 0)
          for j in range(n)] for i in range(n)]
    power = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(k):
        power = [[sum(power[i][t] * m[t][j] for t in range(n))
                  for j in range(n)] for i in range(n)]
    return Fraction(sum(sum(row) for row in power), n)


# -- conversion between naive and natural moments ----------------------------

def _series_mul(a, b, qmax, smax):
    out: dict = {}
    for (qa, sa), ca in a.items():
        for (qb, sb), cb in b.items():
            q, s = qa + qb, sa + sb
            if q <= qmax and s <= smax:
                out[(q, s)] = out.get((q, s), Fraction(0)) + ca * cb
    return out


def _chain_sums(n: int, psums: Sequence, qmax: int, smax: int) -> dict:
    """T[(q, s)] = sum over q-element subsets S of the spectrum of the
    complete homogeneous polynomial h_s on S, from power sums alone.

    Generating function: prod_i (1 + u/(1 - t x_i)); its logarithm is
    sum_r (-1)^(r-1) u^r/r * sum_s binom(s+r-1, r-1) p_s t^s with p_0 = n.
    """
    p = [Fraction(n)] + [Fraction(x) for x in psums]
    log_g: dict = {}
    for r in range(1, qmax + 1):
        base = Fraction((-1) ** (r - 1), r)
        for s in range(0, smax + 1):
            if s >= len(p):
                break
            c = base * comb(s + r - 1, r - 1) * p[s]
            if c:
                log_g[(r, s)] = log_g.get((r, s), Fraction(0)) + c
    total = {(0, 0): Fraction(1)}
    term = {(0, 0): Fraction(1)}
    for m in range(1, qmax + 1):
        term = _series_mul(term, log_g, qmax, smax)
        term = {k: v / m for k, v in term.items()}
        for k, v in term.items():
            total[k] = total.get(k, Fraction(0)) + v
    return total


def naive_to_natural_moments(n: int, naive: Sequence) -> list:
    """Natural moments m_1..m_K from naive moments of the same weight.

    Implements the triangular expansion of n*m_k in the power sums of the
    shifted weight (p_0 = n, p_s = n * naive_s).
    """
    order = len(naive)
    psums = [n * Fraction(x) for x in naive]
    t = _chain_sums(n, psums, order + 1, order)
    out = []
    for k in range(1, order + 1):
        total = Fraction(0)
        for q in range(1, k + 2):
            s = k - q + 1
            if s >= 0:
                total += (-1) ** (q - 1) * t.get((q, s), Fraction(0))
        out.append(total / n)
    return out


def natural_to_naive_moments(n: int, natural: Sequence) -> list:
    """Inverse of naive_to_natural_moments, solved order by order."""
    order = len(natural)
    psums: list = []
    out = []
    for k in range(1, order + 1):
        t = _chain_sums(n, psums, k + 1, k - 1)
        correction = Fraction(0)
        for q in range(2, k + 2):
            s = k - q + 1
            if s >= 0:
                correction += (-1) ** (q - 1) * t.get((q, s), Fraction(0))
        p_k = n * Fraction(natural[k - 1]) - correction
        psums.append(p_k)
        out.append(p_k / n)
    return out


# -- weighted decompositions --------------------------------------------------

@dataclass(frozen=True)
class WeightedDecomposition:
    """Multiset of irreducible components: shifted weight -> multiplicity."""

    n: int
    components: tuple[tuple[ShiftedWeight, int], ...]

    @classmethod
    def from_dict(cls, n: int, table: dict) -> "WeightedDecomposition":
        items = tuple(sorted(((l, m) for l, m in table.items() if m),
                             key=lambda t: t[0].entries, reverse=True))
        if any(l.n != n for l, _ in items):
            raise ValueError("component rank mismatch")
        if any(m < 0 for _, m in items):
            raise ValueError("multiplicities must be positive")
        return cls(n, items)

    def __len__(self):
        return len(self.components)

    def total_dimension(self) -> int:
        return sum(m * weyl_dimension(l) for l, m in self.components)

    def distribution(self) -> list[tuple[ShiftedWeight, Fraction]]:
        """P(l) = mult * dim / total dim; exact, sums to one."""
        if not self.components:
            raise ValueError("empty decomposition has no distribution")
        total = self.total_dimension()
        return [(l, Fraction(m * weyl_dimension(l), total))
                for l, m in self.components]

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "components": [
                {"l": list(l.entries), "mult": m, "dim": str(weyl_dimension(l))}
                for l, m in self.components
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=False)

    @classmethod
    def from_json(cls, text: str) -> "WeightedDecomposition":
        data = json.loads(text)
        table = {ShiftedWeight(tuple(c["l"])): int(c["mult"])
                 for c in data["components"]}
        return cls.from_dict(int(data["n"]), table)


def sample_component(d: WeightedDecomposition, rng) -> ShiftedWeight:
    """Exact inverse-CDF draw in the deterministic component order."""
    total = d.total_dimension()
    t = _uniform_below(rng, total)
    acc = 0
    for l, m in d.components:
        acc += m * weyl_dimension(l)
        if t < acc:
            return l
    raise AssertionError("unreachable: weights sum to the total dimension")


def _uniform_below(rng, bound: int) -> int:
    # unbiased big-integer uniform draw via rejection on raw bits
    nbits = bound.bit_length()
    nbytes = (nbits + 7) // 8
    excess = nbytes * 8 - nbits
    while True:
        t = int.from_bytes(rng.bytes(nbytes), "big") >> excess
        if t < bound:
            return t


# -- tensor products ----------------------------------------------------------

def _check_highest_weight(lam, n):
    lam = tuple(int(x) for x in lam)
    if len(lam) != n:
        raise ValueError(f"expected {n} entries, got {len(lam)}")
    if any(a < b for a, b in zip(lam, lam[1:])):
        raise ValueError(f"highest weight must be weakly decreasing: {lam}")
    return lam


def lr_tensor_decompose(lam: Sequence[int], mu: Sequence[int],
                        n: int) -> WeightedDecomposition:
    """Decomposition of the tensor product of two irreducibles by enumeration
    of Littlewood-Richardson skew tableaux (column-strict fillings whose
    reverse reading word is a ballot sequence).

    Negative entries are handled by twisting both factors with a power of the
    determinant character, decomposing, and shifting back.
    """
    lam = _check_highest_weight(lam, n)
    mu = _check_highest_weight(mu, n)
    if n > LR_MAX_RANK:
        raise GuardError(f"tensor decomposition is limited to n <= {LR_MAX_RANK}")
    s = -min(lam[-1], 0)
    t = -min(mu[-1], 0)
    lam2 = tuple(x + s for x in lam)
    mu2 = tuple(x + t for x in mu)
    if sum(mu2) > sum(lam2):
        lam2, mu2 = mu2, lam2
    if sum(mu2) > LR_MAX_CELLS:
        raise GuardError(
            f"tensor decomposition needs a factor with at most {LR_MAX_CELLS} "
            f"cells after the determinant twist; got {sum(mu2)}")

    counts: dict[tuple[int, ...], int] = {}

    def place_letter(letter, shape):
        # distribute mu2[letter] cells of this letter row by row
        amount = mu2[letter]
        placements: list[tuple[int, ...]] = []

        def rows(j, prev_cum, cum, current, left):
            if j == n:
                if left == 0:
                    placements.append(tuple(current))
                return
            hi = left
            if j > 0:
                hi = min(hi, shape[j - 1] - shape[j])      # horizontal strip
            if letter > 0:
                # ballot: count of this letter through row j cannot exceed
                # the previous letter's count through row j-1
                bound = prev_cum[j - 1] if j > 0 else 0
                hi = min(hi, bound - cum)
            for a in range(0, hi + 1):
                current.append(shape[j] + a)
                rows(j + 1, prev_cum, cum + a, current, left - a)
                current.pop()

        prev_cum = cum_counts[letter - 1] if letter > 0 else None
        rows(0, prev_cum, 0, [], amount)
        return placements

    def dfs(letter, shape):
        if letter == len(mu2):
            counts[shape] = counts.get(shape, 0) + 1
            return
        for new_shape in place_letter(letter, shape):
            cum = []
            acc = 0
            for j in range(n):
                acc += new_shape[j] - shape[j]
                cum.append(acc)
            cum_counts.append(cum)
            dfs(letter + 1, new_shape)
            cum_counts.pop()

    cum_counts: list[list[int]] = []
    dfs(0, lam2)

    table = {ShiftedWeight.from_highest_weight(
        tuple(x - s - t for x in shape)): c for shape, c in counts.items()}
    result = WeightedDecomposition.from_dict(n, table)
    lhs = _weyl_dimension_cached(ShiftedWeight.from_highest_weight(lam).entries) \
        * _weyl_dimension_cached(ShiftedWeight.from_highest_weight(mu).entries)
    assert lhs == result.total_dimension(), "dimension identity violated"
    return result


def pieri_decompose(lam: Sequence[int], row: int, n: int) -> WeightedDecomposition:
    """Tensor with the one-row representation of the given length: components
    are lam + horizontal strips of that size, each with multiplicity one."""
    lam = _check_highest_weight(lam, n)
    if row < 0:
        raise ValueError("row length must be nonnegative")
    out: dict[ShiftedWeight, int] = {}

    def rows(j, current, left):
        if j == n:
            if left == 0:
                shape = tuple(current)
                out[ShiftedWeight.from_highest_weight(shape)] = 1
            return
        hi = left if j == 0 else min(left, lam[j - 1] - lam[j])
        for a in range(0, hi + 1):
            current.append(lam[j] + a)
            rows(j + 1, current, left - a)
            current.pop()

    rows(0, [], row)
    return WeightedDecomposition.from_dict(n, out)


# -- restriction to U(m) ------------------------------------------------------

def branch_one_step(l: ShiftedWeight) -> list[tuple[ShiftedWeight, Fraction]]:
    """Restriction to U(n-1): interlacing highest weights, multiplicity one,
    probability proportional to dimension."""
    n = l.n
    if n < 2:
        raise ValueError("branching needs n >= 2")
    lam = l.highest_weight()
    dim_l = weyl_dimension(l)
    out = []

    def rec(i, current):
        if i == n - 1:
            w = ShiftedWeight.from_highest_weight(tuple(current))
            out.append((w, Fraction(weyl_dimension(w), dim_l)))
            return
        lo, hi = lam[i + 1], lam[i]
        if current:
            hi = min(hi, current[-1])
        for v in range(hi, lo - 1, -1):
            current.append(v)
            rec(i + 1, current)
            current.pop()

    rec(0, [])
    assert sum(p for _, p in out) == 1
    return out


def _integer_determinant(mat: list[list[int]]) -> int:
    # Bareiss fraction-free elimination
    a = [row[:] for row in mat]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[-1][-1]


def interlacing_chain_count(lam: Sequence[int], target: Sequence[int]) -> int:
    """Number of chains of interlacing weights from lam (n entries) down to
    target (m entries), i.e. column-strict skew fillings of lam/target with
    n - m letters; computed by the Lindstrom-Gessel-Viennot determinant."""
    n, m = len(lam), len(target)
    steps = n - m
    if steps < 0:
        raise ValueError("target must have fewer rows")
    padded = list(target) + [lam[-1]] * steps   # pad at the ambient minimum

    def h(d):
        if d < 0:
            return 0
        return comb(d + steps - 1, d) if steps > 0 else int(d == 0)

    mat = [[h(lam[i] - padded[j] - i + j) for j in range(n)] for i in range(n)]
    return _integer_determinant(mat)


def _restriction_support(lam: Sequence[int], m: int):
    """Weights of U(m) reachable from lam by iterated interlacing, with their
    chain-count-times-dimension weights, in DFS order."""
    n = len(lam)
    steps = n - m

    def rec(i, current):
        if i == m:
            count = interlacing_chain_count(lam, current)
            if count:
                w = ShiftedWeight.from_highest_weight(tuple(current))
                yield w, count * weyl_dimension(w)
            return
        lo, hi = lam[i + steps], lam[i]
        if current:
            hi = min(hi, current[-1])
        for v in range(hi, lo - 1, -1):
            current.append(v)
            yield from rec(i + 1, current)
            current.pop()

    yield from rec(0, [])


def branch_chain(l: ShiftedWeight, m: int) -> list[tuple[ShiftedWeight, Fraction]]:
    """Restriction to U(m) (1 <= m < n): the composition of one-step
    branchings; probabilities are chain-count times dimension over dim."""
    n = l.n
    if not 1 <= m < n:
        raise ValueError(f"target rank must satisfy 1 <= m < {n}")
    dim_l = weyl_dimension(l)
    out = []
    total = 0
    for w, weight in _restriction_support(l.highest_weight(), m):
        total += weight
        out.append((w, Fraction(weight, dim_l)))
    assert total == dim_l, "branching weights must sum to the dimension"
    return out


def restriction_mean_moments(l: ShiftedWeight, m: int, orders: Sequence[int],
                             eps=1) -> list:
    """Exact expectations of the dilated naive-measure moments of a random
    restricted component, streamed without materializing the distribution."""
    n = l.n
    if not 1 <= m < n:
        raise ValueError(f"target rank must satisfy 1 <= m < {n}")
    orders = tuple(orders)
    sums = [0] * len(orders)
    total = 0
    for w, weight in _restriction_support(l.highest_weight(), m):
        total += weight
        for a, k in enumerate(orders):
            sums[a] += weight * w.power_sum(k)
    assert total == weyl_dimension(l)
    return [Fraction(sums[a], total * m) * eps ** k
            for a, k in enumerate(orders)]


# -- exact statistics of the component distribution ---------------------------

@dataclass(frozen=True)
class PushforwardStats:
    """Exact mean, covariance and third joint cumulants of spectral-measure
    moments of a random irreducible component."""

    orders: tuple[int, ...]
    mean: tuple
    cov: tuple
    third: dict

    def variance(self, order: int):
        i = self.orders.index(order)
        return self.cov[i][i]


def _component_moment_numerators(l: ShiftedWeight, orders, which):
    # returns integers u_k with moment m_k = u_k / n
    if which == "naive":
        return [l.power_sum(k) for k in orders]
    if which == "natural":
        vals = []
        for k in orders:
            v = natural_moment_via_matrix(l, k) * l.n
            assert v.denominator == 1
            vals.append(v.numerator)
        return vals
    raise ValueError("measure kind must be 'naive' or 'natural'")


def pushforward_stats(d: WeightedDecomposition, eps, orders: Sequence[int],
                      which: str = "naive") -> PushforwardStats:
    """Exact joint cumulants (to third order) of the moments of the dilated
    spectral measure of a component drawn with probability mult*dim/dim."""
    if len(d) == 0:
        raise ValueError("empty decomposition")
    if len(d) > PUSHFORWARD_MAX_COMPONENTS:
        raise GuardError("decomposition exceeds the component guard")
    orders = tuple(orders)
    r = len(orders)
    n = d.n
    total = 0
    s1 = [0] * r
    s2 = [[0] * r for _ in range(r)]
    s3 = {}
    triples = [(a, b, c) for a in range(r) for b in range(a, r)
               for c in range(b, r)]
    for t in triples:
        s3[t] = 0
    for l, mult in d.components:
        w = mult * weyl_dimension(l)
        total += w
        u = _component_moment_numerators(l, orders, which)
        for a in range(r):
            s1[a] += w * u[a]
            for b in range(a, r):
                s2[a][b] += w * u[a] * u[b]
        for (a, b, c) in triples:
            s3[(a, b, c)] += w * u[a] * u[b] * u[c]

    scale = [eps ** k for k in orders]
    mean = [Fraction(s1[a], total * n) for a in range(r)]
    raw2 = {}
    for a in range(r):
        for b in range(a, r):
            raw2[(a, b)] = Fraction(s2[a][b], total * n ** 2)
    cov = [[0] * r for _ in range(r)]
    for a in range(r):
        for b in range(r):
            key = (min(a, b), max(a, b))
            cov[a][b] = (raw2[key] - mean[a] * mean[b]) * scale[a] * scale[b]
    third = {}
    for (a, b, c) in triples:
        raw3 = Fraction(s3[(a, b, c)], total * n ** 3)
        k3 = (raw3
              - mean[a] * raw2[(min(b, c), max(b, c))]
              - mean[b] * raw2[(min(a, c), max(a, c))]
              - mean[c] * raw2[(min(a, b), max(a, b))]
              + 2 * mean[a] * mean[b] * mean[c])
        third[(orders[a], orders[b], orders[c])] = \
            k3 * scale[a] * scale[b] * scale[c]
    scaled_mean = tuple(mean[a] * scale[a] for a in range(r))
    return PushforwardStats(orders=orders, mean=scaled_mean,
                            cov=tuple(tuple(row) for row in cov), third=third)

"""Shapley contributions: exact subset formula, permutation oracle and the
Monte-Carlo estimator over sampled join orders.

Coalitions are passed around as ``frozenset`` at the public surface and
as integer bitmasks internally.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Callable, Iterable, Mapping, Sequence, Union

import numpy as np

from .core import MAX_COALITION, mask_of, members_of
from .errors import CapacityError, ConfigError, ContractViolation

MAX_PERMUTATION_ORACLE = 8

Value = Union[int, Fraction]
CharacteristicFunction = Union[Mapping[frozenset, Value], Callable[[frozenset], Value]]


def _lookup(v: CharacteristicFunction) -> Callable[[frozenset], Value]:
    if callable(v):
        return v

    def get(c: frozenset) -> Value:
        if not c:
            return v.get(c, 0)
        try:
            return v[c]
        except KeyError:
            raise ContractViolation(f"characteristic function undefined on {sorted(c)}") from None

    return get


def shapley_weights(n: int) -> list[int]:
    """``s!(n-s-1)!`` for ``s = 0..n-1``; divide by ``n!`` to normalize."""
    return [math.factorial(s) * math.factorial(n - s - 1) for s in range(n)]


def shapley_numerators(values: Sequence[Value], n: int) -> list[Value]:
    """Shapley values times ``n!`` for a game given as a dense table.

    ``values[mask]`` is the value of the coalition of local players set in
    ``mask`` (players ``0..n-1``).
    """
    w = shapley_weights(n)
    size = [0] * (1 << n)
    for m in range(1, 1 << n):
        size[m] = size[m >> 1] + (m & 1)
    out: list[Value] = [0] * n
    for i in range(n):
        bit = 1 << i
        acc: Value = 0
        for m in range(1 << n):
            if m & bit:
                continue
            acc += w[size[m]] * (values[m | bit] - values[m])
        out[i] = acc
    return out


def exact_shapley(v: CharacteristicFunction, coalition: Iterable[int]) -> dict[int, Fraction]:
    """Exact contributions of every member of ``coalition``."""
    members = sorted(set(coalition))
    n = len(members)
    if n > MAX_COALITION:
        raise CapacityError(f"coalition of {n} exceeds cap of {MAX_COALITION}")
    if n == 0:
        return {}
    get = _lookup(v)
    table = [get(frozenset(members[i] for i in members_of(m))) for m in range(1 << n)]
    nums = shapley_numerators(table, n)
    denom = math.factorial(n)
    return {u: Fraction(x) / denom for u, x in zip(members, nums)}


def shapley_by_permutations(v: CharacteristicFunction, coalition: Iterable[int]) -> dict[int, Fraction]:
    """Average marginal contribution over all join orders (small games only)."""
    members = sorted(set(coalition))
    n = len(members)
    if n > MAX_PERMUTATION_ORACLE:
        raise CapacityError(f"permutation oracle limited to {MAX_PERMUTATION_ORACLE} players, got {n}")
    if n == 0:
        return {}
    get = _lookup(v)
    cache: dict[frozenset, Value] = {}

    def val(c: frozenset) -> Value:
        if c not in cache:
            cache[c] = get(c)
        return cache[c]

    totals: dict[int, Value] = {u: 0 for u in members}
    for order in permutations(members):
        before: frozenset = frozenset()
        for u in order:
            after = before | {u}
            totals[u] += val(after) - val(before)
            before = after
    count = math.factorial(n)
    return {u: Fraction(x) / count for u, x in totals.items()}


def sample_size(k: int, epsilon: float, lam: float) -> int:
    """Number of sampled orderings that makes the estimate ``epsilon``-close
    with probability ``lam``."""
    if k < 1:
        raise ConfigError("need at least one organization")
    if epsilon <= 0:
        raise ConfigError("epsilon must be positive")
    if not 0 <= lam < 1:
        raise ConfigError("lambda must lie in [0, 1)")
    n = math.ceil((k * k / (epsilon * epsilon)) * math.log(k / (1 - lam)))
    return max(1, n)


@dataclass
class PrefixSample:
    """``N`` join orders of all organizations and the coalitions they induce.

    ``prefixes[u]`` counts, for organization ``u``, how many orderings put
    exactly the coalition ``mask`` in front of ``u``.
    """

    orderings: np.ndarray  # shape (N, k)
    prefixes: list[Counter] = field(default_factory=list)

    @classmethod
    def from_orderings(cls, orderings) -> "PrefixSample":
        arr = np.asarray(orderings, dtype=np.int64)
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise ConfigError("need a non-empty (N, k) array of orderings")
        k = arr.shape[1]
        expected = list(range(k))
        prefixes = [Counter() for _ in range(k)]
        for row in arr.tolist():
            if sorted(row) != expected:
                raise ConfigError(f"ordering {row} is not a permutation of 0..{k - 1}")
            mask = 0
            for u in row:
                prefixes[u][mask] += 1
                mask |= 1 << u
        return cls(arr, prefixes)

    @property
    def n(self) -> int:
        return int(self.orderings.shape[0])

    @property
    def k(self) -> int:
        return int(self.orderings.shape[1])

    @property
    def subs(self) -> set[int]:
        return {m for c in self.prefixes for m in c}

    @property
    def subs_prime(self) -> set[int]:
        return {m | (1 << u) for u, c in enumerate(self.prefixes) for m in c}

    def coalitions(self) -> set[int]:
        """Every mask whose value the estimator reads, the empty one excluded."""
        return (self.subs | self.subs_prime) - {0}


def sample_prefixes(k: int, n: int, seed=None) -> PrefixSample:
    """Draw ``n`` uniform permutations of ``0..k-1`` with replacement."""
    if n < 1:
        raise ConfigError("need at least one ordering")
    rng = np.random.default_rng(seed)
    base = np.tile(np.arange(k, dtype=np.int64), (n, 1))
    return PrefixSample.from_orderings(rng.permuted(base, axis=1))


def all_orderings(k: int) -> PrefixSample:
    return PrefixSample.from_orderings(list(permutations(range(k))))


def marginal_sums(sample: PrefixSample, values: Mapping[int, Value]) -> list[Value]:
    """``N`` times the estimated contribution of each organization, exactly."""
    out: list[Value] = []
    for u, counts in enumerate(sample.prefixes):
        bit = 1 << u
        acc: Value = 0
        for mask, c in counts.items():
            try:
                with_u = values[mask | bit]
                without = values[mask] if mask else 0
            except KeyError as exc:
                raise ContractViolation(f"no value for sampled coalition {members_of(exc.args[0])}") from None
            acc += c * (with_u - without)
        out.append(acc)
    return out


def estimate_contributions(sample: PrefixSample, values: Mapping) -> list[float]:
    """Mean marginal contribution over the sampled orderings.

    ``values`` maps coalition masks (or frozensets) to their value.
    """
    if values and isinstance(next(iter(values)), frozenset):
        values = {mask_of(c): x for c, x in values.items()}
    return [float(Fraction(s) / sample.n) for s in marginal_sums(sample, values)]

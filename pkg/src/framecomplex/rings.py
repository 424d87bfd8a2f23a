"""Arithmetic in Z/m and the stable range conditions.

Unimodularity of a vector over Z/m is decided by gcd with the modulus (O(n)
per vector, equivalent to the existence of a coefficient combination summing
to 1). The stable range conditions (S_m) and their matrix form (S_n^k) are
checked by exhaustive enumeration inside explicit budgets; running out of
budget yields an inconclusive report, never a guessed boolean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .config import DEFAULT_SEARCH_BUDGET
from .errors import InvalidInput


def factorize(m: int) -> list[tuple[int, int]]:
    """Prime factorization by trial division (moduli here are tiny)."""
    factors = []
    d, rest = 2, m
    while d * d <= rest:
        if rest % d == 0:
            e = 0
            while rest % d == 0:
                rest //= d
                e += 1
            factors.append((d, e))
        d += 1
    if rest > 1:
        factors.append((rest, 1))
    return factors


@dataclass
class ModulusRing:
    """The ring Z/m together with its prime factorization and cached sr(R)."""

    modulus: int
    prime_factors: list = field(default_factory=list)
    stable_rank_hint: int | None = None

    def __post_init__(self):
        if self.modulus < 2:
            raise InvalidInput("modulus must be >= 2")
        if not self.prime_factors:
            self.prime_factors = factorize(self.modulus)
        check = 1
        for p, e in self.prime_factors:
            check *= p**e
        if check != self.modulus:
            raise InvalidInput("prime_factors do not multiply to modulus")

    @property
    def primes(self) -> tuple:
        return tuple(p for p, _ in self.prime_factors)

    def reduce(self, x: int) -> int:
        return x % self.modulus

    def elements(self) -> range:
        return range(self.modulus)

    def units(self) -> list[int]:
        return [x for x in range(self.modulus) if math.gcd(x, self.modulus) == 1]

    def __repr__(self):
        return f"Z/{self.modulus}"


@dataclass(frozen=True)
class RingVector:
    ring: ModulusRing
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(c % self.ring.modulus for c in self.coords))

    def __len__(self):
        return len(self.coords)


def is_unimodular_vector(ring: ModulusRing, v) -> bool:
    """True iff gcd(v_1, ..., v_n, m) = 1, i.e. v spans a free direct summand."""
    coords = v.coords if isinstance(v, RingVector) else tuple(v)
    if len(coords) == 0:
        raise InvalidInput("unimodularity of the empty vector is undefined")
    g = ring.modulus
    for c in coords:
        g = math.gcd(g, c)
        if g == 1:
            return True
    return g == 1


@dataclass
class StableRangeReport:
    ring: int
    condition: str
    holds: bool | None           # None = inconclusive (budget)
    enumerated_count: int
    witness: dict | None = None
    counterexample: dict | None = None
    note: str | None = None

    def as_dict(self) -> dict:
        d = {
            "ring": f"Z/{self.ring}",
            "condition": self.condition,
            "holds": self.holds,
            "enumerated_count": self.enumerated_count,
        }
        if self.witness is not None:
            d["witness"] = self.witness
        if self.counterexample is not None:
            d["counterexample"] = self.counterexample
        if self.note is not None:
            d["note"] = self.note
        return d


def check_stable_range(ring: ModulusRing, m: int,
                       search_budget: int = DEFAULT_SEARCH_BUDGET) -> StableRangeReport:
    """Check (S_m): every unimodular (m+1)-vector shortens to a unimodular m-vector.

    Exhaustive over all vectors in R^{m+1} and, per vector, over all t in R^m.
    """
    if m < 1:
        raise InvalidInput("stable range index must be >= 1")
    mod = ring.modulus
    if mod ** (m + 1) > search_budget:
        return StableRangeReport(mod, f"S_{m}", None, 0,
                                 note="enumeration budget exceeded")
    count = 0
    for r in product(range(mod), repeat=m + 1):
        if not is_unimodular_vector(ring, r):
            continue
        count += 1
        last = r[m]
        found = None
        for t in product(range(mod), repeat=m):
            cand = tuple((r[i] + t[i] * last) % mod for i in range(m))
            if is_unimodular_vector(ring, cand):
                found = t
                break
        if found is None:
            return StableRangeReport(mod, f"S_{m}", False, count,
                                     counterexample={"vector": list(r)})
    return StableRangeReport(mod, f"S_{m}", True, count)


def stable_rank(ring: ModulusRing, search_budget: int = DEFAULT_SEARCH_BUDGET,
                max_m: int = 8) -> int:
    """Least m with (S_m); caches the certified value into stable_rank_hint."""
    for m in range(1, max_m + 1):
        report = check_stable_range(ring, m, search_budget)
        if report.holds is None:
            raise InvalidInput(f"budget exceeded before any (S_m) was certified for Z/{ring.modulus}")
        if report.holds:
            ring.stable_rank_hint = m
            return m
    raise InvalidInput(f"no (S_m) certified for Z/{ring.modulus} with m <= {max_m}")


# --- batched mod-p rank for the matrix stable range enumeration -------------

def _batch_full_rank_mod_p(mats: np.ndarray, p: int) -> np.ndarray:
    """Boolean mask: which of the (N, r, c) matrices have rank r over F_p.

    Decided via r x r column minors (permutation expansion); r is tiny here.
    """
    n, r, c = mats.shape[0], mats.shape[1], mats.shape[2]
    if r > c:
        return np.zeros(n, dtype=bool)
    from itertools import combinations, permutations
    perms = [(pm, _perm_sign(pm)) for pm in permutations(range(r))]
    ok = np.zeros(n, dtype=bool)
    a = mats.astype(np.int64) % p
    for cols in combinations(range(c), r):
        det = np.zeros(n, dtype=np.int64)
        for pm, sign in perms:
            term = np.ones(n, dtype=np.int64)
            for i in range(r):
                term = (term * a[:, i, cols[pm[i]]]) % p
            det = (det + sign * term) % p
        ok |= det != 0
        if ok.all():
            break
    return ok


def _perm_sign(pm) -> int:
    sign, seen = 1, [False] * len(pm)
    for i in range(len(pm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = pm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _batch_unimodular(mats: np.ndarray, ring: ModulusRing) -> np.ndarray:
    ok = np.ones(mats.shape[0], dtype=bool)
    for p in ring.primes:
        ok &= _batch_full_rank_mod_p(mats, p)
    return ok


def check_matrix_stable_range(ring: ModulusRing, n: int, k: int,
                              search_budget: int = DEFAULT_SEARCH_BUDGET) -> StableRangeReport:
    """Check (S_n^k) over all unimodular n x (n+k) matrices B.

    For each unimodular B we need r in R^{n+k-1} with B * [[1, r], [0, I]]
    = [u | B'] and B' unimodular; B' = B[:, 1:] + outer(u, r). B itself is
    required unimodular (the B = 0 degenerate case admits no unimodular B').
    """
    if n < 1 or k < 1:
        raise InvalidInput("n and k must be >= 1")
    mod = ring.modulus
    cols = n + k
    total = mod ** (n * cols)
    if total > search_budget:
        return StableRangeReport(mod, f"S_{n}^{k}", None, 0,
                                 note="enumeration budget exceeded")

    # all matrices, one mixed-radix digit per entry, row-major
    digits = np.arange(total, dtype=np.int64)
    entries = []
    for _ in range(n * cols):
        entries.append(digits % mod)
        digits //= mod
    mats = np.stack(entries[::-1], axis=1).reshape(total, n, cols).astype(np.int64)

    unim = _batch_unimodular(mats, ring)
    b = mats[unim]
    enumerated = int(unim.sum())

    pending = np.ones(b.shape[0], dtype=bool)
    witness_r = {}
    first_col = b[:, :, 0]
    rest = b[:, :, 1:]
    for r in product(range(mod), repeat=cols - 1):
        if not pending.any():
            break
        rv = np.array(r, dtype=np.int64)
        idx = np.nonzero(pending)[0]
        bprime = (rest[idx] + first_col[idx][:, :, None] * rv[None, None, :]) % mod
        good = _batch_unimodular(bprime, ring)
        hit = idx[good]
        if hit.size and not witness_r:
            witness_r = {"r": list(r)}
        pending[hit] = False
    if pending.any():
        bad = b[int(np.nonzero(pending)[0][0])]
        return StableRangeReport(
            mod, f"S_{n}^{k}", False, enumerated,
            counterexample={"matrix": bad.tolist()},
            note="matrix_convention: B unimodular")
    return StableRangeReport(mod, f"S_{n}^{k}", True, enumerated,
                             witness=witness_r or None,
                             note="matrix_convention: B unimodular")

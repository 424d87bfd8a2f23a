"""Order-complex chain complexes and exact homology.

The pipeline: enumerate chains lexicographically (deterministic bases), check
dd=0, shrink the complex with homology-preserving eliminations (coreduction
and free-face pairs are pure deletions; unit-pivot elimination adds a rank-1
fill), then read invariant factors off the small remnant with integer SNF.
Over-budget runs degrade to a labeled mod-p screen instead of guessing.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field

from .config import DEFAULT_SNF_BUDGET
from .errors import BudgetExceeded, InvalidInput, InternalConsistencyError
from .intmat import (AbelianGroup, SparseIntMatrix, quotient_group,
                     rank_mod_prime_rows, smith_normal_form)
from .posets import CoefficientFunctor, FinitePoset


@dataclass
class ChainComplexData:
    """Chain complex with integer boundary columns per degree.

    cols[k][cell] = {face: coef} gives D_k : C_k -> C_{k-1}. Degree -1 holds
    the augmentation target when reduced. basis[k] lists cell tuples when kept.
    """

    sizes: dict
    cols: dict
    basis: dict = field(default_factory=dict)
    reduced: bool = False

    def degree_range(self):
        return sorted(self.sizes)


def order_complex(poset: FinitePoset, top_degree: int, reduced: bool = False,
                  keep_basis: bool = False, check_dd: bool = True) -> ChainComplexData:
    """Chains of the poset through dimension top_degree, as a chain complex."""
    sizes = {}
    cols = {}
    basis = {}
    n = len(poset)
    if reduced:
        sizes[-1] = 1
        if keep_basis:
            basis[-1] = [()]
    sizes[0] = n
    if keep_basis:
        basis[0] = [(i,) for i in range(n)]
    if reduced and n:
        cols[0] = {i: {0: 1} for i in range(n)}
    above = poset.above_sets()
    sorted_above = [sorted(s) for s in above]
    prev = {(i,): i for i in range(n)}
    for k in range(1, top_degree + 1):
        if not prev:
            break
        cur = {}
        colk = {}
        cid = 0
        for chain, _ in sorted(prev.items(), key=lambda kv: kv[1]):
            for j in sorted_above[chain[-1]]:
                new = chain + (j,)
                bnd = {}
                sign = 1
                for drop in range(k + 1):
                    face = new[:drop] + new[drop + 1:]
                    fid = prev[face] if drop < k else prev[chain]
                    bnd[fid] = sign
                    sign = -sign
                colk[cid] = bnd
                cur[new] = cid
                cid += 1
        if not cur:
            break
        sizes[k] = cid
        cols[k] = colk
        if keep_basis:
            basis[k] = [c for c, _ in sorted(cur.items(), key=lambda kv: kv[1])]
        prev = cur
    data = ChainComplexData(sizes, cols, basis, reduced)
    if check_dd:
        _assert_dd_zero(data)
    return data


def _assert_dd_zero(data: ChainComplexData):
    for k in sorted(data.cols):
        lower = data.cols.get(k - 1)
        if lower is None:
            continue
        for cell, bnd in data.cols[k].items():
            acc = {}
            for face, c in bnd.items():
                for face2, c2 in lower[face].items():
                    s = acc.get(face2, 0) + c * c2
                    if s:
                        acc[face2] = s
                    else:
                        acc.pop(face2, None)
            if acc:
                raise InternalConsistencyError(f"dd != 0 at degree {k}, cell {cell}")


def functor_complex(poset: FinitePoset, functor: CoefficientFunctor,
                    top_degree: int) -> ChainComplexData:
    """C_n = direct sum of F(x_0) over chains x_0<...<x_n, with the d_0 twist.

    d_i for i>0 re-indexes identically; d_0 applies the structure map
    F(x_0 < x_1). Functoriality is verified first (invalid-input on failure,
    naming the offending triangle).
    """
    bad = functor.verify_functorial()
    if bad is not None:
        raise InvalidInput(f"functor is not path-independent on triangle {bad!r}")
    n = len(poset)
    ranks = functor.ranks
    above = poset.above_sets()
    sorted_above = [sorted(s) for s in above]

    sizes = {}
    cols = {}
    offs_prev = {}
    off = 0
    prev_chains = []
    for i in range(n):
        offs_prev[(i,)] = off
        prev_chains.append((i,))
        off += ranks[i]
    sizes[0] = off
    cols[0] = {}
    for k in range(1, top_degree + 1):
        offs_cur = {}
        cur_chains = []
        off = 0
        for chain in prev_chains:
            for j in sorted_above[chain[-1]]:
                new = chain + (j,)
                offs_cur[new] = off
                cur_chains.append(new)
                off += ranks[new[0]]
        if not cur_chains:
            break
        sizes[k] = off
        colk = {}
        for chain in cur_chains:
            base = offs_cur[chain]
            r0 = ranks[chain[0]]
            # d_0: structure map into the (x_1..x_k)-component
            m0 = functor.structure_map(chain[0], chain[1])
            tail = chain[1:]
            tbase = offs_prev[tail]
            for t in range(r0):
                bnd = {}
                for rr in range(ranks[chain[1]]):
                    v = m0[rr][t]
                    if v:
                        bnd[tbase + rr] = v
                sign = -1
                for drop in range(1, k + 1):
                    face = chain[:drop] + chain[drop + 1:]
                    fbase = offs_prev[face]
                    bnd[fbase + t] = bnd.get(fbase + t, 0) + sign
                    if not bnd[fbase + t]:
                        del bnd[fbase + t]
                    sign = -sign
                colk[base + t] = bnd
        cols[k] = colk
        offs_prev = offs_cur
        prev_chains = cur_chains
    data = ChainComplexData(sizes, cols, {}, False)
    _assert_dd_zero(data)
    return data


# --- homology-preserving reduction -------------------------------------------

class ComplexReducer:
    """Shrink a chain complex by unit-pivot eliminations.

    Coreduction pairs (singleton column) and free-face pairs (singleton row)
    delete cells without touching other entries; general unit pivots apply a
    rank-1 update within their own degree. All three preserve every homology
    group, so the remnant feeds plain SNF. Deterministic processing order.
    """

    def __init__(self, data: ChainComplexData, work_budget: int = DEFAULT_SNF_BUDGET):
        self.degrees = sorted(data.sizes)
        self.cols = {k: {c: dict(b) for c, b in data.cols.get(k, {}).items()} for k in data.sizes}
        self.alive = {k: set(range(data.sizes[k])) for k in data.sizes}
        for k in self.degrees:
            self.cols.setdefault(k, {})
            for c in self.alive[k]:
                self.cols[k].setdefault(c, {})
        self.rows = {k: {c: set() for c in self.alive[k]} for k in self.degrees}
        for k in self.degrees:
            up = self.cols.get(k + 1)
            if not up:
                continue
            for c, bnd in up.items():
                for r in bnd:
                    self.rows[k][r].add(c)
        self.budget = work_budget
        self.work = 0

    def _spend(self, units: int):
        self.work += units
        if self.work > self.budget:
            raise BudgetExceeded("chain-complex reduction budget exhausted")

    # pair removal; (a in degree k-1, b in degree k), the pivot entry is +-1
    def _eliminate(self, k: int, a: int, b: int):
        cols_k = self.cols[k]
        rows_km1 = self.rows[k - 1]
        u = cols_k[b][a]
        col_b = cols_k[b]
        carriers = sorted(c for c in rows_km1[a] if c != b)
        others = sorted((r, mu) for r, mu in col_b.items() if r != a)
        if carriers and others:
            for c in carriers:
                lam = cols_k[c][a]
                q = lam * u   # u in {1,-1}: lam/u == lam*u
                bc = cols_k[c]
                self._spend(len(others))
                for r, mu in others:
                    s = bc.get(r, 0) - q * mu
                    if s:
                        if r not in bc:
                            rows_km1[r].add(c)
                        bc[r] = s
                    else:
                        bc.pop(r, None)
                        rows_km1[r].discard(c)
        # delete a's entries from the carrier columns
        for c in carriers:
            cols_k[c].pop(a, None)
        # drop cell b (degree k)
        for r, _ in others:
            rows_km1[r].discard(b)
        del cols_k[b]
        up = self.rows.get(k)
        if up is not None:
            for e in up.pop(b, ()):  # row b of D_{k+1} vanishes in the new basis
                self.cols[k + 1][e].pop(b, None)
        self.alive[k].discard(b)
        # drop cell a (degree k-1)
        del rows_km1[a]
        down = self.cols.get(k - 1)
        if down is not None and a in down:
            for r in down[a]:
                self.rows[k - 2][r].discard(a)
            del down[a]
        self.alive[k - 1].discard(a)
        self._spend(len(carriers) + len(others) + 2)
        return carriers, [r for r, _ in others]

    def run(self):
        cored = deque()
        freed = deque()
        for k in self.degrees:
            for b in sorted(self.cols[k]):
                if len(self.cols[k][b]) == 1:
                    cored.append((k, b))
            for a in sorted(self.rows[k]):
                if len(self.rows[k][a]) == 1:
                    freed.append((k, a))
        while True:
            progressed = False
            while cored or freed:
                if cored:
                    k, b = cored.popleft()
                    if b not in self.alive.get(k, ()):
                        continue
                    bnd = self.cols[k][b]
                    if len(bnd) != 1:
                        continue
                    (a, u), = bnd.items()
                    if abs(u) != 1:
                        continue
                else:
                    k1, a = freed.popleft()
                    if a not in self.alive.get(k1, ()):
                        continue
                    cob = self.rows[k1][a]
                    if len(cob) != 1:
                        continue
                    (b,) = tuple(cob)
                    u = self.cols[k1 + 1][b].get(a, 0)
                    if abs(u) != 1:
                        continue
                    k = k1 + 1
                progressed = True
                touched_cols, touched_rows = self._eliminate(k, a, b)
                for c in touched_cols:
                    if len(self.cols[k].get(c, ())) == 1:
                        cored.append((k, c))
                for r in touched_rows:
                    if len(self.rows[k - 1].get(r, ())) == 1:
                        freed.append((k - 1, r))
            # general unit pivots, cheapest fill first
            pivot = self._best_unit_pivot()
            if pivot is None:
                if not progressed:
                    break
                if not (cored or freed):
                    break
                continue
            k, a, b = pivot
            touched_cols, touched_rows = self._eliminate(k, a, b)
            for c in touched_cols:
                if len(self.cols[k].get(c, ())) == 1:
                    cored.append((k, c))
            for r in touched_rows:
                if len(self.rows[k - 1].get(r, ())) == 1:
                    freed.append((k - 1, r))

    def _best_unit_pivot(self):
        best = None
        choice = None
        for k in self.degrees:
            cols_k = self.cols.get(k, {})
            for b, bnd in cols_k.items():
                for a, v in bnd.items():
                    if abs(v) != 1:
                        continue
                    cost = (len(bnd) - 1) * (len(self.rows[k - 1][a]) - 1)
                    key = (cost, k, a, b)
                    if best is None or key < best:
                        best, choice = key, (k, a, b)
        return choice

    def remnant_matrix(self, k: int) -> SparseIntMatrix:
        """Boundary D_k of the remnant with rows/cols renumbered densely."""
        rows_alive = sorted(self.alive.get(k - 1, ()))
        cols_alive = sorted(self.alive.get(k, ()))
        rmap = {r: i for i, r in enumerate(rows_alive)}
        cmap = {c: j for j, c in enumerate(cols_alive)}
        m = SparseIntMatrix(len(rows_alive), len(cols_alive))
        for c in cols_alive:
            for r, v in self.cols[k].get(c, {}).items():
                m.entries[(rmap[r], cmap[c])] = v
        return m


# --- reports ------------------------------------------------------------------

@dataclass
class HomologyReport:
    poset_id: str
    coefficients: str
    reduced: bool
    groups: dict                      # degree -> AbelianGroup (exact) or None
    method: str = "snf"               # "snf" | "mod-p-screen"
    primes_checked: tuple = ()
    screen_betti: dict = field(default_factory=dict)   # degree -> {p: betti}

    def group(self, k: int):
        return self.groups.get(k)

    def is_acyclic_through(self, n: int) -> bool:
        """Nonempty with vanishing reduced homology in degrees 0..n."""
        if not self.reduced:
            raise InvalidInput("acyclicity is a reduced-homology question")
        if self.groups.get(-1) is not None and not self.groups[-1].is_trivial:
            return False
        return all(self.groups[k].is_trivial for k in range(0, n + 1) if k in self.groups)

    def as_dict(self) -> dict:
        out = {
            "poset_id": self.poset_id,
            "coefficients": self.coefficients,
            "reduced": self.reduced,
            "groups": [
                {"degree": k, **self.groups[k].as_dict()}
                for k in sorted(self.groups) if self.groups[k] is not None
            ],
            "method": self.method,
            "primes_checked": list(self.primes_checked),
        }
        if self.screen_betti:
            out["screen_betti"] = {
                str(k): {str(p): b for p, b in sorted(v.items())}
                for k, v in sorted(self.screen_betti.items())
            }
        return out


def homology_of_complex(data: ChainComplexData, max_degree: int,
                        work_budget: int = DEFAULT_SNF_BUDGET,
                        primes=(2, 3, 5)) -> tuple:
    """(groups, method, screen) for degrees low..max_degree of the complex."""
    reducer = ComplexReducer(data, work_budget)
    degrees = [k for k in data.degree_range() if k <= max_degree]
    try:
        reducer.run()
        groups = {}
        snf_cache = {}

        def snf_diag(k):
            if k not in snf_cache:
                mat = reducer.remnant_matrix(k) if k in reducer.cols else None
                snf_cache[k] = smith_normal_form(mat).diagonal if mat is not None else []
            return snf_cache[k]

        for k in degrees:
            nk = len(reducer.alive.get(k, ()))
            rank_dn = len(snf_diag(k)) if k in data.cols else 0
            diag_up = snf_diag(k + 1) if (k + 1) in data.sizes else []
            groups[k] = quotient_group(nk - rank_dn, diag_up)
        return groups, "snf", {}
    except BudgetExceeded:
        screen = {}
        ranks = {}

        def rank_p(k, p):
            if (k, p) not in ranks:
                if k not in reducer.cols or not reducer.alive.get(k):
                    ranks[(k, p)] = 0
                else:
                    rows = {}
                    for c, bnd in reducer.cols[k].items():
                        for r, v in bnd.items():
                            rows.setdefault(r, {})[c] = v
                    ranks[(k, p)] = rank_mod_prime_rows(rows.values(), p)
            return ranks[(k, p)]

        for k in degrees:
            nk = len(reducer.alive.get(k, ()))
            screen[k] = {}
            for p in primes:
                down = rank_p(k, p) if k in data.cols else 0
                up = rank_p(k + 1, p) if (k + 1) in data.sizes else 0
                screen[k][p] = nk - down - up
        return {k: None for k in degrees}, "mod-p-screen", screen


def integer_homology(poset: FinitePoset, max_degree: int, reduced: bool = True,
                     work_budget: int = DEFAULT_SNF_BUDGET, primes=(2, 3, 5),
                     poset_id: str = "poset", check_dd: bool = True) -> HomologyReport:
    """Exact homology via SNF through max_degree; deterministic.

    On budget exhaustion the report degrades to a mod-p screen (per-prime
    Betti numbers), never to a wrong integer answer.
    """
    if len(poset) == 0:
        groups = {-1: AbelianGroup(1)} if reduced else {}
        for k in range(0, max_degree + 1):
            groups[k] = AbelianGroup(0)
        return HomologyReport(poset_id, "Z", reduced, groups)
    data = order_complex(poset, min(max_degree + 1, poset.dimension()),
                         reduced=reduced, check_dd=check_dd)
    groups, method, screen = homology_of_complex(data, max_degree, work_budget, primes)
    full_groups = {}
    for k in ([-1] if reduced else []) + list(range(0, max_degree + 1)):
        if k in groups:
            full_groups[k] = groups[k]
        else:
            full_groups[k] = AbelianGroup(0) if method == "snf" else None
    return HomologyReport(poset_id, "Z", reduced, full_groups, method,
                          tuple(primes) if method != "snf" else (), screen)


def functor_homology(poset: FinitePoset, functor: CoefficientFunctor, max_degree: int,
                     work_budget: int = DEFAULT_SNF_BUDGET,
                     poset_id: str = "poset") -> HomologyReport:
    """Homology with coefficients in a functor; equals integer homology for
    the constant functor Z, and vanishes identically on the empty poset."""
    name = "functor"
    if len(poset) == 0:
        return HomologyReport(poset_id, name, False,
                              {k: AbelianGroup(0) for k in range(0, max_degree + 1)})
    data = functor_complex(poset, functor, min(max_degree + 1, max(poset.dimension(), 0)))
    groups, method, screen = homology_of_complex(data, max_degree, work_budget)
    full = {}
    for k in range(0, max_degree + 1):
        got = groups.get(k)
        full[k] = got if got is not None else (AbelianGroup(0) if method == "snf" else None)
    return HomologyReport(poset_id, name, False, full, method, (), screen)


def is_n_acyclic(poset: FinitePoset, n: int, work_budget=DEFAULT_SNF_BUDGET,
                 poset_id="poset") -> bool:
    """n-acyclic: nonempty and reduced H_i = 0 over Z for 0 <= i <= n.

    Vacuously true for n < -1; for n = -1 it is just nonemptiness.
    """
    if n < -1:
        return True
    if len(poset) == 0:
        return False
    if n == -1:
        return True
    report = integer_homology(poset, n, reduced=True, work_budget=work_budget,
                              poset_id=poset_id)
    if report.method != "snf":
        raise BudgetExceeded(f"acyclicity of {poset_id} not decided within budget")
    return report.is_acyclic_through(n)

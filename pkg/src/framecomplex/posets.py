"""Finite posets, poset maps, sequence posets and coefficient functors.

Posets store cover relations and materialize the strict-order closure lazily
(frame posets have large closures but small cover degree). Sequence posets
decide comparability by a greedy subsequence scan, which is correct for
sequences with distinct entries. Element order is fixed at construction, so
every derived object (chains, boundary matrices, reports) is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidInput
from .intmat import dense_mul, dense_identity, det_int


class FinitePoset:
    """Strict finite poset on opaque labels, with indices in insertion order."""

    def __init__(self, elements, cover_pairs, above_sets=None):
        self.elements = list(elements)
        self.index = {lab: i for i, lab in enumerate(self.elements)}
        if len(self.index) != len(self.elements):
            raise InvalidInput("duplicate element labels")
        n = len(self.elements)
        self.up_covers = [[] for _ in range(n)]
        self.down_covers = [[] for _ in range(n)]
        for i, j in cover_pairs:
            if i == j:
                raise InvalidInput("cover relation must be irreflexive")
            self.up_covers[i].append(j)
            self.down_covers[j].append(i)
        for lst in self.up_covers:
            lst.sort()
        for lst in self.down_covers:
            lst.sort()
        self._above = above_sets        # list[frozenset] or None
        self._below = None
        if above_sets is not None and len(above_sets) != n:
            raise InvalidInput("above_sets length mismatch")

    # -- basic queries --------------------------------------------------------

    def __len__(self):
        return len(self.elements)

    def label(self, i: int):
        return self.elements[i]

    def above_sets(self):
        """above_sets()[i] = frozenset of indices strictly above i."""
        if self._above is None:
            n = len(self.elements)
            order = self._topo_order()
            above = [None] * n
            for i in reversed(order):
                acc = set()
                for j in self.up_covers[i]:
                    acc.add(j)
                    acc |= above[j]
                above[i] = frozenset(acc)
            self._above = above
        return self._above

    def below_sets(self):
        if self._below is None:
            n = len(self.elements)
            below = [set() for _ in range(n)]
            for i, ups in enumerate(self.above_sets()):
                for j in ups:
                    below[j].add(i)
            self._below = [frozenset(s) for s in below]
        return self._below

    def _topo_order(self):
        n = len(self.elements)
        indeg = [len(self.down_covers[i]) for i in range(n)]
        order = [i for i in range(n) if indeg[i] == 0]
        head = 0
        while head < len(order):
            i = order[head]
            head += 1
            for j in self.up_covers[i]:
                indeg[j] -= 1
                if indeg[j] == 0:
                    order.append(j)
        if len(order) != n:
            raise InvalidInput("cover relation contains a cycle")
        return order

    def is_less(self, i: int, j: int) -> bool:
        return j in self.above_sets()[i]

    def comparable(self, i: int, j: int) -> bool:
        return i != j and (self.is_less(i, j) or self.is_less(j, i))

    def maximal_elements(self):
        return [i for i in range(len(self.elements)) if not self.up_covers[i]]

    def minimal_elements(self):
        return [i for i in range(len(self.elements)) if not self.down_covers[i]]

    def has_maximum(self) -> bool:
        mx = self.maximal_elements()
        return len(self.elements) > 0 and len(mx) == 1

    def has_minimum(self) -> bool:
        mn = self.minimal_elements()
        return len(self.elements) > 0 and len(mn) == 1

    def dimension(self) -> int:
        """Longest chain length minus one; -1 for the empty poset."""
        if not self.elements:
            return -1
        depth = [0] * len(self.elements)
        for i in self._topo_order():
            for j in self.up_covers[i]:
                depth[j] = max(depth[j], depth[i] + 1)
        return max(depth)

    def connected_components(self) -> list:
        n = len(self.elements)
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for i in range(n):
            for j in self.up_covers[i]:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
        comps: dict = {}
        for i in range(n):
            comps.setdefault(find(i), []).append(i)
        return [comps[r] for r in sorted(comps)]

    # -- derived posets -------------------------------------------------------

    def induced(self, indices) -> "FinitePoset":
        """Induced subposet on the given element indices (insertion order kept)."""
        sel = sorted(set(indices))
        pos = {old: new for new, old in enumerate(sel)}
        above = self.above_sets()
        sub_above = [frozenset(pos[j] for j in above[i] if j in pos) for i in sel]
        covers = []
        for new_i, ups in enumerate(sub_above):
            for new_j in ups:
                # cover iff nothing in the subset sits strictly between
                if not any(new_j in sub_above[mid] for mid in ups):
                    covers.append((new_i, new_j))
        return FinitePoset([self.elements[i] for i in sel], covers, sub_above)

    def link(self, label, sign: str) -> "FinitePoset":
        """Link^+ (elements strictly above) or Link^- (strictly below) of x."""
        if label not in self.index:
            raise InvalidInput(f"{label!r} is not an element")
        i = self.index[label]
        if sign in ("+", "plus"):
            return self.induced(self.above_sets()[i])
        if sign in ("-", "minus"):
            return self.induced(self.below_sets()[i])
        raise InvalidInput("sign must be 'plus' or 'minus'")

    def opposite(self) -> "FinitePoset":
        n = len(self.elements)
        covers = [(j, i) for i in range(n) for j in self.up_covers[i]]
        op = FinitePoset(self.elements, covers)
        if self._above is not None:
            op._above = self.below_sets()
            op._below = self.above_sets()
        return op

    def chains(self, length: int):
        """All chains x_0 < ... < x_{length-1}, lexicographic by element index."""
        if length <= 0:
            yield ()
            return
        above = self.above_sets()
        sorted_above = [sorted(s) for s in above]

        def extend(chain, last, todo):
            if todo == 0:
                yield chain
                return
            for j in sorted_above[last]:
                yield from extend(chain + (j,), j, todo - 1)

        for i in range(len(self.elements)):
            yield from extend((i,), i, length - 1)

    def count_chains(self, length: int) -> int:
        if length <= 0:
            return 1
        above = self.above_sets()
        counts = [1] * len(self.elements)
        for _ in range(length - 1):
            new = [sum(counts[j] for j in above[i]) for i in range(len(self.elements))]
            counts = new
        return sum(counts)

    def __repr__(self):
        return f"FinitePoset({len(self.elements)} elements)"


def poset_from_relation(elements, less_pairs) -> FinitePoset:
    """Build from the full strict relation given as index pairs (i, j), i < j."""
    n = len(elements)
    above = [set() for _ in range(n)]
    for i, j in less_pairs:
        if i == j:
            raise InvalidInput("strict order must be irreflexive")
        above[i].add(j)
    for i in range(n):
        if any(i in above[j] for j in above[i]):
            raise InvalidInput("relation is not antisymmetric")
    covers = []
    for i in range(n):
        for j in above[i]:
            if not any(j in above[mid] for mid in above[i]):
                covers.append((i, j))
    return FinitePoset(elements, covers, [frozenset(s) for s in above])


def chain_poset(k: int) -> FinitePoset:
    """The chain 0 < 1 < ... < k-1."""
    return FinitePoset(list(range(k)), [(i, i + 1) for i in range(k - 1)])


class PosetMap:
    """Order-preserving map between finite posets; validated on covers."""

    def __init__(self, source: FinitePoset, target: FinitePoset, assignment: dict):
        self.source = source
        self.target = target
        self.map_idx = [None] * len(source)
        for lab, out in assignment.items():
            if lab not in source.index:
                raise InvalidInput(f"{lab!r} not in source")
            if out not in target.index:
                raise InvalidInput(f"{out!r} not in target")
            self.map_idx[source.index[lab]] = target.index[out]
        if any(v is None for v in self.map_idx):
            raise InvalidInput("assignment must cover every source element")
        t_above = target.above_sets()
        for i in range(len(source)):
            fi = self.map_idx[i]
            for j in source.up_covers[i]:
                fj = self.map_idx[j]
                if fi != fj and fj not in t_above[fi]:
                    raise InvalidInput(
                        f"map is not order-preserving on cover "
                        f"{source.elements[i]!r} < {source.elements[j]!r}")

    def __call__(self, label):
        return self.target.elements[self.map_idx[self.source.index[label]]]

    @classmethod
    def identity(cls, poset: FinitePoset) -> "PosetMap":
        return cls(poset, poset, {e: e for e in poset.elements})

    @classmethod
    def constant(cls, source: FinitePoset, target: FinitePoset, value) -> "PosetMap":
        return cls(source, target, {e: value for e in source.elements})


def fiber_under(f: PosetMap, y) -> FinitePoset:
    """f/y = {x in X : f(x) <= y} as an induced subposet of the source."""
    if y not in f.target.index:
        raise InvalidInput(f"{y!r} not in target")
    yi = f.target.index[y]
    below = f.target.below_sets()[yi]
    sel = [i for i in range(len(f.source)) if f.map_idx[i] == yi or f.map_idx[i] in below]
    return f.source.induced(sel)


def fiber_over(f: PosetMap, y) -> FinitePoset:
    """y\\f = {x in X : f(x) >= y}."""
    if y not in f.target.index:
        raise InvalidInput(f"{y!r} not in target")
    yi = f.target.index[y]
    above = f.target.above_sets()[yi]
    sel = [i for i in range(len(f.source)) if f.map_idx[i] == yi or f.map_idx[i] in above]
    return f.source.induced(sel)


class HeightFunction:
    """Strictly increasing map to non-negative integers."""

    def __init__(self, poset: FinitePoset, values):
        self.poset = poset
        if isinstance(values, dict):
            self.values = [values[e] for e in poset.elements]
        else:
            self.values = list(values)
        if len(self.values) != len(poset):
            raise InvalidInput("height values must cover every element")
        for v in self.values:
            if v < 0:
                raise InvalidInput("heights must be non-negative")
        for i in range(len(poset)):
            for j in poset.up_covers[i]:
                if self.values[i] >= self.values[j]:
                    raise InvalidInput("height function must be strictly increasing")

    def __call__(self, label):
        return self.values[self.poset.index[label]]

    @classmethod
    def standard(cls, poset: FinitePoset) -> "HeightFunction":
        """ht(x) = 1 + dim Link^-(x), the usual height by longest chain below."""
        depth = [0] * len(poset)
        for i in poset._topo_order():
            for j in poset.up_covers[i]:
                depth[j] = max(depth[j], depth[i] + 1)
        return cls(poset, depth)


# --- sequence posets ---------------------------------------------------------

def is_subsequence(v: tuple, w: tuple) -> bool:
    """Greedy order-preserving subsequence test (entries are distinct)."""
    it = iter(w)
    return all(x in it for x in v)


def proper_subsequences(w: tuple):
    """All nonempty proper subsequences of w, by increasing length then lex."""
    n = len(w)
    for size in range(1, n):
        yield from _subseq_of_size(w, size)


def _subseq_of_size(w, size):
    from itertools import combinations
    for idxs in combinations(range(len(w)), size):
        yield tuple(w[i] for i in idxs)


class SequencePoset:
    """Subposet of O(V): finite sequences of distinct elements, ordered by
    order-preserving subsequence."""

    def __init__(self, ground_set, members):
        self.ground_set = list(ground_set)
        self.ground_index = {g: i for i, g in enumerate(self.ground_set)}
        if len(self.ground_index) != len(self.ground_set):
            raise InvalidInput("ground set has duplicates")
        mem = set()
        for m in members:
            t = tuple(m)
            if len(t) == 0:
                raise InvalidInput("sequences must have length >= 1")
            if len(set(t)) != len(t):
                raise InvalidInput(f"sequence {t!r} has repeated entries")
            for x in t:
                if x not in self.ground_index:
                    raise InvalidInput(f"entry {x!r} not in ground set")
            mem.add(t)
        self.members = mem
        self._sorted = None

    def sorted_members(self) -> list:
        if self._sorted is None:
            gi = self.ground_index
            self._sorted = sorted(self.members,
                                  key=lambda t: (len(t), tuple(gi[x] for x in t)))
        return self._sorted

    def __len__(self):
        return len(self.members)

    def __contains__(self, seq):
        return tuple(seq) in self.members

    def leq(self, v, w) -> bool:
        return is_subsequence(tuple(v), tuple(w))

    def max_length(self) -> int:
        return max((len(m) for m in self.members), default=0)

    def level_sizes(self) -> dict:
        sizes: dict = {}
        for m in self.members:
            sizes[len(m)] = sizes.get(len(m), 0) + 1
        return dict(sorted(sizes.items()))

    def check_chain_condition(self) -> bool:
        """True iff every nonempty subsequence of every member is a member."""
        for m in self.members:
            for sub in proper_subsequences(m):
                if sub not in self.members:
                    return False
        return True

    def chain_closure(self) -> "SequencePoset":
        closed = set(self.members)
        for m in self.members:
            closed.update(proper_subsequences(m))
        return SequencePoset(self.ground_set, closed)

    def sub_after(self, v) -> "SequencePoset":
        """F_v = {w in O(V) : wv in F}; satisfies (F_v)_w = F_{wv}."""
        v = tuple(v)
        lv = len(v)
        out = set()
        for m in self.members:
            if len(m) > lv and m[-lv:] == v:
                out.add(m[:-lv])
        return SequencePoset(self.ground_set, out)

    def truncate_by_length(self, k: int) -> "SequencePoset":
        if k < 1:
            raise InvalidInput("truncation length must be >= 1")
        return SequencePoset(self.ground_set, {m for m in self.members if len(m) <= k})

    def restrict_members(self, keep) -> "SequencePoset":
        keep = {tuple(m) for m in keep}
        return SequencePoset(self.ground_set, self.members & keep)

    def tensor_with_set(self, s_set) -> "SequencePoset":
        """F<S>: sequences ((v_1,s_1),...,(v_r,s_r)) with (v_1..v_r) in F."""
        s_list = list(s_set)
        if not s_list:
            raise InvalidInput("S must be nonempty")
        from itertools import product
        ground = [(v, s) for v in self.ground_set for s in s_list]
        out = set()
        for m in self.members:
            for decor in product(s_list, repeat=len(m)):
                out.add(tuple(zip(m, decor)))
        return SequencePoset(ground, out)

    def to_finite_poset(self) -> FinitePoset:
        """Order complex carrier: relation computed by subsequence enumeration."""
        elems = self.sorted_members()
        idx = {m: i for i, m in enumerate(elems)}
        n = len(elems)
        below = [[] for _ in range(n)]        # strict below lists per element
        for m in elems:
            i = idx[m]
            for sub in proper_subsequences(m):
                j = idx.get(sub)
                if j is not None:
                    below[i].append(j)
        above = [set() for _ in range(n)]
        for i, bs in enumerate(below):
            for j in bs:
                above[j].add(i)
        covers = []
        for i, bs in enumerate(below):
            bset = set(bs)
            for j in bs:
                # j covered by i iff no intermediate member strictly between
                if not (above[j] & bset):
                    covers.append((j, i))
        return FinitePoset(elems, covers, [frozenset(s) for s in above])

    def __repr__(self):
        return f"SequencePoset({len(self.members)} members over {len(self.ground_set)})"


def full_sequence_poset(ground_set, max_length=None) -> SequencePoset:
    """O(V), optionally truncated by length."""
    from itertools import permutations
    ground = list(ground_set)
    top = len(ground) if max_length is None else min(max_length, len(ground))
    members = []
    for k in range(1, top + 1):
        members.extend(permutations(ground, k))
    return SequencePoset(ground, members)


def section_map(f: SequencePoset, fs: SequencePoset, s0,
                f_poset=None, fs_poset=None) -> PosetMap:
    """l_{s0}: F -> F<S>, v |-> ((v_1,s_0),...,(v_r,s_0))."""
    f_poset = f_poset or f.to_finite_poset()
    fs_poset = fs_poset or fs.to_finite_poset()
    assignment = {m: tuple((x, s0) for x in m) for m in f.members}
    return PosetMap(f_poset, fs_poset, assignment)


def projection_map(fs: SequencePoset, f: SequencePoset,
                   fs_poset=None, f_poset=None) -> PosetMap:
    """p: F<S> -> F, ((v_1,s_1),...) |-> (v_1,...)."""
    fs_poset = fs_poset or fs.to_finite_poset()
    f_poset = f_poset or f.to_finite_poset()
    assignment = {m: tuple(x for x, _ in m) for m in fs.members}
    return PosetMap(fs_poset, f_poset, assignment)


# --- coefficient functors ----------------------------------------------------

class CoefficientFunctor:
    """Functor to free abelian groups: a rank per element, an integer matrix
    per relation x < x', composites cached and checked path-independent.

    Structure maps act on column vectors: map for x < x' has shape
    (rank(x'), rank(x)).
    """

    def __init__(self, poset: FinitePoset, ranks, cover_maps: dict):
        self.poset = poset
        if isinstance(ranks, dict):
            self.ranks = [ranks[e] for e in poset.elements]
        else:
            self.ranks = list(ranks)
        if len(self.ranks) != len(poset):
            raise InvalidInput("rank list must cover every element")
        self._maps: dict = {}
        for (a, b), mat in cover_maps.items():
            i = poset.index[a] if a in poset.index else a
            j = poset.index[b] if b in poset.index else b
            if not poset.is_less(i, j):
                raise InvalidInput("structure map given for a non-relation")
            self._check_shape(i, j, mat)
            self._maps[(i, j)] = [list(r) for r in mat]
        for i in range(len(poset)):
            for j in poset.up_covers[i]:
                if (i, j) not in self._maps:
                    raise InvalidInput("a cover relation is missing its structure map")

    def _check_shape(self, i, j, mat):
        rows = len(mat)
        cols = len(mat[0]) if rows else 0
        ok = rows == self.ranks[j] and (cols == self.ranks[i] or rows == 0)
        if not ok:
            raise InvalidInput(
                f"structure map for ({i},{j}) has shape {rows}x{cols}, "
                f"expected {self.ranks[j]}x{self.ranks[i]}")

    def rank(self, i: int) -> int:
        return self.ranks[i]

    def structure_map(self, i: int, j: int):
        """Matrix of F(x_i < x_j); composites filled along covers and cached."""
        if i == j:
            return dense_identity(self.ranks[i])
        got = self._maps.get((i, j))
        if got is not None:
            return got
        if not self.poset.is_less(i, j):
            raise InvalidInput("structure map requested for a non-relation")
        for k in self.poset.up_covers[i]:
            if k == j or self.poset.is_less(k, j):
                mat = dense_mul(self.structure_map(k, j), self._maps[(i, k)])
                self._maps[(i, j)] = mat
                return mat
        raise InvalidInput("no cover path found (inconsistent poset)")

    def verify_functorial(self):
        """Check path-independence on every 2-chain; returns offending triple or None."""
        for (i, j, k) in self.poset.chains(3):
            direct = self.structure_map(i, k)
            composed = dense_mul(self.structure_map(j, k), self.structure_map(i, j))
            if direct != composed:
                return (self.poset.elements[i], self.poset.elements[j], self.poset.elements[k])
        return None

    @classmethod
    def constant(cls, poset: FinitePoset, rank: int = 1) -> "CoefficientFunctor":
        ident = dense_identity(rank)
        maps = {(i, j): ident for i in range(len(poset)) for j in poset.up_covers[i]}
        return cls(poset, [rank] * len(poset), maps)

    def restrict(self, subposet: FinitePoset) -> "CoefficientFunctor":
        """Restriction along an induced subposet (labels must match)."""
        ranks = [self.ranks[self.poset.index[e]] for e in subposet.elements]
        maps = {}
        for i in range(len(subposet)):
            oi = self.poset.index[subposet.elements[i]]
            for j in subposet.up_covers[i]:
                oj = self.poset.index[subposet.elements[j]]
                maps[(i, j)] = self.structure_map(oi, oj)
        return CoefficientFunctor(subposet, ranks, maps)


class LocalSystem(CoefficientFunctor):
    """Coefficient functor whose structure maps are all invertible over Z."""

    def __init__(self, poset, ranks, cover_maps):
        super().__init__(poset, ranks, cover_maps)
        for (i, j), mat in list(self._maps.items()):
            if self.ranks[i] != self.ranks[j]:
                raise InvalidInput("local system maps must be square")
            if abs(det_int(mat)) != 1:
                raise InvalidInput(
                    f"structure map for ({i},{j}) is not invertible over Z")

    @classmethod
    def constant(cls, poset: FinitePoset, rank: int = 1) -> "LocalSystem":
        ident = dense_identity(rank)
        maps = {(i, j): ident for i in range(len(poset)) for j in poset.up_covers[i]}
        return cls(poset, [rank] * len(poset), maps)

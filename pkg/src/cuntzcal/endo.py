"""Unital endomorphisms of O_n and the cocycle calculus for lambda_u.

Every unitary u in O_n determines an endomorphism by twisting the
generators, lambda_u(S_i) = u S_i, and every unital endomorphism arises
this way. Composition obeys the fusion rule

    lambda_u . lambda_v = lambda_{lambda_u(v) u},

the canonical shift phi(x) = sum_i S_i x S_i* is lambda of the two-letter
exchange unitary, and the conjugation cocycles

    u_m = u phi(u) phi^2(u) ... phi^{m-1}(u)

implement lambda_u on the level-r matrix core: lambda_u(x) = u_m x u_m*
whenever x lives at level r <= m. For u a sum of words, compressing
u* d u along the generators defines the dual maps

    a_j(d) = S_j* (u* d u) S_j,      u* d u = sum_j S_j a_j(d) S_j*,

and iterating them drives the diagonal-restriction decision: lambda_u
restricts to an automorphism of the diagonal iff every long enough
composite of the a_j collapses diagonal projections to scalars. The level
sets of composites evolve deterministically, so a repeat without reaching
all-constant is a finite refutation certificate.

Innerness of a permutative automorphism reduces to a word equation:
lambda_w = Ad(z) forces w = z phi(z*), and for w permutative at level K
the witness z must be permutative at level K-1. That equation propagates
values of z along shift edges from a single seed, which makes the search
exact and fast; failure of every seed certifies outerness.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .algebra import AlgebraElement, classify
from .words import check_alphabet

WordTuple = Tuple[int, ...]
Table = Tuple[int, ...]


def phi_apply(x: AlgebraElement, m: int = 1) -> AlgebraElement:
    """Apply the canonical shift endomorphism phi m times."""
    if m < 0:
        raise ValueError("phi has no inverse; m must be >= 0")
    for _ in range(m):
        acc = AlgebraElement.zero(x.n)
        for i in range(1, x.n + 1):
            s = AlgebraElement.isometry(x.n, (i,))
            acc = acc + s * x * s.adjoint()
        x = acc
    return x


class Endo:
    """The endomorphism lambda_u of O_n attached to a unitary u.

    Cocycles u_m are computed on demand and cached; the cache is guarded
    by a lock so shared Endo instances are safe across threads.
    """

    def __init__(self, u: AlgebraElement, check: bool = True):
        if check and not u.is_unitary():
            raise ValueError("lambda_u requires a unitary u")
        self.u = u
        self._cocycles: List[AlgebraElement] = [AlgebraElement.one(u.n), u]
        self._lock = threading.Lock()

    @property
    def n(self) -> int:
        return self.u.n

    def cocycle(self, m: int) -> AlgebraElement:
        """u_m = u phi(u) ... phi^{m-1}(u), via u_m = u phi(u_{m-1})."""
        if m < 0:
            raise ValueError("cocycle index must be >= 0")
        with self._lock:
            while len(self._cocycles) <= m:
                self._cocycles.append(self.u * phi_apply(self._cocycles[-1]))
            return self._cocycles[m]

    def apply(self, x: AlgebraElement) -> AlgebraElement:
        """lambda_u(x) for a normal-form element, by generator substitution."""
        if x.n != self.n:
            raise ValueError("element alphabet does not match the endomorphism")
        images: Dict[int, AlgebraElement] = {}
        for i in range(1, self.n + 1):
            images[i] = self.u * AlgebraElement.isometry(self.n, (i,))
        out = AlgebraElement.zero(self.n)
        iso_cache: Dict[WordTuple, AlgebraElement] = {(): AlgebraElement.one(self.n)}

        def iso_image(word: WordTuple) -> AlgebraElement:
            if word not in iso_cache:
                iso_cache[word] = iso_image(word[:-1]) * images[word[-1]]
            return iso_cache[word]

        for term, coeff in x.terms():
            piece = iso_image(term.alpha.letters) * iso_image(term.beta.letters).adjoint()
            out = out + piece.scale(coeff)
        return out

    def compose(self, other: "Endo") -> "Endo":
        return Endo(fusion_compose(self.u, other.u), check=False)


def fusion_compose(u: AlgebraElement, v: AlgebraElement) -> AlgebraElement:
    """Unitary inducing lambda_u . lambda_v, namely lambda_u(v) u."""
    return Endo(u, check=False).apply(v) * u


def k_weight(u: AlgebraElement) -> int:
    """Largest gauge grade l(alpha) - l(beta) in the reduced form of u.

    This weight controls how far the dual maps can push diagonal levels:
    a_j maps level l into level l + weight - 1 once l clears the word
    lengths of u. Weight <= 1 is the regime where the level is
    non-increasing and the diagonal decision below applies.
    """
    reduced = u.reduced()
    if reduced.is_zero():
        raise ValueError("zero element has no weight")
    return max(reduced.grades())


def a_map(u: AlgebraElement, j: int, d: AlgebraElement) -> AlgebraElement:
    """The j-th dual map a_j(d) = S_j* u* d u S_j."""
    if not (1 <= j <= u.n):
        raise ValueError(f"generator index {j} outside 1..{u.n}")
    s = AlgebraElement.isometry(u.n, (j,))
    return s.adjoint() * u.adjoint() * d * u * s


def t_map(u: AlgebraElement, mu: Sequence[int], d: AlgebraElement) -> AlgebraElement:
    """Composite dual map along the word mu, first letter applied first.

    With this order the cocycle conjugation of a diagonal element expands as

        u_k* d u_k = sum over mu of length k of S_mu t_map(u, mu, d) S_mu*.
    """
    for j in mu:
        d = a_map(u, j, d)
    return d


# ---- dual-map tables on a fixed diagonal level -----------------------------


@dataclass(frozen=True)
class DualMapTable:
    """The dual maps a_j restricted to one diagonal level, as index tables.

    tables[j-1][g] = a means the minimal projection at index g is a
    subprojection of a_j applied to the minimal projection at index a; on
    functions this is composition, a_j(h) = h . table_j. Construction
    verifies that each a_j(P_a) really is a sum of level-`level` minimal
    projections and that these sums partition the identity, so a table in
    hand is a proof that the level is closed under every a_j.
    """

    n: int
    level: int
    tables: Tuple[Table, ...]

    @staticmethod
    def from_unitary(
        u: AlgebraElement, level: Optional[int] = None, max_level: int = 12
    ) -> "DualMapTable":
        n = u.n
        start = level if level is not None else u.reduced().max_word_length()
        for lvl in range(start, max_level + 1):
            tables = _dual_tables_at_level(u, lvl)
            if tables is not None:
                return DualMapTable(n, lvl, tables)
        raise ValueError(
            f"dual maps do not close on any diagonal level <= {max_level}"
        )


def _dual_tables_at_level(
    u: AlgebraElement, level: int
) -> Optional[Tuple[Table, ...]]:
    """Index tables for every a_j at one level, or None if not closed there.

    Off-diagonal or non-0/1 output means no level will ever close (padding
    cannot repair either), so those cases raise instead of retrying.
    """
    from .words import word_from_index

    n = u.n
    size = n**level
    tables: List[Table] = []
    for j in range(1, n + 1):
        assignment: List[Optional[int]] = [None] * size
        for a in range(size):
            image = a_map(
                u, j, AlgebraElement.projection(n, word_from_index(n, level, a))
            ).reduced()
            for (alpha, beta), coeff in image._data.items():
                if alpha != beta or coeff != coeff.conjugate() or coeff.re != 1:
                    raise ValueError(
                        "dual maps leave the diagonal; u is outside the "
                        "sum-of-words regime these tables require"
                    )
                if len(alpha) > level:
                    return None  # output lives deeper; retry at a higher level
            # Expand the 0/1 diagonal image to level `level` and record it.
            for (alpha, _), _ in image._data.items():
                pad = level - len(alpha)
                base = 0
                for letter in alpha:
                    base = base * n + (letter - 1)
                lo = base * n**pad
                for g in range(lo, lo + n**pad):
                    if assignment[g] is not None:
                        raise ValueError(
                            "dual map images overlap; projections do not "
                            "partition the identity"
                        )
                    assignment[g] = a
        if any(entry is None for entry in assignment):
            raise ValueError("dual map images do not cover the identity")
        tables.append(tuple(assignment))  # type: ignore[arg-type]
    return tuple(tables)


# ---- constancy iteration ---------------------------------------------------


@dataclass(frozen=True)
class CycleEvidence:
    """Refutation certificate: a pair of points that never merges.

    Applying the generators letter by letter along word carries the
    unordered pair back to itself with the two images distinct at every
    step. Pumping the word therefore yields arbitrarily long composites
    that keep the pair split, so no depth has all composites constant.
    Letters are 1-based indices into the generator family.
    """

    pair: Tuple[int, int]
    word: Tuple[int, ...]


@dataclass(frozen=True)
class DiagonalVerdict:
    """Outcome of a diagonal-restriction decision.

    is_aut True comes with depth m: every m-fold composite of the dual
    maps is constant. is_aut False carries CycleEvidence. level records
    the diagonal level the iteration ran on.
    """

    is_aut: bool
    depth: Optional[int]
    level: int
    evidence: Optional[CycleEvidence] = None


def constancy_iteration(
    tables: Sequence[Table], max_steps: int = 4096
) -> Tuple[Optional[int], Optional[CycleEvidence]]:
    """Smallest m with all m-fold composites constant, or cycle evidence.

    A composite is constant exactly when it merges every pair of points,
    so the decision lives on the unordered off-diagonal pairs: each
    generator that keeps a pair's images distinct contributes an edge to
    the image pair. A directed cycle pumps arbitrarily long non-merging
    words and refutes every depth; otherwise the graph is acyclic and the
    answer is one more than its longest path. max_steps is kept for
    callers that tuned the older fixed-point iteration; the pair graph is
    quadratic in the table length, so no step budget is needed.
    """
    del max_steps
    generators = [tuple(t) for t in tables]
    if not generators or len(generators[0]) <= 1:
        return 0, None
    size = len(generators[0])
    nodes = [(x, y) for x in range(size) for y in range(x + 1, size)]
    index = {pair: i for i, pair in enumerate(nodes)}
    edges: List[List[Tuple[int, int]]] = []
    for x, y in nodes:
        out = []
        for letter, g in enumerate(generators, start=1):
            gx, gy = g[x], g[y]
            if gx != gy:
                out.append((index[(min(gx, gy), max(gx, gy))], letter))
        edges.append(out)
    # Iterative DFS; states 0 fresh, 1 on stack, 2 finished. longest[v] is
    # the longest edge count leaving v through the acyclic part.
    state = [0] * len(nodes)
    longest = [0] * len(nodes)
    for start in range(len(nodes)):
        if state[start]:
            continue
        state[start] = 1
        stack = [(start, iter(edges[start]))]
        trail = [(start, 0)]
        depth_of = {start: 0}
        while stack:
            node, pending = stack[-1]
            step = next(pending, None)
            if step is None:
                stack.pop()
                trail.pop()
                del depth_of[node]
                state[node] = 2
                longest[node] = max(
                    (1 + longest[target] for target, _ in edges[node]), default=0
                )
                continue
            target, letter = step
            if state[target] == 1:
                loop = [entry for entry in trail[depth_of[target] + 1 :]]
                word = tuple(entered for _, entered in loop) + (letter,)
                return None, CycleEvidence(nodes[target], word)
            if state[target] == 0:
                state[target] = 1
                stack.append((target, iter(edges[target])))
                trail.append((target, letter))
                depth_of[target] = len(trail) - 1
    return 1 + max(longest, default=0), None


def diagonal_aut_sn(
    u: AlgebraElement, max_level: int = 12, max_steps: int = 4096
) -> DiagonalVerdict:
    """Decide whether lambda_u restricts to an automorphism of the diagonal.

    Applies to unitary sums of words of weight <= 1 (the regime where the
    dual maps do not raise the diagonal level). The unit is accepted at
    depth 0. The verdict is relative to the closure level it reports: a
    refutation says the composites on that level never all collapse.
    """
    facts = classify(u)
    if not facts.is_unitary or not facts.sum_of_words:
        raise ValueError("diagonal decision requires a unitary sum of words")
    if k_weight(u) > 1:
        raise ValueError("diagonal decision requires weight <= 1")
    table = DualMapTable.from_unitary(u, max_level=max_level)
    if table.level == 0:
        return DiagonalVerdict(True, 0, 0)
    depth, evidence = constancy_iteration(table.tables, max_steps=max_steps)
    if depth is not None:
        return DiagonalVerdict(True, depth, table.level)
    return DiagonalVerdict(False, None, table.level, evidence)


# ---- inner witnesses for permutative automorphisms -------------------------


def inner_witness_table(n: int, level: int, table: Sequence[int]) -> Optional[List[int]]:
    """Solve w = z phi(z*) for z given w permutative at `level`, as tables.

    w acts on words of length `level`; a witness z acts one level down.
    Writing M = n^(level-1), the equation pins, for every first letter i
    (0-based) and every x < M,

        w[i*M + z[x]] = z[(i*M + x) // n] * n + (x mod n),

    so one assigned value of z forces values along all shift images
    (i*M + x) // n, and every point of [M] is reached from x = 0 within
    level-1 steps. Each candidate seed z[0] (constrained by the fixed
    word 1^(level-1)) is propagated and checked; exhausting all seeds
    certifies that no witness exists.
    """
    check_alphabet(n)
    if level == 0:
        return []  # w is the unit; z = 1 witnesses it
    size = n**level
    if len(table) != size or sorted(table) != list(range(size)):
        raise ValueError("w must be a permutation table of size n^level")
    m_size = size // n
    seeds = [c for c in range(m_size) if table[c] == c * n]
    for seed in seeds:
        z: List[Optional[int]] = [None] * m_size
        z[0] = seed
        stack = [0]
        consistent = True
        while stack and consistent:
            x = stack.pop()
            zx = z[x]
            for i in range(n):
                value = table[i * m_size + zx]
                if value % n != x % n:
                    consistent = False
                    break
                y = (i * m_size + x) // n
                zy = value // n
                if z[y] is None:
                    z[y] = zy
                    stack.append(y)
                elif z[y] != zy:
                    consistent = False
                    break
        if not consistent or any(v is None for v in z):
            continue
        if len(set(z)) != m_size:
            continue
        # Propagation consumed each (i, x) constraint once; re-verify anyway.
        if all(
            table[i * m_size + z[x]] == z[(i * m_size + x) // n] * n + (x % n)
            for i in range(n)
            for x in range(m_size)
        ):
            return z  # type: ignore[return-value]
    return None


def _element_to_perm_table(w: AlgebraElement) -> Tuple[int, Tuple[int, ...]]:
    """Level and table of a permutative unitary, padding to a common level."""
    facts = classify(w)
    if not (facts.is_unitary and facts.sum_of_words and facts.gauge_invariant):
        raise ValueError("element is not a permutative unitary")
    level = facts.core_level or 0
    n = w.n
    size = n**level
    table: List[Optional[int]] = [None] * size
    for (alpha, beta), _ in w.reduced()._data.items():
        a = b = 0
        for letter in alpha:
            a = a * n + (letter - 1)
        for letter in beta:
            b = b * n + (letter - 1)
        pad = level - len(alpha)
        for g in range(n**pad):
            src, dst = b * n**pad + g, a * n**pad + g
            if table[src] is not None:
                raise ValueError("element is not a permutation of words")
            table[src] = dst
    if sorted(table) != list(range(size)):  # type: ignore[arg-type]
        raise ValueError("element is not a permutation of words")
    return level, tuple(table)  # type: ignore[arg-type]


def inner_witness(w: AlgebraElement) -> Optional[AlgebraElement]:
    """A permutative z with lambda_w = Ad(z), or None certifying outerness.

    Requires w to be a permutative unitary. Any inner witness for such a w
    is itself permutative one level below w, so the table solver is a
    complete search.
    """
    level, table = _element_to_perm_table(w)
    z = inner_witness_table(w.n, level, table)
    if z is None:
        return None
    n = w.n
    if not z:
        return AlgebraElement.one(n)
    from .words import word_from_index

    out = AlgebraElement.zero(n)
    for x, zx in enumerate(z):
        out = out + AlgebraElement.monomial(
            n, word_from_index(n, level - 1, zx), word_from_index(n, level - 1, x)
        )
    return out

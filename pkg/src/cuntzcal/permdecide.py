"""Decision procedures for permutative endomorphisms of O_n.

A permutation sigma of the length-k words gives the unitary
u_sigma = sum_alpha S_{sigma(alpha)} S_alpha* and the endomorphism
lambda_sigma. Everything here works on sigma's index table.

Three nested questions are decided exactly:

  * tree structure: the reduced maps d_j(alpha) = drop_last(sigma(j alpha))
    on level k-1 must all be rooted trees for lambda_sigma to be invertible;
  * diagonal restriction: lambda_sigma fixes the diagonal masa globally iff
    composites of those same maps eventually all become constant
    (decide_diagonal);
  * full invertibility: lambda_sigma is an automorphism iff the conjugated
    cocycle w_m = u_m* u* u_m lands in the level-m matrix core for some m.

The third test never materializes w_m. The inverse cocycle staircase is a
streaming transducer with states the level-(k-1) words: feeding letter c in
state s applies sigma^{-1} to the window s.c, emits its first letter and
keeps the rest as the new state. Membership of w_m in the core becomes two
conditions on synchronized transducer runs started from a word w and from
its sigma^{-1}-image: (i) both runs are in the same state after m-1 shared
input letters, and (ii) whenever two starting words produce equal first-run
output prefixes, their second-run output prefixes agree as well. Reachable
state sets for (i), and flagged state quadruples for (ii), evolve
deterministically through a finite space, so the first repeated level set
refutes and the first depth satisfying both conditions accepts. Acceptance
yields the inverse permutation directly from the paired runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

import numpy as np

from .algebra import AlgebraElement
from .endo import DiagonalVerdict, constancy_iteration, inner_witness_table
from .words import check_alphabet, word_from_index

Table = Tuple[int, ...]


@dataclass(frozen=True)
class PermUnitary:
    """A permutation of the level-k words, standing for u_sigma.

    table[i] is the image index of the word with index i; validation
    guarantees the table is a bijection of the right size.
    """

    n: int
    k: int
    table: Table

    def __post_init__(self) -> None:
        check_alphabet(self.n)
        if self.k < 0:
            raise ValueError("word length k must be >= 0")
        size = self.n**self.k
        if len(self.table) != size or sorted(self.table) != list(range(size)):
            raise ValueError(f"table is not a permutation of 0..{size - 1}")

    @staticmethod
    def identity(n: int, k: int) -> "PermUnitary":
        return PermUnitary(n, k, tuple(range(n**k)))

    def inverse_table(self) -> Table:
        inv = [0] * len(self.table)
        for src, dst in enumerate(self.table):
            inv[dst] = src
        return tuple(inv)

    def adjoint(self) -> "PermUnitary":
        """u_sigma* = u of the inverse permutation."""
        return PermUnitary(self.n, self.k, self.inverse_table())

    def compose(self, other: "PermUnitary") -> "PermUnitary":
        """Table of sigma . rho, the unitary product u_sigma u_rho."""
        if (other.n, other.k) != (self.n, self.k):
            raise ValueError("composition needs matching n and k")
        return PermUnitary(
            self.n, self.k, tuple(self.table[other.table[i]] for i in range(len(self.table)))
        )

    def pad_level(self, k2: int) -> "PermUnitary":
        """The same unitary viewed at level k2 >= k (acts on first k letters)."""
        if k2 < self.k:
            raise ValueError("pad_level cannot shrink the level")
        tail = self.n ** (k2 - self.k)
        table = tuple(
            self.table[v // tail] * tail + v % tail for v in range(self.n**k2)
        )
        return PermUnitary(self.n, k2, table)

    def reduce_level(self) -> "PermUnitary":
        """Minimal-level representation of the same unitary."""
        for h in range(self.k + 1):
            tail = self.n ** (self.k - h)
            head = self.table[:: tail]
            if all(v % tail == 0 for v in head) and all(
                self.table[x * tail + y] == head[x] + y
                for x in range(self.n**h)
                for y in range(tail)
            ):
                return PermUnitary(self.n, h, tuple(v // tail for v in head))
        return self

    def is_identity(self) -> bool:
        return all(v == i for i, v in enumerate(self.table))

    def to_element(self) -> AlgebraElement:
        acc = AlgebraElement.zero(self.n)
        for src, dst in enumerate(self.table):
            acc = acc + AlgebraElement.monomial(
                self.n,
                word_from_index(self.n, self.k, dst),
                word_from_index(self.n, self.k, src),
            )
        return acc

    @staticmethod
    def from_element(x: AlgebraElement) -> "PermUnitary":
        from .endo import _element_to_perm_table

        level, table = _element_to_perm_table(x)
        return PermUnitary(x.n, level, table)

    def to_json(self) -> str:
        return json.dumps(
            {"schema": 1, "n": self.n, "k": self.k, "map": list(self.table)}
        )

    @staticmethod
    def from_json(text: str) -> "PermUnitary":
        payload = json.loads(text)
        if payload.get("schema") != 1:
            raise ValueError(f"unsupported permutation schema: {payload.get('schema')!r}")
        return PermUnitary(payload["n"], payload["k"], tuple(payload["map"]))


def flip_flop() -> PermUnitary:
    """The letter exchange S_1 <-> S_2 of O_2 as a level-1 permutation."""
    return PermUnitary(2, 1, (1, 0))


# ---- reduced maps and tree diagnostics -------------------------------------


@dataclass(frozen=True)
class TreeDiagnostic:
    """Shape facts for one functional graph on the level-(k-1) words.

    A map is a rooted tree when it has exactly one fixed point (the root)
    and no other cycle. The shape string is the sorted-parenthesis code of
    the unlabeled tree; leaves are vertices with no preimage besides
    themselves; height is the longest distance to the root.
    """

    is_tree: bool
    root: Optional[int]
    height: Optional[int]
    leaf_count: Optional[int]
    shape: Optional[str]


def tree_check(mapping: Sequence[int]) -> TreeDiagnostic:
    """Diagnose whether a self-map of a finite set is a rooted tree."""
    size = len(mapping)
    roots = [x for x in range(size) if mapping[x] == x]
    if len(roots) != 1:
        return TreeDiagnostic(False, None, None, None, None)
    root = roots[0]
    depth = [-1] * size
    depth[root] = 0
    for start in range(size):
        path = []
        x = start
        while depth[x] < 0:
            path.append(x)
            x = mapping[x]
            if x in path:
                return TreeDiagnostic(False, None, None, None, None)
        base = depth[x]
        for offset, node in enumerate(reversed(path), start=1):
            depth[node] = base + offset
    children: List[List[int]] = [[] for _ in range(size)]
    for x in range(size):
        if x != root:
            children[mapping[x]].append(x)
    leaf_count = sum(1 for x in range(size) if not children[x])

    def code(v: int) -> str:
        return "(" + "".join(sorted(code(c) for c in children[v])) + ")"

    return TreeDiagnostic(True, root, max(depth), leaf_count, code(root))


@dataclass(frozen=True)
class ReducedMapFamily:
    """The level-(k-1) maps f_i(alpha) = drop_last(sigma(i alpha)).

    The same family drives both decision criteria: constancy of all long
    composites is exactly invertibility on the diagonal, and that forces
    each single map to be eventually constant, hence a rooted tree.  The
    tree shapes are the census invariants.  (Building from the inverse
    table instead yields maps whose tree-ness is NOT necessary: there are
    automorphisms with a non-tree on that side.)
    """

    n: int
    k: int
    maps: Tuple[Table, ...]

    @staticmethod
    def from_perm(pu: PermUnitary) -> "ReducedMapFamily":
        if pu.k < 1:
            raise ValueError("reduced maps need k >= 1")
        return ReducedMapFamily(pu.n, pu.k, dual_maps(pu))

    def diagnostics(self) -> Tuple[TreeDiagnostic, ...]:
        return tuple(tree_check(m) for m in self.maps)


def dual_maps(pu: PermUnitary) -> Tuple[Table, ...]:
    """The maps d_j(alpha) = drop_last(sigma(j alpha)) on level k-1 indices.

    d_j is the finite shadow of the dual homomorphism S_j* u* (.) u S_j:
    that map sends the projection onto alpha to the sum of projections
    over the d_j-preimage of alpha.  Composites along a word then realize
    the iterated duals, so one family serves tree check and diagonal
    decision alike.
    """
    if pu.k < 1:
        raise ValueError("dual maps need k >= 1")
    stride = pu.n ** (pu.k - 1)
    return tuple(
        tuple(pu.table[(j - 1) * stride + a] // pu.n for a in range(stride))
        for j in range(1, pu.n + 1)
    )


def decide_diagonal(pu: PermUnitary, max_steps: int = 4096) -> DiagonalVerdict:
    """Does lambda_sigma restrict to an automorphism of the diagonal masa?"""
    if pu.k <= 1:
        return DiagonalVerdict(True, 0, max(pu.k - 1, 0))
    duals = dual_maps(pu)
    depth, evidence = constancy_iteration(duals, max_steps=max_steps)
    if depth is not None:
        return DiagonalVerdict(True, depth, pu.k - 1)
    return DiagonalVerdict(False, None, pu.k - 1, evidence)


# ---- stabilization automaton ------------------------------------------------


def stabilization_bound(n: int, k: int) -> int:
    """Depth past which a missing core membership refutes invertibility."""
    return n ** (2 * (k - 1)) + k - 1


def _stab_decide(
    n: int,
    k: int,
    table: Sequence[int],
    inv: Sequence[int],
    budget: Optional[int],
) -> Tuple[str, Optional[int]]:
    """Core stabilization decision on raw tables.

    Returns ('aut', m), ('not_aut', None) or ('undecided', budget). The
    caller guarantees k >= 1 and that inv is the inverse of table.
    """
    size = n**k
    stride = size // n
    # Transducer tables for one sigma^{-1} window: state s, input c.
    delta = [inv[idx] % stride for idx in range(size)]
    omega = [inv[idx] // stride for idx in range(size)]
    # States are packed into ints: a run pair (p, q) becomes p*stride + q
    # and a pair of runs (pq1, pq2) becomes pq1*stride^2 + pq2. Ordered
    # quads come in swap-closed sets throughout (the starts are symmetric
    # and the step treats both runs alike), so only the sorted half is
    # kept; verdicts and depths are untouched by that quotient.
    square = stride * stride
    # One-step images, expanded lazily and cached per call: refuting
    # evolutions cycle, so states recur across depths. The hot children
    # are the ones whose second-run outputs disagree, the births of flags.
    child_all: Dict[int, Tuple[int, ...]] = {}
    child_hot: Dict[int, Tuple[int, ...]] = {}
    pair_succ: Dict[int, Tuple[int, ...]] = {}

    def expand(state: int) -> Tuple[int, ...]:
        pq1, pq2 = divmod(state, square)
        p1, q1 = divmod(pq1, stride)
        p2, q2 = divmod(pq2, stride)
        alls: List[int] = []
        hots: List[int] = []
        for c1 in range(n):
            out = omega[p1 * n + c1]
            nxt1 = delta[p1 * n + c1] * stride + delta[q1 * n + c1]
            side1 = omega[q1 * n + c1]
            for c2 in range(n):
                if omega[p2 * n + c2] != out:
                    continue
                nxt2 = delta[p2 * n + c2] * stride + delta[q2 * n + c2]
                lo, hi = (nxt1, nxt2) if nxt1 <= nxt2 else (nxt2, nxt1)
                child = lo * square + hi
                alls.append(child)
                if side1 != omega[q2 * n + c2]:
                    hots.append(child)
        child_all[state] = kids = tuple(alls)
        child_hot[state] = tuple(hots)
        return kids

    # Paired starts: run one from w, run two from sigma^{-1}(w).
    pairs: Set[int] = set()
    by_first_output: Dict[int, List[Tuple[int, int]]] = {}
    for w in range(size):
        v1 = inv[w]
        v2 = inv[v1]
        pq = (v1 % stride) * stride + (v2 % stride)
        pairs.add(pq)
        by_first_output.setdefault(v1 // stride, []).append((pq, v2 // stride))
    quads: Set[int] = set()
    flagged: Set[int] = set()
    for group in by_first_output.values():
        for i, (pq1, b1) in enumerate(group):
            for pq2, b2 in group[i:]:
                lo, hi = (pq1, pq2) if pq1 <= pq2 else (pq2, pq1)
                state = lo * square + hi
                quads.add(state)
                if b1 != b2:
                    flagged.add(state)

    diagonal = {p * stride + p for p in range(stride)}
    bound = stabilization_bound(n, k)
    limit = bound if budget is None else min(budget, bound)
    synced = False
    seen_pre: Dict[Tuple[FrozenSet[int], FrozenSet[int], FrozenSet[int]], int] = {}
    seen_post: Dict[FrozenSet[int], int] = {}
    depth = 0
    while True:
        if not synced and pairs <= diagonal:
            synced = True  # stays true: diagonal pairs evolve diagonally
        if synced and not flagged:
            # Both conditions persist from here on, so the smallest core
            # level is this depth, floored at the starting level k.
            return "aut", max(depth + 1, k)
        if synced:
            key_post = frozenset(flagged)
            if key_post in seen_post:
                return "not_aut", None
            seen_post[key_post] = depth
        else:
            key_pre = (frozenset(pairs), frozenset(quads), frozenset(flagged))
            if key_pre in seen_pre:
                return "not_aut", None
            seen_pre[key_pre] = depth
        if depth + 1 > limit:
            return ("not_aut", None) if limit == bound else ("undecided", budget)
        # Advance every run by one input letter.
        new_flagged: Set[int] = set()
        if synced:
            # Past synchronization no new flags can arise; evolve flags only.
            for state in flagged:
                kids = child_all.get(state)
                if kids is None:
                    kids = expand(state)
                new_flagged.update(kids)
            flagged = new_flagged
        else:
            new_quads: Set[int] = set()
            for state in quads:
                kids = child_all.get(state)
                if kids is None:
                    kids = expand(state)
                new_quads.update(kids)
                new_flagged.update(kids if state in flagged else child_hot[state])
            new_pairs: Set[int] = set()
            for pq in pairs:
                moves = pair_succ.get(pq)
                if moves is None:
                    p, q = divmod(pq, stride)
                    moves = tuple(
                        delta[p * n + c] * stride + delta[q * n + c] for c in range(n)
                    )
                    pair_succ[pq] = moves
                new_pairs.update(moves)
            pairs = new_pairs
            quads, flagged = new_quads, new_flagged
        depth += 1


def _materialize_inverse(
    n: int, k: int, inv: Sequence[int], m: int
) -> Table:
    """Inverse permutation at level m from the paired transducer runs."""
    size = n**k
    stride = size // n
    delta = [inv[idx] % stride for idx in range(size)]
    omega = [inv[idx] // stride for idx in range(size)]
    out_size = n**m
    table: List[Optional[int]] = [None] * out_size
    suffixes = n ** (m - 1)
    for w in range(size):
        v1 = inv[w]
        v2 = inv[v1]
        p, a = v1 % stride, v1 // stride
        q, b = v2 % stride, v2 // stride
        for u in range(suffixes):
            x, y = a, b
            pp, qq = p, q
            rest = u
            for pos in range(m - 2, -1, -1):
                c = (rest // n**pos) % n
                x = x * n + omega[pp * n + c]
                y = y * n + omega[qq * n + c]
                pp = delta[pp * n + c]
                qq = delta[qq * n + c]
            if table[x] is not None and table[x] != y:
                raise RuntimeError("inverse extraction disagreed; automaton bug")
            table[x] = y
    if any(v is None for v in table):
        raise RuntimeError("inverse extraction left gaps; automaton bug")
    return tuple(table)  # type: ignore[arg-type]


# ---- cocycle staircases and fusion on tables --------------------------------


def staircase_table(pu: PermUnitary, m: int) -> np.ndarray:
    """Permutation array of the cocycle u_m at level m + k - 1.

    The deepest window acts first: u_m applied to a word runs sigma over
    letter windows starting at the bottom position and climbing to the top.
    """
    if m < 1:
        raise ValueError("staircase needs m >= 1")
    n, k = pu.n, pu.k
    level = m + k - 1
    total = n**level
    sigma = np.asarray(pu.table, dtype=np.int64)
    # Deepest window first; each shallower window wraps around the result.
    result: Optional[np.ndarray] = None
    idx = np.arange(total, dtype=np.int64)
    for j in range(m - 1, -1, -1):
        right = n ** (level - j - k)
        mid = (idx // right) % (n**k)
        window = idx + (sigma[mid] - mid) * right
        result = window if result is None else window[result]
    return result


def fusion_table(a: PermUnitary, b: PermUnitary) -> PermUnitary:
    """Permutation of lambda_a . lambda_b, reduced to its minimal level.

    The composite is lambda of lambda_a(u_b) u_a; on tables this conjugates
    b's padded table by the level-k_b staircase of a and composes with a's
    padded table.
    """
    if a.n != b.n:
        raise ValueError("fusion needs one alphabet")
    n = a.n
    if b.k == 0:
        return a.reduce_level()
    if a.k == 0:
        return b.reduce_level()
    level = a.k + b.k - 1
    cocycle = staircase_table(a, b.k)  # level b.k + a.k - 1
    inv_cocycle = np.empty_like(cocycle)
    inv_cocycle[cocycle] = np.arange(len(cocycle), dtype=np.int64)
    b_padded = np.asarray(b.pad_level(level).table, dtype=np.int64)
    conj = cocycle[b_padded[inv_cocycle]]
    a_padded = np.asarray(a.pad_level(level).table, dtype=np.int64)
    fused = conj[a_padded]
    return PermUnitary(n, level, tuple(int(v) for v in fused)).reduce_level()


# ---- the automorphism decision ----------------------------------------------


@dataclass(frozen=True)
class AutVerdict:
    """Outcome of decide_automorphism.

    status is 'automorphism', 'not_automorphism' or 'undecided'. For
    automorphisms m is the accepted core level and inverse the permutation
    inducing lambda^{-1} (at its minimal level), verified by fusing back to
    the identity on both sides. For refutations reason says which necessary
    condition failed.
    """

    status: str
    m: Optional[int] = None
    inverse: Optional[PermUnitary] = None
    reason: Optional[str] = None

    @property
    def is_aut(self) -> Optional[bool]:
        if self.status == "automorphism":
            return True
        if self.status == "not_automorphism":
            return False
        return None


def decide_automorphism(
    pu: PermUnitary,
    budget_m: Optional[int] = None,
    materialize: bool = True,
) -> AutVerdict:
    """Decide whether lambda_sigma is an automorphism of O_n.

    Runs the necessary tree and diagonal filters, then the stabilization
    automaton. With budget_m None the automaton runs to the theoretical
    refutation bound, so the verdict is always definite; a smaller budget
    may return 'undecided'.
    """
    if pu.k == 0:
        return AutVerdict("automorphism", 0, PermUnitary.identity(pu.n, 0))
    for i, diag in enumerate(ReducedMapFamily.from_perm(pu).diagnostics(), start=1):
        if not diag.is_tree:
            return AutVerdict(
                "not_automorphism", reason=f"reduced map {i} is not a rooted tree"
            )
    if not decide_diagonal(pu).is_aut:
        return AutVerdict(
            "not_automorphism", reason="diagonal restriction is not surjective"
        )
    inv = pu.inverse_table()
    status, m = _stab_decide(pu.n, pu.k, pu.table, inv, budget_m)
    if status == "undecided":
        return AutVerdict("undecided", reason=f"no decision within budget {budget_m}")
    if status == "not_aut":
        return AutVerdict(
            "not_automorphism", reason="conjugated cocycles never enter the core"
        )
    if not materialize:
        return AutVerdict("automorphism", m)
    inverse = PermUnitary(pu.n, m, _materialize_inverse(pu.n, pu.k, inv, m)).reduce_level()
    for left, right in ((pu, inverse), (inverse, pu)):
        if not fusion_table(left, right).is_identity():
            raise RuntimeError("inverse verification failed; automaton bug")
    return AutVerdict("automorphism", m, inverse)


# ---- orders and inner equivalence -------------------------------------------

# Fusion powers grow by k-1 letters per step; cap the table size we are
# willing to materialize while chasing an order.
_MAX_POWER_LEVEL_SIZE = 2**24


def power_order(
    pu: PermUnitary, max_order: int = 24
) -> Tuple[Optional[int], Optional[int]]:
    """(order of lambda_sigma, order of its image modulo inners).

    Returns (None, None) when lambda_sigma is not an automorphism, and None
    entries when an order exceeds max_order or the table cap. Innerness of
    powers is solved once per p <= order/2; the inverse power shares the
    answer because a class and its inverse are inner together.
    """
    verdict = decide_automorphism(pu, materialize=False)
    if verdict.is_aut is not True:
        return None, None
    powers: List[PermUnitary] = [PermUnitary.identity(pu.n, 0), pu.reduce_level()]
    aut_order: Optional[int] = 1 if pu.reduce_level().is_identity() else None
    while aut_order is None and len(powers) - 1 < max_order:
        if pu.n ** (powers[-1].k + pu.k - 1) > _MAX_POWER_LEVEL_SIZE:
            return None, None
        nxt = fusion_table(pu, powers[-1])
        powers.append(nxt)
        if nxt.is_identity():
            aut_order = len(powers) - 1
    if aut_order is None:
        return None, None
    inner_known: Dict[int, bool] = {aut_order: True}
    out_order = aut_order
    for p in range(1, aut_order):
        partner = aut_order - p
        if partner in inner_known and partner < p:
            result = inner_known[partner]
        else:
            w = powers[p]
            result = inner_witness_table(w.n, w.k, w.table) is not None
        inner_known[p] = result
        if result:
            out_order = p
            break
    return aut_order, out_order


def out_equivalent(a: PermUnitary, b: PermUnitary) -> bool:
    """Do lambda_a and lambda_b agree modulo inner automorphisms?

    Both arguments must be automorphisms; the composite of lambda_a with
    lambda_b's inverse is tested for an inner witness, which is a complete
    check for permutative unitaries.
    """
    va = decide_automorphism(a)
    vb = decide_automorphism(b)
    if va.is_aut is not True or vb.is_aut is not True:
        raise ValueError("out equivalence is defined for automorphisms only")
    w = fusion_table(a, vb.inverse)
    return inner_witness_table(w.n, w.k, w.table) is not None

"""Exact censuses of permutative endomorphisms at a fixed word level.

Counting runs over the permutations sigma of the length-k words. Two engines
produce identical reports. The brute engine walks all (n^k)! permutations
and serves as the oracle for small levels. The orbit engine enumerates only
the data the decision procedures actually consume: an n-tuple of rooted
trees on the level-(k-1) words, balanced so that every vertex absorbs n
incoming edges across the tuple (root loops included), together with a
choice of final output letters. Relabeling the level-(k-1) words conjugates
lambda_sigma by an inner permutative unitary, so every verdict is constant
along relabeling orbits and each orbit is decided once, at a canonically
anchored representative.

Census quantities: b counts the sigma whose endomorphism restricts to an
automorphism of the diagonal, d counts full automorphisms of O_n, and the
shape table records which unlabeled rooted trees occur as reduced maps of
endomorphisms, of diagonal-preserving sigma, and of automorphisms.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import (
    Callable,
    Dict,
    Iterator,
    List,
    Optional,
    Sequence,
    Set,
    TextIO,
    Tuple,
)

from .endo import constancy_iteration
from .permdecide import PermUnitary, _stab_decide, out_equivalent, tree_check
from .words import check_alphabet

Table = Tuple[int, ...]
TreeTuple = Tuple[Table, ...]

Progress = Optional[Callable[[str], None]]


# ---- unlabeled shapes --------------------------------------------------------


def _child_multisets(
    total: int, pool: Sequence[Tuple[int, str]], start: int = 0
) -> Iterator[Tuple[str, ...]]:
    # Multisets of earlier shapes with sizes summing to total; the index
    # lower bound keeps every multiset unique.
    if total == 0:
        yield ()
        return
    for idx in range(start, len(pool)):
        size, code = pool[idx]
        if size <= total:
            for rest in _child_multisets(total - size, pool, idx):
                yield (code,) + rest


def rooted_shapes(size: int) -> Tuple[str, ...]:
    """Sorted parenthesis codes of all unlabeled rooted trees on size nodes."""
    if size < 1:
        raise ValueError("a rooted tree needs at least one node")
    by_size: List[Tuple[str, ...]] = [(), ("()",)]
    for m in range(2, size + 1):
        pool = [(s, code) for s in range(1, m) for code in by_size[s]]
        acc = {
            "(" + "".join(sorted(parts)) + ")"
            for parts in _child_multisets(m - 1, pool)
        }
        by_size.append(tuple(sorted(acc)))
    return by_size[size]


def _split_top(code: str) -> List[str]:
    parts: List[str] = []
    depth = start = 0
    for pos, ch in enumerate(code):
        depth += 1 if ch == "(" else -1
        if depth == 0:
            parts.append(code[start : pos + 1])
            start = pos + 1
    return parts


def shape_leaves(shape: str) -> int:
    """Leaf count of a shape code; childless vertices print as ()."""
    return shape.count("()")


def shape_admits_endo(shape: str, n: int) -> bool:
    """Can this shape occur as a reduced map of a level-k permutation?

    Incoming degree counts the root loop, and across the n reduced maps of
    one sigma every vertex absorbs exactly n edges, so a single map uses at
    most n: at most n - 1 children at the root, at most n elsewhere. Any
    such tree also extends to a balanced family, so the bound is exact.
    """
    def fits(code: str, at_root: bool) -> bool:
        kids = _split_top(code[1:-1])
        limit = n - 1 if at_root else n
        return len(kids) <= limit and all(fits(kid, False) for kid in kids)

    return fits(shape, True)


def anchor_tree(shape: str) -> Table:
    """A fixed labeled copy of the shape: depth-first labels along the code."""
    parent: List[int] = []

    def build(code: str, par: int) -> None:
        v = len(parent)
        parent.append(par if par >= 0 else v)
        for child in _split_top(code[1:-1]):
            build(child, v)

    build(shape, -1)
    return tuple(parent)


def tree_automorphisms(tree: Sequence[int]) -> Tuple[Table, ...]:
    """All relabelings g with g(tree(v)) = tree(g(v)), as permutation tables.

    Isomorphic sibling subtrees may be permuted; nothing else moves. The
    group is assembled recursively as partial vertex maps and flattened to
    full tables at the end.
    """
    size = len(tree)
    root = next(v for v in range(size) if tree[v] == v)
    children: List[List[int]] = [[] for _ in range(size)]
    for v in range(size):
        if v != root:
            children[tree[v]].append(v)
    code: Dict[int, str] = {}

    def fill(v: int) -> str:
        code[v] = "(" + "".join(sorted(fill(c) for c in children[v])) + ")"
        return code[v]

    fill(root)

    def maps(v: int, w: int) -> List[Dict[int, int]]:
        # All isomorphisms from the subtree at v onto the subtree at w;
        # callers only pair vertices with equal codes.
        out: List[Dict[int, int]] = [{v: w}]
        classes = sorted({code[c] for c in children[v]})
        for cls in classes:
            kv = [c for c in children[v] if code[c] == cls]
            kw = [c for c in children[w] if code[c] == cls]
            grown: List[Dict[int, int]] = []
            for base in out:
                for target in itertools.permutations(kw):
                    for combo in itertools.product(
                        *[maps(a, b) for a, b in zip(kv, target)]
                    ):
                        merged = dict(base)
                        for piece in combo:
                            merged.update(piece)
                        grown.append(merged)
            out = grown
        return out

    return tuple(sorted(tuple(m[v] for v in range(size)) for m in maps(root, root)))


# ---- balanced tree families --------------------------------------------------


def _indegrees(tree: Sequence[int]) -> List[int]:
    degs = [0] * len(tree)
    for v in tree:
        degs[v] += 1
    return degs


def _trees_under_caps(caps: Sequence[int], exact: bool) -> List[Table]:
    """Rooted trees on the index set with incoming degree bounded by caps.

    Incoming degree counts the root loop. With exact=True the tree must
    consume every cap precisely, which closes the last slot of a balanced
    family. Candidates are grown by assigning parents in label order and
    filtered through the cycle check at the end.
    """
    size = len(caps)
    found: List[Table] = []
    for root in range(size):
        if caps[root] < 1:
            continue
        limit = [caps[v] - (1 if v == root else 0) for v in range(size)]
        if exact and sum(limit) != size - 1:
            break  # the total is root independent, no root can work
        order = [v for v in range(size) if v != root]
        parent = [-1] * size
        parent[root] = root
        used = [0] * size

        def place(pos: int, free: int) -> None:
            remaining = len(order) - pos
            if free < remaining or (exact and free > remaining):
                return
            if remaining == 0:
                candidate = tuple(parent)
                if tree_check(candidate).is_tree:
                    found.append(candidate)
                return
            v = order[pos]
            for p in range(size):
                if p != v and used[p] < limit[p]:
                    parent[v] = p
                    used[p] += 1
                    place(pos + 1, free - 1)
                    used[p] -= 1
            parent[v] = -1

        place(0, sum(limit))
    return found


def _rest_tuples(n: int, first: Table) -> List[TreeTuple]:
    """All tree families (t_2, ..., t_n) completing first to a balanced tuple."""
    size = len(first)
    completions: List[TreeTuple] = []

    def extend(done: Tuple[Table, ...], caps: List[int]) -> None:
        if len(done) == n - 1:
            completions.append(done)
            return
        exact = len(done) == n - 2
        for t in _trees_under_caps(caps, exact):
            degs = _indegrees(t)
            extend(done + (t,), [c - d for c, d in zip(caps, degs)])

    degs = _indegrees(first)
    if all(d <= n for d in degs):
        extend((), [n - d for d in degs])
    return completions


def _conjugate(g: Sequence[int], ginv: Sequence[int], t: Sequence[int]) -> Table:
    return tuple(g[t[ginv[v]]] for v in range(len(t)))


def _invert(g: Sequence[int]) -> Table:
    inv = [0] * len(g)
    for x, y in enumerate(g):
        inv[y] = x
    return tuple(inv)


@dataclass(frozen=True)
class OrbitRep:
    """One relabeling orbit of balanced tree families.

    trees is the anchored representative; size counts the labeled families
    in the orbit, i.e. the index of the pointwise stabilizer.
    """

    trees: TreeTuple
    size: int


def orbit_representatives(n: int, level_size: int) -> List[OrbitRep]:
    """Canonical balanced tree families, one per relabeling orbit.

    The first component is anchored to the fixed labeled copy of its shape;
    the remaining components are deduplicated under the anchor's
    automorphism group, which is exactly the ambiguity left by anchoring.
    """
    reps: List[OrbitRep] = []
    total = math.factorial(level_size)
    for shape in rooted_shapes(level_size):
        first = anchor_tree(shape)
        autos = tree_automorphisms(first)
        pairs = [(g, _invert(g)) for g in autos]
        seen: Set[TreeTuple] = set()
        for rest in _rest_tuples(n, first):
            canon = min(
                tuple(_conjugate(g, gi, t) for t in rest) for g, gi in pairs
            )
            if canon in seen:
                continue
            seen.add(canon)
            stab = sum(
                1
                for g, gi in pairs
                if all(_conjugate(g, gi, t) == t for t in canon)
            )
            reps.append(OrbitRep((first,) + canon, total // stab))
    return reps


# ---- assignment sweep --------------------------------------------------------


def _assignment_sweep(
    n: int,
    k: int,
    trees: TreeTuple,
    budget_m: Optional[int],
    want_tables: bool,
) -> Tuple[int, int, List[Table]]:
    """Decide every sigma over a fixed tree family.

    The family pins each image up to its final letter; the sweep runs over
    all ways to fill the letters, one permutation per level-(k-1) vertex.
    Returns automorphism and undecided counts, plus the automorphism tables
    when requested.
    """
    level = n ** (k - 1)
    size = n**k
    slots: List[List[int]] = [[] for _ in range(level)]
    for i, t in enumerate(trees):
        for a, b in enumerate(t):
            slots[b].append(i * level + a)
    if any(len(group) != n for group in slots):
        raise ValueError("tree family is not balanced")
    auts = undecided = 0
    tables: List[Table] = []
    table = [0] * size
    inv = [0] * size
    letterings = list(itertools.permutations(range(n)))
    for choice in itertools.product(letterings, repeat=level):
        for b in range(level):
            pick = choice[b]
            group = slots[b]
            for j in range(n):
                w = group[j]
                img = b * n + pick[j]
                table[w] = img
                inv[img] = w
        status, _ = _stab_decide(n, k, table, inv, budget_m)
        if status == "aut":
            auts += 1
            if want_tables:
                tables.append(tuple(table))
        elif status == "undecided":
            undecided += 1
    return auts, undecided, tables


def _sweep_task(
    args: Tuple[int, int, TreeTuple, Optional[int], bool]
) -> Tuple[int, int, List[Table]]:
    return _assignment_sweep(*args)


def _merge_key(trees: TreeTuple) -> TreeTuple:
    """Canonical form under relabeling and component permutation.

    Permuting the components composes lambda_sigma with the unitary swap of
    the generators, and relabeling conjugates by an inner, so automorphism
    counts only depend on this key. Minimizing the sorted component tuple
    over all relabelings computes it; only worthwhile for small levels.
    """
    level = len(trees[0])
    best: Optional[TreeTuple] = None
    for g in itertools.permutations(range(level)):
        gi = _invert(g)
        candidate = tuple(sorted(_conjugate(g, gi, t) for t in trees))
        if best is None or candidate < best:
            best = candidate
    assert best is not None
    return best


# ---- reports -----------------------------------------------------------------


@dataclass(frozen=True)
class ShapeRecord:
    """Occurrence flags for one unlabeled rooted tree shape."""

    shape: str
    leaves: int
    endo: bool
    diagonal: bool
    aut: bool


@dataclass(frozen=True)
class CensusReport:
    """Census of the permutations of the length-k words over n letters.

    b counts sigma acting invertibly on the diagonal, d the automorphisms
    of O_n, undecided the sigma the stabilization budget could not settle.
    class_count, when present, is the number of automorphism classes modulo
    inner automorphisms. Runtime is informational and never compared.
    """

    n: int
    k: int
    mode: str
    b: int
    d: int
    undecided: int
    class_count: Optional[int]
    shape_census: Tuple[ShapeRecord, ...]
    runtime_seconds: float

    def same_counts(self, other: "CensusReport") -> bool:
        """Agreement on everything observable, ignoring mode and runtime."""
        return (
            (self.n, self.k, self.b, self.d, self.undecided)
            == (other.n, other.k, other.b, other.d, other.undecided)
            and self.shape_census == other.shape_census
        )

    def to_json(self) -> str:
        payload = {
            "schema": 1,
            "n": self.n,
            "k": self.k,
            "mode": self.mode,
            "b": self.b,
            "d": self.d,
            "undecided": self.undecided,
            "class_count": self.class_count,
            "shapes": [
                {
                    "shape": rec.shape,
                    "leaves": rec.leaves,
                    "endo": rec.endo,
                    "diagonal": rec.diagonal,
                    "aut": rec.aut,
                }
                for rec in self.shape_census
            ],
            "runtime_seconds": round(self.runtime_seconds, 3),
        }
        return json.dumps(payload, indent=2)

    @staticmethod
    def from_json(text: str) -> "CensusReport":
        payload = json.loads(text)
        if payload.get("schema") != 1:
            raise ValueError("unsupported census schema")
        records = tuple(
            ShapeRecord(
                rec["shape"],
                rec["leaves"],
                rec["endo"],
                rec["diagonal"],
                rec["aut"],
            )
            for rec in payload["shapes"]
        )
        return CensusReport(
            payload["n"],
            payload["k"],
            payload["mode"],
            payload["b"],
            payload["d"],
            payload["undecided"],
            payload["class_count"],
            records,
            payload["runtime_seconds"],
        )


def _shape_records(
    level_size: int, n: int, diagonal: Set[str], aut: Set[str]
) -> Tuple[ShapeRecord, ...]:
    return tuple(
        ShapeRecord(
            shape,
            shape_leaves(shape),
            shape_admits_endo(shape, n),
            shape in diagonal,
            shape in aut,
        )
        for shape in rooted_shapes(level_size)
    )


# ---- engines -----------------------------------------------------------------


def brute_census(
    n: int, k: int, budget_m: Optional[int] = None, progress: Progress = None
) -> CensusReport:
    """Walk every permutation of the length-k words and decide each one.

    Tree and diagonal verdicts only depend on the reduced maps, so they are
    cached per tree family; the stabilization automaton runs per sigma.
    """
    check_alphabet(n)
    if k < 1:
        raise ValueError("census needs k >= 1")
    started = time.monotonic()
    size = n**k
    level = size // n
    cache: Dict[TreeTuple, Tuple[bool, Optional[Tuple[str, ...]]]] = {}
    b = d = undecided = 0
    diagonal_shapes: Set[str] = set()
    aut_shapes: Set[str] = set()
    inv = [0] * size
    total = math.factorial(size)
    for count, perm in enumerate(itertools.permutations(range(size))):
        if progress and count % 262144 == 0:
            progress(f"brute {n},{k}: {count}/{total} permutations")
        trees = tuple(
            tuple(perm[i * level + a] // n for a in range(level)) for i in range(n)
        )
        info = cache.get(trees)
        if info is None:
            checks = [tree_check(t) for t in trees]
            shapes = (
                tuple(c.shape for c in checks)  # type: ignore[misc]
                if all(c.is_tree for c in checks)
                else None
            )
            # Constancy of long composites forces every single map to be a
            # rooted tree, so non-tree families fail the diagonal test.
            diag = shapes is not None and constancy_iteration(trees)[0] is not None
            info = (diag, shapes)
            cache[trees] = info
        diag, shapes = info
        if not diag:
            continue
        b += 1
        assert shapes is not None
        diagonal_shapes.update(shapes)
        for w, img in enumerate(perm):
            inv[img] = w
        status, _ = _stab_decide(n, k, perm, inv, budget_m)
        if status == "aut":
            d += 1
            aut_shapes.update(shapes)
        elif status == "undecided":
            undecided += 1
    return CensusReport(
        n,
        k,
        "brute",
        b,
        d,
        undecided,
        None,
        _shape_records(level, n, diagonal_shapes, aut_shapes),
        time.monotonic() - started,
    )


def _open_checkpoint(path: str) -> TextIO:
    """Append sink for sweep rows, sealing off any torn final line first.

    Without the newline repair a row written after a torn tail would glue
    onto it and both would be dropped by the next resume.
    """
    torn = False
    try:
        with open(path, "rb") as fh:
            fh.seek(0, 2)
            if fh.tell() > 0:
                fh.seek(-1, 2)
                torn = fh.read(1) != b"\n"
    except FileNotFoundError:
        pass
    sink = open(path, "a", encoding="utf-8")
    if torn:
        sink.write("\n")
    return sink


def _load_checkpoint(path: Optional[str]) -> Dict[str, Tuple[int, int]]:
    done: Dict[str, Tuple[int, int]] = {}
    if path is None:
        return done
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    row = json.loads(line)
                except json.JSONDecodeError:
                    # A run killed mid-write can tear the final line; the
                    # group it described is simply swept again.
                    continue
                done[row["key"]] = (row["auts"], row["undecided"])
    except FileNotFoundError:
        pass
    return done


def class_representatives(reps: Sequence[PermUnitary]) -> List[List[PermUnitary]]:
    """Partition automorphisms into classes modulo inner automorphisms.

    Inner automorphisms form a normal subgroup, so outer equivalence is an
    equivalence relation and greedy bucketing against one witness per class
    is sound. Every input must already be a decided automorphism.
    """
    buckets: List[List[PermUnitary]] = []
    for pu in reps:
        for bucket in buckets:
            if out_equivalent(pu, bucket[0]):
                bucket.append(pu)
                break
        else:
            buckets.append([pu])
    return buckets


def _out_class_count(n: int, k: int, tables: Sequence[Table]) -> int:
    """Number of automorphism classes modulo inners among the given tables."""
    return len(class_representatives([PermUnitary(n, k, t) for t in tables]))


def orbit_census(
    n: int,
    k: int,
    budget_m: Optional[int] = None,
    workers: int = 1,
    classes: bool = False,
    checkpoint: Optional[str] = None,
    csv_path: Optional[str] = None,
    progress: Progress = None,
) -> CensusReport:
    """Census by relabeling orbits of balanced tree families.

    Every sigma passing the diagonal test corresponds to a balanced family
    of rooted trees plus a letter assignment, and verdicts are constant on
    relabeling orbits, so only anchored representatives are swept. Families
    that also agree up to component permutation share their sweep. With
    classes=True the automorphism tables are retained and merged into
    classes modulo inner automorphisms (this disables the component merge,
    which does not preserve classes). csv_path dumps one row per orbit.
    """
    check_alphabet(n)
    if k < 1:
        raise ValueError("census needs k >= 1")
    started = time.monotonic()
    level = n ** (k - 1)
    assignments = math.factorial(n) ** level
    reps = orbit_representatives(n, level)
    diagonal_shapes: Set[str] = set()
    b = 0
    evaluated: List[Tuple[OrbitRep, bool]] = []
    diag_reps: List[OrbitRep] = []
    for rep in reps:
        depth, _ = constancy_iteration(rep.trees)
        diagonal = depth is not None
        evaluated.append((rep, diagonal))
        if not diagonal:
            continue
        diag_reps.append(rep)
        b += rep.size * assignments
        for t in rep.trees:
            shape = tree_check(t).shape
            assert shape is not None
            diagonal_shapes.add(shape)
    if progress:
        progress(
            f"orbit {n},{k}: {len(reps)} orbits, {len(diag_reps)} diagonal, "
            f"{assignments} assignments each"
        )
    # Group the sweeps. Component permutation preserves automorphism counts,
    # so families equal up to it share one sweep; the canonical key is only
    # cheap for small levels, and class collection needs every family.
    merge = level <= 6 and not classes
    groups: Dict[TreeTuple, List[OrbitRep]] = {}
    order: List[TreeTuple] = []
    for rep in diag_reps:
        key = _merge_key(rep.trees) if merge else rep.trees
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(rep)
    done = _load_checkpoint(None if classes else checkpoint)
    pending = [key for key in order if json.dumps(key) not in done]
    results: Dict[TreeTuple, Tuple[int, int, List[Table]]] = {}
    tasks = [(n, k, groups[key][0].trees, budget_m, classes) for key in pending]
    sink = None
    if checkpoint is not None and not classes:
        sink = _open_checkpoint(checkpoint)

    def record(pos: int, outcome: Tuple[int, int, List[Table]]) -> None:
        # Each group flushes as soon as it finishes so an interrupted sweep
        # resumes from the last completed group instead of starting over.
        results[pending[pos]] = outcome
        if sink is not None:
            row = {
                "key": json.dumps(pending[pos]),
                "auts": outcome[0],
                "undecided": outcome[1],
            }
            sink.write(json.dumps(row) + "\n")
            sink.flush()
        if progress:
            progress(f"orbit {n},{k}: swept {pos + 1}/{len(tasks)} groups")

    try:
        if workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for pos, outcome in enumerate(pool.map(_sweep_task, tasks)):
                    record(pos, outcome)
        else:
            for pos, task in enumerate(tasks):
                record(pos, _sweep_task(task))
    finally:
        if sink is not None:
            sink.close()
    d = undecided = 0
    aut_shapes: Set[str] = set()
    aut_tables: List[Table] = []
    per_orbit: Dict[TreeTuple, Tuple[int, int]] = {}
    for key in order:
        if key in results:
            auts, fuzzy, tables = results[key]
        else:
            auts, fuzzy = done[json.dumps(key)]
            tables = []
        for rep in groups[key]:
            per_orbit[rep.trees] = (auts, fuzzy)
            d += rep.size * auts
            undecided += rep.size * fuzzy
            if auts:
                for t in rep.trees:
                    shape = tree_check(t).shape
                    assert shape is not None
                    aut_shapes.add(shape)
        aut_tables.extend(tables)
    class_count = None
    if classes:
        class_count = _out_class_count(n, k, aut_tables)
    if csv_path is not None:
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["trees", "orbit_size", "diagonal", "auts", "undecided"]
            )
            for rep, diagonal in evaluated:
                auts, fuzzy = per_orbit.get(rep.trees, (0, 0))
                writer.writerow(
                    [json.dumps(rep.trees), rep.size, diagonal, auts, fuzzy]
                )
    return CensusReport(
        n,
        k,
        "orbit",
        b,
        d,
        undecided,
        class_count,
        _shape_records(level, n, diagonal_shapes, aut_shapes),
        time.monotonic() - started,
    )


def shape_census(n: int, k: int, progress: Progress = None) -> Tuple[ShapeRecord, ...]:
    """Shape table at level k - 1: runs the orbit census and keeps the flags."""
    return orbit_census(n, k, progress=progress).shape_census

"""Finitely generated groups as element oracles, and word-metric balls.

Groups enter through a small oracle interface (identity, multiply, invert,
canonical key) so that exact arithmetic is available for every supported
family: cyclic, dihedral, symmetric, integer lattices, free groups, and
explicit multiplication tables.  The word-metric ball of the Cayley graph
is enumerated breadth-first with a fixed generator order, which makes every
downstream artifact bit-reproducible.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from .errors import (
    BadWeights,
    BallTooLarge,
    NonSymmetricGenerators,
    NotAGroup,
    ValidationError,
)

DEFAULT_BALL_CAP = 10**6
OUT_OF_BALL = -1

FAMILIES = ("cyclic", "dihedral", "symmetric", "integer_lattice", "free", "table")


# ---------------------------------------------------------------------------
# group specification


@dataclass
class GroupSpec:
    """Declarative description of a group plus its weighted generating set."""

    family: str
    params: dict
    generators: list | None = None
    weights: list | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown group family {self.family!r}")


def load_group_spec(source) -> tuple[GroupSpec, int | None]:
    """Read a GroupSpec (and optional radius) from a JSON file or dict."""
    if isinstance(source, (str, Path)):
        with open(source) as fh:
            data = json.load(fh)
    else:
        data = dict(source)
    allowed = {"family", "params", "generators", "weights", "radius"}
    unknown = set(data) - allowed
    if unknown:
        raise ValidationError(f"unknown group spec keys: {sorted(unknown)}")
    if "family" not in data:
        raise ValidationError("group spec needs a 'family' field")
    spec = GroupSpec(
        family=data["family"],
        params=dict(data.get("params", {})),
        generators=data.get("generators"),
        weights=data.get("weights"),
    )
    return spec, data.get("radius")


# ---------------------------------------------------------------------------
# element arithmetic per family


def _perm_mul(a, b):
    # (a*b)(i) = a[b[i]]
    return tuple(a[i] for i in b)


def _perm_inv(a):
    out = [0] * len(a)
    for i, x in enumerate(a):
        out[x] = i
    return tuple(out)


def _free_mul(a, b):
    out = list(a)
    for x in b:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


_FREE_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def _free_name(word):
    if not word:
        return "e"
    parts = []
    for x in word:
        letter = _FREE_LETTERS[abs(x) - 1]
        parts.append(letter if x > 0 else letter + "^-1")
    return "*".join(parts)


def _perm_name(p):
    # cycle notation on 1-based points, fixed points omitted
    n = len(p)
    seen = [False] * n
    cycles = []
    for i in range(n):
        if seen[i] or p[i] == i:
            seen[i] = True
            continue
        cyc = [i]
        seen[i] = True
        j = p[i]
        while j != i:
            cyc.append(j)
            seen[j] = True
            j = p[j]
        cycles.append("(" + " ".join(str(k + 1) for k in cyc) + ")")
    return "".join(cycles) if cycles else "e"


# ---------------------------------------------------------------------------
# handle


@dataclass
class GroupHandle:
    """Element oracle plus a canonicalized, inverse-closed weighted gen set."""

    family: str
    identity: Any
    multiply: Callable[[Any, Any], Any]
    invert: Callable[[Any], Any]
    key: Callable[[Any], Any]
    generators: tuple
    weights: np.ndarray
    names: tuple[str, ...]
    order: int | None = None  # |group| when finite and known a priori
    inverse_index: np.ndarray = field(default=None, repr=False)
    label: str = ""

    def __post_init__(self):
        if self.inverse_index is None:
            lookup = {self.key(g): i for i, g in enumerate(self.generators)}
            inv = np.empty(len(self.generators), dtype=np.int64)
            for i, g in enumerate(self.generators):
                gi = self.key(self.invert(g))
                if gi not in lookup:
                    raise NonSymmetricGenerators(
                        f"generator {self.names[i]} has no inverse in the set"
                    )
                inv[i] = lookup[gi]
            self.inverse_index = inv

    @property
    def n_generators(self) -> int:
        return len(self.generators)

    def min_weight(self) -> float:
        return float(self.weights.min())


@dataclass
class SymmetryReport:
    """Outcome of checking K = K^-1, weight symmetry and normalization."""

    closed_under_inverse: bool
    weight_sum: float
    asymmetric_pairs: list
    missing_inverses: list

    @property
    def ok(self) -> bool:
        return (
            self.closed_under_inverse
            and not self.asymmetric_pairs
            and abs(self.weight_sum - 1.0) <= 1e-12
        )

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "closedUnderInverse": self.closed_under_inverse,
            "weightSum": self.weight_sum,
            "asymmetricPairs": self.asymmetric_pairs,
            "missingInverses": self.missing_inverses,
        }


def check_symmetry(handle: GroupHandle) -> SymmetryReport:
    """Verify the generating set is symmetric and the weight is a symmetric
    probability on it; violations are listed rather than raised."""
    missing = []
    pairs = []
    for i, g in enumerate(handle.generators):
        gi = handle.key(handle.invert(g))
        j = None
        for k, h in enumerate(handle.generators):
            if handle.key(h) == gi:
                j = k
                break
        if j is None:
            missing.append(handle.names[i])
            continue
        if abs(handle.weights[i] - handle.weights[j]) > 1e-12 and i < j:
            pairs.append(
                (handle.names[i], handle.names[j], float(handle.weights[i]), float(handle.weights[j]))
            )
    return SymmetryReport(
        closed_under_inverse=not missing,
        weight_sum=float(handle.weights.sum()),
        asymmetric_pairs=pairs,
        missing_inverses=missing,
    )


# ---------------------------------------------------------------------------
# family constructors


def _canonical_parsers(family, params):
    """Return (identity, multiply, invert, key, namer, order) for a family."""
    if family == "cyclic":
        n = int(params["n"])
        if n < 1:
            raise ValidationError("cyclic order must be >= 1")
        return (
            0,
            lambda a, b: (a + b) % n,
            lambda a: (-a) % n,
            lambda a: int(a) % n,
            lambda a: "e" if a % n == 0 else f"s^{a % n}",
            n,
        )
    if family == "dihedral":
        n = int(params["n"])
        if n < 1:
            raise ValidationError("dihedral parameter must be >= 1")

        def mul(a, b):
            (x, s), (y, t) = a, b
            return ((x + y) % n if s == 0 else (x - y) % n, s ^ t)

        def inv(a):
            x, s = a
            return ((-x) % n, 0) if s == 0 else (x, 1)

        def key(a):
            x, s = a
            return (int(x) % n, int(s) % 2)

        def name(a):
            x, s = key(a)
            rot = "e" if x == 0 else (f"r^{x}" if x > 1 else "r")
            if s == 0:
                return rot
            return "f" if x == 0 else rot + "*f"

        return ((0, 0), mul, inv, key, name, 2 * n)
    if family == "symmetric":
        n = int(params["n"])
        if n < 1:
            raise ValidationError("symmetric degree must be >= 1")
        ident = tuple(range(n))

        def key(a):
            t = tuple(int(x) for x in a)
            if sorted(t) != list(range(n)):
                raise ValidationError(f"not a permutation of 0..{n - 1}: {a}")
            return t

        return (ident, _perm_mul, _perm_inv, key, _perm_name, math.factorial(n))
    if family == "integer_lattice":
        d = int(params["d"])
        if d < 1:
            raise ValidationError("lattice dimension must be >= 1")
        ident = (0,) * d

        def key(a):
            t = tuple(int(x) for x in a)
            if len(t) != d:
                raise ValidationError(f"lattice element needs {d} coordinates: {a}")
            return t

        return (
            ident,
            lambda a, b: tuple(x + y for x, y in zip(a, b)),
            lambda a: tuple(-x for x in a),
            key,
            lambda a: "(" + ",".join(str(x) for x in a) + ")",
            None,
        )
    if family == "free":
        k = int(params["k"])
        if k < 1 or k > len(_FREE_LETTERS):
            raise ValidationError("free rank must be between 1 and 26")

        def key(a):
            word = tuple(int(x) for x in a)
            for x in word:
                if x == 0 or abs(x) > k:
                    raise ValidationError(f"free-group letter out of range: {x}")
            return _free_mul((), word)  # reduce

        return ((), _free_mul, lambda a: tuple(-x for x in reversed(a)), key, _free_name, None)
    raise ValidationError(f"no oracle for family {family!r}")


def _load_table(params):
    if "table" in params:
        rows = [list(map(int, row)) for row in params["table"]]
    else:
        path = params["path"]
        with open(path, newline="") as fh:
            rows = [list(map(int, row)) for row in csv.reader(fh) if row]
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise NotAGroup("multiplication table is not square")
    T = np.asarray(rows, dtype=np.int64)
    if T.min() < 0 or T.max() >= n:
        raise NotAGroup("table entries must be indices in [0, n)")
    if not np.array_equal(T[0], np.arange(n)) or not np.array_equal(T[:, 0], np.arange(n)):
        raise NotAGroup("index 0 must act as the identity")
    target = np.arange(n)
    for i in range(n):
        if not np.array_equal(np.sort(T[i]), target) or not np.array_equal(np.sort(T[:, i]), target):
            raise NotAGroup(f"table is not a Latin square (row/column {i})")
    if n <= 1024:
        for a in range(n):
            # associativity: T[T[a,b],c] == T[a,T[b,c]] for all b,c
            if not np.array_equal(T[T[a], :], T[a][T]):
                raise NotAGroup(f"table is not associative at row {a}")
    inv = np.empty(n, dtype=np.int64)
    for a in range(n):
        inv[a] = int(np.nonzero(T[a] == 0)[0][0])
    return T, inv


def _default_generators(family, params):
    if family == "cyclic":
        n = int(params["n"])
        if n == 1:
            return [0]
        if n == 2:
            return [1]
        return [1, n - 1]
    if family == "dihedral":
        n = int(params["n"])
        if n <= 2:
            return [(1 % n, 0), (0, 1)]
        return [(1, 0), (n - 1, 0), (0, 1)]
    if family == "symmetric":
        n = int(params["n"])
        if n == 1:
            return [tuple(range(n))]
        gens = []
        for i in range(n - 1):
            p = list(range(n))
            p[i], p[i + 1] = p[i + 1], p[i]
            gens.append(tuple(p))
        return gens
    if family == "integer_lattice":
        d = int(params["d"])
        gens = []
        for i in range(d):
            e = [0] * d
            e[i] = 1
            gens.append(tuple(e))
            e2 = [0] * d
            e2[i] = -1
            gens.append(tuple(e2))
        return gens
    if family == "free":
        k = int(params["k"])
        gens = []
        for i in range(1, k + 1):
            gens.append((i,))
            gens.append((-i,))
        return gens
    if family == "table":
        raise ValidationError("table groups need an explicit generator list")
    raise ValidationError(f"unknown family {family!r}")


def build_group(
    spec: GroupSpec,
    *,
    auto_close: bool = True,
    strict_weights: bool = True,
) -> GroupHandle:
    """Construct the element oracle for a GroupSpec.

    The generating set is canonicalized, deduplicated, closed under inverses
    (or NonSymmetricGenerators is raised when auto_close=False), and the
    weight is normalized to sum to one.  With strict_weights=True an
    inverse-asymmetric weight raises BadWeights; passing False keeps the
    handle buildable so check_symmetry can report the violation.
    """
    family = spec.family
    if family == "table":
        T, inv_table = _load_table(spec.params)
        n = T.shape[0]
        identity = 0
        multiply = lambda a, b: int(T[a, b])
        invert = lambda a: int(inv_table[a])
        key = lambda a: int(a)
        namer = lambda a: f"g{a}"
        order = n
        label = f"table({n})"
    else:
        identity, multiply, invert, key, namer, order = _canonical_parsers(family, spec.params)
        pname = next(iter(spec.params.values()))
        label = f"{family}({pname})"

    raw_gens = spec.generators if spec.generators is not None else _default_generators(family, spec.params)
    if not raw_gens:
        raise ValidationError("empty generator list")
    gens = [key(g) for g in raw_gens]

    if spec.weights is not None:
        if len(spec.weights) != len(gens):
            raise ValidationError("weights must align with generators")
        weights = [float(w) for w in spec.weights]
    else:
        weights = [1.0 / len(gens)] * len(gens)
    if any(w <= 0 for w in weights):
        raise BadWeights("all generator weights must be strictly positive")

    # merge duplicates produced by canonicalization
    merged: dict = {}
    order_seen = []
    for g, w in zip(gens, weights):
        if g in merged:
            merged[g] += w
            warnings.warn(f"duplicate generator {namer(g)} merged", stacklevel=2)
        else:
            merged[g] = w
            order_seen.append(g)

    # close under inversion
    for g in list(order_seen):
        gi = key(invert(g))
        if gi not in merged:
            if not auto_close:
                raise NonSymmetricGenerators(
                    f"generator set not closed under inversion: missing {namer(gi)}"
                )
            merged[gi] = merged[g]
            order_seen.append(gi)

    # weight symmetry
    if strict_weights:
        for g in order_seen:
            gi = key(invert(g))
            if abs(merged[g] - merged[gi]) > 1e-12 * max(1.0, abs(merged[g])):
                raise BadWeights(
                    f"weight asymmetric on pair ({namer(g)}, {namer(gi)}): "
                    f"{merged[g]} vs {merged[gi]}"
                )

    total = sum(merged.values())
    if abs(total - 1.0) > 1e-12:
        warnings.warn(f"generator weights sum to {total}; normalizing", stacklevel=2)
    final_weights = np.array([merged[g] / total for g in order_seen], dtype=np.float64)

    return GroupHandle(
        family=family,
        identity=key(identity),
        multiply=multiply,
        invert=invert,
        key=key,
        generators=tuple(order_seen),
        weights=final_weights,
        names=tuple(namer(g) for g in order_seen),
        order=order,
        label=label,
    )


# convenience constructors used throughout the test batteries


def cyclic_group(n, generators=None, weights=None, **kw):
    return build_group(GroupSpec("cyclic", {"n": n}, generators, weights), **kw)


def dihedral_group(n, generators=None, weights=None, **kw):
    return build_group(GroupSpec("dihedral", {"n": n}, generators, weights), **kw)


def symmetric_group(n, generators=None, weights=None, **kw):
    return build_group(GroupSpec("symmetric", {"n": n}, generators, weights), **kw)


def integer_lattice(d, generators=None, weights=None, **kw):
    return build_group(GroupSpec("integer_lattice", {"d": d}, generators, weights), **kw)


def free_group(k, generators=None, weights=None, **kw):
    return build_group(GroupSpec("free", {"k": k}, generators, weights), **kw)


def table_group(table, generators, weights=None, **kw):
    params = {"path": table} if isinstance(table, (str, Path)) else {"table": table}
    return build_group(GroupSpec("table", params, generators, weights), **kw)


# ---------------------------------------------------------------------------
# word-metric ball


@dataclass
class CayleyBall:
    """Indexed word-metric ball B_R with per-generator translation tables.

    elements[i] is the i-th element in BFS discovery order (identity first,
    generator order breaking ties).  translate[k, i] is the index of the left
    product generators[k] * elements[i], or OUT_OF_BALL when it leaves B_R.
    """

    handle: GroupHandle
    radius: int
    elements: list
    depth: np.ndarray
    translate: np.ndarray
    parent: np.ndarray
    parent_gen: np.ndarray
    index: dict = field(repr=False, default_factory=dict)

    def __post_init__(self):
        if not self.index:
            self.index = {self.handle.key(g): i for i, g in enumerate(self.elements)}

    @property
    def size(self) -> int:
        return len(self.elements)

    @property
    def is_full(self) -> bool:
        """True when the ball is closed under all generators, i.e. it carries
        the whole (necessarily finite) group."""
        return bool((self.translate != OUT_OF_BALL).all())

    def per_depth(self) -> list[int]:
        return np.bincount(self.depth, minlength=self.radius + 1).tolist()

    def word_for(self, i: int) -> list[int]:
        """Canonical BFS word (generator indices, left to right) for element i."""
        word = []
        while i != 0:
            word.append(int(self.parent_gen[i]))
            i = int(self.parent[i])
        return word

    def locate(self, element) -> int:
        k = self.handle.key(element)
        if k not in self.index:
            raise KeyError(f"element {k} outside ball of radius {self.radius}")
        return self.index[k]


def ball(handle: GroupHandle, radius: int, cap: int = DEFAULT_BALL_CAP) -> CayleyBall:
    """Enumerate the word-metric ball B_radius breadth first."""
    if radius < 0:
        raise ValidationError("ball radius must be >= 0")
    key = handle.key
    mul = handle.multiply
    elements = [handle.identity]
    index = {key(handle.identity): 0}
    depth = [0]
    parent = [-1]
    parent_gen = [-1]
    frontier = [0]
    for r in range(radius):
        nxt = []
        for i in frontier:
            g = elements[i]
            for k, gen in enumerate(handle.generators):
                h = key(mul(gen, g))
                if h not in index:
                    index[h] = len(elements)
                    elements.append(h)
                    depth.append(r + 1)
                    parent.append(i)
                    parent_gen.append(k)
                    nxt.append(index[h])
                    if len(elements) > cap:
                        raise BallTooLarge(
                            f"ball of radius {radius} exceeds cap of {cap} elements"
                        )
        if not nxt:
            break
        frontier = nxt

    n = len(elements)
    translate = np.full((handle.n_generators, n), OUT_OF_BALL, dtype=np.int64)
    for k, gen in enumerate(handle.generators):
        row = translate[k]
        for i, g in enumerate(elements):
            h = key(mul(gen, g))
            row[i] = index.get(h, OUT_OF_BALL)

    return CayleyBall(
        handle=handle,
        radius=radius,
        elements=elements,
        depth=np.asarray(depth, dtype=np.int64),
        translate=translate,
        parent=np.asarray(parent, dtype=np.int64),
        parent_gen=np.asarray(parent_gen, dtype=np.int64),
        index=index,
    )


def full_ball(handle: GroupHandle, cap: int = DEFAULT_BALL_CAP) -> CayleyBall:
    """Ball that saturates a finite group (BFS until no growth)."""
    if handle.order is not None and handle.order > cap:
        raise BallTooLarge(f"group order {handle.order} exceeds cap {cap}")
    radius = 1
    while True:
        b = ball(handle, radius, cap=cap)
        if b.is_full:
            return b
        if int(b.depth.max()) < radius:
            # stopped growing without closing: should not happen for a group
            raise InfiniteLoopGuard("BFS stopped growing before the ball closed")
        radius += 1


class InfiniteLoopGuard(RuntimeError):
    pass


def check_ball_invariants(b: CayleyBall) -> list[str]:
    """Return a list of human-readable invariant violations (empty = pass)."""
    problems = []
    h = b.handle
    if b.elements[0] != h.key(h.identity) or b.depth[0] != 0:
        problems.append("identity is not at index 0 with depth 0")
    if (np.diff(b.depth) < 0).any():
        problems.append("depth is not nondecreasing along the element list")
    interior = b.depth <= b.radius - 1
    for k in range(h.n_generators):
        row = b.translate[k]
        if (row[interior] == OUT_OF_BALL).any():
            i = int(np.nonzero(interior & (row == OUT_OF_BALL))[0][0])
            problems.append(
                f"translate({h.names[k]}) hits the sentinel at interior index {i}"
            )
        ki = int(h.inverse_index[k])
        comp = b.translate[k][b.translate[ki]]
        idx = np.nonzero(interior)[0]
        bad = idx[comp[idx] != idx]
        if bad.size:
            problems.append(
                f"translate({h.names[k]}) o translate({h.names[ki]}) is not the "
                f"identity at index {int(bad[0])}"
            )
    if b.is_full:
        target = np.arange(b.size)
        for k in range(h.n_generators):
            if not np.array_equal(np.sort(b.translate[k]), target):
                problems.append(f"translate({h.names[k]}) is not a permutation on the full group")
    for g, i in list(b.index.items())[:100]:
        if h.key(b.elements[i]) != g:
            problems.append(f"index map inconsistent at {g!r}")
            break
    return problems


def free_ball_size(k: int, radius: int) -> int:
    """Ball cardinality of the rank-k free group with 2k standard generators."""
    if radius == 0:
        return 1
    if k == 1:
        return 2 * radius + 1
    q = 2 * k - 1
    return 1 + 2 * k * (q**radius - 1) // (q - 1)

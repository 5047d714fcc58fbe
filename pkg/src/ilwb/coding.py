"""Canonical codings on initial segments of the naturals and interpretation of sorts in a model.

Conventions: products pair ``(i, j)`` to ``i * n + j``; quotients and images
number their elements by least representative; unions and complements keep the
ambient order.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .pretopos import DefinableFunction, ImaginarySort, SortError, matrix, unflatten, vector
from .semantics import FiniteModel, Isomorphism, NotAModel


class CodingError(ValueError):
    pass


@dataclass(frozen=True)
class CodedMap:
    source_size: int
    target_size: int
    values: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        if len(self.values) != self.source_size:
            raise CodingError("a coded map needs one value per source element")
        if any(not 0 <= v < self.target_size for v in self.values):
            raise CodingError("value out of range of the target")

    def __call__(self, i: int) -> int:
        return self.values[i]

    @classmethod
    def identity(cls, n: int) -> "CodedMap":
        return cls(n, n, tuple(range(n)))

    def then(self, other: "CodedMap") -> "CodedMap":
        """First ``self``, then ``other``."""
        if self.target_size != other.source_size:
            raise CodingError("maps are not composable")
        return CodedMap(self.source_size, other.target_size, tuple(other.values[v] for v in self.values))

    def compose(self, other: "CodedMap") -> "CodedMap":
        """``self ∘ other``."""
        return other.then(self)

    @property
    def injective(self) -> bool:
        return len(set(self.values)) == len(self.values)

    @property
    def surjective(self) -> bool:
        return len(set(self.values)) == self.target_size

    @property
    def bijective(self) -> bool:
        return self.injective and self.surjective

    def inverse(self) -> "CodedMap":
        if not self.bijective:
            raise CodingError("only bijections have inverses")
        inv = [0] * self.source_size
        for i, v in enumerate(self.values):
            inv[v] = i
        return CodedMap(self.target_size, self.source_size, tuple(inv))

    def to_json(self) -> dict:
        return {"source": self.source_size, "target": self.target_size, "values": list(self.values)}


# -- union-find ---------------------------------------------------------------

class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # keep the smaller index as root so roots are least representatives
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra

    def labels(self) -> list[int]:
        """Class number of each element, classes numbered by least member."""
        number: dict[int, int] = {}
        out = []
        for x in range(len(self.parent)):
            r = self.find(x)
            if r not in number:
                number[r] = len(number)
            out.append(number[r])
        return out


# -- the eight codings ------------------------------------------------------------

def product(m: int, n: int) -> tuple[int, CodedMap, CodedMap]:
    size = m * n
    return size, CodedMap(size, m, tuple(i // n for i in range(size))), CodedMap(size, n, tuple(i % n for i in range(size)))


def pair(i: int, j: int, n: int) -> int:
    return i * n + j


def equalizer(f: CodedMap, g: CodedMap) -> CodedMap:
    if (f.source_size, f.target_size) != (g.source_size, g.target_size):
        raise CodingError("equalizer needs parallel maps")
    keep = [x for x in range(f.source_size) if f(x) == g(x)]
    return CodedMap(len(keep), f.source_size, tuple(keep))


def pullback(f: CodedMap, g: CodedMap) -> tuple[int, CodedMap, CodedMap]:
    if f.target_size != g.target_size:
        raise CodingError("pullback needs a common codomain")
    pairs = [(x, y) for x in range(f.source_size) for y in range(g.source_size) if f(x) == g(y)]
    n = len(pairs)
    return n, CodedMap(n, f.source_size, tuple(p[0] for p in pairs)), CodedMap(n, g.source_size, tuple(p[1] for p in pairs))


def disjoint_union(sizes: Sequence[int]) -> tuple[int, list[CodedMap]]:
    total = sum(sizes)
    out, off = [], 0
    for s in sizes:
        out.append(CodedMap(s, total, tuple(range(off, off + s))))
        off += s
    return total, out


def quotient(n: int, pairs: Sequence[tuple[int, int]]) -> tuple[int, CodedMap]:
    """Quotient by the equivalence relation generated by ``pairs``."""
    uf = UnionFind(n)
    for a, b in pairs:
        if not (0 <= a < n and 0 <= b < n):
            raise CodingError(f"pair {(a, b)} out of range")
        uf.union(a, b)
    labels = uf.labels()
    size = max(labels, default=-1) + 1
    return size, CodedMap(n, size, tuple(labels))


def image(f: CodedMap) -> tuple[int, CodedMap, CodedMap]:
    """Factor ``f = h ∘ g`` with ``g`` onto and ``h`` one-to-one."""
    number: dict[int, int] = {}
    for v in f.values:
        number.setdefault(v, len(number))
    size = len(number)
    g = CodedMap(f.source_size, size, tuple(number[v] for v in f.values))
    h = CodedMap(size, f.target_size, tuple(sorted(number, key=number.get)))
    return size, g, h


def union(injections: Sequence[CodedMap], target: int | None = None) -> tuple[int, CodedMap, list[CodedMap]]:
    """Union of subobjects: the inclusion of the union and the factor maps."""
    if target is None:
        if not injections:
            raise CodingError("target size required for an empty union")
        target = injections[0].target_size
    for m in injections:
        if m.target_size != target:
            raise CodingError("subobjects of different sets")
        if not m.injective:
            raise CodingError("union expects injective maps")
    members = sorted(set().union(*(m.values for m in injections)))
    pos = {v: i for i, v in enumerate(members)}
    size = len(members)
    factors = [CodedMap(m.source_size, size, tuple(pos[v] for v in m.values)) for m in injections]
    return size, CodedMap(size, target, tuple(members)), factors


def complement(f: CodedMap) -> CodedMap:
    if not f.injective:
        raise CodingError("complement needs an injective map")
    hit = set(f.values)
    rest = [y for y in range(f.target_size) if y not in hit]
    return CodedMap(len(rest), f.target_size, tuple(rest))


def _map(d: Mapping) -> CodedMap:
    return CodedMap(int(d["source"]), int(d["target"]), tuple(d["values"]))


def code_operation(request: Mapping) -> dict:
    """JSON-style dispatcher over the eight codings."""
    op = request.get("op")
    if op == "product":
        m, n = request["sizes"]
        size, p, q = product(m, n)
        return {"size": size, "projections": [p.to_json(), q.to_json()]}
    if op == "equalizer":
        return {"inclusion": equalizer(_map(request["f"]), _map(request["g"])).to_json()}
    if op == "pullback":
        size, p, q = pullback(_map(request["f"]), _map(request["g"]))
        return {"size": size, "projections": [p.to_json(), q.to_json()]}
    if op == "disjoint_union":
        size, inj = disjoint_union(request["sizes"])
        return {"size": size, "injections": [m.to_json() for m in inj]}
    if op == "quotient":
        size, r = quotient(request["size"], [tuple(p) for p in request["pairs"]])
        return {"size": size, "surjection": r.to_json()}
    if op == "image":
        size, g, h = image(_map(request["f"]))
        return {"size": size, "surjection": g.to_json(), "injection": h.to_json()}
    if op == "union":
        size, u, fs = union([_map(m) for m in request["maps"]], request.get("target"))
        return {"size": size, "inclusion": u.to_json(), "factors": [m.to_json() for m in fs]}
    if op == "complement":
        return {"inclusion": complement(_map(request["f"])).to_json()}
    raise CodingError(f"unknown coding operation {op!r}")


# -- interpretation in a single model ------------------------------------------------

Element = tuple[int, tuple[int, ...]]


@dataclass(frozen=True)
class InterpretedSort:
    sort: ImaginarySort
    model: FiniteModel
    size: int
    elements: tuple[Element, ...]
    labels: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "_lookup", dict(zip(self.elements, self.labels)))

    def class_of(self, piece: int, tup: Sequence[int]) -> int:
        try:
            return self._lookup[(piece, tuple(tup))]
        except KeyError:
            raise SortError(f"({piece}, {tuple(tup)}) is not an element of the sort") from None

    def __contains__(self, item) -> bool:
        return (item[0], tuple(item[1])) in self._lookup

    def representative(self, c: int) -> Element:
        return self.elements[self.labels.index(c)]

    def members(self, c: int) -> list[Element]:
        return [e for e, l in zip(self.elements, self.labels) if l == c]

    def to_json(self) -> dict:
        return {
            "size": self.size,
            "classes": {f"{i}:({','.join(map(str, t))})": c for (i, t), c in zip(self.elements, self.labels)},
        }


def interpret_sort_in_model(A: ImaginarySort, M: FiniteModel) -> InterpretedSort:
    """``A^M`` as a coded set, with classes numbered by least representative."""
    key = ("sort", A)
    hit = M._cache.get(key)
    if hit is not None:
        return hit
    k = M.size
    ar = A.arities
    alphas = [vector(a, M) for a in A.pieces]
    flat: list[tuple[int, int]] = [(i, int(x)) for i, a in enumerate(alphas) for x in np.flatnonzero(a)]
    index = {e: p for p, e in enumerate(flat)}
    uf = UnionFind(len(flat))
    eps = {}
    for i in range(len(A)):
        for j in range(len(A)):
            E = matrix(A.relations[i][j], M, ar[i])
            eps[i, j] = E
            for x, y in np.argwhere(E):
                a, b = index.get((i, int(x))), index.get((j, int(y)))
                if a is None or b is None:
                    raise SortError(f"relation ({i},{j}) relates a non-element in {M}")
                uf.union(a, b)
    labels = uf.labels()
    # the generated equivalence must already be the given relation
    classes: dict[int, list[tuple[int, int]]] = {}
    for e, l in zip(flat, labels):
        classes.setdefault(l, []).append(e)
    for members in classes.values():
        for i, x in members:
            for j, y in members:
                if not eps[i, j][x, y]:
                    raise SortError(
                        f"relation is not an equivalence in {M}: ({i},{unflatten(x, ar[i], k)}) "
                        f"and ({j},{unflatten(y, ar[j], k)}) are linked but not related"
                    )
    elements = tuple((i, unflatten(x, ar[i], k)) for i, x in flat)
    out = InterpretedSort(A, M, len(classes), elements, tuple(labels))
    M._cache[key] = out
    return out


def interpret_function_in_model(f: DefinableFunction, M: FiniteModel) -> CodedMap:
    """``f^M : A^M -> B^M``, checked to be well defined and total."""
    key = ("function", f)
    hit = M._cache.get(key)
    if hit is not None:
        return hit
    IA = interpret_sort_in_model(f.source, M)
    IB = interpret_sort_in_model(f.target, M)
    na, nb = f.source.arities, f.target.arities
    k = M.size
    values: list[int | None] = [None] * IA.size
    for (i, x), c in zip(IA.elements, IA.labels):
        xf = int(np.ravel_multi_index(x, (k,) * na[i])) if na[i] else 0
        outs = set()
        for t in range(len(f.target)):
            row = matrix(f.graph[i][t], M, na[i])[xf]
            for y in np.flatnonzero(row):
                outs.add(IB.class_of(t, unflatten(int(y), nb[t], k)))
        if len(outs) != 1:
            what = "undefined" if not outs else "multi-valued"
            raise SortError(f"function is {what} at ({i}, {x}) in {M}")
        (v,) = outs
        if values[c] is None:
            values[c] = v
        elif values[c] != v:
            raise SortError(f"function does not respect the source equivalence at ({i}, {x}) in {M}")
    out = CodedMap(IA.size, IB.size, tuple(values))
    M._cache[key] = out
    return out


def transport_along_iso(A: ImaginarySort, g: Isomorphism, *, check_all: bool = False) -> CodedMap:
    """The bijection ``A^M -> A^N`` induced by ``g : M -> N``.

    Each class is moved by applying ``g`` to a representative tuple; with
    ``check_all`` every member is moved and must land in the same class.
    """
    IA = interpret_sort_in_model(A, g.source)
    IB = interpret_sort_in_model(A, g.target)
    if IA.size != IB.size:
        raise NotAModel("fibers of different sizes; not an isomorphism")
    values: list[int | None] = [None] * IA.size
    for (i, x), c in zip(IA.elements, IA.labels):
        if values[c] is not None and not check_all:
            continue
        try:
            v = IB.class_of(i, g(tuple(x)))
        except SortError:
            raise NotAModel(f"image of ({i}, {x}) is not an element of the target fiber") from None
        if values[c] is None:
            values[c] = v
        elif values[c] != v:
            raise SortError("transport depends on the representative")
    out = CodedMap(IA.size, IB.size, tuple(values))
    if not out.bijective:
        raise NotAModel("transport is not a bijection")
    return out


def is_isomorphism(f: DefinableFunction, models: Sequence[FiniteModel]) -> bool:
    """Bijective interpretation in every listed model."""
    return all(interpret_function_in_model(f, M).bijective for M in models)

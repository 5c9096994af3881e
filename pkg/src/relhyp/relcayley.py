"""Paths, distances and geodesics in the relative Cayley graph Cayley(G, X ∪ H̃).

Edge labels carry a tag: an X letter (a single generator step) or a
peripheral letter (i, v) jumping by an arbitrary nontrivial element of A_i.
Peripheral generators therefore occur twice in the alphabet, once as X
letters and once as H̃ letters; components and phase vertices depend on the
tag, which is why paths record it.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .group import (
    CapExceeded,
    Element,
    GroupSpec,
    GEODESIC_COUNT_CAP,
    abelian_sphere,
    ball_x,
    coset_id,
    dist_x,
    hard_cap,
    invert,
    length_x,
    multiply,
    normalize,
)

# Labels: ("x", name, sign) for an X edge, ("h", i, vector) for a peripheral edge.


def label_element(spec: GroupSpec, label) -> Element:
    if label[0] == "x":
        return spec.generator(label[1], label[2])
    return spec.peripheral(label[1], label[2])


def label_to_json(label) -> list:
    if label[0] == "x":
        return ["x", label[1], label[2]]
    return ["h", label[1], list(label[2])]


def label_from_json(data) -> tuple:
    if data[0] == "x":
        return ("x", data[1], int(data[2]))
    return ("h", int(data[1]), tuple(int(c) for c in data[2]))


class RelPath:
    """A combinatorial edge path; vertices are computed once and cached."""

    __slots__ = ("spec", "start", "labels", "_vertices")

    def __init__(self, spec: GroupSpec, start: Element, labels: tuple):
        self.spec = spec
        self.start = start
        self.labels = labels
        self._vertices = None

    @property
    def vertices(self) -> tuple:
        if self._vertices is None:
            verts = [self.start]
            cur = self.start
            for lab in self.labels:
                if lab[0] == "h" and all(c == 0 for c in lab[2]):
                    raise ValueError("peripheral edge with zero vector")
                cur = multiply(cur, label_element(self.spec, lab))
                verts.append(cur)
            self._vertices = tuple(verts)
        return self._vertices

    @property
    def end(self) -> Element:
        return self.vertices[-1]

    def __len__(self):
        return len(self.labels)

    def __eq__(self, other):
        return (
            isinstance(other, RelPath)
            and self.start == other.start
            and self.labels == other.labels
        )

    def __hash__(self):
        return hash((self.start, self.labels))

    def concat(self, other: "RelPath") -> "RelPath":
        if self.end != other.start:
            raise ValueError("paths do not compose")
        return RelPath(self.spec, self.start, self.labels + other.labels)

    def translate(self, g: Element) -> "RelPath":
        return RelPath(self.spec, multiply(g, self.start), self.labels)

    def subpath(self, i: int, j: int) -> "RelPath":
        return RelPath(self.spec, self.vertices[i], self.labels[i:j])

    def to_json(self) -> dict:
        return {
            "start": self.start.to_json(),
            "labels": [label_to_json(l) for l in self.labels],
        }

    @classmethod
    def from_json(cls, spec: GroupSpec, data: dict) -> "RelPath":
        start = Element.from_json(spec, data["start"])
        labels = tuple(label_from_json(l) for l in data["labels"])
        return cls(spec, start, labels)

    def __repr__(self):
        bits = []
        for lab in self.labels:
            if lab[0] == "x":
                name, sign = lab[1], lab[2]
                bits.append(name if sign == 1 else f"{name}^{sign}")
            else:
                bits.append(f"H{lab[1]}{lab[2]}")
        return f"RelPath({self.start!r}; {' '.join(bits)})"


@dataclass(frozen=True)
class HComponent:
    """A maximal peripheral run of a path: factor, coset id and edge offsets."""

    factor: int
    coset: Element
    start: int
    end: int  # edge offsets, the run is labels[start:end]
    s_minus: Element
    s_plus: Element

    @property
    def span_x(self) -> int:
        return dist_x(self.s_minus, self.s_plus)


def _edge_factor(spec: GroupSpec, label, mode: str) -> int | None:
    """Peripheral factor an edge moves in, or None.

    In "tag" mode only H̃-tagged edges count (Osin's definition).  In
    "coset" mode X edges along peripheral generators count as well.
    """
    if label[0] == "h":
        return label[1]
    if mode == "coset":
        fid, d = spec._gen_table()[label[1]]
        if fid < spec.num_peripherals:
            return fid
    return None


def decompose_components(path: RelPath, mode: str = "tag") -> list[HComponent]:
    """Maximal runs of edges in a single peripheral alphabet (default: H̃ tags only)."""
    if mode not in ("tag", "coset"):
        raise ValueError(f"unknown component mode: {mode}")
    spec = path.spec
    comps = []
    verts = path.vertices
    run_start = None
    run_factor = None
    for idx, lab in enumerate(path.labels):
        fac = _edge_factor(spec, lab, mode)
        if fac is not None and run_factor == fac:
            continue
        if run_factor is not None:
            comps.append(_make_component(path, run_factor, run_start, idx))
        run_start, run_factor = (idx, fac) if fac is not None else (None, None)
    if run_factor is not None:
        comps.append(_make_component(path, run_factor, run_start, len(path.labels)))
    return comps


def _make_component(path: RelPath, factor: int, start: int, end: int) -> HComponent:
    verts = path.vertices
    return HComponent(
        factor=factor,
        coset=coset_id(verts[start], factor),
        start=start,
        end=end,
        s_minus=verts[start],
        s_plus=verts[end],
    )


def connected(c1: HComponent, c2: HComponent) -> bool:
    """Whether two components lie in the same left coset of the same peripheral."""
    return c1.factor == c2.factor and c1.coset == c2.coset


def is_without_backtracking(path: RelPath, mode: str = "tag") -> bool:
    comps = decompose_components(path, mode)
    seen = set()
    for c in comps:
        key = (c.factor, c.coset)
        if key in seen:
            return False
        seen.add(key)
    return True


def phase_vertices(path: RelPath, mode: str = "tag") -> list[Element]:
    """Vertices that are not interior to any component."""
    comps = decompose_components(path, mode)
    interior = set()
    for c in comps:
        for j in range(c.start + 1, c.end):
            interior.add(j)
    return [v for j, v in enumerate(path.vertices) if j not in interior]


def k_similarity(p: RelPath, q: RelPath) -> int:
    """max of the X-distances between initial and terminal endpoints."""
    return max(dist_x(p.start, q.start), dist_x(p.end, q.end))


def rel_distance(x: Element) -> int:
    """dist_{X∪H̃}(1, x): one per peripheral syllable, |e| per free syllable."""
    total = 0
    m = x.spec.num_peripherals
    for fid, payload in x.sylls:
        total += 1 if fid < m else abs(payload)
    return total


def rel_dist_between(u: Element, v: Element) -> int:
    """Relative distance between two elements, with shared-prefix cancellation."""
    su, sv = u.sylls, v.sylls
    i = 0
    n = min(len(su), len(sv))
    while i < n and su[i] == sv[i]:
        i += 1
    m = u.spec.num_peripherals

    def cost(s):
        fid, payload = s
        return 1 if fid < m else abs(payload)

    total = 0
    if i < len(su) and i < len(sv) and su[i][0] == sv[i][0]:
        fid = su[i][0]
        if fid < m:
            total += 1
        else:
            total += abs(su[i][1] - sv[i][1])
        i += 1
        total += sum(cost(s) for s in su[i:])
        total += sum(cost(s) for s in sv[i:])
    else:
        total += sum(cost(s) for s in su[i:])
        total += sum(cost(s) for s in sv[i:])
    return total


def is_quasigeodesic(path: RelPath, lam, c) -> tuple[bool, tuple[int, int] | None]:
    """Check l(q) <= lam * d(q-, q+) + c for every contiguous subpath q.

    Returns (ok, witness) where the witness is the (i, j) vertex range of a
    violating subpath.
    """
    lam = Fraction(lam)
    c = Fraction(c)
    verts = path.vertices
    n = len(path.labels)
    for i in range(n):
        for j in range(i + 1, n + 1):
            if (j - i) > lam * rel_dist_between(verts[i], verts[j]) + c:
                return False, (i, j)
    return True, None


def syllable_realizations(spec: GroupSpec, syll) -> list[tuple]:
    """Geodesic edge-label realizations of one syllable, in deterministic order."""
    fid, payload = syll
    m = spec.num_peripherals
    if fid < m:
        norm = sum(abs(c) for c in payload)
        if norm == 1:
            d = next(k for k, c in enumerate(payload) if c != 0)
            name = spec.abelian_factors[fid][d]
            sign = 1 if payload[d] > 0 else -1
            return [(("x", name, sign),), (("h", fid, payload),)]
        return [(("h", fid, payload),)]
    name = spec.free_generators[fid - m]
    e = payload
    sign = 1 if e > 0 else -1
    return [tuple(("x", name, sign) for _ in range(abs(e)))]


def rel_geodesics(x: Element, cap: int | None = None) -> list[RelPath]:
    """All geodesics from 1 to x, in deterministic order.

    Per syllable: a peripheral syllable of L1 norm 1 has an X and an H̃
    realization; larger norms force the single H̃ edge; a free syllable is a
    forced run of X edges.
    """
    spec = x.spec
    limit = cap if cap is not None else hard_cap(GEODESIC_COUNT_CAP)
    options = [syllable_realizations(spec, s) for s in x.sylls]
    count = 1
    for opt in options:
        count *= len(opt)
        if count > limit:
            raise CapExceeded(f"geodesic count exceeds cap {limit}")
    paths = [()]
    for opt in options:
        paths = [p + realization for p in paths for realization in opt]
    return [RelPath(spec, spec.identity(), labels) for labels in paths]


def geodesics_between(u: Element, v: Element, cap: int | None = None) -> list[RelPath]:
    x = multiply(invert(u), v)
    return [p.translate(u) for p in rel_geodesics(x, cap)]


# -- compressed-edge BFS oracle ------------------------------------------------


def coset_mates(spec: GroupSpec, v: Element, i: int, length_bound: int) -> list[Element]:
    """Elements of v·A_i (other than v) with X-length at most the bound."""
    c = coset_id(v, i)
    base = length_x(c)
    if base > length_bound:
        return []
    rank = spec.rank_of(i)
    trailing = tuple([0] * rank)
    if v.sylls and v.sylls[-1][0] == i:
        trailing = v.sylls[-1][1]
    out = []
    budget = length_bound - base
    for w in range(budget + 1):
        for vec in abelian_sphere(rank, w):
            if vec == trailing:
                continue
            if any(vec):
                out.append(Element(spec, c.sylls + ((i, vec),)))
            else:
                out.append(c)
    return out


def bfs_distances(spec: GroupSpec, length_bound: int) -> dict[Element, int]:
    """Breadth-first relative distances from 1 over the X-ball of the given bound.

    Peripheral moves are compressed: one step jumps anywhere in the current
    coset (restricted to the ball).  Inside this family geodesic vertices
    from 1 never exceed the endpoint's X-length, so the restriction is safe
    for targets within the bound.
    """
    allowed = set(ball_x(spec, length_bound))
    gens = [spec.generator(name, s) for name in spec.generator_names for s in (1, -1)]
    dist = {spec.identity(): 0}
    queue = deque([spec.identity()])
    while queue:
        v = queue.popleft()
        d = dist[v]
        neighbors = []
        for g in gens:
            w = multiply(v, g)
            if w in allowed:
                neighbors.append(w)
        for i in range(spec.num_peripherals):
            neighbors.extend(coset_mates(spec, v, i, length_bound))
        for w in neighbors:
            if w not in dist:
                dist[w] = d + 1
                queue.append(w)
    return dist


def bfs_distance(spec: GroupSpec, x: Element, length_bound: int | None = None) -> int:
    bound = length_bound if length_bound is not None else length_x(x)
    return bfs_distances(spec, bound)[x]

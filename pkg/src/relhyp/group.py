"""Exact arithmetic in the built-in group family G = A_1 * ... * A_m * F_r.

Each peripheral factor A_i is free abelian of a declared rank; the free part
F_r is a free group on named letters.  Elements are kept in free-product
normal form: an alternating sequence of syllables, each syllable living in a
single factor.  A syllable is a pair ``(fid, payload)`` where ``fid`` is the
factor id (peripheral factors first, then one id per free letter), and the
payload is an integer vector (peripheral) or a nonzero exponent (free).

All values are immutable; all operations are pure.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from functools import lru_cache


class CapExceeded(RuntimeError):
    """An enumeration exceeded its configured hard cap."""


#: Conservative hard caps; RELHYP_CAP_OVERRIDE raises them all.
BALL_RADIUS_CAP = 8
GEODESIC_COUNT_CAP = 4096


def hard_cap(default: int) -> int:
    override = os.environ.get("RELHYP_CAP_OVERRIDE")
    if override:
        return max(default, int(override))
    return default


@dataclass(frozen=True)
class GroupSpec:
    """The ambient group: free product of free-abelian peripherals and a free group.

    ``abelian_factors`` lists, per peripheral, the generator names of its
    standard basis.  ``free_generators`` names the free letters.  The
    generating set X consists of all these names together with their formal
    inverses (X is symmetric by construction).
    """

    abelian_factors: tuple[tuple[str, ...], ...] = ()
    free_generators: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.abelian_factors and not self.free_generators:
            raise ValueError("group must have at least one factor")
        names = [n for fac in self.abelian_factors for n in fac]
        names += list(self.free_generators)
        if len(set(names)) != len(names):
            raise ValueError("generator labels must be pairwise distinct")
        for fac in self.abelian_factors:
            if not fac:
                raise ValueError("peripheral factor must have positive rank")

    # -- structure ---------------------------------------------------------

    @property
    def num_peripherals(self) -> int:
        return len(self.abelian_factors)

    @property
    def abelian_ranks(self) -> tuple[int, ...]:
        return tuple(len(f) for f in self.abelian_factors)

    @property
    def num_factors(self) -> int:
        return len(self.abelian_factors) + len(self.free_generators)

    def rank_of(self, i: int) -> int:
        return len(self.abelian_factors[i])

    def free_fid(self, name: str) -> int:
        return self.num_peripherals + self.free_generators.index(name)

    @property
    def generator_names(self) -> tuple[str, ...]:
        return tuple(n for fac in self.abelian_factors for n in fac) + self.free_generators

    def _gen_table(self) -> dict[str, tuple[int, int]]:
        # name -> (fid, coordinate index or -1 for free)
        table = {}
        for i, fac in enumerate(self.abelian_factors):
            for d, name in enumerate(fac):
                table[name] = (i, d)
        for j, name in enumerate(self.free_generators):
            table[name] = (self.num_peripherals + j, -1)
        return table

    # -- element constructors ----------------------------------------------

    def identity(self) -> "Element":
        return Element(self, ())

    def generator(self, name: str, exp: int = 1) -> "Element":
        fid, d = self._gen_table().get(name, (None, None))
        if fid is None:
            raise ValueError(f"unknown generator label: {name!r}")
        if exp == 0:
            return self.identity()
        if d >= 0:
            vec = [0] * self.rank_of(fid)
            vec[d] = exp
            return Element(self, ((fid, tuple(vec)),))
        return Element(self, ((fid, exp),))

    def peripheral(self, i: int, vector) -> "Element":
        if not 0 <= i < self.num_peripherals:
            raise ValueError(f"peripheral index out of range: {i}")
        vec = tuple(int(c) for c in vector)
        if len(vec) != self.rank_of(i):
            raise ValueError(f"vector length {len(vec)} != rank {self.rank_of(i)}")
        if all(c == 0 for c in vec):
            return self.identity()
        return Element(self, ((i, vec),))

    def element(self, syllables) -> "Element":
        """Build an element from raw syllables, normalizing as needed."""
        letters = []
        for s in syllables:
            fid, payload = s
            if fid < self.num_peripherals:
                letters.append((fid, tuple(payload)))
            else:
                letters.append((fid, int(payload)))
        return normalize(self, letters)

    def parse_word(self, text: str) -> "Element":
        """Parse a word like ``"a b^-1 t^3"`` over the X letters; "1" is the identity."""
        text = text.strip()
        if not text or text == "1":
            return self.identity()
        out = self.identity()
        for tok in text.split():
            if "^" in tok:
                name, _, e = tok.partition("^")
                out = out * self.generator(name, int(e))
            else:
                out = out * self.generator(tok)
        return out

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "abelian_factors": [list(f) for f in self.abelian_factors],
            "free_generators": list(self.free_generators),
        }

    @classmethod
    def from_json(cls, data: dict) -> "GroupSpec":
        return cls(
            abelian_factors=tuple(tuple(f) for f in data.get("abelian_factors", [])),
            free_generators=tuple(data.get("free_generators", [])),
        )


class Element:
    """A group element in canonical free-product normal form.

    Adjacent syllables lie in distinct factors; no zero vectors or exponents.
    The empty syllable sequence is the identity.
    """

    __slots__ = ("spec", "sylls", "_hash")

    def __init__(self, spec: GroupSpec, sylls: tuple):
        self.spec = spec
        self.sylls = sylls
        self._hash = hash(sylls)

    def __eq__(self, other):
        return (
            isinstance(other, Element)
            and self._hash == other._hash
            and self.sylls == other.sylls
            and self.spec == other.spec
        )

    def __hash__(self):
        return self._hash

    def __mul__(self, other: "Element") -> "Element":
        return multiply(self, other)

    def inverse(self) -> "Element":
        return invert(self)

    def __pow__(self, n: int) -> "Element":
        if n < 0:
            return invert(self) ** (-n)
        out = self.spec.identity()
        for _ in range(n):
            out = out * self
        return out

    @property
    def is_identity(self) -> bool:
        return not self.sylls

    def length_x(self) -> int:
        return length_x(self)

    def sort_key(self):
        return (length_x(self), _sylls_key(self.sylls))

    def __repr__(self):
        if not self.sylls:
            return "1"
        spec = self.spec
        parts = []
        for fid, payload in self.sylls:
            if fid < spec.num_peripherals:
                names = spec.abelian_factors[fid]
                bits = []
                for name, c in zip(names, payload):
                    if c == 1:
                        bits.append(name)
                    elif c != 0:
                        bits.append(f"{name}^{c}")
                parts.append("".join(bits) if bits else "1")
            else:
                name = spec.free_generators[fid - spec.num_peripherals]
                e = payload
                parts.append(name if e == 1 else f"{name}^{e}")
        return "·".join(parts)

    def to_json(self) -> list:
        spec = self.spec
        out = []
        for fid, payload in self.sylls:
            if fid < spec.num_peripherals:
                out.append([fid, list(payload)])
            else:
                out.append([spec.free_generators[fid - spec.num_peripherals], payload])
        return out

    @classmethod
    def from_json(cls, spec: GroupSpec, data: list) -> "Element":
        sylls = []
        for item in data:
            head, payload = item
            if isinstance(head, str):
                sylls.append((spec.free_fid(head), int(payload)))
            else:
                sylls.append((int(head), tuple(int(c) for c in payload)))
        return normalize(spec, sylls)


def _sylls_key(sylls: tuple) -> tuple:
    # Uniform, comparable key: free exponents wrapped in 1-tuples.
    return tuple((fid, payload if isinstance(payload, tuple) else (payload,)) for fid, payload in sylls)


def _syll_cost(syll) -> int:
    fid, payload = syll
    if isinstance(payload, tuple):
        return sum(abs(c) for c in payload)
    return abs(payload)


def _push(out: list, syll, num_peripherals: int) -> None:
    fid, payload = syll
    if isinstance(payload, tuple):
        if all(c == 0 for c in payload):
            return
    elif payload == 0:
        return
    while out and out[-1][0] == fid:
        prev = out.pop()
        if isinstance(payload, tuple):
            payload = tuple(a + b for a, b in zip(prev[1], payload))
            if all(c == 0 for c in payload):
                return
        else:
            payload = prev[1] + payload
            if payload == 0:
                return
    out.append((fid, payload))


def normalize(spec: GroupSpec, letters) -> Element:
    """Fold raw letters over X and the peripheral alphabets into canonical form.

    Letters are generator names (optionally ``name^k``), ``(i, vector)``
    pairs for peripheral letters, or raw ``(fid, payload)`` syllables.
    """
    table = spec._gen_table()
    m = spec.num_peripherals
    out: list = []
    for letter in letters:
        if isinstance(letter, str):
            if "^" in letter:
                name, _, e = letter.partition("^")
                exp = int(e)
            else:
                name, exp = letter, 1
            if name not in table:
                raise ValueError(f"unknown generator label: {name!r}")
            fid, d = table[name]
            if d >= 0:
                vec = [0] * spec.rank_of(fid)
                vec[d] = exp
                _push(out, (fid, tuple(vec)), m)
            else:
                _push(out, (fid, exp), m)
        else:
            fid, payload = letter
            if not isinstance(fid, int) or not 0 <= fid < spec.num_factors:
                raise ValueError(f"factor id out of range: {fid}")
            if fid < m:
                vec = tuple(int(c) for c in payload)
                if len(vec) != spec.rank_of(fid):
                    raise ValueError(f"vector length {len(vec)} != rank {spec.rank_of(fid)}")
                _push(out, (fid, vec), m)
            else:
                _push(out, (fid, int(payload)), m)
    return Element(spec, tuple(out))


def multiply(x: Element, y: Element) -> Element:
    if x.spec != y.spec:
        raise ValueError("elements from mismatched group specs")
    if not x.sylls:
        return y
    if not y.sylls:
        return x
    out = list(x.sylls)
    m = x.spec.num_peripherals
    for syll in y.sylls:
        _push(out, syll, m)
    return Element(x.spec, tuple(out))


def invert(x: Element) -> Element:
    sylls = []
    for fid, payload in reversed(x.sylls):
        if isinstance(payload, tuple):
            sylls.append((fid, tuple(-c for c in payload)))
        else:
            sylls.append((fid, -payload))
    return Element(x.spec, tuple(sylls))


def conjugate(x: Element, by: Element) -> Element:
    """by · x · by^-1."""
    return multiply(multiply(by, x), invert(by))


def length_x(x: Element) -> int:
    """Word length over X: L1 norms of abelian syllables plus free exponents."""
    return sum(_syll_cost(s) for s in x.sylls)


def dist_x(u: Element, v: Element) -> int:
    """dist_X(u, v) = |u^-1 v|_X, with shared-prefix cancellation."""
    su, sv = u.sylls, v.sylls
    i = 0
    n = min(len(su), len(sv))
    while i < n and su[i] == sv[i]:
        i += 1
    total = 0
    j = i
    if i < len(su) and i < len(sv) and su[i][0] == sv[i][0]:
        pu, pv = su[i][1], sv[i][1]
        if isinstance(pu, tuple):
            total += sum(abs(a - b) for a, b in zip(pu, pv))
        else:
            total += abs(pu - pv)
        j = i + 1
        total += sum(_syll_cost(s) for s in su[j:])
        total += sum(_syll_cost(s) for s in sv[j:])
    else:
        total += sum(_syll_cost(s) for s in su[i:])
        total += sum(_syll_cost(s) for s in sv[i:])
    return total


def coset_id(x: Element, i: int) -> Element:
    """Canonical representative of the left coset x·A_i (trailing A_i syllable removed)."""
    spec = x.spec
    if not 0 <= i < spec.num_peripherals:
        raise ValueError(f"peripheral index out of range: {i}")
    if x.sylls and x.sylls[-1][0] == i:
        return Element(spec, x.sylls[:-1])
    return x


# -- ball enumeration --------------------------------------------------------


@lru_cache(maxsize=None)
def abelian_sphere(rank: int, weight: int) -> tuple:
    """All integer vectors of the given L1 norm, sorted; weight 0 gives the origin."""
    if weight == 0:
        return (tuple([0] * rank),)
    out = []

    def rec(prefix, remaining, budget):
        if remaining == 1:
            if budget == 0:
                out.append(tuple(prefix + [0]))
            else:
                out.append(tuple(prefix + [-budget]))
                out.append(tuple(prefix + [budget]))
            return
        for c in range(-budget, budget + 1):
            rec(prefix + [c], remaining - 1, budget - abs(c))

    rec([], rank, weight)
    return tuple(sorted(out))


def abelian_ball(rank: int, radius: int) -> list:
    out = []
    for w in range(radius + 1):
        out.extend(abelian_sphere(rank, w))
    return out


@lru_cache(maxsize=None)
def _ball_sylls(spec: GroupSpec, radius: int) -> tuple:
    m = spec.num_peripherals
    results = []

    def rec(prefix: tuple, last_fid: int, budget: int):
        results.append(prefix)
        if budget == 0:
            return
        for fid in range(spec.num_factors):
            if fid == last_fid:
                continue
            if fid < m:
                for w in range(1, budget + 1):
                    for vec in abelian_sphere(spec.rank_of(fid), w):
                        rec(prefix + ((fid, vec),), fid, budget - w)
            else:
                for e in range(1, budget + 1):
                    rec(prefix + ((fid, -e),), fid, budget - e)
                    rec(prefix + ((fid, e),), fid, budget - e)

    rec((), -1, radius)
    results.sort(key=lambda s: (sum(_syll_cost(t) for t in s), _sylls_key(s)))
    return tuple(results)


def ball_x(spec: GroupSpec, radius: int, cap: int | None = None) -> list[Element]:
    """All elements with |x|_X <= radius, ordered by (length, lex); cached.

    The radius is checked against the hard cap (RELHYP_CAP_OVERRIDE raises it).
    """
    limit = cap if cap is not None else hard_cap(BALL_RADIUS_CAP)
    if radius > limit:
        raise CapExceeded(f"ball radius {radius} exceeds cap {limit}")
    return [Element(spec, s) for s in _ball_sylls(spec, radius)]


def sphere_x(spec: GroupSpec, radius: int) -> list[Element]:
    return [e for e in ball_x(spec, radius) if length_x(e) == radius]


#: The standard desk group Z^2 * <t>.
def desk_group() -> GroupSpec:
    return GroupSpec(abelian_factors=(("a", "b"),), free_generators=("t",))

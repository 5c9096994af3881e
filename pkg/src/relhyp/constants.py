"""Empirical hyperbolicity/BCP constants and the exact derived constant chain.

The existence constants of the theory (delta, epsilon, D) are estimated by
exhaustive scans over finite, radius-stamped carriers; the derived chain
(tau = 5*D, eta, C) is evaluated exactly from the estimates.  Estimates are
lower bounds by construction: enlarging the carrier can only increase them,
which the monotonicity tests exercise.  Instability is surfaced via the
stability flags, never hidden.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .group import (
    CapExceeded,
    Element,
    GroupSpec,
    abelian_sphere,
    ball_x,
    coset_id,
    dist_x,
    invert,
    length_x,
    multiply,
    sphere_x,
)
from .relcayley import (
    RelPath,
    decompose_components,
    geodesics_between,
    rel_dist_between,
    rel_distance,
    rel_geodesics,
)
from . import lattice

#: The quasi-geodesic constant of the polygonal-path proposition; not configurable.
LAMBDA0 = 3

#: Parameter pairs the downstream arguments consume; estimation is restricted
#: to these to avoid combinatorial blowup.  (1, 0) admits every k >= 0.
EPSILON_WHITELIST = ((1, 0), (1, 2), (1, 4), (3, 0))

DEFAULT_PATHS_PER_ENDPOINT = 200000
DEFAULT_WORK_BUDGET = 30_000_000
DEFAULT_POLYGON_BUDGET = 4_000_000
DEFAULT_TRIANGLE_BUDGET = 4_000_000


# -- family automorphisms --------------------------------------------------------


def _signed_perms(rank: int):
    out = []
    for perm in itertools.permutations(range(rank)):
        for signs in itertools.product((1, -1), repeat=rank):
            out.append((perm, signs))
    return out


def family_automorphisms(spec: GroupSpec) -> list:
    """Length-preserving automorphisms: signed basis permutations per peripheral
    and sign flips of free letters.  They fix factor structure, cosets and
    edge tags, so every scanned quantity is invariant under them."""
    per_factor = [_signed_perms(spec.rank_of(i)) for i in range(spec.num_peripherals)]
    free_flips = list(itertools.product((1, -1), repeat=len(spec.free_generators)))
    autos = []
    for choice in itertools.product(*per_factor) if per_factor else [()]:
        for flips in free_flips:
            autos.append((choice, flips))
    return autos


def apply_automorphism(auto, x: Element) -> Element:
    choice, flips = auto
    spec = x.spec
    m = spec.num_peripherals
    sylls = []
    for fid, payload in x.sylls:
        if fid < m:
            perm, signs = choice[fid]
            vec = tuple(signs[d] * payload[perm[d]] for d in range(len(payload)))
            sylls.append((fid, vec))
        else:
            sylls.append((fid, flips[fid - m] * payload))
    return Element(spec, tuple(sylls))


def orbit_representatives(spec: GroupSpec, elements) -> list[Element]:
    """One representative per automorphism orbit, by minimal sort key."""
    autos = family_automorphisms(spec)
    seen = set()
    reps = []
    for x in elements:
        if x in seen:
            continue
        orbit = {apply_automorphism(a, x) for a in autos}
        seen |= orbit
        reps.append(min(orbit, key=lambda e: e.sort_key()))
    return reps


# -- estimate containers ----------------------------------------------------------


@dataclass
class EpsilonEstimate:
    lam: int
    c: int
    k: int
    radius: int
    value: int
    witness_pair: tuple[RelPath, RelPath] | None
    status: str  # "exhaustive-at-radius" | "capped"
    notes: str = ""

    def to_json(self) -> dict:
        return {
            "lambda": self.lam,
            "c": self.c,
            "k": self.k,
            "radius": self.radius,
            "value": self.value,
            "status": self.status,
            "notes": self.notes,
            "witness_pair": (
                [self.witness_pair[0].to_json(), self.witness_pair[1].to_json()]
                if self.witness_pair
                else None
            ),
        }


@dataclass
class DEstimate:
    radius: int
    max_n: int
    value: int
    witness: dict | None
    status: str

    def to_json(self) -> dict:
        return {
            "radius": self.radius,
            "max_n": self.max_n,
            "value": self.value,
            "status": self.status,
            "witness": self.witness,
        }


@dataclass
class ConstantsLedger:
    """The constant chain for one experiment, with radius provenance."""

    delta_hat: int | None = None
    delta_radius: int | None = None
    epsilon_table: dict = field(default_factory=dict)  # (lam,c,k) -> EpsilonEstimate
    d_estimate: DEstimate | None = None
    eta: int | None = None
    lambda0: int = LAMBDA0

    @property
    def d_hat(self) -> int:
        return self.d_estimate.value if self.d_estimate else 0

    @property
    def tau(self) -> int:
        return 5 * self.d_hat

    def epsilon(self, lam, c, k) -> int:
        key = (int(lam), int(c), int(k))
        if key not in self.epsilon_table:
            raise KeyError(f"epsilon table missing entry {key}")
        return self.epsilon_table[key].value

    def set_epsilon(self, est: EpsilonEstimate) -> None:
        self.epsilon_table[(est.lam, est.c, est.k)] = est

    def to_json(self) -> dict:
        return {
            "delta_hat": self.delta_hat,
            "delta_radius": self.delta_radius,
            "epsilon_table": [
                self.epsilon_table[k].to_json() for k in sorted(self.epsilon_table)
            ],
            "d_estimate": self.d_estimate.to_json() if self.d_estimate else None,
            "tau": self.tau if self.d_estimate else None,
            "eta": self.eta,
            "lambda0": self.lambda0,
        }


# -- scan carriers -----------------------------------------------------------------


class ScanCarrier:
    """Finite vertex set with adjacency and distance tables for path scans.

    Vertices: the X-ball of the given radius plus 'spike' extensions (single
    peripheral syllables and free powers up to spike_norm), so that the long
    X-spellings of peripheral letters that drive the BCP clauses stay inside
    the carrier.
    """

    def __init__(self, spec: GroupSpec, radius: int, spike_norm: int):
        self.spec = spec
        self.radius = radius
        self.spike_norm = spike_norm
        verts = set(ball_x(spec, radius))
        for i in range(spec.num_peripherals):
            for w in range(1, spike_norm + 1):
                for vec in abelian_sphere(spec.rank_of(i), w):
                    verts.add(spec.peripheral(i, vec))
        for name in spec.free_generators:
            for e in range(1, spike_norm + 1):
                verts.add(spec.generator(name, e))
                verts.add(spec.generator(name, -e))
        self.vertices = sorted(verts, key=lambda v: v.sort_key())
        self.index = {v: i for i, v in enumerate(self.vertices)}
        n = len(self.vertices)
        self.rel_d = [[0] * n for _ in range(n)]
        self.x_d = [[0] * n for _ in range(n)]
        for i, u in enumerate(self.vertices):
            row_r = self.rel_d[i]
            row_x = self.x_d[i]
            for j in range(i + 1, n):
                v = self.vertices[j]
                rd = rel_dist_between(u, v)
                xd = dist_x(u, v)
                row_r[j] = rd
                row_x[j] = xd
                self.rel_d[j][i] = rd
                self.x_d[j][i] = xd
        self._build_adjacency()

    def _build_adjacency(self):
        spec = self.spec
        coset_key: dict[tuple[int, Element], int] = {}
        by_coset: dict[int, list[int]] = {}
        self.coset_of = []  # vertex idx -> tuple of coset keys per peripheral
        for idx, v in enumerate(self.vertices):
            keys = []
            for i in range(spec.num_peripherals):
                c = coset_id(v, i)
                key = coset_key.setdefault((i, c), len(coset_key))
                by_coset.setdefault(key, []).append(idx)
                keys.append(key)
            self.coset_of.append(tuple(keys))
        self.adjacency = []
        gen_steps = [(name, sign) for name in spec.generator_names for sign in (1, -1)]
        for idx, v in enumerate(self.vertices):
            edges = []
            for name, sign in gen_steps:
                w = multiply(v, spec.generator(name, sign))
                j = self.index.get(w)
                if j is not None:
                    edges.append((("x", name, sign), j))
            for i in range(spec.num_peripherals):
                key = self.coset_of[idx][i]
                for j in by_coset.get(key, []):
                    if j == idx:
                        continue
                    move = multiply(invert(v), self.vertices[j])
                    edges.append((("h", i, move.sylls[0][1]), j))
            self.adjacency.append(tuple(edges))


_carrier_cache: dict = {}


def scan_carrier(spec: GroupSpec, radius: int, spike_norm: int) -> ScanCarrier:
    key = (spec, radius, spike_norm)
    if key not in _carrier_cache:
        _carrier_cache[key] = ScanCarrier(spec, radius, spike_norm)
    return _carrier_cache[key]


# -- quasi-geodesic path enumeration ----------------------------------------------


def enumerate_qg_paths(
    carrier: ScanCarrier,
    target_idx: int,
    lam: int,
    c: int,
    path_cap: int = DEFAULT_PATHS_PER_ENDPOINT,
    work_budget: int = DEFAULT_WORK_BUDGET,
):
    """All (lam, c)-quasi-geodesic paths without backtracking from 1 to the target.

    Paths are confined to the carrier and canonicalized to single-edge
    components: a run of consecutive same-coset peripheral edges has the same
    (phase vertices, component) signature as the single edge between its
    endpoints, and collapsing preserves every quasi-geodesic inequality, so
    the signature sweep is still exhaustive.  Returns (signatures, capped);
    signatures maps (phase tuple, comps tuple) -> witness label tuple.
    """
    spec = carrier.spec
    start_idx = carrier.index[spec.identity()]
    rel_d = carrier.rel_d
    adj = carrier.adjacency
    coset_of = carrier.coset_of
    rd_t = rel_d[target_idx]
    total_budget = lam * rd_t[start_idx] + c

    signatures: dict = {}
    state = {"count": 0, "work": 0, "capped": False}

    verts = [start_idx]
    labels: list = []
    rows = [rel_d[start_idx]]
    limits = [lam * rd_t[start_idx] + c]
    comps: list = []  # (factor, coset_key, start_edge, end_edge)
    comp_cosets: set = set()

    def record():
        state["count"] += 1
        interior = set()
        for (_f, _ck, s, e) in comps:
            interior.update(range(s + 1, e))
        phase = tuple(v for j, v in enumerate(verts) if j not in interior)
        comp_sig = tuple((f, ck, verts[s], verts[e]) for (f, ck, s, e) in comps)
        key = (phase, comp_sig)
        if key not in signatures:
            signatures[key] = tuple(labels)

    def dfs():
        if state["capped"]:
            return
        state["work"] += 1
        if state["work"] > work_budget or state["count"] >= path_cap:
            state["capped"] = True
            return
        cur = verts[-1]
        if cur == target_idx:
            record()
        cur_len = len(labels)
        if cur_len >= total_budget:
            return
        last = labels[-1] if labels else None
        new_len = cur_len + 1
        for label, nxt in adj[cur]:
            if new_len + rd_t[nxt] > total_budget:
                continue
            if label[0] == "h":
                if last is not None and last[0] == "h" and last[1] == label[1]:
                    continue  # collapse rule: single-edge components only
                fac = label[1]
                ck = coset_of[cur][fac]
                if (fac, ck) in comp_cosets:
                    continue  # would backtrack
            ok = True
            rdn = rd_t[nxt]
            for p in range(cur_len):
                sub_len = new_len - p
                rp = rows[p][nxt]
                if sub_len > lam * rp + c or sub_len + rdn > limits[p]:
                    ok = False
                    break
            if not ok:
                continue
            if label[0] == "h":
                comps.append((fac, ck, cur_len, new_len))
                comp_cosets.add((fac, ck))
            verts.append(nxt)
            labels.append(label)
            rows.append(rel_d[nxt])
            limits.append(lam * rd_t[nxt] + c)
            dfs()
            verts.pop()
            labels.pop()
            rows.pop()
            limits.pop()
            if label[0] == "h":
                comps.pop()
                comp_cosets.discard((fac, ck))

    dfs()
    return signatures, state["capped"]


# -- clause aggregation over one endpoint ------------------------------------------


def _minimal_sets(sets: list[frozenset]) -> list[frozenset]:
    distinct = sorted(set(sets), key=len)
    out = []
    for s in distinct:
        if not any(t <= s for t in out):
            out.append(s)
    return out


class _EndpointAggregate:
    """Clause maxima over all path pairs at one endpoint, without pairing paths.

    clause (i) decomposes as max over (phase vertex of any path, inclusion-
    minimal phase set); clause (ii) needs, per coset, the widest component and
    one path avoiding the coset; clause (iii) pools component endpoint pairs
    per coset.  Witness provenance is kept per aggregate.
    """

    def __init__(self, x_d):
        self.x_d = x_d
        self.phase_sets: dict[frozenset, tuple] = {}
        self.vertex_rep: dict[int, tuple] = {}
        self.comps: dict[tuple, tuple] = {}  # (f, ck, s-, s+) -> labels
        self.coset_sets: dict[frozenset, tuple] = {}

    def add_signatures(self, signatures: dict):
        for (phase, comp_sig), labels in signatures.items():
            fs = frozenset(phase)
            if fs not in self.phase_sets:
                self.phase_sets[fs] = labels
            for v in phase:
                if v not in self.vertex_rep:
                    self.vertex_rep[v] = labels
            for comp in comp_sig:
                if comp not in self.comps:
                    self.comps[comp] = labels
            cs = frozenset((f, ck) for (f, ck, _s, _e) in comp_sig)
            if cs not in self.coset_sets:
                self.coset_sets[cs] = labels

    def best(self):
        """Return (value, witness_labels_pair) over all three clauses."""
        x_d = self.x_d
        best = 0
        wit = None
        minimal = _minimal_sets(list(self.phase_sets.keys()))
        for v, rep_v in self.vertex_rep.items():
            row = x_d[v]
            for q in minimal:
                gap = min(row[w] for w in q)
                if gap > best:
                    best = gap
                    wit = (rep_v, self.phase_sets[q])
        by_coset: dict[tuple, list[tuple]] = {}
        for comp in self.comps:
            by_coset.setdefault((comp[0], comp[1]), []).append(comp)
        for key, pool in by_coset.items():
            avoiders = [
                labels for cs, labels in self.coset_sets.items() if key not in cs
            ]
            if avoiders:
                for comp in pool:
                    span = x_d[comp[2]][comp[3]]
                    if span > best:
                        best = span
                        wit = (self.comps[comp], avoiders[0])
            for s, t in itertools.combinations(pool, 2):
                g = max(x_d[s[2]][t[2]], x_d[s[3]][t[3]])
                if g > best:
                    best = g
                    wit = (self.comps[s], self.comps[t])
        return best, wit


# -- the epsilon estimator ----------------------------------------------------------


def _path_signature(path: RelPath):
    comps = decompose_components(path)
    interior = set()
    for c in comps:
        interior.update(range(c.start + 1, c.end))
    phase = tuple(v for j, v in enumerate(path.vertices) if j not in interior)
    comp_sig = tuple((c.factor, c.coset, c.s_minus, c.s_plus) for c in comps)
    return (phase, comp_sig)


def _pair_clause_value(x_d_fn, sig_p, sig_q) -> int:
    """Max BCP clause quantity for one ordered pair of path signatures."""
    phase_p, comps_p = sig_p
    phase_q, comps_q = sig_q
    best = 0
    for v in phase_p:
        gap = min(x_d_fn(v, w) for w in phase_q)
        if gap > best:
            best = gap
    for v in phase_q:
        gap = min(x_d_fn(v, w) for w in phase_p)
        if gap > best:
            best = gap
    for s in comps_p:
        partners = [t for t in comps_q if t[0] == s[0] and t[1] == s[1]]
        if partners:
            for t in partners:
                g = max(x_d_fn(s[2], t[2]), x_d_fn(s[3], t[3]))
                if g > best:
                    best = g
        else:
            span = x_d_fn(s[2], s[3])
            if span > best:
                best = span
    for t in comps_q:
        if not any(s[0] == t[0] and s[1] == t[1] for s in comps_p):
            span = x_d_fn(t[2], t[3])
            if span > best:
                best = span
    return best


def _axis_offsets(spec: GroupSpec, k: int) -> list[Element]:
    """Identity plus single-syllable axis moves of X-length at most k."""
    out = [spec.identity()]
    for i in range(spec.num_peripherals):
        rank = spec.rank_of(i)
        for d in range(rank):
            for j in range(1, k + 1):
                vec = tuple(j if dd == d else 0 for dd in range(rank))
                out.append(spec.peripheral(i, vec))
                out.append(spec.peripheral(i, tuple(-c for c in vec)))
    for name in spec.free_generators:
        for j in range(1, k + 1):
            out.append(spec.generator(name, j))
            out.append(spec.generator(name, -j))
    return out


def spike_norm_for(lam: int, c: int, radius: int) -> int:
    return lam * radius + c + 1


def estimate_epsilon(
    spec: GroupSpec,
    lam: int,
    c: int,
    k: int,
    radius: int,
    path_cap: int = DEFAULT_PATHS_PER_ENDPOINT,
    work_budget: int = DEFAULT_WORK_BUDGET,
    geodesic_cap: int | None = None,
) -> EpsilonEstimate:
    """Scan k-similar (lam, c)-quasi-geodesic pairs without backtracking.

    The estimate is the least integer satisfying all three BCP clauses on
    every enumerated pair; the witness pair realizes it.  Endpoints run over
    the X-ball of the radius extended by peripheral axis spikes, reduced to
    automorphism orbit representatives.
    """
    lam, c, k = int(lam), int(c), int(k)
    if (lam, c) not in EPSILON_WHITELIST:
        raise ValueError(f"parameters ({lam},{c}) outside the estimation whitelist")
    if k != 0 and (lam, c) != (1, 0):
        raise ValueError("k > 0 is only supported for geodesic pairs (lambda, c) = (1, 0)")

    best = 0
    witness = None
    capped = False
    notes = ""

    if (lam, c) == (1, 0):
        endpoints = list(ball_x(spec, radius))
        seen = set(endpoints)
        for i in range(spec.num_peripherals):
            for w in range(1, 2 * k + radius + 1):
                for vec in abelian_sphere(spec.rank_of(i), w):
                    e = spec.peripheral(i, vec)
                    if e not in seen:
                        seen.add(e)
                        endpoints.append(e)
        offsets = _axis_offsets(spec, k)
        if k > 0:
            notes = "offsets restricted to single-syllable axis moves"
        for x in orbit_representatives(spec, endpoints):
            p_sigs = [(_path_signature(p), p) for p in rel_geodesics(x, geodesic_cap)]
            for u0 in offsets:
                for u1 in offsets:
                    mid = multiply(multiply(invert(u0), x), u1)
                    q_paths = [q.translate(u0) for q in rel_geodesics(mid, geodesic_cap)]
                    for sig_p, p in p_sigs:
                        for q in q_paths:
                            sig_q = _path_signature(q)
                            val = _pair_clause_value(dist_x, sig_p, sig_q)
                            if val > best:
                                best = val
                                witness = (p, q)
        status = "exhaustive-at-radius"
        return EpsilonEstimate(lam, c, k, radius, best, witness, status, notes)

    carrier = scan_carrier(spec, radius, spike_norm_for(lam, c, radius))
    identity = spec.identity()
    reps = orbit_representatives(spec, carrier.vertices)
    for x in reps:
        target_idx = carrier.index[x]
        sigs, was_capped = enumerate_qg_paths(
            carrier, target_idx, lam, c, path_cap, work_budget
        )
        capped = capped or was_capped
        agg = _EndpointAggregate(carrier.x_d)
        agg.add_signatures(sigs)
        val, wit = agg.best()
        if val > best and wit is not None:
            best = val
            witness = (
                RelPath(spec, identity, wit[0]),
                RelPath(spec, identity, wit[1]),
            )
    status = "capped" if capped else "exhaustive-at-radius"
    return EpsilonEstimate(lam, c, k, radius, best, witness, status, notes)


# -- delta (thin triangles) ----------------------------------------------------------


def estimate_delta(
    spec: GroupSpec,
    radius: int,
    geodesic_cap: int | None = None,
    budget: int = DEFAULT_TRIANGLE_BUDGET,
) -> int:
    """Max vertex gap from a side to the union of the other two sides.

    Triangles are translated so one vertex is the identity; the other two run
    over the X-ball of the radius (the first reduced to orbit
    representatives).  Gaps are measured in the relative metric; the result
    is the least integer delta making every scanned triangle delta-thin.
    """
    carrier = ball_x(spec, radius)
    best = 0
    work = 0
    for y in orbit_representatives(spec, carrier):
        geos_y = rel_geodesics(y, geodesic_cap)
        inv_y = invert(y)
        for z in carrier:
            sides = (
                geos_y,
                [p.translate(y) for p in rel_geodesics(multiply(inv_y, z), geodesic_cap)],
                [p.translate(z) for p in rel_geodesics(invert(z), geodesic_cap)],
            )
            for tri in itertools.product(*sides):
                work += 1
                if work > budget:
                    raise CapExceeded("triangle scan budget exceeded")
                for s_idx in range(3):
                    side = tri[s_idx]
                    others = [
                        v
                        for t_idx in range(3)
                        if t_idx != s_idx
                        for v in tri[t_idx].vertices
                    ]
                    for v in side.vertices:
                        gap = min(rel_dist_between(v, w) for w in others)
                        if gap > best:
                            best = gap
    return best


# -- D (polygon) scan ------------------------------------------------------------------


@dataclass(frozen=True)
class HComponentLike:
    factor: int
    coset: Element
    start: int
    end: int
    s_minus: Element
    s_plus: Element


def connected_key(comp):
    return (comp.factor, comp.coset)


def _cyclic_components(spec, path: RelPath):
    """Components of a closed cycle (tag mode), merged across the basepoint."""
    comps = decompose_components(path)
    n = len(path.labels)
    if len(comps) >= 2:
        first, last = comps[0], comps[-1]
        if (
            first.start == 0
            and last.end == n
            and first.factor == last.factor
            and connected_key(first) == connected_key(last)
        ):
            merged = HComponentLike(
                factor=first.factor,
                coset=last.coset,
                start=last.start,
                end=n + first.end,
                s_minus=last.s_minus,
                s_plus=first.s_plus,
            )
            comps = comps[1:-1] + [merged]
    return comps


def estimate_D(
    spec: GroupSpec,
    radius: int,
    max_n: int,
    geodesic_cap: int | None = None,
    budget: int = DEFAULT_POLYGON_BUDGET,
) -> DEstimate:
    """Scan n-gons whose S-sides are isolated single-edge components.

    One polygon corner is pinned at the identity (and the next reduced to
    orbit representatives).  Sides outside S are relative geodesics; S-sides
    are peripheral edges required to be isolated components of the cycle.
    The estimate is the max over admissible assignments of
    ceil(sum of S spans / n).
    """
    if max_n > 5:
        raise ValueError("max_n must be at most 5")
    best = 0
    witness = None
    status = "exhaustive-at-radius"
    work = 0
    carrier = ball_x(spec, radius)
    first_corners = orbit_representatives(spec, carrier)
    identity = spec.identity()

    try:
        for n in range(2, max_n + 1):
            if n == 2:
                corner_iter = ((c1,) for c1 in first_corners)
            else:
                corner_iter = (
                    (c1,) + rest
                    for c1 in first_corners
                    for rest in itertools.product(carrier, repeat=n - 2)
                )
            for corner_tuple in corner_iter:
                corners = (identity,) + corner_tuple
                side_options = []
                for i in range(n):
                    u, v = corners[i], corners[(i + 1) % n]
                    move = multiply(invert(u), v)
                    options = [("geo", g) for g in geodesics_between(u, v, geodesic_cap)]
                    if len(move.sylls) == 1 and move.sylls[0][0] < spec.num_peripherals:
                        fid, vec = move.sylls[0]
                        options.append(("S", RelPath(spec, u, (("h", fid, vec),))))
                    side_options.append(options)
                for combo in itertools.product(*side_options):
                    work += 1
                    if work > budget:
                        raise CapExceeded
                    s_sides = [i for i, (kind, _p) in enumerate(combo) if kind == "S"]
                    if not s_sides:
                        continue
                    labels = []
                    side_ranges = []
                    for _kind, pth in combo:
                        side_ranges.append((len(labels), len(labels) + len(pth.labels)))
                        labels.extend(pth.labels)
                    cycle = RelPath(spec, identity, tuple(labels))
                    comps = _cyclic_components(spec, cycle)
                    total = len(labels)
                    ok = True
                    for idx in s_sides:
                        lo, hi = side_ranges[idx]
                        match = None
                        for comp in comps:
                            if (comp.start == lo and comp.end == hi) or (
                                comp.start == lo and comp.end == hi + total
                            ):
                                match = comp
                                break
                        if match is None:
                            ok = False
                            break
                        if any(
                            comp is not match
                            and connected_key(comp) == connected_key(match)
                            for comp in comps
                        ):
                            ok = False
                            break
                    if not ok:
                        continue
                    total_span = sum(
                        dist_x(combo[i][1].start, combo[i][1].end) for i in s_sides
                    )
                    need = -(-total_span // n)
                    if need > best:
                        best = need
                        witness = {
                            "n": n,
                            "corners": [x.to_json() for x in corners],
                            "s_sides": s_sides,
                            "sum_spans": total_span,
                        }
    except CapExceeded:
        status = "capped"
    return DEstimate(radius=radius, max_n=max_n, value=best, witness=witness, status=status)


# -- eta ---------------------------------------------------------------------------------


def eta_bounds(ledger: ConstantsLedger) -> tuple[int, ...]:
    """The seven lower-bound expressions eta must strictly exceed."""
    e12 = ledger.epsilon(1, 2, 0)
    e14 = ledger.epsilon(1, 4, 0)
    e300 = ledger.epsilon(3, 0, 0)
    e10k = ledger.epsilon(1, 0, e14)
    tau = ledger.tau
    return (
        e12,
        3 * e14,
        2 * e14 + tau,
        2 * e14 + e12 + 3 * tau,
        2 * e12 + e10k,
        2 * e12 + 2 * e10k,
        e300,
    )


def compute_eta(ledger: ConstantsLedger) -> int:
    """eta = 1 + max of the seven bounds (strict inequalities made concrete)."""
    return 1 + max(eta_bounds(ledger))


# -- the neighborhood lemma constant M ----------------------------------------------------


@dataclass
class MEstimate:
    value: int
    certified: bool
    witness: Element | None

    def to_json(self):
        return {
            "value": self.value,
            "certified": self.certified,
            "witness": self.witness.to_json() if self.witness else None,
        }


def compute_M(B, C, K: int, radius: int, expansion_cap: int | None = None) -> MEstimate:
    """Least M with B ∩ N_K(C) inside N_M(B ∩ C) on the scanned ball.

    For two lattices inside one peripheral the computation is exact over the
    whole group (certified); otherwise it is an honest ball scan at the given
    radius.  B and C are subgroup specs from the quasiconvex module.
    """
    if radius < K:
        raise ValueError("radius must be at least K")
    spec = B.group
    lat_b = B.single_lattice()
    lat_c = C.single_lattice()
    if lat_b is not None and lat_c is not None and lat_b[0] == lat_c[0]:
        i, basis_b = lat_b
        _, basis_c = lat_c
        inter = lattice.intersection(basis_b, basis_c, spec.rank_of(i))
        best = 0
        wit = None
        for w in range(K + 1):
            for e in abelian_sphere(spec.rank_of(i), w):
                sol = lattice.solve_in_sum(basis_b, basis_c, e)
                if sol is None:
                    continue
                b0 = sol[0]
                d, _pt = lattice.cvp_l1(inter, b0)
                if d > best:
                    best = d
                    wit = spec.peripheral(i, b0)
        return MEstimate(best, True, wit)

    inter = B.intersection(C)
    cap = expansion_cap if expansion_cap is not None else radius
    best = 0
    wit = None
    certified = True
    for b in B.ball_elements(radius):
        near = None
        for r in range(K + 1):
            hit = False
            for d in sphere_x(spec, r):
                v = C.member(multiply(b, d))
                if v == "yes":
                    hit = True
                    break
                if v == "unknown":
                    certified = False
            if hit:
                near = r
                break
        if near is None:
            continue
        dist_bc = None
        for r in range(cap + 1):
            hit = False
            for d in sphere_x(spec, r):
                v = inter.member(multiply(b, d))
                if v == "yes":
                    hit = True
                    break
                if v == "unknown":
                    certified = False
            if hit:
                dist_bc = r
                break
        if dist_bc is None:
            raise CapExceeded(f"no element of the intersection within {cap} of {b!r}")
        if dist_bc > best:
            best = dist_bc
            wit = b
    return MEstimate(best, certified, wit)


# -- the abelian distortion constant lambda -------------------------------------------------


def compute_lambda_abelian(basis_b, h_vec, gen_set=None) -> Fraction:
    """Certified lambda > 0 with |g|_Y >= lambda * |j| for all j and g in h^j B.

    Uses the dual functional phi with phi(B) = 0, phi(h) = 1 supported on
    span(B, h): |j| = |phi(g)| <= max|phi_i| * |g|_1, so lambda = 1/max|phi_i|
    over the standard basis, scaled by generator distortion for any other Y.
    """
    dim = len(h_vec)
    rank_b = lattice.rank(basis_b, dim)
    rank_bh = lattice.rank(list(basis_b) + [tuple(h_vec)], dim)
    if rank_bh <= rank_b:
        raise ValueError(f"rank condition violated: rank(B) = {rank_b} = rank(<B,h>)")
    rows = [list(v) for v in basis_b] + [list(h_vec)]
    rhs = [Fraction(0)] * len(basis_b) + [Fraction(1)]
    m = len(rows)
    aug = [[Fraction(x) for x in row] + [rhs[r]] for r, row in enumerate(rows)]
    pivots = []
    r = 0
    for col in range(dim):
        piv = next((i for i in range(r, m) if aug[i][col] != 0), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        pv = aug[r][col]
        aug[r] = [x / pv for x in aug[r]]
        for i in range(m):
            if i != r and aug[i][col]:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        pivots.append(col)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if aug[i][dim] != 0:
            raise ValueError("inconsistent dual system")
    phi = [Fraction(0)] * dim
    for row_idx, col in enumerate(pivots):
        phi[col] = aug[row_idx][dim]
    lam = Fraction(1) / max(abs(x) for x in phi)
    if gen_set:
        lam = lam / max(sum(abs(c) for c in y) for y in gen_set)
    return lam


# -- ledger assembly -------------------------------------------------------------------------


@dataclass(frozen=True)
class LedgerConfig:
    delta_radius: int = 2
    eps_1_0_0_radius: int = 3
    eps_1_2_0_radius: int = 2
    eps_1_4_0_radius: int = 2
    eps_3_0_0_radius: int = 2
    eps_1_0_k_radius: int = 2
    d_radius: int = 2
    d_max_n: int = 4

    def to_json(self):
        return {
            "delta_radius": self.delta_radius,
            "eps_1_0_0_radius": self.eps_1_0_0_radius,
            "eps_1_2_0_radius": self.eps_1_2_0_radius,
            "eps_1_4_0_radius": self.eps_1_4_0_radius,
            "eps_3_0_0_radius": self.eps_3_0_0_radius,
            "eps_1_0_k_radius": self.eps_1_0_k_radius,
            "d_radius": self.d_radius,
            "d_max_n": self.d_max_n,
        }


_ledger_cache: dict = {}


def assemble_ledger(spec: GroupSpec, config: LedgerConfig | None = None) -> ConstantsLedger:
    """Compute the full constant chain at the configured radii (cached per spec)."""
    config = config or LedgerConfig()
    key = (spec, config)
    if key in _ledger_cache:
        return _ledger_cache[key]
    ledger = ConstantsLedger()
    ledger.delta_hat = estimate_delta(spec, config.delta_radius)
    ledger.delta_radius = config.delta_radius
    ledger.set_epsilon(estimate_epsilon(spec, 1, 0, 0, config.eps_1_0_0_radius))
    ledger.set_epsilon(estimate_epsilon(spec, 1, 2, 0, config.eps_1_2_0_radius))
    e14 = estimate_epsilon(spec, 1, 4, 0, config.eps_1_4_0_radius)
    ledger.set_epsilon(e14)
    ledger.set_epsilon(estimate_epsilon(spec, 3, 0, 0, config.eps_3_0_0_radius))
    ledger.set_epsilon(estimate_epsilon(spec, 1, 0, e14.value, config.eps_1_0_k_radius))
    ledger.d_estimate = estimate_D(spec, config.d_radius, config.d_max_n)
    ledger.eta = compute_eta(ledger)
    _ledger_cache[key] = ledger
    return ledger

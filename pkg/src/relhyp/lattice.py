"""Exact integer-lattice helpers: HNF bases, membership, intersection, L1 CVP/SVP.

Vectors are int tuples; a lattice is given by a list of generating vectors in
the ambient Z^n.  Everything here is exact (int / Fraction); dimensions are
tiny (desk scale), so simple column reduction and box enumeration suffice.
"""

from __future__ import annotations

from fractions import Fraction


def _gcd_ext(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, s, t) with s*a + t*b = g = gcd(a, b), g >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def hnf_basis(vectors, dim: int) -> list[tuple[int, ...]]:
    """Column-style Hermite basis of the lattice spanned by ``vectors`` in Z^dim.

    Returns a list of linearly independent vectors (one per pivot row, pivots
    positive, entries above each pivot reduced).  Deterministic.
    """
    cols = [list(v) for v in vectors if any(v)]
    basis: list = []
    for row in range(dim):
        if not cols:
            break
        # combine columns until at most one has a nonzero entry in this row
        while True:
            live = [c for c in cols if c[row] != 0]
            if len(live) <= 1:
                break
            live.sort(key=lambda c: abs(c[row]))
            c0 = live[0]
            for c in live[1:]:
                q = c[row] // c0[row]
                for k in range(dim):
                    c[k] -= q * c0[k]
            cols = [c for c in cols if any(c)]
        live = [c for c in cols if c[row] != 0]
        if live:
            piv = live[0]
            if piv[row] < 0:
                piv = [-x for x in piv]
            basis.append(piv)
            cols = [c for c in cols if c[row] == 0 and any(c)]
    # reduce entries above pivots for a canonical form
    pivots = []
    for b in basis:
        r = 0
        while b[r] == 0:
            r += 1
        pivots.append(r)
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            r = pivots[j]
            if basis[j][r]:
                q = basis[i][r] // basis[j][r]
                if q:
                    for k in range(len(basis[i])):
                        basis[i][k] -= q * basis[j][k]
    return [tuple(b) for b in basis]


def rank(vectors, dim: int) -> int:
    return len(hnf_basis(vectors, dim))


def _solve_triangular(basis, vec) -> list[int] | None:
    """Solve sum c_i * basis_i = vec over Z for an HNF basis; None if unsolvable."""
    dim = len(vec)
    residue = list(vec)
    coeffs = []
    pivots = []
    for b in basis:
        r = 0
        while r < dim and b[r] == 0:
            r += 1
        pivots.append(r)
    for b, r in zip(basis, pivots):
        if residue[r] % b[r] != 0:
            return None
        c = residue[r] // b[r]
        coeffs.append(c)
        for k in range(dim):
            residue[k] -= c * b[k]
    if any(residue):
        return None
    return coeffs


def contains(basis, vec) -> bool:
    """Membership of ``vec`` in the lattice with HNF basis ``basis``."""
    if not any(vec):
        return True
    if not basis:
        return False
    return _solve_triangular(basis, vec) is not None


def residue(basis, vec) -> tuple[int, ...]:
    """Canonical representative of vec + L: reduce along pivots (unique)."""
    dim = len(vec)
    out = list(vec)
    pivots = []
    for b in basis:
        r = 0
        while r < dim and b[r] == 0:
            r += 1
        pivots.append(r)
    for b, r in zip(basis, pivots):
        q = out[r] // b[r]
        if q:
            for k in range(dim):
                out[k] -= q * b[k]
    return tuple(out)


def kernel_basis(columns, dim: int) -> list[tuple[int, ...]]:
    """Integer kernel of the map Z^k -> Z^dim sending e_j to columns[j]."""
    k = len(columns)
    # Track unimodular column operations on an identity below the matrix.
    mat = [list(c) + [1 if j == i else 0 for j in range(k)] for i, c in enumerate(columns)]
    # mat rows are the columns of the stacked matrix [A; I], one row per column.
    row = 0
    cols = list(range(len(mat)))
    used = []
    for row in range(dim):
        live = [i for i in cols if mat[i][row] != 0]
        while len(live) > 1:
            live.sort(key=lambda i: abs(mat[i][row]))
            i0 = live[0]
            for i in live[1:]:
                q = mat[i][row] // mat[i0][row]
                for kk in range(dim + k):
                    mat[i][kk] -= q * mat[i0][kk]
            live = [i for i in live if mat[i][row] != 0]
        if live:
            used.append(live[0])
            cols = [i for i in cols if i != live[0]]
    out = []
    for i in cols:
        if all(mat[i][r] == 0 for r in range(dim)):
            out.append(tuple(mat[i][dim:]))
    return out


def intersection(basis_a, basis_b, dim: int) -> list[tuple[int, ...]]:
    """HNF basis of the intersection of two lattices in Z^dim."""
    if not basis_a or not basis_b:
        return []
    columns = list(basis_a) + [tuple(-x for x in v) for v in basis_b]
    gens = []
    for ker in kernel_basis(columns, dim):
        v = [0] * dim
        for c, bvec in zip(ker[: len(basis_a)], basis_a):
            for i in range(dim):
                v[i] += c * bvec[i]
        if any(v):
            gens.append(tuple(v))
    return hnf_basis(gens, dim)


def solve_in_sum(basis_a, basis_b, target) -> tuple[tuple[int, ...], tuple[int, ...]] | None:
    """Find (x in A, y in B) with x + y = target, or None.

    Used for B ∩ (C + e) style coset questions: x = target - y.
    """
    dim = len(target)
    columns = list(basis_a) + list(basis_b)
    if not columns:
        return None if any(target) else (tuple([0] * dim), tuple([0] * dim))
    # Solve via HNF with recorded transform: stack identity as in kernel_basis.
    k = len(columns)
    mat = [list(c) + [1 if j == i else 0 for j in range(k)] for i, c in enumerate(columns)]
    order = list(range(k))
    avail = list(range(k))
    coeffs = [0] * k
    resid = list(target)
    for row in range(dim):
        live = [i for i in avail if mat[i][row] != 0]
        while len(live) > 1:
            live.sort(key=lambda i: abs(mat[i][row]))
            i0 = live[0]
            for i in live[1:]:
                q = mat[i][row] // mat[i0][row]
                for kk in range(dim + k):
                    mat[i][kk] -= q * mat[i0][kk]
            live = [i for i in live if mat[i][row] != 0]
        if live:
            i0 = live[0]
            if resid[row] % mat[i0][row] != 0:
                return None
            c = resid[row] // mat[i0][row]
            for kk in range(dim):
                resid[kk] -= c * mat[i0][kk]
            for kk in range(k):
                coeffs[kk] += c * mat[i0][dim + kk]
            avail = [i for i in avail if i != i0]
        elif resid[row] != 0:
            return None
    if any(resid):
        return None
    na = len(basis_a)
    x = [0] * dim
    for c, bvec in zip(coeffs[:na], basis_a):
        for i in range(dim):
            x[i] += c * bvec[i]
    y = [t - xi for t, xi in zip(target, x)]
    return tuple(x), tuple(y)


def _coeff_boxes(basis, bound: int) -> list[range]:
    """Coefficient ranges covering all lattice points of L1 norm <= bound.

    Uses the exact rational left-inverse of the basis matrix: for v = B c,
    |c_i| <= max_j |P_ij| * |v|_1 where P = pseudo-inverse rows.
    """
    k = len(basis)
    dim = len(basis[0])
    # Solve P B = I over the rationals via Gaussian elimination on B^T B.
    gram = [[sum(basis[i][d] * basis[j][d] for d in range(dim)) for j in range(k)] for i in range(k)]
    bt = [[Fraction(basis[i][d]) for d in range(dim)] for i in range(k)]
    # invert gram (k x k, nonsingular since basis independent)
    aug = [[Fraction(gram[i][j]) for j in range(k)] + [Fraction(1 if j == i else 0) for j in range(k)] for i in range(k)]
    for col in range(k):
        piv = next(r for r in range(col, k) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for r in range(k):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    ginv = [row[k:] for row in aug]
    ranges = []
    for i in range(k):
        # row i of P = sum_j ginv[i][j] * B^T_j
        row = [sum(ginv[i][j] * bt[j][d] for j in range(k)) for d in range(dim)]
        m = max(abs(x) for x in row)
        ci = int(m * bound)
        ranges.append(range(-ci, ci + 1))
    return ranges


def enumerate_short_vectors(basis, bound: int):
    """Yield all lattice points with L1 norm <= bound (includes the origin)."""
    if not basis:
        yield tuple()
        return
    dim = len(basis[0])
    if bound < 0:
        return
    boxes = _coeff_boxes(basis, bound)

    def rec(i, acc):
        if i == len(basis):
            if sum(abs(x) for x in acc) <= bound:
                yield tuple(acc)
            return
        for c in boxes[i]:
            nxt = [a + c * b for a, b in zip(acc, basis[i])]
            yield from rec(i + 1, nxt)

    yield from rec(0, [0] * dim)


def cvp_l1(basis, target) -> tuple[int, tuple[int, ...]]:
    """Distance and a closest lattice point to ``target`` in the L1 norm."""
    dim = len(target)
    if not basis:
        return sum(abs(x) for x in target), tuple([0] * dim)
    best = sum(abs(x) for x in residue(basis, target))
    bound = best + sum(abs(x) for x in target) - sum(abs(x) for x in target)
    bound = best
    best_pt = tuple(t - r for t, r in zip(target, residue(basis, target)))
    # all closer points v satisfy |v - target| <= best, i.e. |v| <= best + |target|
    for v in enumerate_short_vectors(basis, best + sum(abs(x) for x in target)):
        d = sum(abs(a - b) for a, b in zip(v, target))
        if d < best:
            best, best_pt = d, v
    return best, best_pt


def shortest_nonzero(basis, exclude_basis=None) -> tuple[int, tuple[int, ...]] | None:
    """Shortest (L1) nonzero lattice vector, optionally outside a sublattice.

    Returns (norm, vector) or None when no candidate exists (e.g. the lattice
    is contained in the excluded sublattice).
    """
    if not basis:
        return None
    start = min(sum(abs(x) for x in b) for b in basis)
    bound = start
    for _ in range(64):
        best = None
        for v in enumerate_short_vectors(basis, bound):
            if not any(v):
                continue
            if exclude_basis is not None and contains(exclude_basis, v):
                continue
            n = sum(abs(x) for x in v)
            if best is None or n < best[0]:
                best = (n, v)
        if best is not None:
            return best
        bound *= 2
    return None


def lattice_index(ambient_basis, sub_basis) -> int | None:
    """Index [A : B] for full-rank sub_basis <= ambient_basis; None if infinite."""
    k = len(ambient_basis)
    if len(sub_basis) < k:
        return None
    # write each sub vector in ambient coordinates
    coords = []
    for v in sub_basis:
        c = _solve_triangular(hnf_basis(ambient_basis, len(v)), v)
        if c is None:
            raise ValueError("sub_basis not contained in ambient lattice")
        coords.append(c)
    # determinant of k x k integer matrix (fraction-free Gaussian works fine here)
    mat = [list(row) for row in coords]
    det = 1
    n = len(mat)
    mat = [[Fraction(x) for x in row] for row in mat]
    for col in range(n):
        piv = next((r for r in range(col, n) if mat[r][col] != 0), None)
        if piv is None:
            return None
        if piv != col:
            mat[col], mat[piv] = mat[piv], mat[col]
            det = -det
        det *= mat[col][col]
        for r in range(col + 1, n):
            f = mat[r][col] / mat[col][col]
            mat[r] = [x - f * y for x, y in zip(mat[r], mat[col])]
    det = abs(det)
    return int(det)


def complement_to_full_rank(basis, dim: int) -> list[tuple[int, ...]]:
    """Standard basis vectors extending ``basis`` to full rank in Z^dim."""
    out = []
    current = list(basis)
    r = rank(current, dim)
    for d in range(dim):
        if r == dim:
            break
        e = tuple(1 if i == d else 0 for i in range(dim))
        if rank(current + [e], dim) > r:
            out.append(e)
            current.append(e)
            r += 1
    return out

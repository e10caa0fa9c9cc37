"""Fully enumerated finite matrix groups over GF(p).

Every group in scope (GSp(4,q), GL(2,q), the parahoric Levi models, their
parabolics) is stored as an explicit array of matrices with a canonical
integer key per element, so class maps and induced-character counting are
exact table lookups.  Product-type groups are represented as block-diagonal
matrices; `GroupHandle.blocks` records the block sizes.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from math import lcm

import numpy as np

from .algebra import FieldSpec

DEFAULT_ORDER_CAP = 20_000_000
# exhaustive closure / hom verification below this pair count, seeded sample above
_EXHAUSTIVE_PAIRS = 8_000_000
_SAMPLE_PAIRS = 20_000


class GroupError(RuntimeError):
    pass


class GroupTooLargeError(GroupError):
    pass


# ---------------------------------------------------------------------------
# batched matrix helpers (entries are residues mod p, arrays are int64)


def _powers(p: int, n: int) -> np.ndarray:
    return p ** np.arange(n, dtype=np.int64)


def bkeys(mats: np.ndarray, p: int) -> np.ndarray:
    """Canonical injective integer key per matrix (row-major base-p digits)."""
    flat = mats.reshape(mats.shape[0], -1).astype(np.int64)
    return flat @ _powers(p, flat.shape[1])


def bmul(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    return np.einsum("nij,njk->nik", a.astype(np.int64), b.astype(np.int64)) % p


def bmul_right(a: np.ndarray, m: np.ndarray, p: int) -> np.ndarray:
    return np.einsum("nij,jk->nik", a.astype(np.int64), m.astype(np.int64)) % p


def bmul_left(m: np.ndarray, a: np.ndarray, p: int) -> np.ndarray:
    return np.einsum("ij,njk->nik", m.astype(np.int64), a.astype(np.int64)) % p


def _minor_det(mats: np.ndarray, rows, cols, p=None) -> np.ndarray:
    """Determinant of the submatrix on `rows` x `cols`, exact over Z."""
    n = len(rows)
    a = mats[:, rows][:, :, cols].astype(np.int64)
    if n == 1:
        return a[:, 0, 0]
    if n == 2:
        return a[:, 0, 0] * a[:, 1, 1] - a[:, 0, 1] * a[:, 1, 0]
    if n == 3:
        return (
            a[:, 0, 0] * (a[:, 1, 1] * a[:, 2, 2] - a[:, 1, 2] * a[:, 2, 1])
            - a[:, 0, 1] * (a[:, 1, 0] * a[:, 2, 2] - a[:, 1, 2] * a[:, 2, 0])
            + a[:, 0, 2] * (a[:, 1, 0] * a[:, 2, 1] - a[:, 1, 1] * a[:, 2, 0])
        )
    raise ValueError("minor size > 3")  # pragma: no cover


def bdet(mats: np.ndarray, p: int) -> np.ndarray:
    """Batched determinant mod p for d <= 4 via Laplace expansion."""
    d = mats.shape[1]
    if d <= 3:
        return _minor_det(mats, list(range(d)), list(range(d))) % p
    rows = [1, 2, 3]
    det = np.zeros(mats.shape[0], dtype=np.int64)
    sign = 1
    for j in range(4):
        cols = [c for c in range(4) if c != j]
        det += sign * mats[:, 0, j].astype(np.int64) * _minor_det(mats, rows, cols)
        sign = -sign
    return det % p


def binv(mats: np.ndarray, p: int) -> np.ndarray:
    """Batched inverse mod p for d <= 4 via the adjugate (exact integer minors)."""
    n, d, _ = mats.shape
    det = bdet(mats, p)
    if np.any(det == 0):
        raise GroupError("singular matrix in batch inverse")
    table = np.zeros(p, dtype=np.int64)
    for x in range(1, p):
        table[x] = pow(x, -1, p)
    detinv = table[det]
    adj = np.empty((n, d, d), dtype=np.int64)
    idx = list(range(d))
    for i in range(d):
        for j in range(d):
            rows = [r for r in idx if r != i]
            cols = [c for c in idx if c != j]
            m = _minor_det(mats, rows, cols) if d > 1 else np.ones(n, dtype=np.int64)
            adj[:, j, i] = ((-1) ** (i + j)) * m
    return (adj % p) * detinv[:, None, None] % p


def identity_mat(d: int) -> np.ndarray:
    return np.eye(d, dtype=np.int64)


def block_diag2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Stack two batches of square matrices block-diagonally."""
    n = a.shape[0]
    da, db = a.shape[1], b.shape[1]
    out = np.zeros((n, da + db, da + db), dtype=np.int64)
    out[:, :da, :da] = a
    out[:, da:, da:] = b
    return out


# ---------------------------------------------------------------------------
# group handles


@dataclass
class GroupHandle:
    """An explicitly enumerated matrix group.

    elems[0] is always the identity; element ids are positions in `elems`
    and are stable across runs for a fixed construction.
    """

    field: FieldSpec
    d: int
    elems: np.ndarray  # (N, d, d) int64, entries mod p
    keys: np.ndarray  # (N,) int64 canonical keys
    generators: list[int]
    name: str
    blocks: tuple[int, ...] | None = None
    _sorted: np.ndarray | None = dc_field(default=None, repr=False)
    _perm: np.ndarray | None = dc_field(default=None, repr=False)
    _inv: np.ndarray | None = dc_field(default=None, repr=False)
    classes: "ConjClasses | None" = dc_field(default=None, repr=False)

    @property
    def order(self) -> int:
        return len(self.elems)

    @property
    def p(self) -> int:
        return self.field.p

    def _index(self):
        if self._sorted is None:
            self._perm = np.argsort(self.keys, kind="stable")
            self._sorted = self.keys[self._perm]
        return self._sorted, self._perm

    def lookup(self, keys: np.ndarray) -> np.ndarray:
        """Map canonical keys to element ids; raises if any key is foreign."""
        skeys, perm = self._index()
        pos = np.searchsorted(skeys, keys)
        pos = np.clip(pos, 0, len(skeys) - 1)
        if not np.array_equal(skeys[pos], keys):
            raise GroupError(f"element not in group {self.name}")
        return perm[pos]

    def contains(self, keys: np.ndarray) -> np.ndarray:
        skeys, _ = self._index()
        pos = np.clip(np.searchsorted(skeys, keys), 0, len(skeys) - 1)
        return skeys[pos] == keys

    def mul_ids(self, i: int, j: int) -> int:
        prod = (self.elems[i] @ self.elems[j]) % self.p
        return int(self.lookup(bkeys(prod[None], self.p))[0])

    def inverse_perm(self) -> np.ndarray:
        """id -> id of the inverse element."""
        if self._inv is None:
            inv = binv(self.elems, self.p)
            self._inv = self.lookup(bkeys(inv, self.p))
        return self._inv

    def component(self, which: int) -> np.ndarray:
        """Extract one diagonal block of every element (for product groups)."""
        if self.blocks is None:
            raise GroupError("not a block-structured group")
        start = sum(self.blocks[:which])
        stop = start + self.blocks[which]
        return self.elems[:, start:stop, start:stop]

    def __repr__(self) -> str:
        return f"<{self.name}: order {self.order} over {self.field}>"


def _verify_closure(handle: GroupHandle, rng_seed: int = 7) -> None:
    n = handle.order
    p = handle.p
    # inverses stay inside
    handle.inverse_perm()
    # products stay inside: exhaustive for small groups, seeded sample otherwise
    if n * n <= _EXHAUSTIVE_PAIRS:
        chunk = max(1, 2_000_000 // max(n, 1))
        for lo in range(0, n, chunk):
            prods = np.einsum(
                "aij,bjk->abik",
                handle.elems[lo : lo + chunk].astype(np.int64),
                handle.elems.astype(np.int64),
            ) % p
            keys = bkeys(prods.reshape(-1, handle.d, handle.d), p)
            if not np.all(handle.contains(keys)):
                raise GroupError(f"{handle.name} not closed under multiplication")
    else:
        rng = np.random.default_rng(rng_seed)
        ii = rng.integers(0, n, size=_SAMPLE_PAIRS)
        jj = rng.integers(0, n, size=_SAMPLE_PAIRS)
        prods = bmul(handle.elems[ii], handle.elems[jj], p)
        if not np.all(handle.contains(bkeys(prods, p))):
            raise GroupError(f"{handle.name} not closed under multiplication")


def generate_group(
    field: FieldSpec,
    generators: list[np.ndarray],
    name: str,
    cap: int = DEFAULT_ORDER_CAP,
    expected_order: int | None = None,
    blocks: tuple[int, ...] | None = None,
) -> GroupHandle:
    """Breadth-first closure of a generator list into a full enumeration.

    Deterministic element order: identity first, then each BFS round's new
    elements sorted by canonical key.
    """
    if not generators:
        raise GroupError("empty generator list")
    p = field.p
    d = generators[0].shape[0]
    gens = np.array([g % p for g in generators], dtype=np.int64)
    if np.any(bdet(gens, p) == 0):
        raise GroupError("non-invertible generator")

    elems = identity_mat(d)[None]
    keys = bkeys(elems, p)
    frontier = elems
    while len(frontier):
        cand = np.concatenate([bmul_right(frontier, g, p) for g in gens])
        ckeys = bkeys(cand, p)
        uniq, first = np.unique(ckeys, return_index=True)
        cand, ckeys = cand[first], uniq
        skeys = np.sort(keys)
        pos = np.clip(np.searchsorted(skeys, ckeys), 0, len(skeys) - 1)
        new = skeys[pos] != ckeys
        frontier = cand[new]
        if len(frontier):
            elems = np.concatenate([elems, frontier])
            keys = np.concatenate([keys, ckeys[new]])
        if len(elems) > cap:
            projected = expected_order if expected_order else f">{len(elems)}"
            raise GroupTooLargeError(
                f"{name}: projected order {projected} exceeds cap {cap}"
            )
    handle = GroupHandle(field, d, elems, keys, [], name, blocks=blocks)
    gen_ids = handle.lookup(bkeys(gens, p))
    handle.generators = [int(i) for i in gen_ids]
    if expected_order is not None and handle.order != expected_order:
        raise GroupError(
            f"{name}: closure order {handle.order} != expected {expected_order}"
        )
    _verify_closure(handle)
    return handle


def find_generators(handle: GroupHandle) -> list[int]:
    """Greedy small generating set for a handle built without one."""
    if handle.generators:
        return handle.generators
    p = handle.p
    gens: list[int] = []
    closed = np.zeros(handle.order, dtype=bool)
    closed[0] = True
    while not closed.all():
        gens.append(int(np.flatnonzero(~closed)[0]))
        # re-close from scratch under the enlarged generator set
        closed[:] = False
        closed[0] = True
        frontier = np.array([0])
        while len(frontier):
            fresh = []
            for g in gens:
                prods = bmul_right(handle.elems[frontier], handle.elems[g], p)
                ids = handle.lookup(bkeys(prods, p))
                new = np.unique(ids[~closed[ids]])
                if len(new):
                    closed[new] = True
                    fresh.append(new)
            frontier = (
                np.concatenate(fresh) if fresh else np.array([], dtype=np.int64)
            )
    handle.generators = gens
    return gens


# ---------------------------------------------------------------------------
# conjugacy classes


@dataclass
class ConjClasses:
    """Conjugacy class data: class map, sizes, representatives, inverse classes."""

    group: GroupHandle
    n_classes: int
    class_of: np.ndarray  # (N,) int32
    sizes: np.ndarray  # (K,) int64
    rep_ids: np.ndarray  # (K,) minimal element id per class
    centralizer_orders: np.ndarray  # (K,) int64
    inv_class: np.ndarray  # (K,) class id of inverse class
    rep_orders: np.ndarray  # (K,) element order of each representative
    exponent: int

    def reps(self) -> np.ndarray:
        return self.group.elems[self.rep_ids]

    def power_class(self, k: int, m: int) -> int:
        """Class id of rep_k^m."""
        g = self.group
        mat = identity_mat(g.d)
        base = g.elems[self.rep_ids[k]]
        m = m % self.rep_orders[k]
        for _ in range(m):
            mat = (mat @ base) % g.p
        return int(self.class_of[g.lookup(bkeys(mat[None], g.p))[0]])


def _union(parent: np.ndarray, a: int, b: int) -> None:
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    while parent[b] != b:
        parent[b] = parent[parent[b]]
        b = parent[b]
    if a != b:
        parent[max(a, b)] = min(a, b)


def conjugacy_classes(handle: GroupHandle) -> ConjClasses:
    """Conjugacy classes via deterministic union-find over generator conjugation."""
    if handle.classes is not None:
        return handle.classes
    g = handle
    p = g.p
    gen_ids = find_generators(g)
    parent = np.arange(g.order)
    for gi in gen_ids:
        mat = g.elems[gi]
        mat_inv = binv(mat[None], p)[0]
        conj = bmul_right(bmul_left(mat_inv, g.elems, p), mat, p)
        ids = g.lookup(bkeys(conj, p))
        for i in range(g.order):
            _union(parent, i, int(ids[i]))
    # resolve roots
    for i in range(g.order):
        r = i
        while parent[r] != r:
            r = parent[r]
        while parent[i] != r:
            parent[i], i = r, parent[i]
    roots, class_of, sizes = np.unique(parent, return_inverse=True, return_counts=True)
    # order classes by minimal element id (== root, since union keeps the min)
    order = np.argsort(roots)
    rank = np.empty_like(order)
    rank[order] = np.arange(len(roots))
    class_of = rank[class_of].astype(np.int32)
    sizes = sizes[order].astype(np.int64)
    rep_ids = roots[order]
    k = len(rep_ids)
    if int(sizes.sum()) != g.order:
        raise GroupError("class equation violated")
    centralizers = g.order // sizes
    if np.any(centralizers * sizes != g.order):
        raise GroupError("centralizer orders not integral")
    inv_ids = g.inverse_perm()[rep_ids]
    inv_class = class_of[inv_ids].astype(np.int64)
    if not np.array_equal(inv_class[inv_class], np.arange(k)):
        raise GroupError("inverse-class map is not an involution")
    # representative orders and group exponent
    rep_orders = np.empty(k, dtype=np.int64)
    for i in range(k):
        m = g.elems[rep_ids[i]]
        acc = m.copy()
        n = 1
        ident = identity_mat(g.d)
        while not np.array_equal(acc, ident):
            acc = (acc @ m) % p
            n += 1
        rep_orders[i] = n
    exponent = 1
    for n in rep_orders:
        exponent = lcm(exponent, int(n))
    cc = ConjClasses(
        group=g,
        n_classes=k,
        class_of=class_of,
        sizes=sizes,
        rep_ids=rep_ids,
        centralizer_orders=centralizers,
        inv_class=inv_class,
        rep_orders=rep_orders,
        exponent=exponent,
    )
    handle.classes = cc
    return cc


# ---------------------------------------------------------------------------
# subgroups, homomorphisms, fiber products


@dataclass
class Hom:
    """Group homomorphism given by a per-element image table."""

    source: GroupHandle
    target: GroupHandle
    image_ids: np.ndarray  # (N_source,) target element ids

    def kernel_ids(self) -> np.ndarray:
        return np.flatnonzero(self.image_ids == 0)

    def image_size(self) -> int:
        return len(np.unique(self.image_ids))

    def verify(self, seed: int = 11) -> None:
        """Check multiplicativity (exhaustive for small sources) and the
        order relation |source| = |kernel| * |image|."""
        s, t = self.source, self.target
        n = s.order
        if n * n <= _EXHAUSTIVE_PAIRS:
            ii = np.repeat(np.arange(n), n)
            jj = np.tile(np.arange(n), n)
        else:
            rng = np.random.default_rng(seed)
            ii = rng.integers(0, n, size=_SAMPLE_PAIRS)
            jj = rng.integers(0, n, size=_SAMPLE_PAIRS)
        prods = bmul(s.elems[ii], s.elems[jj], s.p)
        pid = s.lookup(bkeys(prods, s.p))
        timg = bmul(
            t.elems[self.image_ids[ii]], t.elems[self.image_ids[jj]], t.p
        )
        lhs = self.image_ids[pid]
        rhs = t.lookup(bkeys(timg, t.p))
        if not np.array_equal(lhs, rhs):
            raise GroupError("homomorphism property failed")
        if len(self.kernel_ids()) * self.image_size() != n:
            raise GroupError("|source| != |kernel| * |image|")


def subgroup(
    handle: GroupHandle,
    member_ids: np.ndarray,
    name: str,
    blocks: tuple[int, ...] | None = None,
) -> tuple[GroupHandle, Hom]:
    """Subgroup from an explicit id set; returns a new handle plus the embedding.

    The id set must contain the identity and be closed (verified: inverses
    exhaustively, products exhaustively for small subgroups, sampled above).
    """
    member_ids = np.unique(np.asarray(member_ids))
    if 0 not in member_ids:
        raise GroupError("subgroup must contain the identity")
    sub_elems = handle.elems[member_ids]
    sub = GroupHandle(
        handle.field,
        handle.d,
        sub_elems,
        handle.keys[member_ids],
        [],
        name,
        blocks=blocks if blocks is not None else handle.blocks,
    )
    if handle.order % sub.order != 0:
        raise GroupError(f"{name}: order {sub.order} does not divide {handle.order}")
    inv_ids = handle.inverse_perm()[member_ids]
    if not np.all(np.isin(inv_ids, member_ids)):
        raise GroupError(f"{name}: not closed under inverse")
    _verify_closure(sub)
    embed = Hom(source=sub, target=handle, image_ids=member_ids)
    return sub, embed


def subgroup_where(
    handle: GroupHandle, predicate, name: str, blocks=None
) -> tuple[GroupHandle, Hom]:
    """Subgroup cut out by a vectorized predicate on the element array."""
    mask = predicate(handle.elems)
    return subgroup(handle, np.flatnonzero(mask), name, blocks=blocks)


def fiber_product_det(a: GroupHandle, b: GroupHandle, name: str) -> GroupHandle:
    """Pairs (x, y) with det x = det y, as block-diagonal matrices.

    Element order is lexicographic in (id_a, id_b), so the identity pair
    comes first and the ordering is deterministic.
    """
    if a.field is not b.field and a.field.q != b.field.q:
        raise GroupError("fiber product over mismatched fields")
    p = a.p
    det_a = bdet(a.elems, p)
    det_b = bdet(b.elems, p)
    parts = []
    for ia in range(a.order):
        jb = np.flatnonzero(det_b == det_a[ia])
        left = np.repeat(a.elems[ia][None], len(jb), axis=0)
        parts.append(block_diag2(left, b.elems[jb]))
    elems = np.concatenate(parts)
    handle = GroupHandle(
        a.field,
        a.d + b.d,
        elems,
        bkeys(elems, p),
        [],
        name,
        blocks=(a.d, b.d),
    )
    _verify_closure(handle)
    return handle

"""Exact class-function algebra over Z/l and irreducible tables via the
Dixon-Schneider class-algebra method.

All character values live in Z/l for a campaign prime l = 1 (mod e) with
e the group exponent (so GF(l) contains the needed roots of unity) and
l > 2|G| (so degrees and multiplicities lift uniquely from the symmetric
residue range).  Nothing is ever a complex float.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import lcm

import numpy as np
import sympy

from .groups import ConjClasses, GroupHandle, bkeys, find_generators

__all__ = [
    "ModulusSpec",
    "ClassFunction",
    "CharacterTable",
    "DecompositionError",
    "SplitFailure",
    "pick_modulus",
    "joint_modulus",
    "dixon_table",
    "inner_product",
    "decompose",
    "central_values",
    "whittaker_multiplicity",
]


class DecompositionError(RuntimeError):
    pass


class SplitFailure(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# modulus


@dataclass(frozen=True)
class ModulusSpec:
    """Prime l = 1 mod e with l > 2*max|G|, plus a fixed z of order e."""

    ell: int
    e: int
    z: int

    def __post_init__(self):
        assert sympy.isprime(self.ell)
        assert (self.ell - 1) % self.e == 0
        assert pow(self.z, self.e, self.ell) == 1
        for p in sympy.primefactors(self.e):
            assert pow(self.z, self.e // p, self.ell) != 1, "z has wrong order"

    def root_of_unity(self, n: int) -> int:
        """Fixed primitive n-th root of unity (requires n | e)."""
        if self.e % n != 0:
            raise ValueError(f"{n} does not divide e = {self.e}")
        return pow(self.z, self.e // n, self.ell)

    def zeta_pow(self, n: int, j: int) -> int:
        return pow(self.root_of_unity(n), j % n, self.ell)

    def lift(self, x: int) -> int:
        """Symmetric lift of a residue into (-l/2, l/2)."""
        x %= self.ell
        return x if x <= self.ell // 2 else x - self.ell

    def inv(self, x: int) -> int:
        return pow(int(x), -1, self.ell)


def _primitive_root(ell: int) -> int:
    fac = sympy.primefactors(ell - 1)
    g = 2
    while True:
        if all(pow(g, (ell - 1) // f, ell) != 1 for f in fac):
            return g
        g += 1


def pick_modulus(exponent: int, group_order: int) -> ModulusSpec:
    """Smallest prime l = 1 (mod exponent) with l > 2*group_order."""
    e = exponent
    k = max(1, (2 * group_order) // e)
    while True:
        ell = e * k + 1
        if ell > 2 * group_order and sympy.isprime(ell):
            break
        k += 1
    z = pow(_primitive_root(ell), (ell - 1) // e, ell)
    return ModulusSpec(ell=ell, e=e, z=z)


def joint_modulus(exponents: list[int], group_orders: list[int]) -> ModulusSpec:
    """One modulus valid for several groups at once (campaign-wide prime)."""
    return pick_modulus(lcm(*exponents), max(group_orders))


# ---------------------------------------------------------------------------
# class functions


@dataclass
class ClassFunction:
    """A class function as one Z/l residue per conjugacy class."""

    group: GroupHandle
    cls: ConjClasses
    mod: ModulusSpec
    values: np.ndarray  # (K,) int64 residues

    def degree(self) -> int:
        d = self.mod.lift(int(self.values[0]))
        return d

    def conj(self) -> "ClassFunction":
        """Complex conjugate: values at inverse classes."""
        return self._new(self.values[self.cls.inv_class])

    def _new(self, values: np.ndarray) -> "ClassFunction":
        return ClassFunction(self.group, self.cls, self.mod, values % self.mod.ell)

    def __add__(self, other: "ClassFunction") -> "ClassFunction":
        return self._new(self.values + other.values)

    def __sub__(self, other: "ClassFunction") -> "ClassFunction":
        return self._new(self.values - other.values)

    def scale(self, n: int) -> "ClassFunction":
        return self._new(self.values * (n % self.mod.ell))

    def pointwise(self, other: "ClassFunction") -> "ClassFunction":
        """Tensor product of class functions (pointwise multiplication)."""
        return self._new(self.values * other.values)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ClassFunction)
            and self.group is other.group
            and np.array_equal(self.values, other.values)
        )

    def is_zero(self) -> bool:
        return not self.values.any()

    def value_at_element(self, element_id: int) -> int:
        return int(self.values[self.cls.class_of[element_id]])


def class_function(group, cls, mod, values) -> ClassFunction:
    return ClassFunction(group, cls, mod, np.asarray(values, dtype=np.int64) % mod.ell)


def trivial_class_function(group, cls, mod) -> ClassFunction:
    return class_function(group, cls, mod, np.ones(cls.n_classes, dtype=np.int64))


def inner_product(f: ClassFunction, g: ClassFunction) -> int:
    """<f, g> = |G|^-1 sum_i |C_i| f(C_i) g(C_i^-1), lifted to an integer.

    For genuine characters the lift is the actual multiplicity; the class
    sum implements conjugation of g through the inverse-class permutation.
    """
    assert f.group is g.group and f.mod is g.mod
    mod = f.mod
    sizes = f.cls.sizes % mod.ell
    tot = int(np.sum(sizes * f.values % mod.ell * g.values[g.cls.inv_class] % mod.ell) % mod.ell)
    res = tot * mod.inv(f.group.order % mod.ell) % mod.ell
    return mod.lift(res)


# ---------------------------------------------------------------------------
# polynomial arithmetic mod l (for eigenvalue extraction)


def _trim(a: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(a)
    return a[: nz[-1] + 1] if len(nz) else a[:1] * 0


def _pmod(a: np.ndarray, f: np.ndarray, ell: int) -> np.ndarray:
    a = _trim(a % ell)
    df = len(f) - 1
    finv = pow(int(f[-1]), -1, ell)
    while len(a) - 1 >= df and a.any():
        shift = len(a) - 1 - df
        c = a[-1] * finv % ell
        a[shift:] = (a[shift:] - c * f) % ell
        a = _trim(a)
    return a


def _pmulmod(a, b, f, ell):
    return _pmod(np.convolve(a, b) % ell, f, ell)


def _pgcd(a, b, ell):
    a, b = _trim(a % ell), _trim(b % ell)
    while b.any():
        a, b = b, _pmod(a, b, ell)
    if a.any():
        a = a * pow(int(a[-1]), -1, ell) % ell
    return a


def _pquo(a, b, ell):
    a = _trim(a % ell).copy()
    b = _trim(b % ell)
    db = len(b) - 1
    binv = pow(int(b[-1]), -1, ell)
    q = np.zeros(max(len(a) - db, 1), dtype=np.int64)
    while len(a) - 1 >= db and a.any():
        shift = len(a) - 1 - db
        c = a[-1] * binv % ell
        q[shift] = c
        a[shift:] = (a[shift:] - c * b) % ell
        a = _trim(a)
    return _trim(q)


def _ppowmod(base, n, f, ell):
    r = np.array([1], dtype=np.int64)
    b = _pmod(base.copy(), f, ell)
    while n:
        if n & 1:
            r = _pmulmod(r, b, f, ell)
        b = _pmulmod(b, b, f, ell)
        n >>= 1
    return r


def poly_roots(coeffs: np.ndarray, ell: int) -> list[int]:
    """All roots in GF(l) of a polynomial, deterministically ordered."""
    f = _trim(np.asarray(coeffs, dtype=np.int64) % ell)
    if len(f) <= 1:
        return []
    f = f * pow(int(f[-1]), -1, ell) % ell
    deriv = _trim(f[1:] * np.arange(1, len(f)) % ell)
    sqfree = _pquo(f, _pgcd(f, deriv, ell), ell) if deriv.any() else f
    x = np.array([0, 1], dtype=np.int64)
    lin = _ppowmod(x, ell, sqfree, ell)  # x^l mod f
    if len(lin) < 2:
        lin = np.concatenate([lin, np.zeros(2 - len(lin), dtype=np.int64)])
    lin[1] = (lin[1] - 1) % ell  # x^l - x
    g = _pgcd(lin, sqfree, ell)
    roots: list[int] = []
    stack = [g]
    while stack:
        h = _trim(stack.pop())
        if len(h) <= 1:
            continue
        if len(h) == 2:
            roots.append(int((-h[0]) * pow(int(h[1]), -1, ell) % ell))
            continue
        d = len(h) - 1
        for c in range(ell):
            # (x + c)^((l-1)/2) - 1 splits the product of linear factors
            w = _ppowmod(np.array([c, 1], dtype=np.int64), (ell - 1) // 2, h, ell)
            w[0] = (w[0] - 1) % ell
            u = _pgcd(w, h, ell)
            if 0 < len(u) - 1 < d:
                stack.append(u)
                stack.append(_pquo(h, u, ell))
                break
        else:  # pragma: no cover
            raise SplitFailure("equal-degree splitting failed")
    return sorted(roots)


def charpoly_mod(mat: np.ndarray, ell: int) -> np.ndarray:
    """Characteristic polynomial mod l via Hessenberg reduction."""
    h = mat.astype(np.int64) % ell
    n = h.shape[0]
    for j in range(n - 2):
        col = h[j + 1 :, j]
        nz = np.flatnonzero(col)
        if len(nz) == 0:
            continue
        piv = j + 1 + int(nz[0])
        if piv != j + 1:
            h[[j + 1, piv], :] = h[[piv, j + 1], :]
            h[:, [j + 1, piv]] = h[:, [piv, j + 1]]
        inv = pow(int(h[j + 1, j]), -1, ell)
        factors = h[j + 2 :, j] * inv % ell
        h[j + 2 :, :] = (h[j + 2 :, :] - factors[:, None] * h[j + 1, :]) % ell
        h[:, j + 1] = (h[:, j + 1] + h[:, j + 2 :] @ factors) % ell
    # recurrence on leading principal Hessenberg blocks
    polys = [np.array([1], dtype=np.int64)]
    for k in range(1, n + 1):
        # (x - h[k-1,k-1]) * p_{k-1}
        prev = polys[k - 1]
        pk = np.zeros(k + 1, dtype=np.int64)
        pk[1:] += prev
        pk[:-1] -= h[k - 1, k - 1] * prev % ell
        pk %= ell
        run = 1
        for i in range(k - 2, -1, -1):
            run = run * h[i + 1, i] % ell
            coef = h[i, k - 1] * run % ell
            if coef:
                pk[: i + 1] = (pk[: i + 1] - coef * polys[i]) % ell
        polys.append(pk % ell)
    return polys[n]


# ---------------------------------------------------------------------------
# linear algebra mod l


def _rref(mat: np.ndarray, ell: int) -> tuple[np.ndarray, list[int]]:
    a = mat.astype(np.int64) % ell
    m, n = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(n):
        nz = np.flatnonzero(a[r:, c])
        if len(nz) == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            a[[r, piv], :] = a[[piv, r], :]
        a[r, :] = a[r, :] * pow(int(a[r, c]), -1, ell) % ell
        others = np.flatnonzero(a[:, c])
        others = others[others != r]
        if len(others):
            a[others, :] = (a[others, :] - a[others, c][:, None] * a[r, :]) % ell
        pivots.append(c)
        r += 1
        if r == m:
            break
    return a, pivots


def nullspace_mod(mat: np.ndarray, ell: int) -> np.ndarray:
    """Columns spanning the kernel of mat over GF(l)."""
    m, n = mat.shape
    rr, pivots = _rref(mat, ell)
    free = [c for c in range(n) if c not in pivots]
    basis = np.zeros((n, len(free)), dtype=np.int64)
    for idx, c in enumerate(free):
        basis[c, idx] = 1
        for r, pc in enumerate(pivots):
            basis[pc, idx] = (-rr[r, c]) % ell
    return basis


def _col_echelon(basis: np.ndarray, ell: int) -> tuple[np.ndarray, list[int]]:
    """Column-reduced echelon basis; returns (basis, pivot row indices) with
    basis[pivots, :] the identity."""
    rr, pivots = _rref(basis.T, ell)
    rr = rr[: len(pivots)]
    return rr.T % ell, pivots


# ---------------------------------------------------------------------------
# Dixon-Schneider


@dataclass
class CharacterTable:
    """Irreducible characters as rows of Z/l residues, one column per class."""

    group: GroupHandle
    cls: ConjClasses
    mod: ModulusSpec
    values: np.ndarray  # (K, K) int64
    degrees: np.ndarray  # (K,) int64 integer degrees

    def __post_init__(self):
        self._row_index = {self.values[i].tobytes(): i for i in range(len(self.values))}

    def row(self, i: int) -> ClassFunction:
        return ClassFunction(self.group, self.cls, self.mod, self.values[i].copy())

    def find(self, f: ClassFunction) -> int:
        """Index of an irreducible equal to f, or -1."""
        return self._row_index.get((f.values % self.mod.ell).tobytes(), -1)

    @property
    def n_irr(self) -> int:
        return len(self.values)


def _class_matrix(g: GroupHandle, cc: ConjClasses, i: int) -> np.ndarray:
    """Structure constants a[j, k] = #{(x, y) in C_i x C_j : xy = z_k}."""
    k = cc.n_classes
    ids_i = np.flatnonzero(cc.class_of == i)
    x_inv = g.elems[g.inverse_perm()[ids_i]]
    reps = g.elems[cc.rep_ids]
    a = np.zeros(k * k, dtype=np.int64)
    col = np.broadcast_to(np.arange(k), (1, k))
    chunk = max(1, 4_000_000 // (k * g.d * g.d))
    for lo in range(0, len(ids_i), chunk):
        xs = x_inv[lo : lo + chunk]
        prods = np.einsum("nij,kjl->nkil", xs, reps) % g.p
        keys = bkeys(prods.reshape(-1, g.d, g.d), g.p)
        cls = cc.class_of[g.lookup(keys)].reshape(len(xs), k).astype(np.int64)
        flat = cls * k + np.broadcast_to(np.arange(k), cls.shape)
        a += np.bincount(flat.ravel(), minlength=k * k)
    return a.reshape(k, k)


def dixon_table(
    g: GroupHandle,
    cc: ConjClasses | None = None,
    mod: ModulusSpec | None = None,
    max_attempts: int = 3,
) -> CharacterTable:
    """Irreducible character table over Z/l.

    Common eigenvectors of the class-algebra matrices are the central
    character vectors w_k = |C_k| chi(g_k) / chi(1); eigenspaces are split
    matrix by matrix (deterministic order: ascending class size) until all
    are one-dimensional, then degrees are recovered from the second
    orthogonality relation and a square root mod l.
    """
    from .groups import conjugacy_classes

    if cc is None:
        cc = conjugacy_classes(g)
    if mod is None:
        mod = pick_modulus(cc.exponent, g.order)
    last_err: Exception | None = None
    for _ in range(max_attempts):
        try:
            return _dixon_attempt(g, cc, mod)
        except SplitFailure as err:  # pragma: no cover - retry path
            last_err = err
            mod = pick_modulus(cc.exponent, (mod.ell + 1) // 2)
    raise last_err  # pragma: no cover


def _dixon_attempt(g: GroupHandle, cc: ConjClasses, mod: ModulusSpec) -> CharacterTable:
    ell = mod.ell
    k = cc.n_classes
    bases = [_col_echelon(np.eye(k, dtype=np.int64), ell)]
    order = sorted(range(1, k), key=lambda i: (int(cc.sizes[i]), i))
    for i in order:
        if all(b.shape[1] == 1 for b, _ in bases):
            break
        a = _class_matrix(g, cc, i) % ell
        new_bases = []
        for basis, pivots in bases:
            dim = basis.shape[1]
            if dim == 1:
                new_bases.append((basis, pivots))
                continue
            ab = a @ basis % ell
            rest = ab[pivots, :]  # coords since basis[pivots] = I
            if not np.array_equal(basis @ rest % ell, ab):
                raise SplitFailure("subspace not invariant")
            for lam in poly_roots(charpoly_mod(rest, ell), ell):
                ker = nullspace_mod((rest - lam * np.eye(dim, dtype=np.int64)) % ell, ell)
                if ker.shape[1] == 0:
                    continue
                new_bases.append(_col_echelon(basis @ ker % ell, ell))
        if sum(b.shape[1] for b, _ in new_bases) != k:
            raise SplitFailure("eigenspace dimensions do not add up")
        bases = new_bases
    if any(b.shape[1] != 1 for b, _ in bases):
        raise SplitFailure("common eigenspaces not fully split")

    inv_sizes = np.array([mod.inv(int(s) % ell) for s in cc.sizes], dtype=np.int64)
    order_inv = mod.inv(g.order % ell)
    rows = []
    degrees = []
    for basis, _ in bases:
        w = basis[:, 0] % ell
        if w[0] == 0:
            raise SplitFailure("eigenvector vanishes at the identity class")
        w = w * mod.inv(int(w[0])) % ell
        denom = int(np.sum(w * w[cc.inv_class] % ell * inv_sizes[cc.inv_class] % ell) % ell)
        if denom == 0:
            raise SplitFailure("degenerate norm in degree recovery")
        d2 = g.order % ell * mod.inv(denom) % ell
        root = sympy.ntheory.sqrt_mod(d2, ell)
        if root is None:
            raise SplitFailure("degree is not a square mod l")
        d = int(root) if int(root) <= ell // 2 else ell - int(root)
        if d * d % ell != d2 or d <= 0 or d * d > g.order:
            raise SplitFailure("degree lift out of range")
        chi = w * d % ell * inv_sizes % ell
        rows.append(chi)
        degrees.append(d)
    idx = sorted(range(k), key=lambda r: (degrees[r], tuple(rows[r])))
    values = np.array([rows[r] for r in idx], dtype=np.int64)
    degs = np.array([degrees[r] for r in idx], dtype=np.int64)

    table = CharacterTable(group=g, cls=cc, mod=mod, values=values, degrees=degs)
    _validate_table(table)
    return table


def _validate_table(t: CharacterTable) -> None:
    ell = t.mod.ell
    g = t.group
    k = t.cls.n_classes
    if t.n_irr != k:
        raise SplitFailure("irreducible count != class count")
    if int(np.sum(t.degrees**2)) != g.order:
        raise SplitFailure("sum of squared degrees != |G|")
    weighted = t.values * (t.cls.sizes % ell) % ell
    gram = weighted @ t.values[:, t.cls.inv_class].T % ell
    expect = np.eye(k, dtype=np.int64) * (g.order % ell)
    if not np.array_equal(gram % ell, expect % ell):
        raise SplitFailure("row orthogonality failed")
    if any(int(d) >= ell / 2 for d in t.degrees):
        raise SplitFailure("degree exceeds lift range")


# ---------------------------------------------------------------------------
# decomposition and derived quantities


def decompose(f: ClassFunction, table: CharacterTable) -> np.ndarray:
    """Multiplicities of f against the irreducible table; exact in Z/l.

    Raises DecompositionError if f is not a genuine character (negative or
    implausibly large lifts, or inexact reconstruction).
    """
    mod = table.mod
    mults = np.array([inner_product(f, table.row(i)) for i in range(table.n_irr)])
    if np.any(mults < 0):
        raise DecompositionError("negative multiplicity: input is not a character")
    deg = f.degree()
    if int(np.sum(mults * table.degrees)) != deg:
        raise DecompositionError("degree mismatch in decomposition")
    recon = np.sum(mults[:, None] * table.values % mod.ell, axis=0) % mod.ell
    if not np.array_equal(recon, f.values % mod.ell):
        raise DecompositionError("reconstruction mismatch: not a class character")
    return mults


def central_values(chi: ClassFunction) -> tuple[np.ndarray, list[int]]:
    """Center element ids and the residues omega(z) = chi(z)/chi(1).

    Requires chi irreducible (checked via <chi, chi> = 1).
    """
    if inner_product(chi, chi) != 1:
        raise DecompositionError("central character of a non-irreducible input")
    g = chi.group
    gens = find_generators(g)
    mask = np.ones(g.order, dtype=bool)
    for gi in gens:
        m = g.elems[gi]
        left = np.einsum("ij,njk->nik", m, g.elems) % g.p
        right = np.einsum("nij,jk->nik", g.elems, m) % g.p
        mask &= np.all(left == right, axis=(1, 2))
    center = np.flatnonzero(mask)
    dinv = chi.mod.inv(int(chi.values[0]))
    ratios = [int(chi.values[chi.cls.class_of[z]]) * dinv % chi.mod.ell for z in center]
    return center, ratios


def whittaker_multiplicity(
    chi: ClassFunction,
    u_ids: np.ndarray,
    psi_exponents: np.ndarray,
    p: int,
) -> int:
    """<chi, Ind_U^G psi> via Frobenius: average of chi * conj(psi) over U."""
    mod = chi.mod
    zp = mod.root_of_unity(p)
    zpows = np.array([pow(zp, j, mod.ell) for j in range(p)], dtype=np.int64)
    vals = chi.values[chi.cls.class_of[u_ids]]
    conj = zpows[(-psi_exponents) % p]
    tot = int(np.sum(vals * conj % mod.ell) % mod.ell)
    res = tot * mod.inv(len(u_ids) % mod.ell) % mod.ell
    m = mod.lift(res)
    return m

"""Finite-type kernels and the refinement / coarsening algebra.

A kernel here lives on a finite type space ``{0, ..., m-1}`` with type masses
``mu`` and a symmetric rate matrix ``kappa``; a particle of type ``x`` in the
associated Poisson branching process has ``Poisson(kappa[x][y] * mu[y])``
children of type ``y``.

Entries given as ints, Fractions or ``"p/q"`` strings keep the kernel in exact
rational mode, in which every refinement identity is checked with ``==``.  Any
float entry switches the whole kernel to float mode (tolerance ``1e-9``).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._numbers import DEFAULT_TOL, close, format_number, parse_number, residual, unify
from .errors import DomainError, InconsistentRefinementError, RefinementError

TypeMap = tuple
"""A type map is a tuple ``tau`` with ``tau[i]`` the image of source type ``i``."""


@dataclass(frozen=True)
class FiniteKernel:
    mu: tuple
    kappa: tuple
    names: tuple | None = None

    def __post_init__(self):
        mu = [parse_number(v) for v in self.mu]
        kappa = [[parse_number(v) for v in row] for row in self.kappa]
        m = len(mu)
        if m == 0:
            raise DomainError("a kernel needs at least one type")
        if len(kappa) != m or any(len(row) != m for row in kappa):
            raise DomainError(f"kappa must be {m}x{m}")
        flat = unify(mu + [v for row in kappa for v in row])
        mu, kappa = flat[:m], [flat[m + i * m: m + (i + 1) * m] for i in range(m)]
        if any(v < 0 for v in mu):
            raise DomainError("type masses must be nonnegative")
        for i in range(m):
            for j in range(m):
                if kappa[i][j] < 0:
                    raise DomainError("kernel rates must be nonnegative")
                if not close(kappa[i][j], kappa[j][i], 1e-12):
                    raise DomainError(f"kappa is not symmetric at ({i}, {j})")
        keep = [i for i in range(m) if mu[i] > 0]
        if not keep:
            raise DomainError("total type mass is zero")
        total = sum(mu[i] for i in keep)
        names = self.names
        if names is not None:
            if len(names) != m:
                raise DomainError("names must have one entry per type")
            names = tuple(names[i] for i in keep)
        object.__setattr__(self, "mu", tuple(mu[i] / total for i in keep))
        object.__setattr__(self, "kappa", tuple(tuple(kappa[i][j] for j in keep) for i in keep))
        object.__setattr__(self, "names", names)

    @property
    def type_count(self) -> int:
        return len(self.mu)

    @property
    def exact(self) -> bool:
        return isinstance(self.mu[0], Fraction)

    def rate(self, x: int, y: int):
        """Expected number of type-``y`` children of a type-``x`` particle."""
        return self.kappa[x][y] * self.mu[y]

    def rate_matrix(self) -> np.ndarray:
        mu = np.array([float(v) for v in self.mu])
        return self.kappa_array() * mu[None, :]

    def kappa_array(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.kappa])

    def mu_array(self) -> np.ndarray:
        return np.array([float(v) for v in self.mu])

    def to_dict(self) -> dict:
        d = {
            "mu": [format_number(v) for v in self.mu],
            "kappa": [[format_number(v) for v in row] for row in self.kappa],
        }
        if self.names is not None:
            d["names"] = list(self.names)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "FiniteKernel":
        names = d.get("names")
        return cls(tuple(d["mu"]), tuple(tuple(r) for r in d["kappa"]),
                   tuple(names) if names is not None else None)

    @classmethod
    def from_json(cls, text: str) -> "FiniteKernel":
        return cls.from_dict(json.loads(text))


def constant_kernel(c) -> FiniteKernel:
    c = parse_number(c)
    if c < 0:
        raise DomainError("rate must be nonnegative")
    one = Fraction(1) if isinstance(c, Fraction) else 1.0
    return FiniteKernel((one,), ((c,),))


def chessboard_kernel(a, b) -> FiniteKernel:
    """Two equal-mass types, rate ``a`` within a type and ``b`` across."""
    a, b = parse_number(a), parse_number(b)
    if a < 0 or b < 0:
        raise DomainError("chessboard rates must be nonnegative")
    half = Fraction(1, 2) if isinstance(a, Fraction) and isinstance(b, Fraction) else 0.5
    return FiniteKernel((half, half), ((a, b), (b, a)))


def expected_degree(k: FiniteKernel, x: int):
    if not 0 <= x < k.type_count:
        raise IndexError(f"type {x} out of range for a {k.type_count}-type kernel")
    return sum(k.kappa[x][y] * k.mu[y] for y in range(k.type_count))


def operator_norm(k: FiniteKernel) -> float:
    """Norm of the integral operator of ``k`` on L^2(mu)."""
    s = np.sqrt(k.mu_array())
    sym = s[:, None] * k.kappa_array() * s[None, :]
    return float(np.max(np.abs(np.linalg.eigvalsh(sym))))


@dataclass
class RefinementReport:
    """Outcome of :func:`verify_refinement`; truthy iff both identities hold."""

    ok: bool
    mass_residuals: list = field(default_factory=list)
    rate_residuals: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok

    @property
    def max_residual(self) -> float:
        vals = list(self.mass_residuals) + [v for row in self.rate_residuals for v in row]
        return float(max(vals)) if vals else 0.0


def _check_map(tau: Sequence[int], n_src: int, n_dst: int) -> tuple:
    tau = tuple(int(t) for t in tau)
    if len(tau) != n_src:
        raise DomainError(f"type map has length {len(tau)}, expected {n_src}")
    if any(not 0 <= t < n_dst for t in tau):
        raise DomainError("type map image out of range")
    return tau


def verify_refinement(k1: FiniteKernel, k2: FiniteKernel, tau: Sequence[int],
                      tol: float = DEFAULT_TOL) -> RefinementReport:
    """Check that ``tau`` witnesses ``k1`` refining ``k2``.

    (a) ``tau`` pushes ``mu1`` forward to ``mu2``; (b) for each source type ``x``
    and target type ``j`` the type-``x`` offspring intensity lumped over
    ``tau^{-1}(j)`` equals ``kappa2[tau(x)][j] * mu2[j]``.
    """
    tau = _check_map(tau, k1.type_count, k2.type_count)
    m2 = k2.type_count
    zero = Fraction(0) if k1.exact else 0.0
    pushed = [zero] * m2
    for i, t in enumerate(tau):
        pushed[t] += k1.mu[i]
    mass_res = [residual(pushed[j], k2.mu[j]) for j in range(m2)]
    ok = all(close(pushed[j], k2.mu[j], tol) for j in range(m2))
    rate_res = []
    for x in range(k1.type_count):
        lumped = [zero] * m2
        for y, t in enumerate(tau):
            lumped[t] += k1.kappa[x][y] * k1.mu[y]
        row = []
        for j in range(m2):
            target = k2.kappa[tau[x]][j] * k2.mu[j]
            row.append(residual(lumped[j], target))
            ok = ok and close(lumped[j], target, tol)
        rate_res.append(row)
    return RefinementReport(ok, mass_res, rate_res)


def common_refinement(k1: FiniteKernel, k2: FiniteKernel, kc: FiniteKernel,
                      tau1: Sequence[int], tau2: Sequence[int], tol: float = DEFAULT_TOL):
    """Build a kernel refining both ``k1`` and ``k2`` from their common coarsening ``kc``.

    Types of the result are the pairs ``(i, j)`` with ``tau1[i] == tau2[j]``, in
    lexicographic order.  Returns ``(kr, proj1, proj2)``.
    """
    if not verify_refinement(k1, kc, tau1, tol):
        raise RefinementError("tau1 does not witness k1 refining kc")
    if not verify_refinement(k2, kc, tau2, tol):
        raise RefinementError("tau2 does not witness k2 refining kc")
    tau1, tau2 = tuple(tau1), tuple(tau2)
    pairs = [(i, j) for i in range(k1.type_count) for j in range(k2.type_count)
             if tau1[i] == tau2[j]]
    mu = [k1.mu[i] * k2.mu[j] / kc.mu[tau1[i]] for i, j in pairs]
    zero = Fraction(0) if (k1.exact and k2.exact and kc.exact) else 0.0
    kappa = []
    for i, j in pairs:
        row = []
        for k, l in pairs:
            den = kc.kappa[tau1[i]][tau1[k]]
            row.append(k1.kappa[i][k] * k2.kappa[j][l] / den if den != 0 else zero)
        kappa.append(row)
    names = tuple(f"({i},{j})" for i, j in pairs)
    kr = FiniteKernel(tuple(mu), tuple(tuple(r) for r in kappa), names)
    return kr, tuple(i for i, _ in pairs), tuple(j for _, j in pairs)


def lumped_kernel(k: FiniteKernel, tau: Sequence[int], tol: float = DEFAULT_TOL) -> FiniteKernel:
    """The quotient of ``k`` along ``tau`` (image types ``0..max(tau)``).

    Raises :class:`RefinementError` if the quotient is not a genuine coarsening,
    i.e. if lumped offspring intensities differ inside a fibre.
    """
    tau = tuple(int(t) for t in tau)
    if len(tau) != k.type_count:
        raise DomainError("type map length does not match the kernel")
    m = max(tau) + 1
    if set(tau) != set(range(m)):
        raise DomainError("type map must be onto 0..max(tau)")
    zero = Fraction(0) if k.exact else 0.0
    mass = [zero] * m
    for i, t in enumerate(tau):
        mass[t] += k.mu[i]
    flow = [[zero] * m for _ in range(m)]
    for x in range(k.type_count):
        for y in range(k.type_count):
            flow[tau[x]][tau[y]] += k.mu[x] * k.kappa[x][y] * k.mu[y]
    kappa = [[flow[a][b] / (mass[a] * mass[b]) for b in range(m)] for a in range(m)]
    kq = FiniteKernel(tuple(mass), tuple(tuple(r) for r in kappa))
    if not verify_refinement(k, kq, tau, tol):
        raise RefinementError("type map is not lumpable for this kernel")
    return kq


def common_coarsening(kr: FiniteKernel, tau1: Sequence[int], tau2: Sequence[int],
                      tol: float = DEFAULT_TOL):
    """Coarsen a common refinement to a kernel refined by both marginals.

    ``tau1`` / ``tau2`` send each type of ``kr`` to a type of the two implied
    marginal kernels ``k1 = lumped_kernel(kr, tau1)`` and ``k2``.  The result
    types are the connected components of the bipartite graph on ``S1 ⊔ S2``
    whose edges are the occurring pairs ``(tau1[e], tau2[e])``; components are
    numbered by their smallest ``S1`` type.  Returns ``(kc, sigma1, sigma2)``
    with ``sigma_i`` sending ``S_i`` types to components.
    """
    tau1 = tuple(int(t) for t in tau1)
    tau2 = tuple(int(t) for t in tau2)
    if len(tau1) != kr.type_count or len(tau2) != kr.type_count:
        raise DomainError("type maps must cover every type of kr")
    n1, n2 = max(tau1) + 1, max(tau2) + 1
    if set(tau1) != set(range(n1)) or set(tau2) != set(range(n2)):
        raise DomainError("type maps must be onto")

    # merge kr types sharing a pair, then check kr against both marginals
    pair_ids: dict = {}
    merge = []
    for e in range(kr.type_count):
        merge.append(pair_ids.setdefault((tau1[e], tau2[e]), len(pair_ids)))
    pairs = list(pair_ids)
    kp = lumped_kernel(kr, merge, tol)
    p1 = tuple(i for i, _ in pairs)
    p2 = tuple(j for _, j in pairs)
    lumped_kernel(kp, p1, tol)
    lumped_kernel(kp, p2, tol)

    parent = list(range(n1 + n2))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in pairs:
        ra, rb = find(i), find(n1 + j)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    roots = sorted({find(v) for v in range(n1 + n2)})
    comp_of_root = {r: c for c, r in enumerate(roots)}
    comp = [comp_of_root[find(v)] for v in range(n1 + n2)]
    edge_comp = [comp[i] for i, _ in pairs]
    m = len(roots)

    zero = Fraction(0) if kp.exact else 0.0
    mass = [zero] * m
    for e, c in enumerate(edge_comp):
        mass[c] += kp.mu[e]
    kappa = [[None] * m for _ in range(m)]
    for c in range(m):
        members = [e for e in range(len(pairs)) if edge_comp[e] == c]
        for c2 in range(m):
            lam = [sum((kp.kappa[e][f] * kp.mu[f] for f in range(len(pairs)) if edge_comp[f] == c2), zero)
                   for e in members]
            if any(not close(v, lam[0], tol) for v in lam):
                raise InconsistentRefinementError(
                    f"offspring intensity into component {c2} varies over component {c}")
            kappa[c][c2] = lam[0] / mass[c2]
    if not kp.exact:
        kappa = [[(kappa[a][b] + kappa[b][a]) / 2 for b in range(m)] for a in range(m)]
    kc = FiniteKernel(tuple(mass), tuple(tuple(r) for r in kappa))
    return kc, tuple(comp[:n1]), tuple(comp[n1:])


def _group(values: list, tol: float) -> list[int]:
    """Label equal signatures with consecutive ids in order of first appearance."""
    reps: list = []
    labels = []
    for v in values:
        for idx, r in enumerate(reps):
            if all(close(a, b, tol) for a, b in zip(v, r)):
                labels.append(idx)
                break
        else:
            labels.append(len(reps))
            reps.append(v)
    return labels


def stable_partition(rows: Sequence[Sequence], weights: Sequence, tol: float = DEFAULT_TOL,
                     initial: Sequence | None = None) -> list[int]:
    """Coarsest partition stable under block-aggregated weighted row sums.

    Starting from ``initial`` (default: one block), blocks are split until every
    member ``x`` of a block has the same vector ``(sum_{y in B} rows[x][y]*weights[y])_B``.
    Block ids are assigned in order of first appearance, so the result is canonical.
    """
    m = len(rows)
    labels = _group([(v,) for v in initial], tol) if initial is not None else [0] * m
    while True:
        nb = max(labels) + 1
        zero = Fraction(0) if isinstance(weights[0], Fraction) else 0.0
        sigs = []
        for x in range(m):
            agg = [zero] * nb
            for y in range(m):
                agg[labels[y]] += rows[x][y] * weights[y]
            sigs.append((labels[x], *agg))
        new = _group(sigs, tol)
        if max(new) + 1 == nb:
            return new
        labels = new


def canonical_coarsening(k: FiniteKernel, tol: float = DEFAULT_TOL):
    """Coarsest kernel refined by ``k``; returns ``(kc, tau)``.

    Types are equivalent iff their offspring-intensity hierarchies agree at every
    level; computed by partition refinement, which stabilises within
    ``type_count`` rounds.
    """
    tau = stable_partition(k.kappa, k.mu, tol)
    return lumped_kernel(k, tau, tol), tuple(tau)


def kernels_isomorphic(k1: FiniteKernel, k2: FiniteKernel, tol: float = DEFAULT_TOL):
    """Find a type bijection preserving ``mu`` and ``kappa``; ``None`` if none exists."""
    m = k1.type_count
    if k2.type_count != m:
        return None

    def sig(k, x):
        return (k.mu[x], expected_degree(k, x))

    cand = [[y for y in range(m) if all(close(a, b, tol) for a, b in zip(sig(k1, x), sig(k2, y)))]
            for x in range(m)]
    order = sorted(range(m), key=lambda x: len(cand[x]))
    assign: dict = {}
    used: set = set()

    def extend(pos):
        if pos == m:
            return True
        x = order[pos]
        for y in cand[x]:
            if y in used:
                continue
            if not close(k1.kappa[x][x], k2.kappa[y][y], tol):
                continue
            if any(not close(k1.kappa[x][x2], k2.kappa[y][y2], tol) for x2, y2 in assign.items()):
                continue
            assign[x] = y
            used.add(y)
            if extend(pos + 1):
                return True
            del assign[x]
            used.discard(y)
        return False

    if extend(0):
        return tuple(assign[x] for x in range(m))
    return None


def pi_equal(k1: FiniteKernel, k2: FiniteKernel, tol: float = DEFAULT_TOL) -> bool:
    """Whether the two kernels generate the same typeless branching-process tree law."""
    c1, _ = canonical_coarsening(k1, tol)
    c2, _ = canonical_coarsening(k2, tol)
    return kernels_isomorphic(c1, c2, tol) is not None


def load_kernel(path) -> FiniteKernel:
    with open(path) as fh:
        return FiniteKernel.from_json(fh.read())

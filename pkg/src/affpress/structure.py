"""Structural analyzers for matrix tuples.

Common eigenvectors, invariant subspaces, irreducibility of exterior-power
actions, a bounded search for invariant finite unions (strong
irreducibility heuristic), simultaneous triangularization, block reduction
along an invariant subspace, and proximality witnesses.

Every negative verdict carries a witness that re-verifies by direct
multiplication; positive verdicts are exhaustive for exterior dimensions up
to 6 (d <= 4) except where explicitly degraded to UNKNOWN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import BudgetError, InputError
from .linalg import MatrixTuple, eigen_moduli, exterior_power, word_product
from .words import words_up_to_length

VERIFY_TOL = 1e-8
EIG_CLUSTER_GAP = 1e-7  # relative gap when grouping numerically multiple eigenvalues
_MATCH_TOL = 1e-6  # subspace matching during orbit closure


# ---------------------------------------------------------------------------
# Subspaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Subspace:
    """A proper nonzero subspace, stored as an orthonormal (d, m) basis."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim == 1:
            b = b[:, None]
        d, m = b.shape
        if not 1 <= m <= d - 1:
            raise InputError(f"subspace dimension {m} must be in 1..{d - 1}")
        gram = b.T @ b
        if np.max(np.abs(gram - np.eye(m))) > 1e-12:
            raise InputError("subspace basis columns must be orthonormal to 1e-12")
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    @classmethod
    def from_span(cls, vectors: np.ndarray) -> "Subspace":
        """Orthonormalize a spanning set (columns); rank-deficiency is dropped."""
        v = np.atleast_2d(np.asarray(vectors, dtype=float))
        if v.shape[0] < v.shape[1] and v.shape[0] == 1:
            v = v.T
        u, s, _ = np.linalg.svd(v, full_matrices=False)
        if s.size == 0 or s[0] == 0.0:
            raise InputError("cannot build a subspace from a zero span")
        rank = int(np.sum(s > max(v.shape) * np.finfo(float).eps * s[0] * 10))
        return cls(_canonical_columns(u[:, :rank]))


def _canonical_columns(b: np.ndarray) -> np.ndarray:
    """Fix column signs so the largest-|entry| coordinate is positive."""
    b = b.copy()
    for j in range(b.shape[1]):
        i = int(np.argmax(np.abs(b[:, j])))
        if b[i, j] < 0:
            b[:, j] = -b[:, j]
    return b


def invariance_residual(sub: Subspace, mats) -> float:
    """max_i ||(I - P P^T) A_i P||_2 / max(1, ||A_i||_2), P the orthonormal basis."""
    p = sub.basis
    comp = np.eye(p.shape[0]) - p @ p.T
    worst = 0.0
    for a in mats:
        num = np.linalg.norm(comp @ (a @ p), 2)
        den = max(1.0, np.linalg.norm(a, 2))
        worst = max(worst, num / den)
    return worst


def _nullspace(m: np.ndarray, rel_tol: float = EIG_CLUSTER_GAP) -> np.ndarray:
    """Orthonormal basis (cols) of the numerical null space."""
    u, s, vh = np.linalg.svd(m)
    if s.size == 0:
        return np.eye(m.shape[1])
    tau = rel_tol * max(1.0, s[0])
    mask = s <= tau
    rank = int(np.sum(~mask))
    return vh[rank:].T


def _complete_orthonormal(basis: np.ndarray) -> np.ndarray:
    """Extend orthonormal columns to a full orthogonal matrix, basis first."""
    d, m = basis.shape
    q, _ = np.linalg.qr(np.concatenate([basis, np.eye(d)], axis=1))
    q = q[:, :d]
    for j in range(m):
        if q[:, j] @ basis[:, j] < 0:
            q[:, j] = -q[:, j]
    return q


# ---------------------------------------------------------------------------
# Common eigenvectors
# ---------------------------------------------------------------------------


def _real_eig_clusters(a: np.ndarray) -> list[float]:
    """Cluster representatives of the numerically real eigenvalues."""
    scale = max(1.0, float(np.linalg.norm(a, 2)))
    vals = np.linalg.eigvals(a)
    real = sorted(float(v.real) for v in vals if abs(v.imag) <= 1e-8 * scale)
    clusters: list[list[float]] = []
    for v in real:
        if clusters and abs(v - clusters[-1][-1]) <= EIG_CLUSTER_GAP * max(1.0, abs(v)):
            clusters[-1].append(v)
        else:
            clusters.append([v])
    return [float(np.mean(c)) for c in clusters]


def _common_eig_rec(
    comp_mats: list[np.ndarray], lift: np.ndarray
) -> tuple[list[np.ndarray], bool]:
    """Candidate common eigenvectors by recursive eigenspace intersection.

    ``comp_mats`` are the remaining generators compressed to the subspace
    spanned by the orthonormal columns of ``lift``; returns ambient-space
    candidates plus a flag marking that a terminal eigenspace of dimension
    >= 2 was reached (a potential continuum of eigenlines, where returning
    basis representatives is the best a finite list can do).
    """
    m = lift.shape[1]
    if not comp_mats:
        return [lift[:, j] for j in range(m)], m >= 2
    a = comp_mats[0]
    out: list[np.ndarray] = []
    saw_continuum = False
    for lam in _real_eig_clusters(a):
        e = _nullspace(a - lam * np.eye(m))
        if e.shape[1] == 0:
            continue
        new_lift = lift @ e
        if len(comp_mats) == 1:
            if e.shape[1] >= 2:
                saw_continuum = True
            out.extend(new_lift[:, j] for j in range(new_lift.shape[1]))
        else:
            rest = [e.T @ b @ e for b in comp_mats[1:]]
            sub, flag = _common_eig_rec(rest, new_lift)
            out.extend(sub)
            saw_continuum = saw_continuum or flag
    return out, saw_continuum


def _verify_eigenline(v: np.ndarray, mats) -> bool:
    for a in mats:
        av = a @ v
        lam = float(v @ av)
        if np.linalg.norm(av - lam * v) > VERIFY_TOL * max(1.0, np.linalg.norm(a, 2)):
            return False
    return True


def _common_eigenlines(mats: list[np.ndarray]) -> tuple[list[np.ndarray], bool]:
    d = mats[0].shape[0]
    cands, flag = _common_eig_rec(list(mats), np.eye(d))
    lines: list[np.ndarray] = []
    for v in cands:
        nv = np.linalg.norm(v)
        if nv == 0.0:
            continue
        v = v / nv
        if not _verify_eigenline(v, mats):
            continue
        i = int(np.argmax(np.abs(v)))
        if v[i] < 0:
            v = -v
        if any(abs(float(v @ u)) > 1.0 - 1e-10 for u in lines):
            continue
        lines.append(v)
    lines.sort(key=lambda u: tuple(np.round(u, 9)))
    return lines, flag


def common_eigenvectors(t_or_mats) -> list[np.ndarray]:
    """All real lines fixed by every generator (unit vectors, deterministic order).

    Found by recursive eigenspace intersection: real eigenvalue clusters of
    the first generator, compression of the rest, recursion, then direct
    verification against every generator in the ambient space. If a whole
    subspace consists of common eigenvectors, orthonormal representatives
    are returned.
    """
    mats = _as_mat_list(t_or_mats)
    lines, _ = _common_eigenlines(mats)
    return lines


def _as_mat_list(t_or_mats) -> list[np.ndarray]:
    if isinstance(t_or_mats, MatrixTuple):
        return [np.asarray(a) for a in t_or_mats.mats]
    arr = np.asarray(t_or_mats, dtype=float)
    if arr.ndim == 2:
        arr = arr[None]
    return [arr[i] for i in range(arr.shape[0])]


# ---------------------------------------------------------------------------
# Invariant subspaces
# ---------------------------------------------------------------------------


def _wedge_map_matrix(omega: np.ndarray, d: int, k: int) -> np.ndarray:
    """Matrix of v -> v ^ omega from R^d to the (k+1)-vectors."""
    subsets_k = list(combinations(range(d), k))
    subsets_k1 = list(combinations(range(d), k + 1))
    index_k1 = {s: i for i, s in enumerate(subsets_k1)}
    w = np.zeros((len(subsets_k1), d))
    for j, js in enumerate(subsets_k):
        if omega[j] == 0.0:
            continue
        for i in range(d):
            if i in js:
                continue
            pos = sum(1 for x in js if x < i)
            target = tuple(sorted(js + (i,)))
            w[index_k1[target], i] += (-1.0) ** pos * omega[j]
    return w


def _decomposable_support(omega: np.ndarray, d: int, k: int) -> np.ndarray | None:
    """The k-dim subspace {v : v ^ omega = 0} when omega is decomposable, else None."""
    if k == d:
        return np.eye(d)
    w = _wedge_map_matrix(omega, d, k)
    null = _nullspace(w, rel_tol=1e-7)
    if null.shape[1] != k:
        return None
    return null


def _plucker_quadric(omega: np.ndarray) -> float:
    """omega ^ omega for d=4, k=2 in the lexicographic 2-subset basis."""
    return 2.0 * (
        omega[0] * omega[5] - omega[1] * omega[4] + omega[2] * omega[3]
    )


def _invariant_subspaces_of_mats(
    mats: list[np.ndarray], m: int, tol: float = VERIFY_TOL
) -> tuple[list[Subspace], bool]:
    """Verified m-dimensional common invariant subspaces of a matrix list.

    A real invariant m-subspace wedges to a real-eigenvalue common eigenline
    of the m-th compound matrices, so candidates come from common
    eigenvectors at compound level m, reconstructed through the kernel of
    v -> v ^ omega and verified directly. The flag marks possible continua.
    """
    d = mats[0].shape[0]
    if not 1 <= m <= d - 1:
        raise InputError(f"subspace dimension {m} must be in 1..{d - 1}")
    if m == 1:
        lines, flag = _common_eigenlines(mats)
        subs = []
        for v in lines:
            sub = Subspace(v[:, None])
            if invariance_residual(sub, mats) <= tol:
                subs.append(sub)
        return subs, flag
    comp = [exterior_power(a, m) for a in mats]
    lines, flag = _common_eigenlines(comp)
    out: list[Subspace] = []
    seen: list[np.ndarray] = []
    for omega in lines:
        if d == 4 and m == 2:
            if abs(_plucker_quadric(omega)) > 1e-8:
                continue
        basis = _decomposable_support(omega, d, m)
        if basis is None:
            continue
        sub = Subspace.from_span(basis)
        if sub.dim != m or invariance_residual(sub, mats) > tol:
            continue
        p = sub.projector()
        if any(np.linalg.norm(p - q) <= 1e-8 for q in seen):
            continue
        seen.append(p)
        out.append(sub)
    return out, flag


def invariant_subspaces(t: MatrixTuple, k: int) -> list[Subspace]:
    """All k-dimensional subspaces invariant under every matrix of the tuple.

    Sound (every returned subspace re-verifies) and complete for d <= 4 up
    to degenerate continua of invariant subspaces, for which orthonormal
    representatives are returned.
    """
    subs, _ = _invariant_subspaces_of_mats(_as_mat_list(t), k)
    return subs


# ---------------------------------------------------------------------------
# Irreducibility
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IrreducibilityVerdict:
    """YES / NO(witness) / UNKNOWN for the exterior-power action of a tuple.

    The witness subspace lives in the exterior coordinates (dimension
    C(d, k)); ``witness_dim`` is its dimension there.
    """

    status: str
    exterior_degree: int
    witness: Subspace | None = None
    note: str = ""

    @property
    def witness_dim(self) -> int | None:
        return None if self.witness is None else self.witness.dim


def irreducibility_report(t: MatrixTuple, k: int) -> IrreducibilityVerdict:
    """Exhaustive invariant-subspace search for the k-th exterior action.

    Searches every dimension 1..C(d,k)-1; NO carries a verified witness, YES
    means the exhaustive search found none, and UNKNOWN is returned when a
    continuum of candidate eigenlines made the search inconclusive.
    """
    d = t.dim
    if not 1 <= k <= d:
        raise InputError(f"exterior degree {k} out of range 1..{d}")
    dim_ext = math.comb(d, k)
    if dim_ext == 1:
        return IrreducibilityVerdict(
            status="YES", exterior_degree=k, note="one-dimensional action, vacuous"
        )
    mats = [exterior_power(a, k) for a in t.mats]
    saw_continuum = False
    for m in range(1, dim_ext):
        subs, flag = _invariant_subspaces_of_mats(mats, m)
        saw_continuum = saw_continuum or flag
        if subs:
            return IrreducibilityVerdict(
                status="NO", exterior_degree=k, witness=subs[0]
            )
    if saw_continuum:
        return IrreducibilityVerdict(
            status="UNKNOWN",
            exterior_degree=k,
            note="eigenline continuum encountered; exhaustive search inconclusive",
        )
    return IrreducibilityVerdict(status="YES", exterior_degree=k)


# ---------------------------------------------------------------------------
# Strong irreducibility heuristic
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StrongIrreducibilityVerdict:
    """YES_HEURISTIC / NO(parts) / UNKNOWN with the search bounds recorded.

    NO carries a verified family of proper subspaces (exterior coordinates)
    permuted by every generator. YES_HEURISTIC only says the bounded search
    found no invariant finite union; it is not a proof.
    """

    status: str
    exterior_degree: int
    parts: tuple[Subspace, ...] | None
    max_parts: int
    max_len: int


def _part_candidates(mats: list[np.ndarray], max_len: int, cap: int = 400) -> list[Subspace]:
    """Eigen-structure of short-word products, as candidate union parts."""
    d = mats[0].shape[0]
    out: list[Subspace] = []
    projs: list[np.ndarray] = []

    def add(basis: np.ndarray) -> None:
        if len(out) >= cap:
            return
        try:
            sub = Subspace.from_span(basis)
        except InputError:
            return
        if sub.dim > d - 1:
            return
        p = sub.projector()
        if any(np.linalg.norm(p - q) <= 1e-8 for q in projs):
            return
        projs.append(p)
        out.append(sub)

    n = len(mats)
    for w in words_up_to_length(n, max_len):
        m = np.eye(d)
        for s in w:
            m = mats[s - 1] @ m
        nrm = np.max(np.abs(m))
        if nrm == 0 or not np.isfinite(nrm):
            continue
        m = m / nrm
        scale = max(1.0, float(np.linalg.norm(m, 2)))
        vals, vecs = np.linalg.eig(m)
        handled = set()
        for i, lam in enumerate(vals):
            if i in handled or abs(lam.imag) <= 1e-8 * scale:
                continue
            # complex pair: 2-dimensional invariant plane of this word product
            handled.add(i)
            conj = np.argmin(np.abs(vals - np.conj(lam)))
            handled.add(int(conj))
            plane = np.column_stack([vecs[:, i].real, vecs[:, i].imag])
            if d >= 3:
                add(plane)
        for lam in _real_eig_clusters(m):
            e = _nullspace(m - lam * np.eye(d))
            if e.shape[1] == 0:
                continue
            if e.shape[1] <= d - 1:
                add(e)
            for j in range(e.shape[1]):
                add(e[:, j : j + 1])
        if len(out) >= cap:
            break
    return out


def _match_part(sub_basis: np.ndarray, projs: list[np.ndarray], tol: float) -> int | None:
    p = sub_basis @ sub_basis.T
    for j, q in enumerate(projs):
        if np.linalg.norm(p - q) <= tol:
            return j
    return None


def _orbit_closure(
    mats: list[np.ndarray], seed: Subspace, max_parts: int, tol: float
) -> tuple[Subspace, ...] | None:
    parts = [seed]
    projs = [seed.projector()]
    frontier = [seed]
    while frontier:
        cur = frontier.pop(0)
        for a in mats:
            img = Subspace.from_span(a @ cur.basis)
            if img.dim != cur.dim:
                return None
            if _match_part(img.basis, projs, _MATCH_TOL) is None:
                if len(parts) >= max_parts:
                    return None
                parts.append(img)
                projs.append(img.projector())
                frontier.append(img)
    # strict verification: every generator maps every part onto some part
    for a in mats:
        den = max(1.0, np.linalg.norm(a, 2))
        for cur in parts:
            img = a @ cur.basis
            ok = False
            for q in projs:
                resid = np.linalg.norm(img - q @ img, 2) / (
                    den * max(np.linalg.norm(img, 2), 1e-300)
                )
                if resid <= tol:
                    ok = True
                    break
            if not ok:
                return None
    return tuple(parts)


def strong_irreducibility_heuristic(
    t: MatrixTuple,
    k: int,
    max_parts: int = 6,
    max_len: int = 4,
    tol: float = VERIFY_TOL,
) -> StrongIrreducibilityVerdict:
    """Bounded search for an invariant finite union of proper subspaces.

    An invertible tuple preserving a finite union permutes its parts, so
    parts are invariant under enough short-word powers to appear in the
    eigen-structure of short products; those eigenspaces seed an orbit
    closure under the generators, capped at ``max_parts``. A closed,
    verified orbit of >= 2 parts refutes strong irreducibility; otherwise
    YES_HEURISTIC with the bounds recorded.
    """
    irr = irreducibility_report(t, k)
    if irr.status == "NO":
        return StrongIrreducibilityVerdict(
            status="NO",
            exterior_degree=k,
            parts=(irr.witness,),
            max_parts=max_parts,
            max_len=max_len,
        )
    if irr.status == "UNKNOWN":
        return StrongIrreducibilityVerdict(
            status="UNKNOWN",
            exterior_degree=k,
            parts=None,
            max_parts=max_parts,
            max_len=max_len,
        )
    mats = [exterior_power(a, k) for a in t.mats]
    if mats[0].shape[0] == 1:
        return StrongIrreducibilityVerdict(
            status="YES_HEURISTIC",
            exterior_degree=k,
            parts=None,
            max_parts=max_parts,
            max_len=max_len,
        )
    for seed in _part_candidates(mats, max_len):
        family = _orbit_closure(mats, seed, max_parts, tol)
        if family is not None and len(family) >= 2:
            return StrongIrreducibilityVerdict(
                status="NO",
                exterior_degree=k,
                parts=family,
                max_parts=max_parts,
                max_len=max_len,
            )
    return StrongIrreducibilityVerdict(
        status="YES_HEURISTIC",
        exterior_degree=k,
        parts=None,
        max_parts=max_parts,
        max_len=max_len,
    )


# ---------------------------------------------------------------------------
# Simultaneous triangularization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TriangularizabilityResult:
    """YES with an orthogonal change of basis, or NO.

    On YES, ``basis.T @ A_i @ basis`` is upper triangular for every
    generator; ``residual`` is the largest relative subdiagonal leak.
    """

    triangularizable: bool
    basis: np.ndarray | None = None
    residual: float | None = None


def _tri_rec(mats: list[np.ndarray]) -> np.ndarray | None:
    m = mats[0].shape[0]
    if m == 1:
        return np.eye(1)
    lines, _ = _common_eigenlines(mats)
    for v in lines:
        q = _complete_orthonormal(v[:, None])
        rest = q[:, 1:]
        comp = [rest.T @ a @ rest for a in mats]
        sub = _tri_rec(comp)
        if sub is not None:
            full = np.eye(m)
            full[1:, 1:] = sub
            return q @ full
    return None


def triangularizability(t: MatrixTuple) -> TriangularizabilityResult:
    """Complete flag-by-recursion decision over the reals (d <= 4).

    Finds a common eigenvector, quotients it out, recurses, backtracking
    over all candidate eigenlines; complex eigenvalues terminate branches.
    """
    mats = _as_mat_list(t)
    x = _tri_rec(mats)
    if x is None:
        return TriangularizabilityResult(triangularizable=False)
    worst = 0.0
    for a in mats:
        tri = x.T @ a @ x
        sub = np.abs(np.tril(tri, k=-1))
        worst = max(worst, float(np.max(sub)) / max(1.0, np.linalg.norm(a, 2)))
    return TriangularizabilityResult(triangularizable=True, basis=x, residual=worst)


# ---------------------------------------------------------------------------
# Block reduction
# ---------------------------------------------------------------------------


def block_reduce(t: MatrixTuple, v: Subspace, tol: float = VERIFY_TOL) -> MatrixTuple:
    """Delete the coupling block over an invariant subspace.

    In an orthonormal basis adapted to (V, V-perp) every generator is block
    upper triangular; the returned tuple keeps the diagonal blocks and zeroes
    the coupling, which leaves all singular-value-function equilibrium
    problems unchanged. Requires V invariant within ``tol``.
    """
    if v.ambient_dim != t.dim:
        raise InputError("subspace and tuple dimensions differ")
    resid = invariance_residual(v, t.mats)
    if resid > tol:
        raise InputError(
            f"subspace is not invariant (residual {resid:.3e} > {tol:.1e})"
        )
    q = _complete_orthonormal(v.basis)
    l = v.dim
    out = np.empty_like(t.mats)
    for i, a in enumerate(t.mats):
        m = q.T @ a @ q
        m[:l, l:] = 0.0
        m[l:, :l] = 0.0
        out[i] = m
    return MatrixTuple(out)


# ---------------------------------------------------------------------------
# Proximality
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProximalityResult:
    """YES with the first qualifying word, or NO_UP_TO(max_len).

    NO_UP_TO is explicitly not a proof of non-proximality; it only says no
    word up to the bound produced a modulus gap above ``rel_tol``.
    """

    proximal: bool
    index: int
    max_len: int
    rel_tol: float
    witness: tuple[int, ...] | None = None
    ratio: float | None = None


def proximality(
    t: MatrixTuple,
    k: int,
    max_len: int,
    rel_tol: float = 1e-6,
    *,
    max_words: int = 1 << 18,
) -> ProximalityResult:
    """First word whose k-th and (k+1)-st eigenvalue moduli separate.

    Words are scanned shortest first, lexicographic within a length, so the
    reported witness is deterministic (and stable under any parallel split).
    """
    d = t.dim
    if not 1 <= k <= d - 1:
        raise InputError(f"proximality index {k} out of range 1..{d - 1}")
    total = sum(t.n_maps**length for length in range(1, max_len + 1))
    if total > max_words:
        raise BudgetError(
            f"proximality scan of {total} words exceeds the cap {max_words}"
        )
    for w in words_up_to_length(t.n_maps, max_len):
        m, _ = word_product(t, w)
        mods = eigen_moduli(m)
        lo = mods[k]
        hi = mods[k - 1]
        if hi > 0.0 and (lo == 0.0 or hi / lo > 1.0 + rel_tol):
            ratio = math.inf if lo == 0.0 else hi / lo
            return ProximalityResult(
                proximal=True,
                index=k,
                max_len=max_len,
                rel_tol=rel_tol,
                witness=tuple(w),
                ratio=float(ratio),
            )
    return ProximalityResult(
        proximal=False, index=k, max_len=max_len, rel_tol=rel_tol
    )


# ---------------------------------------------------------------------------
# Combined report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StructureReport:
    """Per-degree irreducibility/proximality verdicts plus triangularizability."""

    dim: int
    n_maps: int
    irreducibility: dict[int, IrreducibilityVerdict]
    strong_irreducibility: dict[int, StrongIrreducibilityVerdict]
    triangularizable: TriangularizabilityResult
    proximal: dict[int, ProximalityResult]


def structure_report(
    t: MatrixTuple,
    *,
    prox_len: int = 6,
    strong_parts: int = 6,
    strong_len: int = 4,
) -> StructureReport:
    """Run every structural analyzer for k = 1..d-1."""
    d = t.dim
    irr = {k: irreducibility_report(t, k) for k in range(1, max(d, 2))}
    strong = {
        k: strong_irreducibility_heuristic(t, k, strong_parts, strong_len)
        for k in range(1, max(d, 2))
    }
    prox = {k: proximality(t, k, prox_len) for k in range(1, d)} if d >= 2 else {}
    return StructureReport(
        dim=d,
        n_maps=t.n_maps,
        irreducibility=irr,
        strong_irreducibility=strong,
        triangularizable=triangularizability(t),
        proximal=prox,
    )

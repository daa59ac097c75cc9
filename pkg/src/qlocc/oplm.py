"""Orthogonality-preserving local measurement (OPLM) analysis.

For a party p of an orthogonal set {psi_i}, the OPLM operator space is the
real linear space of Hermitian E with <psi_i|(E on p)|psi_j> = 0 for all
i != j. Every POVM element M^dag M of an orthogonality-preserving local
measurement lies in this space, so its structure bounds what any single
round of local measurement can do.

The solver works over real Hermitian coordinates (d diagonal entries plus
sqrt2-scaled real/imag off-diagonal pairs), so the nullspace of the
constraint matrix is exactly the operator space and SVD-orthonormal
coordinate vectors give a trace-orthonormal basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import RANK_RTOL
from .states import StateSet, party_letter

SPAN_TOL = 1e-8
ELIM_TOL = 1e-9
COMM_TOL = 1e-8


def _party_matrices(s: StateSet, party: int) -> np.ndarray:
    """States reshaped to (n, d_party, d_rest) with the party axis leading."""
    dims = s.space.party_dims
    n = len(dims)
    order = [party] + [q for q in range(n) if q != party]
    mats = [k.tensor().transpose(order).reshape(dims[party], -1) for k in s.states]
    return np.stack(mats) if mats else np.zeros((0, dims[party], 1), dtype=np.complex128)


def _support_basis(mats: np.ndarray) -> tuple[np.ndarray, list[int] | None]:
    """Orthonormal basis (columns) of the joint local support.

    Returns (U, indices) where indices lists the computational-basis labels
    when the support projector is 0/1-diagonal (then U has identity columns).
    """
    d = mats.shape[1]
    stacked = mats.transpose(1, 0, 2).reshape(d, -1)
    u, sv, _ = np.linalg.svd(stacked, full_matrices=True)
    r = int(np.sum(sv > RANK_RTOL * sv[0])) if sv.size and sv[0] > 0 else 0
    u = u[:, :r]
    proj = u @ u.conj().T
    diag = np.real(np.diagonal(proj))
    off = proj - np.diag(np.diagonal(proj))
    if np.abs(off).max(initial=0.0) < 1e-9 and np.all((diag < 1e-9) | (np.abs(diag - 1) < 1e-9)):
        idx = [i for i in range(d) if diag[i] > 0.5]
        aligned = np.zeros((d, r), dtype=np.complex128)
        for col, i in enumerate(idx):
            aligned[i, col] = 1.0
        return aligned, idx
    return u, None


def _pair_tensors(mats: np.ndarray, support: np.ndarray) -> np.ndarray:
    """G[i,j,a,b] with <psi_i|(E on p)|psi_j> = sum_ab E[a,b] G[i,j,a,b]
    for E expressed in the support basis."""
    comp = np.einsum("da,ndr->nar", support.conj(), mats)
    return np.einsum("iar,jbr->ijab", comp.conj(), comp)


def _constraint_rows(g: np.ndarray) -> np.ndarray:
    """Real constraint matrix over Hermitian coordinates from pair tensors."""
    n, _, r, _ = g.shape
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    ncoord = r * r
    rows = np.zeros((2 * len(pairs), ncoord), dtype=np.float64)
    rt2 = np.sqrt(2.0)
    # coordinate layout: [e_0..e_{r-1}, then for a<b: x_ab, y_ab]
    off_index = {}
    pos = r
    for a in range(r):
        for b in range(a + 1, r):
            off_index[(a, b)] = pos
            pos += 2
    for row, (i, j) in enumerate(pairs):
        c = g[i, j]
        re, im = 2 * row, 2 * row + 1
        rows[re, :r] = np.real(np.diagonal(c))
        rows[im, :r] = np.imag(np.diagonal(c))
        for (a, b), p in off_index.items():
            s_ab = (c[a, b] + c[b, a]) / rt2
            d_ab = (c[a, b] - c[b, a]) / rt2
            rows[re, p] = np.real(s_ab)
            rows[re, p + 1] = -np.imag(d_ab)
            rows[im, p] = np.imag(s_ab)
            rows[im, p + 1] = np.real(d_ab)
    return rows


def _coords_to_matrix(h: np.ndarray, r: int) -> np.ndarray:
    e = np.zeros((r, r), dtype=np.complex128)
    np.fill_diagonal(e, h[:r])
    pos = r
    rt2 = np.sqrt(2.0)
    for a in range(r):
        for b in range(a + 1, r):
            x, y = h[pos], h[pos + 1]
            e[a, b] += (x + 1j * y) / rt2
            e[b, a] += (x - 1j * y) / rt2
            pos += 2
    return e


@dataclass
class OplmSpace:
    party: int
    dim_party: int
    support: np.ndarray  # (d, r) orthonormal columns
    support_indices: list[int] | None  # basis labels when coordinate-aligned
    basis: list[np.ndarray]  # r x r Hermitian, trace-orthonormal
    pair_tensors: np.ndarray  # cached constraint data

    @property
    def space_dim(self) -> int:
        return len(self.basis)

    @property
    def support_dim(self) -> int:
        return self.support.shape[1]

    def identity_residual(self) -> float:
        """Distance of I (on the support) from the span; ~0 always."""
        r = self.support_dim
        ident = np.eye(r, dtype=np.complex128)
        proj = sum(np.trace(b.conj().T @ ident) * b for b in self.basis)
        return float(np.abs(proj - ident).max())

    def constraint_residual(self, e: np.ndarray) -> float:
        """Largest |<psi_i|(E on p)|psi_j>| over pairs, E in support coords."""
        vals = np.einsum("ijab,ab->ij", self.pair_tensors, e)
        n = vals.shape[0]
        mask = ~np.eye(n, dtype=bool)
        return float(np.abs(vals[mask]).max(initial=0.0))

    def embed(self, e: np.ndarray) -> np.ndarray:
        """Lift a support-coordinate operator to the full party dimension."""
        return self.support @ e @ self.support.conj().T


def oplm_space(s: StateSet, party: int, on_support: bool = False) -> OplmSpace:
    """Solve for the OPLM operator space of one party.

    With on_support=False (the default) the space lives on the full party
    dimension; with on_support=True it is compressed to the joint local
    support of the states, which is the relevant arena once earlier
    measurement rounds have shrunk the set.
    """
    if len(s) == 0:
        raise ValueError("empty state set")
    d = s.space.party_dims[party]
    mats = _party_matrices(s, party)
    if on_support:
        support, idx = _support_basis(mats)
    else:
        support, idx = np.eye(d, dtype=np.complex128), list(range(d))
    g = _pair_tensors(mats, support)
    r = support.shape[1]
    rows = _constraint_rows(g)
    if rows.shape[0] == 0:
        coords = np.eye(r * r)
    else:
        _, sv, vh = np.linalg.svd(rows)
        smax = sv[0] if sv.size else 0.0
        # absolute floor: states are unit vectors, so rows from orthogonal
        # pairs are pure rounding noise and must not count as constraints
        cut = max(RANK_RTOL * smax, 1e-10)
        rank = int(np.sum(sv > cut))
        coords = vh[rank:]
    basis = [_coords_to_matrix(hrow, r) for hrow in coords]
    return OplmSpace(party, d, support, idx, basis, g)


def is_trivial(sp: OplmSpace) -> bool:
    """True iff only scalar multiples of the identity preserve orthogonality."""
    return sp.space_dim == 1


@dataclass
class BlockStructure:
    commuting: bool
    blocks: list[np.ndarray]  # projectors in support coordinates
    index_supports: list[list[int] | None]


def block_structure(sp: OplmSpace) -> BlockStructure:
    """Joint eigenprojectors of the (commuting) operator space.

    Maximal subspaces on which every basis element acts as a scalar; refined
    iteratively one basis element at a time.
    """
    basis = sp.basis
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            comm = basis[i] @ basis[j] - basis[j] @ basis[i]
            if np.abs(comm).max() > COMM_TOL:
                return BlockStructure(False, [], [])
    r = sp.support_dim
    # columns of V carry the running joint eigenbasis, grouped into blocks
    v = np.eye(r, dtype=np.complex128)
    blocks = [list(range(r))]
    for e in basis:
        new_blocks = []
        for cols in blocks:
            vb = v[:, cols]
            sub = vb.conj().T @ e @ vb
            w, vecs = np.linalg.eigh((sub + sub.conj().T) / 2)
            v[:, cols] = vb @ vecs
            # split by eigenvalue clusters
            start = 0
            for k in range(1, len(w) + 1):
                if k == len(w) or w[k] - w[start] > 1e-6:
                    new_blocks.append(cols[start:k])
                    start = k
        blocks = new_blocks
    projectors = []
    supports = []
    for cols in blocks:
        vb = v[:, cols]
        p = vb @ vb.conj().T
        projectors.append(p)
        diag = np.real(np.diagonal(p))
        off = p - np.diag(np.diagonal(p))
        if np.abs(off).max(initial=0.0) < 1e-8 and np.all((diag < 1e-8) | (np.abs(diag - 1) < 1e-8)):
            local = [i for i in range(sp.support_dim) if diag[i] > 0.5]
            if sp.support_indices is not None:
                supports.append(sorted(sp.support_indices[i] for i in local))
            else:
                supports.append(local)
        else:
            supports.append(None)
    order = sorted(range(len(projectors)), key=lambda b: (supports[b] is None, supports[b] or []))
    return BlockStructure(True, [projectors[b] for b in order], [supports[b] for b in order])


@dataclass
class LocalMeasurement:
    party: int
    kraus: list[np.ndarray]  # full-dimension operators
    labels: list[str]

    def completeness_residual(self) -> float:
        total = sum(m.conj().T @ m for m in self.kraus)
        return float(np.abs(total - np.eye(total.shape[0])).max())

    def describe(self) -> str:
        return f"party {party_letter(self.party)}: " + " / ".join(self.labels)


def _measurement_from_projector(sp: OplmSpace, p: np.ndarray, label: str) -> LocalMeasurement:
    p_full = sp.embed(p)
    comp = np.eye(sp.dim_party, dtype=np.complex128) - p_full
    return LocalMeasurement(sp.party, [p_full, comp], [label, f"I-{label}"])


def _subset_label(indices) -> str:
    return "P[" + ",".join(str(i) for i in indices) + "]"


def projective_oplms(sp: OplmSpace, bs: BlockStructure) -> list[LocalMeasurement]:
    """All two-outcome block-projective measurements inside the span.

    Enumerates unions of joint eigenblocks, keeps the in-span ones, and
    dedupes complements. For a commuting span this is complete for
    two-outcome projective-in-span measurements: any in-span projector is
    diagonal in the joint eigenbasis with 0/1 eigenvalues constant on
    blocks, hence a block union.
    """
    if not bs.commuting:
        raise ValueError("operator space basis does not commute; no block structure")
    r = sp.support_dim
    nb = len(bs.blocks)
    out = []
    seen = set()
    for mask in range(1, 2**nb - 1):
        p = np.zeros((r, r), dtype=np.complex128)
        members = []
        for b in range(nb):
            if mask >> b & 1:
                p += bs.blocks[b]
                members.append(b)
        # complement dedup: keep the lexicographically smaller side
        comp_mask = (2**nb - 1) ^ mask
        if comp_mask < mask:
            continue
        proj = sum(np.trace(bb.conj().T @ p) * bb for bb in sp.basis)
        if np.abs(proj - p).max() > SPAN_TOL:
            continue
        if sp.constraint_residual(p) > SPAN_TOL:
            continue
        key = np.round(p, 9).tobytes()
        if key in seen:
            continue
        seen.add(key)
        sup = bs.index_supports
        if all(sup[b] is not None for b in members):
            idx = sorted(i for b in members for i in sup[b])
            label = _subset_label(idx)
        else:
            label = f"P[blocks {members}]"
        out.append(_measurement_from_projector(sp, p, label))
    return out


def measurement_candidates(s: StateSet, party: int, sp: OplmSpace | None = None) -> list[LocalMeasurement]:
    """Two-outcome projective OPLM candidates for one party.

    Two complementary enumerations, deduplicated:

    * If the operator space restricted to the joint local support commutes,
      the complete unions-of-joint-eigenblocks family (complete for
      two-outcome projective-in-span measurements on the support).
    * Always: computational-basis index-set projectors over the occupied
      indices, each verified against the full pairwise constraints. This is
      the class the layered-tiling protocols live in, and it stays available
      when the operator space is noncommuting (where no joint eigenstructure
      exists).
    """
    if sp is None:
        sp = oplm_space(s, party, on_support=True)
    seen: dict[bytes, LocalMeasurement] = {}

    def add(m: LocalMeasurement):
        k1 = np.round(m.kraus[0], 9).tobytes()
        k2 = np.round(m.kraus[1], 9).tobytes()
        seen.setdefault(min(k1, k2), m)

    if sp.space_dim >= 2 and 2 <= sp.support_dim:
        bs = block_structure(sp)
        if bs.commuting:
            for m in projective_oplms(sp, bs):
                add(m)

    d = s.space.party_dims[party]
    mats = _party_matrices(s, party)
    weight = np.abs(mats).max(axis=(0, 2))
    occ = [i for i in range(d) if weight[i] > 1e-9]
    r = len(occ)
    if r >= 2 and r <= 16:
        u_occ = np.zeros((d, r), dtype=np.complex128)
        for col, i in enumerate(occ):
            u_occ[i, col] = 1.0
        g = _pair_tensors(mats, u_occ)
        n = len(s)
        pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
        diag = np.array([np.diagonal(g[i, j]) for i, j in pairs])
        ident = np.eye(d, dtype=np.complex128)
        for mask in range(1, 2**r - 1):
            comp_mask = (2**r - 1) ^ mask
            if comp_mask < mask:
                continue
            t = np.array([(mask >> a) & 1 for a in range(r)], dtype=np.float64)
            vals = diag @ t
            if np.abs(vals).max(initial=0.0) > SPAN_TOL:
                continue
            p_full = np.zeros((d, d), dtype=np.complex128)
            idx = [occ[a] for a in range(r) if (mask >> a) & 1]
            for i in idx:
                p_full[i, i] = 1.0
            add(LocalMeasurement(party, [p_full, ident - p_full], [_subset_label(idx), f"I-{_subset_label(idx)}"]))
    return list(seen.values())


def is_oplm(s: StateSet, m: LocalMeasurement, tol: float = SPAN_TOL) -> bool:
    """Check every outcome of m against the pairwise constraints."""
    mats = _party_matrices(s, party=m.party)
    d = s.space.party_dims[m.party]
    ident = np.eye(d, dtype=np.complex128)
    g = _pair_tensors(mats, ident)
    n = len(s)
    mask = ~np.eye(n, dtype=bool)
    for kraus in m.kraus:
        e = kraus.conj().T @ kraus
        vals = np.einsum("ijab,ab->ij", g, e)
        if np.abs(vals[mask]).max(initial=0.0) > tol:
            return False
    return True


def eliminable_states(s: StateSet, m: LocalMeasurement) -> list[list[str]]:
    """Per outcome, the labels conclusively excluded (post-measurement norm 0)."""
    if not is_oplm(s, m):
        raise ValueError("measurement does not preserve orthogonality on this set")
    mats = _party_matrices(s, m.party)
    out = []
    for kraus in m.kraus:
        post = np.einsum("ab,nbr->nar", kraus, mats)
        norms = np.linalg.norm(post.reshape(len(s), -1), axis=1)
        out.append([s.states[i].label for i in range(len(s)) if norms[i] <= ELIM_TOL])
    return out


@dataclass
class IrreducibilityVerdict:
    verdict: str  # IRREDUCIBLE-EXACT | IRREDUCIBLE-IN-CLASS | REDUCIBLE
    space_dims: dict[str, int]  # per party, on the local support
    witness: LocalMeasurement | None
    candidates_checked: int
    class_note: str

    @property
    def irreducible(self) -> bool:
        return self.verdict.startswith("IRREDUCIBLE")


CLASS_NOTE = (
    "two-outcome projective OPLMs: joint-eigenblock unions for commuting "
    "operator spaces, computational-basis index projectors otherwise"
)


def is_locally_irreducible(s: StateSet) -> IrreducibilityVerdict:
    """Can any nontrivial OPLM eliminate a state from the set?

    IRREDUCIBLE-EXACT means every party's operator space on the support is
    one-dimensional, so no nontrivial OPLM exists at all (measurement-class
    independent). Otherwise the enumerated candidate class decides between
    REDUCIBLE (witness attached) and IRREDUCIBLE-IN-CLASS.
    """
    if len(s) < 2:
        raise ValueError("irreducibility needs at least two states")
    dims = {}
    for p in range(s.space.n_parties):
        dims[party_letter(p)] = oplm_space(s, p, on_support=True).space_dim
    if all(v == 1 for v in dims.values()):
        return IrreducibilityVerdict("IRREDUCIBLE-EXACT", dims, None, 0, CLASS_NOTE)
    checked = 0
    for p in range(s.space.n_parties):
        for m in measurement_candidates(s, p):
            checked += 1
            elim = eliminable_states(s, m)
            for outcome in elim:
                if outcome and len(outcome) < len(s):
                    return IrreducibilityVerdict("REDUCIBLE", dims, m, checked, CLASS_NOTE)
    return IrreducibilityVerdict("IRREDUCIBLE-IN-CLASS", dims, None, checked, CLASS_NOTE)

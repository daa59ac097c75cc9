"""Unextendibility of orthogonal product sets.

A product state a_1 x ... x a_N is orthogonal to the whole set iff every
member is killed by at least one party factor, so extendibility reduces to
an assignment problem: give each state to one party such that every party's
assigned local vectors span a proper subspace (of that party's restricted
support). The exhaustive assignment search decides exactly; an alternating
eigenvector descent serves as an independent numeric cross-check.

Parties are restricted to the span of the members' local supports first, so
sets embedded in larger spaces (post-measurement leaves) are judged on the
subspace they actually occupy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import RANK_RTOL
from .oplm import _party_matrices, _support_basis
from .states import Ket, StateSet, gram_check, is_product_state

ASSIGNMENT_CAP = 10**7
WITNESS_TOL = 1e-8


def _local_support_vectors(s: StateSet):
    """Per-party support basis U_p and per-state unit local vectors in the
    support coordinates. Requires every member to be a product state."""
    supports = []
    locals_ = []
    for p in range(s.space.n_parties):
        mats = _party_matrices(s, p)
        u, _ = _support_basis(mats)
        vecs = []
        for i in range(len(s)):
            m = mats[i]
            uu, sv, _ = np.linalg.svd(m)
            if sv.size > 1 and sv[1] > RANK_RTOL * sv[0]:
                raise ValueError(f"state {s.states[i].label} is not product across party {p}")
            vecs.append(u.conj().T @ uu[:, 0])
        supports.append(u)
        locals_.append(np.stack(vecs))
    return supports, locals_


@dataclass
class UpbVerdict:
    unextendible: bool
    witness: Ket | None  # a product extension, when one exists
    assignment: list[int] | None  # party handling each state, for the witness
    support_note: str
    nodes_explored: int


def _orth_complement_vector(span_cols: np.ndarray, dim: int) -> np.ndarray:
    if span_cols.shape[1] == 0:
        v = np.zeros(dim, dtype=np.complex128)
        v[0] = 1.0
        return v
    _, _, vh = np.linalg.svd(span_cols.conj().T)
    return vh[-1].conj()


def check_unextendible(s: StateSet, node_cap: int = 5_000_000) -> UpbVerdict:
    """Exact unextendibility decision by exhaustive party assignment."""
    if len(s) == 0:
        raise ValueError("empty state set")
    if not gram_check(s).ok:
        raise ValueError("set must be pairwise orthogonal")
    for k in s.states:
        if not is_product_state(k):
            raise ValueError(f"state {k.label} is not a product state")
    n_parties = s.space.n_parties
    k = len(s)
    if n_parties**k > ASSIGNMENT_CAP:
        raise ValueError(f"{n_parties}^{k} assignments exceed cap; use numeric_extension_search")
    supports, locals_ = _local_support_vectors(s)
    rdims = [u.shape[1] for u in supports]
    note = "supports: " + " x ".join(str(r) for r in rdims) + f" (ambient {'x'.join(str(d) for d in s.space.party_dims)})"

    nodes = 0
    spans = [np.zeros((r, 0), dtype=np.complex128) for r in rdims]
    assignment: list[int] = []

    def dfs(i: int) -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > node_cap:
            raise ValueError("assignment search exceeded node cap")
        if i == k:
            return True
        for p in range(n_parties):
            w = locals_[p][i]
            resid = w - spans[p] @ (spans[p].conj().T @ w)
            rn = np.linalg.norm(resid)
            if rn > 1e-8:
                if spans[p].shape[1] + 1 >= rdims[p]:
                    continue  # party span would become full: no room for a witness
                spans[p] = np.hstack([spans[p], (resid / rn)[:, None]])
                assignment.append(p)
                if dfs(i + 1):
                    return True
                assignment.pop()
                spans[p] = spans[p][:, :-1]
            else:
                assignment.append(p)
                if dfs(i + 1):
                    return True
                assignment.pop()
        return False

    if dfs(0):
        parts = []
        for p in range(n_parties):
            v = _orth_complement_vector(spans[p], rdims[p])
            parts.append(supports[p] @ v)
        amp = parts[0]
        for v in parts[1:]:
            amp = np.kron(amp, v)
        witness = Ket(s.space, amp, "extension")
        overlaps = np.abs(s.matrix().conj() @ witness.amplitudes)
        if overlaps.max() > WITNESS_TOL:
            raise AssertionError("internal error: extension witness not orthogonal")
        return UpbVerdict(False, witness, list(assignment), note, nodes)
    return UpbVerdict(True, None, None, note, nodes)


@dataclass
class ExtensionSearchResult:
    residual: float
    witness: Ket
    restarts: int


def numeric_extension_search(
    s: StateSet, restarts: int = 200, seed: int = 0, restrict_support: bool = True
) -> ExtensionSearchResult:
    """Alternating minimization of sum_i |<psi_i|a_1 x ... x a_N>|^2.

    With all but one party fixed, the free party's optimum is the minimal
    eigenvector of an accumulated PSD form; restarts from random product
    states. Independent of the exact assignment procedure. By default the
    candidate is restricted to the members' local supports (the same arena
    check_unextendible decides on); restrict_support=False searches the
    ambient space instead.
    """
    if len(s) == 0:
        raise ValueError("empty state set")
    rng = np.random.default_rng(seed)
    n_parties = s.space.n_parties
    supports = []
    for p in range(n_parties):
        if restrict_support:
            u, _ = _support_basis(_party_matrices(s, p))
        else:
            u = np.eye(s.space.party_dims[p], dtype=np.complex128)
        supports.append(u)
    rdims = [u.shape[1] for u in supports]
    # compress each state to the support lattice
    tensors = []
    for kstate in s.states:
        t = kstate.tensor()
        for p, u in enumerate(supports):
            t = np.tensordot(u.conj().T, t, axes=([1], [p]))
            t = np.moveaxis(t, 0, p)
        tensors.append(np.conj(t))

    def residual_for(vecs):
        total = 0.0
        for tc in tensors:
            val = tc
            for p in range(n_parties):
                val = np.tensordot(val, vecs[p], axes=([0], [0]))
            total += abs(val) ** 2
        return float(total)

    best = None
    for _ in range(max(1, restarts)):
        vecs = []
        for r in rdims:
            v = rng.normal(size=r) + 1j * rng.normal(size=r)
            vecs.append(v / np.linalg.norm(v))
        prev = np.inf
        for _ in range(60):
            for p in range(n_parties):
                f = np.zeros((rdims[p], rdims[p]), dtype=np.complex128)
                for tc in tensors:
                    # contract in descending axis order so indices stay valid
                    u = tc
                    for q in range(n_parties - 1, -1, -1):
                        if q == p:
                            continue
                        u = np.tensordot(u, vecs[q], axes=([q], [0]))
                    f += np.outer(np.conj(u), u)
                w, v = np.linalg.eigh(f)
                vecs[p] = v[:, 0]
            cur = residual_for(vecs)
            if prev - cur < 1e-15:
                break
            prev = cur
        cur = residual_for(vecs)
        if best is None or cur < best[0]:
            best = (cur, [v.copy() for v in vecs])
        if best[0] < 1e-12:
            break  # an exact extension was found; later restarts cannot improve the verdict
    res, vecs = best
    amp = supports[0] @ vecs[0]
    for p in range(1, n_parties):
        amp = np.kron(amp, supports[p] @ vecs[p])
    return ExtensionSearchResult(res, Ket(s.space, amp, "candidate-extension"), restarts)

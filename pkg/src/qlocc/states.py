"""Multiparty pure-state model: kets, state sets, Schmidt structure, merging,
reduced states and local-redundancy checking.

States are always stored normalized; analyses only ever need directions.
Mixed-state orthogonality of reductions is read as tr(rho_i rho_j) = 0
(orthogonal supports), which for PSD operators is equivalent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import ORTHO_TOL, RANK_RTOL, as_carray, numerical_rank


def party_letter(i: int) -> str:
    return chr(ord("A") + i)


@dataclass(frozen=True)
class PartySpace:
    """Tensor structure: per-party dimensions plus optional per-party sub-splits.

    A sub-split factors one party into smaller tensor factors (e.g. a 6-dim
    party seen as qubit x qutrit); the factor dims must multiply back to the
    party dimension.
    """

    party_dims: tuple[int, ...]
    sub_splits: dict[int, tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.party_dims) == 0:
            raise ValueError("at least one party required")
        if any(d < 2 for d in self.party_dims):
            raise ValueError("party dimensions must be >= 2")
        object.__setattr__(self, "party_dims", tuple(int(d) for d in self.party_dims))
        splits = {}
        for p, fs in dict(self.sub_splits).items():
            fs = tuple(int(f) for f in fs)
            if p < 0 or p >= len(self.party_dims):
                raise ValueError(f"sub_split references unknown party {p}")
            if int(np.prod(fs)) != self.party_dims[p]:
                raise ValueError(f"sub_split {fs} does not multiply to party dim {self.party_dims[p]}")
            splits[int(p)] = fs
        object.__setattr__(self, "sub_splits", splits)

    @property
    def n_parties(self) -> int:
        return len(self.party_dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.party_dims))

    def factor_dims(self) -> tuple[int, ...]:
        """Party dims with sub-splits expanded into individual tensor factors."""
        out = []
        for p, d in enumerate(self.party_dims):
            out.extend(self.sub_splits.get(p, (d,)))
        return tuple(out)

    def factor_names(self) -> tuple[str, ...]:
        out = []
        for p, d in enumerate(self.party_dims):
            split = self.sub_splits.get(p)
            if split is None:
                out.append(party_letter(p))
            else:
                out.extend(f"{party_letter(p).lower()}{k + 1}" for k in range(len(split)))
        return tuple(out)

    def __eq__(self, other):
        return (
            isinstance(other, PartySpace)
            and self.party_dims == other.party_dims
            and self.sub_splits == other.sub_splits
        )

    def __hash__(self):
        return hash((self.party_dims, tuple(sorted(self.sub_splits.items()))))


@dataclass(frozen=True)
class Bipartition:
    left: frozenset[int]
    right: frozenset[int]

    @staticmethod
    def of(left, n_parties: int) -> "Bipartition":
        left = frozenset(int(i) for i in left)
        allp = frozenset(range(n_parties))
        if not left or not (allp - left):
            raise ValueError("both sides of a bipartition must be nonempty")
        if not left <= allp:
            raise ValueError("party index out of range")
        return Bipartition(left, allp - left)

    def label(self) -> str:
        ls = "".join(party_letter(i) for i in sorted(self.left))
        rs = "".join(party_letter(i) for i in sorted(self.right))
        return f"{ls}|{rs}"


class Ket:
    """A normalized pure state over a declared party structure."""

    __slots__ = ("space", "amplitudes", "label")

    def __init__(self, space: PartySpace, amplitudes, label: str = ""):
        amps = as_carray(amplitudes).reshape(-1)
        if amps.shape[0] != space.total_dim:
            raise ValueError(f"amplitude length {amps.shape[0]} != total dim {space.total_dim}")
        n = np.linalg.norm(amps)
        if n < 1e-12:
            raise ValueError("zero vector cannot be a Ket")
        if abs(n - 1.0) > 1e-12:
            amps = amps / n
        self.space = space
        self.amplitudes = amps
        self.label = label

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.space.party_dims)

    def __repr__(self):
        return f"Ket({self.label or '?'}, dims={self.space.party_dims})"


def make_ket(space: PartySpace, terms, label: str = "") -> Ket:
    """Assemble a ket from (coefficient, per-party index tuple) terms, then normalize."""
    if not terms:
        raise ValueError("empty term list")
    amps = np.zeros(space.total_dim, dtype=np.complex128)
    any_nonzero = False
    for coeff, idx in terms:
        idx = tuple(int(i) for i in idx)
        if len(idx) != space.n_parties:
            raise ValueError(f"term index {idx} has wrong arity")
        for p, i in enumerate(idx):
            if not 0 <= i < space.party_dims[p]:
                raise ValueError(f"index {i} out of range for party {party_letter(p)}")
        flat = int(np.ravel_multi_index(idx, space.party_dims))
        amps[flat] += complex(coeff)
        if coeff != 0:
            any_nonzero = True
    if not any_nonzero or np.linalg.norm(amps) < 1e-12:
        raise ValueError("all coefficients vanish")
    return Ket(space, amps, label)


class StateSet:
    """An ordered, labeled collection of kets sharing one party structure."""

    def __init__(self, space: PartySpace, states, name: str = ""):
        states = list(states)
        if any(s.space != space for s in states):
            raise ValueError("all states must share the set's PartySpace")
        labels = [s.label for s in states]
        if len(set(labels)) != len(labels):
            raise ValueError("state labels must be unique")
        self.space = space
        self.states = states
        self.name = name

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    @property
    def labels(self) -> list[str]:
        return [s.label for s in self.states]

    def matrix(self) -> np.ndarray:
        """(n_states, total_dim) amplitude matrix."""
        if not self.states:
            return np.zeros((0, self.space.total_dim), dtype=np.complex128)
        return np.stack([s.amplitudes for s in self.states])

    def __repr__(self):
        return f"StateSet({self.name or '?'}: {len(self)} states on {self.space.party_dims})"


def inner_product(a: Ket, b: Ket) -> complex:
    """<a|b>, conjugate-linear in the first argument."""
    if a.space != b.space:
        raise ValueError("mismatched party spaces")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def gram_matrix(s: StateSet) -> np.ndarray:
    m = s.matrix()
    return m.conj() @ m.T


@dataclass
class OrthoReport:
    ok: bool
    tol: float
    violations: list[tuple[str, str, float]]  # (label_i, label_j, |<i|j>|), descending

    def top_pairs(self, n: int = 2) -> list[tuple[str, str]]:
        return [(a, b) for a, b, _ in self.violations[:n]]


def gram_check(s: StateSet, tol: float = ORTHO_TOL) -> OrthoReport:
    """Pairwise-orthogonality report; violations sorted by magnitude descending."""
    if len(s) == 0:
        raise ValueError("empty state set")
    g = np.abs(gram_matrix(s))
    viol = []
    for i in range(len(s)):
        for j in range(i + 1, len(s)):
            if g[i, j] > tol:
                viol.append((s.states[i].label, s.states[j].label, float(g[i, j])))
    viol.sort(key=lambda t: -t[2])
    return OrthoReport(ok=not viol, tol=tol, violations=viol)


def coefficient_matrix(k: Ket, cut: Bipartition) -> np.ndarray:
    """Amplitudes reshaped to (dim_left x dim_right) for the given bipartition."""
    n = k.space.n_parties
    left = sorted(cut.left)
    right = sorted(cut.right)
    if cut.left | cut.right != frozenset(range(n)):
        raise ValueError("bipartition does not cover this space")
    t = k.tensor().transpose(left + right)
    dl = int(np.prod([k.space.party_dims[i] for i in left]))
    return t.reshape(dl, -1)


def schmidt_rank(k: Ket, cut: Bipartition) -> int:
    """Rank of the coefficient matrix across the cut; 1 means product."""
    return numerical_rank(coefficient_matrix(k, cut))


def is_product_state(k: Ket) -> bool:
    """Product across every bipartition (equivalently across each single-party cut)."""
    n = k.space.n_parties
    if n == 1:
        return True
    return all(schmidt_rank(k, Bipartition.of({p}, n)) == 1 for p in range(n))


def local_vectors(s: StateSet, party: int) -> np.ndarray | None:
    """Per-state local vectors on `party` when every state is product across
    that party's cut; None if some state is entangled across it.

    Vectors are normalized with a fixed phase convention (first significant
    amplitude real positive).
    """
    n = s.space.n_parties
    if n == 1:
        return s.matrix()
    out = []
    for k in s.states:
        m = coefficient_matrix(k, Bipartition.of({party}, n))
        u, sv, vh = np.linalg.svd(m)
        if sv.size > 1 and sv[1] > RANK_RTOL * sv[0]:
            return None
        v = u[:, 0]
        j = int(np.argmax(np.abs(v) > 1e-7))
        v = v * (np.conj(v[j]) / abs(v[j]))
        out.append(v)
    return np.stack(out)


def merge_parties(s: StateSet, grouping, reorder=None) -> StateSet:
    """Merge parties into coarser ones.

    `grouping` is a partition of party indices; `reorder` is an explicit party
    permutation (new order as a list of old indices) after which each group
    must be contiguous. Defaults to identity. The Gram matrix is unchanged.
    """
    n = s.space.n_parties
    groups = [tuple(int(i) for i in g) for g in grouping]
    flat = [i for g in groups for i in g]
    if sorted(flat) != list(range(n)):
        raise ValueError("grouping must cover every party exactly once")
    if reorder is None:
        reorder = list(range(n))
    reorder = [int(i) for i in reorder]
    if sorted(reorder) != list(range(n)):
        raise ValueError("reorder must be a permutation of the parties")
    # each group must be a contiguous run in the reordered party list
    pos = {old: newpos for newpos, old in enumerate(reorder)}
    new_dims = []
    order_check = []
    for g in groups:
        positions = sorted(pos[i] for i in g)
        if positions != list(range(positions[0], positions[0] + len(g))):
            raise ValueError(f"group {g} not contiguous after reorder")
        order_check.append(positions[0])
        new_dims.append(int(np.prod([s.space.party_dims[i] for i in g])))
    if order_check != sorted(order_check):
        raise ValueError("groups must appear in reorder order")
    new_space = PartySpace(tuple(new_dims))
    new_states = []
    for k in s.states:
        t = k.tensor().transpose(reorder).reshape(-1)
        new_states.append(Ket(new_space, t, k.label))
    return StateSet(new_space, new_states, s.name)


def reduced_state(k: Ket, keep) -> np.ndarray:
    """Partial trace down to the kept tensor factors (sub-splits expanded).

    `keep` indexes the factor list of the ket's space. Keeping everything is
    rejected (nothing would be discarded).
    """
    fdims = k.space.factor_dims()
    nf = len(fdims)
    keep = sorted(set(int(i) for i in keep))
    if not keep:
        raise ValueError("keep must be nonempty")
    if any(i < 0 or i >= nf for i in keep):
        raise ValueError("factor index out of range")
    if len(keep) == nf:
        raise ValueError("keep covers all factors; nothing to discard")
    t = k.amplitudes.reshape(fdims)
    discard = [i for i in range(nf) if i not in keep]
    t = t.transpose(keep + discard)
    dk = int(np.prod([fdims[i] for i in keep]))
    m = t.reshape(dk, -1)
    return m @ m.conj().T


@dataclass
class RedundancyReport:
    redundant: bool
    # discard choice (factor names) proving redundancy, if any
    witness_discard: tuple[str, ...] | None
    # per discard choice: violating pairs (label_i, label_j, tr(rho_i rho_j)), descending
    violations: dict[tuple[str, ...], list[tuple[str, str, float]]]

    @property
    def verdict(self) -> str:
        return "locally redundant" if self.redundant else "locally irredundant"


def redundancy_check(s: StateSet, tol: float = ORTHO_TOL) -> RedundancyReport:
    """Decide local redundancy: does some discard of tensor factors keep all
    pairwise reduced states on orthogonal supports (tr(rho_i rho_j) = 0)?

    Sub-splits participate as individual discardable factors.
    """
    rep = gram_check(s, tol=max(tol, ORTHO_TOL))
    if not rep.ok:
        raise ValueError("redundancy_check requires a pairwise orthogonal set")
    fdims = s.space.factor_dims()
    fnames = s.space.factor_names()
    nf = len(fdims)
    if nf < 2:
        raise ValueError("need at least two tensor factors")
    violations: dict[tuple[str, ...], list[tuple[str, str, float]]] = {}
    witness = None
    # iterate nonempty proper keep-subsets; discard = complement
    for mask in range(1, 2**nf - 1):
        keep = [i for i in range(nf) if mask >> i & 1]
        discard = tuple(fnames[i] for i in range(nf) if not mask >> i & 1)
        rhos = [reduced_state(k, keep) for k in s.states]
        bad = []
        for i in range(len(s)):
            for j in range(i + 1, len(s)):
                val = float(np.real(np.trace(rhos[i] @ rhos[j])))
                if val > tol:
                    bad.append((s.states[i].label, s.states[j].label, val))
        bad.sort(key=lambda t: -t[2])
        violations[discard] = bad
        if not bad and witness is None:
            witness = discard
    return RedundancyReport(redundant=witness is not None, witness_discard=witness, violations=violations)


def redundancy_check_whole_parties(s: StateSet, tol: float = ORTHO_TOL) -> bool:
    """Redundancy over whole parties only (sub-splits ignored).

    Used when judging activation leaves: in a given partition the discardable
    subsystems are the parties themselves.
    """
    plain = StateSet(PartySpace(s.space.party_dims), [Ket(PartySpace(s.space.party_dims), k.amplitudes, k.label) for k in s.states], s.name)
    if plain.space.n_parties < 2:
        return False
    return redundancy_check(plain, tol=tol).redundant


def _compressed_rows(s: StateSet) -> tuple[np.ndarray, int, int]:
    """Bipartite amplitude matrices restricted to the index supports."""
    if s.space.n_parties != 2:
        raise ValueError("relabeling comparison is bipartite")
    mats = np.stack([coefficient_matrix(k, Bipartition.of({0}, 2)) for k in s.states])
    arows = np.where(np.abs(mats).max(axis=(0, 2)) > 1e-9)[0]
    acols = np.where(np.abs(mats).max(axis=(0, 1)) > 1e-9)[0]
    return mats[:, arows][:, :, acols], len(arows), len(acols)


def equal_up_to_local_relabeling(a: StateSet, b: StateSet, tol: float = 1e-8) -> bool:
    """Same bipartite set up to support embedding, independent local basis
    relabelings (index permutations), per-state phases and state order."""
    from itertools import permutations

    if len(a) != len(b):
        return False
    ma, ra, ca = _compressed_rows(a)
    mb, rb, cb = _compressed_rows(b)
    if (ra, ca) != (rb, cb):
        return False
    va = ma.reshape(len(a), -1)
    for pa in permutations(range(ra)):
        for pb in permutations(range(ca)):
            perm = mb[:, pa][:, :, pb].reshape(len(b), -1)
            overlap = np.abs(va.conj() @ perm.T)
            hits = overlap > 1 - 1e-6
            if hits.sum(axis=1).min() >= 1 and len(set(int(np.argmax(r)) for r in hits)) == len(a):
                return True
    return False


def random_local_unitaries(space: PartySpace, rng) -> list[np.ndarray]:
    """Haar-ish random unitary per party (QR of a complex Gaussian)."""
    us = []
    for d in space.party_dims:
        z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        q, r = np.linalg.qr(z)
        q = q * (np.diagonal(r) / np.abs(np.diagonal(r)))
        us.append(q)
    return us


def apply_local_unitaries(s: StateSet, us) -> StateSet:
    full = us[0]
    for u in us[1:]:
        full = np.kron(full, u)
    return StateSet(s.space, [Ket(s.space, full @ k.amplitudes, k.label) for k in s.states], s.name)

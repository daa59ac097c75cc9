"""Protocol trees over state sets: application, verification, and search.

A protocol tree alternates Measure nodes (one party, a Kraus-form local
measurement, one child per outcome) with leaves that either identify a
state or mark a reached set. Search runs over the two-outcome projective
OPLM candidates of each party plus a terminal one-party resolution, with
reached sets deduplicated by a canonical amplitude key. Every proper
projective outcome strictly shrinks the measured party's local support, so
the reachable-set graph is finite and acyclic.

Negative verdicts are class-relative and say so; certificates replay.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .oplm import (
    CLASS_NOTE,
    ELIM_TOL,
    SPAN_TOL,
    LocalMeasurement,
    measurement_candidates,
    oplm_space,
)
from .qset import serialize_qset
from .states import (
    Ket,
    StateSet,
    gram_check,
    local_vectors,
    party_letter,
    redundancy_check_whole_parties,
    schmidt_rank,
    Bipartition,
)
from .upb import check_unextendible

SEARCH_CLASS_NOTE = CLASS_NOTE + "; terminal single-party resolution onto distinct local supports"


# ---------------------------------------------------------------------------
# tree nodes


@dataclass
class Leaf:
    identified: str | None = None
    reached: StateSet | None = None


@dataclass
class Measure:
    party: int
    measurement: LocalMeasurement
    children: list


def tree_to_json(node):
    if node is None:
        return None
    if isinstance(node, Leaf):
        if node.identified is not None:
            return {"identified": node.identified}
        return {"set": serialize_qset(node.reached) if node.reached is not None else None}
    return {
        "party": node.party,
        "outcomes": [
            {
                "kraus": [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(k)],
                "child": tree_to_json(c),
            }
            for k, c in zip(node.measurement.kraus, node.children)
        ],
    }


def tree_from_json(obj):
    from .qset import parse_qset

    if obj is None:
        return None
    if "identified" in obj:
        return Leaf(identified=obj["identified"])
    if "set" in obj:
        return Leaf(reached=parse_qset(obj["set"]) if obj["set"] else None)
    kraus = []
    children = []
    for out in obj["outcomes"]:
        kraus.append(np.array([[complex(re, im) for re, im in row] for row in out["kraus"]]))
        children.append(tree_from_json(out["child"]))
    m = LocalMeasurement(int(obj["party"]), kraus, [f"M{i}" for i in range(len(kraus))])
    return Measure(int(obj["party"]), m, children)


def tree_depth(node) -> int:
    if node is None or isinstance(node, Leaf):
        return 0
    return 1 + max((tree_depth(c) for c in node.children), default=0)


# ---------------------------------------------------------------------------
# applying measurements


def apply_outcome(s: StateSet, party: int, kraus, check: bool = True, tol: float = SPAN_TOL):
    """Project every state, drop the eliminated ones, renormalize survivors.

    Returns (surviving StateSet, list of surviving original labels). Raises
    if the survivors are no longer pairwise orthogonal (not an OPLM outcome).
    """
    kraus = np.asarray(kraus, dtype=np.complex128)
    dims = s.space.party_dims
    n = s.space.n_parties
    order = [party] + [q for q in range(n) if q != party]
    inv = list(np.argsort(order))
    survivors = []
    labels = []
    for k in s.states:
        t = k.tensor().transpose(order).reshape(dims[party], -1)
        post = kraus @ t
        nrm = np.linalg.norm(post)
        if nrm <= ELIM_TOL:
            continue
        full = post.reshape([dims[q] for q in order]).transpose(inv).reshape(-1)
        survivors.append(Ket(s.space, full, k.label))
        labels.append(k.label)
    out = StateSet(s.space, survivors, s.name)
    if check and len(out) > 1:
        rep = gram_check(out, tol=tol)
        if not rep.ok:
            a, b, v = rep.violations[0]
            raise ValueError(f"outcome breaks orthogonality: |<{a}|{b}>| = {v:.3g}")
    return out, labels


# ---------------------------------------------------------------------------
# verification (discrimination semantics)


@dataclass
class VerifyReport:
    passed: bool
    verdict: str
    failures: list[str]
    identified: dict[str, str]


def verify_protocol(s: StateSet, tree) -> VerifyReport:
    """Replay a tree and check perfect discrimination.

    PASS iff every replay step preserves orthogonality, every reachable leaf
    identifies exactly its single surviving state, and every input state is
    identified somewhere.
    """
    failures: list[str] = []
    identified: dict[str, str] = {}

    def walk(node, cur: StateSet, path: str):
        if len(cur) == 0:
            return  # unreachable branch; content immaterial
        if node is None:
            failures.append(f"{path}: reachable branch has no child ({len(cur)} states)")
            return
        if isinstance(node, Leaf):
            if node.identified is None:
                failures.append(f"{path}: leaf identifies nothing but {len(cur)} state(s) reach it")
            elif len(cur) != 1:
                failures.append(f"{path}: leaf holds {len(cur)} states")
            elif cur.states[0].label != node.identified:
                failures.append(f"{path}: leaf claims {node.identified!r}, reached by {cur.states[0].label!r}")
            else:
                identified[node.identified] = path
            return
        m = node.measurement
        if m.completeness_residual() > 1e-8:
            failures.append(f"{path}: measurement completeness violated")
        if len(node.children) != len(m.kraus):
            failures.append(f"{path}: {len(node.children)} children for {len(m.kraus)} outcomes")
            return
        for idx, kraus in enumerate(m.kraus):
            try:
                child_set, _ = apply_outcome(cur, node.party, kraus)
            except ValueError as exc:
                failures.append(f"{path}/{idx}: {exc}")
                continue
            walk(node.children[idx], child_set, f"{path}/{idx}")

    walk(tree, s, "root")
    missing = [lab for lab in s.labels if lab not in identified]
    if missing:
        failures.append("states never identified: " + ", ".join(missing))
    passed = not failures
    return VerifyReport(passed, "PASS-DISCRIMINATION" if passed else "FAIL", failures, identified)


# ---------------------------------------------------------------------------
# certificates


@dataclass
class Certificate:
    kind: str  # Distinguishability | Activation | NonActivabilityInClass | Indistinguishability | Exhaustion | Incomplete
    class_note: str
    params: dict
    tree: object | None = None
    leaf_evidence: list = field(default_factory=list)
    transcript: list = field(default_factory=list)
    verified: bool = False
    notes: str = ""

    def to_json(self):
        return {
            "kind": self.kind,
            "class_note": self.class_note,
            "params": self.params,
            "tree": tree_to_json(self.tree),
            "leaf_evidence": self.leaf_evidence,
            "transcript": self.transcript,
            "verified": self.verified,
            "notes": self.notes,
        }


# ---------------------------------------------------------------------------
# canonical keys for reached-set deduplication


def canonical_key(s: StateSet) -> bytes:
    m = s.matrix().copy()
    for i in range(m.shape[0]):
        row = m[i]
        nz = np.nonzero(np.abs(row) > 1e-7)[0]
        if nz.size:
            a = row[nz[0]]
            m[i] = row * (np.conj(a) / abs(a))
    m = np.round(m, 9) + 0.0
    rows = sorted(np.ascontiguousarray(m[i]).tobytes() for i in range(m.shape[0]))
    return repr(s.space.party_dims).encode() + b"|" + b"".join(rows)


# ---------------------------------------------------------------------------
# the memoized analysis graph


class SetAnalyzer:
    """Shared memo of reached sets and their analyses.

    Distinguishability and activation statuses are tri-state: True, False
    (conclusive for the searched class), or None (depth cap truncated the
    exploration). Conclusive results are final; truncated ones are retried
    when asked again with a larger budget.
    """

    def __init__(self):
        self.nodes: dict[bytes, dict] = {}

    def intern(self, s: StateSet) -> bytes:
        key = canonical_key(s)
        if key not in self.nodes:
            self.nodes[key] = {"set": s}
        return key

    def set_of(self, key: bytes) -> StateSet:
        return self.nodes[key]["set"]

    # -- per-node structural facts ------------------------------------------

    def oplm(self, key: bytes, party: int):
        nd = self.nodes[key]
        cache = nd.setdefault("oplm", {})
        if party not in cache:
            cache[party] = oplm_space(nd["set"], party, on_support=True)
        return cache[party]

    def support_dims(self, key: bytes) -> tuple[int, ...]:
        nd = self.nodes[key]
        if "support_dims" not in nd:
            s = nd["set"]
            nd["support_dims"] = tuple(self.oplm(key, p).support_dim for p in range(s.space.n_parties))
        return nd["support_dims"]

    def space_dims(self, key: bytes) -> tuple[int, ...]:
        nd = self.nodes[key]
        if "space_dims" not in nd:
            s = nd["set"]
            nd["space_dims"] = tuple(self.oplm(key, p).space_dim for p in range(s.space.n_parties))
        return nd["space_dims"]

    def is_product(self, key: bytes) -> bool:
        nd = self.nodes[key]
        if "is_product" not in nd:
            s = nd["set"]
            n = s.space.n_parties
            ok = True
            if n > 1:
                for k in s.states:
                    if any(schmidt_rank(k, Bipartition.of({p}, n)) > 1 for p in range(n)):
                        ok = False
                        break
            nd["is_product"] = ok
        return nd["is_product"]

    def exact_nonactivable(self, key: bytes) -> bool:
        """C2 x Cn product rule on local supports (plus degenerate cases).

        A product set whose effective structure is (<=2) x n is always
        locally distinguishable, and OPLM images stay in that class, so no
        descendant can become locally indistinguishable.
        """
        nd = self.nodes[key]
        if "exact_nonactivable" not in nd:
            s = nd["set"]
            if len(s) <= 1:
                nd["exact_nonactivable"] = True
            else:
                rdims = self.support_dims(key)
                eff = [p for p, r in enumerate(rdims) if r >= 2]
                if len(eff) <= 1:
                    nd["exact_nonactivable"] = True
                elif len(eff) == 2 and min(rdims[p] for p in eff) <= 2 and self.is_product(key):
                    nd["exact_nonactivable"] = True
                else:
                    nd["exact_nonactivable"] = False
        return nd["exact_nonactivable"]

    def certified_indistinguishable(self, key: bytes):
        """IRREDUCIBLE-EXACT or support-restricted UPB evidence, else None.

        A complete product basis of the support space is never certified
        this way: the UPB route requires a proper span.
        """
        nd = self.nodes[key]
        if "cert" not in nd:
            nd["cert"] = None
            s = nd["set"]
            if len(s) >= 2:
                dims = self.space_dims(key)
                if all(d == 1 for d in dims):
                    nd["cert"] = {
                        "kind": "IRREDUCIBLE-EXACT",
                        "space_dims": {party_letter(p): d for p, d in enumerate(dims)},
                    }
                elif self.is_product(key):
                    rdims = self.support_dims(key)
                    full = int(np.prod(rdims))
                    lower = sum(r - 1 for r in rdims) + 1
                    if lower <= len(s) < full:
                        try:
                            v = check_unextendible(s)
                        except ValueError:
                            v = None
                        if v is not None and v.unextendible:
                            nd["cert"] = {"kind": "UPB", "support_note": v.support_note}
        return nd["cert"]

    # -- moves ---------------------------------------------------------------

    def moves(self, key: bytes):
        nd = self.nodes[key]
        if "moves" in nd:
            return nd["moves"]
        s = nd["set"]
        out = []
        for p in range(s.space.n_parties):
            for m in measurement_candidates(s, p, self.oplm(key, p)):
                children = []
                for oi, kraus in enumerate(m.kraus):
                    child, labels = apply_outcome(s, p, kraus)
                    children.append((oi, self.intern(child) if len(child) else None, labels))
                out.append((p, m, children))
        nd["moves"] = out
        return out

    def _ordered_moves(self, key: bytes, mode: str):
        s = self.set_of(key)
        n = len(s)

        def sort_key(mv):
            p, m, children = mv
            elim = sum(n - len(labels) for _, _, labels in children)
            min_surv = min((len(labels) for _, ck, labels in children if ck is not None), default=0)
            tie = (p, m.labels[0])
            if mode == "act":
                return (elim, -min_surv) + tie
            return (-elim, -min_surv) + tie

        return sorted(self.moves(key), key=sort_key)

    # -- terminal one-party resolution ---------------------------------------

    def terminal_resolution(self, key: bytes):
        nd = self.nodes[key]
        if "terminal" in nd:
            return nd["terminal"]
        s = nd["set"]
        result = None
        for p in range(s.space.n_parties):
            locs = local_vectors(s, p)
            if locs is None:
                continue
            g = locs.conj() @ locs.T
            off = np.abs(g - np.diag(np.diagonal(g)))
            if off.max(initial=0.0) > 1e-9:
                continue
            d = s.space.party_dims[p]
            kraus = [np.outer(v, v.conj()) for v in locs]
            labels = [f"P[{k.label}]" for k, v in zip(s.states, locs)]
            rest = np.eye(d, dtype=np.complex128) - sum(kraus)
            children = [Leaf(identified=k.label) for k in s.states]
            if np.abs(rest).max() > 1e-10:
                kraus.append(rest)
                labels.append("rest")
                children.append(None)
            result = Measure(p, LocalMeasurement(p, kraus, labels), children)
            break
        nd["terminal"] = result
        return result

    # -- distinguishability ----------------------------------------------------

    def distinguishable(self, key: bytes, depth: int):
        """Tri-state: (True, tree) | (False, None) conclusive | (None, None)."""
        nd = self.nodes[key]
        cached = nd.get("dist")
        if cached is not None:
            status, tree, tried = cached
            if status is not None or tried >= depth:
                return status, tree
        s = nd["set"]
        if len(s) <= 1:
            tree = Leaf(identified=s.states[0].label) if len(s) == 1 else Leaf()
            nd["dist"] = (True, tree, depth)
            return True, tree
        tr = self.terminal_resolution(key)
        if tr is not None:
            nd["dist"] = (True, tr, depth)
            return True, tr
        if depth <= 0:
            nd["dist"] = (None, None, 0)
            return None, None
        incomplete = False
        for p, m, children in self._ordered_moves(key, "dist"):
            subtrees = []
            good = True
            for oi, ck, _labels in children:
                if ck is None:
                    subtrees.append(None)
                    continue
                st, subtree = self.distinguishable(ck, depth - 1)
                if st is True:
                    subtrees.append(subtree)
                else:
                    good = False
                    if st is None:
                        incomplete = True
                    break
            if good:
                tree = Measure(p, m, subtrees)
                nd["dist"] = (True, tree, depth)
                return True, tree
        status = None if incomplete else False
        nd["dist"] = (status, None, depth)
        return status, None

    # -- activation -------------------------------------------------------------

    def activation(self, key: bytes, depth: int):
        """Tri-state AND-OR search for a deterministic activation tree.

        A node activates if its set is certified locally indistinguishable
        and locally irredundant (whole parties), or if some candidate
        measurement sends every nonempty outcome to an activating node.
        """
        nd = self.nodes[key]
        cached = nd.get("act")
        if cached is not None:
            status, tree, tried = cached
            if status is not None or tried >= depth:
                return status, tree
        s = nd["set"]
        if len(s) < 2:
            nd["act"] = (False, None, depth)
            return False, None
        cert = self.certified_indistinguishable(key)
        if cert is not None and not redundancy_check_whole_parties(s):
            leaf = Leaf(reached=s)
            nd["act"] = (True, leaf, depth)
            nd["act_leaf_evidence"] = cert
            return True, leaf
        if self.exact_nonactivable(key):
            nd["act"] = (False, None, depth)
            return False, None
        if depth <= 0:
            nd["act"] = (None, None, 0)
            return None, None
        incomplete = False
        for p, m, children in self._ordered_moves(key, "act"):
            subtrees = []
            good = True
            # on failure keep expanding the remaining outcomes: the negative
            # verdict promises that every reachable set was analyzed
            for oi, ck, _labels in children:
                if ck is None:
                    subtrees.append(None)
                    continue
                st, subtree = self.activation(ck, depth - 1)
                if st is True:
                    subtrees.append(subtree)
                else:
                    good = False
                    subtrees.append(None)
                    if st is None:
                        incomplete = True
            if good:
                tree = Measure(p, m, subtrees)
                nd["act"] = (True, tree, depth)
                return True, tree
        status = None if incomplete else False
        nd["act"] = (status, None, depth)
        return status, None

    # -- status-only distinguishability ------------------------------------------

    def distinguishable_status(self, key: bytes, depth: int):
        """Tri-state distinguishability that may close branches with exact
        dimension rules (no tree built): the C2 x Cn product rule gives True,
        a certified locally indistinguishable set gives False.
        """
        nd = self.nodes[key]
        cached = nd.get("dist_status")
        if cached is not None:
            status, tried = cached
            if status is not None or tried >= depth:
                return status
        s = nd["set"]
        status = None
        if len(s) <= 1:
            status = True
        elif self.exact_nonactivable(key):
            status = True
        elif self.terminal_resolution(key) is not None:
            status = True
        elif self.certified_indistinguishable(key) is not None:
            status = False
        if status is not None:
            nd["dist_status"] = (status, depth)
            return status
        if depth <= 0:
            nd["dist_status"] = (None, 0)
            return None
        incomplete = False
        for p, m, children in self._ordered_moves(key, "dist"):
            good = True
            for oi, ck, _labels in children:
                if ck is None:
                    continue
                st = self.distinguishable_status(ck, depth - 1)
                if st is not True:
                    good = False
                    if st is None:
                        incomplete = True
                    break
            if good:
                nd["dist_status"] = (True, depth)
                return True
        status = None if incomplete else False
        nd["dist_status"] = (status, depth)
        return status

    # -- transcripts ------------------------------------------------------------

    def activation_transcript(self, max_depth: int):
        entries = []
        for key, nd in self.nodes.items():
            if "act" not in nd:
                continue
            s = nd["set"]
            if len(s) <= 1:
                dist, basis = True, "trivial"
            elif self.exact_nonactivable(key):
                dist, basis = True, "EXACT (C2xCn product rule)"
            elif nd.get("cert"):
                dist, basis = False, "certified locally indistinguishable"
            else:
                dist = self.distinguishable_status(key, max_depth)
                basis = "search-in-class"
            cert = nd.get("cert")
            entries.append(
                {
                    "n_states": len(s),
                    "labels": s.labels,
                    "support_dims": list(self.support_dims(key)) if len(s) else [],
                    "distinguishable": dist,
                    "distinguishable_basis": basis,
                    "certified_indistinguishable": cert["kind"] if cert else None,
                }
            )
        return entries


# ---------------------------------------------------------------------------
# top-level search entry points


def search_distinguishing_protocol(s: StateSet, max_depth: int = 8, analyzer: SetAnalyzer | None = None) -> Certificate:
    """Find and verify a perfect-discrimination protocol, or report exhaustion."""
    rep = gram_check(s)
    if not rep.ok:
        raise ValueError("input set is not pairwise orthogonal")
    an = analyzer or SetAnalyzer()
    key = an.intern(s)
    status, tree = an.distinguishable(key, max_depth)
    params = {"max_depth": max_depth, "tolerance": SPAN_TOL}
    if status is True:
        vr = verify_protocol(s, tree)
        if not vr.passed:
            raise AssertionError("internal error: search tree failed verification: " + "; ".join(vr.failures))
        return Certificate("Distinguishability", SEARCH_CLASS_NOTE, params, tree=tree, verified=True)
    kind = "Exhaustion" if status is False else "Incomplete"
    note = "no distinguishing protocol exists in the searched class" if status is False else "depth cap reached; verdict INCOMPLETE"
    return Certificate(kind, SEARCH_CLASS_NOTE, params | {"complete": status is False}, notes=note)


def _collect_leaves(s: StateSet, tree, path="root"):
    out = []

    def walk(node, cur, path):
        if len(cur) == 0:
            return
        if node is None:
            raise ValueError(f"{path}: reachable branch without child")
        if isinstance(node, Leaf):
            out.append((path, cur, node))
            return
        for idx, kraus in enumerate(node.measurement.kraus):
            child_set, _ = apply_outcome(cur, node.party, kraus)
            walk(node.children[idx], child_set, f"{path}/{idx}")

    walk(tree, s, path)
    return out


def certify_activation_protocol(s: StateSet, tree, analyzer: SetAnalyzer | None = None) -> Certificate:
    """Replay an activation tree and certify every reachable leaf set.

    Deterministic activation: each leaf must hold >= 2 states, be locally
    irredundant over whole parties, and be certified locally
    indistinguishable (IRREDUCIBLE-EXACT or support-restricted UPB).
    """
    an = analyzer or SetAnalyzer()
    params = {"tolerance": SPAN_TOL}
    leaves = _collect_leaves(s, tree)
    evidence = []
    failures = []
    for path, cur, node in leaves:
        if node.identified is not None or len(cur) < 2:
            failures.append(f"{path}: not an activation leaf")
            continue
        key = an.intern(cur)
        cert = an.certified_indistinguishable(key)
        redundant = redundancy_check_whole_parties(cur)
        if cert is None:
            failures.append(f"{path}: leaf set not certified locally indistinguishable")
        elif redundant:
            failures.append(f"{path}: leaf set is locally redundant")
        else:
            evidence.append(
                {
                    "path": path,
                    "n_states": len(cur),
                    "labels": cur.labels,
                    "support_dims": list(an.support_dims(key)),
                    "certificate": cert,
                    "locally_irredundant": True,
                }
            )
        if node.reached is not None and canonical_key(node.reached) != canonical_key(cur):
            failures.append(f"{path}: recorded leaf set does not replay")
    ok = not failures and bool(evidence)
    return Certificate(
        "Activation" if ok else "ProtocolFailure",
        SEARCH_CLASS_NOTE,
        params,
        tree=tree,
        leaf_evidence=evidence,
        verified=ok,
        notes="" if ok else "; ".join(failures),
    )


def activation_search(s: StateSet, max_depth: int = 8, analyzer: SetAnalyzer | None = None) -> Certificate:
    """Search for a deterministic nonlocality-activation protocol.

    Returns an Activation certificate (replay-verified) or, after complete
    exhaustion of the class, NonActivabilityInClass with a transcript of
    every reached set and its distinguishability status. A truncated search
    returns kind Incomplete, never a negative verdict.
    """
    rep = gram_check(s)
    if not rep.ok:
        raise ValueError("input set is not pairwise orthogonal")
    an = analyzer or SetAnalyzer()
    key = an.intern(s)
    params = {"max_depth": max_depth, "tolerance": SPAN_TOL}
    dstat = an.distinguishable_status(key, max_depth)
    if dstat is False:
        cert = an.certified_indistinguishable(key)
        return Certificate(
            "Indistinguishability",
            SEARCH_CLASS_NOTE,
            params | {"complete": True},
            leaf_evidence=[{"certificate": cert}] if cert else [],
            notes="root set is not locally distinguishable (within the searched class); nothing to activate",
        )
    if dstat is None:
        return Certificate(
            "Incomplete",
            SEARCH_CLASS_NOTE,
            params | {"complete": False},
            notes="depth cap too small to establish root distinguishability; verdict INCOMPLETE",
        )
    status, tree = an.activation(key, max_depth)
    if status is True:
        cert = certify_activation_protocol(s, tree, analyzer=an)
        cert.params.update(params)
        return cert
    transcript = an.activation_transcript(max_depth)
    # weaker some-branch flag: did any branch alone reach a certified leaf?
    probabilistic = any(nd.get("act_leaf_evidence") for nd in an.nodes.values())
    if status is False:
        return Certificate(
            "NonActivabilityInClass",
            SEARCH_CLASS_NOTE,
            params | {"complete": True, "probabilistic_activation": probabilistic},
            transcript=transcript,
            verified=True,
            notes="every reachable set in the class remained locally distinguishable",
        )
    return Certificate(
        "Incomplete",
        SEARCH_CLASS_NOTE,
        params | {"complete": False, "probabilistic_activation": probabilistic},
        transcript=transcript,
        notes="depth cap reached before exhausting the class; verdict INCOMPLETE",
    )


# ---------------------------------------------------------------------------
# scripted protocols


def _vec(d: int, entries) -> np.ndarray:
    v = np.zeros(d, dtype=np.complex128)
    for i, c in entries:
        v[i] = c
    return v / np.linalg.norm(v)


def _pvec(d: int, entries) -> np.ndarray:
    v = _vec(d, entries)
    return np.outer(v, v.conj())


def _pidx(d: int, idx) -> np.ndarray:
    p = np.zeros((d, d), dtype=np.complex128)
    for i in idx:
        p[i, i] = 1.0
    return p


def _meas(party: int, kraus, labels) -> LocalMeasurement:
    return LocalMeasurement(party, [np.asarray(k, dtype=np.complex128) for k in kraus], labels)


def _rest(d: int, ops) -> np.ndarray:
    return np.eye(d, dtype=np.complex128) - sum(ops)


def _s3_discrimination_tree():
    d = 6
    v1 = _pvec(d, [(0, 1), (4, -1)])
    v2 = _pvec(d, [(2, 1), (3, -1)])
    v3 = _pvec(d, [(i, 1) for i in range(6)])
    mb = _meas(1, [v1, v2, v3, _rest(d, [v1, v2, v3])], ["P[0-4]", "P[2-3]", "P[stopper]", "rest"])

    def alice(specs, leaves):
        ops = [_pvec(d, sp) for sp in specs]
        kraus = ops + [_rest(d, ops)]
        labels = [f"P{i}" for i in range(len(ops))] + ["rest"]
        return Measure(0, _meas(0, kraus, labels), leaves)

    b1 = alice([[(1, 1), (2, -1)], [(4, 1), (5, -1)]], [Leaf(identified="phi3"), Leaf(identified="phi8"), None])
    b2 = alice([[(0, 1), (1, -1)], [(3, 1), (4, -1)]], [Leaf(identified="phi4"), Leaf(identified="phi9"), None])
    b3 = alice(
        [[(0, 1), (1, 1), (2, 1)], [(3, 1), (4, 1), (5, 1)]],
        [Leaf(identified="phi5"), Leaf(identified="phi10"), None],
    )
    b4 = alice(
        [[(0, 1)], [(2, 1)], [(3, 1)]],
        [Leaf(identified="phi1"), Leaf(identified="phi2"), Leaf(identified="phi6"), Leaf(identified="phi7")],
    )
    return Measure(1, mb, [b1, b2, b3, b4])


def _half_split(party: int, d: int, lo_half, hi_half) -> LocalMeasurement:
    return _meas(
        party,
        [_pidx(d, lo_half), _pidx(d, hi_half)],
        [f"P[{','.join(map(str, lo_half))}]", f"P[{','.join(map(str, hi_half))}]"],
    )


def _s3_activation_tree():
    ka = _half_split(0, 6, (0, 1, 2), (3, 4, 5))
    kb = _half_split(1, 6, (0, 1, 2), (3, 4, 5))
    return Measure(1, kb, [Measure(0, ka, [Leaf(), Leaf()]), Measure(0, ka, [Leaf(), Leaf()])])


def _s1_recursion_tree():
    d = 4
    pa = _half_split(0, d, (0,), (1, 2, 3))
    pb = _half_split(1, d, (0,), (1, 2, 3))

    def resolve(party, specs, labels, leaves):
        ops = [_pvec(d, sp) for sp in specs]
        rest = _rest(d, ops)
        kraus, labs, ch = list(ops), list(labels), list(leaves)
        if np.abs(rest).max() > 1e-10:
            kraus.append(rest)
            labs.append("rest")
            ch.append(None)
        return Measure(party, _meas(party, kraus, labs), ch)

    b0 = resolve(
        1,
        [[(0, 1), (1, 1)], [(0, 1), (1, -1)], [(2, 1), (3, 1)], [(2, 1), (3, -1)]],
        ["P[X01+]", "P[X01-]", "P[X23+]", "P[X23-]"],
        [Leaf(identified="0_X01+"), Leaf(identified="0_X01-"), Leaf(identified="0_X23+"), Leaf(identified="0_X23-")],
    )
    col0 = resolve(
        0,
        [[(1, 1), (2, 1)], [(1, 1), (2, -1)], [(3, 1)]],
        ["P[xi12+]", "P[xi12-]", "P[3]"],
        [Leaf(identified="xi12+_0"), Leaf(identified="xi12-_0"), Leaf(identified="xi3_0")],
    )
    row1 = resolve(
        1,
        [[(1, 1), (2, 1)], [(1, 1), (2, -1)], [(3, 1)]],
        ["P[X12+]", "P[X12-]", "P[3]"],
        [Leaf(identified="1_X12+"), Leaf(identified="1_X12-"), Leaf(identified="1_X3")],
    )
    col1 = resolve(
        0,
        [[(2, 1), (3, 1)], [(2, 1), (3, -1)]],
        ["P[xi23+]", "P[xi23-]"],
        [Leaf(identified="xi23+_1"), Leaf(identified="xi23-_1")],
    )
    row2 = resolve(
        1,
        [[(2, 1), (3, 1)], [(2, 1), (3, -1)]],
        ["P[X23+]", "P[X23-]"],
        [Leaf(identified="2_X23+"), Leaf(identified="2_X23-")],
    )
    tail_b = Measure(
        1,
        _meas(1, [_pidx(d, (2,)), _rest(d, [_pidx(d, (2,))])], ["P[2]", "I-P[2]"]),
        [Leaf(identified="xi3_2"), Leaf(identified="xi3_X3")],
    )
    a23 = Measure(0, _meas(0, [_pidx(d, (2,)), _rest(d, [_pidx(d, (2,))])], ["P[2]", "I-P[2]"]), [row2, tail_b])
    b23 = Measure(1, _meas(1, [_pidx(d, (1,)), _rest(d, [_pidx(d, (1,))])], ["P[1]", "I-P[1]"]), [col1, a23])
    a123 = Measure(0, _meas(0, [_pidx(d, (1,)), _rest(d, [_pidx(d, (1,))])], ["P[1]", "I-P[1]"]), [row1, b23])
    b123 = Measure(1, pb, [col0, a123])
    return Measure(0, pa, [b0, b123])


def _s4_abc_activation_tree():
    # on merge_parties(s4, {A},{B,C}): party 0 is A (dim 6), party 1 is BC (dim 12)
    i6 = np.eye(6, dtype=np.complex128)
    i2 = np.eye(2, dtype=np.complex128)
    c0 = np.kron(i6, _pidx(2, (0,)))
    c1 = np.kron(i6, _pidx(2, (1,)))
    kb0 = np.kron(_pidx(6, (0, 1, 2)), i2)
    kb1 = np.kron(_pidx(6, (3, 4, 5)), i2)
    ka = _half_split(0, 6, (0, 1, 2), (3, 4, 5))
    mc = _meas(1, [c0, c1], ["I6xP[c=0]", "I6xP[c=1]"])
    mkb = _meas(1, [kb0, kb1], ["P[B012]xI2", "P[B345]xI2"])

    def branch():
        return Measure(1, mkb, [Measure(0, ka, [Leaf(), Leaf()]), Measure(0, ka, [Leaf(), Leaf()])])

    return Measure(1, mc, [branch(), branch()])


BUILTIN_PROTOCOLS = ("s3_discrimination", "s3_activation", "s1_recursion", "s4_abc_activation")


def builtin_protocol(name: str):
    if name == "s3_discrimination":
        return _s3_discrimination_tree()
    if name == "s3_activation":
        return _s3_activation_tree()
    if name == "s1_recursion":
        return _s1_recursion_tree()
    if name == "s4_abc_activation":
        return _s4_abc_activation_tree()
    raise ValueError(f"unknown builtin protocol {name!r}")

import json

import numpy as np
import pytest

from qlocc.fixtures import build_fixture
from qlocc.oplm import measurement_candidates
from qlocc.protocol import (
    Leaf,
    SetAnalyzer,
    activation_search,
    apply_outcome,
    builtin_protocol,
    canonical_key,
    certify_activation_protocol,
    search_distinguishing_protocol,
    tree_from_json,
    tree_to_json,
    verify_protocol,
)
from qlocc.states import PartySpace, StateSet, equal_up_to_local_relabeling, make_ket, merge_parties


def pair_set():
    s = PartySpace((2, 2))
    return StateSet(s, [make_ket(s, [(1, (0, 0))], "00"), make_ket(s, [(1, (1, 1))], "11")], "pair")


def test_apply_outcome_s1():
    s1 = build_fixture("s1")
    out, labels = apply_outcome(s1, 0, np.diag([0, 1, 1, 1]).astype(complex))
    assert len(out) == 12
    dropped = set(s1.labels) - set(labels)
    assert dropped == {"0_X01+", "0_X01-", "0_X23+", "0_X23-"}


def test_apply_outcome_identity():
    s1 = build_fixture("s1")
    out, labels = apply_outcome(s1, 0, np.eye(4, dtype=complex))
    assert labels == s1.labels
    assert np.abs(out.matrix() - s1.matrix()).max() <= 1e-12


def test_apply_outcome_s3_kb1():
    s3 = build_fixture("s3")
    p = np.diag([1, 1, 1, 0, 0, 0]).astype(complex)
    out, labels = apply_outcome(s3, 1, p)
    assert len(out) == 10
    phi1 = out.states[labels.index("phi1")]
    # phi1 -> |0>|0-1> on the kept half
    expect = np.zeros(36)
    expect[0] = 1 / np.sqrt(2)
    expect[1] = -1 / np.sqrt(2)
    assert np.abs(phi1.amplitudes - expect).max() <= 1e-12


def test_apply_outcome_rejects_orthogonality_break():
    s = PartySpace((2, 2))
    st = StateSet(
        s,
        [make_ket(s, [(1, (0, 0)), (1, (1, 1))], "bell+"), make_ket(s, [(1, (0, 0)), (-1, (1, 1))], "bell-")],
        "bells",
    )
    with pytest.raises(ValueError):
        apply_outcome(st, 0, np.diag([1, 0]).astype(complex))


def test_apply_outcome_count_conservation():
    s1 = build_fixture("s1")
    for p in range(2):
        for m in measurement_candidates(s1, p):
            for kraus in m.kraus:
                out, labels = apply_outcome(s1, p, kraus)
                assert len(out) == len(labels)
                elim = len(s1) - len(out)
                assert elim + len(out) == len(s1)


def test_verify_builtin_s3_discrimination():
    vr = verify_protocol(build_fixture("s3"), builtin_protocol("s3_discrimination"))
    assert vr.passed
    assert set(vr.identified) == {f"phi{i}" for i in range(1, 11)}


def test_verify_builtin_s1_recursion():
    vr = verify_protocol(build_fixture("s1"), builtin_protocol("s1_recursion"))
    assert vr.passed


def test_verify_bare_leaf_fails():
    vr = verify_protocol(pair_set(), Leaf())
    assert not vr.passed
    assert any("leaf" in f for f in vr.failures)


def test_search_pair_depth_one():
    cert = search_distinguishing_protocol(pair_set(), max_depth=1)
    assert cert.kind == "Distinguishability" and cert.verified


def test_search_tiles33_exhaustion():
    cert = search_distinguishing_protocol(build_fixture("tiles33"), max_depth=6)
    assert cert.kind == "Exhaustion"
    assert cert.params["complete"] is True


def test_search_s1():
    cert = search_distinguishing_protocol(build_fixture("s1"), max_depth=6)
    assert cert.kind == "Distinguishability" and cert.verified
    assert verify_protocol(build_fixture("s1"), cert.tree).passed


def test_activation_s3():
    cert = activation_search(build_fixture("s3"), max_depth=4)
    assert cert.kind == "Activation" and cert.verified
    assert cert.leaf_evidence
    for ev in cert.leaf_evidence:
        assert ev["certificate"]["kind"] in ("UPB", "IRREDUCIBLE-EXACT")
        assert ev["locally_irredundant"]


def test_activation_s1_none():
    cert = activation_search(build_fixture("s1"), max_depth=6)
    assert cert.kind == "NonActivabilityInClass"
    assert cert.params["complete"] is True
    assert cert.transcript
    assert all(e["distinguishable"] is True for e in cert.transcript)


def test_activation_root_indistinguishable():
    cert = activation_search(build_fixture("tiles33"), max_depth=4)
    assert cert.kind == "Indistinguishability"


def test_certify_builtin_s3_activation():
    s3 = build_fixture("s3")
    cert = certify_activation_protocol(s3, builtin_protocol("s3_activation"))
    assert cert.kind == "Activation" and cert.verified
    assert len(cert.leaf_evidence) == 4
    tiles = build_fixture("tiles33")
    from qlocc.protocol import _collect_leaves

    for _, cur, _node in _collect_leaves(s3, builtin_protocol("s3_activation")):
        assert equal_up_to_local_relabeling(cur, tiles)


def test_certify_builtin_s4_abc():
    s4 = merge_parties(build_fixture("s4"), [(0,), (1, 2)])
    cert = certify_activation_protocol(s4, builtin_protocol("s4_abc_activation"))
    assert cert.kind == "Activation" and cert.verified
    assert len(cert.leaf_evidence) == 8


def test_dist_implies_not_indistinguishable_at_root():
    for name in ("s1", "s3", "s5"):
        s = build_fixture(name)
        d = search_distinguishing_protocol(s, max_depth=6)
        a = activation_search(s, max_depth=4 if name == "s3" else 6)
        assert d.kind == "Distinguishability"
        assert a.kind != "Indistinguishability"


def test_tree_json_roundtrip():
    tree = builtin_protocol("s3_discrimination")
    blob = json.dumps(tree_to_json(tree))
    back = tree_from_json(json.loads(blob))
    vr = verify_protocol(build_fixture("s3"), back)
    assert vr.passed


def test_leaf_set_serialization():
    s3 = build_fixture("s3")
    cert = activation_search(s3, max_depth=4)
    js = cert.to_json()
    assert js["kind"] == "Activation"
    blob = json.dumps(js["tree"])
    assert "kraus" in blob


def test_replay_determinism():
    s3 = build_fixture("s3")
    a = activation_search(s3, max_depth=4).to_json()
    b = activation_search(s3, max_depth=4).to_json()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    s1 = build_fixture("s1")
    c = activation_search(s1, max_depth=6).to_json()
    d = activation_search(s1, max_depth=6).to_json()
    assert json.dumps(c, sort_keys=True) == json.dumps(d, sort_keys=True)


def test_canonical_key_dedup():
    s1 = build_fixture("s1")
    reordered = StateSet(s1.space, list(reversed(s1.states)), "rev")
    assert canonical_key(s1) == canonical_key(reordered)
    s5 = build_fixture("s5")
    assert canonical_key(s1) != canonical_key(s5)


def test_unknown_builtin():
    with pytest.raises(ValueError):
        builtin_protocol("nope")


def test_incomplete_marker():
    # depth 0 cannot even start: verdict must be Incomplete, not negative
    cert = activation_search(build_fixture("s1"), max_depth=0)
    assert cert.kind == "Incomplete"
    assert cert.params["complete"] is False


def test_orthogonality_asserted_during_search():
    an = SetAnalyzer()
    s1 = build_fixture("s1")
    key = an.intern(s1)
    for _p, _m, children in an.moves(key):
        for _oi, ck, _labels in children:
            if ck is not None:
                from qlocc.states import gram_check

                assert gram_check(an.set_of(ck), tol=1e-8).ok

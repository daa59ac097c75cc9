import numpy as np
import pytest

from _helpers import random_orthogonal_product_set, random_orthonormal_set
from qlocc.fixtures import build_fixture
from qlocc.oplm import (
    OplmSpace,
    block_structure,
    eliminable_states,
    is_locally_irreducible,
    is_oplm,
    is_trivial,
    measurement_candidates,
    oplm_space,
    projective_oplms,
)
from qlocc.states import (
    PartySpace,
    StateSet,
    apply_local_unitaries,
    make_ket,
    random_local_unitaries,
)


def pair_set():
    s = PartySpace((2, 2))
    return StateSet(s, [make_ket(s, [(1, (0, 0))], "00"), make_ket(s, [(1, (1, 1))], "11")], "pair")


def test_s1_party_a_space():
    s1 = build_fixture("s1")
    sp = oplm_space(s1, 0)
    assert sp.space_dim == 2
    # span is {diag(d0, g, g, g)}: check the two basis elements are diagonal
    # and constant on {1,2,3}
    for e in sp.basis:
        off = e - np.diag(np.diagonal(e))
        assert np.abs(off).max() <= 1e-8
        d = np.real(np.diagonal(e))
        assert np.ptp(d[1:]) <= 1e-8
    bs = block_structure(sp)
    assert bs.commuting
    assert bs.index_supports == [[0], [1, 2, 3]]
    ms = projective_oplms(sp, bs)
    assert len(ms) == 1
    assert np.allclose(ms[0].kraus[0], np.diag([1, 0, 0, 0]))
    assert np.allclose(ms[0].kraus[1], np.diag([0, 1, 1, 1]))


def test_s1_party_b_trivial_bob_cannot_go_first():
    # the same tying argument applied to Bob collapses his whole space
    sp = oplm_space(build_fixture("s1"), 1)
    assert sp.space_dim == 1
    assert is_trivial(sp)


def test_s5_party_a_space():
    sp = oplm_space(build_fixture("s5"), 0)
    assert sp.space_dim == 2
    bs = block_structure(sp)
    assert bs.commuting and bs.index_supports == [[0], [1, 2, 3]]


def test_tiles33_both_parties_trivial():
    t = build_fixture("tiles33")
    assert oplm_space(t, 0).space_dim == 1
    assert oplm_space(t, 1).space_dim == 1
    assert projective_oplms(oplm_space(t, 0), block_structure(oplm_space(t, 0))) == []


def test_pair_full_hermitian_space():
    # the only pair constraint has a vanishing B factor, so no constraint
    # binds and the space is the full 2x2 Hermitian space
    sp = oplm_space(pair_set(), 0)
    assert sp.space_dim == 4
    assert not is_trivial(sp)
    bs = block_structure(sp)
    assert not bs.commuting
    with pytest.raises(ValueError):
        projective_oplms(sp, bs)


def test_single_state_full_space():
    s = PartySpace((3, 3))
    single = StateSet(s, [make_ket(s, [(1, (0, 0))], "00")], "one")
    sp = oplm_space(single, 0)
    assert sp.space_dim == 9
    assert not is_trivial(sp)


def test_identity_always_in_span():
    for name in ("s1", "s2", "s3", "s5", "s6", "tiles33"):
        s = build_fixture(name)
        for p in range(s.space.n_parties):
            sp = oplm_space(s, p)
            assert sp.identity_residual() <= 1e-12, (name, p)


def test_basis_trace_orthonormal():
    for name in ("s1", "s3", "s5"):
        s = build_fixture(name)
        for p in range(s.space.n_parties):
            basis = oplm_space(s, p).basis
            for i, a in enumerate(basis):
                for j, b in enumerate(basis):
                    val = np.trace(a.conj().T @ b)
                    assert abs(val - (1.0 if i == j else 0.0)) <= 1e-10


def test_random_span_samples_satisfy_constraints():
    rng = np.random.default_rng(4)
    for name in ("s1", "s3", "s5"):
        s = build_fixture(name)
        for p in range(s.space.n_parties):
            sp = oplm_space(s, p)
            for _ in range(5):
                coeff = rng.normal(size=sp.space_dim)
                e = sum(c * b for c, b in zip(coeff, sp.basis))
                assert sp.constraint_residual(e) <= 1e-8


def test_block_structure_synthetic_span():
    # span{I, diag(1,1,0,0)} has blocks {0,1} and {2,3} and one measurement
    basis = [np.eye(4, dtype=complex) / 2, np.diag([1, 1, -1, -1]).astype(complex) / 2]
    sp = OplmSpace(0, 4, np.eye(4, dtype=complex), [0, 1, 2, 3], basis, np.zeros((1, 1, 4, 4)))
    bs = block_structure(sp)
    assert bs.commuting
    assert bs.index_supports == [[0, 1], [2, 3]]
    ms = projective_oplms(sp, bs)
    assert len(ms) == 1
    assert np.allclose(ms[0].kraus[0] + ms[0].kraus[1], np.eye(4))


def test_block_structure_identity_span():
    basis = [np.eye(4, dtype=complex) / 2]
    sp = OplmSpace(0, 4, np.eye(4, dtype=complex), [0, 1, 2, 3], basis, np.zeros((1, 1, 4, 4)))
    bs = block_structure(sp)
    assert bs.commuting and len(bs.blocks) == 1
    assert bs.index_supports == [[0, 1, 2, 3]]


def test_trivial_measurement_eliminates_nothing():
    from qlocc.oplm import LocalMeasurement

    s1 = build_fixture("s1")
    ident = LocalMeasurement(0, [np.eye(4, dtype=complex)], ["I"])
    assert eliminable_states(s1, ident) == [[]]


def test_block_structure_nondiagonal_blocks():
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    basis = [np.eye(2, dtype=complex) / np.sqrt(2), x / np.sqrt(2)]
    sp = OplmSpace(0, 2, np.eye(2, dtype=complex), [0, 1], basis, np.zeros((1, 1, 2, 2)))
    bs = block_structure(sp)
    assert bs.commuting
    assert len(bs.blocks) == 2
    plus = np.array([1, 1]) / np.sqrt(2)
    assert any(np.abs(b - np.outer(plus, plus)).max() < 1e-8 for b in bs.blocks)


def test_eliminable_states_s1():
    s1 = build_fixture("s1")
    (m,) = measurement_candidates(s1, 0)
    elim = eliminable_states(s1, m)
    support0 = {"0_X01+", "0_X01-", "0_X23+", "0_X23-"}
    assert set(elim[0]) == set(s1.labels) - support0  # P0 kills everything else
    assert set(elim[1]) == support0


def test_eliminable_rejects_non_oplm():
    s1 = build_fixture("s1")
    from qlocc.oplm import LocalMeasurement

    bad = LocalMeasurement(0, [np.diag([1, 1, 0, 0]).astype(complex), np.diag([0, 0, 1, 1]).astype(complex)], ["a", "b"])
    assert not is_oplm(s1, bad)
    with pytest.raises(ValueError):
        eliminable_states(s1, bad)


def test_irreducibility_verdicts():
    assert is_locally_irreducible(build_fixture("tiles33")).verdict == "IRREDUCIBLE-EXACT"
    v = is_locally_irreducible(build_fixture("s1"))
    assert v.verdict == "REDUCIBLE"
    assert v.witness is not None
    w = is_locally_irreducible(pair_set())
    assert w.verdict == "REDUCIBLE"
    assert np.allclose(w.witness.kraus[0], np.diag([1, 0])) or np.allclose(w.witness.kraus[0], np.diag([0, 1]))


def test_irreducibility_needs_two_states():
    s = PartySpace((2, 2))
    single = StateSet(s, [make_ket(s, [(1, (0, 0))], "a")], "one")
    with pytest.raises(ValueError):
        is_locally_irreducible(single)


def test_s3_party_b_candidates_include_kb():
    s3 = build_fixture("s3")
    cands = measurement_candidates(s3, 1)
    labels = {m.labels[0] for m in cands}
    assert "P[0,1,2]" in labels


def _reversed_order_space_dim(s, party):
    """Independent oracle: assemble the constraint matrix by explicit loops,
    enumerating Hermitian coordinates in reversed index order."""
    dims = s.space.party_dims
    d = dims[party]
    n = s.space.n_parties
    order = [party] + [q for q in range(n) if q != party]
    mats = [k.tensor().transpose(order).reshape(d, -1) for k in s.states]
    coords = []  # (kind, a, b) in reversed enumeration
    for a in range(d - 1, -1, -1):
        for b in range(d - 1, a - 1, -1):
            if a == b:
                coords.append(("d", a, a))
            else:
                coords.append(("re", a, b))
                coords.append(("im", a, b))
    rows = []
    for i in range(len(s)):
        for j in range(len(s)):
            if i >= j:
                continue
            re_row, im_row = [], []
            for kind, a, b in coords:
                if kind == "d":
                    e = np.zeros((d, d), dtype=complex)
                    e[a, a] = 1
                elif kind == "re":
                    e = np.zeros((d, d), dtype=complex)
                    e[a, b] = e[b, a] = 1
                else:
                    e = np.zeros((d, d), dtype=complex)
                    e[a, b] = 1j
                    e[b, a] = -1j
                val = np.trace(mats[i].conj().T @ e @ mats[j])
                re_row.append(val.real)
                im_row.append(val.imag)
            rows.append(re_row)
            rows.append(im_row)
    a = np.array(rows) if rows else np.zeros((0, d * d))
    return d * d - np.linalg.matrix_rank(a, tol=1e-8)


def test_space_dim_against_reversed_order_oracle():
    rng = np.random.default_rng(31)
    cases = [build_fixture("tiles33"), pair_set()]
    for _ in range(6):
        n = int(rng.integers(2, 7))
        s = random_orthogonal_product_set(rng, (3, 3), n)
        if s is not None:
            cases.append(s)
    for _ in range(3):
        cases.append(random_orthonormal_set(rng, (3, 3), 4))
    for s in cases:
        for p in range(2):
            assert oplm_space(s, p).space_dim == _reversed_order_space_dim(s, p)


def test_space_dim_invariances():
    rng = np.random.default_rng(41)
    s3 = build_fixture("s3")
    dims_before = [oplm_space(s3, p).space_dim for p in range(2)]
    # relabeling states does not change the space
    relabeled = StateSet(s3.space, list(reversed(s3.states)), "rev")
    assert [oplm_space(relabeled, p).space_dim for p in range(2)] == dims_before
    # a local unitary on the *other* party leaves party A's dimension fixed
    us = random_local_unitaries(s3.space, rng)
    us[0] = np.eye(6)
    rotated = apply_local_unitaries(s3, us)
    assert oplm_space(rotated, 0).space_dim == dims_before[0]


def test_candidate_measurements_complete_and_op():
    for name in ("s1", "s3", "s5"):
        s = build_fixture(name)
        for p in range(s.space.n_parties):
            for m in measurement_candidates(s, p):
                assert m.completeness_residual() <= 1e-10
                assert is_oplm(s, m)

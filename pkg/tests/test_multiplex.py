import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from multiplexgm.errors import (
    ChannelCountMismatch,
    EmptyChannelIntersection,
    LabelOutOfRange,
    OrderMismatch,
    SelfLoop,
    TargetOrderTooSmall,
    UnionIncomplete,
    ValidationError,
)
from multiplexgm.multiplex import (
    CENTERED,
    NAIVE,
    PaddedMultiplex,
    PaddingScheme,
    Role,
    channel_weights,
    embed_oplus_zero,
    from_adjacency,
    objective,
    pad,
    perm_matrix,
    validate_multiplex,
)

SCHEMES = [NAIVE, CENTERED, PaddingScheme.generalized(0.25), PaddingScheme.generalized(0.0)]


@st.composite
def multiplexes(draw, max_n=7, max_c=3):
    n = draw(st.integers(2, max_n))
    c = draw(st.integers(1, max_c))
    common = draw(st.integers(0, n - 1))
    channels = []
    for _ in range(c):
        members = [v for v in range(n) if v == common or draw(st.booleans())]
        pairs = list(itertools.combinations(members, 2))
        edges = [e for e in pairs if draw(st.booleans())]
        channels.append((members, edges))
    # cover the union
    channels[0] = (sorted(set(channels[0][0]) | set(range(n))), channels[0][1])
    return validate_multiplex(n, channels)


def naive_objective(A, B, perm, lam):
    """Frobenius form with explicit permutation and padded matrices."""
    n = B.shape[1]
    P = perm_matrix(perm, n)
    total = 0.0
    for i in range(A.shape[0]):
        Ae = np.zeros((n, n))
        Ae[: A.shape[1], : A.shape[1]] = A[i]
        total += lam[i] * np.linalg.norm(Ae @ P - P @ B[i]) ** 2
    return total


class TestValidate:
    def test_single_channel(self):
        g = validate_multiplex(3, [([0, 1, 2], [(0, 1)])])
        assert g.c == 1 and g.n_edges() == [1]

    def test_disjoint_vertex_sets(self):
        with pytest.raises(EmptyChannelIntersection):
            validate_multiplex(4, [([0, 1], []), ([2, 3], [])])

    def test_vertex_absent_from_one_channel(self):
        g = validate_multiplex(3, [([0, 1, 2], []), ([1, 2], [])])
        assert g.membership(1).tolist() == [0, 1, 1]

    def test_errors(self):
        with pytest.raises(LabelOutOfRange):
            validate_multiplex(3, [([0, 1, 3], [])])
        with pytest.raises(SelfLoop):
            validate_multiplex(3, [([0, 1, 2], [(1, 1)])])
        with pytest.raises(UnionIncomplete):
            validate_multiplex(3, [([0, 1], [])])
        with pytest.raises(ValidationError, match="weighted"):
            validate_multiplex(3, [([0, 1, 2], [(0, 1, 0.5)])])

    def test_edge_endpoints_join_vertex_set(self):
        g = validate_multiplex(3, [([0], [(1, 2)]), ([0, 1, 2], [])])
        assert g.channels[0].vertices == {0, 1, 2}

    def test_relabel_roundtrip(self, rng):
        A = (rng.random((6, 6)) < 0.5).astype(float)
        A = np.triu(A, 1)
        g = from_adjacency([A + A.T])
        pi = rng.permutation(6)
        h = g.relabel(pi)
        assert np.array_equal(h.adjacency(0)[np.ix_(pi, pi)], g.adjacency(0))


class TestPad:
    def test_triangle(self):
        g = validate_multiplex(3, [([0, 1, 2], [(0, 1), (1, 2), (0, 2)])])
        M = pad(g, 3, CENTERED).matrices[0]
        assert np.array_equal(M, np.ones((3, 3)) - np.eye(3))

    def test_single_edge_centered(self):
        g = validate_multiplex(3, [([0, 1, 2], [(0, 1)])])
        M = pad(g, 3, CENTERED).matrices[0]
        assert M[0, 1] == 1 and M[0, 2] == -1 and M[1, 2] == -1

    def test_absent_vertex_row_zero(self):
        g = validate_multiplex(3, [([0, 1, 2], [(0, 2)]), ([0, 1], [(0, 1)])])
        M = pad(g, 3, CENTERED).matrices[1]
        assert not M[2].any() and not M[:, 2].any()

    def test_generalized_roles(self):
        g = validate_multiplex(3, [([0, 1, 2], [(0, 1)])])
        s = PaddingScheme.generalized(0.25)
        assert pad(g, 3, s, Role.TEMPLATE).matrices[0][0, 2] == -0.25
        assert pad(g, 3, s, Role.BACKGROUND).matrices[0][0, 2] == -1.0
        assert pad(g, 3, NAIVE).matrices[0][0, 2] == 0.0

    def test_extra_labels_zero(self):
        g = validate_multiplex(2, [([0, 1], [])])
        M = pad(g, 4, CENTERED).matrices[0]
        assert M[0, 1] == -1 and not M[2:].any()

    def test_target_too_small(self):
        g = validate_multiplex(3, [([0, 1, 2], [])])
        with pytest.raises(TargetOrderTooSmall):
            pad(g, 2, CENTERED)

    def test_read_only(self):
        g = validate_multiplex(3, [([0, 1, 2], [(0, 1)])])
        with pytest.raises(ValueError):
            pad(g, 3).matrices[0, 0, 1] = 5

    @given(multiplexes(), st.sampled_from(SCHEMES), st.sampled_from(list(Role)), st.integers(0, 2))
    def test_padding_invariants(self, g, scheme, role, extra):
        P = pad(g, g.n_total + extra, scheme, role)
        nev = scheme.non_edge_value(role)
        for i, M in enumerate(P.matrices):
            assert np.array_equal(M, M.T)
            assert not np.diag(M).any()
            absent = np.ones(P.order, bool)
            absent[list(g.channels[i].vertices)] = False
            assert not M[absent].any() and not M[:, absent].any()
            assert set(np.unique(M)) <= {0.0, 1.0, nev}


class TestEmbed:
    def test_cases(self):
        X = np.array([[0.0, 1], [1, 0]])
        assert np.array_equal(embed_oplus_zero(X, 2), X)
        assert np.array_equal(embed_oplus_zero(np.zeros((1, 1)), 3), np.zeros((3, 3)))
        Y = embed_oplus_zero(X, 4)
        assert np.array_equal(Y[:2, :2], X) and Y[2:].sum() == 0 and Y[:, 2:].sum() == 0
        with pytest.raises(TargetOrderTooSmall):
            embed_oplus_zero(X, 1)


class TestObjective:
    def test_self_match_zero(self, rng):
        A = np.triu(rng.random((5, 5)) < 0.5, 1).astype(float)
        g = from_adjacency([A + A.T])
        T = pad(g, 5, CENTERED)
        assert objective(T, T, np.arange(5)) == 0.0

    def test_two_by_two(self):
        A = PaddedMultiplex.from_matrices([[0, 1], [1, 0]])
        B = PaddedMultiplex.from_matrices([[0, -1], [-1, 0]], role=Role.BACKGROUND)
        assert objective(A, B, [0, 1]) == 8.0

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_direct_expansion(self, seed):
        r = np.random.default_rng(seed)
        B = np.triu(r.choice([-1.0, 1.0], (5, 5)), 1)
        A = np.triu(r.choice([-1.0, 1.0], (3, 3)), 1)
        tpl = PaddedMultiplex.from_matrices(A + A.T)
        bg = PaddedMultiplex.from_matrices(B + B.T)
        perm = r.permutation(5)
        assert objective(tpl, bg, perm) == pytest.approx(
            naive_objective(tpl.matrices, bg.matrices, perm, [1.0]), abs=1e-12)

    def test_depends_on_restriction_only(self, rng):
        B = np.triu(rng.choice([-1.0, 1.0], (6, 6)), 1)
        bg = PaddedMultiplex.from_matrices(B + B.T)
        tpl = PaddedMultiplex.from_matrices(bg.matrices[0][:3, :3])
        a = objective(tpl, bg, [4, 1, 0, 2, 3, 5])
        b = objective(tpl, bg, [4, 1, 0, 5, 3, 2])
        c = objective(tpl, bg, [4, 1, 0])
        assert a == b == c

    def test_weights(self, rng):
        A = rng.choice([-1.0, 1.0], (2, 4, 4))
        A = np.triu(A, 1)
        A = A + A.transpose(0, 2, 1)
        B = np.roll(A, 1, axis=0)
        tpl, bg = PaddedMultiplex.from_matrices(A), PaddedMultiplex.from_matrices(B)
        perm = np.arange(4)
        lam = [0.5, 3.0]
        assert objective(tpl, bg, perm, lam) == pytest.approx(naive_objective(A, B, perm, lam))
        with pytest.raises(ChannelCountMismatch):
            objective(tpl, bg, perm, [1, 2, 3])
        with pytest.raises(ValidationError):
            channel_weights([1.0, -1.0], 2)

    def test_shape_errors(self):
        tpl = PaddedMultiplex.from_matrices(np.zeros((2, 4, 4)))
        bg = PaddedMultiplex.from_matrices(np.zeros((2, 3, 3)))
        with pytest.raises(OrderMismatch):
            objective(tpl, bg, [0, 1, 2])
        with pytest.raises(ChannelCountMismatch):
            objective(PaddedMultiplex.from_matrices(np.zeros((1, 3, 3))), bg, [0, 1, 2])

    @given(multiplexes(max_n=6), st.data())
    def test_relabel_invariance(self, g, data):
        n = g.n_total
        h = multiplexes_like(g, data)
        pi = np.array(data.draw(st.permutations(range(n))))
        perm = np.array(data.draw(st.permutations(range(n))))
        A, B = pad(g, n), pad(h, n, role=Role.BACKGROUND)
        A2, B2 = pad(g.relabel(pi), n), pad(h.relabel(pi), n, role=Role.BACKGROUND)
        # relabel both graphs: perm' = pi o perm o pi^-1
        inv = np.argsort(pi)
        perm2 = pi[perm[inv]]
        assert objective(A2, B2, perm2) == pytest.approx(objective(A, B, perm))

    @given(multiplexes(max_n=6), st.data())
    def test_centered_counts_disagreements(self, g, data):
        n = g.n_total
        full = validate_multiplex(n, [(range(n), ch.edges) for ch in g.channels])
        other = validate_multiplex(n, [(range(n), multiplexes_like(full, data).channels[i].edges)
                                       for i in range(full.c)])
        perm = np.array(data.draw(st.permutations(range(n))))
        val = objective(pad(full, n), pad(other, n, role=Role.BACKGROUND), perm)
        ordered = 0
        for i in range(full.c):
            A, B = full.adjacency(i), other.adjacency(i)
            for u, v in itertools.permutations(range(n), 2):
                ordered += A[u, v] != B[perm[u], perm[v]]
        assert val / 4 == ordered

    @given(multiplexes(max_n=6), st.data(), st.integers(0, 2))
    def test_trace_identity(self, g, data, extra):
        n = g.n_total + extra
        h = multiplexes_like(validate_multiplex(n, [(range(n), ())] * g.c), data)
        perm = np.array(data.draw(st.permutations(range(n))))
        A, B = pad(g, g.n_total), pad(h, n, role=Role.BACKGROUND)
        P = perm_matrix(perm)
        for i in range(g.c):
            Ae = embed_oplus_zero(A.matrices[i], n)
            lhs = np.linalg.norm(Ae @ P - P @ B.matrices[i]) ** 2
            rhs = (np.sum(Ae ** 2) + np.sum(B.matrices[i] ** 2)
                   - 2 * np.trace(Ae @ P @ B.matrices[i] @ P.T))
            assert lhs == pytest.approx(rhs, abs=1e-9)


def multiplexes_like(g, data):
    """Random multiplex on the same labels and channel vertex sets as ``g``."""
    chans = []
    for ch in g.channels:
        members = sorted(ch.vertices)
        pairs = list(itertools.combinations(members, 2))
        mask = data.draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
        chans.append((members, [e for e, keep in zip(pairs, mask) if keep]))
    return validate_multiplex(g.n_total, chans)

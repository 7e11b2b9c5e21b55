from math import gcd

from hypothesis import given, strategies as st

import oracles
from shiftlab import formats
from shiftlab.smith import abelian_group, bowen_franks, determinant, matmul, smith_normal_form

A = [[1, 1], [1, 1]]
A_PRIME = [[1, 1, 0, 0], [1, 1, 1, 0], [0, 1, 1, 1], [0, 0, 1, 1]]

square = st.integers(1, 4).flatmap(lambda n: st.lists(st.lists(st.integers(-4, 4), min_size=n, max_size=n), min_size=n, max_size=n))
rect = st.tuples(st.integers(1, 4), st.integers(1, 4)).flatmap(
    lambda rc: st.lists(st.lists(st.integers(-5, 5), min_size=rc[1], max_size=rc[1]), min_size=rc[0], max_size=rc[0])
)


@given(square)
def test_determinant_matches_cofactor_and_rational(m):
    d = determinant(m)
    assert d == oracles.cofactor_det(m) == oracles.rational_det(m)


@given(rect)
def test_snf_is_diagonal_and_divisible(m):
    diag, U, V = smith_normal_form(m)
    D = matmul(matmul(U, m), V)
    for i, row in enumerate(D):
        for j, v in enumerate(row):
            assert v == (diag[i] if i == j else 0)
    assert all(d >= 0 for d in diag)
    nz = [d for d in diag if d]
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    assert abs(determinant(U)) == 1 and abs(determinant(V)) == 1


@given(square)
def test_cokernel_order_is_abs_det(m):
    g = abelian_group(m)
    order = oracles.coker_order(m)
    if order is None:
        assert 0 in g.invariant_factors
    else:
        prod = 1
        for d in g.invariant_factors:
            prod *= d
        assert prod == order


@given(square)
def test_first_invariant_factor_is_entry_gcd(m):
    diag, _, _ = smith_normal_form(m)
    g = 0
    for row in m:
        for v in row:
            g = gcd(g, v)
    assert diag[0] == g


def test_intro_matrices_match_fixtures():
    assert formats.matrix_from_json(formats.load_doc("A"))[0].entries == tuple(map(tuple, A))
    assert formats.matrix_from_json(formats.load_doc("Aprime"))[0].entries == tuple(map(tuple, A_PRIME))


def test_intro_matrices():
    # oracle values: det(I - A) by cofactor expansion
    ima = [[1 - A[0][0], -A[0][1]], [-A[1][0], 1 - A[1][1]]]
    assert oracles.cofactor_det(ima) == -1
    bf = bowen_franks(A)
    assert bf.trivial and bf.determinant == -1
    bfp = bowen_franks(A_PRIME)
    assert bfp.trivial and bfp.determinant == 1
    assert str(bf) == "0"


def test_bowen_franks_examples():
    assert bowen_franks([[2]]).invariant_factors == ()
    assert bowen_franks([[3]]).invariant_factors == (2,)
    assert bowen_franks([[1]]).invariant_factors == (0,)
    assert str(bowen_franks([[0, 1], [1, 0]])) == "Z"
    assert str(bowen_franks([[1, 2], [2, 1]])) == "Z/2 + Z/2"

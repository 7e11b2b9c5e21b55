"""Smith normal form over the integers and Bowen-Franks data."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

Matrix = list[list[int]]


@dataclass(frozen=True)
class AbelianGroupPresentation:
    """``⊕ Z/d`` over the nontrivial invariant factors (0 means Z)."""

    invariant_factors: tuple[int, ...]
    determinant: int | None = None

    @property
    def trivial(self) -> bool:
        return not self.invariant_factors

    def isomorphic(self, other: "AbelianGroupPresentation") -> bool:
        return self.invariant_factors == other.invariant_factors

    def __str__(self) -> str:
        if self.trivial:
            return "0"
        return " + ".join("Z" if d == 0 else f"Z/{d}" for d in self.invariant_factors)


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    return [[sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))] for i in range(len(a))]


def determinant(m: Sequence[Sequence[int]]) -> int:
    """Fraction-free Bareiss elimination."""
    a = [list(map(int, r)) for r in m]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def smith_normal_form(m: Sequence[Sequence[int]]) -> tuple[list[int], Matrix, Matrix]:
    """Return (diagonal, U, V) with U·m·V diagonal and unimodular U, V.

    The diagonal entries are nonnegative and divide successively.
    """
    a = [list(map(int, r)) for r in m]
    rows, cols = len(a), len(a[0]) if a else 0
    U, V = identity(rows), identity(cols)

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    def add_row(src, dst, c):  # row dst += c * row src
        a[dst] = [x + c * y for x, y in zip(a[dst], a[src])]
        U[dst] = [x + c * y for x, y in zip(U[dst], U[src])]

    def add_col(src, dst, c):
        for r in a:
            r[dst] += c * r[src]
        for r in V:
            r[dst] += c * r[src]

    t = 0
    while t < min(rows, cols):
        nz = [(abs(a[i][j]), i, j) for i in range(t, rows) for j in range(t, cols) if a[i][j]]
        if not nz:
            break
        _, i, j = min(nz)
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            done = True
            for i in range(t + 1, rows):
                if a[i][t]:
                    add_row(t, i, -(a[i][t] // a[t][t]))
                    if a[i][t]:
                        swap_rows(t, i)
                        done = False
            for j in range(t + 1, cols):
                if a[t][j]:
                    add_col(t, j, -(a[t][j] // a[t][t]))
                    if a[t][j]:
                        swap_cols(t, j)
                        done = False
            if done:
                # divisibility: fold any offending row into row t and retry
                bad = next(
                    ((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols) if a[i][j] % a[t][t]),
                    None,
                )
                if bad is None:
                    break
                add_row(bad[0], t, 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    diag = [a[i][i] for i in range(min(rows, cols))]
    return diag, U, V


def abelian_group(m: Sequence[Sequence[int]]) -> AbelianGroupPresentation:
    """Cokernel of m viewed as a map Z^cols -> Z^rows."""
    diag, _, _ = smith_normal_form(m)
    rows = len(m)
    factors = [d for d in diag if d != 1] + [0] * (rows - len(diag))
    det = determinant(m) if m and len(m) == len(m[0]) else None
    return AbelianGroupPresentation(tuple(factors), det)


def bowen_franks(a: Sequence[Sequence[int]]) -> AbelianGroupPresentation:
    """coker(I - A) together with det(I - A)."""
    n = len(a)
    ima = [[int(i == j) - int(a[i][j]) for j in range(n)] for i in range(n)]
    return abelian_group(ima)

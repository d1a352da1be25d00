"""Smith normal form over the integers, with the column transform kept."""
from __future__ import annotations

from typing import List, Sequence, Tuple

Matrix = List[List[int]]


def smith_normal_form(rows: Sequence[Sequence[int]], ncols: int) -> Tuple[List[int], Matrix]:
    """Return ``(diag, V)`` with ``U @ A @ V == D`` for some unimodular ``U``.

    ``diag`` lists the non-zero invariant factors ``d_1 | d_2 | ...`` (all
    positive); ``V`` is the ``ncols x ncols`` unimodular column transform.
    """
    A = [list(map(int, r)) for r in rows if any(r)]
    m = len(A)
    V = [[int(i == j) for j in range(ncols)] for i in range(ncols)]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_col(src, dst, q):
        # column dst += q * column src
        for row in A:
            row[dst] += q * row[src]
        for row in V:
            row[dst] += q * row[src]

    diag = []
    t = 0
    while t < min(m, ncols):
        entries = [(abs(A[i][j]), i, j) for i in range(t, m) for j in range(t, ncols) if A[i][j]]
        if not entries:
            break
        _, pi, pj = min(entries)
        A[t], A[pi] = A[pi], A[t]
        swap_cols(t, pj)
        while True:
            done = True
            for i in range(t + 1, m):
                if A[i][t]:
                    q = A[i][t] // A[t][t]
                    A[i] = [a - q * b for a, b in zip(A[i], A[t])]
                    if A[i][t]:
                        A[t], A[i] = A[i], A[t]
                        done = False
            for j in range(t + 1, ncols):
                if A[t][j]:
                    q = A[t][j] // A[t][t]
                    add_col(t, j, -q)
                    if A[t][j]:
                        swap_cols(t, j)
                        done = False
            if not done:
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, ncols)
                        if A[i][j] % A[t][t]), None)
            if bad is None:
                break
            A[t] = [a + b for a, b in zip(A[t], A[bad[0]])]
        if A[t][t] < 0:
            A[t] = [-a for a in A[t]]
        diag.append(A[t][t])
        t += 1
    return diag, V


def row_times(x: Sequence, V: Matrix) -> list:
    n = len(V)
    return [sum(x[i] * V[i][j] for i in range(n)) for j in range(n)]

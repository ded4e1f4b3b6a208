import random
from fractions import Fraction

from bqkit.snf import RowLattice, smith_normal_form


def det(mat):
    n = len(mat)
    m = [[Fraction(x) for x in row] for row in mat]
    sign = 1
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col]), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            sign = -sign
        for r in range(col + 1, n):
            f = m[r][col] / m[col][col]
            m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    out = Fraction(sign)
    for i in range(n):
        out *= m[i][i]
    return out


def mat_mul(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(len(b)))
             for j in range(len(b[0]))] for i in range(len(a))]


def test_known_cases():
    diag, _ = smith_normal_form([[2, 4, 4], [-6, 6, 12], [10, 4, 16]])
    assert diag == [2, 2, 156]
    diag, _ = smith_normal_form([[1, -1]])
    assert diag == [1]
    diag, _ = smith_normal_form([[-1, -1], [-1, 1]])
    assert diag == [1, 2]
    diag, _ = smith_normal_form([[0, 0], [0, 0]])
    assert diag == []


def test_random_matrices_properties():
    rng = random.Random(20260808)
    for _ in range(60):
        m = rng.randint(1, 5)
        n = rng.randint(1, 5)
        mat = [[rng.randint(-9, 9) for _ in range(n)] for _ in range(m)]
        diag, v = smith_normal_form(mat)
        assert abs(det(v)) == 1
        for d1, d2 in zip(diag, diag[1:]):
            assert d1 > 0 and d2 % d1 == 0
        # row lattice of M * V equals the diagonal lattice
        mv = mat_mul(mat, v)
        lattice = RowLattice(mv, n)
        for k, d in enumerate(diag):
            e = [0] * n
            e[k] = d
            assert lattice.contains(e)
            if d > 1:
                e[k] = 1
                assert not lattice.contains(e)


def test_row_lattice_membership_and_image():
    lat = RowLattice([[-1, -1], [-1, 1]], 2)
    assert lat.invariants() == (0, (2,))
    assert lat.contains([-1, -1])
    assert lat.contains([0, 2])
    assert not lat.contains([-1, 0])
    assert any(lat.image([-1, 0]))
    assert not any(lat.image([2, 0]))


def test_row_lattice_membership_matches_brute_force():
    rng = random.Random(7)
    for _ in range(40):
        rows = [[rng.randint(-3, 3) for _ in range(3)] for _ in range(2)]
        lat = RowLattice(rows, 3)
        span = set()
        for x in range(-4, 5):
            for y in range(-4, 5):
                v = tuple(x * rows[0][i] + y * rows[1][i] for i in range(3))
                span.add(v)
        for vec in span:
            if all(abs(c) <= 6 for c in vec):
                assert lat.contains(list(vec))
        for _ in range(20):
            probe = [rng.randint(-2, 2) for _ in range(3)]
            if lat.contains(probe):
                # verified the other way: solve brute force over a window
                found = any(
                    all(x * rows[0][i] + y * rows[1][i] == probe[i] for i in range(3))
                    for x in range(-30, 31) for y in range(-30, 31))
                assert found


def test_empty_lattice():
    lat = RowLattice([], 3)
    assert lat.invariants() == (3, ())
    assert lat.contains([0, 0, 0])
    assert not lat.contains([1, 0, 0])

import pytest

from bqkit.dsl import parse_source
from bqkit.fields import Field
from bqkit.ideal import close_ideal, make_relation
from bqkit.quiver import Arrow, Quiver, paths_between


def make_random_bound_quiver(rng, char=0, max_vertices=6):
    """Random connected acyclic quiver plus a random admissible ideal."""
    n = rng.randint(3, max_vertices)
    vertices = tuple(str(i) for i in range(1, n + 1))
    arrows = []
    names = iter("abcdefghijklmnopqrstuv")
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            for _ in range(rng.choice([0, 1, 1, 2])):
                if rng.random() < 0.6:
                    arrows.append(Arrow(next(names), str(i), str(j)))
    if not arrows:
        arrows.append(Arrow(next(names), "1", "2"))
    quiver = Quiver("rand", vertices, tuple(arrows))
    adj = {v: set() for v in vertices}
    for a in arrows:
        adj[a.source].add(a.target)
        adj[a.target].add(a.source)
    seen, todo = {vertices[0]}, [vertices[0]]
    while todo:
        v = todo.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                todo.append(w)
    if seen != set(vertices):
        extra = []
        prev = None
        for v in vertices:
            if prev is not None and (v not in seen or prev not in seen):
                extra.append(Arrow(next(names), prev, v))
            prev = v
        quiver = Quiver("rand", vertices, tuple(arrows) + tuple(extra))

    fld = Field(char)
    gens = []
    for x in quiver.vertices:
        for y in quiver.vertices:
            pool = [p for p in paths_between(quiver, x, y) if len(p) >= 2]
            if len(pool) >= 1 and rng.random() < 0.5:
                terms = []
                for p in pool:
                    if rng.random() < 0.7:
                        c = fld.scalar(rng.choice([1, 1, -1, 2]))
                        terms.append((p, c))
                if terms:
                    gens.append(make_relation(quiver, fld, x, y, terms))
    return close_ideal(quiver, fld, gens)

FOUR_VERTEX = """
quiver exple1 {
  vertices: 1 2 3 4;
  arrow a: 1 -> 3;
  arrow b: 1 -> 2;
  arrow c: 2 -> 3;
  arrow d: 3 -> 4;
}
ideal I over exple1(0) { rel d*a; }
ideal J over exple1(0) { rel d*a - d*c*b; }
"""

TWO_BYPASS = """
quiver twobypass {
  vertices: 1 2 3 4 5;
  arrow a: 1 -> 3;
  arrow b: 1 -> 2;
  arrow c: 2 -> 3;
  arrow d: 3 -> 5;
  arrow e: 3 -> 4;
  arrow f: 4 -> 5;
}
# u = c*b, v = f*e
ideal I0 over twobypass(0) { rel d*a + f*e*c*b; rel f*e*a + d*c*b; }
ideal I1 over twobypass(0) { rel d*a + d*c*b + f*e*c*b; rel f*e*a + d*c*b + f*e*c*b; }
ideal I2 over twobypass(0) { rel d*a; rel f*e*a + d*c*b - 2*f*e*c*b; }
"""


@pytest.fixture(scope="session")
def ws4():
    return parse_source(FOUR_VERTEX)


@pytest.fixture(scope="session")
def exple1(ws4):
    return ws4.quiver("exple1")


@pytest.fixture(scope="session")
def ideal_I(ws4):
    return ws4.ideal("I")


@pytest.fixture(scope="session")
def ideal_J(ws4):
    return ws4.ideal("J")


@pytest.fixture(scope="session")
def ws5():
    return parse_source(TWO_BYPASS)


@pytest.fixture(scope="session")
def twobypass(ws5):
    return ws5.quiver("twobypass")


@pytest.fixture(scope="session")
def ideal_I0(ws5):
    return ws5.ideal("I0")


@pytest.fixture(scope="session")
def ideal_I1(ws5):
    return ws5.ideal("I1")


@pytest.fixture(scope="session")
def ideal_I2(ws5):
    return ws5.ideal("I2")


@pytest.fixture(scope="session")
def rationals():
    return Field(0)

"""Finite acyclic quivers, their paths and walks, and the bypass structure.

Conventions: a path stores its arrows in application order (first arrow
applied first); the printed form lists them the other way around, so the
path that applies b, then c, then d prints as ``d*c*b``.  All canonical
orderings derive from declaration order of vertices and arrows, never
from lexicography of the ids themselves, so renaming ids never changes
any result.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .errors import QuiverError

FORWARD = 1
INVERSE = -1


@dataclass(frozen=True)
class Arrow:
    name: str
    source: str
    target: str


@dataclass(frozen=True)
class Quiver:
    """A finite quiver without oriented cycles."""

    name: str
    vertices: tuple
    arrows: tuple

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "arrows", tuple(self.arrows))
        seen = set()
        for v in self.vertices:
            if v in seen:
                raise QuiverError("duplicate vertex id %r" % v)
            seen.add(v)
        vset = set(self.vertices)
        names = set()
        for a in self.arrows:
            if a.name in names or a.name in vset:
                raise QuiverError("duplicate id %r" % a.name)
            names.add(a.name)
            if a.source not in vset:
                raise QuiverError("arrow %r has dangling source %r" % (a.name, a.source))
            if a.target not in vset:
                raise QuiverError("arrow %r has dangling target %r" % (a.name, a.target))
        self._check_acyclic()

    def _check_acyclic(self):
        outgoing = {v: [] for v in self.vertices}
        for a in self.arrows:
            outgoing[a.source].append(a.target)
        state = {}

        def visit(v, stack):
            state[v] = "open"
            stack.append(v)
            for w in outgoing[v]:
                if state.get(w) == "open":
                    cycle = stack[stack.index(w):] + [w]
                    raise QuiverError("oriented cycle through %s" % " -> ".join(cycle))
                if w not in state:
                    visit(w, stack)
            stack.pop()
            state[v] = "done"

        for v in self.vertices:
            if v not in state:
                visit(v, [])

    # -- lookups ---------------------------------------------------------

    def arrow(self, name: str) -> Arrow:
        for a in self.arrows:
            if a.name == name:
                return a
        raise QuiverError("no arrow named %r in quiver %r" % (name, self.name))

    def has_vertex(self, v) -> bool:
        return v in self.vertices

    def arrow_index(self, name: str) -> int:
        for i, a in enumerate(self.arrows):
            if a.name == name:
                return i
        raise QuiverError("no arrow named %r in quiver %r" % (name, self.name))

    def arrows_from(self, v):
        return [a for a in self.arrows if a.source == v]

    def arrows_into(self, v):
        return [a for a in self.arrows if a.target == v]

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        adj = {v: [] for v in self.vertices}
        for a in self.arrows:
            adj[a.source].append(a.target)
            adj[a.target].append(a.source)
        seen = {self.vertices[0]}
        todo = [self.vertices[0]]
        while todo:
            v = todo.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
        return len(seen) == len(self.vertices)


@dataclass(frozen=True)
class Path:
    """An oriented path; ``arrows`` in application order, possibly empty."""

    source: str
    target: str
    arrows: tuple

    def __post_init__(self):
        # paths key every hot dictionary in the ideal layer
        object.__setattr__(self, "_hash",
                           hash((self.source, self.target, self.arrows)))

    def __hash__(self):
        return self._hash

    def __len__(self):
        return len(self.arrows)

    @property
    def is_trivial(self):
        return not self.arrows

    def to_text(self) -> str:
        if not self.arrows:
            return "e_%s" % self.source
        return "*".join(reversed(self.arrows))

    def __str__(self):
        return self.to_text()


def trivial_path(quiver: Quiver, x) -> Path:
    if not quiver.has_vertex(x):
        raise QuiverError("no vertex %r" % (x,))
    return Path(x, x, ())


def make_path(quiver: Quiver, arrow_names) -> Path:
    """Build a path from arrow names in application order."""
    arrow_names = tuple(arrow_names)
    if not arrow_names:
        raise QuiverError("a path needs at least one arrow; use trivial_path")
    arrows = [quiver.arrow(n) for n in arrow_names]
    for first, second in zip(arrows, arrows[1:]):
        if second.source != first.target:
            raise QuiverError(
                "arrows %s and %s do not compose" % (first.name, second.name))
    return Path(arrows[0].source, arrows[-1].target, arrow_names)


def compose_paths(quiver: Quiver, later: Path, earlier: Path) -> Path:
    """The path "later after earlier" (written later*earlier)."""
    if earlier.target != later.source:
        raise QuiverError("paths do not compose: %s then %s" % (earlier, later))
    return Path(earlier.source, later.target, earlier.arrows + later.arrows)


@lru_cache(maxsize=None)
def _arrow_indices(quiver: Quiver):
    return {a.name: i for i, a in enumerate(quiver.arrows)}


@lru_cache(maxsize=None)
def path_key(quiver: Quiver, path: Path):
    """Canonical total order: length, then lex on the written form."""
    idx = _arrow_indices(quiver)
    return (len(path.arrows), tuple(idx[a] for a in reversed(path.arrows)))


@dataclass(frozen=True)
class Walk:
    """An unoriented path: letters are (arrow name, FORWARD|INVERSE)."""

    source: str
    target: str
    letters: tuple

    def __len__(self):
        return len(self.letters)

    def inverse(self) -> "Walk":
        return Walk(self.target, self.source,
                    tuple((a, -d) for a, d in reversed(self.letters)))

    def reduced(self) -> "Walk":
        """Freely reduce: cancel adjacent (letter, formal inverse) pairs."""
        out = []
        for letter in self.letters:
            if out and out[-1][0] == letter[0] and out[-1][1] == -letter[1]:
                out.pop()
            else:
                out.append(letter)
        return Walk(self.source, self.target, tuple(out))

    def is_reduced(self) -> bool:
        return all(not (a[0] == b[0] and a[1] == -b[1])
                   for a, b in zip(self.letters, self.letters[1:]))

    def to_text(self) -> str:
        if not self.letters:
            return "e_%s" % self.source
        parts = []
        for name, d in reversed(self.letters):
            parts.append(name if d == FORWARD else name + "^-1")
        return "*".join(parts)

    def __str__(self):
        return self.to_text()


def trivial_walk(quiver: Quiver, x) -> Walk:
    if not quiver.has_vertex(x):
        raise QuiverError("no vertex %r" % (x,))
    return Walk(x, x, ())


def make_walk(quiver: Quiver, letters) -> Walk:
    """Build a walk from (arrow name, direction) letters in application order."""
    letters = tuple(letters)
    if not letters:
        raise QuiverError("a walk needs at least one letter; use trivial_walk")
    ends = []
    for name, d in letters:
        a = quiver.arrow(name)
        if d == FORWARD:
            ends.append((a.source, a.target))
        elif d == INVERSE:
            ends.append((a.target, a.source))
        else:
            raise QuiverError("bad letter direction %r" % (d,))
    for (_, t1), (s2, _) in zip(ends, ends[1:]):
        if t1 != s2:
            raise QuiverError("walk letters do not chain")
    return Walk(ends[0][0], ends[-1][1], letters)


def walk_of_path(path: Path) -> Walk:
    return Walk(path.source, path.target,
                tuple((a, FORWARD) for a in path.arrows))


def compose_walks(quiver: Quiver, later: Walk, earlier: Walk) -> Walk:
    if earlier.target != later.source:
        raise QuiverError("walks do not compose: %s then %s" % (earlier, later))
    return Walk(earlier.source, later.target, earlier.letters + later.letters)


def path_of_walk(quiver: Quiver, walk: Walk):
    """The path with the same letters if the walk is all-forward, else None."""
    if any(d != FORWARD for _, d in walk.letters):
        return None
    if not walk.letters:
        return trivial_path(quiver, walk.source)
    return make_path(quiver, [a for a, _ in walk.letters])


@dataclass(frozen=True)
class Bypass:
    """An arrow together with a distinct parallel path."""

    arrow: str
    path: Path


@lru_cache(maxsize=None)
def enumerate_paths(quiver: Quiver):
    """All paths of the quiver, sorted by the canonical total order."""
    paths = [trivial_path(quiver, x) for x in quiver.vertices]
    frontier = [Path(a.source, a.target, (a.name,)) for a in quiver.arrows]
    while frontier:
        paths.extend(frontier)
        nxt = []
        for p in frontier:
            for a in quiver.arrows_from(p.target):
                nxt.append(Path(p.source, a.target, p.arrows + (a.name,)))
        frontier = nxt
    paths.sort(key=lambda p: path_key(quiver, p))
    return tuple(paths)


@lru_cache(maxsize=None)
def paths_between(quiver: Quiver, x, y):
    """Paths from x to y in canonical order (the hom-pair basis)."""
    return tuple(p for p in enumerate_paths(quiver)
                 if p.source == x and p.target == y)


@lru_cache(maxsize=None)
def longest_path_length(quiver: Quiver) -> int:
    return max((len(p) for p in enumerate_paths(quiver)), default=0)


def find_bypasses(quiver: Quiver):
    """All bypasses (arrow, parallel path != the arrow), deterministic order."""
    out = []
    for a in quiver.arrows:
        for p in paths_between(quiver, a.source, a.target):
            if p.arrows == (a.name,) or p.is_trivial:
                continue
            out.append(Bypass(a.name, p))
    return out


def find_double_bypasses(quiver: Quiver):
    """All pairs of bypasses ((a,u),(b,v)) where b is an arrow of u."""
    bypasses = find_bypasses(quiver)
    out = []
    for b1 in bypasses:
        for b2 in bypasses:
            if b2.arrow in b1.path.arrows:
                out.append((b1, b2))
    return out

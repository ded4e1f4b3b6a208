"""The homotopy relation on walks, fundamental groups, and the tri-state
homotopy decision procedure.

A positive answer always comes with a replayable chain of elementary
moves; a negative answer comes with a nonzero image in the abelianized
fundamental group (or, optionally, in a finite coset action).  Whatever
cannot be certified either way within the caps is reported Unknown, never
guessed.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from . import coset
from .errors import HomotopyError, UnresolvedError
from .ideal import Ideal
from .quiver import (FORWARD, INVERSE, Quiver, Walk, longest_path_length,
                     enumerate_paths, path_key, paths_between, walk_of_path)

HOMOTOPIC = "homotopic"
NOT_HOMOTOPIC = "not-homotopic"
UNKNOWN = "unknown"

DEFAULT_MAX_STATES = 40_000


def walk_reduce(walk: Walk) -> Walk:
    """Freely reduce a walk (cancel adjacent formal-inverse pairs)."""
    return walk.reduced()


@dataclass(frozen=True)
class MoveStep:
    """One elementary move of a homotopy chain.

    kind "delete": remove the cancelling pair at letter index ``position``;
    kind "insert": insert the two ``data`` letters at ``position``;
    kind "replace": substitute ``data[1]`` for the occurrence of
    ``data[0]`` at ``position``.  ``result`` is the walk after the move.
    """

    kind: str
    position: int
    data: tuple
    result: Walk

    def apply_to(self, walk: Walk) -> Walk:
        letters = walk.letters
        i = self.position
        if self.kind == "delete":
            a, b = letters[i], letters[i + 1]
            if a[0] != b[0] or a[1] != -b[1]:
                raise HomotopyError("delete step does not match a cancelling pair")
            new = letters[:i] + letters[i + 2:]
        elif self.kind == "insert":
            new = letters[:i] + self.data + letters[i:]
        elif self.kind == "replace":
            src, dst = self.data
            if letters[i:i + len(src)] != src:
                raise HomotopyError("replace step does not match the walk")
            new = letters[:i] + dst + letters[i + len(src):]
        else:
            raise HomotopyError("unknown move kind %r" % self.kind)
        return Walk(walk.source, walk.target, new)


@dataclass(frozen=True)
class Decision:
    """Outcome of a homotopy query.

    For a homotopic pair, ``chain`` replays elementary moves from u to v;
    it is None when the positive answer was certified through a completed
    coset action instead (finite fundamental group), in which case the
    certificate describes the table.
    """

    status: str
    chain: tuple | None = ()
    certificate: dict | None = None

    @property
    def is_homotopic(self):
        return self.status == HOMOTOPIC

    @property
    def is_not_homotopic(self):
        return self.status == NOT_HOMOTOPIC

    @property
    def is_unknown(self):
        return self.status == UNKNOWN


@dataclass(frozen=True)
class GroupPresentation:
    """Chord generators, relator words, and abelian invariants."""

    generators: tuple
    relators: tuple  # each relator: ((generator, +-1), ...), reduced
    abelian_invariants: tuple  # (free rank, (d1, d2, ...))

    def exponent_rows(self):
        index = {g: i for i, g in enumerate(self.generators)}
        rows = []
        for rel in self.relators:
            row = [0] * len(self.generators)
            for g, e in rel:
                row[index[g]] += e
            rows.append(row)
        return rows


def abelianization(gp: GroupPresentation):
    """(free rank, invariant torsion factors) of the presented group."""
    from .snf import RowLattice

    lattice = RowLattice(gp.exponent_rows(), len(gp.generators))
    return lattice.invariants()


def _free_reduce_word(word):
    out = []
    for g, e in word:
        if out and out[-1][0] == g and out[-1][1] == -e:
            out.pop()
        else:
            out.append((g, e))
    return tuple(out)


def _invert_word(word):
    return tuple((g, -e) for g, e in reversed(word))


class SpanningTree:
    """BFS tree over the underlying graph, edges in declaration order."""

    def __init__(self, quiver: Quiver, x0):
        self.quiver = quiver
        self.x0 = x0
        parent = {x0: None}
        order = [x0]
        queue = deque([x0])
        tree_arrows = set()
        while queue:
            v = queue.popleft()
            for a in quiver.arrows:
                if a.source == v and a.target not in parent:
                    parent[a.target] = (a.name, FORWARD)
                    tree_arrows.add(a.name)
                    order.append(a.target)
                    queue.append(a.target)
                elif a.target == v and a.source not in parent:
                    parent[a.source] = (a.name, INVERSE)
                    tree_arrows.add(a.name)
                    order.append(a.source)
                    queue.append(a.source)
        if len(parent) != len(quiver.vertices):
            missing = [v for v in quiver.vertices if v not in parent]
            raise HomotopyError("quiver is not connected; unreachable: %s"
                                % ", ".join(missing))
        self._parent = parent
        self.tree_arrows = frozenset(tree_arrows)
        self.chords = tuple(a.name for a in quiver.arrows
                            if a.name not in tree_arrows)

    def walk_from_root(self, v) -> Walk:
        letters = []
        cur = v
        while self._parent[cur] is not None:
            name, d = self._parent[cur]
            letters.append((name, d))
            a = self.quiver.arrow(name)
            cur = a.source if d == FORWARD else a.target
        letters.reverse()
        return Walk(self.x0, v, tuple(letters))

    def chord_word(self, walk: Walk):
        """Image of a walk under the retraction onto the chords.

        Words are stored in composition order (leftmost letter applied
        last), so concatenation of walks maps to concatenation of words.
        """
        word = [(name, d) for name, d in reversed(walk.letters)
                if name not in self.tree_arrows]
        return _free_reduce_word(word)


class HomotopyRelation:
    """The homotopy relation of a bound quiver presentation."""

    def __init__(self, ideal: Ideal, x0=None, coset_fallback=False,
                 cap=None, max_states=DEFAULT_MAX_STATES):
        from .snf import RowLattice

        self.ideal = ideal
        self.quiver = ideal.quiver
        if x0 is None:
            x0 = self.quiver.vertices[0]
        if not self.quiver.has_vertex(x0):
            raise HomotopyError("no vertex %r" % (x0,))
        self.base_point = x0
        self.coset_fallback = coset_fallback
        self.default_cap = cap or (2 * longest_path_length(self.quiver) + 4)
        self.max_states = max_states

        self.tree = SpanningTree(self.quiver, x0)
        self.generating_pairs = self._generating_pairs()
        self.presentation = self._presentation()
        self._lattice = RowLattice(self.presentation.exponent_rows(),
                                   len(self.presentation.generators))
        self._patterns = self._replacement_patterns()
        self._decisions = {}
        self._coset_table = None
        self._coset_tried = False
        self._path_classes = self._congruence_closure()
        self.fingerprint = self._fingerprint()

    # -- construction ------------------------------------------------------

    def _generating_pairs(self):
        pairs = []
        for rel in self.ideal.minimal_relations():
            supp = rel.support()
            for i in range(len(supp)):
                for j in range(i + 1, len(supp)):
                    pairs.append((supp[i], supp[j]))
        return tuple(pairs)

    def _presentation(self):
        relators = []
        for u, v in self.generating_pairs:
            word = _free_reduce_word(
                self.tree.chord_word(walk_of_path(u))
                + _invert_word(self.tree.chord_word(walk_of_path(v))))
            if word:
                relators.append(word)
        gens = self.tree.chords
        gp = GroupPresentation(gens, tuple(relators), (0, ()))
        return GroupPresentation(gens, tuple(relators), abelianization(gp))

    def _replacement_patterns(self):
        patterns = []
        seen = set()
        for u, v in self.generating_pairs:
            fu = walk_of_path(u).letters
            fv = walk_of_path(v).letters
            iu = walk_of_path(u).inverse().letters
            iv = walk_of_path(v).inverse().letters
            for src, dst in ((fu, fv), (fv, fu), (iu, iv), (iv, iu)):
                if src != dst and (src, dst) not in seen:
                    seen.add((src, dst))
                    patterns.append((src, dst))
        return tuple(patterns)

    def _congruence_closure(self):
        """Union-find over paths: generating pairs, closed under composition
        with arrows and under cancellation of a shared first or last arrow
        (both derivable because the relation on walks is compatible with
        concatenation)."""
        from .quiver import Path

        paths = enumerate_paths(self.quiver)
        arrow = {a.name: a for a in self.quiver.arrows}
        parent = {p: p for p in paths}

        def find(p):
            while parent[p] != p:
                parent[p] = parent[parent[p]]
                p = parent[p]
            return p

        def union(p, q):
            rp, rq = find(p), find(q)
            if rp != rq:
                parent[rp] = rq
                return True
            return False

        for u, v in self.generating_pairs:
            union(u, v)
        changed = True
        while changed:
            changed = False
            classes = {}
            for p in paths:
                classes.setdefault(find(p), []).append(p)
            for members in classes.values():
                for i in range(len(members)):
                    for j in range(i + 1, len(members)):
                        p, q = members[i], members[j]
                        if (p.source, p.target) != (q.source, q.target):
                            continue
                        for a in self.quiver.arrows_from(p.target):
                            ap = Path(p.source, a.target, p.arrows + (a.name,))
                            aq = Path(q.source, a.target, q.arrows + (a.name,))
                            if union(ap, aq):
                                changed = True
                        for b in self.quiver.arrows_into(p.source):
                            pb = Path(b.source, p.target, (b.name,) + p.arrows)
                            qb = Path(b.source, q.target, (b.name,) + q.arrows)
                            if union(pb, qb):
                                changed = True
                        if p.arrows and q.arrows and p.arrows != q.arrows:
                            if p.arrows[0] == q.arrows[0]:
                                mid = arrow[p.arrows[0]].target
                                tp = Path(mid, p.target, p.arrows[1:])
                                tq = Path(mid, q.target, q.arrows[1:])
                                if union(tp, tq):
                                    changed = True
                            if p.arrows[-1] == q.arrows[-1]:
                                mid = arrow[p.arrows[-1]].source
                                ip = Path(p.source, mid, p.arrows[:-1])
                                iq = Path(q.source, mid, q.arrows[:-1])
                                if union(ip, iq):
                                    changed = True
        return {p: find(p) for p in paths}

    def _fingerprint(self):
        tags = {}
        for x in self.quiver.vertices:
            for y in self.quiver.vertices:
                paths = paths_between(self.quiver, x, y)
                for i in range(len(paths)):
                    for j in range(i + 1, len(paths)):
                        u, v = paths[i], paths[j]
                        if self._path_classes[u] == self._path_classes[v]:
                            tags[(u, v)] = HOMOTOPIC
                            continue
                        d = self.decide(walk_of_path(u), walk_of_path(v),
                                        want_chain=False)
                        tags[(u, v)] = d.status
        # consistency: transitively close the Homotopic classes
        parent = {}

        def find(p):
            while parent[p] != p:
                parent[p] = parent[parent[p]]
                p = parent[p]
            return p

        for (u, v), tag in tags.items():
            parent.setdefault(u, u)
            parent.setdefault(v, v)
            if tag == HOMOTOPIC:
                parent[find(u)] = find(v)
        for (u, v), tag in tags.items():
            if find(u) == find(v):
                if tag == NOT_HOMOTOPIC:
                    raise HomotopyError(
                        "inconsistent homotopy certificates for %s and %s" % (u, v))
                tags[(u, v)] = HOMOTOPIC
        return tags

    # -- queries -----------------------------------------------------------

    def pair_status(self, u, v) -> str:
        """Fingerprint classification of a parallel path pair."""
        if u == v:
            return HOMOTOPIC
        if (u, v) in self.fingerprint:
            return self.fingerprint[(u, v)]
        if (v, u) in self.fingerprint:
            return self.fingerprint[(v, u)]
        raise HomotopyError("pair (%s, %s) is not a parallel path pair" % (u, v))

    def loop_exponents(self, u: Walk, v: Walk):
        """Net chord exponents of the loop u * v^-1 (order irrelevant
        in the abelianization, so no conjugation is needed)."""
        vec = [0] * len(self.presentation.generators)
        index = {g: i for i, g in enumerate(self.presentation.generators)}
        for name, d in u.letters:
            if name in index:
                vec[index[name]] += d
        for name, d in v.letters:
            if name in index:
                vec[index[name]] -= d
        return vec

    def abelian_image(self, u: Walk, v: Walk):
        return self._lattice.image(self.loop_exponents(u, v))

    def decide(self, u: Walk, v: Walk, cap=None, want_chain=True) -> Decision:
        """Tri-state decision for parallel walks u, v."""
        if (u.source, u.target) != (v.source, v.target):
            raise HomotopyError("walks are not parallel: %s -> %s vs %s -> %s"
                                % (u.source, u.target, v.source, v.target))
        cap = cap or self.default_cap
        memo_key = (u, v, cap)
        hit = self._decisions.get(memo_key)
        if hit is not None and (hit.status != HOMOTOPIC or not want_chain
                                or hit.chain is None or hit.chain or u == v):
            return hit
        decision = self._decide(u, v, cap, want_chain)
        self._decisions[memo_key] = decision
        return decision

    def _decide(self, u, v, cap, want_chain):
        u_red = u.reduced()
        v_red = v.reduced()
        glue_u = _reduction_steps(u) if want_chain else ()
        glue_v = _reduction_steps(v) if want_chain else ()

        if u_red == v_red:
            chain = glue_u + _invert_steps(v, glue_v) if want_chain else ()
            return Decision(HOMOTOPIC, tuple(chain))

        if not self.presentation.relators:
            # no relations at all: distinct reduced walks are inequivalent
            cert = {"kind": "free", "reduced": (u_red.to_text(), v_red.to_text())}
            return Decision(NOT_HOMOTOPIC, (), cert)

        image = self.abelian_image(u_red, v_red)
        if any(image):
            cert = {
                "kind": "abelianization",
                "loop_exponents": tuple(self.loop_exponents(u_red, v_red)),
                "image": tuple(image),
                "moduli": tuple(self._lattice.diag),
                "generators": self.presentation.generators,
            }
            return Decision(NOT_HOMOTOPIC, (), cert)

        if not want_chain and self.coset_fallback:
            verdict = self._coset_verdict(u_red, v_red)
            if verdict is not None:
                return verdict

        found = self._bfs(u_red, v_red, cap, want_chain)
        if found is not None:
            chain = (glue_u + found + _invert_steps(v, glue_v)) if want_chain else ()
            return Decision(HOMOTOPIC, tuple(chain))

        if self.coset_fallback:
            verdict = self._coset_verdict(u_red, v_red)
            if verdict is not None:
                return verdict
        return Decision(UNKNOWN)

    def _coset_verdict(self, u_red, v_red):
        """Full decision through the regular coset action, if it completed."""
        table = self._cosets()
        if table is None:
            return None
        word = _free_reduce_word(
            self.tree.chord_word(u_red)
            + _invert_word(self.tree.chord_word(v_red)))
        signed = self._signed_word(word)
        if table.is_nontrivial(signed):
            cert = {"kind": "coset-action", "order": table.order, "word": signed}
            return Decision(NOT_HOMOTOPIC, (), cert)
        cert = {"kind": "coset-trivial", "order": table.order, "word": signed}
        return Decision(HOMOTOPIC, None, cert)

    def _signed_word(self, word):
        index = {g: i + 1 for i, g in enumerate(self.presentation.generators)}
        return tuple(index[g] * e for g, e in word)

    def _cosets(self):
        if not self._coset_tried:
            self._coset_tried = True
            relators = [self._signed_word(r) for r in self.presentation.relators]
            table = coset.enumerate_cosets(
                len(self.presentation.generators), relators)
            if table is not None and not table.verify(relators):
                raise HomotopyError("coset table failed its consistency check")
            self._coset_table = table
        return self._coset_table

    def _bfs(self, start: Walk, goal: Walk, cap, want_chain):
        """Breadth-first search through rewriting moves on reduced walks.

        A move substitutes x^-1 * q * y^-1 for an occurrence of s, where
        p = x * s * y runs over all contiguous splittings of a pattern
        (s may be empty) -- the reduced shadow of any chain of elementary
        moves, so the search is complete up to the caps.  Returns the
        elementary expansion of the found move sequence, or None.
        """
        if len(start.letters) > cap or len(goal.letters) > cap:
            cap = max(cap, len(start.letters), len(goal.letters))
        seen = {start: None}
        queue = deque([start])
        while queue:
            if len(seen) > self.max_states:
                return None
            w = queue.popleft()
            for nxt, move in self._rewrites(w, cap):
                if nxt in seen:
                    continue
                seen[nxt] = (w, move)
                if nxt == goal:
                    if not want_chain:
                        return ()
                    moves = []
                    cur = nxt
                    while seen[cur] is not None:
                        prev, mv = seen[cur]
                        moves.append((prev, mv))
                        cur = prev
                    moves.reverse()
                    chain = []
                    for prev, mv in moves:
                        chain.extend(_expand_rewrite(prev, *mv))
                    return tuple(chain)
                queue.append(nxt)
        return None

    def _rewrites(self, w: Walk, cap):
        quiver = self.quiver
        letters = w.letters
        n = len(letters)
        vertices = [w.source]
        for name, d in letters:
            a = quiver.arrow(name)
            vertices.append(a.target if d == FORWARD else a.source)
        produced = set()
        for psrc, pdst in self._patterns:
            np_ = len(psrc)
            pverts = [_pattern_source(quiver, psrc)]
            for name, d in psrc:
                a = quiver.arrow(name)
                pverts.append(a.target if d == FORWARD else a.source)
            for a_idx in range(np_ + 1):
                for b_idx in range(a_idx, np_ + 1):
                    y = psrc[:a_idx]
                    s = psrc[a_idx:b_idx]
                    x = psrc[b_idx:]
                    replacement = (_invert_letters(y) + pdst + _invert_letters(x))
                    if s:
                        positions = [i for i in range(n - len(s) + 1)
                                     if letters[i:i + len(s)] == s]
                    else:
                        anchor = pverts[a_idx]
                        positions = [i for i in range(n + 1)
                                     if vertices[i] == anchor]
                    for i in positions:
                        raw = letters[:i] + replacement + letters[i + len(s):]
                        nxt = Walk(w.source, w.target, raw).reduced()
                        if nxt == w or len(nxt.letters) > cap:
                            continue
                        if nxt in produced:
                            continue
                        produced.add(nxt)
                        yield nxt, (i, y, s, x, pdst)


def _reduction_steps(walk: Walk):
    """Delete-steps taking a walk to its free reduction."""
    steps = []
    cur = walk
    while True:
        letters = cur.letters
        hit = None
        for i in range(len(letters) - 1):
            if letters[i][0] == letters[i + 1][0] and letters[i][1] == -letters[i + 1][1]:
                hit = i
                break
        if hit is None:
            return tuple(steps)
        nxt = Walk(cur.source, cur.target,
                   letters[:hit] + letters[hit + 2:])
        steps.append(MoveStep("delete", hit, (), nxt))
        cur = nxt


def _invert_steps(original: Walk, steps):
    """Inverse of a delete-chain: insertions restoring ``original``."""
    out = []
    cur = original
    walks = [cur]
    for st in steps:
        walks.append(st.result)
    for st, before in zip(reversed(steps), reversed(walks[:-1])):
        i = st.position
        pair = before.letters[i:i + 2]
        out.append(MoveStep("insert", i, pair, before))
    return tuple(out)


def _invert_letters(letters):
    return tuple((name, -d) for name, d in reversed(letters))


def _pattern_source(quiver, letters):
    name, d = letters[0]
    a = quiver.arrow(name)
    return a.source if d == FORWARD else a.target


def _expand_rewrite(before: Walk, i, y, s, x, pdst):
    """Elementary moves realizing one rewriting step.

    Around the occurrence of s at position i, cancelling pairs build up
    y^-1*y in front and x*x^-1 behind, so that the full pattern y+s+x
    appears and can be replaced by pdst; free reduction finishes.
    """
    steps = []
    cur = before
    k = len(y)
    l = len(x)
    for j in range(k, 0, -1):
        lj = y[j - 1]
        pair = ((lj[0], -lj[1]), lj)
        pos = i + (k - j)
        cur = Walk(cur.source, cur.target,
                   cur.letters[:pos] + pair + cur.letters[pos:])
        steps.append(MoveStep("insert", pos, pair, cur))
    base = i + 2 * k + len(s)
    for j in range(1, l + 1):
        lj = x[j - 1]
        pair = (lj, (lj[0], -lj[1]))
        pos = base + (j - 1)
        cur = Walk(cur.source, cur.target,
                   cur.letters[:pos] + pair + cur.letters[pos:])
        steps.append(MoveStep("insert", pos, pair, cur))
    psrc = y + s + x
    pos = i + k
    if cur.letters[pos:pos + len(psrc)] != psrc:
        raise HomotopyError("rewrite expansion lost the pattern occurrence")
    cur = Walk(cur.source, cur.target,
               cur.letters[:pos] + pdst + cur.letters[pos + len(psrc):])
    steps.append(MoveStep("replace", pos, (psrc, pdst), cur))
    steps.extend(_reduction_steps(cur))
    return steps


def homotopy_relation(ideal: Ideal, x0=None, coset_fallback=False,
                      cap=None) -> HomotopyRelation:
    """Build the homotopy relation of (Q, I) based at x0."""
    return HomotopyRelation(ideal, x0, coset_fallback=coset_fallback, cap=cap)


def decide_homotopic(h: HomotopyRelation, u: Walk, v: Walk, cap=None) -> Decision:
    return h.decide(u, v, cap=cap)


def pi1_presentation(h: HomotopyRelation) -> GroupPresentation:
    return h.presentation


EQUAL = "equal"
DIFFERENT = "different"


def relations_equal(h1: HomotopyRelation, h2: HomotopyRelation):
    """Compare fingerprints: (EQUAL, None) | (DIFFERENT, pair) | (UNKNOWN, pair)."""
    if h1.quiver != h2.quiver:
        raise HomotopyError("homotopy relations live on different quivers")
    unknown_pair = None
    for pair, tag1 in h1.fingerprint.items():
        tag2 = h2.fingerprint[pair]
        if UNKNOWN in (tag1, tag2):
            if unknown_pair is None:
                unknown_pair = pair
            continue
        if tag1 != tag2:
            return (DIFFERENT, pair)
    if unknown_pair is not None:
        return (UNKNOWN, unknown_pair)
    return (EQUAL, None)


def fingerprint_key(h: HomotopyRelation):
    """Canonical hashable form of a fully certified fingerprint."""
    quiver = h.quiver
    items = []
    for (u, v), tag in h.fingerprint.items():
        if tag == UNKNOWN:
            raise UnresolvedError(
                "fingerprint contains an Unknown pair (%s, %s)" % (u, v))
        items.append(((path_key(quiver, u), path_key(quiver, v)), tag))
    items.sort()
    return tuple(items)

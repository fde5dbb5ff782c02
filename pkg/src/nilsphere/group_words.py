"""Free-group word algebra for level generating sets, plus an exact
finite-group oracle (unitriangular matrices over Z/m) that verifies the
commutator-subgroup generation lemmas by brute-force enumeration.

Words live in the free group; nilpotency is only ever imposed by evaluating
them in an oracle or against a table of sphere maps.
"""

import itertools
from dataclasses import dataclass

from .errors import NotNilpotent


def _reduce_letters(letters):
    out = []
    for name, e in letters:
        if out and out[-1][0] == name and out[-1][1] == -e:
            out.pop()
        else:
            out.append((name, int(e)))
    return tuple(out)


@dataclass(frozen=True)
class Word:
    letters: tuple

    def __mul__(self, other):
        return Word(_reduce_letters(self.letters + other.letters))

    def inv(self):
        return Word(tuple((n, -e) for n, e in reversed(self.letters)))

    def is_identity(self):
        return not self.letters

    def __len__(self):
        return len(self.letters)

    def sort_key(self):
        return (len(self.letters), self.letters)

    def __str__(self):
        if not self.letters:
            return "e"
        return "*".join(n if e > 0 else f"{n}^-1" for n, e in self.letters)


IDENTITY = Word(())


def word(*letters):
    """Build a word from (name, exponent) pairs or bare names (exponent +1)."""
    norm = []
    for item in letters:
        if isinstance(item, str):
            norm.append((item, 1))
        else:
            norm.append((item[0], int(item[1])))
    return Word(_reduce_letters(tuple(norm)))


def free_reduce(w):
    """Freely reduced normal form; idempotent."""
    if isinstance(w, Word):
        return Word(_reduce_letters(w.letters))
    return Word(_reduce_letters(tuple(w)))


def commutator_word(u, v):
    """[u, v] = u v u^-1 v^-1, freely reduced."""
    return u * v * u.inv() * v.inv()


@dataclass
class WordLevelSets:
    """levels[0] is the generating set; levels[i+1] holds the commutators
    [a, b] with a a generator and b from levels[i], trivial words dropped."""

    levels: list


def level_sets(generator_ids, k):
    if k < 0:
        raise ValueError("k must be >= 0")
    gens = sorted(set(generator_ids))
    if not gens:
        raise ValueError("generating set must be nonempty")
    base = tuple(word(g) for g in gens)
    levels = [base]
    for _ in range(k):
        nxt = []
        seen = set()
        for a in base:
            for b in levels[-1]:
                w = commutator_word(a, b)
                if w.is_identity() or w.letters in seen:
                    continue
                seen.add(w.letters)
                nxt.append(w)
        nxt.sort(key=Word.sort_key)
        levels.append(tuple(nxt))
    return WordLevelSets(levels)


def derived_generators(generator_ids, k):
    """Union of the level sets 1..k (deduplicated, canonical order)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ls = level_sets(generator_ids, k)
    seen = set()
    out = []
    for lvl in ls.levels[1:]:
        for w in lvl:
            if w.letters not in seen:
                seen.add(w.letters)
                out.append(w)
    out.sort(key=Word.sort_key)
    return tuple(out)


# ---------------------------------------------------------------------------
# finite-group oracle (unitriangular matrices mod m)
# ---------------------------------------------------------------------------

def mat_mul(a, b, m):
    n = len(a)
    return tuple(
        tuple(sum(a[i][l] * b[l][j] for l in range(n)) % m for j in range(n))
        for i in range(n)
    )


def mat_identity(n):
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def mat_inv_unitriangular(a, m):
    """Inverse via the nilpotent series (I + N)^-1 = I - N + N^2 - ..."""
    n = len(a)
    ident = mat_identity(n)
    nil = tuple(
        tuple((a[i][j] - ident[i][j]) % m for j in range(n)) for i in range(n)
    )
    acc = ident
    power = ident
    sign = -1
    for _ in range(n - 1):
        power = mat_mul(power, nil, m)
        acc = tuple(
            tuple((acc[i][j] + sign * power[i][j]) % m for j in range(n))
            for i in range(n)
        )
        sign = -sign
    return acc


def is_unitriangular(a, m):
    n = len(a)
    for i in range(n):
        if len(a[i]) != n:
            return False
        for j in range(n):
            v = a[i][j]
            if not (0 <= v < m):
                return False
            if i == j and v != 1:
                return False
            if i > j and v != 0:
                return False
    return True


def elementary_transvection(n, m, i, j, value=1):
    """Identity with `value` at 1-indexed position (i, j), i < j."""
    if not (1 <= i < j <= n):
        raise ValueError("need 1 <= i < j <= n")
    return tuple(
        tuple(
            1 if r == c else (value % m if (r, c) == (i - 1, j - 1) else 0)
            for c in range(n)
        )
        for r in range(n)
    )


def closure(gens, m, cap=None):
    """Subgroup closure under multiplication and inverse (breadth-first)."""
    gens = [tuple(tuple(int(v) % m for v in row) for row in g) for g in gens]
    n = len(gens[0]) if gens else 0
    elems = {mat_identity(n)} if gens else set()
    if not gens:
        return frozenset()
    full = list(gens) + [mat_inv_unitriangular(g, m) for g in gens]
    frontier = [mat_identity(n)]
    while frontier:
        nxt = []
        for x in frontier:
            for g in full:
                y = mat_mul(x, g, m)
                if y not in elems:
                    elems.add(y)
                    nxt.append(y)
                    if cap is not None and len(elems) > cap:
                        raise ValueError("closure exceeded cap")
        frontier = nxt
    return frozenset(elems)


class FiniteGroupOracle:
    """Exact model: the subgroup of UT(n, Z/m) generated by the given
    matrices, with every element enumerated.  Ambient order m^(n(n-1)/2)
    must stay small enough for exhaustive checks."""

    AMBIENT_CAP = 10 ** 6

    def __init__(self, n, m, generators):
        if m < 2 or n < 2:
            raise ValueError("need n >= 2 and m >= 2")
        if m ** (n * (n - 1) // 2) > self.AMBIENT_CAP:
            raise ValueError("ambient unitriangular group too large for the oracle")
        self.n = int(n)
        self.m = int(m)
        gens = [tuple(tuple(int(v) % m for v in row) for row in g) for g in generators]
        for g in gens:
            if not is_unitriangular(g, m):
                raise ValueError("oracle generators must be unitriangular mod m")
        self.generators = gens
        self.elements = closure(gens, m)

    def commutator(self, f, h):
        fi = mat_inv_unitriangular(f, self.m)
        hi = mat_inv_unitriangular(h, self.m)
        return mat_mul(mat_mul(f, h, self.m), mat_mul(fi, hi, self.m), self.m)


def oracle_generate(oracle, gens):
    """Closure of the given matrices inside the oracle's ambient group."""
    if not gens:
        return frozenset({mat_identity(oracle.n)})
    for g in gens:
        if not is_unitriangular(g, oracle.m):
            raise ValueError("generators must be unitriangular mod m")
    return closure(gens, oracle.m)


def oracle_lower_central_series(oracle, max_depth=32):
    """Exact lower central series; returns (chain, nilpotency length).

    chain[i] is the i-th term, ending with the trivial group; the length is
    the first index whose term is trivial."""
    g = oracle.elements
    chain = [g]
    cur = g
    for _ in range(max_depth):
        comms = {oracle.commutator(f, h) for f in g for h in cur}
        nxt = closure(list(comms), oracle.m)
        chain.append(nxt)
        if len(nxt) == 1:
            return chain, len(chain) - 1
        if nxt == cur:
            raise NotNilpotent("lower central series stabilized above identity")
        cur = nxt
    raise NotNilpotent("lower central series did not terminate")


def word_eval_matrices(w, assignment, m):
    """Evaluate a free word with matrix values for its generator ids."""
    n = len(next(iter(assignment.values())))
    out = mat_identity(n)
    for name, e in w.letters:
        mat = assignment[name]
        if e < 0:
            mat = mat_inv_unitriangular(mat, m)
        out = mat_mul(out, mat, m)
    return out


@dataclass
class Section2Report:
    """Exhaustive verdicts for the generation lemmas on one oracle."""

    bilinearity_holds: bool       # commutators split over products near the top
    level_generation_holds: bool  # words of the last level generate it
    derived_generation_holds: bool  # levels 1..k generate the commutator subgroup
    chain_orders: tuple
    nilpotency_length: int

    @property
    def all_hold(self):
        return (
            self.bilinearity_holds
            and self.level_generation_holds
            and self.derived_generation_holds
        )


def verify_section_2(oracle, s_matrices):
    """Brute-force check of the three generation facts for <S> = G.

    The splitting identities are checked with h drawn from the deepest level
    whose commutators land in the (nontrivial) center, which is the level
    the algebra actually uses; for abelian groups that is all of G.  The
    exhaustive loops run over precomputed product/commutator tables (the
    series terms are subgroups, so they are closed under products)."""
    chain, k = oracle_lower_central_series(oracle)
    g = oracle.elements
    m = oracle.m
    if frozenset(closure(list(s_matrices), m)) != g:
        raise ValueError("S does not generate the oracle group")

    h_level = chain[max(k - 2, 0)]
    elems = sorted(g)
    index = {e: i for i, e in enumerate(elems)}
    size = len(elems)
    mul = [
        [index[mat_mul(a, b, m)] for b in elems] for a in elems
    ]
    inv_idx = [index[mat_inv_unitriangular(e, m)] for e in elems]
    ctab = [
        [mul[mul[i][j]][mul[inv_idx[i]][inv_idx[j]]] for j in range(size)]
        for i in range(size)
    ]
    h_idx = [index[h] for h in h_level]

    bilinear = True
    for i in range(size):
        row = ctab[i]
        for j1 in h_idx:
            for j2 in h_idx:
                if row[mul[j1][j2]] != mul[row[j1]][row[j2]]:
                    bilinear = False
                    break
            if not bilinear:
                break
        if not bilinear:
            break
    if bilinear:
        for i1, i2 in itertools.product(range(size), range(size)):
            prod = mul[i1][i2]
            for j in h_idx:
                if ctab[prod][j] != mul[ctab[i1][j]][ctab[i2][j]]:
                    bilinear = False
                    break
            if not bilinear:
                break

    ids = [f"g{i}" for i in range(len(s_matrices))]
    assignment = dict(zip(ids, (tuple(tuple(r) for r in s) for s in s_matrices)))
    ls = level_sets(ids, k)
    level_words = ls.levels[k - 1]
    level_mats = [word_eval_matrices(w, assignment, oracle.m) for w in level_words]
    level_ok = oracle_generate(oracle, level_mats) == chain[k - 1]

    derived = derived_generators(ids, k)
    derived_mats = [word_eval_matrices(w, assignment, oracle.m) for w in derived]
    derived_ok = oracle_generate(oracle, derived_mats) == chain[1] if k >= 1 else True

    return Section2Report(
        bilinear,
        level_ok,
        derived_ok,
        tuple(len(c) for c in chain),
        k,
    )

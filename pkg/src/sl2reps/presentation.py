"""Finitely presented groups: words, parsing, Fox calculus, abelianization.

A word is a tuple of nonzero integers; ``k`` stands for the k-th generator
(1-based) and ``-k`` for its inverse.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from . import linalg2
from .errors import BudgetExceededError, PresentationError, PresentationSyntaxError

Word = Tuple[int, ...]

DEFAULT_BALL_BUDGET = 200_000
DEDUP_TOL = 1e-6


# --- words ------------------------------------------------------------------


def free_reduce(w: Sequence[int]) -> Word:
    out: List[int] = []
    for letter in w:
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def word_multiply(u: Sequence[int], v: Sequence[int]) -> Word:
    return free_reduce(tuple(u) + tuple(v))


def word_inverse(u: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(u))


def word_power(u: Sequence[int], k: int) -> Word:
    base = tuple(u) if k >= 0 else word_inverse(u)
    return free_reduce(base * abs(k))


def exponent_sums(w: Sequence[int], n: int) -> List[int]:
    sums = [0] * n
    for letter in w:
        sums[abs(letter) - 1] += 1 if letter > 0 else -1
    return sums


# --- presentations ----------------------------------------------------------


@dataclass(frozen=True)
class Presentation:
    generator_names: Tuple[str, ...]
    relators: Tuple[Word, ...] = ()

    def __post_init__(self):
        names = tuple(self.generator_names)
        if not names:
            raise PresentationError("a presentation needs at least one generator")
        if len(set(names)) != len(names):
            raise PresentationError(f"duplicate generator names in {names}")
        n = len(names)
        rels = []
        for r in self.relators:
            if any(x == 0 or abs(x) > n for x in r):
                raise PresentationError(f"relator {r} uses a letter outside 1..{n}")
            rels.append(free_reduce(r))
        object.__setattr__(self, "generator_names", names)
        object.__setattr__(self, "relators", tuple(rels))

    @property
    def generator_count(self) -> int:
        return len(self.generator_names)

    @property
    def relator_count(self) -> int:
        return len(self.relators)

    def format_word(self, w: Sequence[int]) -> str:
        """Render a word in the input grammar (``a^2 B``); the identity is ``1``."""
        if not w:
            return "1"
        parts = []
        i = 0
        while i < len(w):
            j = i
            while j < len(w) and w[j] == w[i]:
                j += 1
            name = self.generator_names[abs(w[i]) - 1]
            run = j - i
            if w[i] < 0:
                parts.append(name.capitalize() + (f"^{run}" if run > 1 else ""))
            else:
                parts.append(name + (f"^{run}" if run > 1 else ""))
            i = j
        return " ".join(parts)

    def to_text(self) -> str:
        head = ", ".join(self.generator_names)
        body = ", ".join(self.format_word(r) for r in self.relators)
        return f"{head} | {body}".rstrip()

    def parse_word(self, text: str) -> Word:
        return _WordParser(text, self.generator_names).parse_word_only()


def free_group(n: int) -> Presentation:
    names = tuple("abcdefghijklmnopqrstuvwxyz"[:n]) if n <= 26 else tuple(
        f"g{i}" for i in range(1, n + 1))
    return Presentation(names, ())


class _WordParser:
    def __init__(self, text: str, names: Sequence[str], offset: int = 0):
        self.text = text
        self.pos = 0
        self.offset = offset
        self.lookup: Dict[str, int] = {}
        for i, name in enumerate(names, start=1):
            self.lookup[name] = i
            self.lookup[name[0].upper() + name[1:]] = -i
        # longest names first so that "ab" wins over "a" when both exist
        self.ordered = sorted(self.lookup, key=len, reverse=True)

    def error(self, message, pos=None):
        return PresentationSyntaxError(message, self.offset + (self.pos if pos is None else pos))

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def at_end(self):
        self.skip_ws()
        return self.pos >= len(self.text)

    def parse_atom(self) -> List[int]:
        self.skip_ws()
        start = self.pos
        # "1" is the empty word (names never start with a digit)
        if self.text.startswith("1", self.pos) and not (
                self.text[self.pos + 1:self.pos + 2].isalnum()):
            self.pos += 1
            return []
        for name in self.ordered:
            if self.text.startswith(name, self.pos):
                self.pos += len(name)
                letter = self.lookup[name]
                break
        else:
            j = self.pos
            while j < len(self.text) and (self.text[j].isalnum() or self.text[j] == "_"):
                j += 1
            if j == self.pos:
                raise self.error(f"expected a generator, found {self.text[self.pos]!r}")
            raise self.error(f"unknown generator {self.text[self.pos:j]!r}", start)
        self.skip_ws()
        exponent = 1
        if self.pos < len(self.text) and self.text[self.pos] == "^":
            self.pos += 1
            self.skip_ws()
            exp_start = self.pos
            j = self.pos
            if j < len(self.text) and self.text[j] in "+-":
                j += 1
            while j < len(self.text) and self.text[j].isdigit():
                j += 1
            digits = self.text[self.pos:j]
            if not digits.lstrip("+-"):
                raise self.error("expected an integer exponent after '^'", exp_start)
            exponent = int(digits)
            if exponent == 0:
                raise self.error("exponent 0 is not allowed", exp_start)
            self.pos = j
        return [letter if exponent > 0 else -letter] * abs(exponent)

    def parse_word(self) -> Word:
        letters: List[int] = []
        letters += self.parse_atom()
        while True:
            self.skip_ws()
            if self.pos >= len(self.text) or self.text[self.pos] == ",":
                break
            letters += self.parse_atom()
        return free_reduce(letters)

    def parse_word_only(self) -> Word:
        if self.at_end():
            return ()
        w = self.parse_word()
        if not self.at_end():
            raise self.error(f"unexpected {self.text[self.pos]!r}")
        return w


_NAME_CHARS = set("abcdefghijklmnopqrstuvwxyz0123456789_")


def parse_presentation(text: str) -> Presentation:
    """Parse ``"a, b | a^2 b^2 a^2 B a B, ..."`` into a :class:`Presentation`.

    Generator names are ``[a-z][a-z0-9_]*``; capitalising the first letter
    of a name denotes the inverse generator.
    """
    bar = text.find("|")
    if bar < 0:
        raise PresentationSyntaxError("missing '|' between generators and relators", len(text))

    names = []
    pos = 0
    for chunk in text[:bar].split(","):
        stripped = chunk.strip()
        lead = len(chunk) - len(chunk.lstrip())
        if not stripped:
            raise PresentationSyntaxError("empty generator name", pos + lead)
        if not (stripped[0].islower() and stripped[0].isascii()) or not set(stripped) <= _NAME_CHARS:
            raise PresentationSyntaxError(f"invalid generator name {stripped!r}", pos + lead)
        if stripped in names:
            raise PresentationSyntaxError(f"duplicate generator name {stripped!r}", pos + lead)
        names.append(stripped)
        pos += len(chunk) + 1

    rel_text = text[bar + 1:]
    relators = []
    if rel_text.strip():
        parser = _WordParser(rel_text, names, offset=bar + 1)
        while True:
            relators.append(parser.parse_word())
            parser.skip_ws()
            if parser.pos >= len(rel_text):
                break
            if rel_text[parser.pos] != ",":
                raise parser.error(f"unexpected {rel_text[parser.pos]!r}")
            parser.pos += 1
            if parser.at_end():
                raise parser.error("relator expected after ','")
    return Presentation(tuple(names), tuple(relators))


# --- Fox calculus -----------------------------------------------------------


@dataclass(frozen=True)
class GroupRingElement:
    """Integer combination of free-group words, kept in canonical form."""

    terms: Tuple[Tuple[int, Word], ...] = ()

    @classmethod
    def from_dict(cls, coeffs: Dict[Word, int]) -> "GroupRingElement":
        return cls(tuple((c, w) for w, c in sorted(coeffs.items()) if c != 0))

    @classmethod
    def from_terms(cls, terms) -> "GroupRingElement":
        acc: Dict[Word, int] = {}
        for c, w in terms:
            w = free_reduce(w)
            acc[w] = acc.get(w, 0) + c
        return cls.from_dict(acc)

    def as_dict(self) -> Dict[Word, int]:
        return {w: c for c, w in self.terms}

    def __add__(self, other):
        return GroupRingElement.from_terms(self.terms + other.terms)

    def __neg__(self):
        return GroupRingElement(tuple((-c, w) for c, w in self.terms))

    def __sub__(self, other):
        return self + (-other)

    def left_multiply(self, u: Sequence[int]) -> "GroupRingElement":
        return GroupRingElement.from_terms((c, tuple(u) + w) for c, w in self.terms)

    def augmentation(self) -> int:
        return sum(c for c, _ in self.terms)

    def evaluate(self, word_image, zero):
        """Sum of ``c * word_image(w)`` over the terms, starting from ``zero``."""
        total = zero
        for c, w in self.terms:
            total = total + c * word_image(w)
        return total

    def __bool__(self):
        return bool(self.terms)


def fox_derivative(w: Sequence[int], i: int, n=None) -> GroupRingElement:
    """Fox derivative of the word ``w`` with respect to generator ``i``.

    For w = x_1 ... x_k the derivative is the sum over positions j of
    x_1 ... x_{j-1} where x_j = g_i, minus x_1 ... x_j where x_j = g_i^{-1}.
    """
    if i < 1 or (n is not None and i > n):
        raise PresentationError(f"generator index {i} out of range")
    acc: Dict[Word, int] = {}
    prefix: List[int] = []
    for letter in w:
        if letter == i:
            key = free_reduce(prefix)
            acc[key] = acc.get(key, 0) + 1
        prefix.append(letter)
        if letter == -i:
            key = free_reduce(prefix)
            acc[key] = acc.get(key, 0) - 1
    return GroupRingElement.from_dict(acc)


def fox_jacobian(P: Presentation) -> List[List[GroupRingElement]]:
    """Table ``J[j][i]`` of derivatives of relator j by generator i."""
    n = P.generator_count
    return [[fox_derivative(r, i, n) for i in range(1, n + 1)] for r in P.relators]


# --- abelianization ---------------------------------------------------------


def smith_normal_form(A):
    """Smith normal form of an integer matrix with the change of basis.

    Returns ``(D, U, V)`` with ``U @ A @ V == D``, U and V unimodular and D
    diagonal with nonnegative entries d_1 | d_2 | ... .
    """
    D = np.array(A, dtype=object).reshape(np.shape(A))
    m, n = D.shape
    U = np.array([[int(i == j) for j in range(m)] for i in range(m)], dtype=object)
    V = np.array([[int(i == j) for j in range(n)] for i in range(n)], dtype=object)

    def swap_rows(i, j):
        D[[i, j]] = D[[j, i]]
        U[[i, j]] = U[[j, i]]

    def swap_cols(i, j):
        D[:, [i, j]] = D[:, [j, i]]
        V[:, [i, j]] = V[:, [j, i]]

    for t in range(min(m, n)):
        while True:
            nonzero = [(abs(D[i, j]), i, j) for i in range(t, m) for j in range(t, n) if D[i, j] != 0]
            if not nonzero:
                return _finish_snf(D, U, V)
            _, pi, pj = min(nonzero)
            swap_rows(t, pi)
            swap_cols(t, pj)
            done = True
            for i in range(t + 1, m):
                q = D[i, t] // D[t, t]
                if q:
                    D[i] -= q * D[t]
                    U[i] -= q * U[t]
                if D[i, t] != 0:
                    done = False
            for j in range(t + 1, n):
                q = D[t, j] // D[t, t]
                if q:
                    D[:, j] -= q * D[:, t]
                    V[:, j] -= q * V[:, t]
                if D[t, j] != 0:
                    done = False
            if not done:
                continue
            # divisibility: fold any row not divisible by the pivot into row t
            bad = [(i, j) for i in range(t + 1, m) for j in range(t + 1, n) if D[i, j] % D[t, t]]
            if not bad:
                break
            i, _ = bad[0]
            D[t] += D[i]
            U[t] += U[i]
    return _finish_snf(D, U, V)


def _finish_snf(D, U, V):
    m, n = D.shape
    for t in range(min(m, n)):
        if D[t, t] < 0:
            D[t] = -D[t]
            U[t] = -U[t]
    return D, U, V


@dataclass(frozen=True)
class AbelianizationResult:
    invariant_factors: Tuple[int, ...]
    rank_free: int
    # U @ M @ V = diag(invariant_factors), M the relator exponent-sum matrix
    column_transform: np.ndarray = field(repr=False, compare=False, default=None)

    @property
    def torsion(self) -> Tuple[int, ...]:
        return tuple(d for d in self.invariant_factors if d not in (0, 1))


def exponent_sum_matrix(P: Presentation) -> np.ndarray:
    n = P.generator_count
    return np.array([exponent_sums(r, n) for r in P.relators], dtype=object).reshape(
        P.relator_count, n)


def abelianization(P: Presentation) -> AbelianizationResult:
    """Invariant factors of Z^n modulo the exponent-sum rows of the relators.

    Factors equal to 1 are dropped; each 0 stands for a free Z summand.
    """
    n = P.generator_count
    M = exponent_sum_matrix(P)
    if M.shape[0] == 0:
        V = np.array([[int(i == j) for j in range(n)] for i in range(n)], dtype=object)
        return AbelianizationResult((0,) * n, n, V)
    D, _, V = smith_normal_form(M)
    diag = [int(D[t, t]) for t in range(min(D.shape))] + [0] * max(0, n - D.shape[0])
    factors = [d for d in diag if d != 1]
    # nonzero factors first, then the free part: d_1 | d_2 | ... | 0 | 0
    factors = sorted(d for d in factors if d) + [0] * factors.count(0)
    return AbelianizationResult(tuple(factors), factors.count(0), V)


def snf_diagonal(P: Presentation) -> List[int]:
    """Full SNF diagonal padded to the generator count (units included)."""
    n = P.generator_count
    M = exponent_sum_matrix(P)
    if M.shape[0] == 0:
        return [0] * n
    D, _, _ = smith_normal_form(M)
    return [int(D[t, t]) for t in range(min(D.shape))] + [0] * max(0, n - D.shape[0])


# --- balls in the group -----------------------------------------------------


def _matrix_key_scale(g):
    return max(1.0, float(np.linalg.norm(g)))


def enumerate_ball(P: Presentation, dedup_rep, L: int, budget: int = DEFAULT_BALL_BUDGET,
                   tol: float = DEDUP_TOL):
    """Group elements of word length at most ``L`` with their reference images.

    Reduced words are generated breadth first and identified as group
    elements when their images under ``dedup_rep`` (a faithful reference
    representation, anything with an ``images`` sequence) agree entrywise
    within ``tol * max(1, |g|)``.  Each surviving element keeps the first,
    hence shortest, word that reached it.  Only survivors are extended: a
    word through a duplicate prefix reaches an element already reachable
    through the surviving prefix.
    """
    if L < 0:
        raise ValueError("L must be nonnegative")
    n = P.generator_count
    gens = {}
    for i, g in enumerate(dedup_rep.images, start=1):
        g = np.asarray(g, dtype=complex)
        gens[i] = g
        gens[-i] = linalg2.inv(g)
    letters = [x for i in range(1, n + 1) for x in (i, -i)]

    cell = 1e-2
    buckets: Dict[int, List[np.ndarray]] = {}

    def lookup_or_add(g):
        t = tol * _matrix_key_scale(g)
        key = int(np.floor(g[0, 0].real / cell))
        reach = 1 + int(t // cell)
        for k in range(key - reach, key + reach + 1):
            for other in buckets.get(k, ()):
                if np.max(np.abs(g - other)) < tol * max(_matrix_key_scale(g), _matrix_key_scale(other)):
                    return False
        buckets.setdefault(key, []).append(g)
        return True

    ident = linalg2.identity()
    lookup_or_add(ident)
    out = [((), ident)]
    frontier = [((), ident)]
    for _ in range(L):
        nxt = []
        for w, g in frontier:
            for x in letters:
                if w and w[-1] == -x:
                    continue
                h = g @ gens[x]
                if lookup_or_add(h):
                    nxt.append((w + (x,), h))
                    if len(out) + len(nxt) > budget:
                        raise BudgetExceededError(
                            f"ball of radius {L} exceeds the element budget {budget}")
        out.extend(nxt)
        frontier = nxt
    return out

"""Weight-truncated tensor algebras over graded alphabets.

A word is a tuple of generator names; its weight is its length and its
degree the sum of the letter degrees.  Elements keep only words of length at
most the cap, which is exactly computing modulo the ideal of words of longer
length.  Free graded Lie algebras live inside as iterated graded
commutators, so equality of Lie elements is equality of tensor expansions.

Letters may carry a nonzero *block* label.  Letters in different nonzero
blocks commute up to the Koszul sign; this realises the enveloping algebra
of a direct sum of free Lie algebras (and free products with it) without a
PBW basis.  Words are kept in the normal form where, inside every maximal
run of block letters, letters are stably sorted by block.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import factorial
from typing import Iterable, Mapping

from .errors import AlphabetMismatch, ConstantTermError, DegreeError, ParseError

Word = tuple


@dataclass(frozen=True)
class Generator:
    name: str
    degree: int
    tags: tuple = ()
    block: int = 0

    def with_degree(self, degree: int) -> "Generator":
        return Generator(self.name, degree, self.tags, self.block)


@dataclass(frozen=True, eq=False)
class Alphabet:
    generators: tuple

    def __post_init__(self):
        names = [g.name for g in self.generators]
        if len(set(names)) != len(names):
            raise AlphabetMismatch(f"duplicate generator names in {names}")
        object.__setattr__(self, "_deg", {g.name: g.degree for g in self.generators})
        object.__setattr__(self, "_block", {g.name: g.block for g in self.generators})
        object.__setattr__(self, "_key", tuple((g.name, g.degree, g.block) for g in self.generators))
        object.__setattr__(self, "has_blocks", any(g.block for g in self.generators))

    def __eq__(self, other):
        return self is other or (isinstance(other, Alphabet) and self._key == other._key)

    def __hash__(self):
        return hash(self._key)

    def __iter__(self):
        return iter(self.generators)

    def __len__(self):
        return len(self.generators)

    def __contains__(self, name) -> bool:
        return name in self._deg

    @property
    def names(self) -> tuple:
        return tuple(g.name for g in self.generators)

    def degree(self, name: str) -> int:
        return self._deg[name]

    def block(self, name: str) -> int:
        return self._block[name]

    def word_degree(self, word: Word) -> int:
        d = self._deg
        return sum(d[x] for x in word)

    def generator(self, name: str) -> Generator:
        for g in self.generators:
            if g.name == name:
                return g
        raise KeyError(name)

    def union(self, other: "Alphabet") -> "Alphabet":
        gens = list(self.generators)
        for g in other.generators:
            if g.name in self._deg:
                if self._deg[g.name] != g.degree:
                    raise AlphabetMismatch(f"generator {g.name} has two degrees")
                continue
            gens.append(g)
        return Alphabet(tuple(gens))

    def restrict(self, names: Iterable[str]) -> "Alphabet":
        keep = set(names)
        return Alphabet(tuple(g for g in self.generators if g.name in keep))

    def is_subalphabet_of(self, other: "Alphabet") -> bool:
        return all(other._deg.get(g.name) == g.degree and other._block.get(g.name) == g.block
                   for g in self.generators)


def alphabet(*gens) -> Alphabet:
    """Build an alphabet from ``Generator`` objects or ``(name, degree)`` pairs."""
    out = []
    for g in gens:
        out.append(g if isinstance(g, Generator) else Generator(*g))
    return Alphabet(tuple(out))


# ---------------------------------------------------------------------------
# Normal form for block-commuting letters


def _normalize(word: Word, alpha: Alphabet) -> tuple[Word, int]:
    """Stable sort of block letters inside runs; returns (word, sign)."""
    blk = alpha._block
    deg = alpha._deg
    out = list(word)
    sign = 1
    n = len(out)
    i = 0
    while i < n:
        if not blk[out[i]]:
            i += 1
            continue
        j = i
        while j < n and blk[out[j]]:
            j += 1
        # insertion sort on out[i:j] by block, swapping only across blocks
        for a in range(i + 1, j):
            b = a
            while b > i and blk[out[b - 1]] > blk[out[b]]:
                if deg[out[b - 1]] % 2 and deg[out[b]] % 2:
                    sign = -sign
                out[b - 1], out[b] = out[b], out[b - 1]
                b -= 1
        i = j
    return tuple(out), sign


# ---------------------------------------------------------------------------
# Tensor elements


def _q(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


class TensorElt:
    """An exact element of the weight-truncated tensor algebra."""

    __slots__ = ("alphabet", "cap", "terms")

    def __init__(self, alphabet: Alphabet, cap: int, terms: Mapping | None = None, *, _clean: bool = False):
        self.alphabet = alphabet
        self.cap = cap
        if _clean:
            self.terms = terms
            return
        acc: dict = {}
        if terms:
            for w, c in terms.items():
                w = tuple(w)
                if len(w) > cap:
                    continue
                for x in w:
                    if x not in alphabet:
                        raise AlphabetMismatch(f"letter {x!r} not in alphabet")
                sign = 1
                if alphabet.has_blocks:
                    w, sign = _normalize(w, alphabet)
                v = acc.get(w, 0) + sign * _q(c)
                if v:
                    acc[w] = v
                else:
                    acc.pop(w, None)
        self.terms = acc

    # construction helpers
    @classmethod
    def zero(cls, alphabet: Alphabet, cap: int) -> "TensorElt":
        return cls(alphabet, cap, {}, _clean=True)

    @classmethod
    def one(cls, alphabet: Alphabet, cap: int) -> "TensorElt":
        return cls(alphabet, cap, {(): Fraction(1)}, _clean=True)

    @classmethod
    def letter(cls, alphabet: Alphabet, cap: int, name: str) -> "TensorElt":
        return cls(alphabet, cap, {(name,): 1})

    def _new(self, terms: dict) -> "TensorElt":
        return TensorElt(self.alphabet, self.cap, terms, _clean=True)

    def _check(self, other: "TensorElt"):
        if self.alphabet != other.alphabet:
            raise AlphabetMismatch("elements live over different alphabets")
        if self.cap != other.cap:
            raise AlphabetMismatch(f"weight caps differ ({self.cap} vs {other.cap})")

    # vector space structure
    def __add__(self, other):
        if isinstance(other, (int, Fraction)) and other == 0:
            return self
        self._check(other)
        out = dict(self.terms)
        for w, c in other.terms.items():
            v = out.get(w, 0) + c
            if v:
                out[w] = v
            else:
                out.pop(w, None)
        return self._new(out)

    __radd__ = __add__

    def __neg__(self):
        return self._new({w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "TensorElt":
        c = _q(c)
        if not c:
            return self._new({})
        return self._new({w: c * v for w, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return self.product(other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return other == 0 and not self.terms
        if not isinstance(other, TensorElt):
            return NotImplemented
        return self.alphabet == other.alphabet and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __repr__(self):
        return f"{type(self).__name__}({format_terms(self.terms)})"

    # algebra structure
    def product(self, other: "TensorElt") -> "TensorElt":
        self._check(other)
        cap = self.cap
        out: dict = {}
        blocks = self.alphabet.has_blocks
        alpha = self.alphabet
        for u, a in self.terms.items():
            lu = len(u)
            for v, b in other.terms.items():
                if lu + len(v) > cap:
                    continue
                w = u + v
                c = a * b
                if blocks:
                    w, s = _normalize(w, alpha)
                    if s < 0:
                        c = -c
                nv = out.get(w, 0) + c
                if nv:
                    out[w] = nv
                else:
                    out.pop(w, None)
        return self._new(out)

    def power(self, k: int) -> "TensorElt":
        out = TensorElt.one(self.alphabet, self.cap)
        for _ in range(k):
            out = out.product(self)
        return out

    # gradings
    def weights(self) -> set:
        return {len(w) for w in self.terms}

    def min_weight(self) -> int | None:
        return min((len(w) for w in self.terms), default=None)

    def degrees(self) -> set:
        return {self.alphabet.word_degree(w) for w in self.terms}

    def degree(self) -> int:
        """The degree of a nonzero homogeneous element (0 for zero)."""
        ds = self.degrees()
        if len(ds) > 1:
            raise DegreeError(f"element is not homogeneous (degrees {sorted(ds)})")
        return ds.pop() if ds else 0

    def constant_term(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    def truncate(self, cap: int) -> "TensorElt":
        return TensorElt(self.alphabet, cap, {w: c for w, c in self.terms.items() if len(w) <= cap}, _clean=True)

    def embed(self, alpha: Alphabet, cap: int | None = None) -> "TensorElt":
        """The same element over a larger alphabet (and optionally another cap)."""
        cap = self.cap if cap is None else cap
        if alpha == self.alphabet and cap == self.cap:
            return self
        if not self.alphabet.is_subalphabet_of(alpha):
            # letters might still all be present; fall back to a checked rebuild
            return TensorElt(alpha, cap, self.terms)
        if alpha.has_blocks:
            return TensorElt(alpha, cap, self.terms)
        return TensorElt(alpha, cap, {w: c for w, c in self.terms.items() if len(w) <= cap}, _clean=True)

    def letters(self) -> set:
        out = set()
        for w in self.terms:
            out.update(w)
        return out

    def substitute(self, images: Mapping, alpha: Alphabet | None = None, cap: int | None = None) -> "TensorElt":
        """Algebra map on words: each letter goes to ``images[name]`` (letters
        without an image are kept)."""
        alpha = alpha or self.alphabet
        cap = self.cap if cap is None else cap
        one = TensorElt.one(alpha, cap)
        cache: dict = {}

        def img(x):
            if x not in cache:
                cache[x] = images[x].embed(alpha, cap) if x in images else TensorElt.letter(alpha, cap, x)
            return cache[x]

        out = TensorElt.zero(alpha, cap)
        for w, c in self.terms.items():
            t = one
            for x in w:
                t = t.product(img(x))
                if not t.terms:
                    break
            out = out + t.scale(c)
        return out

    def map_letters(self, rename: Mapping, alpha: Alphabet) -> "TensorElt":
        """Relabel letters (a bijection on the letters used)."""
        return TensorElt(alpha, self.cap, {tuple(rename.get(x, x) for x in w): c for w, c in self.terms.items()})

    def as_lie(self, trace=None) -> "LieElt":
        return LieElt(self.alphabet, self.cap, self.terms, trace=trace, _clean=True)


class LieElt(TensorElt):
    """A Lie element, optionally remembering the bracket expression it came from."""

    __slots__ = ("trace",)

    def __init__(self, alphabet, cap, terms=None, *, trace=None, _clean=False):
        super().__init__(alphabet, cap, terms, _clean=_clean)
        self.trace = trace

    def _new(self, terms):
        return TensorElt(self.alphabet, self.cap, terms, _clean=True)

    def expression(self):
        """A bracket expression whose expansion is this element."""
        if self.trace is None:
            self.trace = dynkin_expression(self)
        return self.trace

    def __add__(self, other):
        out = TensorElt.__add__(self, other)
        if isinstance(other, LieElt):
            return out.as_lie(_sum_trace(self.trace, other.trace))
        return out

    __radd__ = __add__

    def __neg__(self):
        return TensorElt.__neg__(self).as_lie(_scale_trace(-1, self.trace))

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return TensorElt.scale(self, c).as_lie(_scale_trace(_q(c), self.trace))

    def embed(self, alpha, cap=None):
        out = TensorElt.embed(self, alpha, cap)
        return out.as_lie(self.trace) if not isinstance(out, LieElt) else out


def _sum_trace(a, b):
    if a is None or b is None:
        return None
    parts = []
    for t in (a, b):
        if t[0] == "sum":
            parts.extend(t[1:])
        elif t[0] != "zero":
            parts.append(t)
    if not parts:
        return ["zero"]
    return parts[0] if len(parts) == 1 else ["sum", *parts]


def _scale_trace(c: Fraction, t):
    if t is None:
        return None
    if c == 1:
        return t
    if c == 0:
        return ["zero"]
    return ["scal", format_q(c), t]


def format_q(q) -> str:
    q = _q(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_terms(terms: Mapping) -> str:
    if not terms:
        return "0"
    parts = []
    for w in sorted(terms, key=lambda w: (len(w), w)):
        parts.append(f"{format_q(terms[w])}*{'.'.join(w) if w else '1'}")
    return " + ".join(parts)


# ---------------------------------------------------------------------------
# Lie operations


def _sign(p: int, q: int) -> int:
    return -1 if (p % 2 and q % 2) else 1


def bracket(x: TensorElt, y: TensorElt) -> LieElt:
    """Graded commutator ``xy - (-1)^{|x||y|} yx`` computed word by word."""
    x._check(y)
    alpha, cap = x.alphabet, x.cap
    deg = alpha.word_degree
    blocks = alpha.has_blocks
    out: dict = {}

    def add(w, c):
        if blocks:
            w, s = _normalize(w, alpha)
            if s < 0:
                c = -c
        nv = out.get(w, 0) + c
        if nv:
            out[w] = nv
        else:
            out.pop(w, None)

    ydeg = {v: deg(v) for v in y.terms}
    for u, a in x.terms.items():
        du = deg(u)
        lu = len(u)
        for v, b in y.terms.items():
            if lu + len(v) > cap:
                continue
            c = a * b
            add(u + v, c)
            add(v + u, -c * _sign(du, ydeg[v]))
    tx = x.trace if isinstance(x, LieElt) else None
    ty = y.trace if isinstance(y, LieElt) else None
    trace = ["br", tx, ty] if tx is not None and ty is not None else None
    return LieElt(alpha, cap, out, trace=trace, _clean=True)


def generator(alpha: Alphabet, cap: int, name: str) -> LieElt:
    if name not in alpha:
        raise AlphabetMismatch(f"unknown generator {name!r}")
    return LieElt(alpha, cap, {(name,): Fraction(1)} if cap >= 1 else {}, trace=["gen", name], _clean=True)


def lie_zero(alpha: Alphabet, cap: int) -> LieElt:
    return LieElt(alpha, cap, {}, trace=["zero"], _clean=True)


def ad_power(z: TensorElt, y: TensorElt, k: int) -> TensorElt:
    out = y
    for _ in range(k):
        out = bracket(z, out)
    return out


def right_normed(word: Word, alpha: Alphabet, cap: int) -> LieElt:
    """``[x1,[x2,...[x_{n-1},x_n]...]]`` for the letters of ``word``."""
    out = generator(alpha, cap, word[-1])
    for x in reversed(word[:-1]):
        out = bracket(generator(alpha, cap, x), out)
    return out


def weight_component(x: TensorElt, w: int) -> TensorElt:
    out = TensorElt(x.alphabet, x.cap, {u: c for u, c in x.terms.items() if len(u) == w}, _clean=True)
    return out.as_lie() if isinstance(x, LieElt) else out


def degree_component(x: TensorElt, d: int) -> TensorElt:
    deg = x.alphabet.word_degree
    out = TensorElt(x.alphabet, x.cap, {u: c for u, c in x.terms.items() if deg(u) == d}, _clean=True)
    return out.as_lie() if isinstance(x, LieElt) else out


def apply_derivation(x: TensorElt, images: Mapping, degree: int) -> TensorElt:
    """Extend ``letter -> images[letter]`` to a derivation of the given degree.

    Letters with no image are sent to zero.  Signs follow the Koszul rule:
    passing the derivation across a letter of degree ``p`` contributes
    ``(-1)^{degree * p}``.
    """
    alpha, cap = x.alphabet, x.cap
    deg = alpha._deg
    blocks = alpha.has_blocks
    out: dict = {}
    for w, c in x.terms.items():
        n = len(w)
        prefix_deg = 0
        for i, letter in enumerate(w):
            img = images.get(letter)
            if img is not None and img.terms:
                s = _sign(degree, prefix_deg)
                pre, post = w[:i], w[i + 1:]
                room = cap - (n - 1)
                cc = c if s > 0 else -c
                for v, b in img.terms.items():
                    if len(v) > room:
                        continue
                    nw = pre + v + post
                    val = cc * b
                    if blocks:
                        nw, sg = _normalize(nw, alpha)
                        if sg < 0:
                            val = -val
                    nv = out.get(nw, 0) + val
                    if nv:
                        out[nw] = nv
                    else:
                        out.pop(nw, None)
            prefix_deg += deg[letter]
    return TensorElt(alpha, cap, out, _clean=True)


# ---------------------------------------------------------------------------
# Series


def _check_zero_constant(x: TensorElt):
    if x.constant_term():
        raise ConstantTermError("series argument must have zero constant term")


def exp_series(x: TensorElt) -> TensorElt:
    _check_zero_constant(x)
    out = TensorElt.one(x.alphabet, x.cap)
    term = TensorElt.one(x.alphabet, x.cap)
    for k in range(1, x.cap + 1):
        term = term.product(x).scale(Fraction(1, k))
        if not term.terms:
            break
        out = out + term
    return TensorElt(out.alphabet, out.cap, out.terms, _clean=True)


def log_series(u: TensorElt) -> TensorElt:
    if u.constant_term() != 1:
        raise ConstantTermError("log needs constant term 1")
    one = TensorElt.one(u.alphabet, u.cap)
    t = TensorElt(u.alphabet, u.cap, dict(u.terms), _clean=True) - one
    out = TensorElt.zero(u.alphabet, u.cap)
    power = one
    for k in range(1, u.cap + 1):
        power = power.product(t)
        if not power.terms:
            break
        out = out + power.scale(Fraction((-1) ** (k + 1), k))
    return TensorElt(out.alphabet, out.cap, out.terms, _clean=True)


def bch(x: TensorElt, y: TensorElt) -> LieElt:
    """``log(exp x exp y)`` for degree-zero elements."""
    x._check(y)
    for e in (x, y):
        if e.terms and e.degrees() != {0}:
            raise DegreeError("bch needs degree-0 arguments")
    out = log_series(exp_series(x).product(exp_series(y)))
    return out.as_lie()


# ---------------------------------------------------------------------------
# Primitivity


def _shuffle_sign(word: Word, left_idx: tuple, deg: Mapping) -> int:
    sign = 1
    left = set(left_idx)
    for j in range(len(word)):
        if j in left:
            continue
        for i in range(j + 1, len(word)):
            if i in left and deg[word[i]] % 2 and deg[word[j]] % 2:
                sign = -sign
    return sign


def is_primitive(x: TensorElt) -> bool:
    """True iff the shuffle coproduct of ``x`` has no mixed terms."""
    deg = x.alphabet._deg
    acc: dict = {}
    for w, c in x.terms.items():
        n = len(w)
        for k in range(1, n):
            for left in combinations(range(n), k):
                lw = tuple(w[i] for i in left)
                rw = tuple(w[i] for i in range(n) if i not in left)
                key = (lw, rw)
                v = acc.get(key, 0) + c * _shuffle_sign(w, left, deg)
                if v:
                    acc[key] = v
                else:
                    acc.pop(key, None)
    return not acc and not x.constant_term()


# ---------------------------------------------------------------------------
# Lie bases by content


def content_of(word: Word) -> tuple:
    return tuple(sorted(word))


class LieBasis:
    """Bases of the free Lie algebra split by content (letter multiset).

    The span of Lie elements of a given content is generated by right-normed
    brackets ``[g, b]`` where ``g`` is a letter of the content and ``b`` runs
    over a basis of the remaining content; a greedy independent subfamily of
    these is kept.  Contents are explored lazily and memoised.
    """

    def __init__(self, alpha: Alphabet, cap: int):
        self.alphabet = alpha
        self.cap = cap
        self._memo: dict = {}

    def for_content(self, content: tuple) -> list:
        content = tuple(sorted(content))
        hit = self._memo.get(content)
        if hit is not None:
            return hit
        from .exactla import Echelon

        alpha, cap = self.alphabet, self.cap
        if len(content) == 1:
            out = [generator(alpha, cap, content[0])]
        else:
            out = []
            ech = Echelon(track=False)
            for g in sorted(set(content)):
                rest = list(content)
                rest.remove(g)
                for b in self.for_content(tuple(rest)):
                    cand = bracket(generator(alpha, cap, g), b)
                    if cand.terms and ech.insert(cand.terms):
                        out.append(cand)
        self._memo[content] = out
        return out

    def contents(self, weight: int, letters: Iterable[str] | None = None, degree: int | None = None,
                 predicate=None) -> list:
        letters = sorted(letters if letters is not None else self.alphabet.names)
        deg = self.alphabet._deg
        out = []

        def rec(start, remaining, acc, d):
            if remaining == 0:
                if (degree is None or d == degree) and (predicate is None or predicate(acc)):
                    out.append(tuple(acc))
                return
            for i in range(start, len(letters)):
                acc.append(letters[i])
                rec(i, remaining - 1, acc, d + deg[letters[i]])
                acc.pop()

        rec(0, weight, [], 0)
        return out

    def basis(self, weight: int, letters=None, degree=None, predicate=None) -> list:
        out = []
        for c in self.contents(weight, letters, degree, predicate):
            out.extend(self.for_content(c))
        return out


# ---------------------------------------------------------------------------
# Bracket expressions


def evaluate_expression(expr, alpha: Alphabet, cap: int) -> LieElt:
    """Expand a bracket expression tree into the tensor algebra."""
    if isinstance(expr, list) and expr and isinstance(expr[0], str):
        tag = expr[0]
        if tag == "gen" and len(expr) == 2:
            return generator(alpha, cap, expr[1])
        if tag == "br" and len(expr) == 3:
            out = bracket(evaluate_expression(expr[1], alpha, cap), evaluate_expression(expr[2], alpha, cap))
            out.trace = expr
            return out
        if tag == "scal" and len(expr) == 3:
            try:
                c = Fraction(expr[1])
            except (ValueError, ZeroDivisionError, TypeError) as exc:
                raise ParseError(f"bad scalar {expr[1]!r}") from exc
            out = evaluate_expression(expr[2], alpha, cap).scale(c)
            out.trace = expr
            return out
        if tag == "sum":
            out = lie_zero(alpha, cap)
            for e in expr[1:]:
                out = TensorElt.__add__(out, evaluate_expression(e, alpha, cap)).as_lie()
            out.trace = expr
            return out
        if tag == "zero" and len(expr) == 1:
            return lie_zero(alpha, cap)
    if isinstance(expr, list) and all(isinstance(e, list) for e in expr):
        return evaluate_expression(["sum", *expr], alpha, cap)
    raise ParseError(f"malformed bracket expression {expr!r}")


def dynkin_expression(x: TensorElt):
    """A bracket expression for a Lie element via the Dynkin projector:
    a weight-n Lie element equals ``1/n`` times the sum of its words turned
    into right-normed brackets."""
    parts = []
    for w in sorted(x.terms, key=lambda w: (len(w), w)):
        c = x.terms[w] / len(w) if w else x.terms[w]
        leaf = ["gen", w[-1]]
        for letter in reversed(w[:-1]):
            leaf = ["br", ["gen", letter], leaf]
        parts.append(leaf if c == 1 else ["scal", format_q(c), leaf])
    if not parts:
        return ["zero"]
    return parts[0] if len(parts) == 1 else ["sum", *parts]


def lie_from_tensor(x: TensorElt) -> LieElt:
    """Attach a trace to a tensor element known to be Lie; verifies the claim."""
    expr = dynkin_expression(x)
    out = evaluate_expression(expr, x.alphabet, x.cap)
    if out.terms != x.terms:
        raise DegreeError("element is not a Lie element")
    return out


def dumps_expression(expr) -> str:
    return json.dumps(expr, separators=(",", ":"), ensure_ascii=False)


def loads_expression(text: str):
    try:
        expr = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(str(exc)) from exc
    _validate_expression(expr)
    return expr


def _validate_expression(expr):
    if not isinstance(expr, list) or not expr:
        raise ParseError(f"malformed bracket expression {expr!r}")
    if isinstance(expr[0], str):
        tag = expr[0]
        if tag == "gen":
            if len(expr) != 2 or not isinstance(expr[1], str):
                raise ParseError(f"malformed generator {expr!r}")
        elif tag == "br":
            if len(expr) != 3:
                raise ParseError(f"bracket needs two arguments: {expr!r}")
            _validate_expression(expr[1])
            _validate_expression(expr[2])
        elif tag == "scal":
            if len(expr) != 3 or not isinstance(expr[1], str):
                raise ParseError(f"malformed scalar node {expr!r}")
            try:
                Fraction(expr[1])
            except (ValueError, ZeroDivisionError) as exc:
                raise ParseError(f"bad scalar {expr[1]!r}") from exc
            _validate_expression(expr[2])
        elif tag == "sum":
            for e in expr[1:]:
                _validate_expression(e)
        elif tag == "zero":
            if len(expr) != 1:
                raise ParseError("zero takes no arguments")
        else:
            raise ParseError(f"unknown node {tag!r}")
    else:
        for e in expr:
            _validate_expression(e)


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """Bernoulli numbers with ``B_1 = -1/2``."""
    if n == 0:
        return Fraction(1)
    total = Fraction(0)
    for k in range(n):
        total += Fraction(factorial(n + 1), factorial(k) * factorial(n + 1 - k)) * bernoulli(k)
    return -total / (n + 1)

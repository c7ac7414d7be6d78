"""Free retractive cdgl's ``(L u L(W), d)`` over a free base ``L``.

The fiber ideal ``K`` is the free Lie algebra on ``T``, the span of the
brackets ``[x1,[x2,...[xk, w]]]`` with one fiber letter.  ``T`` is identified
with ``UL (x) W`` by reading off the unique tensor term that ends in the
fiber letter, so linear data moves freely between Lie elements and module
elements.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from . import exactla
from .cdgl import CdglPresentation, HomologyReport, check_differential, homology, perturb
from .errors import ParseError, PresentationError
from .freelie import Alphabet, Generator, LieElt, TensorElt, bracket, evaluate_expression, generator
from .ulmod import ULModule, quotient_homology, semifree_resolution, shifted_name, ul_words


class RetractiveModel:
    """``(L u L(W), d)`` with ``d`` on ``L`` taken from the base.

    ``differential_on_fiber`` maps fiber generators to Lie elements (or
    bracket expressions) over the joint alphabet; every summand must contain
    a fiber letter so that killing ``W`` is a chain map.
    """

    def __init__(self, base: CdglPresentation, fiber_generators: Iterable[Generator],
                 differential_on_fiber: Mapping, cap: int | None = None, window: tuple | None = None,
                 name: str = ""):
        self.base = base
        self.cap = base.cap if cap is None else cap
        self.fiber_generators = tuple(Generator(g.name, g.degree, g.tags, 0) for g in fiber_generators)
        clash = [g.name for g in self.fiber_generators if g.name in base.alphabet]
        if clash:
            raise PresentationError(f"fiber generators clash with base generators: {clash}")
        self.fiber_names = frozenset(g.name for g in self.fiber_generators)
        self.alphabet = Alphabet(tuple(base.alphabet.generators) + self.fiber_generators)
        diff = {}
        for k, v in differential_on_fiber.items():
            if k not in self.fiber_names:
                raise PresentationError(f"differential on unknown fiber generator {k!r}")
            if not isinstance(v, TensorElt):
                v = evaluate_expression(v, self.alphabet, self.cap)
            v = v.embed(self.alphabet, self.cap)
            if any(self.w_count(w) == 0 for w in v.terms):
                raise PresentationError(f"d{k} has summands without fiber letters")
            if v.terms:
                diff[k] = v if isinstance(v, LieElt) else v.as_lie()
        self.fiber_differential = diff
        full = {k: v.embed(self.alphabet, self.cap) for k, v in base.differential.items()}
        full.update(diff)
        self.total = CdglPresentation(self.alphabet.generators, full, self.cap, mc=base.mc,
                                      name=name or "retractive")
        self.window = window
        self.name = name

    # letters
    def w_count(self, word) -> int:
        return sum(1 for x in word if x in self.fiber_names)

    def is_fiber_ideal(self, letters) -> bool:
        return any(x in self.fiber_names for x in letters)

    def d(self, x: TensorElt) -> TensorElt:
        return self.total.d(x)

    def check(self):
        return check_differential(self.total)

    # linear data
    def linear_part(self, name: str) -> TensorElt:
        v = self.fiber_differential.get(name)
        if v is None:
            return TensorElt.zero(self.alphabet, self.cap)
        return TensorElt(self.alphabet, self.cap, {w: c for w, c in v.terms.items() if self.w_count(w) == 1},
                         _clean=True)

    def is_linear(self) -> bool:
        return all(self.w_count(w) == 1 for v in self.fiber_differential.values() for w in v.terms)

    def to_module_element(self, x: TensorElt) -> dict:
        """``T -> UL (x) W`` on an element linear in the fiber letters."""
        out = {}
        for w, c in x.terms.items():
            if self.w_count(w) != 1:
                continue
            if w[-1] in self.fiber_names:
                out[w] = c
        return out

    def from_module_element(self, v: Mapping) -> TensorElt:
        """``u (x) w -> ad_u(w)`` into the Lie algebra."""
        return module_to_lie(v, self.alphabet, self.cap)

    def fiber_module(self) -> ULModule:
        """``(UL (x) W, d_1)``: the linear part of the fiber as a module."""
        diff = {g.name: self.to_module_element(self.linear_part(g.name)) for g in self.fiber_generators}
        M = ULModule(self.base, self.fiber_generators, {}, (), self.cap - 1)
        return ULModule(self.base, self.fiber_generators,
                        {k: TensorElt(M.alphabet, M.cap + 1, v) for k, v in diff.items() if v}, (), self.cap - 1)

    # homology
    def fiber_ideal_homology(self, window: tuple, at: TensorElt | None = None) -> HomologyReport:
        return homology(self.total, window, at=at, predicate=self.is_fiber_ideal)

    def linear_fiber_homology(self, window: tuple) -> dict:
        return self.fiber_module().homology(window).dims

    # serialisation
    def to_json(self) -> dict:
        out = self.base.to_json()
        out["fiber_generators"] = [{"name": g.name, "degree": g.degree} for g in self.fiber_generators]
        out["differential_on_fiber"] = {g.name: self.fiber_differential[g.name].expression()
                                        for g in self.fiber_generators if g.name in self.fiber_differential}
        out["cap"] = self.cap
        return out

    @classmethod
    def from_json(cls, data: Mapping, cap: int | None = None, base: CdglPresentation | None = None) -> "RetractiveModel":
        try:
            base = base if base is not None else CdglPresentation.from_json(data, cap)
            gens = [Generator(str(g["name"]), int(g["degree"])) for g in data.get("fiber_generators", [])]
            diff = dict(data.get("differential_on_fiber", {}))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad retractive model: {exc}") from exc
        c = int(cap if cap is not None else data.get("cap", base.cap))
        return cls(base, gens, diff, c)

    def same_as(self, other: "RetractiveModel") -> bool:
        return self.base.same_as(other.base) and self.total.same_as(other.total)

    def __repr__(self):
        return f"RetractiveModel(fiber={[(g.name, g.degree) for g in self.fiber_generators]}, cap={self.cap})"


def module_to_lie(v: Mapping, alpha: Alphabet, cap: int) -> TensorElt:
    out = TensorElt.zero(alpha, cap)
    for w, c in v.items():
        t = generator(alpha, cap, w[-1])
        for x in reversed(w[:-1]):
            t = bracket(generator(alpha, cap, x), t)
        out = out + t.scale(c)
    return out


# ---------------------------------------------------------------------------
# Splitting


@dataclass
class Splitting:
    base: CdglPresentation
    t_basis: dict  # (degree, weight) -> list of words (u..., w)

    def count(self, weight: int) -> int:
        return sum(len(v) for (d, wt), v in self.t_basis.items() if wt == weight)

    def elements(self, model: RetractiveModel, degree: int, weight: int) -> list:
        return [module_to_lie({w: Fraction(1)}, model.alphabet, model.cap) for w in self.t_basis.get((degree, weight), [])]


def split(M: RetractiveModel, window: tuple | None = None) -> Splitting:
    """The ``T``-basis ``ad_{x1}...ad_{xk}(w)`` listed as words ``(x1..xk, w)``
    per (degree, weight); weight counts all letters."""
    words = ul_words(M.base.alphabet, M.cap - 1)
    out: dict = {}
    for g in M.fiber_generators:
        for d, ws in words.items():
            deg = d + g.degree
            if window is not None and not (window[0] <= deg <= window[1]):
                continue
            for u in ws:
                out.setdefault((deg, len(u) + 1), []).append(u + (g.name,))
    return Splitting(M.base, out)


def retractive_linear_part(M: RetractiveModel) -> RetractiveModel:
    if M.is_linear():
        return M
    diff = {g.name: M.linear_part(g.name) for g in M.fiber_generators}
    return RetractiveModel(M.base, M.fiber_generators, {k: v for k, v in diff.items() if v.terms}, M.cap,
                           M.window, M.name)


# ---------------------------------------------------------------------------
# Loops


@dataclass(frozen=True)
class Desuspended:
    """``s^{-1} y`` for ``y`` in the fiber ideal."""

    value: TensorElt

    @property
    def degree(self) -> int:
        return self.value.degree() - 1


@dataclass
class LoopModel:
    """``L (+) s^{-1}K`` with abelian fiber, reduced carrier of the retractive
    loop.  ``source`` is the looped model."""

    source: RetractiveModel
    caveats: list = field(default_factory=list)

    @property
    def base(self) -> CdglPresentation:
        return self.source.base

    @property
    def trivial(self) -> bool:
        return not self.source.fiber_generators

    def bracket(self, x: TensorElt, y: Desuspended) -> Desuspended:
        """``[x, s^{-1}y] = (-1)^{|x|} s^{-1}[x, y]`` for ``x`` in the base."""
        xx = x.embed(self.source.alphabet, self.source.cap)
        val = bracket(xx, y.value)
        return Desuspended(val if x.degree() % 2 == 0 else -val)

    def differential(self, y: Desuspended) -> Desuspended:
        return Desuspended(-self.source.d(y.value))

    def fiber_homology(self, window: tuple, at: TensorElt | None = None) -> dict:
        """``H(s^{-1}K)`` computed on the desuspended complex."""
        lo, hi = window
        rep = self.source.fiber_ideal_homology((lo + 1, hi + 1), at)
        return {j: rep.dims[j + 1] for j in range(lo, hi + 1)}

    def carrier_homology(self, window: tuple, t_degree: int | None = None) -> dict:
        """Homology of the fiber of the full carrier ``K (x) (U + dU + Q dt)``
        with ``U = (t^2 - t) Q[t]`` cut at polynomial degree ``t_degree``."""
        return carrier_fiber_homology(self.source, window, t_degree)

    def linear_fiber_module(self) -> ULModule:
        return self.source.fiber_module().shift(-1)


def loop_model(M: RetractiveModel) -> LoopModel:
    return LoopModel(M, ["reduced carrier; represents the loop up to weak equivalence"])


def _carrier_algebra(p: int):
    """Bases of the degree-0 and degree-(-1) parts of ``U + dU + Q dt`` as
    vectors over monomials ``('t', a)`` and ``('dt', a)``."""
    deg0, deg1 = [], []
    for i in range(max(p - 1, 0)):
        deg0.append({("t", i + 2): Fraction(1), ("t", i + 1): Fraction(-1)})
        deg1.append({("dt", i + 1): Fraction(i + 2), ("dt", i): Fraction(-(i + 1))})
    deg1.append({("dt", 0): Fraction(1)})
    return deg0, deg1


def _d_poly(v: Mapping) -> dict:
    out = {}
    for (kind, a), c in v.items():
        if kind == "t" and a:
            out[("dt", a - 1)] = out.get(("dt", a - 1), 0) + a * c
    return {k: x for k, x in out.items() if x}


def carrier_fiber_homology(M: RetractiveModel, window: tuple, t_degree: int | None = None) -> dict:
    p = M.cap if t_degree is None else t_degree
    deg0, deg1 = _carrier_algebra(p)
    from .cdgl import degree_basis

    kcache: dict = {}

    def kbasis(j):
        if j not in kcache:
            kcache[j] = degree_basis(M.total, j, M.is_fiber_ideal)
        return kcache[j]

    def basis(j):
        out = []
        for k in kbasis(j):
            for a in deg0:
                out.append(_tensor(k.terms, a))
        for k in kbasis(j + 1):
            for a in deg1:
                out.append(_tensor(k.terms, a))
        return out

    alpha, cap = M.alphabet, M.cap

    def D(v: Mapping) -> dict:
        by_mono: dict = {}
        for (w, mono), c in v.items():
            by_mono.setdefault(mono, {})[w] = c
        out: dict = {}
        for mono, k in by_mono.items():
            dk = M.d(TensorElt(alpha, cap, k, _clean=True)).terms
            for w, c in dk.items():
                out[(w, mono)] = out.get((w, mono), 0) + c
            for w, c in k.items():
                sign = -1 if alpha.word_degree(w) % 2 else 1
                for m2, c2 in _d_poly({mono: Fraction(1)}).items():
                    out[(w, m2)] = out.get((w, m2), 0) + sign * c * c2
        return {k: x for k, x in out.items() if x}

    lo, hi = window
    return {j: quotient_homology(basis(j), basis(j + 1), [], [], D) for j in range(lo, hi + 1)}


def _tensor(k: Mapping, a: Mapping) -> dict:
    return {(w, m): c * x for w, c in k.items() for m, x in a.items()}


# ---------------------------------------------------------------------------
# Suspension


def suspension_model(M: RetractiveModel, times: int = 1) -> RetractiveModel:
    """``(L u L(s^n W), d)`` with retractive linear differential obtained by
    shifting the linear fiber module ``n`` times."""
    if times < 0:
        raise PresentationError("suspension count must be non-negative")
    if times == 0 or not M.fiber_generators:
        return M if times == 0 else RetractiveModel(M.base, (), {}, M.cap)
    R = M.fiber_module().shift(times)
    return lib_L(R, cap=M.cap, name=M.name)


def fiber_functor(M: RetractiveModel, connected: bool = False) -> ULModule:
    R = M.fiber_module()
    return R.connected_cover() if connected else R


def lib_L(R: ULModule, window: tuple | None = None, cap: int | None = None, name: str = "") -> RetractiveModel:
    """The free retractive model whose linear fiber module is ``R``."""
    if R.kind != "semifree" or not R.staging_holds():
        if window is None:
            raise PresentationError("a quotient module needs a window to be resolved in")
        res = semifree_resolution(R, window)
        if not res.certified:
            raise PresentationError("could not certify a semifree resolution in the window")
        R = res.module
    c = R.cap + 1 if cap is None else cap
    alpha = Alphabet(tuple(R.base.alphabet.generators) + tuple(R.generators))
    diff = {k: module_to_lie(v.terms, alpha, c) for k, v in R.differential.items()}
    return RetractiveModel(R.base, R.generators, diff, c, name=name)

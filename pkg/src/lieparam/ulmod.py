"""Complete modules over the enveloping algebra of a free dgl.

For a free Lie algebra on ``V`` the completed enveloping algebra is the
completed tensor algebra on ``V``, so a module element ``u (x) w`` is stored
as the tensor word ``u + (w,)``: base letters followed by exactly one
module generator.  The action is left concatenation and the differential
is the derivation ``d(u w) = du w + (-1)^{|u|} u dw``.

The module cap bounds the length of ``u``.  Dimensions are exact for the
truncated module; a degree is *complete* when no longer word can reach it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import exactla
from .cdgl import CdglPresentation, PresentationMap
from .errors import BaseMismatch, InputError, NotFree, PresentationError
from .freelie import Alphabet, Generator, TensorElt, apply_derivation, evaluate_expression, format_q

# ---------------------------------------------------------------------------
# Words of the enveloping algebra


_WORD_CACHE: dict = {}


def ul_words(alpha: Alphabet, cap: int) -> dict:
    """Normal-form words of length at most ``cap`` grouped by degree."""
    key = (alpha, cap)
    hit = _WORD_CACHE.get(key)
    if hit is not None:
        return hit
    out: dict = {}
    level = [()]
    seen = {()}
    out.setdefault(0, []).append(())
    for _ in range(cap):
        nxt = []
        for w in level:
            for g in alpha.names:
                nw = w + (g,)
                if alpha.has_blocks:
                    t = TensorElt(alpha, cap, {nw: 1})
                    if not t.terms:
                        continue
                    nw = next(iter(t.terms))
                if nw in seen:
                    continue
                seen.add(nw)
                nxt.append(nw)
                out.setdefault(alpha.word_degree(nw), []).append(nw)
        level = nxt
    for d in out:
        out[d].sort(key=lambda w: (len(w), w))
    _WORD_CACHE[key] = out
    return out


@dataclass
class ULAlgebra:
    """The truncated tensor algebra on the base generators with ``d``."""

    base: CdglPresentation
    cap: int

    def words(self) -> dict:
        return ul_words(self.base.alphabet, self.cap)

    def dims(self) -> dict:
        """``{(degree, length): dimension}``."""
        out: dict = {}
        for d, ws in self.words().items():
            for w in ws:
                out[(d, len(w))] = out.get((d, len(w)), 0) + 1
        return out

    def d(self, x: TensorElt) -> TensorElt:
        return apply_derivation(x, self.base.differential, -1)

    def product(self, x: TensorElt, y: TensorElt) -> TensorElt:
        return x.product(y)


def uhat(L: CdglPresentation, cap: int | None = None) -> ULAlgebra:
    if not isinstance(L, CdglPresentation):
        raise NotFree("the enveloping algebra is only built for free presentations")
    return ULAlgebra(L, L.cap if cap is None else cap)


# ---------------------------------------------------------------------------
# Quotient homology helper


def quotient_homology(basis_k: Sequence[Mapping], basis_up: Sequence[Mapping], rel_k: Sequence[Mapping],
                      rel_down: Sequence[Mapping], d) -> int:
    """Homology of ``C / I`` in one degree, given spanning data as vectors."""
    rk = exactla.rank_of_vectors(rel_k)
    rdown = exactla.rank_of_vectors(rel_down)
    out_imgs = [d(b) for b in basis_k]
    in_imgs = [d(b) for b in basis_up]
    dim_q = exactla.rank_of_vectors(list(basis_k) + list(rel_k)) - rk
    r_out = exactla.rank_of_vectors(out_imgs + list(rel_down)) - rdown
    r_in = exactla.rank_of_vectors(in_imgs + list(rel_k)) - rk
    return dim_q - r_out - r_in


@dataclass
class ModuleHomology:
    dims: dict
    complete: dict  # degree -> bool
    weights: dict = field(default_factory=dict)  # (degree, weight) -> dim when requested

    def to_json(self) -> dict:
        return {"dims": {str(k): v for k, v in sorted(self.dims.items())},
                "complete": {str(k): v for k, v in sorted(self.complete.items())}}


def _vec_sub(x: dict, y: dict) -> dict:
    out = dict(x)
    for k, v in y.items():
        nv = out.get(k, 0) - v
        if nv:
            out[k] = nv
        else:
            out.pop(k, None)
    return out


def _vec_add_scaled(acc: dict, v: Mapping, c) -> None:
    for k, x in v.items():
        nv = acc.get(k, 0) + c * x
        if nv:
            acc[k] = nv
        else:
            acc.pop(k, None)


# ---------------------------------------------------------------------------
# Modules


class ULModule:
    """A semifree module ``(UL (x) W, d)`` or a quotient of one by the
    submodule generated by ``relations``.

    ``stages`` maps generator names to their stage in the filtration
    ``W(0) <= W(1) <= ...``; ``connected`` marks the connected cover view
    (negative degrees dropped, degree 0 replaced by the cycles).
    """

    def __init__(self, base: CdglPresentation, generators: Iterable[Generator], differential: Mapping,
                 relations: Sequence = (), cap: int | None = None, stages: Mapping | None = None,
                 connected: bool = False, name: str = ""):
        self.base = base
        self.generators = tuple(generators)
        self.cap = base.cap if cap is None else cap
        self.name = name
        clash = [g.name for g in self.generators if g.name in base.alphabet]
        if clash:
            raise PresentationError(f"module generators clash with base generators: {clash}")
        self.alphabet = Alphabet(tuple(base.alphabet.generators) + tuple(
            Generator(g.name, g.degree, g.tags, 0) for g in self.generators))
        self.gen_names = frozenset(g.name for g in self.generators)
        self.gen_degree = {g.name: g.degree for g in self.generators}
        diff = {}
        for k, v in differential.items():
            if k not in self.gen_names:
                raise PresentationError(f"differential on unknown generator {k!r}")
            v = self.element(v)
            if v.terms and v.degrees() != {self.gen_degree[k] - 1}:
                raise PresentationError(f"d{k} must have degree {self.gen_degree[k] - 1}")
            if v.terms:
                diff[k] = v
        self.differential = diff
        self.relations = tuple(self.element(r) for r in relations)
        self.connected = connected
        self.stages = dict(stages) if stages is not None else _infer_stages(self)
        self._images = dict(base.differential)
        for k, v in base.differential.items():
            self._images[k] = v.embed(self.alphabet, self.cap + 1)
        self._images.update(diff)
        self._basis_cache: dict = {}

    # element handling
    @property
    def kind(self) -> str:
        return "quotient" if self.relations else "semifree"

    def element(self, v) -> TensorElt:
        if isinstance(v, TensorElt):
            v = TensorElt(self.alphabet, self.cap + 1, v.terms)
        elif isinstance(v, Mapping):
            v = TensorElt(self.alphabet, self.cap + 1, {tuple(k) if not isinstance(k, str) else tuple(k.split(".")): Fraction(c)
                                                        for k, c in v.items()})
        else:
            v = evaluate_module_expression(v, self)
        for w in v.terms:
            if not w or w[-1] not in self.gen_names or any(x in self.gen_names for x in w[:-1]):
                raise PresentationError(f"word {w} is not of the form (base word, generator)")
        return v

    def gen(self, name: str) -> TensorElt:
        return TensorElt(self.alphabet, self.cap + 1, {(name,): Fraction(1)}, _clean=True)

    def act(self, a: TensorElt, m: TensorElt) -> TensorElt:
        a = TensorElt(self.alphabet, self.cap + 1, a.terms)
        return a.product(m)

    def d(self, m: TensorElt) -> TensorElt:
        return apply_derivation(m, self._images, -1)

    def d_vec(self, v: Mapping) -> dict:
        return self.d(TensorElt(self.alphabet, self.cap + 1, v, _clean=True)).terms

    # chain spaces
    def min_base_degree(self) -> int | None:
        degs = [g.degree for g in self.base.generators]
        return min(degs) if degs else None

    def words_in_degree(self, j: int) -> list:
        words = ul_words(self.base.alphabet, self.cap)
        out = []
        for g in self.generators:
            for u in words.get(j - g.degree, ()):
                out.append(u + (g.name,))
        return out

    def chain_basis(self, j: int) -> list[dict]:
        """A basis (as vectors) of the chain space in degree ``j``, before
        quotienting by relations."""
        if j in self._basis_cache:
            return self._basis_cache[j]
        if self.connected and j < 0:
            out = []
        elif self.connected and j == 0:
            raw = [{w: Fraction(1)} for w in self.words_in_degree(0)]
            rel_down = self.relation_span(-1)
            cols = [self.d_vec(b) for b in raw] + rel_down
            kern = exactla.kernel_of_columns(cols)
            out = []
            for vec in kern:
                z: dict = {}
                for i, c in vec.items():
                    if i < len(raw):
                        _vec_add_scaled(z, raw[i], c)
                if z:
                    out.append(z)
            keep = exactla.independent_subset(out) if out else []
            out = [out[i] for i in keep]
        else:
            out = [{w: Fraction(1)} for w in self.words_in_degree(j)]
        self._basis_cache[j] = out
        return out

    def relation_span(self, j: int) -> list[dict]:
        if not self.relations:
            return []
        words = ul_words(self.base.alphabet, self.cap)
        out = []
        for r in self.relations:
            for dr in r.degrees():
                for u in words.get(j - dr, ()):
                    prod = TensorElt(self.alphabet, self.cap + 1, {u: Fraction(1)}, _clean=True).product(r)
                    if prod.terms:
                        out.append(prod.terms)
        return out

    def complete_degree(self, j: int) -> bool:
        """No word longer than the cap lands in degrees ``j - 1 .. j + 1``."""
        delta = self.min_base_degree()
        if delta is None or not self.generators:
            return True
        if delta <= 0:
            return False
        low = min(g.degree for g in self.generators)
        return (self.cap + 1) * delta + low > j + 1

    def is_weight_homogeneous(self) -> bool:
        """Whether ``d`` preserves the length of the base word."""
        for k, v in self.base.differential.items():
            if any(len(w) != 1 for w in v.terms):
                return False
        for k, v in self.differential.items():
            if any(len(w) != 1 for w in v.terms):
                return False
        return True

    def homology(self, window: tuple, weights: bool = False) -> ModuleHomology:
        lo, hi = window
        dims, complete, wdims = {}, {}, {}
        for j in range(lo, hi + 1):
            bk, bu = self.chain_basis(j), self.chain_basis(j + 1)
            dims[j] = quotient_homology(bk, bu, self.relation_span(j), self.relation_span(j - 1), self.d_vec)
            complete[j] = self.complete_degree(j)
            if weights:
                if not self.is_weight_homogeneous() or self.relations or self.connected:
                    raise InputError("weight-graded homology needs a homogeneous semifree module")
                for wt in range(self.cap + 1):
                    sk = [b for b in bk if len(next(iter(b))) - 1 == wt]
                    su = [b for b in bu if len(next(iter(b))) - 1 == wt]
                    h = quotient_homology(sk, su, [], [], self.d_vec)
                    if h:
                        wdims[(j, wt)] = h
        return ModuleHomology(dims, complete, wdims)

    def chain_dims(self, window: tuple) -> dict:
        lo, hi = window
        return {j: exactla.rank_of_vectors(self.chain_basis(j) + self.relation_span(j))
                - exactla.rank_of_vectors(self.relation_span(j)) for j in range(lo, hi + 1)}

    # structure
    def check_square_zero(self) -> bool:
        for g in self.generators:
            if self.d(self.d(self.gen(g.name))).terms:
                return False
        return True

    def staging_holds(self) -> bool:
        for g in self.generators:
            k = self.stages.get(g.name, 0)
            dv = self.differential.get(g.name)
            if dv is None:
                continue
            for w in dv.terms:
                if self.stages.get(w[-1], 0) >= k:
                    return False
        return True

    def shift(self, j: int) -> "ULModule":
        """``s^j`` of the module.

        Generators move up ``j`` degrees.  The shift is transported along
        ``u w -> (-1)^{j|u|} u s^j w``, so ``d(s^j w)`` is ``(-1)^j`` times
        the transported ``dw``.
        """
        if j == 0:
            return self
        ren = {g.name: shifted_name(g.name, j) for g in self.generators}
        gens = [Generator(ren[g.name], g.degree + j, g.tags) for g in self.generators]
        out_alpha = Alphabet(tuple(self.base.alphabet.generators) + tuple(gens))
        base_deg = self.base.alphabet.word_degree

        def move(v, sign):
            return TensorElt(out_alpha, self.cap + 1,
                             {w[:-1] + (ren[w[-1]],): (-c if (j * base_deg(w[:-1])) % 2 else c) * sign
                              for w, c in v.terms.items()})

        outer = -1 if j % 2 else 1
        diff = {ren[k]: move(v, outer) for k, v in self.differential.items()}
        rels = [move(r, 1) for r in self.relations]
        return ULModule(self.base, gens, diff, rels, self.cap,
                        {ren[k]: v for k, v in self.stages.items()}, connected=False, name=self.name)

    def connected_cover(self) -> "ULModule":
        return ULModule(self.base, self.generators, self.differential, self.relations, self.cap,
                        self.stages, connected=True, name=self.name)

    def presentation_signature(self) -> tuple:
        """Generator degrees and differential with generators replaced by their
        position in (degree, name) order, for comparison up to renaming."""
        order = sorted(self.generators, key=lambda g: (g.degree, g.name))
        idx = {g.name: i for i, g in enumerate(order)}
        diff = []
        for g in order:
            v = self.differential.get(g.name)
            terms = tuple(sorted((w[:-1], idx[w[-1]], c) for w, c in v.terms.items())) if v else ()
            diff.append(terms)
        rels = tuple(sorted(tuple(sorted((w[:-1], idx[w[-1]], c) for w, c in r.terms.items()))
                            for r in self.relations))
        return (tuple(g.degree for g in order), tuple(diff), rels, self.connected)

    def isomorphic_presentation(self, other: "ULModule") -> bool:
        return (self.base.alphabet == other.base.alphabet and self.cap == other.cap
                and self.presentation_signature() == other.presentation_signature())

    def rename_generators(self, mapping: Mapping) -> "ULModule":
        gens = [Generator(mapping.get(g.name, g.name), g.degree, g.tags) for g in self.generators]
        out_alpha = Alphabet(tuple(self.base.alphabet.generators) + tuple(gens))
        diff = {mapping.get(k, k): TensorElt(out_alpha, self.cap + 1,
                                              {w[:-1] + (mapping.get(w[-1], w[-1]),): c for w, c in v.terms.items()})
                for k, v in self.differential.items()}
        rels = [TensorElt(out_alpha, self.cap + 1, {w[:-1] + (mapping.get(w[-1], w[-1]),): c
                                                    for w, c in r.terms.items()}) for r in self.relations]
        return ULModule(self.base, gens, diff, rels, self.cap,
                        {mapping.get(k, k): v for k, v in self.stages.items()}, self.connected, self.name)

    def __repr__(self):
        return f"ULModule({[(g.name, g.degree) for g in self.generators]}, kind={self.kind}, cap={self.cap})"

    # serialisation
    def to_json(self) -> dict:
        return {
            "base": self.base.to_json(),
            "generators": [{"name": g.name, "degree": g.degree, "stage": self.stages.get(g.name, 0)}
                           for g in self.generators],
            "differential": {g.name: module_expression(self.differential[g.name])
                             for g in self.generators if g.name in self.differential},
            "relations": [module_expression(r) for r in self.relations],
            "cap": self.cap,
        }

    @classmethod
    def from_json(cls, data: Mapping, cap: int | None = None) -> "ULModule":
        from .errors import ParseError

        try:
            base = CdglPresentation.from_json(data["base"], cap)
            gens = [Generator(str(g["name"]), int(g["degree"])) for g in data.get("generators", [])]
            stages = {str(g["name"]): int(g.get("stage", 0)) for g in data.get("generators", [])}
            mcap = int(cap if cap is not None else data.get("cap", base.cap))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad module: {exc}") from exc
        shell = cls(base, gens, {}, (), mcap, stages)
        diff = {k: evaluate_module_expression(v, shell) for k, v in data.get("differential", {}).items()}
        rels = [evaluate_module_expression(r, shell) for r in data.get("relations", [])]
        return cls(base, gens, diff, rels, mcap, stages if any(stages.values()) else None)


def shifted_name(name: str, j: int) -> str:
    """Canonical name of ``s^j`` applied to a generator: ``w[k]`` means ``s^k w``."""
    base, k = name, 0
    if name.endswith("]") and "[" in name:
        head, _, tail = name.rpartition("[")
        try:
            k = int(tail[:-1])
            base = head
        except ValueError:
            base, k = name, 0
    k += j
    return base if k == 0 else f"{base}[{k}]"


def _infer_stages(M: ULModule) -> dict:
    """Least stages making ``dW(k)`` land in ``UL (x) W(k-1)``; generators on
    a dependency cycle get no stage (semifree fails)."""
    deps = {g.name: {w[-1] for w in M.differential[g.name].terms} if g.name in M.differential else set()
            for g in M.generators}
    stages: dict = {}
    remaining = set(deps)
    while remaining:
        ready = [n for n in remaining if all(d in stages for d in deps[n])]
        if not ready:
            break
        for n in ready:
            stages[n] = 0 if not deps[n] else 1 + max(stages[d] for d in deps[n])
            remaining.discard(n)
    if remaining:
        for n in remaining:
            stages[n] = 10 ** 6
    return stages


def module_expression(v: TensorElt):
    """``[["3/2", ["x","x"], "w"], ...]``: coefficient, base word, generator."""
    return [[format_q(c), list(w[:-1]), w[-1]] for w, c in sorted(v.terms.items(), key=lambda t: (len(t[0]), t[0]))]


def evaluate_module_expression(expr, M: ULModule) -> TensorElt:
    from .errors import ParseError

    if isinstance(expr, Mapping):
        return M.element(expr)
    terms = {}
    try:
        for coef, word, gen in expr:
            key = tuple(word) + (gen,)
            terms[key] = terms.get(key, 0) + Fraction(coef)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad module expression {expr!r}") from exc
    return M.element(TensorElt(M.alphabet, M.cap + 1, terms))


def free_module(base: CdglPresentation, generators: Iterable[Generator], cap: int | None = None,
                differential: Mapping | None = None) -> ULModule:
    return ULModule(base, generators, differential or {}, (), cap)


def uhat_module(L: CdglPresentation, cap: int | None = None, name: str = "1") -> ULModule:
    """The enveloping algebra as a module over itself: one generator in degree 0."""
    return ULModule(L, [Generator(name, 0)], {}, (), cap)


def zero_module(L: CdglPresentation, cap: int | None = None) -> ULModule:
    return ULModule(L, [], {}, (), cap)


# ---------------------------------------------------------------------------
# Maps, semifree resolutions


@dataclass
class ModuleMap:
    """A degree-0 module map given on generators."""

    source: ULModule
    target: ULModule
    images: dict  # generator of source -> element of target

    def apply_vec(self, v: Mapping) -> dict:
        out: dict = {}
        T = self.target
        for w, c in v.items():
            img = self.images.get(w[-1])
            if img is None or not img.terms:
                continue
            u = TensorElt(T.alphabet, T.cap + 1, {w[:-1]: Fraction(1)}, _clean=True)
            _vec_add_scaled(out, u.product(img).terms, c)
        return out

    def is_chain_map(self) -> bool:
        for g in self.source.generators:
            v = {(g.name,): Fraction(1)}
            lhs = self.apply_vec(self.source.d_vec(v))
            rhs = self.target.d_vec(self.apply_vec(v))
            rel = self.target.relation_span(g.degree - 1)
            diff = _vec_sub(lhs, rhs)
            if diff and exactla.rank_of_vectors(rel + [diff]) != exactla.rank_of_vectors(rel):
                return False
        return True

    def induced_rank(self, j: int) -> int:
        """Rank of the map on homology in degree ``j``."""
        S, T = self.source, self.target
        bk = S.chain_basis(j)
        rel_s_down = S.relation_span(j - 1)
        cols = [S.d_vec(b) for b in bk] + rel_s_down
        kern = exactla.kernel_of_columns(cols)
        cycles = []
        for vec in kern:
            z: dict = {}
            for i, c in vec.items():
                if i < len(bk):
                    _vec_add_scaled(z, bk[i], c)
            if z:
                cycles.append(z)
        bnd = [T.d_vec(b) for b in T.chain_basis(j + 1)] + T.relation_span(j)
        imgs = [self.apply_vec(z) for z in cycles]
        return exactla.rank_of_vectors(bnd + imgs) - exactla.rank_of_vectors(bnd)

    def is_quasi_isomorphism(self, window: tuple) -> bool:
        hs = self.source.homology(window).dims
        ht = self.target.homology(window).dims
        for j in range(window[0], window[1] + 1):
            if hs[j] != ht[j] or self.induced_rank(j) != hs[j]:
                return False
        return True


@dataclass
class Resolution:
    module: ULModule
    map: ModuleMap
    window: tuple
    certified: bool
    stage_limit: bool = False
    caveats: list = field(default_factory=list)


def _cycles_and_lifts(P: ULModule, R: ULModule, phi: ModuleMap, j: int, old_gens: set):
    """Cycles of the old part of ``P`` in degree ``j`` whose image is a
    boundary in ``R``, modulo boundaries of the current ``P``."""
    basis = [b for b in P.chain_basis(j) if next(iter(b))[-1] in old_gens]
    if not basis:
        return []
    dcols = [P.d_vec(b) for b in basis]
    kern = exactla.kernel_of_columns(dcols) if any(dcols) else [{i: Fraction(1)} for i in range(len(basis))]
    cycles = []
    for vec in kern:
        z: dict = {}
        for i, c in vec.items():
            _vec_add_scaled(z, basis[i], c)
        if z:
            cycles.append(z)
    if not cycles:
        return []
    r_up = R.chain_basis(j + 1)
    r_bnd = [R.d_vec(b) for b in r_up]
    r_rel = R.relation_span(j)
    p_bnd = [P.d_vec(b) for b in P.chain_basis(j + 1)]
    # combinations of cycles whose image is a boundary modulo relations
    images = [phi.apply_vec(z) for z in cycles]
    cols = images + r_bnd + r_rel
    solutions = exactla.kernel_of_columns(cols) if any(cols) else [{i: Fraction(1)} for i in range(len(cols))]
    keys: set = set()
    for group in (p_bnd, cycles):
        for v in group:
            keys.update(v)
    killed = exactla.Echelon({k: i for i, k in enumerate(sorted(keys, key=repr))}, track=False)
    for v in p_bnd:
        killed.insert(v)
    out = []
    for vec in solutions:
        z: dict = {}
        lift: dict = {}
        for idx, c in sorted(vec.items()):
            if idx < len(cycles):
                _vec_add_scaled(z, cycles[idx], c)
            elif idx < len(cycles) + len(r_up):
                _vec_add_scaled(lift, r_up[idx - len(cycles)], -c)
        if not z or not killed.insert(z):
            continue
        out.append((z, lift))
    return out


def semifree_resolution(R: ULModule, window: tuple, max_stages: int = 8) -> Resolution:
    lo, hi = window
    if R.kind == "semifree" and not R.connected and R.staging_holds():
        ident = ModuleMap(R, R, {g.name: R.gen(g.name) for g in R.generators})
        return Resolution(R, ident, window, True)
    base = R.base
    gens: list = []
    diff: dict = {}
    stages: dict = {}
    images: dict = {}
    n = 0

    def build():
        return ULModule(base, gens, diff, (), R.cap, stages)

    def fresh():
        nonlocal n
        name = f"r{n}"
        n += 1
        while name in base.alphabet or name in R.gen_names:
            name = f"r{n}"
            n += 1
        return name

    # stage 0: a cycle for every homology class of R
    P = build()
    for j in range(lo, hi + 1):
        reps = module_homology_representatives(R, j)
        for z in reps:
            name = fresh()
            gens.append(Generator(name, j))
            stages[name] = 0
            images[name] = z
    P = build()
    phi = ModuleMap(P, R, {k: TensorElt(R.alphabet, R.cap + 1, v) for k, v in images.items()})
    limit = False
    for stage in range(1, max_stages + 1):
        old = set(stages)
        added = False
        for j in range(lo, hi + 1):
            P = build()
            phi = ModuleMap(P, R, {k: TensorElt(R.alphabet, R.cap + 1, v) for k, v in images.items()})
            for z, lift in _cycles_and_lifts(P, R, phi, j, old):
                name = fresh()
                gens.append(Generator(name, j + 1))
                stages[name] = stage
                dz = {w: c for w, c in z.items()}
                images[name] = lift
                diff[name] = dz
                added = True
                P = build()
                phi = ModuleMap(P, R, {k: TensorElt(R.alphabet, R.cap + 1, v) for k, v in images.items()})
        if not added:
            break
    else:
        limit = True
    P = ULModule(base, gens, {k: TensorElt(Alphabet(tuple(base.alphabet.generators) + tuple(gens)), R.cap + 1, v)
                              for k, v in diff.items()}, (), R.cap, stages)
    phi = ModuleMap(P, R, {k: TensorElt(R.alphabet, R.cap + 1, v) for k, v in images.items()})
    certified = phi.is_chain_map() and phi.is_quasi_isomorphism(window) and P.staging_holds()
    caveats = []
    if limit:
        caveats.append("stage limit reached")
    incomplete = [j for j in range(lo, hi + 1) if not R.complete_degree(j)]
    if incomplete:
        caveats.append(f"weight-truncated degrees {incomplete}")
    return Resolution(P, phi, window, certified and not limit, limit, caveats)


def module_homology_representatives(R: ULModule, j: int) -> list[dict]:
    bk = R.chain_basis(j)
    rel_down = R.relation_span(j - 1)
    cols = [R.d_vec(b) for b in bk] + rel_down
    kern = exactla.kernel_of_columns(cols) if cols and any(cols) else [{i: Fraction(1)} for i in range(len(bk))]
    cycles = []
    for vec in kern:
        z: dict = {}
        for i, c in vec.items():
            if i < len(bk):
                _vec_add_scaled(z, bk[i], c)
        if z:
            cycles.append(z)
    bnd = [R.d_vec(b) for b in R.chain_basis(j + 1)] + R.relation_span(j)
    keys: set = set()
    for v in bnd + cycles:
        keys.update(v)
    order = {k: i for i, k in enumerate(sorted(keys, key=repr))}
    ech = exactla.Echelon(order, track=False)
    for v in bnd:
        ech.insert(v)
    return [z for z in cycles if ech.insert(z)]


def module_homology(R, window: tuple) -> ModuleHomology:
    return R.homology(window)


# ---------------------------------------------------------------------------
# Ext


@dataclass
class ExtReport:
    dims: dict
    caveats: list

    def to_json(self) -> dict:
        return {"dims": {str(k): v for k, v in sorted(self.dims.items())}, "caveats": list(self.caveats)}


def _module_degree_range(S) -> tuple:
    """Degrees in which the truncated module can be nonzero."""
    words = ul_words(S.base.alphabet, S.cap)
    degs = [g.degree + d for g in S.generators for d in words]
    if not degs:
        return (0, -1)
    return (min(degs), max(degs))


def ext(R: ULModule, S: ULModule, window: tuple, max_stages: int = 8) -> ExtReport:
    """``Ext(R, S)_k`` as homology of ``Hom(W, S)`` for a semifree resolution
    ``UL (x) W`` of ``R``; a map of degree ``k`` raises degrees by ``k``."""
    if R.base.alphabet != S.base.alphabet:
        raise BaseMismatch("ext needs modules over the same base")
    klo, khi = window
    smin, smax = _module_degree_range(S)
    rmin, _ = _module_degree_range(R)
    res = semifree_resolution(R, (min(rmin, smin - khi - 1), smax - klo + 1), max_stages)
    P = res.module
    caveats = list(res.caveats)
    if not res.certified:
        caveats.append("resolution not certified")

    sbases: dict = {}

    def sbasis(j):
        if j not in sbases:
            sbases[j] = S.chain_basis(j)
        return sbases[j]

    def hom_basis(k):
        out = []
        for g in P.generators:
            for b in sbasis(g.degree + k):
                out.append({(g.name, w): c for w, c in b.items()})
        return out

    def hom_rel(k):
        out = []
        for g in P.generators:
            for r in S.relation_span(g.degree + k):
                out.append({(g.name, w): c for w, c in r.items()})
        return out

    def D(k):
        def apply(f: Mapping) -> dict:
            # f is supported on (generator, word) pairs of hom degree k
            vals: dict = {}
            for (g, w), c in f.items():
                vals.setdefault(g, {})[w] = c
            out: dict = {}
            for g, val in vals.items():
                for w, c in S.d_vec(val).items():
                    out[(g, w)] = out.get((g, w), 0) + c
            sign_k = -1 if k % 2 else 1
            for gen in P.generators:
                dv = P.differential.get(gen.name)
                if dv is None:
                    continue
                for word, c in dv.terms.items():
                    u, tgt = word[:-1], word[-1]
                    if tgt not in vals:
                        continue
                    du = P.alphabet.word_degree(u)
                    s = -sign_k * (-1 if (k * du) % 2 else 1)
                    uu = TensorElt(S.alphabet, S.cap + 1, {u: Fraction(1)}, _clean=True)
                    img = uu.product(TensorElt(S.alphabet, S.cap + 1, vals[tgt], _clean=True))
                    for w2, c2 in img.terms.items():
                        key = (gen.name, w2)
                        nv = out.get(key, 0) + s * c * c2
                        if nv:
                            out[key] = nv
                        else:
                            out.pop(key, None)
            return {k2: v for k2, v in out.items() if v}

        return apply

    dims = {}
    for k in range(klo, khi + 1):
        hk, hu = hom_basis(k), hom_basis(k + 1)
        rk, rd = hom_rel(k), hom_rel(k - 1)
        rk_rank = exactla.rank_of_vectors(rk)
        rd_rank = exactla.rank_of_vectors(rd)
        dk, du = D(k), D(k + 1)
        dim_q = exactla.rank_of_vectors(hk + rk) - rk_rank
        r_out = exactla.rank_of_vectors([dk(f) for f in hk] + rd) - rd_rank
        r_in = exactla.rank_of_vectors([du(f) for f in hu] + rk) - rk_rank
        dims[k] = dim_q - r_out - r_in
    return ExtReport(dims, caveats)


# ---------------------------------------------------------------------------
# Diagonal tensor product


class TensorProductModule:
    """``R (x) S`` over the rationals with the diagonal action and the tensor
    differential; elements are dicts keyed by pairs of module words."""

    def __init__(self, R: ULModule, S: ULModule, cap: int | None = None):
        if R.base.alphabet != S.base.alphabet:
            raise BaseMismatch("diagonal tensor product needs a common base")
        if R.relations or S.relations:
            raise PresentationError("diagonal tensor product is implemented for semifree factors")
        self.R, self.S = R, S
        self.base = R.base
        self.cap = min(R.cap, S.cap) if cap is None else cap
        self.connected = False
        self.relations = ()

    def _deg_r(self, w):
        return self.R.alphabet.word_degree(w)

    def chain_basis(self, j: int) -> list[dict]:
        R, S = self.R, self.S
        rlo, rhi = _module_degree_range(R)
        out = []
        for a in range(rlo, rhi + 1):
            rb = R.chain_basis(a)
            if not rb:
                continue
            sb = S.chain_basis(j - a)
            for r in rb:
                for s in sb:
                    vec = {}
                    for w1, c1 in r.items():
                        for w2, c2 in s.items():
                            if len(w1) + len(w2) - 2 <= self.cap:
                                vec[(w1, w2)] = c1 * c2
                    if vec:
                        out.append(vec)
        return out

    def relation_span(self, j: int) -> list:
        return []

    def d_vec(self, v: Mapping) -> dict:
        out: dict = {}
        R, S = self.R, self.S
        for (w1, w2), c in v.items():
            for x, c1 in R.d_vec({w1: Fraction(1)}).items():
                if len(x) + len(w2) - 2 <= self.cap:
                    out[(x, w2)] = out.get((x, w2), 0) + c * c1
            s = -1 if self._deg_r(w1) % 2 else 1
            for y, c2 in S.d_vec({w2: Fraction(1)}).items():
                if len(w1) + len(y) - 2 <= self.cap:
                    out[(w1, y)] = out.get((w1, y), 0) + s * c * c2
        return {k: v for k, v in out.items() if v}

    def act_letter(self, x: str, v: Mapping) -> dict:
        """Diagonal action of a base generator."""
        R = self.R
        dx = R.alphabet.degree(x)
        out: dict = {}
        for (w1, w2), c in v.items():
            a = TensorElt(R.alphabet, R.cap + 1, {(x,) + w1: Fraction(1)})
            for k, c1 in a.terms.items():
                if len(k) + len(w2) - 2 <= self.cap:
                    out[(k, w2)] = out.get((k, w2), 0) + c * c1
            s = -1 if (dx * self._deg_r(w1)) % 2 else 1
            b = TensorElt(self.S.alphabet, self.S.cap + 1, {(x,) + w2: Fraction(1)})
            for k, c2 in b.terms.items():
                if len(w1) + len(k) - 2 <= self.cap:
                    out[(w1, k)] = out.get((w1, k), 0) + s * c * c2
        return {k: v for k, v in out.items() if v}

    def homology(self, window: tuple, weights: bool = False) -> ModuleHomology:
        lo, hi = window
        dims, complete, wdims = {}, {}, {}
        for j in range(lo, hi + 1):
            bk, bu = self.chain_basis(j), self.chain_basis(j + 1)
            dims[j] = quotient_homology(bk, bu, [], [], self.d_vec)
            complete[j] = self.R.complete_degree(j - _min_degree(self.S)) and self.S.complete_degree(j - _min_degree(self.R))
            if weights:
                for wt in range(self.cap + 1):
                    sk = [b for b in bk if _pair_weight(b) == wt]
                    su = [b for b in bu if _pair_weight(b) == wt]
                    h = quotient_homology(sk, su, [], [], self.d_vec)
                    if h:
                        wdims[(j, wt)] = h
        return ModuleHomology(dims, complete, wdims)

    def chain_dims(self, window: tuple) -> dict:
        return {j: len(self.chain_basis(j)) for j in range(window[0], window[1] + 1)}


def _pair_weight(b: Mapping) -> int:
    w1, w2 = next(iter(b))
    return len(w1) + len(w2) - 2


def _min_degree(M: ULModule) -> int:
    return min((g.degree for g in M.generators), default=0)


def tensor_diag(R: ULModule, S: ULModule, cap: int | None = None) -> TensorProductModule:
    return TensorProductModule(R, S, cap)


def swap_is_isomorphism(T: TensorProductModule, window: tuple) -> bool:
    """The Koszul swap ``r (x) s -> (-1)^{|r||s|} s (x) r`` is a chain isomorphism."""
    U = TensorProductModule(T.S, T.R, T.cap)
    for j in range(window[0], window[1] + 1):
        src = T.chain_basis(j)
        if len(src) != len(U.chain_basis(j)):
            return False

        def swap(v):
            out = {}
            for (w1, w2), c in v.items():
                s = -1 if (T.R.alphabet.word_degree(w1) * T.S.alphabet.word_degree(w2)) % 2 else 1
                out[(w2, w1)] = s * c
            return out

        for b in src:
            if _vec_sub(swap(T.d_vec(b)), U.d_vec(swap(b))):
                return False
    return True


# ---------------------------------------------------------------------------
# Change of base


def extend_scalars(phi: PresentationMap, R: ULModule, window: tuple | None = None) -> ULModule:
    """``UL' (x)_{UL} R`` computed on a semifree presentation of ``R``."""
    if R.base.alphabet != phi.source.alphabet:
        raise BaseMismatch("module base is not the source of the map")
    P = R
    if R.kind != "semifree" or not R.staging_holds():
        if window is None:
            raise PresentationError("extension of a non-semifree module needs a window to resolve in")
        P = semifree_resolution(R, window).module
    tgt = phi.target
    gens = list(P.generators)
    out_alpha = Alphabet(tuple(tgt.alphabet.generators) + tuple(gens))
    images = {k: v.embed(out_alpha, P.cap + 1) for k, v in phi.images.items()}
    diff = {}
    for k, v in P.differential.items():
        acc = TensorElt.zero(out_alpha, P.cap + 1)
        for w, c in v.terms.items():
            u = TensorElt(P.alphabet, P.cap + 1, {w[:-1]: Fraction(1)}, _clean=True)
            mapped = TensorElt(out_alpha, P.cap + 1, {}, _clean=True)
            mapped = u.substitute(images, out_alpha, P.cap + 1)
            acc = acc + mapped.product(TensorElt(out_alpha, P.cap + 1, {(w[-1],): c}))
        diff[k] = acc
    return ULModule(tgt, gens, diff, (), P.cap, P.stages)


class RestrictedModule:
    """A module over ``L'`` viewed over ``L`` through ``phi``: same chain
    complex, action read through the induced algebra map."""

    def __init__(self, phi: PresentationMap, S: ULModule):
        if S.base.alphabet != phi.target.alphabet:
            raise BaseMismatch("module base is not the target of the map")
        self.phi = phi
        self.module = S
        self.base = phi.source
        self.cap = S.cap
        self.relations = S.relations
        self.connected = S.connected

    def act(self, a: TensorElt, m: TensorElt) -> TensorElt:
        return self.module.act(self.phi.apply(a), m)

    def chain_basis(self, j):
        return self.module.chain_basis(j)

    def relation_span(self, j):
        return self.module.relation_span(j)

    def d_vec(self, v):
        return self.module.d_vec(v)

    def homology(self, window, weights=False):
        return self.module.homology(window, weights)

    def chain_dims(self, window):
        return self.module.chain_dims(window)


def restrict_scalars(phi: PresentationMap, S: ULModule) -> RestrictedModule:
    return RestrictedModule(phi, S)

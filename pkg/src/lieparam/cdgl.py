"""Free complete dgl's in a nilpotent quotient.

A :class:`CdglPresentation` is a free Lie algebra on graded generators with
a differential given on generators, computed modulo brackets of length
greater than the cap.  On top of it: the Maurer-Cartan equation, perturbed
differentials, components, the gauge action, the interval model with its
Bernoulli series, higher simplex models, models of finite simplicial sets,
homology and the graded-quotient test for weak equivalences.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Iterable, Mapping, Sequence

from . import exactla
from .errors import (
    CertificateFailure,
    DegreeError,
    DimensionUnsupported,
    InputError,
    NotMaurerCartan,
    ParseError,
    SolveFailure,
)
from .freelie import (
    Alphabet,
    Generator,
    LieBasis,
    LieElt,
    TensorElt,
    apply_derivation,
    ad_power,
    bernoulli,
    bracket,
    bch,
    degree_component,
    evaluate_expression,
    generator,
    lie_zero,
    weight_component,
)

HALF = Fraction(1, 2)
MAX_SIMPLEX_DIM = 3


class CdglPresentation:
    """``(L(V), d)`` with ``d`` given on the generators.

    ``differential`` maps generator names to elements over the same alphabet
    (missing names mean ``d = 0``).  ``mc`` lists generators declared to be
    Maurer-Cartan elements; this is only metadata, :func:`is_mc` decides.
    """

    def __init__(self, generators: Iterable[Generator], differential: Mapping, cap: int,
                 degree_window: tuple | None = None, mc: Sequence[str] = (), name: str = ""):
        gens = tuple(generators)
        if cap < 1:
            raise InputError("cap must be at least 1")
        self.alphabet = Alphabet(gens)
        self.cap = cap
        self.name = name
        diff = {}
        for key, val in differential.items():
            if key not in self.alphabet:
                raise InputError(f"differential given on unknown generator {key!r}")
            if not isinstance(val, TensorElt):
                val = evaluate_expression(val, self.alphabet, cap)
            val = val.embed(self.alphabet, cap)
            if val.terms:
                want = self.alphabet.degree(key) - 1
                if val.degrees() != {want}:
                    raise DegreeError(f"d{key} must have degree {want}")
                if val.constant_term():
                    raise InputError(f"d{key} has a constant term")
                diff[key] = val if isinstance(val, LieElt) else val.as_lie()
        self.differential = diff
        for m in mc:
            if m not in self.alphabet:
                raise InputError(f"unknown MC generator {m!r}")
        self.mc = tuple(mc)
        if degree_window is None:
            degs = [g.degree for g in gens] or [0]
            degree_window = (min(degs) - 1, max(degs) * max(cap, 1) + 1)
        self.degree_window = tuple(degree_window)
        self._basis = None

    # basic access
    @property
    def generators(self) -> tuple:
        return self.alphabet.generators

    def gen(self, name: str) -> LieElt:
        return generator(self.alphabet, self.cap, name)

    def zero(self) -> LieElt:
        return lie_zero(self.alphabet, self.cap)

    def d_of(self, name: str) -> LieElt:
        return self.differential.get(name) or self.zero()

    def d(self, x: TensorElt) -> TensorElt:
        return apply_derivation(x.embed(self.alphabet, self.cap), self.differential, -1)

    def lie_basis(self) -> LieBasis:
        if self._basis is None:
            self._basis = LieBasis(self.alphabet, self.cap)
        return self._basis

    def with_differential(self, differential: Mapping, name: str | None = None) -> "CdglPresentation":
        return CdglPresentation(self.generators, differential, self.cap, self.degree_window, self.mc,
                                self.name if name is None else name)

    def with_cap(self, cap: int) -> "CdglPresentation":
        diff = {k: v.truncate(cap) for k, v in self.differential.items()}
        return CdglPresentation(self.generators, diff, cap, self.degree_window, self.mc, self.name)

    def rename(self, mapping: Mapping) -> "CdglPresentation":
        gens = [Generator(mapping.get(g.name, g.name), g.degree, g.tags, g.block) for g in self.generators]
        alpha = Alphabet(tuple(gens))
        diff = {mapping.get(k, k): v.map_letters(mapping, alpha) for k, v in self.differential.items()}
        return CdglPresentation(gens, diff, self.cap, self.degree_window,
                                [mapping.get(m, m) for m in self.mc], self.name)

    def same_as(self, other: "CdglPresentation") -> bool:
        if self.alphabet != other.alphabet or self.cap != other.cap:
            return False
        return all(self.d_of(g.name).terms == other.d_of(g.name).terms for g in self.generators)

    def __repr__(self):
        return f"CdglPresentation({[ (g.name, g.degree) for g in self.generators]}, cap={self.cap})"

    # serialisation
    def to_json(self) -> dict:
        return {
            "generators": [{"name": g.name, "degree": g.degree} for g in self.generators],
            "differential": {g.name: self.differential[g.name].expression()
                             for g in self.generators if g.name in self.differential},
            "mc": list(self.mc),
            "cap": self.cap,
        }

    @classmethod
    def from_json(cls, data: Mapping, cap: int | None = None) -> "CdglPresentation":
        try:
            gens = [Generator(str(g["name"]), int(g["degree"])) for g in data["generators"]]
            use_cap = int(cap if cap is not None else data.get("cap", 6))
            diff = dict(data.get("differential", {}))
            mc = list(data.get("mc", []))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad cdgl presentation: {exc}") from exc
        return cls(gens, diff, use_cap, mc=mc)


# ---------------------------------------------------------------------------
# Differential checks and the MC calculus


@dataclass
class DifferentialReport:
    ok: bool
    failures: dict = field(default_factory=dict)  # generator -> d^2 of it

    def to_json(self) -> dict:
        from .freelie import format_terms

        return {"ok": self.ok, "failures": {k: format_terms(v.terms) for k, v in sorted(self.failures.items())}}


def check_differential(L: CdglPresentation) -> DifferentialReport:
    failures = {}
    for g in L.generators:
        dd = L.d(L.d_of(g.name))
        if dd.terms:
            failures[g.name] = dd
    return DifferentialReport(not failures, failures)


def mc_curvature(L: CdglPresentation, a: TensorElt) -> TensorElt:
    a = a.embed(L.alphabet, L.cap)
    return L.d(a) + bracket(a, a).scale(HALF)


def _require_degree(a: TensorElt, d: int, what: str):
    if a.terms and a.degrees() != {d}:
        raise DegreeError(f"{what} must have degree {d}")


def is_mc(L: CdglPresentation, a: TensorElt) -> bool:
    _require_degree(a, -1, "Maurer-Cartan candidate")
    return not mc_curvature(L, a).terms


def perturb(L: CdglPresentation, a: TensorElt) -> CdglPresentation:
    """The presentation with differential ``d + ad_a``."""
    if not is_mc(L, a):
        raise NotMaurerCartan("perturbing element is not Maurer-Cartan")
    a = a.embed(L.alphabet, L.cap)
    if not a.terms:
        return L
    diff = {}
    for g in L.generators:
        diff[g.name] = L.d_of(g.name) + bracket(a, L.gen(g.name))
    return L.with_differential(diff)


def gauge(L: CdglPresentation, z: TensorElt, y: TensorElt) -> LieElt:
    """Action of a degree-0 element on an MC element:
    ``y - sum_k ad_z^k (dz - [z, y]) / (k+1)!``."""
    _require_degree(z, 0, "gauge parameter")
    if not is_mc(L, y):
        raise NotMaurerCartan("gauge target is not Maurer-Cartan")
    z = z.embed(L.alphabet, L.cap)
    y = y.embed(L.alphabet, L.cap)
    seed = L.d(z) - bracket(z, y)
    total = TensorElt.zero(L.alphabet, L.cap)
    term = seed
    k = 0
    while term.terms and k <= L.cap:
        total = total + term.scale(Fraction(1, factorial(k + 1)))
        term = bracket(z, term)
        k += 1
    return (y - total).as_lie()


@dataclass
class Component:
    """Chain-complex view of the connected cover of ``(L, d_a)``: positive
    degrees unchanged, degree 0 replaced by the cycles, negative degrees
    dropped."""

    presentation: CdglPresentation
    at: TensorElt

    def homology(self, window: tuple) -> "HomologyReport":
        lo, hi = window
        rep = homology(self.presentation, (max(lo, 0), hi))
        dims = {k: (rep.dims.get(k, 0) if k >= 0 else 0) for k in range(lo, hi + 1)}
        return HomologyReport(dims, rep.cap, rep.edge_degrees, rep.representatives)


def component(L: CdglPresentation, a: TensorElt) -> Component:
    return Component(perturb(L, a), a.embed(L.alphabet, L.cap))


# ---------------------------------------------------------------------------
# Interval and simplex models


def ls_interval(cap: int) -> CdglPresentation:
    """Interval model on ``a, b`` (degree -1) and ``c`` (degree 0)."""
    gens = [Generator("a", -1), Generator("b", -1), Generator("c", 0)]
    alpha = Alphabet(tuple(gens))
    a, b, c = (generator(alpha, cap, n) for n in "abc")
    diff = {"a": bracket(a, a).scale(-HALF), "b": bracket(b, b).scale(-HALF)}
    dc = bracket(c, b)
    term = b - a
    for n in range(cap + 1):
        if not term.terms:
            break
        bn = bernoulli(n)
        if bn:
            dc = dc + term.scale(bn / factorial(n))
        term = bracket(c, term)
    diff["c"] = dc
    return CdglPresentation(gens, diff, cap, mc=("a", "b"), name="interval")


def face_name(face: Sequence[int]) -> str:
    return "a" + "".join(str(i) for i in face)


def _faces(n: int) -> list[tuple]:
    from itertools import combinations

    out = []
    for k in range(1, n + 2):
        out.extend(combinations(range(n + 1), k))
    return out


_TOP_CACHE: dict = {}


def _relabel(elt: TensorElt, vertices: Sequence[int], alpha: Alphabet, cap: int) -> TensorElt:
    """Move an element written on the standard faces of ``Delta^k`` to the face
    spanned by ``vertices`` (an increasing tuple)."""
    mapping = {}
    for face in _faces(len(vertices) - 1):
        mapping[face_name(face)] = face_name(tuple(vertices[i] for i in face))
    return TensorElt(alpha, cap, {tuple(mapping[x] for x in w): c for w, c in elt.terms.items()})


def _top_differential(k: int, cap: int) -> TensorElt:
    """Differential of the top generator of the k-simplex model on standard labels."""
    key = (k, cap)
    if key in _TOP_CACHE:
        return _TOP_CACHE[key]
    faces = _faces(k)
    gens = [Generator(face_name(f), len(f) - 2) for f in faces]
    alpha = Alphabet(tuple(gens))
    if k == 0:
        a = generator(alpha, cap, "a0")
        out = bracket(a, a).scale(-HALF)
    elif k == 1:
        iv = ls_interval(cap).rename({"a": "a0", "b": "a1", "c": "a01"})
        out = iv.d_of("a01").embed(alpha, cap)
    else:
        out = _solve_top(k, cap, alpha, faces)
    _TOP_CACHE[key] = out
    return out


def _solve_top(k: int, cap: int, alpha: Alphabet, faces: list) -> TensorElt:
    top = tuple(range(k + 1))
    proper = [f for f in faces if f != top]
    # differential on proper faces, by relabelling lower top differentials
    diff = {}
    for f in proper:
        diff[face_name(f)] = _relabel(_top_differential(len(f) - 1, cap), f, alpha, cap)
    out = TensorElt.zero(alpha, cap)
    for i in range(k + 1):
        out = out + generator(alpha, cap, face_name(top[:i] + top[i + 1:])).scale((-1) ** i)
    top_name = face_name(top)
    linear = {name: weight_component(v, 1) for name, v in diff.items()}
    linear[top_name] = out
    # the top generator may occur in its own differential, as in the interval
    letters = [face_name(f) for f in faces]
    basis = LieBasis(alpha, cap)
    for w in range(2, cap + 1):
        diff[top_name] = out
        obstruction = weight_component(apply_derivation(out, diff, -1), w)
        if not obstruction.terms:
            continue
        candidates = basis.basis(w, letters=letters, degree=k - 2)
        columns = [apply_derivation(c, linear, -1).terms for c in candidates]
        sol = exactla.solve_columns(columns, (-obstruction).terms)
        if sol is None:
            raise SolveFailure(f"no correction at weight {w} for the {k}-simplex")
        corr = TensorElt.zero(alpha, cap)
        for idx in sorted(sol):
            corr = corr + candidates[idx].scale(sol[idx])
        out = out + corr
    diff[top_name] = out
    check = apply_derivation(out, diff, -1)
    if check.terms:
        raise SolveFailure(f"square of the differential does not vanish on the {k}-simplex")
    return out


def simplex_model(n: int, cap: int, max_dim: int = MAX_SIMPLEX_DIM) -> CdglPresentation:
    """Model of the standard n-simplex: one generator ``a<face>`` of degree
    ``dim - 1`` per face; vertices are Maurer-Cartan elements."""
    if n < 0 or n > max_dim:
        raise DimensionUnsupported(f"simplex dimension {n} exceeds the supported maximum {max_dim}")
    faces = _faces(n)
    gens = [Generator(face_name(f), len(f) - 2) for f in faces]
    alpha = Alphabet(tuple(gens))
    diff = {}
    for f in faces:
        diff[face_name(f)] = _relabel(_top_differential(len(f) - 1, cap), f, alpha, cap)
    verts = [face_name((i,)) for i in range(n + 1)]
    return CdglPresentation(gens, diff, cap, mc=verts, name=f"simplex{n}")


def restrict_to_face(model: CdglPresentation, vertices: Sequence[int]) -> CdglPresentation:
    """The sub-presentation on the generators of a face, relabelled to the
    standard simplex ``Delta^{len(vertices) - 1}``."""
    k = len(vertices) - 1
    mapping = {face_name(tuple(vertices[i] for i in f)): face_name(f) for f in _faces(k)}
    gens = [Generator(mapping[g.name], g.degree) for g in model.generators if g.name in mapping]
    alpha = Alphabet(tuple(gens))
    diff = {}
    for g in model.generators:
        if g.name in mapping:
            v = model.d_of(g.name)
            if v.letters() - set(mapping):
                raise CertificateFailure(f"d{g.name} leaves the face {vertices}")
            diff[mapping[g.name]] = v.map_letters(mapping, alpha)
    return CdglPresentation(gens, diff, model.cap, mc=[face_name((i,)) for i in range(k + 1)])


def codegeneracy_compatibility_verified(n: int) -> bool:
    """Codegeneracy compatibility is checked only where it is forced."""
    return n <= 1


# ---------------------------------------------------------------------------
# Finite simplicial sets


@dataclass(frozen=True)
class SimplexRef:
    """A possibly degenerate simplex ``base . surjection``: ``surjection`` is the
    nondecreasing list of vertex images from ``[m]`` onto ``[dim base]``."""

    base: str
    surjection: tuple

    @property
    def dim(self) -> int:
        return len(self.surjection) - 1

    @property
    def degenerate(self) -> bool:
        return len(set(self.surjection)) != len(self.surjection)


class FiniteSimplicialSet:
    def __init__(self, simplices: Sequence[Mapping]):
        self.dims: dict = {}
        self.faces: dict = {}
        order = []
        for s in simplices:
            try:
                sid, dim = str(s["id"]), int(s["dim"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"bad simplex entry {s!r}") from exc
            if sid in self.dims:
                raise ParseError(f"duplicate simplex id {sid!r}")
            self.dims[sid] = dim
            order.append(sid)
        for s in simplices:
            sid = str(s["id"])
            dim = self.dims[sid]
            raw = s.get("faces", [])
            if dim == 0:
                if raw:
                    raise ParseError(f"vertex {sid!r} cannot have faces")
                self.faces[sid] = ()
                continue
            if len(raw) != dim + 1:
                raise ParseError(f"simplex {sid!r} of dimension {dim} needs {dim + 1} faces")
            self.faces[sid] = tuple(self._parse_face(f, dim - 1) for f in raw)
        self.order = order
        self._face_cache: dict = {}
        self._check_identities()

    def _parse_face(self, f, dim: int) -> SimplexRef:
        if isinstance(f, str):
            if f not in self.dims:
                raise ParseError(f"unknown face {f!r}")
            if self.dims[f] != dim:
                raise ParseError(f"face {f!r} has dimension {self.dims[f]}, expected {dim}")
            return SimplexRef(f, tuple(range(dim + 1)))
        if isinstance(f, Mapping) and "of" in f:
            base = str(f["of"])
            if base not in self.dims:
                raise ParseError(f"unknown face {base!r}")
            r = self.dims[base]
            if "map" in f:
                surj = tuple(int(v) for v in f["map"])
            else:
                surj = tuple(range(r + 1))
                for j in reversed([int(v) for v in f.get("s", [])]):
                    # s_j doubles vertex j of the current simplex
                    surj = surj[: j + 1] + surj[j:]
            if len(surj) != dim + 1 or sorted(surj) != list(surj) or set(surj) != set(range(r + 1)):
                raise ParseError(f"degenerate face {f!r} is not a surjection onto [{r}] of length {dim + 1}")
            return SimplexRef(base, surj)
        raise ParseError(f"bad face {f!r}")

    @property
    def max_dim(self) -> int:
        return max(self.dims.values(), default=-1)

    def vertices(self) -> list[str]:
        return [s for s in self.order if self.dims[s] == 0]

    def face(self, sid: str, subset: tuple) -> SimplexRef:
        """Face of a nondegenerate simplex spanned by the increasing vertex list."""
        key = (sid, subset)
        if key in self._face_cache:
            return self._face_cache[key]
        dim = self.dims[sid]
        if subset == tuple(range(dim + 1)):
            out = SimplexRef(sid, subset)
        else:
            missing = [i for i in range(dim + 1) if i not in subset][-1]
            # d_missing of sid, then the remaining subset re-indexed
            first = self.faces[sid][missing]
            rest = tuple(i if i < missing else i - 1 for i in subset)
            out = self._face_of_ref(first, rest)
        self._face_cache[key] = out
        return out

    def _face_of_ref(self, ref: SimplexRef, subset: tuple) -> SimplexRef:
        values = [ref.surjection[i] for i in subset]
        hit = tuple(sorted(set(values)))
        inner = self.face(ref.base, hit)
        pos = {v: i for i, v in enumerate(hit)}
        return SimplexRef(inner.base, tuple(inner.surjection[pos[v]] for v in values))

    def _check_identities(self):
        for sid in self.order:
            dim = self.dims[sid]
            if dim < 2:
                continue
            for i in range(dim + 1):
                for j in range(i + 1, dim + 1):
                    # d_i d_j = d_{j-1} d_i
                    a = self._face_of_ref(self.faces[sid][j], tuple(x for x in range(dim) if x != i))
                    b = self._face_of_ref(self.faces[sid][i], tuple(x for x in range(dim) if x != j - 1))
                    if a != b:
                        raise ParseError(f"simplicial identity fails on {sid!r} (faces {i},{j})")

    @classmethod
    def from_json(cls, data: Mapping) -> "FiniteSimplicialSet":
        try:
            return cls(list(data["simplices"]))
        except (KeyError, TypeError) as exc:
            raise ParseError(f"bad simplicial set: {exc}") from exc


def model_of_simplicial_set(X: FiniteSimplicialSet, cap: int, pointed: bool = False,
                            base_point: str | None = None, max_dim: int = MAX_SIMPLEX_DIM) -> CdglPresentation:
    if X.max_dim > max_dim:
        raise DimensionUnsupported(f"simplicial set of dimension {X.max_dim} exceeds {max_dim}")
    gens = [Generator(s, X.dims[s] - 1) for s in X.order]
    alpha = Alphabet(tuple(gens))
    diff = {}
    for s in X.order:
        k = X.dims[s]
        top = _top_differential(k, cap)
        std_faces = _faces(k)
        std_alpha = top.alphabet
        images = {}
        for f in std_faces:
            ref = X.face(s, f)
            if ref.degenerate:
                images[face_name(f)] = TensorElt.zero(alpha, cap)
            else:
                images[face_name(f)] = TensorElt.letter(alpha, cap, ref.base)
        diff[s] = TensorElt(std_alpha, cap, top.terms).substitute(images, alpha, cap)
    mc = X.vertices()
    L = CdglPresentation(gens, diff, cap, mc=mc, name="model")
    if pointed:
        if not mc:
            raise InputError("pointed model needs a vertex")
        L = quotient_by_generator(L, base_point or mc[0])
    return L


def quotient_by_generator(L: CdglPresentation, name: str) -> CdglPresentation:
    """Quotient by the ideal generated by ``name``; requires ``d(name)`` to
    lie in that ideal, which holds for Maurer-Cartan generators."""
    if name not in L.alphabet:
        raise InputError(f"unknown generator {name!r}")
    keep = [g for g in L.generators if g.name != name]
    alpha = Alphabet(tuple(keep))
    kill = {name: TensorElt.zero(L.alphabet, L.cap)}
    dn = L.d_of(name).substitute(kill)
    if dn.terms:
        raise InputError(f"d{name} is not in the ideal generated by {name}")
    diff = {}
    for g in keep:
        v = L.d_of(g.name).substitute(kill)
        diff[g.name] = TensorElt(alpha, L.cap, v.terms)
    return CdglPresentation(keep, diff, L.cap, mc=[m for m in L.mc if m != name], name=L.name)


# ---------------------------------------------------------------------------
# Homology


@dataclass
class HomologyReport:
    dims: dict
    cap: int
    edge_degrees: tuple = ()
    representatives: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"dims": {str(k): v for k, v in sorted(self.dims.items())}, "cap": self.cap,
                "edge_degrees": list(self.edge_degrees)}


def degree_basis(L: CdglPresentation, degree: int, predicate=None) -> list:
    """Basis of the degree-``degree`` part of ``L / F^{cap+1}``."""
    basis = L.lie_basis()
    out = []
    for w in range(1, L.cap + 1):
        out.extend(basis.basis(w, degree=degree, predicate=predicate))
    return out


def _homology_in_degree(d, basis_k, basis_up):
    out_imgs = [d(b).terms for b in basis_k]
    in_imgs = [d(b).terms for b in basis_up]
    dim = exactla.homology_dimension(len(basis_k), out_imgs, in_imgs)
    return dim, out_imgs, in_imgs


def homology(L: CdglPresentation, window: tuple, at: TensorElt | None = None,
             predicate=None, representatives: bool = False) -> HomologyReport:
    """Homology of ``L / F^{cap+1}`` with ``d`` or ``d_a`` in the window.

    The quotient is finite dimensional in each degree, so every reported
    dimension is exact for the quotient.
    """
    P = perturb(L, at) if at is not None and at.terms else L
    lo, hi = window
    dims = {}
    reps = {}
    cache = {}

    def basis(k):
        if k not in cache:
            cache[k] = degree_basis(P, k, predicate)
        return cache[k]

    for k in range(lo, hi + 1):
        bk, bu = basis(k), basis(k + 1)
        dim, out_imgs, in_imgs = _homology_in_degree(P.d, bk, bu)
        dims[k] = dim
        if representatives and dim:
            reps[k] = _cycle_representatives(bk, out_imgs, in_imgs)
    return HomologyReport(dims, L.cap, (), reps)


def _cycle_representatives(basis, out_imgs, in_imgs):
    kern = exactla.kernel_of_columns(out_imgs)
    cycles = []
    for vec in kern:
        z = TensorElt.zero(basis[0].alphabet, basis[0].cap)
        for i, c in vec.items():
            z = z + basis[i].scale(c)
        cycles.append(z)
    keys = set()
    for v in in_imgs:
        keys.update(v)
    for z in cycles:
        keys.update(z.terms)
    order = {k: i for i, k in enumerate(sorted(keys))}
    ech = exactla.Echelon(order, track=False)
    for v in in_imgs:
        ech.insert(v)
    return [z.as_lie() for z in cycles if ech.insert(z.terms)]


def h0_bch_table(L: CdglPresentation, reps: Sequence[TensorElt]) -> list:
    """BCH products of chosen degree-0 representatives (no group-type decision)."""
    return [[bch(x, y) for y in reps] for x in reps]


# ---------------------------------------------------------------------------
# Maps of presentations and the graded-quotient test


@dataclass
class PresentationMap:
    source: CdglPresentation
    target: CdglPresentation
    images: dict  # generator of source -> element of target

    def apply(self, x: TensorElt) -> TensorElt:
        imgs = {k: v.embed(self.target.alphabet, self.target.cap) for k, v in self.images.items()}
        for g in self.source.generators:
            imgs.setdefault(g.name, TensorElt.zero(self.target.alphabet, self.target.cap))
        return x.substitute(imgs, self.target.alphabet, self.target.cap)

    def is_chain_map(self) -> bool:
        for g in self.source.generators:
            lhs = self.apply(self.source.d_of(g.name))
            rhs = self.target.d(self.apply(self.source.gen(g.name)))
            if (lhs - rhs).terms:
                return False
        return True


def identity_map(L: CdglPresentation) -> PresentationMap:
    return PresentationMap(L, L, {g.name: L.gen(g.name) for g in L.generators})


def _linear_differential(L: CdglPresentation) -> dict:
    return {k: weight_component(v, 1) for k, v in L.differential.items() if weight_component(v, 1).terms}


def graded_quotient_quism(f: PresentationMap) -> bool:
    """Whether ``f`` induces quasi-isomorphisms on every ``F^n / F^{n+1}``
    with ``n`` up to the cap of the source."""
    src, tgt = f.source, f.target
    for g in src.generators:
        img = f.images.get(g.name)
        if img is not None and img.constant_term():
            raise InputError("map is not filtration preserving")
    lin_s = _linear_differential(src)
    lin_t = _linear_differential(tgt)
    cap = min(src.cap, tgt.cap)
    f1 = {g.name: weight_component(f.images[g.name].embed(tgt.alphabet, tgt.cap), 1)
          if g.name in f.images else TensorElt.zero(tgt.alphabet, tgt.cap) for g in src.generators}
    bs, bt = src.lie_basis(), tgt.lie_basis()
    for n in range(1, cap + 1):
        cs = bs.basis(n)
        ct = bt.basis(n)
        degs = sorted({c.degree() for c in cs} | {c.degree() for c in ct})
        by_s = {d: [c for c in cs if c.degree() == d] for d in degs}
        by_t = {d: [c for c in ct if c.degree() == d] for d in degs}
        ds = lambda x: apply_derivation(x, lin_s, -1)
        dt = lambda x: apply_derivation(x, lin_t, -1)
        for d in degs:
            s_k, s_up = by_s.get(d, []), by_s.get(d + 1, [])
            t_k, t_up = by_t.get(d, []), by_t.get(d + 1, [])
            hs, out_s, _ = _homology_in_degree(ds, s_k, s_up)
            ht, _, in_t = _homology_in_degree(dt, t_k, t_up)
            if hs != ht:
                return False
            if hs == 0:
                continue
            kern = exactla.kernel_of_columns(out_s)
            images = []
            for vec in kern:
                z = TensorElt.zero(src.alphabet, src.cap)
                for i, c in vec.items():
                    z = z + s_k[i].scale(c)
                images.append(z.substitute(f1, tgt.alphabet, tgt.cap).terms)
            induced = exactla.rank_of_vectors(in_t + images) - exactla.rank_of_vectors(in_t)
            if induced != hs:
                return False
    return True


def presentation_from_file(path: str, cap: int | None = None) -> CdglPresentation:
    with open(path, encoding="utf-8") as fh:
        return CdglPresentation.from_json(json.load(fh), cap)

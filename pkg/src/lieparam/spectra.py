"""Free L-spectra and their stable homology.

A spectrum is a finite list of retractive models over one base together
with adjoint structure data: for each fiber generator ``w`` of level ``n``
an element ``y_w`` of the fiber ideal of level ``n+1`` (the structure map
sends ``w`` to ``s^{-1} y_w``).  Composing with the identification of the
loop, this gives degree ``+1`` maps ``K^n -> K^{n+1}`` killing brackets of
fiber elements and sending ``ad_u w`` to ``(-1)^{|u|} ad_u y_w``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from . import exactla
from .cdgl import CdglPresentation, degree_basis, is_mc, perturb
from .errors import BaseMismatch, CertificateFailure, NotMaurerCartan, ParseError, PresentationError
from .freelie import Generator, TensorElt, bracket, evaluate_expression, generator
from .retractive import RetractiveModel, module_to_lie, retractive_linear_part, suspension_model
from .ulmod import shifted_name


class FreeSpectrum:
    """Levels ``0..n_max`` and structure data ``structure[n][w] = y_w``.

    ``abelian`` marks the indecomposable reduction, whose fibers are the
    abelian complexes ``(T^n, d_1)``; ``connected`` applies the connected
    cover to every fiber.
    """

    def __init__(self, base: CdglPresentation, levels: Sequence[RetractiveModel], structure: Sequence[Mapping],
                 abelian: bool = False, connected: bool = False, name: str = ""):
        self.base = base
        self.levels = list(levels)
        if not self.levels:
            raise PresentationError("a spectrum needs at least one level")
        for lv in self.levels:
            if lv.base.alphabet != base.alphabet:
                raise BaseMismatch("levels must share the base")
        padded = list(structure) + [{}] * (len(self.levels) - 1 - len(structure))
        self.structure = []
        for n, data in enumerate(padded[: len(self.levels) - 1]):
            nxt = self.levels[n + 1]
            conv = {}
            for k, v in data.items():
                if k not in self.levels[n].fiber_names:
                    raise PresentationError(f"structure map on unknown generator {k!r} at level {n}")
                if not isinstance(v, TensorElt):
                    v = evaluate_expression(v, nxt.alphabet, nxt.cap)
                v = v.embed(nxt.alphabet, nxt.cap)
                if v.terms and v.degrees() != {self.levels[n].alphabet.degree(k) + 1}:
                    raise PresentationError(f"structure image of {k!r} has the wrong degree")
                if any(nxt.w_count(w) == 0 for w in v.terms):
                    raise PresentationError(f"structure image of {k!r} leaves the fiber ideal")
                if v.terms:
                    conv[k] = v
            self.structure.append(conv)
        self.abelian = abelian
        self.connected = connected
        self.name = name

    @property
    def n_max(self) -> int:
        return len(self.levels) - 1

    def with_flags(self, abelian: bool | None = None, connected: bool | None = None) -> "FreeSpectrum":
        return FreeSpectrum(self.base, self.levels, self.structure,
                            self.abelian if abelian is None else abelian,
                            self.connected if connected is None else connected, self.name)

    # the transition K^n -> K^{n+1}
    def transition(self, n: int, x: Mapping) -> dict:
        """Image of a fiber vector of level ``n`` (Lie element terms, or module
        words for abelian spectra) in level ``n + 1``."""
        src, tgt = self.levels[n], self.levels[n + 1]
        images = self.structure[n]
        out = TensorElt.zero(tgt.alphabet, tgt.cap)
        deg = src.alphabet.word_degree
        cache: dict = {}
        for w, c in x.items():
            if src.w_count(w) != 1 or w[-1] not in src.fiber_names:
                continue
            y = images.get(w[-1])
            if y is None:
                continue
            u = w[:-1]
            key = (u, w[-1])
            if key not in cache:
                t = y
                for letter in reversed(u):
                    t = bracket(generator(tgt.alphabet, tgt.cap, letter), t)
                if self.abelian:
                    t = TensorElt(t.alphabet, t.cap, tgt.to_module_element(t), _clean=True)
                cache[key] = t
            sign = -1 if deg(u) % 2 else 1
            out = out + cache[key].scale(sign * c)
        return out.terms

    def check_structure(self) -> list:
        """Levels where the structure data fails ``m(dw) = -d(y_w)``."""
        bad = []
        for n in range(self.n_max):
            src, tgt = self.levels[n], self.levels[n + 1]
            for g in src.fiber_generators:
                dw = src.fiber_differential.get(g.name)
                lhs = self.transition(n, dw.terms) if dw is not None else {}
                y = self.structure[n].get(g.name)
                rhs = (-tgt.d(y)).terms if y is not None else {}
                if lhs != rhs:
                    bad.append((n, g.name))
        return bad

    # serialisation
    def to_json(self) -> dict:
        structure = []
        for n, data in enumerate(self.structure):
            for k in sorted(data):
                structure.append({"level": n, "w": k, "image": data[k].as_lie().expression()})
        return {
            "base": self.base.to_json(),
            "levels": [lv.to_json() for lv in self.levels],
            "structure": structure,
            "n_max": self.n_max,
            "abelian": self.abelian,
            "connected": self.connected,
        }

    @classmethod
    def from_json(cls, data: Mapping, cap: int | None = None) -> "FreeSpectrum":
        try:
            base = CdglPresentation.from_json(data["base"], cap)
            levels = [RetractiveModel.from_json(lv, cap, base=base) for lv in data["levels"]]
            n_max = int(data.get("n_max", len(levels) - 1))
            levels = levels[: n_max + 1]
            structure: list = [dict() for _ in range(max(len(levels) - 1, 0))]
            for entry in data.get("structure", []):
                n = int(entry.get("level", 0))
                if n < len(structure):
                    structure[n][str(entry["w"])] = entry["image"]
            abelian, connected = bool(data.get("abelian", False)), bool(data.get("connected", False))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad spectrum: {exc}") from exc
        return cls(base, levels, structure, abelian, connected)

    def __repr__(self):
        return f"FreeSpectrum(levels={len(self.levels)}, abelian={self.abelian}, connected={self.connected})"


# ---------------------------------------------------------------------------
# Reductions


def linear_reduction(M: FreeSpectrum) -> FreeSpectrum:
    levels = [retractive_linear_part(lv) for lv in M.levels]
    structure = []
    for n, data in enumerate(M.structure):
        tgt = M.levels[n + 1]
        structure.append({k: TensorElt(v.alphabet, v.cap, {w: c for w, c in v.terms.items() if tgt.w_count(w) == 1})
                          for k, v in data.items()})
    return FreeSpectrum(M.base, levels, structure, M.abelian, M.connected, M.name)


def indecomposable_reduction(M: FreeSpectrum) -> FreeSpectrum:
    lin = linear_reduction(M)
    return lin.with_flags(abelian=True)


def connected_cover_spectrum(M: FreeSpectrum) -> FreeSpectrum:
    return M.with_flags(connected=True)


# ---------------------------------------------------------------------------
# Level complexes


class LevelComplex:
    """The fiber of one level as a chain complex of vectors."""

    def __init__(self, spectrum: FreeSpectrum, n: int, at: TensorElt | None = None):
        self.spectrum = spectrum
        self.n = n
        self.model = spectrum.levels[n]
        self.at = at
        self._cache: dict = {}
        if spectrum.abelian:
            self.module = self.model.fiber_module()
            self._d = self.module.d_vec
            if at is not None and at.terms:
                raise PresentationError("perturbed homology is computed on full fibers")
        else:
            P = self.model.total
            if at is not None and at.terms:
                P = perturb(P, at.embed(P.alphabet, P.cap))
            self.presentation = P
            self._d = lambda v: P.d(TensorElt(P.alphabet, P.cap, v, _clean=True)).terms

    def d(self, v: Mapping) -> dict:
        return self._d(v)

    def raw_basis(self, j: int) -> list:
        if self.spectrum.abelian:
            return self.module.chain_basis(j)
        return [b.terms for b in degree_basis(self.presentation, j, self.model.is_fiber_ideal)]

    def basis(self, j: int) -> list:
        if j in self._cache:
            return self._cache[j]
        if self.spectrum.connected and j < 0:
            out = []
        elif self.spectrum.connected and j == 0:
            out = _cycles(self.raw_basis(0), self.d)
        else:
            out = self.raw_basis(j)
        self._cache[j] = out
        return out

    def homology(self, j: int) -> int:
        return exactla.homology_dimension(len(self.basis(j)), [self.d(b) for b in self.basis(j)],
                                          [self.d(b) for b in self.basis(j + 1)])

    def cycles(self, j: int) -> list:
        return _cycles(self.basis(j), self.d)

    def boundaries(self, j: int) -> list:
        return [self.d(b) for b in self.basis(j + 1)]

    def complete(self, j: int) -> bool:
        """Elements past the cap cannot reach degrees ``j-1..j+1``."""
        degs = [g.degree for g in self.model.base.generators]
        fdegs = [g.degree for g in self.model.fiber_generators]
        if not fdegs:
            return True
        if not degs:
            if self.spectrum.abelian:
                return True
            low = min(fdegs)
            return low > 0 and (self.model.cap + 1) * low > j + 1
        lowbase = min(degs)
        if lowbase <= 0:
            return False
        if self.spectrum.abelian:
            return min(fdegs) + self.model.cap * lowbase > j + 1
        step = min(lowbase, min(fdegs))
        if step <= 0:
            return False
        return min(fdegs) + self.model.cap * step > j + 1


def _cycles(basis: list, d) -> list:
    if not basis:
        return []
    cols = [d(b) for b in basis]
    if not any(cols):
        return list(basis)
    out = []
    for vec in exactla.kernel_of_columns(cols):
        z: dict = {}
        for i, c in vec.items():
            for k, x in basis[i].items():
                nv = z.get(k, 0) + c * x
                if nv:
                    z[k] = nv
                else:
                    z.pop(k, None)
        if z:
            out.append(z)
    return out


def transition_rank(M: FreeSpectrum, n: int, j: int, src: LevelComplex, tgt: LevelComplex) -> int:
    """Rank of ``H_j(K^n) -> H_{j+1}(K^{n+1})``."""
    cycles = src.cycles(j)
    if not cycles:
        return 0
    bnd = tgt.boundaries(j + 1)
    imgs = [M.transition(n, z) for z in cycles]
    return exactla.rank_of_vectors(bnd + imgs) - exactla.rank_of_vectors(bnd)


# ---------------------------------------------------------------------------
# Stable homology


@dataclass
class StableHomologyReport:
    dims: dict  # k -> dimension or None when not stabilized
    level: dict  # k -> stabilization level or None
    stabilized: dict
    table: dict  # k -> [H_{n+k}(K^n) for n]
    ranks: dict  # k -> [rank of transition n -> n+1]
    complete: dict = field(default_factory=dict)
    caveats: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "dims": {str(k): v for k, v in sorted(self.dims.items())},
            "level": {str(k): v for k, v in sorted(self.level.items())},
            "stabilized": {str(k): v for k, v in sorted(self.stabilized.items())},
            "table": {str(k): v for k, v in sorted(self.table.items())},
            "ranks": {str(k): v for k, v in sorted(self.ranks.items())},
            "complete": {str(k): v for k, v in sorted(self.complete.items())},
            "caveats": list(self.caveats),
        }

    def agrees_with(self, other: "StableHomologyReport") -> bool:
        return self.dims == other.dims and self.stabilized == other.stabilized


def stable_homology(M: FreeSpectrum, window: tuple, at: TensorElt | None = None,
                    n_max: int | None = None) -> StableHomologyReport:
    """``colim_n H_{n+k}(K^n)`` for ``k`` in the window.

    A degree is stabilized at ``n0`` when the transitions ``n0 -> n0+1``
    and ``n0+1 -> n0+2`` are isomorphisms, detected by rank equality.
    """
    if at is not None and at.terms:
        if not is_mc(M.base, at):
            raise NotMaurerCartan("stable homology point is not Maurer-Cartan")
    top = M.n_max if n_max is None else min(n_max, M.n_max)
    cx = [LevelComplex(M, n, at) for n in range(top + 1)]
    dims, level, stab, table, ranks, complete = {}, {}, {}, {}, {}, {}
    for k in range(window[0], window[1] + 1):
        hs = [cx[n].homology(n + k) for n in range(top + 1)]
        rk = [transition_rank(M, n, n + k, cx[n], cx[n + 1]) for n in range(top)]
        iso = [hs[n] == hs[n + 1] == rk[n] for n in range(top)]
        n0 = next((n for n in range(top - 1) if iso[n] and iso[n + 1]), None)
        table[k], ranks[k] = hs, rk
        level[k] = n0
        stab[k] = n0 is not None
        dims[k] = hs[n0] if n0 is not None else None
        complete[k] = n0 is not None and all(cx[n].complete(n + k) for n in range(n0, min(n0 + 3, top + 1)))
    caveats = []
    if not all(stab.values()):
        caveats.append("not stabilized within the available levels: "
                       + ",".join(str(k) for k in sorted(stab) if not stab[k]))
    if not all(complete.values()):
        caveats.append("weight-truncated: " + ",".join(str(k) for k in sorted(complete) if not complete[k]))
    return StableHomologyReport(dims, level, stab, table, ranks, complete, caveats)


# ---------------------------------------------------------------------------
# Canonical spectra


def zero_spectrum(L: CdglPresentation, n_max: int = 3) -> FreeSpectrum:
    return FreeSpectrum(L, [RetractiveModel(L, (), {}) for _ in range(n_max + 1)], [])


def sphere_spectrum_model(L: CdglPresentation, n_max: int = 5, prefix: str = "e") -> FreeSpectrum:
    """Level ``n`` is ``L u L(e^{n-1})`` with a cycle of degree ``n-1``;
    the structure map sends ``e^{n-1}`` to ``s^{-1} e^n``."""
    if any(g.degree < 0 for g in L.generators):
        raise PresentationError("the sphere spectrum model needs a connected base")
    names = [shifted_name(prefix, n - 1) for n in range(n_max + 1)]
    if any(n in L.alphabet for n in names):
        raise PresentationError(f"generator prefix {prefix!r} clashes with the base")
    levels = [RetractiveModel(L, [Generator(names[n], n - 1)], {}) for n in range(n_max + 1)]
    structure = [{names[n]: generator(levels[n + 1].alphabet, levels[n + 1].cap, names[n + 1])}
                 for n in range(n_max)]
    return FreeSpectrum(L, levels, structure, name="sphere")


def suspension_spectrum(M0: RetractiveModel, k: int = 0, n_max: int = 5) -> FreeSpectrum:
    """Level ``n`` is the ``(n-k)``-fold suspension of ``M0`` (zero below ``k``)."""
    L = M0.base
    levels = []
    for n in range(n_max + 1):
        if n < k:
            levels.append(RetractiveModel(L, (), {}, M0.cap))
        else:
            levels.append(suspension_model(M0, n - k))
    structure = []
    for n in range(n_max):
        if n < k:
            structure.append({})
            continue
        tgt = levels[n + 1]
        structure.append({g.name: generator(tgt.alphabet, tgt.cap, shifted_name(g.name, 1))
                          for g in levels[n].fiber_generators})
    return FreeSpectrum(L, levels, structure, name="suspension")


def quadratic_spectrum(L: CdglPresentation, n_max: int = 5) -> FreeSpectrum:
    """Levels ``u_n`` (degree ``n-1``) and ``v_n`` (degree ``2n-1``) with
    ``d v_n = [u_n, u_n]``; ``u_n -> s^{-1} u_{n+1}`` and ``v_n -> 0``."""
    levels = []
    for n in range(n_max + 1):
        u, v = f"u{n}", f"v{n}"
        m = RetractiveModel(L, [Generator(u, n - 1), Generator(v, 2 * n - 1)], {})
        uu = generator(m.alphabet, m.cap, u)
        dv = bracket(uu, uu)
        levels.append(RetractiveModel(L, m.fiber_generators, {v: dv} if dv.terms else {}))
    structure = [{f"u{n}": generator(levels[n + 1].alphabet, levels[n + 1].cap, f"u{n + 1}")}
                 for n in range(n_max)]
    return FreeSpectrum(L, levels, structure, name="quadratic")


def require_structure(M: FreeSpectrum):
    bad = M.check_structure()
    if bad:
        raise CertificateFailure(f"structure maps are not chain maps at {bad}")


def suspend_spectrum(M: FreeSpectrum, times: int = 1) -> FreeSpectrum:
    """Levelwise suspension; ``y_{s^t w}`` is the shift of the linear part
    of ``y_w``."""
    if times < 0:
        raise PresentationError("suspension count must be non-negative")
    if times == 0:
        return M
    levels = [suspension_model(lv, times) for lv in M.levels]
    structure = []
    for n, data in enumerate(M.structure):
        src, tgt = M.levels[n + 1], levels[n + 1]
        deg = src.base.alphabet.word_degree
        out = {}
        for k, y in data.items():
            terms = {}
            for w, c in src.to_module_element(y).items():
                sign = -c if (times * deg(w[:-1])) % 2 else c
                terms[w[:-1] + (shifted_name(w[-1], times),)] = sign
            if terms:
                out[shifted_name(k, times)] = module_to_lie(terms, tgt.alphabet, tgt.cap)
        structure.append(out)
    return FreeSpectrum(M.base, levels, structure, M.abelian, M.connected, name=M.name)

import random

import pytest

from lieparam.cdgl import CdglPresentation, homology
from lieparam.errors import BaseMismatch, NotConnected, PresentationError
from lieparam.freelie import Generator, bracket, generator
from lieparam.psi import (
    ModuleSpectrum,
    block_base,
    external_smash_model,
    functor_C,
    functor_D,
    functor_D_report,
    internal_smash_model,
    is_quasi_isomorphism,
    kernel_spectrum,
    monoidal_comparison,
    product_model,
    psi,
    psi_report,
    psi_smash,
    smash_name,
    smash_spectrum,
    stable_homotopy_ranks,
)
from lieparam.retractive import RetractiveModel
from lieparam.spectra import (
    connected_cover_spectrum,
    sphere_spectrum_model,
    stable_homology,
    suspend_spectrum,
    suspension_spectrum,
    zero_spectrum,
)
from lieparam.ulmod import RestrictedModule, ULModule, shifted_name, uhat_module, zero_module

from batteries import line_base, random_retractive_model, spectrum_battery
import oracles

X1 = line_base(1, 5)


def model(gens, diff, base=X1):
    return RetractiveModel(base, [Generator(n, k) for n, k in gens], diff)


def two_cell_module(L=X1):
    return ULModule(L, [Generator("a", 0), Generator("b", 2)], {"b": [["1", ["x"], "a"]]})


def fiber_letter(M, name):
    return generator(M.alphabet, M.cap, name)


# ---------------------------------------------------------------------------
# kernel spectrum and the pair of functors


def test_kernel_spectrum_of_sphere():
    K = kernel_spectrum(connected_cover_spectrum(sphere_spectrum_model(X1, 4)))
    names = [[(g.name, g.degree) for g in lv.generators] for lv in K.levels]
    assert names == [[("e[-1]", -1)], [("e", 0)], [("e[1]", 1)], [("e[2]", 2)], [("e[3]", 3)]]
    assert K.maps[0]["e[-1]"].terms == {("e",): 1}
    assert K.check_structure() == []


def test_kernel_spectrum_of_zero_spectrum():
    K = kernel_spectrum(connected_cover_spectrum(zero_spectrum(X1, 3)))
    assert all(not lv.generators for lv in K.levels)


def test_kernel_spectrum_needs_connected_input():
    with pytest.raises(NotConnected):
        kernel_spectrum(sphere_spectrum_model(X1, 3))


@pytest.mark.parametrize("name", ["sphere/x1", "two-cell/x1", "quadratic/x1", "sphere/x2"])
def test_kernel_spectrum_keeps_stable_homology(name):
    M = spectrum_battery(5)[name]
    K = kernel_spectrum(connected_cover_spectrum(M))
    ours, theirs = K.stable_homology((0, 1)), stable_homology(M, (0, 1))
    for k in (0, 1):
        if theirs.dims[k] is not None:
            assert ours.dims[k] == theirs.dims[k]


def test_functor_C_levels():
    C = functor_C(two_cell_module(), 4)
    assert [[g.degree for g in lv.generators] for lv in C.levels] == [[-1, 1], [0, 2], [1, 3], [2, 4], [3, 5]]
    assert C.check_structure() == []


@pytest.mark.parametrize("T", [two_cell_module(), ULModule(X1, [Generator("c", 1)], {}), uhat_module(X1)])
def test_functor_D_inverts_functor_C(T):
    rep = functor_D_report(functor_C(T, 4), (0, 3))
    assert rep.stabilized and not rep.caveats
    assert rep.module.to_json() == T.to_json()


def test_functor_D_of_suspension_telescope_is_a_shift():
    plain = two_cell_module()
    levels = [plain.shift(n) for n in range(5)]
    maps = [{g.name: levels[n + 1].gen(shifted_name(g.name, 1)) for g in levels[n].generators} for n in range(4)]
    out = functor_D(ModuleSpectrum(levels, maps), (0, 3))
    assert out.to_json() == plain.shift(1).to_json()


def test_functor_C_of_zero_module():
    assert all(not lv.generators for lv in functor_C(zero_module(X1), 3).levels)


# ---------------------------------------------------------------------------
# the functor to modules


@pytest.mark.parametrize("xdeg", [1, 2])
def test_psi_of_sphere_is_enveloping_algebra(xdeg):
    L = line_base(xdeg, 5)
    out = psi(sphere_spectrum_model(L, 4), (0, 3))
    assert out.isomorphic_presentation(uhat_module(L, cap=out.cap, name="e"))
    assert out.to_json() == uhat_module(L, cap=out.cap, name="e").to_json()


def test_psi_of_zero_spectrum():
    assert not psi(zero_spectrum(X1, 3), (0, 3)).generators


@pytest.mark.parametrize("name", ["two-cell/x1", "quadratic/x1", "bracket-cell/x1", "two-cell/x2"])
def test_psi_of_suspension_is_shift(name):
    M = spectrum_battery(5)[name]
    lo = psi_report(M, (0, 2))
    hi = psi_report(suspend_spectrum(M), (1, 3))
    assert hi.module.to_json() == lo.module.shift(1).to_json()


def test_psi_of_suspension_spectrum_is_linear_fiber():
    M0 = model([("w", 1), ("v", 3)], {"v": ["br", ["gen", "x"], ["gen", "w"]]})
    out = psi(suspension_spectrum(M0, 1, 4), (0, 3))
    assert [(g.name, g.degree) for g in out.generators] == [("w", 1), ("v", 3)]
    assert out.differential["v"].terms == {("x", "w"): 1}


def test_stable_homotopy_ranks_of_spheres():
    for xdeg in (1, 2):
        L = line_base(xdeg, 6)
        ranks = stable_homotopy_ranks(sphere_spectrum_model(L, 5), (0, 5))
        assert ranks == {j: oracles.word_count([xdeg], j, 6) for j in range(6)}


def test_stable_homotopy_ranks_need_connected_base():
    from lieparam.cdgl import ls_interval

    L = ls_interval(3)
    with pytest.raises(NotConnected):
        stable_homotopy_ranks(zero_spectrum(CdglPresentation(L.generators, {}, 3), 2), (0, 1))


# ---------------------------------------------------------------------------
# smash models


def test_block_base_renames_collisions():
    L, ren = block_base(X1, X1)
    assert ren == {"x": "x'"}
    assert [g.block for g in L.generators] == [1, 2]


def test_external_smash_first_sum():
    X = model([("w", 0), ("v", 2)], {"v": ["br", ["gen", "x"], ["gen", "w"]]})
    Y = model([("a", 1)], {})
    E = external_smash_model(X, Y)
    assert [(g.name, g.degree) for g in E.fiber_generators] == [("(w#a)", 2), ("(v#a)", 4)]
    expected = bracket(fiber_letter(E, "x"), fiber_letter(E, smash_name("w", "a"))).scale(-1)
    assert E.fiber_differential["(v#a)"] == expected
    assert E.check().ok


def test_external_smash_second_sum_sign():
    # (-1)^{|a| + |a||x'|} = +1 for |a| = |x'| = 1
    X = model([("a", 1)], {})
    Y = model([("w", 0), ("v", 2)], {"v": ["br", ["gen", "x"], ["gen", "w"]]})
    E = external_smash_model(X, Y)
    expected = bracket(fiber_letter(E, "x'"), fiber_letter(E, "(a#w)")).scale(-1)
    assert E.fiber_differential["(a#v)"] == expected


def test_external_smash_zero_differentials():
    E = external_smash_model(model([("w", 1)], {}), model([("a", 2)], {}))
    assert not E.fiber_differential


def test_external_smash_koszul_negates():
    X = model([("w", 0), ("v", 2)], {"v": ["br", ["gen", "x"], ["gen", "w"]]})
    Y = model([("a", 1)], {})
    stated = external_smash_model(X, Y).fiber_differential["(v#a)"]
    koszul = external_smash_model(X, Y, signs="koszul").fiber_differential["(v#a)"]
    assert koszul == -stated
    with pytest.raises(PresentationError):
        external_smash_model(X, Y, signs="other")


@pytest.mark.parametrize("xdeg", [0, 1, 2])
def test_external_smash_of_random_models_is_valid(xdeg):
    rng = random.Random(40 + xdeg)
    for _ in range(3):
        X = random_retractive_model(rng, line_base(xdeg, 4), brackets=False)
        Y = random_retractive_model(rng, line_base(xdeg, 4), brackets=False)
        assert external_smash_model(X, Y).check().ok


def test_internal_smash_restricts_along_diagonal():
    X = model([("w", 0), ("v", 2)], {"v": ["br", ["gen", "x"], ["gen", "w"]]})
    I = internal_smash_model(X, model([("a", 1)], {}))
    F = I.fiber_module()
    assert isinstance(F, RestrictedModule) and I.base is X1
    image = I.diagonal.apply(X1.gen("x"))
    assert set(image.terms) == {("x",), ("x'",)}
    with pytest.raises(BaseMismatch):
        internal_smash_model(X, model([("a", 1)], {}, base=line_base(2, 5)))


def test_smash_spectrum_structure_and_staircase():
    L = line_base(1, 4)
    X, Y = spectrum_battery(4, 3)["two-cell/x1"], sphere_spectrum_model(L, 3)
    S = smash_spectrum(X, Y)
    assert S.blocks[:4] == [(0, 0), (1, 0), (1, 1), (2, 1)]
    assert S.spectrum.check_structure() == []
    rep, restricted = psi_smash(S, (0, 3))
    assert isinstance(restricted, RestrictedModule)
    with pytest.raises(BaseMismatch):
        smash_spectrum(X, sphere_spectrum_model(line_base(2, 4), 3))


def _monoidal_cases():
    cases = []
    for xdeg in (0, 1, 2):
        L = line_base(xdeg, 3)
        M0 = model([("w", 0), ("v", xdeg + 1)], {"v": ["br", ["gen", "x"], ["gen", "w"]]}, base=L)
        M1 = model([("a", 1), ("b", xdeg + 2)], {"b": ["br", ["gen", "x"], ["gen", "a"]]}, base=L)
        X, Y = suspension_spectrum(M0, 0, 3), suspension_spectrum(M1, 0, 3)
        cases += [(f"x{xdeg}/XY", X, Y), (f"x{xdeg}/XS", X, sphere_spectrum_model(L, 3))]
    return cases


@pytest.mark.parametrize("label,X,Y", _monoidal_cases())
def test_monoidal_comparison(label, X, Y):
    stated = monoidal_comparison(X, Y, (0, 4))
    assert stated.chain_isomorphism and stated.smash_dims == stated.tensor_dims
    koszul = monoidal_comparison(X, Y, (0, 4), signs="koszul")
    assert koszul.chain_isomorphism and koszul.linear and not koszul.failures


def test_stated_signs_are_not_linear_for_odd_base():
    L = line_base(1, 3)
    X = suspension_spectrum(model([("w", 0), ("v", 2)], {"v": ["br", ["gen", "x"], ["gen", "w"]]}, base=L), 0, 3)
    Y = suspension_spectrum(model([("a", 1), ("b", 3)], {"b": ["br", ["gen", "x"], ["gen", "a"]]}, base=L), 0, 3)
    rep = monoidal_comparison(X, Y, (0, 4))
    assert rep.chain_isomorphism and not rep.linear
    assert {check for check, _ in rep.failures} == {"linearity"}
    assert any("koszul" in c for c in rep.caveats)


# ---------------------------------------------------------------------------
# product models


def test_product_with_trivial_factor():
    A = CdglPresentation([Generator("u", 2)], {}, 4)
    P = product_model(A, CdglPresentation([], {}, 4))
    assert P.presentation.same_as(A) and P.certified and not P.caveats


def test_product_of_spheres_reproduces_bracket_term():
    A = CdglPresentation([Generator("u", 2)], {}, 5)
    B = CdglPresentation([Generator("p", 3)], {}, 5)
    P = product_model(A, B)
    alpha = P.presentation.alphabet
    s = [g for g in P.presentation.generators if g.name.startswith("s(")]
    assert [(g.name, g.degree) for g in s] == [("s(u,p)", 6)]
    assert P.presentation.d_of("s(u,p)") == -bracket(generator(alpha, 5, "u"), generator(alpha, 5, "p"))
    assert P.certified and is_quasi_isomorphism(P.projection, (0, 6))


def test_product_of_retractive_models():
    L = line_base(1, 4)
    X = model([("w", 1), ("v", 3)], {"v": ["br", ["gen", "x"], ["gen", "w"]]}, base=L)
    Y = model([("a", 1)], {}, base=L)
    P = product_model(X, Y)
    assert P.certified and not P.caveats
    assert is_quasi_isomorphism(P.projection, (0, 4))
    assert P.model is not None and P.model.check().ok
    assert {g.name for g in P.model.base.generators} == {"x", "x'", "s(x,x')"}


def test_product_in_degree_zero_is_flagged():
    A = CdglPresentation([Generator("a", 0)], {}, 4)
    B = CdglPresentation([Generator("b", 0)], {}, 4)
    P = product_model(A, B)
    assert P.certified and P.caveats
    assert not is_quasi_isomorphism(P.projection, (0, 1))


def test_product_needs_matching_input_kinds():
    with pytest.raises(PresentationError):
        product_model(X1, model([("w", 1)], {}))


def test_homology_of_product_is_sum():
    A = CdglPresentation([Generator("u", 1), Generator("t", 3)], {"t": ["br", ["gen", "u"], ["gen", "u"]]}, 5)
    B = CdglPresentation([Generator("p", 2)], {}, 5)
    P = product_model(A, B)
    ha, hb = homology(A, (0, 4)).dims, homology(B, (0, 4)).dims
    assert homology(P.presentation, (0, 4)).dims == {j: ha[j] + hb[j] for j in range(5)}

import pytest

from lieparam.errors import CertificateFailure, PresentationError
from lieparam.freelie import Generator
from lieparam.retractive import RetractiveModel
from lieparam.spectra import (
    FreeSpectrum,
    connected_cover_spectrum,
    indecomposable_reduction,
    linear_reduction,
    quadratic_spectrum,
    require_structure,
    sphere_spectrum_model,
    stable_homology,
    suspend_spectrum,
    suspension_spectrum,
    zero_spectrum,
)

from batteries import line_base, spectrum_battery
import oracles

BATTERY = spectrum_battery(5)


def test_zero_spectrum():
    rep = stable_homology(zero_spectrum(line_base(1, 4)), (-1, 2))
    assert set(rep.dims.values()) == {0}


def test_sphere_levels_and_structure():
    L = line_base(1, 5)
    S = sphere_spectrum_model(L, 4)
    assert [g.degree for g in S.levels[0].fiber_generators] == [-1]
    assert [g.degree for lv in S.levels for g in lv.fiber_generators] == [-1, 0, 1, 2, 3]
    assert S.structure[1]["e"].terms == {("e[1]",): 1}
    assert not S.check_structure()


def test_sphere_stable_homology_is_word_count():
    L = line_base(1, 6)
    rep = stable_homology(sphere_spectrum_model(L, 5), (-1, 1))
    for k in (-1, 0, 1):
        assert rep.dims[k] == oracles.word_count([1], k + 1, 6)


def test_sphere_needs_connected_base():
    from lieparam.cdgl import ls_interval

    with pytest.raises(PresentationError):
        sphere_spectrum_model(ls_interval(3))


def test_linear_reduction_examples():
    S = BATTERY["sphere/x1"]
    assert linear_reduction(S).to_json() == S.to_json()
    Q = BATTERY["quadratic/x1"]
    lin = linear_reduction(Q)
    assert all(lv.is_linear() for lv in lin.levels)
    for n, data in enumerate(lin.structure):
        for y in data.values():
            assert all(lin.levels[n + 1].w_count(w) == 1 for w in y.terms)


def test_indecomposable_reduction_is_abelian_linear():
    ind = indecomposable_reduction(BATTERY["quadratic/x1"])
    assert ind.abelian and all(lv.is_linear() for lv in ind.levels)


@pytest.mark.parametrize("name", sorted(BATTERY))
def test_structure_maps_are_chain_maps(name):
    assert BATTERY[name].check_structure() == []
    require_structure(BATTERY[name])


def test_broken_structure_is_loud():
    L = line_base(1, 4)
    lv0 = RetractiveModel(L, [Generator("w", 1)], {})
    lv1 = RetractiveModel(L, [Generator("p", 1), Generator("q", 2)], {"q": ["gen", "p"]})
    M = FreeSpectrum(L, [lv0, lv1], [{"w": ["gen", "q"]}])
    assert M.check_structure()
    with pytest.raises(CertificateFailure):
        require_structure(M)


def test_suspension_spectrum_examples():
    L = line_base(1, 4)
    trivial = suspension_spectrum(RetractiveModel(L, [], {}), 0, 3)
    assert all(not lv.fiber_generators for lv in trivial.levels)
    M0 = RetractiveModel(L, [Generator("w", 2)], {})
    S = suspension_spectrum(M0, 0, 4)
    assert [lv.fiber_generators[0].degree for lv in S.levels] == [2, 3, 4, 5, 6]
    rep = stable_homology(S, (0, 4))
    fib = M0.fiber_module().homology((0, 4)).dims
    assert rep.dims == fib
    assert all(rep.level[k] == 0 for k in rep.level)


def test_connected_cover_keeps_sphere_homology():
    S = BATTERY["sphere/x1"]
    assert stable_homology(connected_cover_spectrum(S), (-1, 1)).agrees_with(stable_homology(S, (-1, 1)))


def test_rank_certificate_past_stabilization():
    rep = stable_homology(BATTERY["quadratic/x1"], (-1, 1))
    for k, n0 in rep.level.items():
        for n in range(n0, len(rep.table[k]) - 1):
            assert rep.table[k][n] == rep.dims[k] == rep.ranks[k][n]


def test_unstabilized_degrees_are_reported():
    rep = stable_homology(BATTERY["sphere/x0"], (-1, 1))
    assert rep.dims[1] is None and not rep.stabilized[1]
    assert any("not stabilized" in c for c in rep.caveats)


def test_perturbation_at_zero_is_plain_computation():
    from lieparam.freelie import TensorElt

    M = BATTERY["quadratic/x1"]
    zero = TensorElt.zero(M.base.alphabet, M.base.cap)
    assert stable_homology(M, (-1, 1), at=zero).to_json() == stable_homology(M, (-1, 1)).to_json()


@pytest.mark.parametrize("name", sorted(BATTERY))
def test_json_round_trip(name):
    M = BATTERY[name]
    assert FreeSpectrum.from_json(M.to_json()).to_json() == M.to_json()


def test_suspended_spectrum_shifts_stable_homology():
    M = quadratic_spectrum(line_base(1, 5), 5)
    lo = stable_homology(M, (-1, 1))
    hi = stable_homology(suspend_spectrum(M), (0, 2))
    assert all(hi.dims[k + 1] == lo.dims[k] for k in (-1, 0, 1))

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pt_spectra import eig, hobasis
from pt_spectra.errors import DomainError
from pt_spectra.ode import StepControl
from pt_spectra.shooting import (Bracket, ProblemSpec, lowest_eigenvalues, matching_residual,
                                 refine, scan, spectrum, spectrum_report, wkb_energy)


def energies(results):
    return np.array([r.E for r in results])


def test_residual_vanishes_at_oscillator_eigenvalue():
    assert abs(matching_residual(ProblemSpec(0.0), 1.0)) < 1e-9


def test_residual_large_between_eigenvalues():
    assert abs(matching_residual(ProblemSpec(0.0), 2.0)) > 0.01


def test_residual_imaginary_axis_wedges():
    assert abs(matching_residual(ProblemSpec(0.0, branch=1), -1.0)) < 1e-9
    assert abs(matching_residual(ProblemSpec(0.0, branch=1), 1.0)) > 0.01


def test_scan_oscillator_window():
    brackets = scan(ProblemSpec(0.0, e_min=0.0, e_max=8.0, grid=161))
    centers = sorted({round(0.5 * (b.lo + b.hi)) for b in brackets})
    assert centers == [1, 3, 5, 7]
    for b in brackets:
        assert min(abs(b.lo - e) for e in (1, 3, 5, 7)) <= 0.1


def test_scan_empty_window():
    spec = ProblemSpec(0.0, e_min=1.5, e_max=2.5, grid=41)
    assert scan(spec) == []
    # independent dense check: no sign change and |W| stays away from zero
    dense = [matching_residual(spec, e).real for e in np.linspace(1.5, 2.5, 401)]
    assert min(abs(w) for w in dense) > 0.1
    assert all(np.sign(dense) == np.sign(dense[0]))


def test_scan_degenerate_window():
    assert scan(ProblemSpec(0.0, e_min=3.0 - 1e-9, e_max=3.0)) == []


def test_problem_spec_validation():
    with pytest.raises(DomainError):
        ProblemSpec(-1.0)
    with pytest.raises(DomainError):
        ProblemSpec(1.0, e_min=2.0, e_max=2.0)
    with pytest.raises(DomainError):
        ProblemSpec(1.0, grid=1)


def test_large_epsilon_warns():
    with pytest.warns(RuntimeWarning):
        ProblemSpec(5.0)


def test_refine_eps0():
    r = refine(ProblemSpec(0.0), Bracket(2.9, 3.1))
    assert abs(r.E - 3.0) < 1e-9
    assert r.classified_real
    assert abs(r.residual) < 1e-9
    assert r.iterations <= 60


def test_refine_imaginary_axis():
    r = refine(ProblemSpec(0.0, branch=1, e_min=-8, e_max=0), Bracket(-3.1, -2.9))
    assert abs(r.E + 3.0) < 1e-9


@pytest.fixture(scope="module")
def truncation_ground_state():
    """Oracle: lowest real eigenvalue of the N=128 oscillator-basis truncation at eps=1."""
    vals = eig.eigenvalues(hobasis.build(1, 128)).values
    real = [v.real for v in vals if abs(v.imag) < 1e-8]
    return min(real)


def test_refine_eps1_ground_state(truncation_ground_state):
    spec = ProblemSpec(1.0, e_min=0.0, e_max=12.0)
    first = scan(spec)[0]
    r = refine(spec, first)
    assert r.E.real == pytest.approx(truncation_ground_state, abs=5e-6)
    assert round(r.E.real, 5) == pytest.approx(1.15627)


def test_spectrum_oscillator():
    got = energies(spectrum(ProblemSpec(0.0, e_min=0.0, e_max=12.0)))
    np.testing.assert_allclose(got.real, [1, 3, 5, 7, 9, 11], atol=1e-8)


def test_spectrum_eps1_four_real_levels(truncation_ground_state):
    res = spectrum(ProblemSpec(1.0, e_min=0.0, e_max=12.0))
    assert len(res) == 4
    assert all(r.classified_real for r in res)
    assert res[0].E.real == pytest.approx(truncation_ground_state, abs=5e-6)
    # cross-method agreement for the other levels
    trunc = sorted(v.real for v in eig.eigenvalues(hobasis.build(1, 128)).values
                   if abs(v.imag) < 1e-8)[:4]
    np.testing.assert_allclose(energies(res).real, trunc, rtol=1e-6)


def test_spectrum_eps2_real_positive_self_consistent():
    coarse = spectrum(ProblemSpec(2.0, control=StepControl("fixed", step=2e-3)))
    fine = spectrum(ProblemSpec(2.0, control=StepControl("fixed", step=1e-3)))
    assert len(coarse) == len(fine) == 3
    for a, b in zip(coarse, fine):
        assert b.classified_real and b.E.real > 0
        assert abs(a.E - b.E) < 1e-8 * abs(b.E)


def test_spectrum_sorted_and_deduped():
    res = spectrum(ProblemSpec(0.0, e_min=0.0, e_max=8.0))
    es = energies(res).real
    assert list(es) == sorted(es)
    assert np.all(np.diff(es) > 1e-6)


def test_spurious_brackets_are_reported():
    rep = spectrum_report(ProblemSpec(0.0, e_min=0.0, e_max=8.0))
    assert len(rep.results) == 4
    assert isinstance(rep.spurious, list)


@settings(max_examples=6, deadline=None)
@given(st.floats(min_value=0.0, max_value=3.0))
def test_reality_for_nonnegative_epsilon(epsilon):
    res = spectrum(ProblemSpec(epsilon, e_min=0.0, e_max=15.0, grid=121))
    assert res, "at least the ground state lies below 15"
    for r in res:
        assert r.classified_real
        assert r.E.real > 0


@pytest.mark.parametrize("epsilon", [0.5, 1.0, 2.0])
def test_contour_radius_independence(epsilon):
    a = spectrum(ProblemSpec(epsilon, decay_target=30.0))
    b = spectrum(ProblemSpec(epsilon, decay_target=40.0))
    assert len(a) == len(b)
    for x, y in zip(a, b):
        assert abs(x.E - y.E) < 1e-8 * abs(y.E)


@pytest.mark.parametrize("epsilon", [1.0, 1.5])
def test_step_size_independence(epsilon):
    a = spectrum(ProblemSpec(epsilon, control=StepControl("fixed", step=2e-3)))
    b = spectrum(ProblemSpec(epsilon, control=StepControl("fixed", step=1e-3)))
    adaptive = spectrum(ProblemSpec(epsilon))
    assert len(a) == len(b) == len(adaptive)
    for x, y, z in zip(a, b, adaptive):
        assert abs(x.E - y.E) < 1e-8 * abs(y.E)
        assert abs(z.E - y.E) < 1e-8 * abs(y.E)


def test_branch_dependence_at_eps0():
    pos = energies(spectrum(ProblemSpec(0.0, 0, e_min=0.0, e_max=8.0)))
    neg = energies(spectrum(ProblemSpec(0.0, 1, e_min=-8.0, e_max=0.0)))
    np.testing.assert_allclose(np.sort(pos.real), np.sort(-neg.real), atol=1e-9)


def test_wkb_energy_tracks_levels():
    res = lowest_eigenvalues(1.0, 8)
    assert len(res) >= 8
    for n, r in enumerate(res[:8]):
        assert r.E.real == pytest.approx(wkb_energy(n, 1.0), rel=0.06)


def test_threads_env_does_not_change_results(monkeypatch):
    monkeypatch.setenv("PT_SPECTRA_THREADS", "1")
    one = energies(spectrum(ProblemSpec(1.0)))
    monkeypatch.setenv("PT_SPECTRA_THREADS", "3")
    three = energies(spectrum(ProblemSpec(1.0)))
    np.testing.assert_array_equal(one, three)

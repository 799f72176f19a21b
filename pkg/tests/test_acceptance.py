"""Acceptance checks, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL`` line before asserting, so
``pytest tests/test_acceptance.py -s`` gives a readable scorecard.
"""
import math
import time

import numpy as np
import pytest
from numpy.polynomial.hermite import hermgauss
from scipy.linalg import lu_factor

from pt_spectra import analysis, eig, hobasis, shooting
from pt_spectra.hobasis import position_power_matrix
from pt_spectra.ode import StepControl, WaveState, integrate, wronskian
from pt_spectra.shooting import ProblemSpec, is_real


def verdict(num, ok, detail):
    print(f"\ncriterion {num}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, detail


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


@pytest.fixture(scope="module", autouse=True)
def warm_up():
    """Load the compiled integrator kernels so timings measure the solve only."""
    shooting.matching_residual(ProblemSpec(1.0), 1.0)
    shooting.matching_residual(ProblemSpec(1.0, control=StepControl("fixed")), 1.0)


@pytest.fixture(scope="module")
def eps1_report():
    with Timer() as t:
        rep = analysis.compare_methods(1, 6, 100)
    return rep, t.elapsed


@pytest.fixture(scope="module")
def eps1_truncations():
    with Timer() as t:
        spectra = {n: eig.eigenvalues(hobasis.build(1, n)) for n in range(10, 101)}
    return spectra, t.elapsed


def test_criterion_1_oscillator_exact():
    with Timer() as t:
        res = shooting.spectrum(ProblemSpec(0.0, e_min=0.0, e_max=12.0))
    got = np.array([r.E for r in res])
    ok = len(got) == 6 and np.max(np.abs(got - [1, 3, 5, 7, 9, 11])) <= 1e-8 and t.elapsed < 5
    verdict(1, ok, f"E={np.round(got.real, 10).tolist()}, {t.elapsed:.2f}s")


def test_criterion_2_second_wedge_pair():
    with Timer() as t:
        res = shooting.spectrum(ProblemSpec(0.0, branch=1, e_min=-8.0, e_max=0.0))
    got = np.array([r.E for r in res])
    ok = len(got) == 4 and np.max(np.abs(got - [-7, -5, -3, -1])) <= 1e-8 and t.elapsed < 5
    verdict(2, ok, f"E={np.round(got.real, 10).tolist()}, {t.elapsed:.2f}s")


def test_criterion_3_reality():
    worst = 0.0
    counts = {}
    with Timer() as t:
        for eps in (0.5, 1.0, 1.5, 2.0, 3.0):
            res = shooting.spectrum(ProblemSpec(eps, e_min=0.0, e_max=20.0, grid=161))
            counts[eps] = len(res)
            for r in res:
                worst = max(worst, abs(r.E.imag) / (1 + abs(r.E.real)))
    ok = all(counts.values()) and worst <= 1e-8 and t.elapsed < 120
    verdict(3, ok, f"levels below 20: {counts}, max |Im|/(1+|Re|)={worst:.1e}, {t.elapsed:.1f}s")


def test_criterion_4_cross_method(eps1_report):
    rep, elapsed = eps1_report
    rel = [abs(rep.truncation[j] - rep.shooting[j]) / abs(rep.shooting[j]) for j in range(4)]
    ok = max(rel) < 1e-3 and elapsed < 60
    verdict(4, ok, f"max rel deviation {max(rel):.1e}, {elapsed:.1f}s")


def test_criterion_5_settled_count(eps1_report):
    rep, _ = eps1_report
    verdict(5, 4 <= rep.settled_count <= 10, f"settled_count={rep.settled_count}")


def test_criterion_6_artifacts(eps1_truncations):
    spectra, elapsed = eps1_truncations
    with_pairs = []
    closed = True
    for n, s in spectra.items():
        _, pairs, unpaired = eig.conjugate_pair_audit(s, pair_tol=1e-8)
        closed &= not unpaired
        if any(abs(v.imag) > 1e-6 for v in s.values):
            with_pairs.append(n)
    ok = bool(with_pairs) and closed and elapsed < 60
    verdict(6, ok, f"complex pairs first at N={with_pairs[:1]}, closed={closed}, {elapsed:.1f}s")


def test_criterion_7_wkb_growth():
    with Timer() as t:
        res = shooting.lowest_eigenvalues(1.0, 31)
        slope, err = analysis.wkb_growth_fit([(n, r.E.real) for n, r in enumerate(res)], 10, 30)
    ok = 1.18 <= slope <= 1.22 and all(r.classified_real for r in res[:31]) and t.elapsed < 300
    verdict(7, ok, f"slope {slope:.5f} +/- {err:.1e}, {t.elapsed:.1f}s")


def test_criterion_8_truncation_growth_fails(eps1_truncations):
    spectra, _ = eps1_truncations
    levels = analysis.low_lying(spectra[100].values, 91)
    window = [(n, levels[n]) for n in range(20, 91)]
    n_complex = sum(not is_real(z) for _, z in window)
    slope, _ = analysis.wkb_growth_fit([(n, z.real) for n, z in window], 20, 90)
    ok = n_complex > 0 or not 1.18 <= slope <= 1.22
    verdict(8, ok, f"{n_complex}/71 levels complex, slope of real parts {slope:.3f}")


def _hermite_quadrature(k, nmax, npts=80):
    x, w = hermgauss(npts)
    h = np.zeros((nmax + 1, npts))
    h[0] = np.pi ** -0.25
    h[1] = math.sqrt(2) * x * h[0]
    for n in range(1, nmax):
        h[n + 1] = math.sqrt(2 / (n + 1)) * x * h[n] - math.sqrt(n / (n + 1)) * h[n - 1]
    return (h * w * x ** k) @ h.T


def _lu_det(a):
    lu, piv = lu_factor(a)
    return (-1) ** np.count_nonzero(piv != np.arange(len(piv))) * np.prod(np.diag(lu))


def test_criterion_9_oracles():
    failures = []
    with Timer() as t:
        quad_err = max(np.max(np.abs(position_power_matrix(k, 21) - _hermite_quadrature(k, 20)))
                       for k in range(7))
        if quad_err > 1e-10:
            failures.append(f"quadrature {quad_err:.1e}")

        rng = np.random.default_rng(20260101)
        for _ in range(200):
            a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
            lam = eig.eigenvalues(a).as_array()
            tr, det = np.trace(a), _lu_det(a)
            q, _ = np.linalg.qr(rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8)))
            lb = eig.eigenvalues(np.linalg.solve(q, a @ q)).as_array()
            sim = max(np.min(np.abs(lb - z)) for z in lam)
            if (abs(lam.sum() - tr) > 1e-10 * (1 + abs(tr)) or abs(np.prod(lam) - det) > 1e-8 * abs(det)
                    or sim > 1e-8):
                failures.append("eigensolver contract")
                break

        ground = WaveState(0j, 1 + 0j, 0j)
        errs = []
        for h in (0.1, 0.05):
            out = integrate(ground, [0, 1], 1.0, 0.0, StepControl("fixed", step=h))
            errs.append(abs(out.psi * math.exp(out.log_scale) - math.exp(-0.5)))
        ratio = errs[0] / errs[1]
        if not 12 <= ratio <= 20:
            failures.append(f"RK4 ratio {ratio:.2f}")

        path = [0j, 1.5 - 0.5j, 3.0 - 1.0j, 3.0]
        a, b = WaveState(0j, 1 + 0j, 0j), WaveState(0j, 0j, 1 + 0j)
        for mode in ("fixed", "adaptive"):
            ctl = StepControl(mode, step=1e-3)
            w = wronskian(integrate(a, path, 2 + 0.5j, 1.0, ctl), integrate(b, path, 2 + 0.5j, 1.0, ctl))
            if abs(w - 1) > 1e-8:
                failures.append(f"Wronskian drift {abs(w - 1):.1e} ({mode})")
    ok = not failures and t.elapsed < 60
    verdict(9, ok, f"quadrature {quad_err:.1e}, RK4 ratio {ratio:.2f}, {t.elapsed:.1f}s"
            + (f", failed: {failures}" if failures else ""))


def test_criterion_10_basis_invalid_for_eps2():
    with Timer() as t:
        rep = analysis.compare_methods(2, 3, 100)
    rel = rep.rel_deviation[:3]
    ok = (not rep.basis_valid) and any(r > 10 * rep.settle_tol for r in rel) and t.elapsed < 60
    verdict(10, ok, f"basis_valid={rep.basis_valid}, rel deviations {[f'{r:.2g}' for r in rel]}, "
                    f"{t.elapsed:.1f}s")

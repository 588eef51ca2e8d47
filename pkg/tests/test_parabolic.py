import numpy as np
import pytest

from pbcert.parabolic import (DiagonalParabolicModel, NoGap, OnEigenvalue,
                              optimize_resolvent_nu, resolvent_condition_passes,
                              resolvent_sup_norm, spectral_gap_check)


def squares_model(alpha=0.0, lipschitz=2.0, j=2, n=6):
    return DiagonalParabolicModel([k ** 2 for k in range(1, n + 1)],
                                  alpha, lipschitz, j)


class TestSpectralGap:
    def test_quadratic_spectrum_alpha_zero(self):
        rep = spectral_gap_check(squares_model())
        assert rep.gap_value == pytest.approx(2.5)  # (9-4)/(1+1)
        assert rep.passed

    def test_quadratic_spectrum_alpha_half(self):
        rep = spectral_gap_check(squares_model(alpha=0.5))
        assert rep.gap_value == pytest.approx(1.0)  # (9-4)/(2+3)
        assert not rep.passed

    def test_degenerate_pair_raises(self):
        model = DiagonalParabolicModel([1.0, 4.0, 4.0, 9.0], 0.0, 1.0, 2)
        with pytest.raises(NoGap):
            spectral_gap_check(model)

    def test_truncation_warning_near_nu(self):
        with pytest.warns(UserWarning, match="truncation tail"):
            spectral_gap_check(squares_model(n=4))

    def test_invalid_models(self):
        with pytest.raises(ValueError):
            DiagonalParabolicModel([-1.0, 2.0], 0.0, 1.0, 1)
        with pytest.raises(ValueError):
            DiagonalParabolicModel([2.0, 1.0], 0.0, 1.0, 1)
        with pytest.raises(ValueError):
            DiagonalParabolicModel([1.0, 2.0], 1.0, 1.0, 1)
        with pytest.raises(ValueError):
            DiagonalParabolicModel([1.0, 2.0], 0.0, 1.0, 2)


class TestResolventSup:
    def test_single_mode(self):
        model = DiagonalParabolicModel([1.0, 100.0], 0.0, 1.0, 1)
        assert resolvent_sup_norm(model, 0.5) == pytest.approx(2.0)

    def test_quadratic_spectrum_midpoint(self):
        # nearest eigenvalues to 6.5 are 4 and 9: max(1/2.5, 1/2.5, ...) = 0.4
        assert resolvent_sup_norm(squares_model(), 6.5) == pytest.approx(0.4)

    def test_on_eigenvalue_rejected(self):
        with pytest.raises(OnEigenvalue):
            resolvent_sup_norm(squares_model(), 9.0)

    def test_attained_at_zero_frequency(self):
        model = squares_model(alpha=0.75)
        nu = 6.0
        base = resolvent_sup_norm(model, nu)
        ev = model.eigenvalues
        for omega in np.linspace(0, 30, 301):
            val = np.max(ev ** 0.75 / np.abs(ev - nu + 1j * omega))
            assert val <= base * (1 + 1e-12)

    def test_optimum_reciprocal_equals_gap(self):
        model = squares_model(alpha=0.5)
        nu, sup = optimize_resolvent_nu(model)
        rep = spectral_gap_check(model)
        assert 4.0 < nu < 9.0
        assert 1.0 / sup == pytest.approx(rep.gap_value, rel=1e-9)


class TestEquivalence:
    def test_gap_iff_resolvent_over_random_models(self):
        rng = np.random.default_rng(123)
        agree = 0
        for _ in range(30):
            ev = np.sort(rng.uniform(0.2, 60.0, rng.integers(3, 9)))
            j = int(rng.integers(1, len(ev)))
            if ev[j] - ev[j - 1] < 1e-9:
                continue
            for alpha in (0.0, 0.25, 0.5, 0.75):
                lam = float(rng.uniform(0.05, 3.0))
                model = DiagonalParabolicModel(ev, alpha, lam, j)
                rep = spectral_gap_check(model)
                assert rep.passed == resolvent_condition_passes(model)
                agree += 1
        assert agree >= 100


class TestJsonInterface:
    def test_round_trip(self):
        model = squares_model(alpha=0.25, lipschitz=1.5, j=3)
        again = DiagonalParabolicModel.from_dict(model.to_dict())
        assert np.array_equal(again.eigenvalues, model.eigenvalues)
        assert again.alpha == model.alpha
        assert again.lipschitz == model.lipschitz
        assert again.j == model.j

    def test_report_dict_fields(self):
        rep = spectral_gap_check(squares_model())
        d = rep.to_dict()
        assert set(d) == {"gap_value", "passed", "nu_opt",
                          "resolvent_sup_at_nu", "threshold", "warnings"}

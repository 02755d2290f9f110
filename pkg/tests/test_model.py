import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavebif.model import (
    FluxModel,
    PhysicalParameters,
    PolynomialTail,
    flux_eval,
    flux_from_dict,
    flux_to_dict,
    nonlinear_flux,
    normalize_domain,
)


def two_step_scaling_oracle(a, delta, eps, M):
    """Independent composition of the two rescalings, written out separately."""
    # first: period to 2*pi
    a_bar = (math.pi / M) ** 3 * a
    delta_bar = (math.pi / M) * delta
    eps_bar = (math.pi / M) ** 3 * eps
    # second: absorb the remaining hyperviscosity into time
    return a_bar / eps_bar, delta_bar / eps_bar


class TestNormalizeDomain:
    def test_identity_at_normalized_values(self):
        out = normalize_domain(PhysicalParameters(a=2.0, delta=3.0, epsilon=1.0, half_period=math.pi))
        assert out.a == 2.0 and out.delta == 3.0

    def test_eps_rescaling(self):
        p = PhysicalParameters(a=1.0, delta=1.0, epsilon=2.0, half_period=math.pi)
        out = normalize_domain(p)
        expect = two_step_scaling_oracle(1.0, 1.0, 2.0, math.pi)
        assert out.a == pytest.approx(expect[0], abs=1e-15)
        assert out.delta == pytest.approx(expect[1], abs=1e-15)
        assert (out.a, out.delta) == pytest.approx((0.5, 0.5), abs=1e-15)

    def test_domain_rescaling(self):
        p = PhysicalParameters(a=1.0, delta=1.0, epsilon=1.0, half_period=2.0 * math.pi)
        out = normalize_domain(p)
        expect = two_step_scaling_oracle(1.0, 1.0, 1.0, 2.0 * math.pi)
        assert out.a == pytest.approx(expect[0], rel=1e-14)
        assert out.delta == pytest.approx(expect[1], rel=1e-14)
        assert (out.a, out.delta) == pytest.approx((1.0, 4.0), rel=1e-14)

    @given(
        a=st.floats(-5, 5), delta=st.floats(-5, 5),
        eps=st.floats(0.01, 10), M=st.floats(0.1, 50),
    )
    @settings(max_examples=100, deadline=None)
    def test_matches_two_step_oracle(self, a, delta, eps, M):
        out = normalize_domain(PhysicalParameters(a, delta, eps, M))
        ea, ed = two_step_scaling_oracle(a, delta, eps, M)
        assert out.a == pytest.approx(ea, rel=1e-12, abs=1e-12)
        assert out.delta == pytest.approx(ed, rel=1e-12, abs=1e-12)

    def test_idempotent_on_normalized_output(self):
        out = normalize_domain(PhysicalParameters(1.3, -0.7, 2.5, 4.0))
        again = normalize_domain(PhysicalParameters(out.a, out.delta))
        assert (again.a, again.delta) == (out.a, out.delta)

    @pytest.mark.parametrize("eps,M", [(0.0, math.pi), (-1.0, math.pi), (1.0, 0.0), (1.0, -2.0)])
    def test_rejects_unphysical(self, eps, M):
        with pytest.raises(ValueError):
            normalize_domain(PhysicalParameters(1.0, 1.0, eps, M))


class TestFluxEval:
    def test_zero_input(self):
        assert flux_eval(FluxModel(sigma3=2.0), 0.0) == 0.0

    def test_cubic_only(self):
        assert flux_eval(FluxModel(sigma3=2.0), 1.0) == pytest.approx(1.0 / 3.0, abs=1e-15)

    def test_mixed_derivatives(self):
        got = flux_eval(FluxModel(sigma1=-1.0, sigma2=1.0, sigma3=1.0), 0.1)
        expect = -0.1 + 0.005 + 0.001 / 6.0
        assert got == pytest.approx(expect, abs=1e-15)

    def test_zero_flux_is_identically_zero(self):
        tau = np.linspace(-1, 1, 17)
        assert np.all(flux_eval(FluxModel(), tau) == 0.0)

    @given(tau=st.floats(-1, 1))
    @settings(max_examples=100, deadline=None)
    def test_odd_when_even_derivative_vanishes(self, tau):
        flux = FluxModel(sigma1=0.7, sigma2=0.0, sigma3=-1.3,
                         tail=PolynomialTail([0.0, 0.4]))  # c4=0, c5=0.4: odd tail
        assert flux_eval(flux, -tau) == pytest.approx(-flux_eval(flux, tau), abs=1e-12)

    def test_nonlinear_part_excludes_slope(self):
        flux = FluxModel(sigma1=2.0, sigma2=3.0, sigma3=4.0)
        tau = 0.3
        assert nonlinear_flux(flux, tau) == pytest.approx(
            flux_eval(flux, tau) - 2.0 * tau, abs=1e-15
        )


class TestTail:
    def test_polynomial_tail_accepted(self):
        flux = FluxModel(tail=PolynomialTail([1.0, -0.5]))
        assert flux_eval(flux, 0.5) == pytest.approx(0.5**4 - 0.5 * 0.5**5, abs=1e-15)

    def test_quartic_bound_sampled(self):
        tail = PolynomialTail([2.0])
        for t in (1.0, 0.1, 1e-3):
            assert abs(tail(t)) <= 2.0 * t**4 + 1e-15

    def test_low_order_tail_rejected(self):
        with pytest.raises(ValueError, match="fourth order"):
            FluxModel(tail=math.sin)

    def test_nonzero_at_origin_rejected(self):
        with pytest.raises(ValueError):
            FluxModel(tail=lambda t: t**4 + 1.0)


class TestSerialization:
    def test_round_trip(self):
        flux = FluxModel(sigma1=-1.0, sigma2=0.5, sigma3=2.0, tail=PolynomialTail([0.1, 0.0, 3.0]))
        again = flux_from_dict(flux_to_dict(flux))
        assert (again.sigma1, again.sigma2, again.sigma3) == (-1.0, 0.5, 2.0)
        assert again.tail.coefficients == (0.1, 0.0, 3.0)

    def test_defaults(self):
        flux = flux_from_dict({"sigma3": 2})
        assert flux == FluxModel(sigma3=2.0)
        assert flux_to_dict(flux) == {"sigma1": 0.0, "sigma2": 0.0, "sigma3": 2.0}

    def test_opaque_tail_not_serializable(self):
        flux = FluxModel(tail=PolynomialTail([1.0]))
        object.__setattr__(flux, "tail", lambda t: t**4)
        with pytest.raises(ValueError):
            flux_to_dict(flux)

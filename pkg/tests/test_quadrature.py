import math

import pytest
from scipy import integrate

from ruinalarm.quadrature import QuadratureError, QuadratureSpec, adaptive_simpson


class TestAdaptiveSimpson:
    @pytest.mark.parametrize("f, a, b", [
        (math.sin, 0.0, math.pi),
        (lambda x: math.exp(-x * x), -3.0, 2.0),
        (lambda x: math.cos(40 * x) * math.exp(x), 0.0, 1.0),
        (lambda x: math.sqrt(x), 0.0, 1.0),
    ])
    def test_matches_scipy(self, f, a, b):
        """Agrees with QUADPACK within the requested tolerance."""
        res = adaptive_simpson(f, a, b, QuadratureSpec(abs_tol=1e-10))
        ref, _ = integrate.quad(f, a, b, epsabs=1e-13, limit=200)
        assert res.value == pytest.approx(ref, abs=1e-9)
        assert res.error <= 1e-10

    def test_empty_interval(self):
        assert adaptive_simpson(math.exp, 1.0, 1.0).value == 0.0

    def test_unmet_tolerance_raises(self):
        """A discontinuous integrand with a shallow depth cap cannot meet 1e-14."""
        spec = QuadratureSpec(abs_tol=1e-14, max_depth=3)
        with pytest.raises(QuadratureError) as info:
            adaptive_simpson(lambda x: 1.0 if x > 0.3 else 0.0, 0.0, 1.0, spec)
        assert info.value.value == pytest.approx(0.7, abs=0.1)

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            QuadratureSpec(method="gauss")
        with pytest.raises(ValueError):
            QuadratureSpec(abs_tol=0.0)

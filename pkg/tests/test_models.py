"""Tests for model descriptions, payoffs, and hypothesis validation."""

import numpy as np
import pytest

from svcubature.models import (
    Coefficient,
    SVIEModel,
    builtin_model,
    builtin_payoff,
    cos_1d,
    linear_1d,
    load_model,
    save_model,
    validate_hypotheses,
    volatility_2d,
    zero_coefficient,
)


class TestCoefficient:
    def test_families(self):
        x = np.array([0.3, 2.0])
        assert Coefficient("zero")(x) == 0.0
        assert Coefficient("const", params={"c": 4.0})(x) == 4.0
        assert Coefficient("identity", arg=1)(x) == 2.0
        assert Coefficient("cos")(x) == pytest.approx(np.cos(0.3))
        assert Coefficient("sqrt", arg=1)(x) == pytest.approx(np.sqrt(2.0))
        assert Coefficient("affine", params={"c0": 0.5, "c1": -1 / 3})(x) == (
            pytest.approx(0.5 - 0.1)
        )

    def test_sqrt_clips_negative(self):
        assert Coefficient("sqrt")(np.array([-1.0])) == 0.0

    def test_mul_state(self):
        c = Coefficient("cos", arg=1, mul_state=0)
        x = np.array([[2.0, 0.0], [3.0, np.pi]])
        np.testing.assert_allclose(c(x), [2.0, -3.0])

    def test_unknown_family(self):
        with pytest.raises(ValueError, match="family"):
            Coefficient("tan")

    def test_roundtrip(self):
        c = Coefficient("affine", arg=1, mul_state=0, params={"c1": 2.0})
        assert Coefficient.from_dict(c.to_dict()) == c


class TestBuiltinModels:
    def test_linear_1d(self):
        m = linear_1d(hurst=1.5, x0=1.0)
        assert m.n_drivers == 1
        assert m.n_states == 1
        assert m.semimartingale_states == ()
        assert m.coeffs[0][1](m.x0) == 1.0

    def test_cos_1d(self):
        m = cos_1d(hurst=2.5, x0=0.0)
        assert m.coeffs[0][1](m.x0) == 1.0
        assert m.kernels[0].hurst == 2.5

    def test_volatility_2d(self):
        m = volatility_2d(hurst=1.5, rho=0.5, s0=2.0, u0=1.0)
        assert m.n_drivers == 2
        assert m.n_states == 2
        # state 0 (price) carries the constant kernel
        assert m.semimartingale_states == (0,)
        x = np.array([2.0, 1.0])
        # drift of S is S * U, vol of U is cos(U)
        assert m.coeffs[0][0](x) == pytest.approx(2.0)
        assert m.coeffs[1][2](x) == pytest.approx(np.cos(1.0))
        assert m.coeffs[1][0](x) == pytest.approx(0.5 - 1.0 / 3.0)
        assert m.corr[0, 1] == 0.5

    def test_builtin_dispatch(self):
        m = builtin_model("1d-cos", hurst=1.5)
        assert m.name == "1d-cos"
        with pytest.raises(ValueError, match="unknown builtin"):
            builtin_model("3d-magic")


class TestModelValidation:
    def test_x0_length(self):
        with pytest.raises(ValueError, match="x0"):
            linear_1d(hurst=1.5).__class__(
                kernels=linear_1d(1.5).kernels,
                coeffs=linear_1d(1.5).coeffs,
                corr=np.eye(1),
                x0=np.array([0.0, 1.0]),
            )

    def test_corr_not_symmetric(self):
        base = volatility_2d()
        with pytest.raises(ValueError, match="symmetric"):
            SVIEModel(base.kernels, base.coeffs, np.array([[1.0, 0.2], [0.5, 1.0]]),
                      base.x0)

    def test_corr_unit_diagonal(self):
        base = volatility_2d()
        with pytest.raises(ValueError, match="diagonal"):
            SVIEModel(base.kernels, base.coeffs, np.array([[2.0, 0.0], [0.0, 1.0]]),
                      base.x0)

    def test_corr_psd(self):
        base = volatility_2d()
        with pytest.raises(ValueError, match="semidefinite"):
            SVIEModel(base.kernels, base.coeffs, np.array([[1.0, 1.5], [1.5, 1.0]]),
                      base.x0)

    def test_coefficient_row_length(self):
        base = linear_1d(1.5)
        with pytest.raises(ValueError, match="coefficients"):
            SVIEModel(base.kernels, ((zero_coefficient(),),), np.eye(1), base.x0)


class TestSerialization:
    @pytest.mark.parametrize(
        "model",
        [linear_1d(1.5, x0=1.0), cos_1d(2.5), volatility_2d(rho=-0.3, s0=0.56)],
    )
    def test_dict_roundtrip(self, model):
        m2 = SVIEModel.from_dict(model.to_dict())
        assert m2.name == model.name
        np.testing.assert_array_equal(m2.x0, model.x0)
        np.testing.assert_array_equal(m2.corr, model.corr)
        x = np.abs(model.x0) + 0.25
        for row, row2 in zip(model.coeffs, m2.coeffs):
            for c, c2 in zip(row, row2):
                assert c2(x) == pytest.approx(c(x))

    def test_file_roundtrip(self, tmp_path):
        model = volatility_2d(hurst=1.5, rho=0.5)
        p = tmp_path / "model.json"
        save_model(model, p)
        m2 = load_model(p)
        assert m2.to_dict() == model.to_dict()


class TestPayoffs:
    def test_builtin_names(self):
        x = np.array([[0.7]])
        assert builtin_payoff("cos")(x) == pytest.approx(np.cos(0.7))
        assert builtin_payoff("square")(x) == pytest.approx(0.49)
        assert builtin_payoff("call", strike=0.5)(x) == pytest.approx(0.2)
        with pytest.raises(ValueError, match="payoff"):
            builtin_payoff("digital")

    def test_read_index(self):
        p = builtin_payoff("square", read_index=1)
        assert p(np.array([[3.0, 2.0]])) == 4.0

    def test_call_kink(self):
        assert builtin_payoff("call", strike=0.56).kinks == (0.56,)


class TestHypothesisValidation:
    def test_high_hurst_ok(self):
        rep = validate_hypotheses(cos_1d(hurst=2.5), order=3)
        assert rep.ok
        assert rep.warnings == ()

    def test_low_hurst_warns(self):
        rep = validate_hypotheses(cos_1d(hurst=1.0), order=3)
        assert not rep.ok
        assert "H = 1" in rep.warnings[0]
        assert "1.5" in rep.warnings[0]

    def test_constant_kernel_never_warns(self):
        rep = validate_hypotheses(volatility_2d(hurst=2.6), order=5)
        assert rep.ok

    def test_even_order_rejected(self):
        with pytest.raises(ValueError, match="odd"):
            validate_hypotheses(linear_1d(1.5), order=4)

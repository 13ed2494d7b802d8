"""Certificates, integrals, and the two inequality checks."""

import json
import math

import numpy as np
import pytest

from torsion_bound import convex_geometry as cg
from torsion_bound import hh_verifier as hh
from torsion_bound import presets
from torsion_bound.estimates import WosConfig

import oracles

CFG = WosConfig(samples=60_000, seed=2)
FAST = WosConfig(samples=8_000, seed=2)


def half_disk():
    return presets.half_ball(2)


class TestFunctionKinds:
    def test_affine(self):
        f = hh.Affine(1.0, [0.0, -1.0])
        assert f([0.3, 0.4]) == pytest.approx(0.6)
        assert hh.Affine(1.0, [0.0, -1.0]).laplacian(np.zeros((3, 2))).tolist() \
            == [0.0, 0.0, 0.0]

    def test_quadratic(self):
        f = hh.Quadratic([1.0, 0.0], constant=2.0)
        assert f([0.0, 0.0]) == pytest.approx(3.0)
        assert f.laplacian(np.zeros((1, 2)))[0] == 4.0

    def test_shifted_norm(self):
        f = hh.ShiftedNorm([3.0, 0.0, 0.0])
        assert f([0.0, 0.0, 0.0]) == pytest.approx(3.0)
        assert f.laplacian(np.zeros((1, 3)))[0] == pytest.approx(2.0 / 3.0)

    def test_polynomial_symbolic_laplacian_vs_fd(self):
        # cubic harmonic plus a quartic bump: lap computed symbolically
        f = hh.HarmonicPolynomial({(3, 0): 1.0, (1, 2): -3.0, (4, 0): 0.25,
                                   (0, 0): 2.0}, 2)
        gen = np.random.Generator(np.random.Philox(key=np.array([12, 0],
                                                                dtype=np.uint64)))
        pts = gen.uniform(-1, 1, size=(100, 2))
        sym = f.laplacian(pts)
        for x, s in zip(pts, sym):
            fd = oracles.fd_laplacian(f, x)
            assert fd == pytest.approx(s, rel=1e-6, abs=1e-6)

    def test_harmonic_cubic_is_harmonic(self):
        f = presets.harmonic_cubic(cg.Ball([0.0, 0.0], 1.0))
        assert not f._laplacian_terms

    def test_combination_weights_validated(self):
        with pytest.raises(ValueError):
            hh.PositiveCombination([(-1.0, hh.Affine(1.0, [0.0, 0.0]))])

    def test_json_round_trip(self):
        fns = [hh.Affine(1.0, [0.0, -1.0]),
               hh.Quadratic([0.5, 0.5], constant=1.0, linear=[0.1, 0.0]),
               hh.HarmonicPolynomial({(3, 0): 1.0, (1, 2): -3.0}, 2),
               hh.ShiftedNorm([3.0, 0.0]),
               hh.PositiveCombination([(2.0, hh.Affine(1.0, [0.0, 0.0])),
                                       (0.5, hh.ShiftedNorm([4.0, 0.0]))])]
        for f in fns:
            doc = json.loads(json.dumps(f.to_json()))
            clone = hh.fn_from_json(doc, 2)
            assert clone.to_json() == f.to_json()
            X = np.array([[0.1, 0.2], [-0.3, 0.4]])
            assert np.allclose(clone.value(X), f.value(X))


class TestCertificates:
    def test_superharmonic_rejected_with_witness(self):
        body = cg.Ball([0.0, 0.0], 1.0)
        # -|x-a|^2 has laplacian -2n < 0
        bad = hh.HarmonicPolynomial({(2, 0): -1.0, (0, 2): -1.0, (0, 0): 9.0}, 2)
        with pytest.raises(hh.CertificateError) as err:
            hh.certify_subharmonic(body, bad)
        assert err.value.witness.shape == (2,)

    def test_boundary_negative_rejected_with_witness(self):
        body = cg.Ball([0.0, 0.0], 1.0)
        f = hh.Affine(0.0, [0.0, 1.0])  # y: negative on the lower arc
        with pytest.raises(hh.CertificateError) as err:
            hh.certify_boundary_nonnegative(body, f)
        assert cg.contains(body, err.value.witness)

    def test_anchor_inside_rejected(self):
        with pytest.raises(hh.CertificateError):
            hh.certify_subharmonic(cg.Ball([0.0, 0.0], 1.0),
                                   hh.ShiftedNorm([0.5, 0.0]))

    def test_sign_changing_inside_accepted(self):
        # negative deep inside, nonnegative on the boundary: admissible
        body = cg.Ball([0.0, 0.0], 1.0)
        f = hh.Quadratic([0.0, 0.0], constant=-0.5)
        hh.certify_subharmonic(body, f)
        hh.certify_boundary_nonnegative(body, f)
        assert f([0.0, 0.0]) < 0.0


class TestVolumeIntegral:
    def test_half_disk_affine(self):
        est = hh.volume_integral(half_disk(), hh.Affine(1.0, [0.0, -1.0]), CFG)
        exact = math.pi / 2.0 - 2.0 / 3.0
        assert abs(est.mean - exact) <= 3.0 * est.stderr

    def test_ball_constant_is_volume(self):
        est = hh.volume_integral(cg.Ball([0.0, 0.0], 1.0),
                                 hh.Affine(1.0, [0.0, 0.0]), FAST)
        assert est.mean == pytest.approx(math.pi, rel=1e-12)

    def test_box_harmonic_cancels(self):
        f = hh.HarmonicPolynomial({(2, 0): 1.0, (0, 2): -1.0}, 2)
        est = hh.volume_integral(cg.Box([0.0, 0.0], [1.0, 1.0]), f, CFG)
        assert abs(est.mean) <= 4.0 * est.stderr

    def test_matches_exact_polynomial_integrals(self):
        ball = cg.Ball([0.5, -0.25], 1.5)
        f = hh.HarmonicPolynomial({(3, 0): 1.0, (1, 2): -3.0, (0, 0): 4.0}, 2)
        est = hh.volume_integral(ball, f, CFG)
        assert abs(est.mean - hh.exact_volume_integral(ball, f)) \
            <= 4.0 * est.stderr
        box = cg.Box([0.0, -1.0], [2.0, 1.0])
        est2 = hh.volume_integral(box, f, CFG)
        assert abs(est2.mean - hh.exact_volume_integral(box, f)) \
            <= 4.0 * est2.stderr


class TestExactIntegrals:
    def test_unit_ball_monomials_vs_quadrature(self):
        from scipy.integrate import dblquad

        ball = cg.Ball([0.0, 0.0], 1.0)
        for powers in ((0, 0), (2, 0), (2, 2), (4, 0), (1, 0), (1, 1)):
            f = hh.HarmonicPolynomial({powers: 1.0}, 2)
            brute, _ = dblquad(
                lambda y, x: x ** powers[0] * y ** powers[1],
                -1, 1,
                lambda x: -math.sqrt(max(1.0 - x * x, 0.0)),
                lambda x: math.sqrt(max(1.0 - x * x, 0.0)),
                epsabs=1e-10)
            assert hh.exact_volume_integral(ball, f) == pytest.approx(
                brute, abs=1e-7)

    def test_shifted_norm_unsupported(self):
        with pytest.raises(ValueError):
            hh.exact_volume_integral(cg.Ball([0.0, 0.0], 1.0),
                                     hh.ShiftedNorm([3.0, 0.0]))

    def test_polytope_unsupported(self):
        with pytest.raises(ValueError):
            hh.exact_volume_integral(presets.simplex(2),
                                     hh.Affine(1.0, [0.0, 0.0]))


class TestBoundaryIntegral:
    def test_half_disk_affine(self):
        est = hh.boundary_integral(half_disk(), hh.Affine(1.0, [0.0, -1.0]),
                                   CFG)
        assert abs(est.mean - math.pi) <= 3.0 * est.stderr

    def test_ball_constant(self):
        est = hh.boundary_integral(cg.Ball([0.0, 0.0], 1.0),
                                   hh.Affine(1.0, [0.0, 0.0]), FAST)
        assert est.mean == pytest.approx(2.0 * math.pi, rel=1e-12)

    def test_ball_odd_function_cancels(self):
        est = hh.boundary_integral(cg.Ball([0.0, 0.0], 1.0),
                                   hh.Affine(0.0, [1.0, 0.0]), CFG)
        assert abs(est.mean) <= 4.0 * est.stderr

    def test_ellipse_weighted_constant(self):
        from scipy.special import ellipe

        est = hh.boundary_integral(presets.beck_ellipsoid(2),
                                   hh.Affine(1.0, [0.0, 0.0]), CFG)
        assert abs(est.mean - 8.0 * ellipe(0.5)) <= 3.0 * est.stderr


class TestVerifyTheorem1:
    def test_half_disk_sharpness_ratio(self):
        rep = hh.verify_theorem1(half_disk(), hh.Affine(1.0, [0.0, -1.0]), CFG)
        assert rep.passed
        assert rep.details["ratio"] == pytest.approx(0.2296, abs=0.002)

    def test_certificate_gate(self):
        with pytest.raises(hh.CertificateError):
            hh.verify_theorem1(cg.Ball([0.0, 0.0], 1.0),
                               hh.Affine(0.0, [0.0, 1.0]), FAST)

    def test_constant_on_box_n4(self):
        body = cg.Box([0.0] * 4, [1.0] * 4)
        rep = hh.verify_theorem1(body, hh.Affine(1.0, [0.0] * 4), FAST)
        assert rep.passed
        # 1 <= (sqrt(2)/pi) * 1 * 8
        assert rep.bound_value == pytest.approx(8.0 * math.sqrt(2.0) / math.pi,
                                                rel=0.05)

    def test_shifted_norm_on_ball_n3(self):
        rep = hh.verify_theorem1(cg.Ball([0.0] * 3, 1.0),
                                 hh.ShiftedNorm([3.0, 0.0, 0.0]), FAST)
        assert rep.passed

    def test_margin_additive_over_combination(self):
        body = half_disk()
        f1 = hh.Affine(1.0, [0.0, -1.0])
        f2 = hh.Quadratic([0.0, 0.5], constant=0.0)
        combo = hh.PositiveCombination([(2.0, f1), (0.5, f2)])
        r1 = hh.verify_theorem1(body, f1, FAST)
        r2 = hh.verify_theorem1(body, f2, FAST)
        rc = hh.verify_theorem1(body, combo, FAST)
        # same seed, same sample points: linearity is exact up to rounding
        assert rc.margin == pytest.approx(2.0 * r1.margin + 0.5 * r2.margin,
                                          rel=1e-9)


class TestHhViaTorsion:
    def test_ball_constant_equality_case(self):
        body = cg.Ball([0.0, 0.0], 1.0)
        rep = hh.hh_via_torsion(body, hh.Affine(1.0, [0.0, 0.0]), FAST,
                                boundary_samples=16)
        assert rep.passed
        # pi <= (R/n) * 2 pi with R/n = 1/2: tight up to sampling noise
        assert rep.measured.mean == pytest.approx(math.pi, rel=1e-12)
        assert rep.bound_value == pytest.approx(math.pi, rel=0.15)

    def test_half_disk_affine(self):
        rep = hh.hh_via_torsion(half_disk(), hh.Affine(1.0, [0.0, -1.0]),
                                FAST, boundary_samples=16)
        assert rep.passed

    def test_ellipse_constant(self):
        body = presets.beck_ellipsoid(2)
        rep = hh.hh_via_torsion(body, hh.Affine(1.0, [0.0, 0.0]), FAST,
                                boundary_samples=16)
        assert rep.passed

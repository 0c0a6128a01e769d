import numpy as np
import pytest

from qsdp.npa import Scenario, chsh_functional, solve_bell
from qsdp.sos import (
    chsh_operator_coefficients,
    gram_polynomial,
    monomials,
    motzkin_polynomial,
    sos_certificate,
    tsirelson_sos_chsh,
)

ROOT2 = np.sqrt(2.0)


def poly_mul_squares(squares):
    """Independent reconstruction sum_i g_i^2 from square polynomials."""
    out = {}
    for g in squares:
        for m1, c1 in g.items():
            for m2, c2 in g.items():
                key = tuple(a + b for a, b in zip(m1, m2))
                out[key] = out.get(key, 0.0) + c1 * c2
    return {k: v for k, v in out.items() if abs(v) > 1e-12}


class TestMonomials:
    def test_basis_count(self):
        from math import comb

        for n, m in [(2, 2), (3, 3), (4, 2)]:
            assert len(monomials(n, m)) == comb(n + m - 1, m)


class TestSosCertificate:
    def test_sum_of_two_squares(self):
        # (x^2 + y^2)^2 = x^4 + 2 x^2 y^2 + y^4
        h = {(4, 0): 1.0, (2, 2): 2.0, (0, 4): 1.0}
        res = sos_certificate(h, 2)
        assert res.feasible
        cert = res.certificate
        assert np.linalg.eigvalsh(cert.gram)[0] > -1e-8
        assert cert.residual < 1e-7
        recon = poly_mul_squares(cert.squares)
        for key, want in h.items():
            assert recon.get(key, 0.0) == pytest.approx(want, abs=1e-6)

    def test_difference_square(self):
        h = {(4, 0): 1.0, (2, 2): -2.0, (0, 4): 1.0}  # (x^2 - y^2)^2
        res = sos_certificate(h, 2)
        assert res.feasible
        assert res.certificate.residual < 1e-7

    def test_motzkin_not_sos(self):
        h, n = motzkin_polynomial()
        res = sos_certificate(h, n)
        assert not res.feasible
        assert res.margin < -1e-4
        assert res.dual_witness is not None

    def test_random_sos_soundness(self):
        rng = np.random.default_rng(2)
        basis = monomials(2, 2)
        for _ in range(5):
            gs = [dict(zip(basis, rng.normal(size=len(basis)))) for _ in range(2)]
            h = poly_mul_squares(gs)
            res = sos_certificate(h, 2)
            assert res.feasible
            recon = poly_mul_squares(res.certificate.squares)
            for key in set(h) | set(recon):
                assert recon.get(key, 0.0) == pytest.approx(h.get(key, 0.0), abs=1e-6)

    def test_rejects_inhomogeneous(self):
        with pytest.raises(ValueError):
            sos_certificate({(2, 0): 1.0, (1, 0): 1.0}, 2)


class TestTsirelsonSos:
    def test_bound_is_2sqrt2(self):
        q1, report = tsirelson_sos_chsh()
        assert q1 == pytest.approx(2 * ROOT2, abs=1e-6)
        assert np.linalg.eigvalsh(report["gram"])[0] > -1e-8
        assert report["residual"] < 1e-6
        assert np.max(np.abs(report["gamma"])) < 1e-7

    def test_reference_decomposition_identity(self):
        # (r1' r1 + r2' r2) / (2 sqrt 2) equals 2 sqrt 2 - CHSH, word by word,
        # for r1 = A1 + A2 - sqrt2 B1 and r2 = A1 - A2 - sqrt2 B2
        v1 = np.array([1.0, 1.0, -ROOT2, 0.0])
        v2 = np.array([1.0, -1.0, 0.0, -ROOT2])
        gram = (np.outer(v1, v1) + np.outer(v2, v2)) / (2 * ROOT2)
        expanded = gram_polynomial(gram)
        target = {(): 2 * ROOT2}
        for word, c in chsh_operator_coefficients().items():
            target[word] = target.get(word, 0.0) - c
        for word in set(expanded) | set(target):
            assert expanded.get(word, 0.0) == pytest.approx(target.get(word, 0.0), abs=1e-12)

    def test_solver_gram_reproduces_decomposition(self):
        q1, report = tsirelson_sos_chsh()
        expanded = gram_polynomial(report["gram"])
        target = {(): q1}
        for word, c in chsh_operator_coefficients().items():
            target[word] = target.get(word, 0.0) - c
        for word in set(expanded) | set(target):
            assert expanded.get(word, 0.0) == pytest.approx(target.get(word, 0.0), abs=1e-6)

    def test_agrees_with_moment_hierarchy(self):
        q1, _ = tsirelson_sos_chsh()
        npa_value = solve_bell(Scenario.chsh(), 1, chsh_functional()).value
        assert q1 == pytest.approx(npa_value, abs=1e-6)

from fractions import Fraction as F

import numpy as np
import pytest

from reeb_spectra.bodies import ConvexBody
from reeb_spectra.certify import (
    EhVerdict,
    besse_by_invariants,
    besse_sufficient_eh,
    zoll_by_pinching,
)
from reeb_spectra.ellipsoid import (
    action_spectrum,
    besse_cz_index,
    classify,
    ellipsoid,
    spectral_invariants,
)


class TestBesseByInvariants:
    def test_e12_hit(self):
        c = spectral_invariants(ellipsoid([1, 2]), 8)
        hits = besse_by_invariants(c, 2)
        assert (hits[0].i, hits[0].tau, hits[0].mu) == (1, F(2), 4)
        assert hits[0].mu == besse_cz_index(ellipsoid([1, 2]), 2)

    def test_round_zoll_hit_at_zero(self):
        c = spectral_invariants(ellipsoid([1, 1]), 8)
        hits = besse_by_invariants(c, 2)
        assert hits[0].i == 0 and hits[0].tau == F(1) and hits[0].mu == 2

    def test_strictly_increasing_no_hits(self):
        assert besse_by_invariants([F(1), F(2), F(3), F(5)], 2) == []

    def test_requires_enough_entries(self):
        with pytest.raises(ValueError):
            besse_by_invariants([F(1)], 2)

    def test_requires_monotone(self):
        with pytest.raises(ValueError):
            besse_by_invariants([F(2), F(1), F(3)], 2)

    def test_float_tolerance(self):
        c = [1.0, 2.0, 2.0 + 1e-12, 3.0]
        hits = besse_by_invariants(c, 2)
        assert len(hits) == 1 and hits[0].i == 1

    @pytest.mark.parametrize("seed", range(10))
    def test_hits_exactly_at_mu_formula(self, seed):
        rng = np.random.default_rng(400 + seed)
        n = int(rng.integers(2, 4))
        a = sorted(F(int(rng.integers(1, 7)), int(rng.integers(1, 4))) for _ in range(n))
        E = ellipsoid(a)
        tau0 = classify(E).tau0
        mu = besse_cz_index(E, tau0)
        i_expected = (mu - n) // 2
        count = i_expected + n + 2
        hits = besse_by_invariants(spectral_invariants(E, count), n)
        hit_is = [h.i for h in hits if h.tau == tau0]
        assert i_expected in hit_is
        for h in hits:
            assert h.mu == 2 * h.i + n
            # a hit value must be a common period: equality of n invariants
            # forces multiplicity n, so every parameter divides tau
            assert all((h.tau / ah).denominator == 1 for ah in E.a), (a, h)

    def test_irrational_no_hits(self):
        E = ellipsoid([1.0, float(np.sqrt(2))])
        c = spectral_invariants(E, 200)
        assert besse_by_invariants(c, 2, exact=False) == []


class TestZollByPinching:
    def setup_method(self):
        self.ball = ConvexBody(a=[1.0, 1.0], alpha=1.5, validate=False)
        self.c_ball = spectral_invariants(ellipsoid([1, 1]), 2)

    def _spectrum(self, a, upper):
        return [e.tau for e in action_spectrum(ellipsoid(a), upper)]

    def test_ball_certified(self):
        res = zoll_by_pinching(
            self.ball,
            self._spectrum([1, 1], 3),
            delta_sq=F(3, 2),
            coverage_attested=True,
            invariants_c=self.c_ball,
        )
        assert res.status == "certified-zoll"
        assert res.detail["bound_chain"]["holds"]

    def test_besse_not_zoll_refused(self):
        body = ConvexBody(a=[1.0, 1.5], alpha=1.5, validate=False)
        res = zoll_by_pinching(
            body,
            self._spectrum([1, "3/2"], 4),
            delta_sq=F(7, 4),
            coverage_attested=True,
        )
        assert res.status == "refusal"
        assert F(3, 2) in res.detail["blocking_values"]

    def test_near_round_refused(self):
        body = ConvexBody(a=[1.0, 1.1], alpha=1.5, validate=False)
        res = zoll_by_pinching(
            body,
            self._spectrum([1, "11/10"], 3),
            delta_sq=F(3, 2),
            coverage_attested=True,
        )
        assert res.status == "refusal"

    def test_pinching_hypothesis_gate(self):
        body = ConvexBody(a=[1.0, 3.0], alpha=1.5, validate=False)
        res = zoll_by_pinching(
            body, [F(1)], delta_sq=F(2), coverage_attested=True
        )
        assert res.status == "not-applicable"

    def test_delta_range_gate(self):
        res = zoll_by_pinching(
            self.ball, [F(1)], delta_sq=F(5, 2), coverage_attested=True
        )
        assert res.status == "not-applicable"

    def test_attestation_required(self):
        with pytest.raises(ValueError, match="attestation"):
            zoll_by_pinching(self.ball, [F(1)], delta_sq=F(3, 2))

    def test_float_delta_route(self):
        res = zoll_by_pinching(
            self.ball,
            self._spectrum([1, 1], 3),
            delta=1.2,
            coverage_attested=True,
        )
        assert res.status == "certified-zoll"

    def test_delta_required(self):
        with pytest.raises(ValueError, match="delta"):
            zoll_by_pinching(self.ball, [F(1)], coverage_attested=True)

    def test_open_interval_boundary(self):
        # a spectrum value exactly at delta^2 * sys does not block
        res = zoll_by_pinching(
            self.ball,
            [F(1), F(3, 2)],
            delta_sq=F(3, 2),
            coverage_attested=True,
        )
        assert res.status == "certified-zoll"

    def test_family_certifies_only_round(self):
        for x in [F(1), F(11, 10), F(3, 2), F(19, 10)]:
            body = ConvexBody(a=[1.0, float(x)], alpha=1.5, validate=False)
            dsq = (x + 2) / 2  # in (x, 2]
            res = zoll_by_pinching(
                body,
                self._spectrum([1, x], 4),
                delta_sq=dsq,
                coverage_attested=True,
            )
            assert (res.status == "certified-zoll") == (x == 1)


class TestBesseSufficientEh:
    def test_matches_invariant_scan(self):
        c = spectral_invariants(ellipsoid([1, 2]), 8)
        v = besse_sufficient_eh(c, 2, spectrum_discrete_attested=True)
        assert isinstance(v, EhVerdict)
        assert [h.i for h in v.hits] == [h.i for h in besse_by_invariants(c, 2)]
        assert "sufficient" in v.label
        assert not v.degenerate

    def test_n1_degenerate_flag(self):
        v = besse_sufficient_eh([F(1), F(2)], 1, spectrum_discrete_attested=True)
        assert v.degenerate
        assert len(v.hits) == 2

    def test_attestation_gate(self):
        with pytest.raises(ValueError, match="attestation"):
            besse_sufficient_eh([F(1), F(1)], 2)

"""The equality-approaching family: closed forms, measured divergences, limits."""

import math

import numpy as np
import pytest

from errorbound.bounds import refined_bound
from errorbound.decisions import global_errors
from errorbound.distributions import class_prior, kl_divergence
from errorbound.errors import DomainError
from errorbound.frontier import (
    SWEEP_HEADER,
    build_family_point,
    family_kl_closed_form,
    family_mismatch_closed_form,
    lambda_grid,
    model_joint,
    sweep_csv_lines,
    sweep_frontier,
)

from oracles import kl_oracle

# closed-form divergence at (t=0.01, lambda=0.8), frozen independently
KL_001_08 = 0.009637237851087875

# mismatch at (t=0.01, lambda=0.99): t(2*lambda - 1)/(1 - lambda)
DELTA_001_099 = 0.9799999999999991

EPS_LADDER = (1e-2, 1e-4, 1e-6, 1e-8)


class TestDomain:
    @pytest.mark.parametrize("t,lam", [(0.0, 0.6), (0.5, 0.6), (0.1, 0.49), (0.1, 0.91)])
    def test_rejects_bad_parameters(self, t, lam):
        with pytest.raises(DomainError):
            build_family_point(t, lam, 1e-8)

    @pytest.mark.parametrize("eps", [0.0, -1e-9, 0.51])
    def test_rejects_bad_epsilon(self, eps):
        with pytest.raises(DomainError):
            build_family_point(0.01, 0.8, eps)

    def test_lambda_extremes_are_legal(self):
        build_family_point(0.01, 0.5, 1e-8)
        build_family_point(0.01, 0.99, 1e-8)


class TestFamilyPoint:
    def test_bayes_error_equals_threshold(self):
        for t in (0.01, 0.1, 0.25):
            for lam in lambda_grid(t, 9):
                point = build_family_point(t, float(lam), 1e-8)
                bayes = 1.0 - float(point.pr.weights.max(axis=0).sum())
                assert bayes == pytest.approx(t, abs=1e-15)

    def test_mismatch_closed_form_matches_decisions(self):
        for t in (0.01, 0.1):
            for lam in lambda_grid(t, 9):
                point = build_family_point(t, float(lam), 1e-8)
                _, _, gap = global_errors(point.pr.weights, model_joint(point).weights)
                assert gap == pytest.approx(
                    family_mismatch_closed_form(t, float(lam)), abs=1e-14
                )

    def test_frozen_values(self):
        assert family_kl_closed_form(0.01, 0.8) == pytest.approx(KL_001_08, abs=1e-17)
        assert family_mismatch_closed_form(0.01, 0.99) == pytest.approx(
            DELTA_001_099, abs=1e-16
        )

    def test_closed_form_sits_on_the_bound(self):
        # |family KL - h_t(family delta)| at machine precision: the family
        # certifies the bound cannot be improved
        for t in (0.01, 0.05, 0.1):
            for lam in lambda_grid(t, 50):
                delta = family_mismatch_closed_form(t, float(lam))
                assert family_kl_closed_form(t, float(lam)) == pytest.approx(
                    refined_bound(delta, t), abs=1e-12
                )

    def test_measured_prior_divergence_against_scipy(self):
        point = build_family_point(0.05, 0.7, 1e-6)
        measured = kl_divergence(class_prior(point.pr), point.q_prior)
        assert measured == pytest.approx(
            kl_oracle(class_prior(point.pr).mass, point.q_prior.mass), abs=1e-12
        )


class TestSweep:
    def test_small_epsilon_hugs_the_bound(self):
        rows = sweep_frontier(0.01, lambda_grid(0.01, 50), 1e-8)
        assert max(row.gap for row in rows) <= 1e-5
        assert min(row.gap for row in rows) >= -1e-12

    def test_gap_monotone_in_epsilon(self):
        for t in (0.01, 0.1):
            for lam in (0.6, 0.8):
                gaps = []
                for eps in EPS_LADDER:
                    row = sweep_frontier(t, [lam], eps)[0]
                    gaps.append(row.gap)
                assert all(a > b for a, b in zip(gaps, gaps[1:]))

    def test_lambda_grid_spans_range(self):
        grid = lambda_grid(0.25, 10)
        assert grid[0] == 0.5 and grid[-1] == 0.75
        with pytest.raises(DomainError):
            lambda_grid(0.0, 10)

    def test_csv_lines(self):
        rows = sweep_frontier(0.01, lambda_grid(0.01, 5), 1e-8)
        lines = sweep_csv_lines(rows)
        assert lines[0] == SWEEP_HEADER
        assert len(lines) == 6
        assert all(len(line.split(",")) == 8 for line in lines[1:])

    def test_finite_epsilon_gap_scales_linearly(self):
        # gap ~ 2 * delta * epsilon for small epsilon
        t, lam = 0.01, 0.8
        delta = family_mismatch_closed_form(t, lam)
        row = sweep_frontier(t, [lam], 1e-6)[0]
        assert row.gap == pytest.approx(2.0 * delta * 1e-6, rel=0.05)

import math

import numpy as np
import pytest

from mvquad.axioms import check_fap, check_hull_membership, check_markov
from mvquad.domain import DiscreteMeasure, interval
from mvquad.expr import parse


class TestMarkov:
    def test_identity_on_unit_interval(self):
        rep = check_markov(parse("t"), interval(0, 1), [0.5])
        assert rep.passed and rep.cases_run == 1
        assert abs(rep.details["mean"] - 0.5) < 1e-12

    def test_zero_function(self):
        rep = check_markov(parse("0"), interval(-1, 1), [1.0])
        assert rep.passed

    def test_two_atoms(self):
        m = DiscreteMeasure.from_atoms([([0.0], 0.5), ([10.0], 0.5)])
        rep = check_markov(parse("exp(-t)"), m, [0.9])
        assert rep.passed
        assert abs(rep.details["mean"] - (1 + math.exp(-10)) / 2) < 1e-15

    def test_rejects_negative_integrand(self):
        with pytest.raises(ValueError):
            check_markov(parse("t"), interval(-1, 1), [0.5])

    def test_many_thresholds(self):
        rep = check_markov(parse("t^2 + abs(sin(4*t))"), interval(-1, 2, "1 + t^2"),
                           [0.01, 0.2, 0.7, 1.5, 3.0, 10.0])
        assert rep.passed and rep.cases_run == 6


class TestFap:
    def test_partition_of_two_atoms(self):
        m = DiscreteMeasure.from_atoms([([0.0], 0.3), ([1.0], 0.7)])
        rep = check_fap(m, 50, seed=0)
        assert rep.passed and rep.cases_run == 50

    def test_random_ten_atoms(self, rng):
        m = DiscreteMeasure.from_atoms(zip(rng.normal(size=(10, 2)), rng.random(10)))
        rep = check_fap(m, 200, seed=1)
        assert rep.passed

    def test_deterministic(self, rng):
        m = DiscreteMeasure.from_atoms(zip(rng.normal(size=(7, 1)), rng.random(7)))
        assert check_fap(m, 30, 5).to_json() == check_fap(m, 30, 5).to_json()

    def test_needs_discrete(self):
        with pytest.raises(ValueError):
            check_fap(interval(0, 1), 1, 0)


class TestHull:
    def test_identity(self):
        rep = check_hull_membership([parse("t")], interval(0, 1), 1e-9)
        assert rep.passed and rep.details["residual"] <= 1e-9

    def test_step_two_atoms(self):
        rep = check_hull_membership([parse("2*step(t)-1")], interval(-1, 1), 1e-9)
        assert rep.passed
        assert rep.details["atoms"] == 2
        np.testing.assert_allclose(rep.details["weights"], [0.5, 0.5], atol=1e-12)
        lo, hi = sorted(p[0] for p in rep.details["nodes"])
        assert -1 < lo < 0 <= hi < 1

    def test_circle(self):
        rep = check_hull_membership([parse("cos(t)"), parse("sin(t)")], interval(0, 2 * math.pi), 1e-9)
        assert rep.passed and rep.details["atoms"] <= 3
        nodes = np.array(rep.details["nodes"])[:, 0]
        direct = np.array([np.cos(nodes), np.sin(nodes)]) @ np.array(rep.details["weights"])
        assert np.abs(direct).max() <= 1e-9
        assert min(rep.details["weights"]) >= -1e-12

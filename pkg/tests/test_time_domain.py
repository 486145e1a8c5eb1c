import numpy as np
import pytest

from hrvkit.errors import InsufficientDataError
from hrvkit.features import time_domain_features

from oracles import time_domain_oracle


class TestTimeDomain:
    def test_constant(self):
        out = time_domain_features(np.full(10, 800.0))
        assert out.mean_nn == 800.0
        assert out.sdnn == 0.0
        assert out.rmssd == 0.0
        assert out.nn50 == 0
        assert out.pnn50 == 0.0
        assert out.hrv_tri == 1.0

    def test_nn50_counting(self):
        out = time_domain_features(np.array([800.0, 860.0, 865.0, 700.0]))
        assert out.nn50 == 2  # |60| and |165| exceed 50
        assert out.pnn50 == pytest.approx(2 / 3)

    def test_alternation_closed_forms(self):
        x = np.array([700.0, 800.0] * 50)
        out = time_domain_features(x)
        assert out.rmssd == pytest.approx(100.0, abs=1e-12)
        assert out.sdnn == pytest.approx(50.0, abs=1e-12)

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            time_domain_features(np.array([800.0]))

    def test_matches_oracle(self):
        rng = np.random.default_rng(10)
        for _ in range(25):
            x = rng.uniform(500, 1100, size=rng.integers(10, 80))
            got = time_domain_features(x).as_dict()
            want = time_domain_oracle(x)
            for key, val in want.items():
                assert got[key] == pytest.approx(val, rel=1e-9), key

    def test_translation_invariance(self):
        rng = np.random.default_rng(11)
        x = rng.uniform(600, 900, 40)
        a = time_domain_features(x)
        b = time_domain_features(x + 123.0)
        assert b.mean_nn == pytest.approx(a.mean_nn + 123.0)
        assert b.sdnn == pytest.approx(a.sdnn)
        assert b.rmssd == pytest.approx(a.rmssd)

    def test_ranges(self):
        rng = np.random.default_rng(12)
        for _ in range(10):
            x = rng.uniform(400, 1200, 60)
            out = time_domain_features(x)
            assert 0.0 <= out.pnn50 <= 1.0
            assert 1.0 <= out.hrv_tri <= x.size

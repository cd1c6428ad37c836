import numpy as np
import pytest

from qtherm.quasiprob import brownian_average
from qtherm.quasiprob.core import QuasiprobTable


@pytest.fixture(scope="module")
def result():
    # small but honest ensemble; the acceptance suite runs the full one
    return brownian_average(
        n_qubits=4, dt=5e-4, shots=512, t_grid=[0.0, 0.5, 1.0, 2.0], seed=11
    )


class TestBrownianAverage:
    def test_t_zero_exact_values(self, result):
        point = result.points[0]
        assert point.f_mean == pytest.approx(1.0, abs=1e-9)
        assert abs(point.g_mean) < 1e-9
        for (v1, w2, v2, w3), mean in point.table_mean.items():
            target = 0.25 if (w2 * w3 == 1 and v1 * v2 == 1) else 0.0
            assert mean == pytest.approx(target, abs=1e-9)

    def test_otoc_decays(self, result):
        f = [abs(p.f_mean) for p in result.points]
        assert f[0] > 0.9
        assert f[-1] < 0.2

    def test_two_point_function_vanishes(self, result):
        for p in result.points:
            err = max(p.g_err, 1e-4)
            assert abs(p.g_mean.real) < 4 * err
            assert abs(p.g_mean.imag) < 4 * err

    def test_table_tracks_f_identity(self, result):
        # residual of 16A - (1 + w2w3 + v1v2) - w2w3v1v2 F has zero mean
        for p in result.points:
            for key, mean in p.residual_mean.items():
                err = max(p.residual_err[key], 1e-5)
                assert abs(mean) < 4 * err

    def test_late_time_clustering(self, result):
        late = result.points[-1]
        for (v1, w2, v2, w3), mean in late.table_mean.items():
            target = (1 + w2 * w3 + v1 * v2) / 16.0
            err = max(late.table_err[(v1, w2, v2, w3)], 1e-4)
            assert abs(mean.real - target) < 5 * err

    def test_unitarity_maintained(self, result):
        assert result.discarded == 0

    def test_reproducible_and_chunk_independent(self):
        a = brownian_average(3, 5e-4, 40, [0.3], seed=7)
        b = brownian_average(3, 5e-4, 40, [0.3], seed=7)
        assert a.points[0].f_mean == b.points[0].f_mean
        assert a.points[0].table_mean == b.points[0].table_mean

    def test_input_validation(self):
        with pytest.raises(ValueError, match="dt"):
            brownian_average(3, 5e-3, 10, [0.5], seed=0)
        with pytest.raises(ValueError, match="6"):
            brownian_average(7, 5e-4, 10, [0.5], seed=0)

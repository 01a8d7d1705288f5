import math

import numpy as np
import pytest
from numpy.polynomial import Polynomial

from layerfem import (
    ConvergenceRecord,
    StudyConfig,
    TwoPointBVP,
    emit,
    fitted_rate,
    format_error,
    run_study,
)
from layerfem.problem import _PROBLEMS
from layerfem.study import interpolation_study


def small_config(**overrides):
    base = dict(
        families=("roos",),
        k_list=(1,),
        N_list=(8, 16),
        epsilons=(1e-6, 1e-8),
    )
    base.update(overrides)
    return StudyConfig(**base)


class TestConfig:
    def test_defaults_follow_degree(self):
        cfg = StudyConfig()
        assert cfg.sigma_for(3) == 4.0
        assert cfg.c1_for(3) == 5.0
        assert cfg.n_list_for(2)[-1] == 2048
        assert cfg.n_list_for(3)[-1] == 1024

    def test_explicit_values_win(self):
        cfg = StudyConfig(sigma=2.5, c1=1.5, N_list=(8,))
        assert cfg.sigma_for(4) == 2.5
        assert cfg.c1_for(4) == 1.5
        assert cfg.n_list_for(4) == (8,)

    def test_rejects_odd_n(self):
        with pytest.raises(ValueError, match="even"):
            StudyConfig(N_list=(7,))

    def test_rejects_large_degree(self):
        with pytest.raises(ValueError, match="1..10"):
            StudyConfig(k_list=(11,))

    def test_rejects_bad_epsilon(self):
        with pytest.raises(ValueError, match="epsilon"):
            StudyConfig(epsilons=(2.0,))

    def test_rejects_unknown_family(self):
        with pytest.raises(ValueError):
            StudyConfig(families=("shishkin",))


class TestRunStudy:
    def test_deterministic_csv(self):
        cfg = small_config()
        first = emit(run_study(cfg).records, "csv")
        second = emit(run_study(cfg).records, "csv")
        assert first == second

    def test_record_grid_complete(self):
        cfg = small_config()
        result = run_study(cfg)
        assert len(result.records) == 4
        keys = {(r.family, r.k, r.N, r.epsilon) for r in result.records}
        assert ("roos", 1, 8, 1e-6) in keys

    def test_aggregate_takes_max_over_epsilon(self):
        result = run_study(small_config())
        by_n = {row.N: row for row in result.aggregates}
        recs = [r for r in result.records if r.N == 8]
        assert by_n[8].e_uniform == max(r.e_energy for r in recs)

    def test_rates_attach_to_smaller_n(self):
        result = run_study(small_config())
        by_n = {row.N: row for row in result.aggregates}
        expected = math.log2(by_n[8].e_uniform / by_n[16].e_uniform)
        assert by_n[8].rate == pytest.approx(expected)
        assert by_n[16].rate is None

    def test_failed_run_recorded_not_raised(self):
        # theta = 1/2 - c1*eps < 0 makes the mesh spec invalid for this c1.
        cfg = small_config(families=("kopteva",), c1=6000.0, epsilons=(1e-4,), N_list=(8,))
        result = run_study(cfg)
        assert len(result.records) == 1
        rec = result.records[0]
        assert rec.error is not None
        assert math.isnan(rec.e_energy)
        assert math.isnan(result.aggregates[0].e_uniform)
        assert "ERR" in emit(result.records, "table")

    def test_epsilon_robustness_small_slice(self):
        cfg = small_config(N_list=(64,), epsilons=(1e-4, 1e-6, 1e-9))
        result = run_study(cfg)
        energies = [r.e_energy for r in result.records]
        assert max(energies) / min(energies) <= 1.5

    def test_rate_recovery_small_slice(self):
        cfg = small_config(k_list=(2,), N_list=(64, 128, 256))
        rows = run_study(cfg).aggregates
        errors = [row.e_uniform for row in sorted(rows, key=lambda r: r.N)]
        assert fitted_rate(errors, pairs=2) == pytest.approx(2.0, abs=0.1)

    def test_roundoff_level_problem_flags_rates(self, monkeypatch):
        # A problem whose solution lies in the discrete space solves to
        # round-off, so every rate is meaningless and rendered as a dash.
        eps_val = 0.5
        p = Polynomial([0.0, 1.0]) * Polynomial([1.0, -1.0])
        dp = p.deriv()
        f_poly = -eps_val * p.deriv(2) - Polynomial([3.0, -1.0]) * dp + p

        def poly_problem(epsilon):
            from layerfem.problem import ExactSolution

            arr = lambda x: np.asarray(x, dtype=float)
            return TwoPointBVP(
                epsilon=epsilon,
                b=lambda x: 3.0 - arr(x),
                c=lambda x: np.ones_like(arr(x)),
                f=lambda x: f_poly(arr(x)),
                b_prime=lambda x: -np.ones_like(arr(x)),
                exact=ExactSolution(
                    u=lambda x: p(arr(x)),
                    u_prime=lambda x: dp(arr(x)),
                    S=lambda x: p(arr(x)),
                    S_prime=lambda x: dp(arr(x)),
                    E=lambda x: np.zeros_like(arr(x)),
                    E_prime=lambda x: np.zeros_like(arr(x)),
                ),
            )

        monkeypatch.setitem(_PROBLEMS, "poly-test", poly_problem)
        cfg = small_config(
            k_list=(3,), N_list=(8, 16), epsilons=(eps_val,), problem="poly-test"
        )
        result = run_study(cfg)
        assert all(r.e_energy < 1e-12 for r in result.records)
        assert all(row.rate is None for row in result.aggregates)
        table = emit(result.records, "table")
        assert "—" in table


class TestEmit:
    def test_csv_single_record(self):
        rec = ConvergenceRecord("roos", 1, 2.0, 8, 1e-6, 0.1, 0.05, 0.11)
        text = emit([rec], "csv")
        lines = text.strip().split("\n")
        assert lines[0] == "family,k,sigma,N,epsilon,e_inf,e_l2,e_energy"
        assert len(lines) == 2
        assert lines[1] == "roos,1,2.0,8,1e-06,0.1,0.05,0.11"

    def test_csv_ordering(self):
        recs = [
            ConvergenceRecord("roos", 1, 2.0, 16, 1e-6, 1, 1, 1),
            ConvergenceRecord("roos", 1, 2.0, 8, 1e-6, 1, 1, 1),
            ConvergenceRecord("kopteva", 1, 2.0, 8, 1e-6, 1, 1, 1),
        ]
        lines = emit(recs, "csv").strip().split("\n")[1:]
        assert [line.split(",")[0] for line in lines] == ["kopteva", "roos", "roos"]

    def test_table_known_cells(self):
        recs = [
            ConvergenceRecord("roos", 1, 2.0, 128, 1e-8, 0.03, 0.02, 0.0208),
            ConvergenceRecord("roos", 1, 2.0, 256, 1e-8, 0.015, 0.01, 0.0104),
        ]
        table = emit(recs, "table")
        assert "0.208E-01" in table
        assert "1.00" in table
        assert "—" in table  # final rate placeholder

    def test_unknown_format(self):
        with pytest.raises(ValueError, match="format"):
            emit([ConvergenceRecord("roos", 1, 2.0, 8, 1e-6, 1, 1, 1)], "json")

    def test_empty_table_rejected(self):
        with pytest.raises(ValueError, match="records"):
            emit([], "table")


class TestFormatError:
    @staticmethod
    def _oracle(value):
        # Independent route: shift python's own scientific rendering
        # d.ddE(e) to 0.dddE(e+1).
        mant, _, exp = f"{value:.2E}".partition("E")
        digits = mant.replace(".", "")
        return f"0.{digits}E{int(exp) + 1:+03d}"

    @pytest.mark.parametrize(
        "value",
        [0.00642, 0.338, 0.103, 1.0, 0.09996, 0.0000251, 4.15e-11, 0.999, 123.4],
    )
    def test_against_string_oracle(self, value):
        assert format_error(value) == self._oracle(value)

    def test_zero_and_nan(self):
        assert format_error(0.0) == "0.000E+00"
        assert format_error(float("nan")) == "ERR"


class TestFittedRate:
    def test_exact_halving(self):
        assert fitted_rate([8.0, 4.0, 2.0, 1.0]) == pytest.approx(1.0)

    def test_uses_last_pairs(self):
        # First ratio is noise; the tail is clean fourth order.
        errors = [100.0, 16.0, 1.0, 1.0 / 16.0, 1.0 / 256.0]
        assert fitted_rate(errors, pairs=3) == pytest.approx(4.0)

    def test_needs_two_values(self):
        with pytest.raises(ValueError):
            fitted_rate([1.0])


class TestInterpolationStudy:
    def test_columns_positive_and_decreasing(self):
        rows = interpolation_study("roos", 1, (8, 16), epsilons=(1e-6,))
        assert len(rows) == 2
        assert rows[0].u_energy > rows[1].u_energy > 0.0
        assert rows[0].correction_energy > rows[1].correction_energy > 0.0

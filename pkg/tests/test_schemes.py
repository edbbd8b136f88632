import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stein_dmc.errors import RegimeMismatch, ScheduleViolation, ValidationError
from stein_dmc.prob_core import CostFunction, Dmc, JointPmf
from stein_dmc.schemes import (
    Mode,
    Regime,
    Schedule,
    ScheduleKind,
    Schedules,
    decide,
    encode,
    finite_k_feasibility,
    resolve_instance,
)

P = JointPmf([[0.4, 0.1], [0.1, 0.4]])
Q = JointPmf([[0.2, 0.3], [0.2, 0.3]])
COST = CostFunction([0.0, 1.0])
Z = Dmc.z_channel(0.7)
BSC = Dmc.bsc(0.2)


def exact_type_seq(n):
    return np.array([0] * (n // 2) + [1] * (n - n // 2))


class TestSchedules:
    def test_sqrt(self):
        assert Schedule().channel_uses(400) == 20
        assert Schedule(ScheduleKind.LOG_N, 2.0)(1024) == 20.0

    def test_table(self):
        s = Schedule(ScheduleKind.TABLE, table=((100, 5), (200, 7)))
        assert s(200) == 7.0
        with pytest.raises(ScheduleViolation):
            s(300)

    def test_check(self):
        Schedule().check([100, 500], integer=True)
        with pytest.raises(ScheduleViolation):
            Schedule(ScheduleKind.TABLE, table=((100, 3), (500, 3))).check([100, 500])
        with pytest.raises(ScheduleViolation):
            Schedule(ScheduleKind.TABLE, table=((100, 10), (500, 60))).check([100, 500])

    def test_round_trip(self):
        s = Schedule(ScheduleKind.TABLE, table=((100, 5), (200, 7)))
        assert Schedule.from_dict(s.as_dict()) == s


class TestResolve:
    def test_k_sqrt(self):
        inst = resolve_instance(Regime.SUBLINEAR_USES, 400, P, Q, Z, COST)
        assert inst.k == 20 and inst.mode is Mode.TRIPLE
        assert inst.triple == (1, 0, 1)

    def test_mu_n(self):
        inst = resolve_instance(Regime.EXPECTED_COST_H0, 400, P, Q, BSC, COST)
        assert inst.mu_n == pytest.approx((1 / (2 * math.sqrt(400))) ** 0.5, rel=1e-15)
        assert inst.x_hat == 1 and inst.mode is Mode.ZERO_WORD

    def test_local_fallback(self):
        for reg in (Regime.STRICT_COST, Regime.SUBLINEAR_USES):
            inst = resolve_instance(reg, 100, P, Q, BSC, COST)
            assert inst.local_fallback and inst.mode is Mode.LOCAL

    def test_strict_cost_slots(self):
        cost = CostFunction([0.0, 3.0, 2.0])
        ch = Dmc([[0.5, 0.5, 0.0], [0.2, 0.3, 0.5], [0.3, 0.3, 0.4]])
        inst = resolve_instance(Regime.STRICT_COST, 100, P, Q, ch, cost)
        assert inst.k_prime == 5  # ceil(10 / 2)
        assert inst.k == 3  # floor(10 / 3)

    def test_strict_cost_unaffordable(self):
        cost = CostFunction([0.0, 50.0])
        with pytest.raises(ScheduleViolation):
            resolve_instance(Regime.STRICT_COST, 100, P, Q, Z, cost)

    def test_bad_schedule(self):
        sch = Schedules(k=Schedule(ScheduleKind.TABLE, table=((100, 50), (500, 400))))
        with pytest.raises(ScheduleViolation):
            resolve_instance(Regime.SUBLINEAR_USES, 100, P, Q, Z, COST, sch, grid=[100, 500])

    def test_finite_k_escape(self):
        sch = Schedules(k=Schedule(ScheduleKind.TABLE, table=((100, 2), (500, 2))))
        inst = resolve_instance(Regime.SUBLINEAR_USES, 100, P, Q, Z, COST, sch, grid=[100, 500],
                                enforce_sublinear=False)
        assert inst.k == 2


class TestEncodeDecide:
    def test_typical_sends_x0(self):
        inst = resolve_instance(Regime.SUBLINEAR_USES, 100, P, Q, Z, COST)
        x = encode(inst, exact_type_seq(100))
        assert x.tolist() == [inst.triple.x0] * inst.k

    def test_atypical_sends_xhat(self):
        inst = resolve_instance(Regime.EXPECTED_COST_H0, 100, P, Q, BSC, COST)
        x = encode(inst, np.zeros(100, dtype=int))
        assert np.all(x == inst.x_hat) and x.size == 100

    def test_strict_cost_embedding(self):
        inst = resolve_instance(Regime.STRICT_COST, 100, P, Q, Z, COST)
        x = encode(inst, exact_type_seq(100))
        assert np.all(x[:inst.k] == inst.triple.x0) and np.all(x[inst.k:] == 0)
        assert COST.costs[x].sum() <= inst.C_n

    def test_decide_examples(self):
        inst = resolve_instance(Regime.SUBLINEAR_USES, 100, P, Q, Z, COST)
        v = exact_type_seq(100)
        y = np.zeros(inst.k, dtype=int)
        y[3] = inst.triple.y_star
        assert decide(inst, v, y) == 0
        assert decide(inst, v, np.zeros(inst.k, dtype=int)) == 1
        assert decide(inst, np.zeros(100, dtype=int), y) == 1

    def test_local_atypical(self):
        inst = resolve_instance(Regime.LOCAL_ONLY, 100, P, Q, BSC, COST, mu=0.01)
        assert decide(inst, np.ones(100, dtype=int)) == 1
        assert encode(inst, np.ones(100, dtype=int)).size == 0

    def test_length_checks(self):
        inst = resolve_instance(Regime.SUBLINEAR_USES, 100, P, Q, Z, COST)
        with pytest.raises(ValidationError):
            encode(inst, np.zeros(99, dtype=int))
        with pytest.raises(ValidationError):
            decide(inst, np.zeros(100, dtype=int), np.zeros(3, dtype=int))

    def test_regime_mismatch(self):
        inst = resolve_instance(Regime.SUBLINEAR_USES, 100, P, Q, Z, COST)
        broken = inst.__class__(**{**inst.__dict__, "triple": None})
        with pytest.raises(RegimeMismatch):
            encode(broken, exact_type_seq(100))

    @given(st.lists(st.integers(0, 3), min_size=60, max_size=60), st.integers(0, 2**32 - 1))
    def test_acceptance_certifies_typicality(self, cells, seed):
        inst = resolve_instance(Regime.SUBLINEAR_USES, 60, P, Q, Z, COST, mu=0.1)
        cells = np.array(cells)
        u, v = cells // 2, cells % 2
        x = encode(inst, u)
        rng = np.random.default_rng(seed)
        y = (rng.random(x.shape) < Z.transition[x, 1]).astype(int)
        if decide(inst, v, y) == 0:
            assert inst.u_boxes()[0].contains(np.bincount(u, minlength=2))

    def test_batched_matches_single(self, rng):
        inst = resolve_instance(Regime.EXPECTED_COST_BOTH, 50, P, Q, BSC, COST)
        u = rng.integers(0, 2, size=(20, 50))
        v = rng.integers(0, 2, size=(20, 50))
        xs = encode(inst, u)
        ys = rng.integers(0, 2, size=xs.shape)
        batch = decide(inst, v, ys)
        for i in range(20):
            assert np.array_equal(encode(inst, u[i]), xs[i])
            assert decide(inst, v[i], ys[i]) == batch[i]


class TestFeasibility:
    def test_examples(self):
        assert finite_k_feasibility(1.0, 1, 0.0)
        assert finite_k_feasibility(0.5, 3, 0.2)
        assert not finite_k_feasibility(0.5, 1, 0.2)

    def test_domain(self):
        with pytest.raises(ValidationError):
            finite_k_feasibility(0.0, 1, 0.1)
        with pytest.raises(ValidationError):
            finite_k_feasibility(0.5, 0, 0.1)
        with pytest.raises(ValidationError):
            finite_k_feasibility(0.5, 1, 1.0)

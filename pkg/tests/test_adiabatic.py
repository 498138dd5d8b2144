import numpy as np
import pytest

from holotrap.adiabatic import Schedule, adiabatic_scaling_study, evolve
from holotrap.errors import LeakageBudgetError, LoopError
from holotrap.fock import FockSpace
from holotrap.holonomy import Loop, gate_distance, transport
from holotrap.jcmodel import JCParams

P = JCParams(nu=1.0, g=1.0)
SMALL_LOOP = Loop.rectangle("C_I", 0.3, 0.4)
SPACE = FockSpace(80)


def test_schedule_validation():
    with pytest.raises(ValueError):
        Schedule(SMALL_LOOP, -1.0)
    with pytest.raises(ValueError):
        Schedule(SMALL_LOOP, 10.0, ramp="linear")
    with pytest.raises(LoopError):
        Schedule(Loop.rectangle("C_III", 0.3, 0.3), 10.0)
    assert Schedule(SMALL_LOOP, 100.0).n_steps(1.0) >= 1000


def test_static_loop_gives_identity():
    static = Loop(np.array([[0.0, 0.0], [0.0, 0.0]]), plane="C_I")
    res = evolve(Schedule(static, 30.0), P, FockSpace(40))
    assert gate_distance(res.overlap, np.eye(2)) < 1e-10
    assert res.leakage < 1e-12
    assert res.norm_drift < 1e-10


def test_evolve_requires_origin_based_loop():
    shifted = Loop(np.array([[0.1, 0.0], [0.4, 0.0], [0.4, 0.3],
                             [0.1, 0.3], [0.1, 0.0]]), plane="C_I")
    with pytest.raises(LoopError):
        evolve(Schedule(shifted, 50.0), P, SPACE)


def test_evolve_step_convergence_second_order():
    # midpoint stepping: halving dt cuts the change by ~4, and the
    # default step density leaves integration error well under the
    # physical diabatic distances
    r1 = evolve(Schedule(SMALL_LOOP, 60.0, steps=1200), P, SPACE)
    r2 = evolve(Schedule(SMALL_LOOP, 60.0, steps=2400), P, SPACE)
    r3 = evolve(Schedule(SMALL_LOOP, 60.0, steps=4800), P, SPACE)
    e12 = gate_distance(r1.overlap, r2.overlap)
    e23 = gate_distance(r2.overlap, r3.overlap)
    assert e12 < 1e-4
    assert e12 / e23 > 3.0


def test_evolve_unitary_stepping_preserves_norm():
    res = evolve(Schedule(SMALL_LOOP, 80.0), P, SPACE)
    assert res.norm_drift < 1e-8


def test_evolve_energy_stays_within_leakage_band():
    # |<H - E_deg>| is bounded by the transient escape times the highest
    # occupied dressed energy (a few gaps)
    res = evolve(Schedule(SMALL_LOOP, 100.0), P, SPACE)
    assert res.energy_drift <= 6.0 * P.nu * res.transient_leakage + 1e-12


def test_evolve_converges_to_transport():
    res = evolve(Schedule(SMALL_LOOP, 300.0), P, SPACE)
    assert res.distance_to_transport < 0.05
    assert res.leakage < 1e-4


def test_adiabatic_scaling():
    study = adiabatic_scaling_study(SMALL_LOOP, [50.0, 100.0, 200.0], P, SPACE)
    assert study.monotone
    assert study.slope <= -0.8
    # leakage at the longest time sits at or below the shorter-time values
    assert study.rows[-1][2] <= study.rows[0][2] + 1e-9


def test_smooth_ramp_suppresses_leakage():
    t = 80.0
    smooth = evolve(Schedule(SMALL_LOOP, t, ramp="smooth"), P, SPACE)
    uniform = evolve(Schedule(SMALL_LOOP, t, ramp="uniform"), P, SPACE)
    assert smooth.leakage < uniform.leakage


def test_leak_budget_enforced():
    tight = FockSpace(24)
    big = Loop.rectangle("C_I", 0.3, 0.9)
    with pytest.raises(LeakageBudgetError):
        evolve(Schedule(big, 40.0), P, tight, leak_budget=1e-8)


def test_scaling_study_requires_three_times():
    with pytest.raises(ValueError):
        adiabatic_scaling_study(SMALL_LOOP, [10.0, 20.0], P, SPACE)


def test_study_csv_round_trip(tmp_path):
    study = adiabatic_scaling_study(SMALL_LOOP, [40.0, 80.0, 160.0], P,
                                    FockSpace(60))
    path = tmp_path / "study.csv"
    study.to_csv(path)
    text = path.read_text()
    assert text.startswith("# units: hbar=1, nu=1")
    assert "total_time,steps,leakage,distance_to_transport" in text
    assert text.count("\n") >= 6

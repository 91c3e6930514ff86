import math

import numpy as np
import pytest

from sdfea.algorithms import (AlgorithmSpec, OptimizerState, SdFeaParams, compiled_available,
                              rls_step, run_optimizer, sd_fea_cap, sd_fea_step, sd_fea_thresholds,
                              sd_oea_step, sd_rls_r_step, resolve_R, SdOeaParams, SdRlsParams,
                              oea_step, fea_step, FeaParams)
from sdfea.core import RandomSource, derive_seed
from sdfea.fitness import CountingFitness, Jump, LeadingOnes, OneMax
from sdfea.sampling import phase_length

BACKENDS = ["python"] + (["compiled"] if compiled_available() else [])


def state_at(x, f):
    return OptimizerState(np.array(x, dtype=np.uint8), f.evaluate(np.array(x, dtype=np.uint8)))


# --- parameters -----------------------------------------------------------------

@pytest.mark.parametrize("kw", [dict(beta=1.0), dict(gamma=1.0), dict(gamma=-0.1), dict(R=1.0)])
def test_sd_fea_params_validated(kw):
    with pytest.raises(ValueError):
        SdFeaParams(**kw)


def test_resolve_R():
    assert resolve_R("n^2", 10) == 100.0
    assert resolve_R("n**3", 10) == 1000.0
    assert resolve_R(25, 10) == 25.0
    with pytest.raises(ValueError):
        resolve_R("2n", 10)


def test_algorithm_spec_validation():
    with pytest.raises(ValueError):
        AlgorithmSpec("ga")
    with pytest.raises(ValueError):
        AlgorithmSpec("rls", {"beta": 1.5})
    assert AlgorithmSpec("sd-fea", {"beta": 2}).display_label == "sd-fea(R=25.0,beta=2,gamma=0.25)"
    assert AlgorithmSpec("oea", label="x").display_label == "x"


def test_cap():
    assert sd_fea_cap(100) == 47
    assert sd_fea_cap(40) == 19
    assert sd_fea_cap(2) == 1


# --- single steps -----------------------------------------------------------------

def test_sd_fea_step_one_evaluation_and_reset_on_improvement():
    f = CountingFitness(OneMax(20))
    params = SdFeaParams()
    rng = RandomSource(3)
    st = state_at(np.zeros(20), f.f)
    st.r, st.u = 3, 5
    improved = False
    for _ in range(200):
        before, fx = f.count, st.fx
        sd_fea_step(st, f, params, rng)
        assert f.count == before + 1
        if st.fx > fx:
            assert st.r == 1 and st.u == 0
            improved = True
            break
    assert improved


def test_sd_fea_gamma0_phase_advances_after_threshold():
    n = 12
    f = CountingFitness(Jump(n, 3))
    params = SdFeaParams(gamma=0.0, R=25)
    x = np.ones(n, dtype=np.uint8)
    x[:3] = 0  # local optimum, only a 3-bit flip improves
    st = state_at(x, f.f)
    ell1 = phase_length(n, 1, 0.0, 25)
    rng = RandomSource(0)
    for _ in range(math.ceil(ell1) - 1):
        sd_fea_step(st, f, params, rng)
        assert st.r == 1
    sd_fea_step(st, f, params, rng)
    assert st.r == 2 and st.u == 0


def test_sd_fea_strength_stays_capped():
    n = 10
    cap = sd_fea_cap(n)
    f = CountingFitness(Jump(n, 10))
    params = SdFeaParams(gamma=0.0, R=1.01)
    st = state_at(np.zeros(n), f.f)  # |x| = 0 = n - k: needs all n bits
    st.r = cap
    ell = sd_fea_thresholds(n, 0.0, 1.01)[cap]
    rng = RandomSource(0)
    for _ in range(math.ceil(ell)):
        sd_fea_step(st, f, params, rng)
    assert st.r == cap and st.u == 0


def test_u_below_threshold_invariant():
    n = 30
    f = CountingFitness(Jump(n, 3))
    params = SdFeaParams()
    ell = sd_fea_thresholds(n, params.gamma, params.R)
    st = state_at(RandomSource(1).bits(n), f.f)
    rng = RandomSource(2)
    for _ in range(20000):
        assert st.u < ell[st.r]
        assert 1 <= st.r <= sd_fea_cap(n)
        sd_fea_step(st, f, params, rng)


def test_equal_fitness_acceptance_rules():
    # LeadingOnes plateau: with prefix 11 and bit 2 unset, flips among bits 3.. keep fitness 2
    f = CountingFitness(LeadingOnes(8))
    x = np.array([1, 1, 0, 0, 0, 0, 0, 0], dtype=np.uint8)
    rng = RandomSource(4)

    st = state_at(x, f.f)
    st.r = 2
    equal_seen = 0
    for _ in range(200):
        prev = st.x.copy()
        sd_fea_step(st, f, SdFeaParams(gamma=0.0, R=1e9), rng)
        if st.fx == 2:
            equal_seen += 1
            assert np.array_equal(st.x, prev)  # r > 1: equal offspring rejected
        else:
            break
    assert equal_seen > 0

    st = state_at(x, f.f)
    moves = 0
    for _ in range(200):
        prev = st.x.copy()
        rls_step(st, f, None, rng)
        if st.fx == 2 and not np.array_equal(st.x, prev):
            moves += 1
    assert moves > 0  # RLS accepts equal offspring


def test_comparator_steps_are_elitist():
    n = 25
    f = CountingFitness(Jump(n, 4, 2))
    rng = RandomSource(6)
    steps = [(rls_step, None), (oea_step, None), (fea_step, FeaParams()),
             (sd_oea_step, SdOeaParams(n * n)), (sd_rls_r_step, SdRlsParams(n * n)),
             (sd_fea_step, SdFeaParams())]
    for step, params in steps:
        st = state_at(RandomSource(9).bits(n), f.f)
        for _ in range(3000):
            before = st.fx
            c = f.count
            step(st, f, params, rng)
            assert st.fx >= before
            assert f.count == c + 1


# --- whole runs -------------------------------------------------------------------

@pytest.mark.parametrize("backend", BACKENDS)
def test_n1_onemax(backend):
    out = run_optimizer(AlgorithmSpec("sd-fea"), OneMax(1), 100, 0, backend=backend)
    assert out.success and out.evaluations <= 100


@pytest.mark.parametrize("backend", BACKENDS)
def test_budget_one_nonoptimal_start(backend):
    f = Jump(20, 3)
    out = run_optimizer(AlgorithmSpec("sd-fea"), f, 1, 0, x0=np.zeros(20), backend=backend)
    assert not out.success and out.evaluations == 1


@pytest.mark.parametrize("backend", BACKENDS)
def test_budget_exhaustion_reports_budget(backend):
    out = run_optimizer(AlgorithmSpec("rls"), Jump(30, 4), 5000, 1, backend=backend)
    assert not out.success and out.evaluations == 5000


def test_optimal_start_counts_one_evaluation():
    out = run_optimizer(AlgorithmSpec("oea"), OneMax(10), 100, 0, x0=np.ones(10))
    assert out.success and out.evaluations == 1


def test_rejects_bad_arguments():
    with pytest.raises(ValueError):
        run_optimizer(AlgorithmSpec("rls"), OneMax(5), 0)
    with pytest.raises(ValueError):
        run_optimizer(AlgorithmSpec("rls"), OneMax(5), 10, backend="gpu")
    with pytest.raises(ValueError):
        run_optimizer(AlgorithmSpec("rls"), OneMax(5), 10, x0=np.zeros(4))
    with pytest.raises(ValueError):
        run_optimizer(AlgorithmSpec("rls").build(6), OneMax(5), 10)


@pytest.mark.parametrize("backend", BACKENDS)
def test_determinism(backend):
    f = Jump(30, 3)
    a = run_optimizer(AlgorithmSpec("sd-fea"), f, 10 ** 6, 42, backend=backend)
    b = run_optimizer(AlgorithmSpec("sd-fea"), f, 10 ** 6, 42, backend=backend)
    assert (a.evaluations, a.success, a.final_fitness) == (b.evaluations, b.success, b.final_fitness)
    assert np.array_equal(a.trace.phase_iterations, b.trace.phase_iterations)


def test_sd_fea_onemax_n100_all_succeed():
    alg = AlgorithmSpec("sd-fea", {"beta": 1.5, "gamma": 0.25, "R": 25}).build(100)
    f = OneMax(100)
    for i in range(200):
        out = run_optimizer(alg, f, 10 ** 6, derive_seed(0, "onemax100", i))
        assert out.success


def test_rls_onemax_coupon_collector():
    n, runs = 100, 200
    alg = AlgorithmSpec("rls").build(n)
    f = OneMax(n)
    means = np.mean([run_optimizer(alg, f, 10 ** 7, derive_seed(1, i)).evaluations for i in range(runs)])
    harmonic = sum(1 / i for i in range(1, n + 1))
    assert 0.85 * n * math.log(n) <= means <= 1.3 * n * math.log(n)
    # the coupon-collector value from a random start is about n * H_{n/2}
    assert abs(means - n * (harmonic - math.log(2))) < 0.15 * n * math.log(n)


def test_sd_rls_r_never_flips_beyond_radius():
    n = 50
    f = Jump(n, 4)
    alg = AlgorithmSpec("sd-rls-r", {"R": "n^2"}).build(n)
    for i in range(5):
        out = run_optimizer(alg, f, 10 ** 7, i)
        assert out.success
        assert out.trace.flips_above_radius == 0


def test_gamma0_leaves_gap_at_its_size():
    # with no deviations, leaving the local optimum of Jump_2 happens at strength 2
    # unless phase 2 was missed (probability about 1/R); such a run never escapes,
    # since no other flip count can gain exactly two ones
    n, R, reps = 30, 25.0, 400
    f = Jump(n, 2)
    x = np.ones(n, dtype=np.uint8)
    x[:2] = 0
    alg = AlgorithmSpec("sd-fea", {"gamma": 0.0, "R": R}).build(n)
    at_gap = 0
    for i in range(reps):
        out = run_optimizer(alg, f, 10 ** 5, derive_seed(3, i), x0=x, stop_on_improvement=True)
        at_gap += out.success and out.trace.improvement_radius == 2
    # binomial tolerance: 3 standard deviations below the (1 - 1/R) guarantee
    p = 1 - 1 / R
    assert at_gap / reps >= p - 3 * math.sqrt(p * (1 - p) / reps)


def test_elitism_along_a_python_run():
    n = 20
    f = CountingFitness(Jump(n, 4, 2))
    st = state_at(RandomSource(1).bits(n), f.f)
    rng = RandomSource(2)
    alg = AlgorithmSpec("fea").build(n)
    best = st.fx
    for _ in range(5000):
        alg.step(st, f, alg.params, rng)
        assert st.fx >= best
        best = st.fx

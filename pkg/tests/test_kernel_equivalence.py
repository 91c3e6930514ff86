"""The compiled run loop must reproduce the Python steps draw for draw."""
import numpy as np
import pytest

from sdfea.algorithms import AlgorithmSpec, compiled_available, run_optimizer
from sdfea.fitness import Jump, LeadingOnes, OneMax

pytestmark = pytest.mark.skipif(not compiled_available(), reason="extension not built")

FUNCTIONS = [OneMax(12), LeadingOnes(12), Jump(12, 4, 2), Jump(10, 3, 3), Jump(40, 2)]
ALGORITHMS = [
    AlgorithmSpec("sd-fea"),
    AlgorithmSpec("sd-fea", {"gamma": 0.0}),
    AlgorithmSpec("sd-fea", {"beta": 2.0, "gamma": 0.5, "R": 3}),
    AlgorithmSpec("rls"),
    AlgorithmSpec("oea"),
    AlgorithmSpec("fea"),
    AlgorithmSpec("fea", {"beta": 1.25, "cap": 3}),
    AlgorithmSpec("sd-oea"),
    AlgorithmSpec("sd-rls-r"),
]


def outcome_key(o):
    t = o.trace
    return (o.evaluations, o.success, o.final_fitness, t.flips_above_radius, t.improvement_radius,
            t.improvements, t.last_improvement_at, t.previous_improvement_at,
            tuple(t.phase_iterations), tuple(o.final_point))


@pytest.mark.parametrize("f", FUNCTIONS, ids=repr)
@pytest.mark.parametrize("alg", ALGORITHMS, ids=lambda a: a.display_label)
def test_backends_identical(f, alg):
    for seed in range(8):
        a = run_optimizer(alg, f, 20000, seed, backend="compiled")
        b = run_optimizer(alg, f, 20000, seed, backend="python")
        assert outcome_key(a) == outcome_key(b)


@pytest.mark.parametrize("alg", ALGORITHMS[:2] + ALGORITHMS[-1:], ids=lambda a: a.display_label)
def test_backends_identical_stop_on_improvement(alg):
    f = Jump(16, 3)
    x = np.ones(16, dtype=np.uint8)
    x[:3] = 0
    for seed in range(5):
        a = run_optimizer(alg, f, 10 ** 5, seed, x0=x, stop_on_improvement=True, backend="compiled")
        b = run_optimizer(alg, f, 10 ** 5, seed, x0=x, stop_on_improvement=True, backend="python")
        assert outcome_key(a) == outcome_key(b)


def test_user_subclass_falls_back_to_python():
    class Shifted(OneMax):
        def evaluate(self, x):
            return super().evaluate(x) + 1

        @property
        def optimum_value(self):
            return float(self.n + 1)

    out = run_optimizer(AlgorithmSpec("rls"), Shifted(8), 10 ** 4, 0)
    assert out.success and out.final_fitness == 9.0
    with pytest.raises(RuntimeError):
        run_optimizer(AlgorithmSpec("rls"), Shifted(8), 10 ** 4, 0, backend="compiled")

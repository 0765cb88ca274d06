import math

import numpy as np
import pytest

from legpinch import tensor_core
from legpinch.immersion import Immersion


def calabi_sigma(n: int) -> tensor_core.SymCubic:
    """Closed-form cubic tensor of the product torus: s_111 = (n-1)/sqrt(n),
    s_1jj = -1/sqrt(n)."""
    entries = {(1, 1, 1): (n - 1) / math.sqrt(n)}
    for j in range(2, n + 1):
        entries[(1, j, j)] = -1.0 / math.sqrt(n)
    return tensor_core.sym3_from_entries(n, entries)


def distorted_calabi3(base: Immersion) -> Immersion:
    """Same torus, smoothly reparametrized chart.

    On the standard polar chart the discrete covariant derivative of the FD
    cubic-form field vanishes to rounding at every step size, so convergence
    order cannot be measured there; the reparametrization breaks that exact
    cancellation without changing the submanifold.
    """

    def evaluate(u):
        v = u.copy()
        v[0] = u[0] + 0.4 * math.sin(0.5 * u[0])
        v[1] = u[1] + 0.3 * math.sin(u[1])
        return base.evaluate(v)

    return Immersion(
        name="calabi3_reparam",
        n=3,
        ambient_n=3,
        evaluate=evaluate,
        domain_lo=base.domain_lo,
        domain_hi=base.domain_hi,
        periodic=np.array([False, False, True]),
        margin=base.margin,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240809)

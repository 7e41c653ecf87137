"""Central finite-difference verification of analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import UsageError
from .tensor import Tensor

MAX_CHECK_PARAMS = 10_000


@dataclass
class GradCheckReport:
    """Per-parameter relative errors and the pass/fail verdict."""

    tolerance: float
    max_rel_error: float = 0.0
    worst_param: str = ""
    checked: int = 0
    skipped_kinks: int = 0
    per_param: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance


def finite_difference_check(
    params: dict[str, Tensor],
    loss_fn: Callable[[], tuple[float, np.ndarray]],
    grad_fn: Callable[[], dict[str, np.ndarray]],
    h: float = 1e-5,
    tolerance: float = 1e-4,
) -> GradCheckReport:
    """Compare analytic gradients against central differences.

    ``loss_fn`` evaluates the scalar loss at the current parameters and
    returns ``(loss, activation_signature)`` where the signature is a bool
    array of ReLU masks (or empty).  ``grad_fn`` runs the analytic backward
    pass and returns a grad array per parameter name.  Perturbations that
    flip any ReLU mask sit on a kink, where a central difference is invalid;
    those sites are skipped and counted.
    """
    total = sum(p.size for p in params.values())
    if total > MAX_CHECK_PARAMS:
        raise UsageError(
            f"model has {total} parameters; finite differences support at most "
            f"{MAX_CHECK_PARAMS}")

    analytic = grad_fn()
    report = GradCheckReport(tolerance=tolerance)
    for name, p in params.items():
        flat = p.data.reshape(-1)
        a_flat = analytic[name].reshape(-1)
        worst = 0.0
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up, sig_up = loss_fn()
            flat[i] = orig - h
            down, sig_down = loss_fn()
            flat[i] = orig
            if sig_up.shape != sig_down.shape or not np.array_equal(sig_up, sig_down):
                report.skipped_kinks += 1
                continue
            numeric = (up - down) / (2.0 * h)
            err = abs(a_flat[i] - numeric) / max(abs(a_flat[i]), abs(numeric), 1e-8)
            report.checked += 1
            if err > worst:
                worst = err
            if err > report.max_rel_error:
                report.max_rel_error = err
                report.worst_param = f"{name}[{i}]"
        report.per_param[name] = worst
    return report

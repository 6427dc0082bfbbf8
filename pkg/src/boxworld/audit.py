"""Package the extended-box construction as a box and check what breaks.

Alice's input x selects whether she pre-rotates her register (x = 0:
angle 0, x = 1: angle theta); Bob's input y selects his measurement
basis (y = 0: computational Z, y = 1: the |+>/|-> X basis, which is the
optimal detector for the marginal shift). Alice reads her own register
out in Z, the unique choice that reproduces the plain box statistics at
theta = 0. The resulting table is a perfectly well-formed conditional
probability box, nonnegative and normalized, yet its Bob marginal moves
with x: a dynamics that keeps probabilities valid while breaking the
marginal-independence requirement.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .boxes import DEFAULT_TOL, ConditionalBox, check_no_signaling
from .hybrid import HybridState, pr_extend
from .quantum import (
    Unitary,
    apply,
    basis_ket,
    identity,
    measure_probs,
    minus_ket,
    plus_ket,
    rotation,
    tensor,
)

__all__ = [
    "POSITIVITY_ATOL",
    "NORMALIZATION_ATOL",
    "AuditReport",
    "effective_box",
    "audit_dynamics",
]

POSITIVITY_ATOL = 1e-12
NORMALIZATION_ATOL = 1e-12


@dataclass(frozen=True)
class AuditReport:
    """Validity and signaling figures for the boxed-up construction at one angle."""

    theta: float
    positivity_ok: bool
    normalization_ok: bool
    a_to_b_violation: float
    b_to_a_violation: float
    worst_setting: tuple[str, int, tuple[int, int]]

    @property
    def valid_but_signaling(self) -> bool:
        return self.positivity_ok and self.normalization_ok and self.a_to_b_violation > 0.0


def effective_box(
    theta: float, unitary_family: Callable[[float], Unitary] = rotation
) -> ConditionalBox:
    """The construction as a 2-input/2-output box; entries from joint measurement.

    ``unitary_family`` maps an angle to the local unitary Alice applies;
    the default is the plane rotation. Swapping in another one-parameter
    family is an exploration hook, audited on the same footing.
    """
    joint = {}
    for x in (0, 1):
        u = tensor(unitary_family(theta if x else 0.0), identity(2))
        inp = apply(u, basis_ket("01"))
        joint[x] = pr_extend(HybridState.from_ket(inp)).to_density()
    z_basis = (basis_ket("0"), basis_ket("1"))
    x_basis = (plus_ket(), minus_ket())
    bob_bases = {0: z_basis, 1: x_basis}
    table = np.zeros((2, 2, 2, 2))
    for x in (0, 1):
        for y in (0, 1):
            full_basis = [tensor(ka, kb) for ka in z_basis for kb in bob_bases[y]]
            probs = measure_probs(joint[x], full_basis)
            for a in (0, 1):
                for b in (0, 1):
                    table[a, b, x, y] = probs[2 * a + b]
    return ConditionalBox(table)


def audit_dynamics(
    theta: float,
    tol: float = DEFAULT_TOL,
    unitary_family: Callable[[float], Unitary] = rotation,
) -> AuditReport:
    """Build the effective box and report positivity, normalization, signaling.

    For any theta with cs != 0 the expected outcome is: positivity and
    normalization hold to 1e-12, the Alice-to-Bob violation equals
    sin(2 theta)/4 (achieved at Bob's y = 1 setting), and the reverse
    direction stays at zero.
    """
    box = effective_box(theta, unitary_family=unitary_family)
    positivity_ok = bool(box.table.min() >= -POSITIVITY_ATOL)
    sums = box.table.sum(axis=(0, 1))
    normalization_ok = bool(np.max(np.abs(sums - 1.0)) <= NORMALIZATION_ATOL)
    report = check_no_signaling(box, tol=tol)
    return AuditReport(
        theta=theta,
        positivity_ok=positivity_ok,
        normalization_ok=normalization_ok,
        a_to_b_violation=report.a_to_b_violation,
        b_to_a_violation=report.b_to_a_violation,
        worst_setting=report.worst_settings,
    )

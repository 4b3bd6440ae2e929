#!/usr/bin/env python3
"""Mesh-refinement study of the torsional FE model.

Prints the first natural frequency against element count and the full
modal table for the 2-DOF and 10-DOF reference discretizations.
"""

from drillstab.fem import assemble, modal_properties
from drillstab.reference import REFERENCE_GEOMETRY
from drillstab.stability import RAD_S_TO_RPM


def main() -> None:
    print("first torsional mode vs refinement (uniform split per section)")
    for half in (1, 2, 4, 8, 16):
        model = assemble(REFERENCE_GEOMETRY, n_dp=half, n_bha=half)
        w1 = modal_properties(model)[0][0]
        print(f"  n_el={2 * half:>3d}: omega1 = {w1:.6f} rad/s")

    for n_dp, n_bha, alpha, beta in ((1, 1, 0.5, 0.006), (8, 2, 0.5, 0.006),
                                     (8, 2, 0.5, 0.0021)):
        model = assemble(REFERENCE_GEOMETRY, n_dp=n_dp, n_bha=n_bha,
                         alpha=alpha, beta=beta)
        print(f"\n{model.n_el}-DOF model (alpha={alpha}, beta={beta}):")
        print(f"  {'mode':<5} {'omega [rad/s]':<14} {'omega [RPM]':<12} xi")
        for i, (w, xi) in enumerate(modal_properties(model), start=1):
            print(f"  {i:<5d} {w:<14.4f} {w * RAD_S_TO_RPM:<12.3f} {xi:.4f}")


if __name__ == "__main__":
    main()

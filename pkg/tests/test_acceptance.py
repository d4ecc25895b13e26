"""Acceptance criteria 1-13.

Each criterion runs its suite once (cached per session) and compares the
reported metrics against the bounds frozen below, independently of the
status computed by the suite itself. One PASS/FAIL line per criterion is
printed at the end of the pytest run; running this file as a script prints
the same lines.
"""

import math

import pytest

from lcqft.suites import DEFAULTS, run_suite

SEED = 0

# (criterion, suite, {check name: frozen bound}) ; a bound of 0 means "no violations"
CRITERIA = [
    (1, "clifford", {
        "clifford_relations": 1e-13,
        "gamma5_squared": 1e-13,
        "gamma5_squared_algebra": 1e-13,
        "trace_identities": 1e-13,
        "intertwiner_recovers_conjugator": 1e-10,
        "intertwiner_time_s": 1.0,
    }),
    (2, "clifford", {"adjoint_conjugation_relations": 1e-12}),
    (2, "spin", {"spin_preserves_A": 1e-10}),
    (3, "spin", {
        "covering_homomorphism": 1e-10,
        "covering_kernel_pm_identity": 1e-10,
        "covering_identity_fibre": 1e-10,
        "dlambda_inverse_roundtrip": 1e-10,
        "lift_roundtrip_spin": 1e-8,
        "lift_roundtrip_lorentz": 1e-8,
    }),
    (4, "geometry", {
        "minkowski_connection_zero": 1e-9,
        "frw_christoffel": 1e-7,
        "covariant_gamma": 1e-6,
        "frame_connection_antisymmetry": 1e-8,
    }),
    (5, "semt-var", {"variation_closed_form_vs_fd": None, "onshell_two_term_reduction": 1e-4}),
    (6, "ccr", {
        "quasifree_equals_bruteforce": 0,
        "pairing_count_double_factorial": 0,
        "quasifree_cumulants_vanish": 0,
        "moment_cumulant_roundtrip": 1e-12,
    }),
    (7, "ccr", {"weyl_braiding_phase": 1e-13, "oscillator_two_point": 1e-6}),
    (8, "car", {
        "car_anticommutators": 1e-13,
        "alpha_C_squared_is_parity": 1e-13,
        "psi_norm": 1e-12,
        "spacelike_even_commutator": 1e-12,
    }),
    (9, "minkowski", {
        "positivity": 1e-10,
        "half_space_annihilation": 0,
        "commutator_identity": 1e-8,
        "cauchy_riemann_second_order": 0.2,
    }),
    (10, "lattice-kg", {
        "green_inverse": 1e-12,
        "cone_support": 0,
        "cauchy_slice_independence": 1e-10,
        "timeslice_residual": 1e-10,
        "timeslice_support_in_slab": 0,
    }),
    (11, "cones", {
        "gamma_convex_cone": 0,
        "gamma_no_opposite": 0,
        "gamma_product_closure": 0,
        "hadamard_in_gamma2": 0,
    }),
    (12, "wf-scan", {
        "delta_all_singular": 0,
        "gaussian_all_regular": 0,
        "step_singular_in_time_directions": 0,
        "pullback_covariance": 0,
    }),
    (13, "deform", {
        "standard_scenario_certified": 0,
        "halvings": 12,
        "certification_monotone": 0,
    }),
]

# sample sizes the criteria require; a smaller default would make a pass meaningless
SAMPLE_SIZES = {
    ("clifford", "trials"): 50,
    ("clifford", "conjugated_reps"): 20,
    ("spin", "samples"): 1000,
    ("ccr", "max_n"): 8,
    ("ccr", "cumulant_n"): 6,
    ("ccr", "N"): 64,
    ("minkowski", "gaussians"): 100,
    ("cones", "samples"): 10_000,
    ("cones", "product_samples"): 1000,
    ("cones", "hadamard_samples"): 1000,
    ("semt-var", "bumps"): 3,
}

_reports: dict = {}
RESULTS: dict[int, tuple[bool, str]] = {}


def report(suite):
    if suite not in _reports:
        _reports[suite] = run_suite(suite, seed=SEED)
    return _reports[suite]


def evaluate(criterion: int) -> tuple[bool, str]:
    problems = []
    for crit, suite, bounds in CRITERIA:
        if crit != criterion:
            continue
        checks = {c.name: c for c in report(suite).checks}
        for name, bound in bounds.items():
            c = checks.get(name)
            if c is None:
                problems.append(f"{suite}.{name} missing")
                continue
            # None: the bound depends on the data (stencil estimate) and is carried by the report
            limit = c.tolerance if bound is None else bound
            if bound is None and c.status != "pass":
                problems.append(f"{suite}.{name}={c.metric:.3g} (status {c.status})")
            elif not (math.isfinite(c.metric) and abs(c.metric) <= limit):
                problems.append(f"{suite}.{name}={c.metric:.3g} > {limit:g}")
    for (suite, key), n in SAMPLE_SIZES.items():
        if any(crit == criterion and s == suite for crit, s, _ in CRITERIA) and DEFAULTS[suite][key] < n:
            problems.append(f"{suite}.{key}={DEFAULTS[suite][key]} below {n}")
    ok = not problems
    RESULTS[criterion] = (ok, "; ".join(problems))
    return ok, "; ".join(problems)


def summary_lines() -> list[str]:
    lines = []
    for k in sorted(RESULTS):
        ok, why = RESULTS[k]
        lines.append(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}" + ("" if ok else f"  ({why})"))
    return lines


@pytest.mark.parametrize("criterion", range(1, 14))
def test_criterion(criterion):
    ok, why = evaluate(criterion)
    print(f"criterion {criterion:2d}: {'PASS' if ok else 'FAIL'}")
    assert ok, why


if __name__ == "__main__":
    for k in range(1, 14):
        evaluate(k)
    print("\n".join(summary_lines()))

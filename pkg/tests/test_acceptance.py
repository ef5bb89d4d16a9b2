"""Acceptance gate: one test per headline criterion.

Every criterion maps to named entries of the verification report; the
fixture times each check so the runtime budgets are enforced alongside
the numerical outcome. Test names double as the pass/fail lines of the
acceptance run.
"""

import time

import pytest

from gapbumps.verify import VerificationSession, run_verification

BUDGETS_S = {
    1: 10.0,
    2: 10.0,
    3: 20.0,
    4: 30.0,
    5: 60.0,
    6: 60.0,
    7: 60.0,
    8: 180.0,
    9: 30.0,
    10: 300.0,
    11: 300.0,
}


@pytest.fixture(scope="module")
def report():
    """Entries by name plus the wall time of each check group."""
    session = VerificationSession(seed=0)
    entries = {}
    durations = {}
    for check in (
        session.check_spectral_gap,
        session.check_band_consistency,
        session.check_norm_equivalence,
        session.check_calculus,
        session.check_nontrivial_solution,
        session.check_linking,
        session.check_reduction_identities,
        session.check_superposition_limit,
        session.check_interaction_decay,
        session.check_multibump,
        session.check_multiplicity,
    ):
        t0 = time.monotonic()
        got = check()
        dt = time.monotonic() - t0
        for entry in got:
            entries[entry.name] = entry
            durations[entry.name] = dt
    return entries, durations


def _criterion(report, number, names):
    entries, durations = report
    picked = [entries[n] for n in names]
    ok = all(e.passed for e in picked)
    spent = sum(durations[n] for n in names)
    label = "PASS" if ok else "FAIL"
    print(f"criterion {number:2d}: {label}  ({', '.join(names)}; {spent:.1f}s)")
    for e in picked:
        assert e.passed, f"{e.name}: measured {e.measured}, tolerance {e.tolerance}"
    assert spent < BUDGETS_S[number], f"criterion {number} took {spent:.1f}s"


def test_criterion_01_spectral_gap(report):
    _criterion(report, 1, ["spectral_gap"])


def test_criterion_02_band_consistency(report):
    _criterion(report, 2, ["band_consistency", "band_edges_regression"])


def test_criterion_03_norm_equivalence(report):
    _criterion(report, 3, ["norm_equivalence"])


def test_criterion_04_calculus_checks(report):
    _criterion(report, 4, ["calculus_fd"])


def test_criterion_05_nontrivial_solution(report):
    _criterion(report, 5, ["nontrivial_solution"])


def test_criterion_06_linking_sandwich(report):
    _criterion(report, 6, ["linking_sandwich", "sphere_level_stability"])


def test_criterion_07_reduction_identities(report):
    _criterion(
        report, 7, ["reduction_at_base", "degenerate_kernel", "reduced_gradient_fd"]
    )


def test_criterion_08_superposition_limit(report):
    _criterion(report, 8, ["superposition_limit"])


def test_criterion_09_interaction_decay(report):
    _criterion(report, 9, ["interaction_decay"])


def test_criterion_10_multibump_theorem(report):
    _criterion(
        report, 10, ["multibump_identity", "multibump_witnesses", "multibump_decay"]
    )


def test_criterion_11_multiplicity_witness(report):
    _criterion(report, 11, ["multiplicity_witness"])


def test_criterion_12_determinism():
    fresh = run_verification(seed=0, determinism=True)
    entry = {e.name: e for e in fresh.entries}["determinism"]
    label = "PASS" if entry.passed else "FAIL"
    print(f"criterion 12: {label}  (determinism)")
    assert entry.passed
    assert fresh.passed, [e.name for e in fresh.entries if not e.passed]


def test_every_report_entry_passes(report):
    entries, _ = report
    failing = [n for n, e in entries.items() if not e.passed]
    assert not failing, failing

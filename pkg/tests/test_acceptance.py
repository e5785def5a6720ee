"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
summary. The heavy spin-cluster runs use the split propagator and finish in
a few minutes total.
"""

import numpy as np
import pytest

import spinphoto as sp
from spinphoto.engine import Workspace, kron_power_apply, rotation_2x2, unitarity_defect
from spinphoto.experiments import (
    DEFAULT_PHASE_CYCLE,
    GATING_PHASE_CYCLE,
    GATING_RECEIVER_WEIGHTS,
    cycled_fid,
    photograph_rows,
    _detect,
    _process,
)

# Desk-scale retrieval preset (mirrors the CLI "desk-4x4" preset).
DESK = dict(
    seed=1,
    spacing=40.0,
    amp1=1.2,
    dur1=1.0,
    steps1=4096,
    amp2=9.0,
    dur2=0.1,
    steps2=2048,
    dead_time=0.05,
)
DESK_IMAGE = sp.BitImage(4, 4, [[1, 0, 1, 0], [0, 1, 1, 0], [1, 1, 0, 1], [0, 0, 1, 0]])
SWEEP_SEEDS = (1, 2, 3)


def report(criterion: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")
    assert ok, f"{criterion}: {detail}"


def make_sys(seed: int) -> sp.SpinSystem:
    return sp.SpinSystem(8, sp.random_couplings(8, 792.0, seed=seed))


@pytest.fixture(scope="module")
def acq():
    return sp.Acquisition(t_acq=0.5, dwell=1.0 / 8192, lb=12.0, zero_fill=8192)


@pytest.fixture(scope="module")
def desk_acq():
    return sp.Acquisition(
        t_acq=0.5, dwell=1.0 / 8192, lb=12.0, zero_fill=8192, dead_time=DESK["dead_time"]
    )


def desk_config(desk_acq) -> sp.PhotographyConfig:
    return sp.PhotographyConfig(
        spacing=DESK["spacing"],
        amp1=DESK["amp1"],
        dur1=DESK["dur1"],
        steps1=DESK["steps1"],
        amp2=DESK["amp2"],
        dur2=DESK["dur2"],
        steps2=DESK["steps2"],
        acquisition=desk_acq,
    )


class TestCriterion1LockSweep:
    def test_sign_flip_and_amplification(self, acq):
        flips, amplified = [], []
        for seed in SWEEP_SEEDS:
            res = sp.lock_duration_sweep(
                make_sys(seed), f1=0.0, amp1=1.0, dur1=1.0, steps1=51200,
                amp2=4.0, dur2_max=0.20, dur2_points=21, steps2=40960,
                acq=acq, mode="split",
            )
            a = res.amplitudes
            assert len(a) == 21
            flips.append(bool(np.min(a) < 0.0 < np.max(a)))
            amplified.append(bool(np.max(np.abs(a[1:])) > abs(a[0])))
        ok = all(flips) and sum(amplified) >= 2
        report(
            "criterion 1 (lock-duration sweep: sign flip + amplification)",
            ok,
            f"seeds {SWEEP_SEEDS}: flips={flips}, amplified={amplified}",
        )


class TestCriterion2PhaseOpposition:
    def test_weak_peak_sign_opposite_to_hard_pulse(self, acq):
        sys8 = make_sys(1)
        hard = sp.synthesize(sp.HarmonicSet([0.0], [50000.0], [0.0]), 5e-6, 1)
        spec_hard = sp.run_single_pulse(
            sp.ExperimentPlan(sys=sys8, acquisition=acq, pulse1=hard, mode="exact")
        )
        weak = sp.synthesize(sp.HarmonicSet([0.0], [2.1], [0.0]), 1.0, 51200)
        spec_weak = sp.run_single_pulse(
            sp.ExperimentPlan(sys=sys8, acquisition=acq, pulse1=weak, mode="split")
        )
        h, w = spec_hard.real_at(0.0), spec_weak.real_at(0.0)
        ok = (h > 0) and (w < 0)
        report(
            "criterion 2 (weak-pulse phase opposition)",
            ok,
            f"hard-pulse real {h:.3e}, weak-pulse real {w:.3e}",
        )


class TestCriterion5NumericalContracts:
    def test_unitarity_random_steps(self):
        sys8 = make_sys(1)
        ws = Workspace.for_system(sys8)
        rng = np.random.default_rng(2024)
        dt = 19.53e-6
        half = ws.free_propagator(0.5 * dt)
        eye = np.eye(sys8.dim)
        worst = 0.0
        for _ in range(10_000):
            bx, by = rng.uniform(-20.0, 20.0, size=2)
            u = half @ kron_power_apply(rotation_2x2(bx, by, dt), half)
            worst = max(worst, float(np.abs(u.conj().T @ u - eye).max()))
            if worst >= 1e-10:
                break
        ok = worst < 1e-10
        report(
            "criterion 5a (unitarity over 1e4 random steps)",
            ok,
            f"max defect {worst:.3e}",
        )

    def test_state_health_over_full_pulse(self):
        sys8 = make_sys(1)
        pulse = sp.synthesize(sp.HarmonicSet([0.0], [1.0], [0.0]), 1.0, 51200)
        rho0 = sp.thermal_state(sys8)
        rho = sp.evolve(rho0, sys8, pulse, "split")
        trace_drift = abs(rho.trace() - rho0.trace())
        herm = rho.hermiticity_defect()
        ok = trace_drift < 1e-9 and herm < 1e-9
        report(
            "criterion 5b (trace/hermiticity drift over a full pulse)",
            ok,
            f"trace drift {trace_drift:.3e}, hermiticity defect {herm:.3e}",
        )

    def test_split_vs_exact_and_quadratic_convergence(self, acq):
        sys8 = make_sys(1)
        errors = []
        dts = []
        for k in range(4):
            steps1 = 51200 * 2**k
            steps2 = 2048 * 2**k
            dts.append(1.0 / steps1)
            fids = {}
            for mode in ("exact", "split"):
                rho = sp.thermal_state(sys8)
                pulse1 = sp.synthesize(sp.HarmonicSet([0.0], [1.0], [0.0]), 1.0, steps1)
                rho = sp.evolve(rho, sys8, pulse1, mode)
                pulse2 = sp.rotate_phase(
                    sp.synthesize(sp.HarmonicSet([0.0], [4.0], [0.0]), 0.05, steps2),
                    np.pi / 2.0,
                )
                rho = sp.evolve(rho, sys8, pulse2, mode)
                fids[mode] = sp.acquire(rho, sys8, 0.5, acq.dwell).samples
            err = np.linalg.norm(fids["split"] - fids["exact"]) / np.linalg.norm(
                fids["exact"]
            )
            errors.append(float(err))
        ratios = [errors[k] / errors[k + 1] for k in range(3)]
        ok = errors[0] < 1e-5 and all(2.5 <= r <= 6.0 for r in ratios)
        report(
            "criterion 5c (split-vs-exact FID error, ~4x per dt halving)",
            ok,
            f"errors {['%.2e' % e for e in errors]}, ratios {['%.2f' % r for r in ratios]}",
        )


class TestCriterion6Composability:
    def test_block_diagonal_signal_adds(self, acq):
        d1, d2 = 137.0, -251.0
        couplings = np.zeros((4, 4))
        couplings[0, 1] = couplings[1, 0] = d1
        couplings[2, 3] = couplings[3, 2] = d2
        joint = sp.SpinSystem(4, couplings)
        part_a = sp.SpinSystem(2, [[0.0, d1], [d1, 0.0]])
        part_b = sp.SpinSystem(2, [[0.0, d2], [d2, 0.0]])
        pulse = sp.synthesize(
            sp.HarmonicSet([-40.0, 25.0], [2.0, 1.5], [0.0, 0.4]), 0.3, 2048
        )

        def fid_of(sys):
            rho = sp.evolve(sp.thermal_state(sys), sys, pulse, "exact")
            return sp.acquire(rho, sys, 0.25, acq.dwell).samples

        joint_fid = fid_of(joint)
        sum_fid = fid_of(part_a) + fid_of(part_b)
        err = np.linalg.norm(joint_fid - sum_fid) / np.linalg.norm(sum_fid)
        ok = err < 1e-8
        report(
            "criterion 6 (non-interacting clusters: signals add)",
            ok,
            f"relative L2 difference {err:.3e}",
        )


class TestCriterion7PhaseCycleCancellation:
    def test_zero_pulse1_cancels(self, desk_acq):
        sys8 = make_sys(DESK["seed"])
        f_start = sp.centered_start(16, DESK["spacing"])
        # full-protocol scale: one readout row of the desk image
        hs1 = sp.bits_to_harmonics(DESK_IMAGE, f_start, DESK["spacing"], DESK["amp1"])
        pulse1 = sp.synthesize(hs1, DESK["dur1"], DESK["steps1"])
        rho1 = sp.evolve(sp.thermal_state(sys8), sys8, pulse1, "split")
        comb = sp.row_harmonics(0, f_start, DESK["spacing"], 4, 4, DESK["amp2"])
        pulse2 = sp.synthesize(comb, DESK["dur2"], DESK["steps2"])
        full = _process(
            cycled_fid(rho1, sys8, pulse2, GATING_PHASE_CYCLE, desk_acq, "split",
                       GATING_RECEIVER_WEIGHTS),
            desk_acq,
        )
        peak_scale = float(np.abs(full.values).max())

        rho_blank = sp.thermal_state(sys8)  # pulse1 amplitude zero: no pulse at all
        results = {}
        for label, cycle, weights in (
            ("gating", GATING_PHASE_CYCLE, GATING_RECEIVER_WEIGHTS),
            ("two-branch", DEFAULT_PHASE_CYCLE, None),
        ):
            cancelled = _process(
                cycled_fid(rho_blank, sys8, pulse2, cycle, desk_acq, "split", weights),
                desk_acq,
            )
            results[label] = float(np.abs(cancelled.values).max())
        ok = all(v < 1e-8 * peak_scale for v in results.values())
        report(
            "criterion 7 (phase-cycle cancellation of the direct signal)",
            ok,
            f"peak scale {peak_scale:.3e}, residuals {results} (bound {1e-8 * peak_scale:.3e})",
        )

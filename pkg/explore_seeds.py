"""Seed scan at the candidate preset regime."""
import sys as systemmod
import time
import numpy as np
import spinphoto as sp
from spinphoto.experiments import _detect, _process, GATING_PHASE_CYCLE, GATING_RECEIVER_WEIGHTS
from spinphoto.waveform import rotate_phase

AMP1 = float(systemmod.argv[1]) if len(systemmod.argv) > 1 else 0.4
AMP2 = float(systemmod.argv[2]) if len(systemmod.argv) > 2 else 9.0
SEEDS = [int(s) for s in systemmod.argv[3].split(',')] if len(systemmod.argv) > 3 else [2,3,4,5,6,7,8,9]

rows = cols = 4
spacing = 40.0
f_start = sp.centered_start(rows * cols, spacing)
bits = np.array([[1,0,1,0],[0,1,1,0],[1,1,0,1],[0,0,1,0]])
image = sp.BitImage(rows, cols, bits)
SNAPS = [0.05, 0.1]
STEPS_PER_SNAP = 1024

def window_real(spec, f, half):
    m = np.abs(spec.freqs - f) <= half
    return spec.df * spec.values[m].real.sum()

for seed in SEEDS:
    t0 = time.time()
    sys8 = sp.SpinSystem(8, sp.random_couplings(8, 792, seed=seed))
    acq = sp.Acquisition(t_acq=0.5, dwell=1/8192, lb=12.0, zero_fill=8192, dead_time=0.05)
    hs1 = sp.bits_to_harmonics(image, f_start, spacing, AMP1)
    pulse1 = sp.synthesize(hs1, 1.0, 4096)
    rho1 = sp.evolve(sp.thermal_state(sys8), sys8, pulse1, 'split')
    tables = {t: np.zeros((rows, cols)) for t in SNAPS}
    for r in range(rows):
        hs2 = sp.row_harmonics(r, f_start, spacing, cols, rows, AMP2)
        full = sp.synthesize(hs2, SNAPS[-1], STEPS_PER_SNAP * len(SNAPS))
        branches = [(rotate_phase(full, ph), rho1) for ph in GATING_PHASE_CYCLE]
        for k, t2 in enumerate(SNAPS):
            branches = [(wf, sp.evolve(st, sys8, wf.segment(k*STEPS_PER_SNAP, (k+1)*STEPS_PER_SNAP), 'split'))
                        for wf, st in branches]
            fids = [_detect(st, sys8, acq) for _, st in branches]
            samples = sum(w * f.samples for w, f in zip(GATING_RECEIVER_WEIGHTS, fids))
            spec = _process(sp.Fid(acq.dwell, samples), acq)
            for c in range(cols):
                tables[t2][r, c] = window_real(spec, f_start + (c*rows + r)*spacing, spacing/4)
    for t2 in SNAPS:
        tab = tables[t2]
        orient = np.sign(tab.ravel()[np.argmax(np.abs(tab))])
        o = orient * tab
        ones = np.sort(o[bits.astype(bool)])
        zeros = np.sort(o[~bits.astype(bool)])
        try:
            rep = sp.decode(tab, reference=image)
            err, mar = rep.bit_errors, rep.margin
        except Exception:
            err, mar = -1, -1.0
        print(f'seed={seed} t2={t2}: err={err} margin={mar:.3f} ones_min={ones[0]*1e5:+.2f} '
              f'zeros_max={zeros[-1]*1e5:+.2f} ratio={ones[0]/max(abs(zeros[-1]),1e-12):.2f}')
    print(f'  ({time.time()-t0:.0f}s)')

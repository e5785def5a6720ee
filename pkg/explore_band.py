"""Bandwidth variants: shorter pulse1 with wider per-slot excitation band."""
import sys as systemmod
import time
import numpy as np
import spinphoto as sp
from spinphoto.experiments import _detect, _process, GATING_PHASE_CYCLE, GATING_RECEIVER_WEIGHTS
from spinphoto.waveform import rotate_phase

SEED = int(systemmod.argv[1]) if len(systemmod.argv) > 1 else 1
rows = cols = 4
spacing = 40.0
f_start = sp.centered_start(rows * cols, spacing)
bits = np.array([[1,0,1,0],[0,1,1,0],[1,1,0,1],[0,0,1,0]])
image = sp.BitImage(rows, cols, bits)
sys8 = sp.SpinSystem(8, sp.random_couplings(8, 792, seed=SEED))
acq = sp.Acquisition(t_acq=0.5, dwell=1/8192, lb=12.0, zero_fill=8192, dead_time=0.05)
SNAPS = [0.05, 0.1, 0.15, 0.2]
SPS = 1024

def window_real(spec, f, half):
    m = np.abs(spec.freqs - f) <= half
    return spec.df * spec.values[m].real.sum()

def run(dur1, amp1, amp2):
    hs1 = sp.bits_to_harmonics(image, f_start, spacing, amp1)
    pulse1 = sp.synthesize(hs1, dur1, max(512, int(dur1*4096)))
    rho1 = sp.evolve(sp.thermal_state(sys8), sys8, pulse1, 'split')
    tables = {t: np.zeros((rows, cols)) for t in SNAPS}
    for r in range(rows):
        hs2 = sp.row_harmonics(r, f_start, spacing, cols, rows, amp2)
        full = sp.synthesize(hs2, SNAPS[-1], SPS * len(SNAPS))
        branches = [(rotate_phase(full, ph), rho1) for ph in GATING_PHASE_CYCLE]
        for k, t2 in enumerate(SNAPS):
            branches = [(wf, sp.evolve(st, sys8, wf.segment(k*SPS, (k+1)*SPS), 'split'))
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
        ones, zeros = np.sort(o[bits.astype(bool)]), np.sort(o[~bits.astype(bool)])
        try:
            rep = sp.decode(tab, reference=image)
            err, mar = rep.bit_errors, rep.margin
        except Exception:
            err, mar = -1, -1.0
        print(f'dur1={dur1} amp1={amp1} amp2={amp2} t2={t2}: err={err} margin={mar:.3f} '
              f'ones_min={ones[0]*1e5:+.2f} zeros_max={zeros[-1]*1e5:+.2f}')

t0=time.time()
run(0.5, 1.2, 9.0)
run(0.25, 2.4, 9.0)
run(0.25, 1.6, 9.0)
print('total %.0fs' % (time.time()-t0))

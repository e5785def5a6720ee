"""Batched preset search: full 4x4 slot tables at several lock durations."""
import itertools
import sys as systemmod
import time
import numpy as np
import spinphoto as sp
from spinphoto.experiments import _detect, _process, GATING_PHASE_CYCLE, GATING_RECEIVER_WEIGHTS
from spinphoto.waveform import rotate_phase

SEED = int(systemmod.argv[1]) if len(systemmod.argv) > 1 else 1
DEAD = float(systemmod.argv[2]) if len(systemmod.argv) > 2 else 0.05

rows = cols = 4
spacing = 40.0
f_start = sp.centered_start(rows * cols, spacing)
bits = np.array([[1,0,1,0],[0,1,1,0],[1,1,0,1],[0,0,1,0]])
image = sp.BitImage(rows, cols, bits)
sys8 = sp.SpinSystem(8, sp.random_couplings(8, 792, seed=SEED))
acq = sp.Acquisition(t_acq=0.5, dwell=1/8192, lb=12.0, zero_fill=8192, dead_time=DEAD)
SNAPS = [0.05, 0.1]   # commensurate with 1/spacing
STEPS_PER_SNAP = 1024

def window_complex(spec, f, half):
    m = np.abs(spec.freqs - f) <= half
    return spec.df * spec.values[m].sum()

def full_tables(rho1, amp2):
    """Complex slot tables at each snapshot duration."""
    tables = {t: np.zeros((rows, cols), complex) for t in SNAPS}
    for r in range(rows):
        hs2 = sp.row_harmonics(r, f_start, spacing, cols, rows, amp2)
        full = sp.synthesize(hs2, SNAPS[-1], STEPS_PER_SNAP * len(SNAPS))
        branches = [(rotate_phase(full, ph), rho1) for ph in GATING_PHASE_CYCLE]
        for k, t2 in enumerate(SNAPS):
            branches = [(wf, sp.evolve(st, sys8, wf.segment(k*STEPS_PER_SNAP, (k+1)*STEPS_PER_SNAP), 'split'))
                        for wf, st in branches]
            fids = [_detect(st, sys8, acq) for _, st in branches]
            samples = sum(w * f.samples for w, f in zip(GATING_RECEIVER_WEIGHTS, fids))
            spec = _process(sp.Fid(acq.dwell, samples), acq)
            for c in range(cols):
                tables[t2][r, c] = window_complex(spec, f_start + (c*rows + r)*spacing, spacing/4)
    return tables

def report(tag, table):
    re = table.real
    ones = re[bits.astype(bool)]
    zeros = re[~bits.astype(bool)]
    sign = 1 if abs(ones.max()) + abs(zeros.max()) and abs(re).max() == abs(re[np.unravel_index(np.argmax(np.abs(re)), re.shape)]) and re.ravel()[np.argmax(np.abs(re))] >= 0 else -1
    orient = np.sign(re.ravel()[np.argmax(np.abs(re))])
    o_ones, o_zeros = np.sort(orient*ones), np.sort(orient*zeros)
    sep = o_ones.min() - o_zeros.max()
    try:
        rep = sp.decode(re, reference=image)
        err, mar = rep.bit_errors, rep.margin
    except Exception as e:
        err, mar = -1, -1
    mean_phase = np.angle(np.mean(table[bits.astype(bool)]))
    print(f'{tag}: errors={err} margin={mar:.3f} sep={sep*1e5:+.2f} ones_min={o_ones.min()*1e5:+.2f} zeros_max={o_zeros.max()*1e5:+.2f} ones_phase={mean_phase:+.2f}')
    print('   ones :', np.array2string(np.sort(orient*ones)*1e5, precision=2, max_line_width=200))
    print('   zeros:', np.array2string(np.sort(orient*zeros)*1e5, precision=2, max_line_width=200))

t0 = time.time()
for amp1 in (0.4, 1.2):
    hs1 = sp.bits_to_harmonics(image, f_start, spacing, amp1)
    pulse1 = sp.synthesize(hs1, 1.0, 4096)
    rho1 = sp.evolve(sp.thermal_state(sys8), sys8, pulse1, 'split')
    for amp2 in (4.0, 9.0):
        tables = full_tables(rho1, amp2)
        for t2 in SNAPS:
            report(f'amp1={amp1} amp2={amp2} t2={t2} dead={DEAD}', tables[t2])
print('total %.0fs' % (time.time() - t0))

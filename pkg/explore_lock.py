"""Exploration: complex slot amplitudes vs lock duration for locked/unlocked/zero slots."""
import sys as systemmod
import time
import numpy as np
import spinphoto as sp
from spinphoto.experiments import _detect, _process
from spinphoto.waveform import rotate_phase

SEED = int(systemmod.argv[1]) if len(systemmod.argv) > 1 else 1
AMP2 = float(systemmod.argv[2]) if len(systemmod.argv) > 2 else 9.0
DEAD = float(systemmod.argv[3]) if len(systemmod.argv) > 3 else 0.0

rows = cols = 4
spacing = 40.0
f_start = sp.centered_start(rows * cols, spacing)
sys8 = sp.SpinSystem(8, sp.random_couplings(8, 792, seed=SEED))
acq = sp.Acquisition(t_acq=0.5, dwell=1 / 8192, lb=12.0, zero_fill=8192, dead_time=DEAD)

# one bit set at (row 1, col 2) -> slot index 2*4+1 = 9, freq f_start + 360
r_t, c_t = 1, 2
img = np.zeros((rows, cols), dtype=int); img[r_t, c_t] = 1
image = sp.BitImage(rows, cols, img)

hs1 = sp.bits_to_harmonics(image, f_start, spacing, 1.2)
pulse1 = sp.synthesize(hs1, 1.0, 2048)
rho1 = sp.evolve(sp.thermal_state(sys8), sys8, pulse1, 'split')

f_slot = f_start + (c_t * rows + r_t) * spacing
print(f'slot freq = {f_slot}, seed={SEED}, amp2={AMP2}, dead={DEAD}')

def window_complex(spec, f, half):
    m = np.abs(spec.freqs - f) <= half
    return spec.df * spec.values[m].sum()

def comb_sweep(hs2, dur_max, points, steps):
    """Complex window amplitude at f_slot and two zero slots, per duration."""
    full = sp.synthesize(hs2, dur_max, steps)
    cycle = (np.pi / 2, -np.pi / 2)
    branches = [(rotate_phase(full, ph), rho1) for ph in cycle]
    per = steps // (points - 1)
    out = []
    for k in range(points):
        if k > 0:
            branches = [(wf, sp.evolve(st, sys8, wf.segment((k-1)*per, k*per), 'split'))
                        for wf, st in branches]
        fids = [_detect(st, sys8, acq) for _, st in branches]
        fid = sp.Fid(acq.dwell, sum(f.samples for f in fids) / 2)
        spec = _process(fid, acq)
        vals = [window_complex(spec, f_slot, spacing/4),
                window_complex(spec, f_start + (0*rows + r_t)*spacing, spacing/4),
                window_complex(spec, f_start + (3*rows + r_t)*spacing, spacing/4)]
        out.append(vals)
    return np.array(out)

t0 = time.time()
hs_full = sp.row_harmonics(r_t, f_start, spacing, cols, rows, AMP2)
hs_cut = hs_full.with_amplitude(c_t, 0.0)

points = 9
dur_max = 0.2
steps = 4096
locked = comb_sweep(hs_full, dur_max, points, steps)
unlocked = comb_sweep(hs_cut, dur_max, points, steps)
durs = np.linspace(0, dur_max, points)
print('t2      locked(re,im)        unlocked(re,im)      zero1(re)   zero2(re)')
for k in range(points):
    lr, li = locked[k,0].real, locked[k,0].imag
    ur, ui = unlocked[k,0].real, unlocked[k,0].imag
    print(f'{durs[k]:5.3f}  {lr:+.3e} {li:+.3e}  {ur:+.3e} {ui:+.3e}  {locked[k,1].real:+.2e}  {locked[k,2].real:+.2e}')
print('elapsed %.0fs' % (time.time() - t0))

"""Exploration: 4-branch gating cycle -- locked vs unlocked vs background."""
import sys as systemmod
import time
import numpy as np
import spinphoto as sp
from spinphoto.experiments import _detect, _process, GATING_PHASE_CYCLE, GATING_RECEIVER_WEIGHTS, cycled_fid

SEED = int(systemmod.argv[1]) if len(systemmod.argv) > 1 else 1
AMP2 = float(systemmod.argv[2]) if len(systemmod.argv) > 2 else 9.0
DEAD = float(systemmod.argv[3]) if len(systemmod.argv) > 3 else 0.0
AMP1 = float(systemmod.argv[4]) if len(systemmod.argv) > 4 else 1.2
DUR1 = float(systemmod.argv[5]) if len(systemmod.argv) > 5 else 1.0

rows = cols = 4
spacing = 40.0
f_start = sp.centered_start(rows * cols, spacing)
sys8 = sp.SpinSystem(8, sp.random_couplings(8, 792, seed=SEED))
acq = sp.Acquisition(t_acq=0.5, dwell=1/8192, lb=12.0, zero_fill=8192, dead_time=DEAD)

r_t, c_t = 1, 2
img = np.zeros((rows, cols), dtype=int); img[r_t, c_t] = 1
image = sp.BitImage(rows, cols, img)
f_slot = f_start + (c_t * rows + r_t) * spacing

hs1 = sp.bits_to_harmonics(image, f_start, spacing, AMP1)
pulse1 = sp.synthesize(hs1, DUR1, 2048)
rho1 = sp.evolve(sp.thermal_state(sys8), sys8, pulse1, 'split')

def window_complex(spec, f, half):
    m = np.abs(spec.freqs - f) <= half
    return spec.df * spec.values[m].sum()

def gate_sweep(hs2, dur_max, points, steps):
    from spinphoto.waveform import rotate_phase
    full = sp.synthesize(hs2, dur_max, steps)
    branches = [(rotate_phase(full, ph), rho1) for ph in GATING_PHASE_CYCLE]
    per = steps // (points - 1)
    out = []
    for k in range(points):
        if k > 0:
            branches = [(wf, sp.evolve(st, sys8, wf.segment((k-1)*per, k*per), 'split'))
                        for wf, st in branches]
        fids = [_detect(st, sys8, acq) for _, st in branches]
        samples = sum(w * f.samples for w, f in zip(GATING_RECEIVER_WEIGHTS, fids))
        spec = _process(sp.Fid(acq.dwell, samples), acq)
        out.append([window_complex(spec, f_slot, spacing/4),
                    window_complex(spec, f_start + (0*rows + r_t)*spacing, spacing/4),
                    window_complex(spec, f_start + (3*rows + r_t)*spacing, spacing/4)])
    return np.array(out)

t0 = time.time()
hs_full = sp.row_harmonics(r_t, f_start, spacing, cols, rows, AMP2)
hs_cut = hs_full.with_amplitude(c_t, 0.0)
points, dur_max, steps = 9, 0.2, 4096
L = gate_sweep(hs_full, dur_max, points, steps)
U = gate_sweep(hs_cut, dur_max, points, steps)
durs = np.linspace(0, dur_max, points)
print(f'GATING 4-branch seed={SEED} amp2={AMP2} dead={DEAD} amp1={AMP1} dur1={DUR1}')
print('t2     lock_re    lock_im    unlk_re   |L|/|U|  bg1_re     bg2_re')
for k in range(points):
    l, u = L[k,0], U[k,0]
    ratio = abs(l)/max(abs(u),1e-12)
    print(f'{durs[k]:5.3f} {l.real:+.3e} {l.imag:+.2e} {u.real:+.3e} {ratio:7.1f} {L[k,1].real:+.2e} {L[k,2].real:+.2e}')
print('elapsed %.0fs' % (time.time() - t0))

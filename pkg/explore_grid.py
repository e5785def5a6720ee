"""Grid exploration: locked/unlocked/background vs (amp2, dead_time, pulse1 bandwidth)."""
import time
import numpy as np
import spinphoto as sp
from spinphoto.experiments import _detect, _process
from spinphoto.waveform import rotate_phase

SEED = 1
rows = cols = 4
spacing = 40.0
f_start = sp.centered_start(rows * cols, spacing)
sys8 = sp.SpinSystem(8, sp.random_couplings(8, 792, seed=SEED))

r_t, c_t = 1, 2
img = np.zeros((rows, cols), dtype=int); img[r_t, c_t] = 1
image = sp.BitImage(rows, cols, img)
f_slot = f_start + (c_t * rows + r_t) * spacing

def window_complex(spec, f, half):
    m = np.abs(spec.freqs - f) <= half
    return spec.df * spec.values[m].sum()

def comb_sweep(rho1, hs2, dur_max, points, steps, acq):
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
        out.append([window_complex(spec, f_slot, spacing/4),
                    window_complex(spec, f_start + (0*rows + r_t)*spacing, spacing/4),
                    window_complex(spec, f_start + (3*rows + r_t)*spacing, spacing/4)])
    return np.array(out)

def run_case(dur1, amp1, steps1, amp2, dead):
    hs1 = sp.bits_to_harmonics(image, f_start, spacing, amp1)
    pulse1 = sp.synthesize(hs1, dur1, steps1)
    rho1 = sp.evolve(sp.thermal_state(sys8), sys8, pulse1, 'split')
    acq = sp.Acquisition(t_acq=0.5, dwell=1/8192, lb=12.0, zero_fill=8192, dead_time=dead)
    hs_full = sp.row_harmonics(r_t, f_start, spacing, cols, rows, amp2)
    hs_cut = hs_full.with_amplitude(c_t, 0.0)
    points, dur_max, steps = 9, 0.2, 4096
    L = comb_sweep(rho1, hs_full, dur_max, points, steps, acq)
    U = comb_sweep(rho1, hs_cut, dur_max, points, steps, acq)
    durs = np.linspace(0, dur_max, points)
    print(f'--- dur1={dur1} amp1={amp1} amp2={amp2} dead={dead}')
    print('t2     lock_re    unlk_re    |L|/|U|  bg1_re     bg2_re')
    for k in range(points):
        l, u = L[k,0], U[k,0]
        ratio = abs(l)/max(abs(u),1e-12)
        print(f'{durs[k]:5.3f} {l.real:+.3e} {u.real:+.3e} {ratio:6.2f} {L[k,1].real:+.2e} {L[k,2].real:+.2e}')

t0=time.time()
run_case(1.0, 1.2, 2048, 9.0, 0.05)
run_case(1.0, 1.2, 2048, 18.0, 0.05)
run_case(0.25, 4.8, 1024, 18.0, 0.05)
print('total %.0fs' % (time.time()-t0))

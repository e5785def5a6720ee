"""Full 4x4 photography with candidate preset; prints the slot table and decode."""
import sys as systemmod
import time
import numpy as np
import spinphoto as sp

SEED = int(systemmod.argv[1]) if len(systemmod.argv) > 1 else 1
DUR2 = float(systemmod.argv[2]) if len(systemmod.argv) > 2 else 0.05
DEAD = float(systemmod.argv[3]) if len(systemmod.argv) > 3 else 0.05
AMP2 = float(systemmod.argv[4]) if len(systemmod.argv) > 4 else 9.0
STEPS1 = int(systemmod.argv[5]) if len(systemmod.argv) > 5 else 4096

t0 = time.time()
img = sp.BitImage(4, 4, [[1,0,1,0],[0,1,1,0],[1,1,0,1],[0,0,1,0]])
sys8 = sp.SpinSystem(8, sp.random_couplings(8, 792, seed=SEED))
acq = sp.Acquisition(t_acq=0.5, dwell=1/8192, lb=12.0, zero_fill=8192, dead_time=DEAD)
cfg = sp.PhotographyConfig(spacing=40.0, amp1=1.2, dur1=1.0, steps1=STEPS1,
    amp2=AMP2, dur2=DUR2, steps2=max(1024, int(DUR2*20480)), acquisition=acq)
stack = sp.run_photography(img, sys8, cfg)
table = sp.sample_slots(stack, cfg.start_frequency(img), 40.0, 4, 4)
np.set_printoptions(precision=2, suppress=False, linewidth=200)
print(f'seed={SEED} dur2={DUR2} dead={DEAD} amp2={AMP2} steps1={STEPS1}  ({time.time()-t0:.0f}s)')
print('table x1e5:'); print(table*1e5)
ones = np.sort(table[img.bits.astype(bool)].ravel())
zeros = np.sort(table[~img.bits.astype(bool)].ravel())
print('ones  x1e5:', ones*1e5)
print('zeros x1e5:', zeros*1e5)
try:
    rep = sp.decode(table, reference=img)
    print('bit_errors:', rep.bit_errors, ' margin: %.3f' % rep.margin, ' orient:', rep.orientation)
except Exception as e:
    print('decode failed:', e)

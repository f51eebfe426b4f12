"""Working-set comparison: one matrix buffer instead of two.

The single-buffer algorithm stores the conjugate-transposed channel once and
overwrites it first with the Gram matrix, then with the inverse; interference
cancellation runs through a short deficiency vector, so neither the Gram
matrix nor the channel is needed during the recursion.  The memory ledger
counts named detector-owned buffers of at least M complex words.
"""

from vblast import ALGORITHMS
from vblast.harness import detector_mem

M = N = 16
print(f"peak simultaneously-live complex words at M = N = {M}\n")
print(f"  {'algorithm':24s} {'peak':>6s}  buffers")
peaks = {}
for name in ALGORITHMS:
    mem = detector_mem(name, M, N)
    peaks[name] = mem.peak_words
    pretty = ", ".join(f"{b}={w}" for b, w in mem.buffers)
    print(f"  {name:24s} {mem.peak_words:6d}  {pretty}")

ratio = peaks["proposed_2"] / peaks["mem_saving"]
print(f"\nproposed_2 / mem_saving = {peaks['proposed_2']} / {peaks['mem_saving']}"
      f" = {ratio:.3f}  (claim: about half, gate <= 0.55)")

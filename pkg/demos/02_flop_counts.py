"""Operation counts versus the dominant-complexity models.

Every complex multiply, add and divide a detector performs is charged to its
ledger, so the measured counts can be compared with the closed-form dominant
polynomials.  The script prints the counts at a few sizes, their gap to the
models, and the headline speedup ratios.
"""

from vblast import DETECTOR_NAMES, MODEL_FOR_ALGORITHM, TABLE_MODELS, compare, speedup
from vblast.harness import detector_ledger, inversion_step_ledger

SIZES = (8, 16, 32, 64)

for m in SIZES:
    print(f"\nM = N = {m}")
    print(f"  {'algorithm':24s} {'cmul':>9s} {'cadd':>9s} {'cdiv':>6s} "
          f"{'model mul':>10s} {'gap':>7s}")
    for name in DETECTOR_NAMES:
        led = detector_ledger(name, m, m)
        rep = compare(led, TABLE_MODELS[MODEL_FOR_ALGORITHM[name]], m, m)
        print(f"  {name:24s} {led.cmul:9d} {led.cadd:9d} {led.cdiv:6d} "
              f"{rep.predicted:10.0f} {rep.relative_gap:7.2%}")

print("\nspeedup ratios on cmul+cadd (theory at M=N: 1.29, 1.86, 1.22, 1.67)")
print(f"  {'M':>4s} {'speed_adv/prop2':>16s} {'mem_saving/prop2':>17s} "
      f"{'fastest/speed_adv':>18s} {'init i/v':>9s} {'div ratio v/i':>14s}")
for m in SIZES:
    leds = {n: detector_ledger(n, m, m)
            for n in ("speed_adv", "mem_saving", "fastest_known", "proposed_2")}
    li = inversion_step_ledger(m, m, "i")
    lv = inversion_step_ledger(m, m, "v")
    print(f"  {m:4d} {speedup(leds['speed_adv'], leds['proposed_2']):16.4f} "
          f"{speedup(leds['mem_saving'], leds['proposed_2']):17.4f} "
          f"{speedup(leds['fastest_known'], leds['speed_adv']):18.4f} "
          f"{speedup(li, lv):9.4f} {lv.cdiv / li.cdiv:14.4f}")

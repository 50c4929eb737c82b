"""Why the clock convergence needs M1: the split-jump family.

f_n reaches level 1 in two half-jumps 1/n apart; the limit f takes one
unit jump. In M1 the paths get close (the completed graphs line up), in
J1 they never do because no time change can match a half jump to a full
one. The modulus w' tells monotone paths apart from oscillating ones.
"""

from trapclock.skorokhod import (
    CadlagStepPath,
    j1_distance,
    m1_distance,
    modulus_w,
    modulus_w_prime,
)

single = CadlagStepPath(2.0, 0.0, [1.0], [1.0])

print("split-jump staircase against the single unit jump:")
print("   n      m1        j1")
for n in (2, 4, 8, 16, 32, 64):
    f_n = CadlagStepPath(2.0, 0.0, [1.0 - 1.0 / n, 1.0], [0.5, 1.0])
    m1 = m1_distance(f_n, single, resolution=512)
    j1 = j1_distance(f_n, single)
    print(f"  {n:3d}   {m1:.5f}   {j1:.5f}")
print("m1 tracks 1/n; j1 stays pinned at 1/2.")
print()

# Moduli: a nondecreasing path has w' = 0 at every delta; inserting a
# down-up wiggle makes it positive.
mono = CadlagStepPath(1.0, 0.0, [0.2, 0.5, 0.9], [0.3, 0.8, 1.0])
wiggle = CadlagStepPath(1.0, 0.0, [0.4, 0.45], [-1.0, 1.0])
for name, path in (("monotone", mono), ("down-up", wiggle)):
    print(f"{name} path: w(0.1) = {modulus_w(path, 0.1):.3f}, "
          f"w'(0.1) = {modulus_w_prime(path, 0.1):.3f}")

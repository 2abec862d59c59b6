#!/usr/bin/env python3
"""Point-set zoo: lattices, jittered lattices and cut-and-project chains.

Generates each sample type, certifies its packing/covering radii, and probes
penumbras and half-space partitions - the geometric substrate everything else
builds on.
"""
import numpy as np

import roelab as rl

# A perfect square lattice and its certificate: r = 1/2, R = sqrt(2)/2.
square = rl.generate({"kind": "square", "window": [[0, 12], [0, 12]]})
cert = rl.certify_delone(square)
print(f"square lattice: {square.n} points, r = {cert.r}, R = {cert.R:.6f}")

# Jitter each point by up to 0.2: still uniformly discrete (spacing >= 0.6).
jittered = rl.generate({"kind": "perturbed", "window": [[0, 12], [0, 12]],
                        "jitter": 0.2, "seed": 7})
cert = rl.certify_delone(jittered)
print(f"jittered lattice: r = {cert.r:.4f} (>= 0.3), R = {cert.R:.4f}")

# The Fibonacci chain by strip projection from Z^2: two tile lengths, ratio
# the golden mean, quasiperiodic but perfectly deterministic.
fib = rl.generate({"kind": "fibonacci", "window": [[0, 30]]})
gaps = np.round(np.diff(fib.coords[:, 0]), 6)
print(f"fibonacci chain: {fib.n} points, tiles {sorted(set(gaps.tolist()))}, "
      f"ratio {max(gaps) / min(gaps):.6f}")

# Eightfold symmetry from a 4d lattice: the Ammann-Beenker vertex set.
ab = rl.generate({"kind": "ammann_beenker", "window": [[0, 14], [0, 14]]})
cert = rl.certify_delone(ab)
print(f"ammann-beenker: {ab.n} points, r = {cert.r:.4f}, R = {cert.R:.4f}")

# Penumbras grow monotonically with the radius.
seed_ids = [0, 1, 2]
for R in (1.0, 2.0, 4.0):
    print(f"penumbra radius {R}: {len(rl.penumbra(square, seed_ids, R))} points")

# A tilted half-space cut and its interface collar.
normal = [np.cos(0.2), np.sin(0.2)]
part = rl.partition_halfspace(square, normal, 6.0)
print(f"tilted cut: {len(part.plus_ids)} plus / {len(part.minus_ids)} minus, "
      f"{len(part.interface_ids)} interface points "
      f"(thickness {part.thickness})")

# Point-group bookkeeping: a fourfold rotation about a lattice point.
act = rl.cyclic_rotation_action(square, 4, center=square.coords.mean(axis=0))
matched = (act.site_permutation >= 0).mean()
print(f"C4 action matches {matched:.0%} of sites (rest leave the window)")

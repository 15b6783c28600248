"""The map f±(x) = {ax+b}: orbits, rotation numbers, invariant sets."""

"""Nonlocal mass-conserving parabolic obstacle problem on the flat torus."""

"""
admwex: admissible weighted extremal Kähler metrics.

Profiles, positivity, Donaldson–Futaki invariants, Einstein–Maxwell parameter
searches and orthotoric identity checks for admissible projective bundles.
"""

__version__ = "0.1.0"

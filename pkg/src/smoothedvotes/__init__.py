"""Exact rank/profile analytics, noisy-ballot models, voting rules, axiom
checks, and Monte Carlo violation-probability estimators for ranked elections.

Subpackage map:
    core      -- rankings, profiles, histograms, exact arithmetic, text I/O
    noise     -- dispersion-parameterized ballot noise models and analytics
    rules     -- voting rules, pairwise margins, tie-locus hyperplane geometry
    axioms    -- absolute/relative axiom predicates, witnesses, brute force
    smoothed  -- Monte Carlo estimators, sweeps, diagnostics, CSV emission
    cli       -- experiment runner and I/O surface
"""

__version__ = "0.1.0"

from . import axioms, cli, core, noise, rules, smoothed  # noqa: F401

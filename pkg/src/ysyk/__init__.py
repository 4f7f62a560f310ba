"""Exact-diagonalization toolkit for the spinless Yukawa-SYK model.

Subpackages cover basis construction (:mod:`ysyk.hilbert`), disorder
sampling (:mod:`ysyk.disorder`), sparse Hamiltonian assembly
(:mod:`ysyk.hamiltonian`), spectral and dynamical chaos diagnostics
(:mod:`ysyk.spectral`, :mod:`ysyk.otoc`), short-time rescaling factors
(:mod:`ysyk.rescaling`), disorder-ensemble orchestration
(:mod:`ysyk.ensemble`), and the cavity feasibility calculator
(:mod:`ysyk.feasibility`).
"""

__version__ = "0.1.0"

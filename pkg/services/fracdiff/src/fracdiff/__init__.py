"""
Fractional diffusion toolkit.

Evaluates the auxiliary functions R_{mu,nu}(a, t) (inverse Laplace transforms of
s^{-mu} exp(-a s^nu)) together with the Wright and Mainardi functions, solves
initial-boundary value problems for the Caputo and Riemann-Liouville time-fractional
diffusion equation by the embedding method, and solves two fractional Stefan problems.
"""

import logging

__version__ = "0.1.0"

logging.getLogger(__name__).addHandler(logging.NullHandler())

"""Spherical means and maximal-norm experiments on cyclic groups Z_{m+1}^d.

The package is organized around a handful of small building blocks:

* :mod:`hammax.groups` -- the group Z_{m+1}^d, Hamming spheres, characters
  and the (fast) group Fourier transform.
* :mod:`hammax.kernels` -- radial (weight-dependent) kernels, their exact
  convolution calculus and Fourier multiplier profiles.
* :mod:`hammax.fields` -- matrix-valued functions on the group and their
  Schatten/L_p norms and convolutions.
* :mod:`hammax.norms` -- the vector-valued noncommutative norms
  (l_infty, l_1, column l_infty, scalar weak type) with primal/dual
  certificates.
* :mod:`hammax.maximal` -- smoothed spherical means, noise semigroup,
  Cesaro summation families, square functions and their identity audits.
* :mod:`hammax.actions` -- commuting unitary actions, ergodic sphere
  averages and the transference construction.
* :mod:`hammax.cli` -- the experiment driver.
"""

from hammax.groups import GroupSpec
from hammax.kernels import RadialKernel, MultiplierProfile
from hammax.fields import OperatorField

__all__ = ["GroupSpec", "RadialKernel", "MultiplierProfile", "OperatorField"]

__version__ = "0.1.0"

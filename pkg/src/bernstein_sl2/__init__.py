"""Exact values of Bernstein projectors of SL(2) over a p-adic field.

Modules:

* ``qfield``: prime fields, quadratic characters, exact cyclotomic sums;
* ``sl2fq``: SL(2, F_q) conjugacy classes, elliptic elements, cuspidal characters;
* ``classes``: regular semisimple class descriptors and depth domains;
* ``projectors``: principal series and supercuspidal depth sums, sigma_d;
* ``latticeft``: truncated-lattice Fourier transforms on sl(2, Q_p);
* ``cli``: the ``bernstein-sl2`` command.
"""

from .classes import Depth, RegSSClass, TorusType, parse_class
from .projectors import e_depth, sigma
from .qfield import CyclotomicSum

__all__ = ["CyclotomicSum", "Depth", "RegSSClass", "TorusType", "e_depth", "parse_class", "sigma"]
__version__ = "0.1.0"

"""Mod 2 cohomology of symmetric squares and symmetrized topological complexity bounds."""

from .bounds import (Fact, Interval, InvariantKind, cup_length, kb_default, propagate, sb_lower,
                     tcsigma_lower)
from .f2core import (BasisElement, PresentedAlgebra, alg_mult, alg_sq, binom_mod2, validate_algebra,
                     vec, vec_add)
from .nakaoka import (ABSOLUTE, RELATIVE, E, Phi, Unit, Variant, build_sp2, norm_E, norm_phi,
                      phi_bilinear, sp2_basis, sp2_mult, sp2_sq)
from .spaces import build_space, make_product, make_rp, make_sphere

__version__ = "0.1.0"

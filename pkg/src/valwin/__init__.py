"""Exact window-precision computations for valuations on local rings:
value groups, truncated generalized power series, valuation-ideal windows,
implicit ideals in completions, local blowup trees and determined chains.
"""

from .groups import (AtLeast, GroupElement, QuadraticLevel, RationalLevel,
                     ValueGroup, cmp, in_isolated, project_mod)
from .series import HahnSeries, SeriesStream, divide, sqrt1p, stream_series
from .rings import (LocalRing, ValuationSpec, Window, ZERO_ELEMENT, nu_value)
from .echelon import (IdealWindow, ValueEchelonBasis, graded_piece_dim,
                      prime_valuation_ideal, valuation_ideal,
                      valuation_ideal_mod, value_echelon, value_semigroup)
from .blowup import (TreeNode, blowup_along, node_value_agreement, recenter,
                     root_node, tree_of_ideals_check)
from .completion import (ExtensionSpec, ImplicitIdealApprox, IN_H, Unknown,
                         check_additivity, contraction_check, determined_chain,
                         extend_ideal, graded_iso_check, implicit_ideal_rank1,
                         implicit_ideal_tree, nu_hat_value, primality_probe,
                         projected_valuation_ideal, strict_transform)

__version__ = "0.1.0"

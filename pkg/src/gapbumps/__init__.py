"""Critical points of strongly indefinite energies on periodic tori.

The pipeline: diagonalize the periodic Schrödinger operator -Lap + V on a
torus Q_k, certify the spectral gap around zero, search for nontrivial
critical points of the indefinite functional in the induced energy metric,
reduce near-degenerate solutions to a finite-dimensional function, and glue
widely separated translates into multibump solutions.
"""

__version__ = "0.1.0"

from .torus import GridField, TorusDomain, embed_with_cutoff, integrate, translate

__all__ = [
    "GridField",
    "TorusDomain",
    "embed_with_cutoff",
    "integrate",
    "translate",
    "__version__",
]

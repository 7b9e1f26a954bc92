"""Handshape phonology tools for ASL corpora.

Inventory and lexicon modelling, two-hand well-formedness checks, start/end
transition statistics, coarticulation scanning, non-dominant hand
disambiguation and prior-based re-ranking of recognizer output.
"""

__version__ = "0.1.0"

"""pbcert: frequency-domain certification of delay and diagonal parabolic systems.

The toolkit decides whether a Lur'e-form delay system admits a two-dimensional
attracting invariant manifold (counting characteristic roots, sweeping transfer
function norms, checking circle-type inequalities), specializes the pipeline to
the three-species Goodwin oscillator, and corroborates certified periodic
orbits by direct method-of-steps simulation.
"""

__version__ = "0.1.0"

from . import charroots, ddesim, freqcheck, goodwin, parabolic

__all__ = ["charroots", "ddesim", "freqcheck", "goodwin", "parabolic", "__version__"]

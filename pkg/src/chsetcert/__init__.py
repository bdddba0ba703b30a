"""Interval-arithmetic certificates for normally hyperbolic invariant circles.

The library checks covering relations and cone conditions for maps on
central-hyperbolic sets over a circle, and ships the complete check for the
quasi-periodically forced (rotating) Henon map.
"""

__version__ = "0.1.0"

"""Reticular Legendrian unfoldings of multi-germs on a corner.

Exact jet algebra, tangent spaces, classification of simple multi-germs,
construction of stable unfoldings and numerical tracing of their fronts.
"""
__version__ = "0.1.0"

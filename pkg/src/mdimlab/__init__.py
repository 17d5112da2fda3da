"""Desk-scale laboratory for metric mean dimension and its measure-theoretic counterparts."""
__version__ = "0.1.0"

"""Exact enumeration tools for return counts in group rings and P-recursiveness."""

__version__ = "0.1.0"

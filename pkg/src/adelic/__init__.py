"""Exact arithmetic for adelic hermitian vector bundles and the lcm of multinomials."""

__version__ = "0.1.0"

"""Executable linear algebra for microlocal sheaves on nodal curves and their quasi-Hamiltonian moduli."""

__version__ = "0.1.0"

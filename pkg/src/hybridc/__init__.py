"""Two-level compiler for Hamiltonian simulation on hybrid qubit/qumode hardware."""

__version__ = "0.1.0"

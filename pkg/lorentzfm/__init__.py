"""LorentzFM - factorization machines with triangle pooling on the hyperboloid."""

__version__ = "0.1.0"

"""LorentzFM test suite."""

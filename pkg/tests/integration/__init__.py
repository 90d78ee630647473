"""Integration tests for LorentzFM."""

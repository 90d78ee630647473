"""Unit tests for LorentzFM."""

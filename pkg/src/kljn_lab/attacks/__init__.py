"""Eavesdropping attacks on the KLJN channel."""

"""Exact re-derivation toolkit for the K(2)-local homotopy of Z."""

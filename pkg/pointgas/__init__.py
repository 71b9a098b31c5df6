"""Numerical toolkit for the weighted Dirichlet-form model of fermions with point interactions."""

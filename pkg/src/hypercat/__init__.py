"""Hypergeometric coherent states, k-hypercats and Kerr-evolved superpositions."""

"""Rationalizability of consumer data through c-cyclical monotonicity."""

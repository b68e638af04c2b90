"""Classification of line spreads of PG(3,q) and their translation planes."""

__version__ = "0.1.0"

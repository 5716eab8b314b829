"""Product-code FEC toolkit: BCH components, iBDD / ideal iBDD / iBDD-SR, density evolution."""

__version__ = "0.1.0"

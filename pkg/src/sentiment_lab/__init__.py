"""News-sentiment signal laboratory.

Turns daily market-wrap summaries into a cumulative sentiment index and
measures how it lines up with forward equity returns across markets.
"""

__version__ = "0.1.0"

DEFAULT_GRID = tuple(range(5, 250, 5))
MARKETS = ("US_Tech", "US", "Japan", "Europe", "UK", "Emerging")

"""Count-based difficulty measures for text classification datasets."""

__version__ = "0.1.0"

"""newslens: news coverage and framing analytics pipeline."""

__version__ = "0.1.0"

"""Code-to-comment translation with a GRU encoder-decoder and code attention."""

__version__ = "0.1.0"

"""Cross-lingual projection of span-based clinical annotations."""

__version__ = "0.1.0"

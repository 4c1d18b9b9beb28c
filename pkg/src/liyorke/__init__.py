"""Li-Yorke and measurable sensitivity laboratory."""
__version__ = "0.1.0"

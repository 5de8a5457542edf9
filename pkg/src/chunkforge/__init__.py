"""chunkforge: receipt OCR chunk-dataset builder and evaluation service."""

__version__ = "0.1.0"

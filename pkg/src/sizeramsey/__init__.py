"""Host graphs, colourings and embeddings for size-Ramsey experiments on cubic graphs."""
__version__ = "0.1.0"

"""TYPELINE: a typed, clustered instruction set with a compiler and cycle simulator."""

__version__ = "0.1.0"

"""Conforming virtual elements on polygonal meshes with curved edges."""

__version__ = "0.1.0"

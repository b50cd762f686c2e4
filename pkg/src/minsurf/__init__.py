"""Computational toolkit for embedded minimal surfaces.

Submodules are imported on demand: ``from minsurf import catalog``.
"""
__version__ = "0.1.0"

__all__ = ["symexpr", "diffpoly", "weierstrass", "catalog", "shiffman", "kdvlab",
           "diagnostics", "mse", "limits", "cli", "mesh", "report", "errors", "acceptance"]

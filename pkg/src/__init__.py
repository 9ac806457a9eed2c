"""
subfins - Numerical sub-Finsler geometry: metrics, geodesics, connections and sub-Laplacians.
"""
__version__ = "1.0.0"

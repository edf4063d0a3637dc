"""Local mixing experiments for abelian covers of cusped hyperbolic surfaces."""
__version__ = "0.1.0"
__all__ = ["__version__"]

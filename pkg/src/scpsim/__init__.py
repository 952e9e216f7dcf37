"""scpsim: classical simulation of quantum circuits followed by sparse post-processing."""
__version__ = "0.1.0"

"""AES-CBC testbed with a microcontroller timing model and hop-by-hop relay simulator"""

__version__ = "1.0.0"

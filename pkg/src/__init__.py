"""Asymmetric spatio-temporal masking for skeleton representation learning"""

__version__ = "1.0.0"

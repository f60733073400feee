from .mask_renderer import MaskPreviewRenderer

__all__ = ['MaskPreviewRenderer']

from .parser import build_parser, AsmaArgumentParser
from .commands import dispatch, resolve_config, preview_rows, checkpoint_info

__all__ = ['build_parser', 'AsmaArgumentParser', 'dispatch', 'resolve_config', 'preview_rows', 'checkpoint_info']

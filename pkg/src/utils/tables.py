"""CSV result tables"""
from pathlib import Path
from typing import Dict, List, Sequence, Union

import pandas as pd

from .io import atomic_write_text


def table_csv(rows: List[Dict], columns: Sequence[str]) -> str:
    """Render rows as CSV with a fixed column order; missing values become empty fields"""
    return pd.DataFrame(list(rows), columns=list(columns)).to_csv(index=False, lineterminator='\n')


def write_table(path: Union[str, Path], rows: List[Dict], columns: Sequence[str]) -> Path:
    return atomic_write_text(path, table_csv(rows, columns))

# hardylab/utils/csv_tools.py
from typing import Any, Dict, List, Sequence

import pandas as pd

FLOAT_FORMAT = "%.17g"


def records_to_csv(records: List[Dict[str, Any]], columns: Sequence[str]) -> str:
    """
    CSV with a fixed column order, a header row and floats at 17 significant
    digits; `None` becomes an empty cell.
    """
    df = pd.DataFrame.from_records(records, columns=list(columns))
    for col in df.columns:
        if df[col].dtype == bool:
            df[col] = df[col].map({True: "true", False: "false"})
    return df.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def read_csv(path) -> pd.DataFrame:
    df = pd.read_csv(path)
    df.columns = [str(c).strip().lower().replace(" ", "_") for c in df.columns]
    return df

import logging
from pathlib import Path
from typing import Union

import pandas as pd

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"


def save_dataframe_to_csv(save_path: Union[Path, str], dataframe: pd.DataFrame, file_name: str) -> Path:
    """Write without the index and with round-trip float precision, so equal inputs give equal bytes."""
    if not file_name.endswith(".csv"):
        file_name = f"{file_name}.csv"

    Path(save_path).mkdir(exist_ok=True, parents=True)
    csv_file_path = Path(save_path) / file_name
    dataframe.to_csv(csv_file_path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")

    logger.info(f"Saved {len(dataframe)} rows to {csv_file_path}")
    return csv_file_path

import json
import logging
from pathlib import Path
from typing import Union

import numpy as np

logger = logging.getLogger(__name__)


def _to_json_compatible(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def save_dictionary_to_json(save_path: Union[Path, str], dictionary: dict, file_name: str) -> Path:
    if file_name.split(".")[-1] != "json":
        file_name = f"{file_name}.json"

    Path(save_path).mkdir(exist_ok=True, parents=True)
    json_file_path = Path(save_path) / file_name
    json_file_path.write_text(json.dumps(dictionary, indent=4, default=_to_json_compatible) + "\n")

    logger.info(f"Saved dictionary {file_name} as json at: {json_file_path}")
    return json_file_path

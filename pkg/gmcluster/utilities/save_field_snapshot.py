import logging
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

LITTLE_ENDIAN_FLOAT64 = "<f8"


def save_binary_array(file_path: Union[Path, str], *arrays: np.ndarray) -> Path:
    """Concatenate arrays, row-major, as flat little-endian float64."""
    file_path = Path(file_path)
    file_path.parent.mkdir(exist_ok=True, parents=True)
    with open(file_path, "wb") as binary_file:
        for array in arrays:
            binary_file.write(np.ascontiguousarray(array, dtype=LITTLE_ENDIAN_FLOAT64).tobytes(order="C"))
    return file_path


def save_field_snapshot(
    folder_path: Union[Path, str],
    file_stem: str,
    u_field: np.ndarray,
    v_field: np.ndarray,
    header: Dict[str, Union[float, int, str]],
) -> Tuple[Path, Path]:
    """
    `<stem>.bin` holds u then v, each of shape (n_ρ+1, n_θ); `<stem>.hdr` holds `key = value` lines.
    """
    if u_field.shape != v_field.shape:
        raise ValueError(f"u and v snapshots differ in shape: {u_field.shape} vs {v_field.shape}")

    folder_path = Path(folder_path)
    binary_path = save_binary_array(folder_path / f"{file_stem}.bin", u_field, v_field)

    header_lines = [
        f"rows = {u_field.shape[0]}",
        f"columns = {u_field.shape[1]}",
        "fields = u, v",
        f"dtype = {LITTLE_ENDIAN_FLOAT64}",
        "order = row-major",
    ]
    header_lines += [f"{key} = {value!r}" if isinstance(value, float) else f"{key} = {value}" for key, value in header.items()]
    header_path = folder_path / f"{file_stem}.hdr"
    header_path.write_text("\n".join(header_lines) + "\n")

    logger.debug(f"Saved field snapshot {binary_path.name} ({u_field.shape[0]}x{u_field.shape[1]})")
    return binary_path, header_path


def load_field_snapshot(binary_path: Union[Path, str]) -> Tuple[np.ndarray, np.ndarray, Dict[str, str]]:
    binary_path = Path(binary_path)
    header = {}
    for line in binary_path.with_suffix(".hdr").read_text().splitlines():
        key, _, value = line.partition("=")
        header[key.strip()] = value.strip()
    shape = (int(header["rows"]), int(header["columns"]))
    values = np.fromfile(binary_path, dtype=LITTLE_ENDIAN_FLOAT64)
    u_field, v_field = values.reshape((2,) + shape)
    return u_field, v_field, header

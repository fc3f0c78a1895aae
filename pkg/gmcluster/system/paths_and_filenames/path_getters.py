import os
import socket
import time
from datetime import datetime
from pathlib import Path
from typing import Optional, Union

from gmcluster.system.paths_and_filenames.file_and_folder_names import (
    BASE_GMCLUSTER_DATA_FOLDER_NAME,
    DATA_FOLDER_ENVIRONMENT_VARIABLE,
    FIELD_SNAPSHOTS_FOLDER_NAME,
    FIELD_SNAPSHOT_FILE_STEM,
    LOGS_INFO_AND_SETTINGS_FOLDER_NAME,
    LOG_FILE_FOLDER_NAME,
    logger,
)


def os_independent_home_dir():
    return str(Path.home())


def get_log_file_path():
    log_folder_path = Path(get_gmcluster_data_folder_path()) / LOGS_INFO_AND_SETTINGS_FOLDER_NAME / LOG_FILE_FOLDER_NAME
    log_folder_path.mkdir(exist_ok=True, parents=True)
    log_file_path = log_folder_path / create_log_file_name()
    return str(log_file_path)


def create_log_file_name():
    return "log_" + time.strftime("%m-%d-%Y-%H_%M_%S") + ".log"


gmcluster_data_folder_path = None


def get_gmcluster_data_folder_path(create_folder: bool = True):
    """Data root: `$GMCLUSTER_DATA_FOLDER` if set, otherwise `~/gmcluster_data`."""
    global gmcluster_data_folder_path

    if gmcluster_data_folder_path is None:
        environment_root = os.environ.get(DATA_FOLDER_ENVIRONMENT_VARIABLE)
        if environment_root:
            gmcluster_data_folder_path = Path(environment_root)
        else:
            gmcluster_data_folder_path = Path(os_independent_home_dir(), BASE_GMCLUSTER_DATA_FOLDER_NAME)

        if create_folder:
            gmcluster_data_folder_path.mkdir(exist_ok=create_folder, parents=True)

    return str(gmcluster_data_folder_path)


def get_subcommand_output_folder_path(
    subcommand_name: str,
    output_folder: Optional[Union[str, Path]] = None,
    create_folder: bool = True,
) -> Path:
    if output_folder is not None:
        folder_path = Path(output_folder)
    else:
        folder_path = Path(get_gmcluster_data_folder_path()) / subcommand_name.replace("-", "_")

    if create_folder:
        folder_path.mkdir(exist_ok=True, parents=True)
    logger.debug(f"Output folder for `{subcommand_name}`: {folder_path}")
    return folder_path


def get_field_snapshots_folder_path(output_folder_path: Union[str, Path], create_folder: bool = True) -> Path:
    folder_path = Path(output_folder_path) / FIELD_SNAPSHOTS_FOLDER_NAME
    if create_folder:
        folder_path.mkdir(exist_ok=True, parents=True)
    return folder_path


def get_field_snapshot_file_stem(snapshot_index: int) -> str:
    return f"{FIELD_SNAPSHOT_FILE_STEM}_{snapshot_index:05d}"


def get_gmt_offset_string():
    gmt_offset_int = int(time.localtime().tm_gmtoff / 60 / 60)
    return f"{gmt_offset_int:+}"


def get_iso6201_time_string(timespec: str = "milliseconds", make_filename_friendly: bool = True):
    iso6201_timestamp = datetime.now().isoformat(timespec=timespec)
    gmt_offset_string = f"_gmt{get_gmt_offset_string()}"
    iso6201_timestamp_w_gmt = iso6201_timestamp + gmt_offset_string
    if make_filename_friendly:
        iso6201_timestamp_w_gmt = iso6201_timestamp_w_gmt.replace(":", "_")
        iso6201_timestamp_w_gmt = iso6201_timestamp_w_gmt.replace(".", "ms")
    return iso6201_timestamp_w_gmt


def get_host_name() -> str:
    return socket.gethostname()

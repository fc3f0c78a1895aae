import logging

logger = logging.getLogger(__name__)

# environment
DATA_FOLDER_ENVIRONMENT_VARIABLE = "GMCLUSTER_DATA_FOLDER"

# directory names
BASE_GMCLUSTER_DATA_FOLDER_NAME = "gmcluster_data"
LOGS_INFO_AND_SETTINGS_FOLDER_NAME = "logs_info_and_settings"
LOG_FILE_FOLDER_NAME = "logs"
FIELD_SNAPSHOTS_FOLDER_NAME = "field_snapshots"

# run bookkeeping
RESOLVED_RUN_CONFIG_JSON_FILE_NAME = "resolved_run_config.json"
RUN_METADATA_JSON_FILE_NAME = "run_metadata.json"

# ground-state
GROUND_STATE_PROFILE_CSV_FILE_NAME = "ground_state_profile.csv"
GROUND_STATE_MOMENTS_JSON_FILE_NAME = "ground_state_moments.json"

# green
GREEN_KERNEL_TABLE_CSV_FILE_NAME = "green_kernel_table.csv"
GREEN_EXPANSION_COEFFICIENTS_JSON_FILE_NAME = "green_expansion_coefficients.json"

# reduce
SPIKE_POSITIONS_JSON_FILE_NAME = "spike_positions.json"
SPIKE_GAPS_CSV_FILE_NAME = "spike_gaps.csv"

# stability
SMALL_SPECTRUM_REPORT_JSON_FILE_NAME = "small_spectrum_report.json"
MATRIX_A_CSV_FILE_NAME = "matrix_A.csv"
MATRIX_M_CSV_FILE_NAME = "matrix_M.csv"

# nlep
NLEP_SPECTRUM_CSV_FILE_NAME = "nlep_spectrum.csv"
NLEP_TAU_SWEEP_CSV_FILE_NAME = "nlep_tau_sweep.csv"

# simulate
SPIKE_TRACKS_CSV_FILE_NAME = "spike_tracks.csv"
SIMULATION_DIAGNOSTICS_CSV_FILE_NAME = "simulation_diagnostics.csv"
SIMULATION_SUMMARY_JSON_FILE_NAME = "run_summary.json"
GRID_COORDINATES_BIN_FILE_NAME = "grid_coordinates_xy.bin"
FIELD_SNAPSHOT_FILE_STEM = "field_snapshot"

# verify-all
VERIFICATION_REPORT_JSON_FILE_NAME = "verification_report.json"

# emoji strings
SPARKLES_EMOJI_STRING = "\U00002728"
SKULL_EMOJI_STRING = "\U0001F480"

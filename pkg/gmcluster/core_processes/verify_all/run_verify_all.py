import logging
from typing import Any, Dict

import pydantic
from numpy.linalg import LinAlgError
from rich.console import Console
from rich.progress import track

from gmcluster.core_processes.run_subcommands.subcommand_run import SubcommandRun, ground_state_and_moments
from gmcluster.core_processes.verify_all.verification_checks import VerificationContext, suite_for
from gmcluster.core_processes.verify_all.verification_models import VerificationCheck, VerificationReport
from gmcluster.data_layer.run_config_models import RunConfig
from gmcluster.system.exceptions import GmClusterError, VerificationFailure
from gmcluster.system.paths_and_filenames.file_and_folder_names import (
    SKULL_EMOJI_STRING,
    SPARKLES_EMOJI_STRING,
    VERIFICATION_REPORT_JSON_FILE_NAME,
)

logger = logging.getLogger(__name__)


def run_verification_suite(config: RunConfig, show_progress: bool = True) -> VerificationReport:
    ground_state, moments = ground_state_and_moments(config.ground_state)
    context = VerificationContext(config=config, ground_state=ground_state, moments=moments)
    suite = suite_for(config)

    report = VerificationReport()
    iterator = track(suite, description="Verifying...", console=Console(stderr=True)) if show_progress else suite
    for area, check_function in iterator:
        logger.info(f"Verifying {area}")
        try:
            checks = check_function(context)
        except (GmClusterError, pydantic.ValidationError, ValueError, ArithmeticError, LinAlgError) as error:
            logger.error(f"{area} raised {type(error).__name__}: {error}")
            checks = [
                VerificationCheck(
                    name=f"{area}_completed",
                    group=area,
                    passed=False,
                    measured=None,
                    threshold=None,
                    comparison="no error",
                    detail=f"{type(error).__name__}: {error}",
                )
            ]
        for check in checks:
            log = logger.info if check.passed else logger.error
            verdict = "PASS" if check.passed else "FAIL"
            log(f"{verdict} {check.name}: {check.measured} {check.comparison} {check.threshold}")
        report.checks.extend(checks)
    return report


def run_verify_all_subcommand(config: RunConfig, show_progress: bool = True) -> Dict[str, Any]:
    run = SubcommandRun.start("verify-all", config)
    report = run_verification_suite(config, show_progress=show_progress)
    run.save_json(report.to_dict(), VERIFICATION_REPORT_JSON_FILE_NAME)

    summary = {"passed": report.passed, "checks_run": len(report.checks), "failed_checks": report.failed_checks()}
    if not report.passed:
        run.finish(summary)
        raise VerificationFailure(
            f"{SKULL_EMOJI_STRING} {len(report.failed_checks())} of {len(report.checks)} checks failed: "
            f"{', '.join(report.failed_checks())}"
        )
    logger.success(f"{SPARKLES_EMOJI_STRING} All {len(report.checks)} verification checks passed")
    return run.finish(summary)

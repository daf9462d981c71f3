"""Logging configuration for uncertainty_lab."""

import logging
import sys

# Package logger; library modules fetch it by name
logger = logging.getLogger("uncertainty_lab")

# numpy RuntimeWarnings and scipy IntegrationWarnings arrive here once captured
warnings_logger = logging.getLogger("py.warnings")

DEFAULT_FORMAT = "%(message)s"
VERBOSE_FORMAT = "%(levelname)s [%(module)s]: %(message)s"


def setup_logging(verbose: bool = False, quiet: bool = False) -> None:
    """Configure logging for the CLI.

    Floating-point warnings raised inside numpy or scipy (overflow in an
    unscaled Bessel value, a quadrature that did not converge) are routed
    to the same stderr handler, so `-q` and `-v` govern them too.

    Args:
        verbose: If True, show DEBUG messages (Miller start orders, padding
            radii, singular values) prefixed with level and module.
        quiet: If True, suppress INFO messages (only show WARNING+).
    """
    if quiet:
        level = logging.WARNING
    elif verbose:
        level = logging.DEBUG
    else:
        level = logging.INFO

    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(VERBOSE_FORMAT if verbose else DEFAULT_FORMAT))

    for target in (logger, warnings_logger):
        target.handlers.clear()
        target.addHandler(handler)
        target.propagate = target is logger
    logger.setLevel(level)
    logging.captureWarnings(True)


def get_logger() -> logging.Logger:
    """Get the uncertainty_lab logger."""
    return logger

import logging.config


def setup_logging(log_level: str = "INFO", log_format: str = "simple"):
    """Configure package logging.

    Reports go to stdout, so every handler writes to stderr.
    """
    log_level = log_level.upper()
    if log_format == "json":
        formatter = "json"
    elif log_level == "DEBUG":
        formatter = "detailed"
    else:
        formatter = "simple"

    LOGGING_CONFIG = {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {
            "detailed": {
                "format": "%(asctime)s | %(levelname)-8s | %(name)s\n%(pathname)s:%(lineno)d\n%(message)s",
            },
            "simple": {
                "format": "%(asctime)s | %(levelname)-8s | %(name)-20s | %(message)s",
            },
            "json": {
                "()": "pythonjsonlogger.jsonlogger.JsonFormatter",
                "format": "%(asctime)s %(levelname)s %(name)s %(message)s",
            },
        },
        "handlers": {
            "console": {
                "formatter": formatter,
                "class": "logging.StreamHandler",
                "stream": "ext://sys.stderr",
            },
        },
        "loggers": {
            "": {  # root logger
                "handlers": ["console"],
                "level": "WARNING",
                "propagate": True,
            },
            "dyadic_sobolev": {
                "handlers": ["console"],
                "level": log_level,
                "propagate": False,
            },
        },
    }
    logging.config.dictConfig(LOGGING_CONFIG)

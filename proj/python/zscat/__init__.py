"""Python access to the zscat experiments."""

import json

from ._zscat import alpha, content_hash, spec_version
from . import _zscat

__all__ = ["alpha", "content_hash", "spec_version", "default_config", "config_hash", "evaluate", "run", "ZscatError"]


class ZscatError(RuntimeError):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def default_config():
    return json.loads(_zscat.default_config())


def config_hash(config):
    return _zscat.config_hash(json.dumps(config))


def evaluate(symbol, x1, x2, xi1, xi2):
    return _zscat.evaluate(json.dumps(symbol), x1, x2, xi1, xi2)


def run(subcommand, config=None, **overrides):
    """Run one subcommand; returns (report dict, {file name: bytes}).

    Outputs are written to disk only when the config has a non-empty "out".
    """
    cfg = default_config()
    cfg.update(config or {})
    cfg.update(overrides)
    code, report, files = _zscat.run(subcommand, json.dumps(cfg))
    report = json.loads(report)
    if code != 0:
        raise ZscatError(code, report.get("error", "failed"))
    return report, files

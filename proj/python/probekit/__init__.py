# Copyright 2026 The probekit Authors
# SPDX-License-Identifier: Apache-2.0
"""Probing classifiers for speaker gender over hidden-state sequences."""

import json

from ._probekit import (
    ArgumentError,
    ConflictError,
    DimensionMismatch,
    Error,
    FormatError,
    InfeasibleSplit,
    IoError,
    ProbeParams,
    TrainingError,
    ValidationError,
    early_mass,
    forward,
    init_params,
    loss_and_grads,
    pool_max,
    pool_mean,
    positional_indices,
    predict_checkpoint,
    read_pack,
    resample,
    write_pack,
)
from . import _probekit

__version__ = "0.1.0"


def classification_report(preds, labels):
    return json.loads(_probekit.classification_report_json(list(preds), list(labels)))


def linreg(x, y):
    return json.loads(_probekit.linreg_json(list(x), list(y)))


def gender_score(outputs_tsv, annotations_tsv, judgments_tsv=None):
    """Scores translations given as TSV text; judgments are merged when given."""
    return json.loads(_probekit.gender_score_json(outputs_tsv, annotations_tsv, judgments_tsv))


__all__ = [name for name in dir() if not name.startswith("_") and name != "json"]

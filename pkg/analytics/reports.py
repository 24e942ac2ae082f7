"""
Tabular renderings of residue results
"""

import json
import logging
from pathlib import Path
from typing import Optional, Union

import pandas as pd

from .residue import ResidueReport

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = {
    'vocab_size': 'Vocab',
    'ascii_vocab': 'ASCII vocab',
    'scrap_without_entropy': 'Scrap # (w/o Ent.)',
    'scrap_without_entropy_percent': '% (w/o Ent.)',
    'scrap_with_entropy': 'Scrap # (Ent.)',
    'scrap_with_entropy_percent': '% (Ent.)',
}


def summary_frame(report: ResidueReport, name: str = 'tokenizer') -> pd.DataFrame:
    """One-row prevalence table: counts and percentages with and without the entropy filter"""
    summary = report.summary()
    row = {'Tokenizer': name}
    row.update({label: summary[key] for key, label in SUMMARY_COLUMNS.items()})
    return pd.DataFrame([row])


def records_frame(report: ResidueReport, category: Optional[str] = None) -> pd.DataFrame:
    """Token records, optionally restricted to one category, lowest ratio first"""
    records = report.records if category is None else report.by_category(category)
    frame = pd.DataFrame([r.to_dict() for r in records])
    if frame.empty:
        return frame
    return frame.sort_values(['ratio', 'score', 'token'], na_position='last').reset_index(drop=True)


def render_frame(frame: pd.DataFrame) -> str:
    return frame.to_string(index=False)


def write_csv_with_provenance(frame: pd.DataFrame, path: Union[str, Path], provenance: dict):
    """CSV preceded by '#'-prefixed JSON provenance lines"""
    with open(path, 'w', encoding='utf-8', newline='') as f:
        for key in sorted(provenance):
            f.write(f"# {key}: {json.dumps(provenance[key], sort_keys=True, ensure_ascii=False)}\n")
        frame.to_csv(f, index=False, lineterminator='\n')
    logger.info(f"Wrote {len(frame)} rows to {path}")


def read_csv_with_provenance(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path, comment='#')

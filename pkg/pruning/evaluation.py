"""
Corpus-level comparison of base and lite encodings
"""

import logging
from typing import Iterable, List, Sequence

import pandas as pd

from .lite import ORIGINAL, SPLIT_ONLY, SPLIT_REMERGE, LiteTokenizer, encode_lite

logger = logging.getLogger(__name__)

COMPARE_MODES = (ORIGINAL, SPLIT_ONLY, SPLIT_REMERGE)


def mode_counts(lite: LiteTokenizer, docs: Iterable[bytes], only_affected: bool = False) -> pd.DataFrame:
    """
    Token count per document under each mode

    Args:
        lite: lite tokenizer
        docs: documents
        only_affected: keep only documents whose base encoding holds a removed id

    Returns:
        DataFrame with one row per kept document and one column per mode
    """
    rows = []
    for index, doc in enumerate(docs):
        base = lite.base.encode(doc).final_ids
        if only_affected and not lite.imr.intersection(base):
            continue
        row = {'document': index, ORIGINAL: len(base)}
        for mode in (SPLIT_ONLY, SPLIT_REMERGE):
            row[mode] = len(encode_lite(lite, doc, mode))
        rows.append(row)
    return pd.DataFrame(rows, columns=['document'] + list(COMPARE_MODES))


def compare_modes(counts: pd.DataFrame, lite: LiteTokenizer) -> pd.DataFrame:
    """Vocabulary size and average tokens per document for each mode"""
    vocab_sizes = {ORIGINAL: len(lite.base), SPLIT_ONLY: len(lite), SPLIT_REMERGE: len(lite)}
    rows = []
    for mode in COMPARE_MODES:
        column = counts[mode] if not counts.empty else pd.Series(dtype='int64')
        rows.append({
            'mode': mode,
            'vocab_size': vocab_sizes[mode],
            'documents': int(column.size),
            'total_tokens': int(column.sum()),
            'avg_tokens': round(float(column.mean()), 4) if column.size else 0.0,
        })
    return pd.DataFrame(rows, columns=['mode', 'vocab_size', 'documents', 'total_tokens', 'avg_tokens'])


def token_inflation(lite: LiteTokenizer, docs: Sequence[bytes]) -> float:
    """Ratio of split-remerge to base token totals; 1.0 on an empty corpus"""
    base_total = lite_total = 0
    for doc in docs:
        base_total += len(lite.base.encode(doc).final_ids)
        lite_total += len(encode_lite(lite, doc, SPLIT_REMERGE))
    return lite_total / base_total if base_total else 1.0

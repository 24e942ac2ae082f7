"""
Residue classification

A token is an intermediate merge residue when it is eligible (not base, not
special, ASCII only), observed, rarely survives to the final tokenization
(FI ratio R <= r) and has a predictable neighbor on at least one side
(entropy score S <= s).
"""

import logging
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence

import pandas as pd

from bpe.exceptions import IntegrityError
from bpe.tokenizer import TokenizerModel

from .corpus_stats import StatsShard, neighbor_entropy

logger = logging.getLogger(__name__)

RESIDUE = 'residue'
KEPT_LOW_RATIO = 'kept_low_ratio'
FREQUENT = 'frequent'
UNOBSERVED = 'unobserved'
EXCLUDED = 'excluded'
CATEGORIES = (RESIDUE, KEPT_LOW_RATIO, FREQUENT, UNOBSERVED, EXCLUDED)

REPORT_FORMAT = 'residue-report'
REPORT_VERSION = 1


@dataclass(frozen=True)
class Thresholds:
    """Ratio threshold r in [0, 1] and entropy threshold s in nats"""
    ratio: float
    entropy: float

    def __post_init__(self):
        if not 0.0 <= self.ratio <= 1.0:
            raise ValueError(f"Ratio threshold must lie in [0, 1], got {self.ratio}")
        if self.entropy < 0:
            raise ValueError(f"Entropy threshold must be non-negative, got {self.entropy}")

    def to_dict(self) -> dict:
        return {'ratio': self.ratio, 'entropy': self.entropy}


@dataclass
class TokenRecord:
    token: int
    text: str
    f1: int
    f2: int
    ratio: Optional[float]
    s_left: float
    s_right: float
    score: float
    ascii_only: bool
    eligible: bool
    category: str = EXCLUDED

    @property
    def observed(self) -> bool:
        return self.f1 + self.f2 > 0

    def to_dict(self) -> dict:
        return asdict(self)


def fi_ratio(stats: StatsShard, token: int) -> Optional[float]:
    """R = F1 / (F1 + F2); None when the token was never formed"""
    f1 = stats.f1.get(token, 0)
    total = f1 + stats.f2.get(token, 0)
    if total == 0:
        return None
    return f1 / total


def is_eligible(model: TokenizerModel, token: int) -> bool:
    return token not in model.base_ids and token not in model.specials and model.is_ascii(token)


def categorize(record: TokenRecord, thresholds: Thresholds) -> str:
    if not record.eligible:
        return EXCLUDED
    if not record.observed:
        return UNOBSERVED
    if record.ratio > thresholds.ratio:
        return FREQUENT
    if record.score <= thresholds.entropy:
        return RESIDUE
    return KEPT_LOW_RATIO


def score_tokens(stats: StatsShard, model: TokenizerModel) -> List[TokenRecord]:
    """Ratio and entropy for every token, without a category"""
    records = []
    for token in range(len(model)):
        s_left, s_right = neighbor_entropy(stats, token)
        records.append(TokenRecord(
            token=token,
            text=model.display(token),
            f1=stats.f1.get(token, 0),
            f2=stats.f2.get(token, 0),
            ratio=fi_ratio(stats, token),
            s_left=s_left,
            s_right=s_right,
            score=min(s_left, s_right),
            ascii_only=model.is_ascii(token),
            eligible=is_eligible(model, token),
        ))
    return records


@dataclass
class ResidueReport:
    """
    Classified tokens for one (stats, thresholds) pair

    Args:
        model_hash: tokenizer the statistics were built from
        thresholds: (r, s)
        records: one TokenRecord per vocabulary id
        specials: special token ids, left out of the ASCII vocabulary count
    """
    model_hash: str
    thresholds: Thresholds
    records: List[TokenRecord]
    specials: FrozenSet[int] = field(default_factory=frozenset)

    @property
    def imr(self) -> FrozenSet[int]:
        return frozenset(r.token for r in self.records if r.category == RESIDUE)

    def removal_set(self, include_unobserved: bool = False) -> FrozenSet[int]:
        """IMR, optionally widened with eligible tokens never seen in the corpus"""
        categories = {RESIDUE, UNOBSERVED} if include_unobserved else {RESIDUE}
        return frozenset(r.token for r in self.records if r.category in categories)

    def by_category(self, category: str) -> List[TokenRecord]:
        return [r for r in self.records if r.category == category]

    def category_counts(self) -> Dict[str, int]:
        counts = Counter(r.category for r in self.records)
        return {category: counts.get(category, 0) for category in CATEGORIES}

    def summary(self) -> dict:
        """
        Prevalence summary

        Returns:
            vocab size, ASCII vocabulary size, low-ratio counts without and
            with the entropy filter, and their percentages of the ASCII
            vocabulary
        """
        ascii_vocab = sum(1 for r in self.records if r.ascii_only and r.token not in self.specials)
        without_entropy = sum(
            1 for r in self.records
            if r.eligible and r.observed and r.ratio <= self.thresholds.ratio
        )
        with_entropy = len(self.imr)
        return {
            'vocab_size': len(self.records),
            'ascii_vocab': ascii_vocab,
            'scrap_without_entropy': without_entropy,
            'scrap_without_entropy_percent': _percent(without_entropy, ascii_vocab),
            'scrap_with_entropy': with_entropy,
            'scrap_with_entropy_percent': _percent(with_entropy, ascii_vocab),
            'categories': self.category_counts(),
        }

    def header(self, run_config: Optional[dict] = None) -> dict:
        return {
            'format': REPORT_FORMAT,
            'version': REPORT_VERSION,
            'model_hash': self.model_hash,
            'thresholds': self.thresholds.to_dict(),
            'specials': sorted(self.specials),
            'summary': self.summary(),
            'run_config': run_config or {},
        }

    def to_rows(self, run_config: Optional[dict] = None) -> List[dict]:
        """JSON-lines payload: header first, then one row per token"""
        return [self.header(run_config)] + [r.to_dict() for r in self.records]

    @classmethod
    def from_rows(cls, rows: Sequence[dict]) -> 'ResidueReport':
        if not rows or rows[0].get('format') != REPORT_FORMAT:
            raise IntegrityError("Not a residue report")
        header = rows[0]
        try:
            thresholds = Thresholds(**header['thresholds'])
            records = [TokenRecord(**row) for row in rows[1:]]
        except (KeyError, TypeError, ValueError) as e:
            raise IntegrityError(f"Malformed residue report: {e}")
        return cls(
            model_hash=header['model_hash'],
            thresholds=thresholds,
            records=records,
            specials=frozenset(header.get('specials', [])),
        )


def _percent(count: int, total: int) -> float:
    return round(100.0 * count / total, 4) if total else 0.0


def classify(stats: StatsShard, model: TokenizerModel, thresholds: Thresholds) -> ResidueReport:
    """
    Label every token of `model`

    Args:
        stats: corpus statistics built from `model`
        model: the tokenizer
        thresholds: (r, s)

    Returns:
        ResidueReport whose imr holds the residue tokens
    """
    if stats.model_hash != model.content_hash:
        raise IntegrityError(
            f"Statistics were built from tokenizer {stats.model_hash[:12]}, not {model.content_hash[:12]}"
        )
    records = score_tokens(stats, model)
    for record in records:
        record.category = categorize(record, thresholds)

    report = ResidueReport(
        model_hash=model.content_hash,
        thresholds=thresholds,
        records=records,
        specials=model.specials,
    )
    logger.info(
        f"Classified {len(records)} tokens at r={thresholds.ratio}, s={thresholds.entropy}: "
        f"{len(report.imr)} residues"
    )
    return report


def residue_ids(records: Iterable[TokenRecord], thresholds: Thresholds) -> FrozenSet[int]:
    return frozenset(record.token for record in records if categorize(record, thresholds) == RESIDUE)


def sweep(
        stats: StatsShard,
        model: TokenizerModel,
        ratio_grid: Sequence[float],
        entropy_grid: Sequence[float],
) -> pd.DataFrame:
    """
    IMR size over a threshold grid

    Tokens are scored once; each grid point only re-applies the thresholds.

    Returns:
        DataFrame with columns ratio, entropy, imr_size, imr_percent, one row
        per (r, s) in ascending order
    """
    if not ratio_grid or not entropy_grid:
        raise ValueError("Threshold grids must not be empty")
    if stats.model_hash != model.content_hash:
        raise IntegrityError("Statistics and tokenizer hashes differ")

    records = score_tokens(stats, model)
    ascii_vocab = sum(1 for r in records if r.ascii_only and r.token not in model.specials)

    rows = []
    for ratio in sorted(set(ratio_grid)):
        for entropy_threshold in sorted(set(entropy_grid)):
            size = len(residue_ids(records, Thresholds(ratio, entropy_threshold)))
            rows.append({
                'ratio': ratio,
                'entropy': entropy_threshold,
                'imr_size': size,
                'imr_percent': _percent(size, ascii_vocab),
            })
    logger.info(f"Swept {len(rows)} threshold pairs")
    return pd.DataFrame(rows, columns=['ratio', 'entropy', 'imr_size', 'imr_percent'])

"""
Checks against real tokenizer assets

Set RESIDUE_ASSETS_DIR to a directory holding a byte-level vocab.json and
merges.txt (Qwen-style), and optionally a corpus/ directory of English text.
"""

import os
from pathlib import Path

import pytest

from analytics.corpus import load_corpus
from analytics.corpus_stats import accumulate
from analytics.residue import Thresholds, classify
from bpe.loaders import load_hf
from bpe.tokenizer import render_tokens
from pruning.lite import ORIGINAL, SPLIT_REMERGE, build_lite, encode_lite

ASSETS_DIR = os.environ.get('RESIDUE_ASSETS_DIR')

pytestmark = pytest.mark.skipif(not ASSETS_DIR, reason='RESIDUE_ASSETS_DIR is not set')


@pytest.fixture(scope='module')
def real_model():
    assets = Path(ASSETS_DIR)
    return load_hf(assets / 'vocab.json', assets / 'merges.txt')


@pytest.mark.parametrize('text,residue,original,lite', [
    (b' corruptions', b'ruptions', '␣cor|ruptions', '␣corruption|s'),
    (b' democratically', b'atically', '␣democr|atically', '␣democratic|ally'),
])
def test_split_remerge_rows(real_model, text, residue, original, lite):
    pruned = build_lite(real_model, [real_model.token_to_id[residue]])

    assert render_tokens(real_model, encode_lite(pruned, text, ORIGINAL).ids) == original
    assert render_tokens(real_model, encode_lite(pruned, text, SPLIT_REMERGE).ids) == lite


def test_residue_prevalence(real_model):
    corpus = Path(ASSETS_DIR) / 'corpus'
    if not corpus.is_dir():
        pytest.skip('no corpus/ directory under RESIDUE_ASSETS_DIR')

    stats = accumulate(real_model, load_corpus([corpus]))
    summary = classify(stats, real_model, Thresholds(0.25, 4.0)).summary()
    assert 3.0 <= summary['scrap_with_entropy_percent'] <= 9.0

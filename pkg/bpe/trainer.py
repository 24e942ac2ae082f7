"""
Desk-scale BPE trainer
Learns a standard-flavor merge table by repeatedly merging the most frequent
adjacent pair, counted per pretoken occurrence.
"""

import logging
from collections import Counter
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .pretokenizer import Pretokenizer, PretokenizerConfig
from .tokenizer import STANDARD, MergeRule, TokenizerModel

logger = logging.getLogger(__name__)


def _merge_word(word: Tuple[int, ...], pair: Tuple[int, int], new_id: int) -> Tuple[int, ...]:
    merged = []
    i = 0
    while i < len(word):
        if i < len(word) - 1 and word[i] == pair[0] and word[i + 1] == pair[1]:
            merged.append(new_id)
            i += 2
        else:
            merged.append(word[i])
            i += 1
    return tuple(merged)


def train_tiny(
        corpus: Iterable[bytes],
        target_vocab: int,
        pretokenizer: Optional[PretokenizerConfig] = None,
        full_byte_alphabet: bool = True,
        special_tokens: Sequence[bytes] = (),
) -> TokenizerModel:
    """
    Train a small standard-flavor BPE model

    Args:
        corpus: documents as byte strings
        target_vocab: vocabulary size to reach, specials excluded
        pretokenizer: how documents are cut into pretokens
        full_byte_alphabet: start from all 256 bytes so any input encodes;
            False starts from the bytes observed in the corpus only
        special_tokens: appended after the learned tokens

    Returns:
        TokenizerModel; ties in pair frequency go to the lexicographically
        smallest (left bytes, right bytes)
    """
    pretokenizer = pretokenizer or PretokenizerConfig()
    splitter = Pretokenizer(pretokenizer)

    word_counts: Counter = Counter()
    documents = 0
    for document in corpus:
        documents += 1
        word_counts.update(splitter(document))
    if not documents or not word_counts:
        raise ValueError("Cannot train on an empty corpus")

    observed = sorted({byte for word in word_counts for byte in word})
    alphabet = list(range(256)) if full_byte_alphabet else observed
    if target_vocab < len(alphabet):
        raise ValueError(f"target_vocab {target_vocab} is smaller than the alphabet ({len(alphabet)})")

    vocab: List[bytes] = [bytes([byte]) for byte in alphabet]
    byte_to_id: Dict[int, int] = {byte: token_id for token_id, byte in enumerate(alphabet)}
    token_to_id: Dict[bytes, int] = {token: token_id for token_id, token in enumerate(vocab)}
    words: Dict[Tuple[int, ...], int] = Counter()
    for word, count in word_counts.items():
        words[tuple(byte_to_id[byte] for byte in word)] += count

    merges: List[MergeRule] = []
    while len(vocab) < target_vocab:
        pair_counts: Counter = Counter()
        for word, count in words.items():
            for pair in zip(word, word[1:]):
                pair_counts[pair] += count

        # A pair whose bytes already name a token would give that token a
        # second merge rule.
        candidates = [
            (count, pair) for pair, count in pair_counts.items()
            if vocab[pair[0]] + vocab[pair[1]] not in token_to_id
        ]
        if not candidates:
            logger.info(f"No mergeable pairs left after {len(merges)} merges")
            break

        best_count = max(count for count, _ in candidates)
        best_pair = min(
            (pair for count, pair in candidates if count == best_count),
            key=lambda pair: (vocab[pair[0]], vocab[pair[1]]),
        )

        new_id = len(vocab)
        vocab.append(vocab[best_pair[0]] + vocab[best_pair[1]])
        token_to_id[vocab[new_id]] = new_id
        merges.append(MergeRule(len(merges), best_pair[0], best_pair[1], new_id))

        updated: Dict[Tuple[int, ...], int] = Counter()
        for word, count in words.items():
            if len(word) > 1:
                word = _merge_word(word, best_pair, new_id)
            updated[word] += count
        words = updated
        logger.debug(f"merge {len(merges)}: {vocab[new_id]!r} (frequency {best_count})")

    specials = []
    for token in special_tokens:
        if token in token_to_id:
            raise ValueError(f"Special token {token!r} collides with a learned token")
        specials.append(len(vocab))
        token_to_id[token] = len(vocab)
        vocab.append(token)

    model = TokenizerModel(
        vocab=vocab,
        base_ids=range(len(alphabet)),
        merges=merges,
        flavor=STANDARD,
        pretokenizer=pretokenizer,
        specials=specials,
    )
    logger.info(f"Trained BPE model: {len(vocab)} tokens, {len(merges)} merges from {documents} documents")
    if not model.covers_all_bytes:
        logger.warning(f"Observed alphabet leaves {len(model.missing_bytes)} byte values unencodable")
    return model

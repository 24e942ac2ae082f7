import random

import pytest
from faker import Faker

from bpe.pretokenizer import NO_PRETOKENIZER, PretokenizerConfig
from bpe.tokenizer import RANK_GREEDY, STANDARD, MergeRule, TokenizerModel
from bpe.trainer import train_tiny

FAKER_SEED = 20240611
ROUND_TRIP_CASES = 10_000
ROUND_TRIP_MAX_LENGTH = 512


def build_standard_model(base, merges, specials=(), pretokenizer=None):
    """
    Standard model from readable pieces

    Args:
        base: base token strings
        merges: (left, right) string pairs in rank order; results get the next ids
        specials: special token strings appended last
    """
    vocab = [token.encode('utf-8') for token in base]
    index = {token: i for i, token in enumerate(vocab)}
    rules = []
    for rank, (left, right) in enumerate(merges):
        left, right = left.encode('utf-8'), right.encode('utf-8')
        result = left + right
        index[result] = len(vocab)
        vocab.append(result)
        rules.append(MergeRule(rank, index[left], index[right], index[result]))
    special_ids = []
    for token in specials:
        special_ids.append(len(vocab))
        vocab.append(token.encode('utf-8'))
    return TokenizerModel(
        vocab=vocab,
        base_ids=range(len(base)),
        merges=rules,
        flavor=STANDARD,
        pretokenizer=pretokenizer,
        specials=special_ids,
    )


def build_rank_greedy_model(ranked_tokens, pretokenizer=None):
    """rank_greedy model whose ranks follow the order of `ranked_tokens`"""
    vocab = [token.encode('utf-8') for token in ranked_tokens]
    return TokenizerModel(
        vocab=vocab,
        base_ids=[i for i, token in enumerate(vocab) if len(token) == 1],
        flavor=RANK_GREEDY,
        pretokenizer=pretokenizer,
        ranks=range(len(vocab)),
    )


def random_byte_strings(seed, corpus=(), count=ROUND_TRIP_CASES, max_length=ROUND_TRIP_MAX_LENGTH):
    """
    Random inputs of 0..max_length bytes

    Every other string splices fragments of `corpus` between random bytes so
    merged tokens, and therefore removed ones, show up often.
    """
    rng = random.Random(seed)
    for index in range(count):
        length = rng.randint(0, max_length)
        if index % 2 or not corpus:
            yield rng.randbytes(length)
            continue
        data = b''
        while len(data) < length:
            document = rng.choice(corpus)
            start = rng.randrange(len(document) or 1)
            data += document[start:start + rng.randint(1, 40)] + rng.randbytes(rng.randint(0, 3))
        yield data[:length]


@pytest.fixture(scope='session')
def fake():
    Faker.seed(FAKER_SEED)
    return Faker('en_US')


@pytest.fixture(scope='session')
def fixture_corpus(fake):
    """A few hundred short English-like documents, all ASCII"""
    documents = []
    for _ in range(300):
        sentence = ' '.join(fake.sentence(nb_words=12) for _ in range(2))
        documents.append(sentence.encode('ascii', errors='ignore'))
    return documents


@pytest.fixture(scope='session')
def trained_model(fixture_corpus):
    """
    Standard tokenizer of at most 200 tokens over the corpus alphabet

    Only for counting over the fixture corpus; bytes outside it do not encode.
    """
    return train_tiny(fixture_corpus, 200, full_byte_alphabet=False)


@pytest.fixture(scope='session')
def byte_model(fixture_corpus):
    """Standard tokenizer over all 256 bytes plus merges learned on the fixture corpus"""
    return train_tiny(fixture_corpus, 400)


@pytest.fixture
def abab_model():
    return build_standard_model(['a', 'b'], [('a', 'b'), ('ab', 'ab')])


@pytest.fixture
def corruption_model():
    """
    Standard model where " corruptions" encodes as ␣cor|ruptions while the
    surviving merges can still build ␣corruption
    """
    return build_standard_model(
        [' ', 'c', 'o', 'r', 'u', 'p', 't', 'i', 'n', 's'],
        [
            (' ', 'c'),
            (' c', 'o'),
            (' co', 'r'),
            ('r', 'u'),
            ('p', 't'),
            ('pt', 'i'),
            ('o', 'n'),
            ('pti', 'on'),
            ('ption', 's'),
            ('ru', 'ption'),
            ('ru', 'ptions'),
            (' cor', 'ruption'),
        ],
    )


@pytest.fixture
def greedy_model():
    """Ranks a < b < c < d < cd < bcd < ab < abcd"""
    return build_rank_greedy_model(['a', 'b', 'c', 'd', 'cd', 'bcd', 'ab', 'abcd'])


@pytest.fixture
def unsplit_pretokenizer():
    return PretokenizerConfig(mode=NO_PRETOKENIZER)

import pytest

from bpe.trainer import train_tiny


def observed(corpus, target, **kwargs):
    return train_tiny(corpus, target, full_byte_alphabet=False, **kwargs)


def test_learns_most_frequent_pair_first():
    model = observed([b'abab'], 4)

    assert [model.display(rule.result) for rule in model.merges] == ['ab', 'abab']


def test_first_merge_by_pair_frequency():
    model = observed([b'aaab aaab'], 6)

    first = model.merges[0]
    assert (model.display(first.left), model.display(first.right)) == ('a', 'a')


def test_target_equal_to_alphabet_learns_nothing():
    assert observed([b'abc'], 3).merges == ()


def test_stays_within_target(trained_model):
    assert len(trained_model) <= 200
    assert len(trained_model.merges) == len(trained_model) - len(trained_model.base_ids)


def test_deterministic(fixture_corpus, trained_model):
    assert observed(fixture_corpus, 200).content_hash == trained_model.content_hash


def test_stops_when_nothing_merges():
    model = observed([b'ab'], 50)
    assert len(model) == 3


def test_specials_appended():
    model = observed([b'abab'], 4, special_tokens=[b'<eos>'])

    assert model.vocab[-1] == b'<eos>'
    assert model.specials == {len(model) - 1}


def test_special_collision():
    with pytest.raises(ValueError):
        observed([b'abab'], 4, special_tokens=[b'ab'])


def test_empty_corpus():
    with pytest.raises(ValueError):
        train_tiny([], 300)


def test_target_below_alphabet():
    with pytest.raises(ValueError):
        observed([b'abcdef'], 3)
    with pytest.raises(ValueError):
        train_tiny([b'abcdef'], 200)


class TestByteCoverage:

    def test_default_alphabet_encodes_unseen_bytes(self):
        model = train_tiny([b'the cat sat on the mat'] * 3, 270)

        assert model.covers_all_bytes
        for data in (b'dog', b'\x00\xff\xfe', 'naïve'.encode('utf-8')):
            assert model.decode(model.encode_ids(data)) == data

    def test_observed_alphabet_reports_gaps(self):
        model = observed([b'the cat sat on the mat'] * 3, 30)

        assert not model.covers_all_bytes
        assert ord('d') in model.missing_bytes and ord('t') not in model.missing_bytes

    def test_byte_model_fixture(self, byte_model):
        assert byte_model.covers_all_bytes

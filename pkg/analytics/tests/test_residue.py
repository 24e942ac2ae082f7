import math
from collections import Counter

import pytest

from analytics.corpus_stats import F2_TRACE, StatsShard, accumulate
from analytics.reports import read_csv_with_provenance, summary_frame, write_csv_with_provenance
from analytics.residue import (
    EXCLUDED, FREQUENT, KEPT_LOW_RATIO, RESIDUE, UNOBSERVED, ResidueReport, Thresholds, TokenRecord, categorize,
    classify, fi_ratio, sweep,
)
from bpe.exceptions import IntegrityError
from conftest import build_standard_model


@pytest.fixture
def abc_model():
    return build_standard_model(['a', 'b', 'c'], [('a', 'b'), ('b', 'c'), ('ab', 'c'), ('c', 'a')])


@pytest.fixture
def abc_stats(abc_model):
    """
    ab: R = 0.1, always followed by c      -> residue
    bc: R = 0.1, three different neighbors -> kept_low_ratio
    abc: never consumed                    -> frequent
    ca: never seen                         -> unobserved
    """
    ids = abc_model.token_to_id
    a, b, c, ab, bc, abc = (ids[t] for t in (b'a', b'b', b'c', b'ab', b'bc', b'abc'))
    stats = StatsShard(
        model_hash=abc_model.content_hash,
        f2_mode=F2_TRACE,
        f1=Counter({ab: 1, bc: 1, abc: 10}),
        f2=Counter({ab: 9, bc: 9, a: 3, b: 5, c: 2}),
    )
    stats.right_neighbors[ab].update({c: 5})
    stats.left_neighbors[bc].update({a: 1, b: 1, c: 1})
    stats.right_neighbors[bc].update({a: 1, b: 1, c: 1})
    return stats


def record(ratio, score, eligible=True, observed=True):
    return TokenRecord(
        token=9, text='x', f1=int(observed), f2=0, ratio=ratio, s_left=score, s_right=score,
        score=score, ascii_only=True, eligible=eligible,
    )


class TestRatio:

    def test_fi_ratio(self, abc_model, abc_stats):
        ids = abc_model.token_to_id
        assert fi_ratio(abc_stats, ids[b'ab']) == pytest.approx(0.1)
        assert fi_ratio(abc_stats, ids[b'abc']) == 1.0
        assert fi_ratio(abc_stats, ids[b'ca']) is None

    def test_thresholds_are_inclusive(self):
        thresholds = Thresholds(0.5, 1.0)

        assert categorize(record(0.5, 1.0), thresholds) == RESIDUE
        assert categorize(record(0.5, 1.01), thresholds) == KEPT_LOW_RATIO
        assert categorize(record(0.51, 0.0), thresholds) == FREQUENT
        assert categorize(record(None, 0.0, observed=False), thresholds) == UNOBSERVED
        assert categorize(record(0.0, 0.0, eligible=False), thresholds) == EXCLUDED

    @pytest.mark.parametrize('ratio,entropy', [(-0.1, 1.0), (1.5, 1.0), (0.5, -1.0)])
    def test_invalid_thresholds(self, ratio, entropy):
        with pytest.raises(ValueError):
            Thresholds(ratio, entropy)


class TestClassify:

    def test_categories(self, abc_model, abc_stats):
        report = classify(abc_stats, abc_model, Thresholds(0.5, 0.5))
        categories = {r.text: r.category for r in report.records}

        assert categories == {
            'a': EXCLUDED, 'b': EXCLUDED, 'c': EXCLUDED,
            'ab': RESIDUE, 'bc': KEPT_LOW_RATIO, 'abc': FREQUENT, 'ca': UNOBSERVED,
        }
        bc = report.records[abc_model.token_to_id[b'bc']]
        assert bc.score == pytest.approx(math.log(3))

    def test_removal_set(self, abc_model, abc_stats):
        report = classify(abc_stats, abc_model, Thresholds(0.5, 0.5))
        ids = abc_model.token_to_id

        assert report.imr == {ids[b'ab']}
        assert report.removal_set(include_unobserved=True) == {ids[b'ab'], ids[b'ca']}

    def test_zero_thresholds_when_every_token_survives(self, abab_model):
        stats = accumulate(abab_model, [b'abab', b'ab'], f2_mode=F2_TRACE)
        assert classify(stats, abab_model, Thresholds(0.0, 0.0)).imr == frozenset()

    def test_summary(self, abc_model, abc_stats):
        summary = classify(abc_stats, abc_model, Thresholds(0.5, 0.5)).summary()

        assert summary['vocab_size'] == 7
        assert summary['ascii_vocab'] == 7
        assert summary['scrap_without_entropy'] == 2
        assert summary['scrap_without_entropy_percent'] == pytest.approx(28.5714)
        assert summary['scrap_with_entropy'] == 1
        assert summary['scrap_with_entropy_percent'] == pytest.approx(14.2857)

    def test_specials_never_residue(self):
        model = build_standard_model(['a', 'b'], [('a', 'b')], specials=['<eos>'])
        stats = accumulate(model, [b'ab<eos>'] * 3, f2_mode=F2_TRACE)
        report = classify(stats, model, Thresholds(1.0, 10.0))

        eos = model.token_to_id[b'<eos>']
        assert report.records[eos].category == EXCLUDED
        assert report.summary()['ascii_vocab'] == 3

    def test_non_ascii_never_residue(self):
        model = build_standard_model(['é', 'a', 'b'], [('é', 'a'), ('éa', 'b'), ('a', 'b'), ('ab', 'a')])
        stats = accumulate(model, ['éab'.encode('utf-8'), b'aba'] * 4, f2_mode=F2_TRACE)
        report = classify(stats, model, Thresholds(1.0, 100.0))

        ea = report.records[model.token_to_id['éa'.encode('utf-8')]]
        ab = report.records[model.token_to_id[b'ab']]
        assert ea.ratio == 0.0 and ea.score == 0.0
        assert ab.ratio == 0.0 and ab.score == 0.0
        assert ea.category == EXCLUDED
        assert not ea.ascii_only
        assert ab.category == RESIDUE
        assert report.imr == {ab.token}

    def test_stats_from_another_tokenizer(self, abc_stats, abab_model):
        with pytest.raises(IntegrityError):
            classify(abc_stats, abab_model, Thresholds(0.5, 0.5))

    def test_report_rows(self, abc_model, abc_stats):
        report = classify(abc_stats, abc_model, Thresholds(0.5, 0.5))
        restored = ResidueReport.from_rows(report.to_rows({'subcommand': 'identify_residue'}))

        assert restored.imr == report.imr
        assert restored.summary() == report.summary()

    def test_rows_without_header(self):
        with pytest.raises(IntegrityError):
            ResidueReport.from_rows([{'token': 0}])


class TestSweep:

    def test_monotone_in_both_thresholds(self, trained_model, fixture_corpus):
        stats = accumulate(trained_model, fixture_corpus)
        frame = sweep(stats, trained_model, [0.9, 0.1, 0.3, 0.5], [4.0, 0.5, 1.0, 2.0])

        assert list(frame['ratio'].unique()) == [0.1, 0.3, 0.5, 0.9]
        table = frame.pivot(index='ratio', columns='entropy', values='imr_size')
        assert (table.diff(axis=0).fillna(0) >= 0).all().all()
        assert (table.diff(axis=1).fillna(0) >= 0).all().all()

    def test_matches_classify(self, abc_model, abc_stats):
        frame = sweep(abc_stats, abc_model, [0.5], [0.5, 2.0])
        assert list(frame['imr_size']) == [1, 2]

    def test_empty_grid(self, abc_model, abc_stats):
        with pytest.raises(ValueError):
            sweep(abc_stats, abc_model, [], [1.0])


def test_summary_csv(tmp_path, abc_model, abc_stats):
    report = classify(abc_stats, abc_model, Thresholds(0.5, 0.5))
    path = tmp_path / 'summary.csv'
    write_csv_with_provenance(summary_frame(report, 'abc'), path, {'model_hash': abc_model.content_hash})

    assert path.read_text().startswith('# model_hash: "')
    frame = read_csv_with_provenance(path)
    assert frame.loc[0, 'Tokenizer'] == 'abc'
    assert frame.loc[0, 'Scrap # (Ent.)'] == 1

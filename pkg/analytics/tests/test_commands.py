import json
from io import StringIO

import pytest
from django.core.management import call_command
from django.core.management.base import CommandError

from analytics.reports import read_csv_with_provenance
from bpe.loaders import save_native


@pytest.fixture
def workspace(tmp_path, trained_model, fixture_corpus):
    save_native(trained_model, tmp_path / 'tiny.json')
    (tmp_path / 'corpus.txt').write_bytes(b'\n'.join(fixture_corpus) + b'\n')
    return tmp_path


def analyze(workspace, output='stats.json', **options):
    call_command(
        'analyze_corpus', tokenizer=str(workspace / 'tiny.json'), corpus=[str(workspace / 'corpus.txt')],
        output=str(workspace / output), stdout=StringIO(), **options,
    )
    return json.loads((workspace / output).read_text())


def counters(stats):
    return {key: stats[key] for key in ('f1', 'f2', 'left_neighbors', 'right_neighbors', 'total_docs')}


def identify(workspace, **options):
    out = StringIO()
    call_command(
        'identify_residue', tokenizer=str(workspace / 'tiny.json'), stats=str(workspace / 'stats.json'),
        report=str(workspace / 'report.jsonl'), imr=str(workspace / 'imr.json'), stdout=out, **options,
    )
    return out.getvalue()


class TestAnalyzeCorpus:

    def test_writes_stats(self, workspace, fixture_corpus):
        stats = analyze(workspace)

        assert stats['format'] == 'corpus-stats'
        assert stats['total_docs'] == len(fixture_corpus)
        assert stats['f2_mode'] == 'tree'
        assert stats['run_config']['subcommand'] == 'analyze_corpus'
        assert stats['run_config']['corpus'] == [str((workspace / 'corpus.txt').resolve())]

    def test_rerun_is_byte_identical(self, workspace):
        analyze(workspace)
        first = (workspace / 'stats.json').read_bytes()
        analyze(workspace)
        assert (workspace / 'stats.json').read_bytes() == first

    def test_celery_shards_match_single_pass(self, workspace):
        single = analyze(workspace, f2_mode='trace')
        sharded = analyze(workspace, output='sharded.json', f2_mode='trace', shards=3)

        assert counters(sharded) == counters(single)
        assert sharded['run_config']['shards'] == 3

    def test_shard_files_merge(self, workspace):
        single = analyze(workspace)
        for index in range(2):
            shard = analyze(workspace, output=f'shard{index}.json', shard_index=index, shard_count=2)
            assert shard['format'] == 'corpus-stats-shard'

        call_command(
            'merge_stats', str(workspace / 'shard1.json'), str(workspace / 'shard0.json'),
            output=str(workspace / 'merged.json'), stdout=StringIO(),
        )
        merged = json.loads((workspace / 'merged.json').read_text())
        assert counters(merged) == counters(single)

    def test_tree_mode_on_rank_greedy(self, workspace, greedy_model):
        save_native(greedy_model, workspace / 'greedy.json')

        with pytest.raises(CommandError) as excinfo:
            call_command(
                'analyze_corpus', tokenizer=str(workspace / 'greedy.json'), corpus=[str(workspace / 'corpus.txt')],
                output=str(workspace / 'out.json'), f2_mode='tree',
            )
        assert excinfo.value.returncode == 2

    def test_two_tokenizer_sources(self, workspace):
        with pytest.raises(CommandError) as excinfo:
            analyze(workspace, tiktoken=str(workspace / 'tiny.json'))
        assert excinfo.value.returncode == 2


class TestIdentifyResidue:

    def test_report_and_imr(self, workspace):
        analyze(workspace)
        output = identify(workspace, preset='caption')

        imr = json.loads((workspace / 'imr.json').read_text())
        rows = [json.loads(line) for line in (workspace / 'report.jsonl').read_text().splitlines()]
        assert imr['thresholds'] == {'ratio': 0.25, 'entropy': 4.0}
        assert rows[0]['format'] == 'residue-report'
        assert rows[0]['summary']['scrap_with_entropy'] == len(imr['imr'])
        assert len(rows) == 1 + rows[0]['summary']['vocab_size']
        assert {row['token'] for row in rows[1:] if row['category'] == 'residue'} == set(imr['imr'])
        assert 'Scrap # (Ent.)' in output

    def test_rerun_is_byte_identical(self, workspace):
        analyze(workspace)
        identify(workspace, ratio=0.3, entropy=3.0)
        first = (workspace / 'report.jsonl').read_bytes(), (workspace / 'imr.json').read_bytes()

        analyze(workspace)
        identify(workspace, ratio=0.3, entropy=3.0)
        assert ((workspace / 'report.jsonl').read_bytes(), (workspace / 'imr.json').read_bytes()) == first

    def test_thresholds_required(self, workspace):
        analyze(workspace)

        with pytest.raises(CommandError) as excinfo:
            identify(workspace)
        assert excinfo.value.returncode == 2

        with pytest.raises(CommandError) as excinfo:
            identify(workspace, ratio=0.3)
        assert excinfo.value.returncode == 2

    def test_stats_from_another_tokenizer(self, workspace, abab_model):
        analyze(workspace)
        save_native(abab_model, workspace / 'tiny.json')

        with pytest.raises(CommandError) as excinfo:
            identify(workspace, preset='caption')
        assert excinfo.value.returncode == 3

    def test_corrupt_stats(self, workspace):
        (workspace / 'stats.json').write_text('{"format": "corpus-stats",')

        with pytest.raises(CommandError) as excinfo:
            identify(workspace, preset='caption')
        assert excinfo.value.returncode == 3


def test_sweep_thresholds(workspace, fixture_corpus):
    analyze(workspace)
    (workspace / 'heldout.txt').write_bytes(b'\n'.join(fixture_corpus[:40]) + b'\n')
    call_command(
        'sweep_thresholds', tokenizer=str(workspace / 'tiny.json'), stats=str(workspace / 'stats.json'),
        ratios=[0.1, 0.5], entropies=[1.0, 4.0], output=str(workspace / 'sweep.csv'),
        heldout=[str(workspace / 'heldout.txt')], stdout=StringIO(),
    )

    header = (workspace / 'sweep.csv').read_text().splitlines()[0]
    frame = read_csv_with_provenance(workspace / 'sweep.csv')
    assert header.startswith('# model_hash:')
    assert list(frame.columns) == ['ratio', 'entropy', 'imr_size', 'imr_percent', 'inflation']
    assert len(frame) == 4
    assert (frame['inflation'] > 0).all()


def test_single_point_sweep_matches_identify(workspace):
    analyze(workspace)
    identify(workspace, ratio=0.25, entropy=4.0)
    call_command(
        'sweep_thresholds', tokenizer=str(workspace / 'tiny.json'), stats=str(workspace / 'stats.json'),
        ratios=[0.25], entropies=[4.0], output=str(workspace / 'sweep.csv'), stdout=StringIO(),
    )

    summary = json.loads((workspace / 'report.jsonl').read_text().splitlines()[0])['summary']
    row = read_csv_with_provenance(workspace / 'sweep.csv').iloc[0]
    assert row['imr_size'] == summary['scrap_with_entropy']
    assert row['imr_percent'] == pytest.approx(summary['scrap_with_entropy_percent'])

import logging

from django.conf import settings

from analytics.corpus import load_corpus, select_shard
from analytics.corpus_stats import (
    F2_MODES, NEIGHBOR_SCOPES, SCOPE_DOCUMENT, accumulate, accumulate_shard, default_f2_mode, shard_counts,
)
from analytics.tasks import run_sharded
from config.pipeline import PipelineCommand, resolve_path, usage_error

logger = logging.getLogger(__name__)


class Command(PipelineCommand):
    help = 'Count final/intermediate token occurrences and neighbors over a corpus'

    def add_arguments(self, parser):
        self.add_tokenizer_arguments(parser)
        self.add_corpus_arguments(parser)
        parser.add_argument('--output', required=True, help='Statistics JSON to write')
        parser.add_argument(
            '--f2-mode', choices=F2_MODES,
            help='Default: tree for standard tokenizers, trace for rank_greedy ones',
        )
        parser.add_argument('--neighbor-scope', choices=NEIGHBOR_SCOPES, default=SCOPE_DOCUMENT)
        parser.add_argument(
            '--no-multiplicity', action='store_false', dest='count_multiplicity',
            help='Tree mode: count each descendant once instead of once per subtree occurrence',
        )
        parser.add_argument('--shards', type=int, help='Celery shards to fan out (default ANALYZE_WORKERS)')
        parser.add_argument('--shard-index', type=int, help='Only count this shard and write a shard file')
        parser.add_argument('--shard-count', type=int)
        parser.add_argument('--sample-size', type=int, help='Reservoir-sample this many documents')
        parser.add_argument('--seed', type=int, default=0)

    def run(self, **options):
        model = self.load_tokenizer(options)
        f2_mode = options.get('f2_mode') or default_f2_mode(model)
        shard_index, shard_count = options.get('shard_index'), options.get('shard_count')
        if (shard_index is None) != (shard_count is None):
            raise usage_error("--shard-index and --shard-count go together")
        shards = options.get('shards') or settings.ANALYZE_WORKERS
        if shards < 1:
            raise usage_error(f"--shards must be positive, got {shards}")

        corpus = [resolve_path(path) for path in options['corpus']]
        common = dict(
            f2_mode=f2_mode,
            neighbor_scope=options['neighbor_scope'],
            count_multiplicity=options['count_multiplicity'],
        )

        if shard_index is not None:
            documents = load_corpus(corpus, options['text_field'], options.get('sample_size'), options['seed'])
            stats = accumulate_shard(model, select_shard(documents, shard_index, shard_count), **common)
            shards = shard_count
        elif shards > 1:
            stats = run_sharded(
                model, corpus, options['text_field'], shards,
                sample_size=options.get('sample_size'), seed=options['seed'], **common,
            )
        else:
            documents = load_corpus(corpus, options['text_field'], options.get('sample_size'), options['seed'])
            stats = accumulate(model, documents, **common)

        config = self.run_config(
            options,
            corpus=corpus,
            text_field=options['text_field'],
            outputs={'stats': resolve_path(options['output'])},
            shards=shards,
            seed=options['seed'],
            sample_size=options.get('sample_size'),
            options={'shard_index': shard_index},
            **common,
        )
        self.write_json(options['output'], stats.to_dict(config.to_dict()))

        for label, value in shard_counts(stats):
            self.stdout.write(f"{label}: {value}")
        self.stdout.write(self.style.SUCCESS(f"Statistics written to {options['output']}"))

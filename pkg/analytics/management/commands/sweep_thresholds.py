import logging

from analytics.corpus import load_corpus
from analytics.corpus_stats import CorpusStats
from analytics.reports import render_frame, write_csv_with_provenance
from analytics.residue import Thresholds, residue_ids, score_tokens, sweep
from config.pipeline import PipelineCommand, resolve_path, usage_error
from pruning.evaluation import token_inflation
from pruning.lite import build_lite

logger = logging.getLogger(__name__)


class Command(PipelineCommand):
    help = 'Tabulate IMR size over a grid of ratio and entropy thresholds'

    def add_arguments(self, parser):
        self.add_tokenizer_arguments(parser)
        parser.add_argument('--stats', required=True, help='Statistics JSON from analyze_corpus')
        parser.add_argument('--ratios', type=float, nargs='+', required=True)
        parser.add_argument('--entropies', type=float, nargs='+', required=True)
        parser.add_argument('--output', required=True, help='CSV to write')
        self.add_corpus_arguments(parser, flag='--heldout', required=False)

    def run(self, **options):
        if not options['ratios'] or not options['entropies']:
            raise usage_error("Threshold grids must not be empty")
        model = self.load_tokenizer(options)
        stats = CorpusStats.from_dict(self.read_json(options['stats']))
        self.check_hash(stats.model_hash, model.content_hash, 'Statistics file')

        frame = sweep(stats, model, options['ratios'], options['entropies'])

        heldout = [resolve_path(path) for path in options.get('heldout') or []]
        if heldout:
            documents = list(load_corpus(heldout, options['text_field']))
            records = score_tokens(stats, model)
            frame['inflation'] = [
                round(token_inflation(build_lite(model, residue_ids(records, Thresholds(r, s))), documents), 6)
                for r, s in zip(frame['ratio'], frame['entropy'])
            ]
            logger.info(f"Measured token inflation on {len(documents)} held-out documents")

        config = self.run_config(
            options,
            corpus=heldout,
            text_field=options['text_field'] if heldout else None,
            f2_mode=stats.f2_mode,
            neighbor_scope=stats.neighbor_scope,
            count_multiplicity=stats.count_multiplicity,
            outputs={'sweep': resolve_path(options['output'])},
            options={
                'stats': resolve_path(options['stats']),
                'ratios': sorted(set(options['ratios'])),
                'entropies': sorted(set(options['entropies'])),
            },
        )
        write_csv_with_provenance(frame, options['output'], {
            'model_hash': model.content_hash,
            'run_config': config.to_dict(),
        })
        self.stdout.write(render_frame(frame))

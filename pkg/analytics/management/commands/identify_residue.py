import logging

from analytics.corpus_stats import CorpusStats
from analytics.reports import records_frame, render_frame, summary_frame
from analytics.residue import RESIDUE, UNOBSERVED, Thresholds, classify
from config.pipeline import PipelineCommand, resolve_path

logger = logging.getLogger(__name__)


class Command(PipelineCommand):
    help = 'Classify tokens by FI ratio and neighbor entropy and write the residue report and IMR file'

    def add_arguments(self, parser):
        self.add_tokenizer_arguments(parser)
        self.add_threshold_arguments(parser)
        parser.add_argument('--stats', required=True, help='Statistics JSON from analyze_corpus')
        parser.add_argument('--report', required=True, help='Residue report (JSON lines) to write')
        parser.add_argument('--imr', required=True, help='IMR id file to write')
        parser.add_argument('--name', default='tokenizer', help='Row label in the summary table')
        parser.add_argument('--show', type=int, default=0, help='Print the N lowest-ratio residues')

    def run(self, **options):
        model = self.load_tokenizer(options)
        ratio, entropy = self.resolve_thresholds(options, model.flavor)
        thresholds = Thresholds(ratio, entropy)

        stats = CorpusStats.from_dict(self.read_json(options['stats']))
        self.check_hash(stats.model_hash, model.content_hash, 'Statistics file')
        report = classify(stats, model, thresholds)

        config = self.run_config(
            options,
            thresholds=(ratio, entropy),
            f2_mode=stats.f2_mode,
            neighbor_scope=stats.neighbor_scope,
            count_multiplicity=stats.count_multiplicity,
            outputs={'report': resolve_path(options['report']), 'imr': resolve_path(options['imr'])},
            options={'stats': resolve_path(options['stats']), 'preset': options.get('preset')},
        ).to_dict()

        self.write_jsonl(options['report'], report.to_rows(config))
        self.write_json(options['imr'], {
            'model_hash': model.content_hash,
            'thresholds': thresholds.to_dict(),
            'imr': sorted(report.imr),
            'unobserved': sorted(r.token for r in report.by_category(UNOBSERVED)),
            'run_config': config,
        })

        self.stdout.write(render_frame(summary_frame(report, options['name'])))
        if options['show']:
            frame = records_frame(report, RESIDUE).head(options['show'])
            if not frame.empty:
                self.stdout.write(render_frame(frame[['token', 'text', 'f1', 'f2', 'ratio', 'score']]))
        self.stdout.write(self.style.SUCCESS(
            f"{len(report.imr)} residue tokens at r={ratio}, s={entropy}"
        ))

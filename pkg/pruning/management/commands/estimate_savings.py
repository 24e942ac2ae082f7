from pathlib import Path
from typing import List

from django.conf import settings

from config.pipeline import PipelineCommand, RunConfig, resolve_path, usage_error
from pruning.lite import load_lite
from pruning.savings import SavingsInput, estimate_savings


class Command(PipelineCommand):
    help = 'Estimate parameter and FLOP savings from removing vocabulary rows'

    def add_arguments(self, parser):
        parser.add_argument('--lite', help='Lite tokenizer; supplies vocab size and removed fraction')
        parser.add_argument('--vocab-size', type=int)
        parser.add_argument('--removed-fraction', type=float)
        parser.add_argument('--hidden-dim', type=int, required=True)
        parser.add_argument('--total-params', type=int, required=True)
        parser.add_argument('--sequence-length', type=int, required=True)
        parser.add_argument('--num-layers', type=int, help='Adds attention FLOPs to the denominators')
        tying = parser.add_mutually_exclusive_group()
        tying.add_argument('--tied', action='store_true', dest='tied_embedding', default=True)
        tying.add_argument('--untied', action='store_false', dest='tied_embedding')
        parser.add_argument('--ngram', type=int, nargs='+', default=[2, 3], help='n-gram orders to report')
        parser.add_argument('--output', help='Savings JSON to write')

    def run(self, **options):
        vocab_size, fraction = options.get('vocab_size'), options.get('removed_fraction')
        sources: List[str] = []
        model_hash = None
        if options.get('lite'):
            lite = load_lite(Path(options['lite']), cache_size=settings.BPE_CACHE_SIZE)
            vocab_size = vocab_size or len(lite.base)
            if fraction is None:
                fraction = len(lite.removed_ids) / len(lite.base)
            sources.append(resolve_path(options['lite']))
            model_hash = lite.content_hash
        if vocab_size is None or fraction is None:
            raise usage_error("Give --vocab-size and --removed-fraction, or --lite")

        inputs = SavingsInput.validated({
            'vocab_size': vocab_size,
            'removed_fraction': fraction,
            'hidden_dim': options['hidden_dim'],
            'tied_embedding': options['tied_embedding'],
            'total_params': options['total_params'],
            'sequence_length': options['sequence_length'],
            'num_layers': options.get('num_layers'),
            'ngram_orders': options['ngram'],
        })
        report = estimate_savings(inputs)

        for line in report.lines():
            self.stdout.write(line)
        if options.get('output'):
            config = RunConfig(
                subcommand=self.command_name,
                tokenizer=sources,
                outputs={'savings': resolve_path(options['output'])},
            )
            self.write_json(options['output'], {
                **report.to_dict(),
                'model_hash': model_hash,
                'run_config': config.to_dict(),
            })

import logging

from analytics.corpus import load_corpus
from bpe.loaders import save_native
from bpe.pretokenizer import PRETOKENIZER_MODES, WHITESPACE_PREFIX, PretokenizerConfig
from bpe.trainer import train_tiny
from config.pipeline import PipelineCommand, resolve_path

logger = logging.getLogger(__name__)


class Command(PipelineCommand):
    help = 'Train a small standard-flavor BPE tokenizer and save it in the native JSON format'

    def add_arguments(self, parser):
        self.add_corpus_arguments(parser)
        parser.add_argument('--vocab-size', type=int, required=True, help='Target size, specials excluded')
        parser.add_argument('--output', required=True, help='Native tokenizer JSON to write')
        parser.add_argument('--pretokenizer', choices=PRETOKENIZER_MODES, default=WHITESPACE_PREFIX)
        parser.add_argument(
            '--observed-alphabet', action='store_false', dest='full_byte_alphabet',
            help='Start from the bytes seen in the corpus instead of all 256; unseen bytes will not encode',
        )
        parser.add_argument('--special-token', action='append', default=[], dest='special_tokens')
        parser.add_argument('--sample-size', type=int, help='Reservoir-sample this many documents')
        parser.add_argument('--seed', type=int, default=0)

    def run(self, **options):
        documents = load_corpus(
            options['corpus'], options['text_field'], options.get('sample_size'), options['seed'],
        )
        model = train_tiny(
            documents,
            options['vocab_size'],
            pretokenizer=PretokenizerConfig(mode=options['pretokenizer']),
            full_byte_alphabet=options['full_byte_alphabet'],
            special_tokens=[token.encode('utf-8') for token in options['special_tokens']],
        )

        config = self.run_config(
            options,
            corpus=[resolve_path(path) for path in options['corpus']],
            text_field=options['text_field'],
            outputs={'tokenizer': resolve_path(options['output'])},
            seed=options['seed'],
            sample_size=options.get('sample_size'),
            options={
                'vocab_size': options['vocab_size'],
                'pretokenizer': options['pretokenizer'],
                'full_byte_alphabet': options['full_byte_alphabet'],
                'special_tokens': list(options['special_tokens']),
            },
        )
        save_native(model, options['output'], extra={
            'model_hash': model.content_hash,
            'run_config': config.to_dict(),
        })
        self.stdout.write(self.style.SUCCESS(
            f"Trained {len(model)} tokens ({len(model.merges)} merges) -> {options['output']}"
        ))

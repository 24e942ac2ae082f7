import logging
from pathlib import Path
from typing import List

from django.conf import settings

from analytics.corpus import iter_documents
from analytics.reports import render_frame
from bpe.tokenizer import render_tokens
from config.pipeline import PipelineCommand, resolve_path, usage_error
from pruning.evaluation import compare_modes, mode_counts
from pruning.lite import INCREMENTAL, ORIGINAL, SPLIT_ONLY, SPLIT_REMERGE, IncrementalEncoder, encode_lite, load_lite

logger = logging.getLogger(__name__)

MODE_CHOICES = {
    'original': ORIGINAL,
    'split-only': SPLIT_ONLY,
    'split-remerge': SPLIT_REMERGE,
    'incremental': INCREMENTAL,
}


class Command(PipelineCommand):
    help = 'Encode text with a lite tokenizer, one output line per input line'

    def add_arguments(self, parser):
        parser.add_argument('--lite', required=True, help='Lite tokenizer JSON from prune_tokenizer')
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument('--input', nargs='+', help='Text files (one document per line) or JSONL')
        source.add_argument('--text', help='Encode this string')
        parser.add_argument('--text-field', default='text', help='JSONL field holding the document text')
        parser.add_argument('--mode', choices=sorted(MODE_CHOICES), default='split-remerge')
        parser.add_argument('--show-tokens', action='store_true', help='Print tokens joined by "|"')
        parser.add_argument('--compare', action='store_true', help='Per-document token counts for every mode')
        parser.add_argument('--only-affected', action='store_true', help='Compare only documents holding a removed token')
        parser.add_argument('--output', help='Write here instead of stdout, with a .meta.json sidecar')

    def tokenizer_paths(self, options: dict) -> List[str]:
        return [resolve_path(options['lite'])]

    def _documents(self, options) -> List[bytes]:
        if options.get('text') is not None:
            return [options['text'].encode('utf-8')]
        lines = []
        for path in options['input']:
            if Path(path).suffix.lower() in ('.jsonl', '.ndjson'):
                lines.extend(iter_documents([path], options['text_field']))
            else:
                data = Path(path).read_bytes()
                lines.extend(data.split(b'\n')[:-1] if data.endswith(b'\n') else data.split(b'\n'))
        return [line.rstrip(b'\r') for line in lines]

    def run(self, **options):
        if options['only_affected'] and not options['compare']:
            raise usage_error("--only-affected only applies with --compare")
        lite = load_lite(Path(options['lite']), cache_size=settings.BPE_CACHE_SIZE)
        mode = MODE_CHOICES[options['mode']]
        documents = self._documents(options)

        if options['compare']:
            counts = mode_counts(lite, documents, only_affected=options['only_affected'])
            lines = [
                '\t'.join(str(row[column]) for column in counts.columns)
                for _, row in counts.iterrows()
            ]
            lines.append(render_frame(compare_modes(counts, lite)))
        else:
            lines = [self._encode_line(lite, doc, mode, options['show_tokens']) for doc in documents]

        output = '\n'.join(lines) + ('\n' if lines else '')
        if options.get('output'):
            Path(options['output']).write_text(output, encoding='utf-8')
            config = self.run_config(
                options,
                corpus=[resolve_path(path) for path in options.get('input') or []],
                text_field=options['text_field'],
                outputs={'encoded': resolve_path(options['output'])},
                options={
                    'mode': mode,
                    'show_tokens': options['show_tokens'],
                    'compare': options['compare'],
                    'only_affected': options['only_affected'],
                },
            )
            self.write_json(f"{options['output']}.meta.json", {
                'model_hash': lite.content_hash,
                'removed_ids': len(lite.removed_ids),
                'lines': len(documents),
                'run_config': config.to_dict(),
            })
        else:
            self.stdout.write(output, ending='')

    @staticmethod
    def _encode_line(lite, doc: bytes, mode: str, show_tokens: bool) -> str:
        if mode == INCREMENTAL:
            encoder = IncrementalEncoder(lite)
            encoder.feed(doc)
            encoder.flush()
            ids = encoder.emitted
        else:
            ids = list(encode_lite(lite, doc, mode).ids)
        if show_tokens:
            return render_tokens(lite.base, ids)
        return ' '.join(str(token) for token in ids)
